//! Dense singular-value extremes and exact integer rank.
//!
//! Singular values come from a Householder bidiagonalization followed by
//! bisection on Sturm counts of the Golub–Kahan tridiagonal form, whose
//! eigenvalues are `±σᵢ`. The minimal right singular vector is recovered by
//! shifted inverse iteration on the same tridiagonal and certified by the
//! residual `‖Mᵀ(Mv) - σₙ²v‖ / ‖v‖` against the original matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::sample::RandomMatrix;
use crate::{Error, Result};

/// Largest dimension accepted by [`singular_extremes`].
pub const MAX_DENSE_DIM: usize = 2048;

/// Residual tolerance relative to `s1²`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingularPair {
    pub s1: f64,
    pub sn: f64,
    /// `‖Mᵀ(Mv) - sn²v‖₂ / ‖v‖₂` for the returned vector.
    pub residual: f64,
    /// Unit right singular vector for `sn`.
    pub right_vector: Vec<f64>,
}

/// Upper bidiagonal factor `B = Uᵀ A V` with the right reflectors of `V`.
#[derive(Debug, Clone)]
pub struct Bidiagonal {
    pub diag: Vec<f64>,
    pub superdiag: Vec<f64>,
    /// `(start column, tau, tail)`: reflector `I - τ u uᵀ` acting on columns
    /// `start..n` with `u = (1, tail...)`.
    reflectors: Vec<(usize, f64, Vec<f64>)>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Householder vector for `x`: returns `(beta, tau)` and overwrites
/// `x[1..]` with the reflector tail (the head is an implicit 1).
fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let tail_norm = libm::sqrt(dot(&x[1..], &x[1..]));
    if tail_norm == 0.0 {
        return (alpha, 0.0);
    }
    let mag = libm::hypot(alpha, tail_norm);
    let beta = if alpha >= 0.0 { -mag } else { mag };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in x[1..].iter_mut() {
        *v *= scale;
    }
    (beta, tau)
}

/// Reduces the row-major `n×n` matrix `a` (destroyed) to upper bidiagonal form.
pub fn bidiagonalize(n: usize, a: &mut [f64]) -> Bidiagonal {
    assert_eq!(a.len(), n * n);
    let mut diag = vec![0.0; n];
    let mut superdiag = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut col = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        // left reflector zeroing column k below the diagonal
        let m = n - k;
        for i in 0..m {
            col[i] = a[(k + i) * n + k];
        }
        let (beta, tau) = householder(&mut col[..m]);
        diag[k] = beta;
        if tau != 0.0 && k + 1 < n {
            let width = n - k - 1;
            let wk = &mut w[..width];
            wk.copy_from_slice(&a[k * n + k + 1..k * n + n]);
            for i in 1..m {
                let row = &a[(k + i) * n + k + 1..(k + i) * n + n];
                axpy(col[i], row, wk);
            }
            for i in 0..m {
                let vi = if i == 0 { 1.0 } else { col[i] };
                let row = &mut a[(k + i) * n + k + 1..(k + i) * n + n];
                axpy(-tau * vi, wk, row);
            }
        }
        if k + 1 >= n {
            continue;
        }
        // right reflector zeroing row k beyond the superdiagonal
        let width = n - k - 1;
        let (beta, tau) = householder(&mut a[k * n + k + 1..k * n + n]);
        superdiag[k] = beta;
        if width > 1 {
            let u: Vec<f64> = a[k * n + k + 2..k * n + n].to_vec();
            if tau != 0.0 {
                for i in k + 1..n {
                    let row = &mut a[i * n + k + 1..i * n + n];
                    let s = row[0] + dot(&row[1..], &u);
                    let f = -tau * s;
                    row[0] += f;
                    axpy(f, &u, &mut row[1..]);
                }
            }
            reflectors.push((k + 1, tau, u));
        }
    }
    Bidiagonal {
        diag,
        superdiag,
        reflectors,
    }
}

impl Bidiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Off-diagonals of the Golub–Kahan tridiagonal: `d₀, e₀, d₁, …, dₙ₋₁`.
    fn gk_offdiag(&self) -> Vec<f64> {
        let n = self.n();
        let mut b = Vec::with_capacity(2 * n - 1);
        for i in 0..n {
            b.push(self.diag[i]);
            if i + 1 < n {
                b.push(self.superdiag[i]);
            }
        }
        b
    }

    /// `#{σᵢ < x}` for `x > 0`.
    fn count_below(b2: &[f64], x: f64, tiny: f64) -> usize {
        let mut neg = 0usize;
        let mut q = -x;
        if q < 0.0 {
            neg += 1;
        }
        for &bb in b2 {
            let prev = if q == 0.0 { -tiny } else { q };
            q = -x - bb / prev;
            if q < 0.0 {
                neg += 1;
            }
        }
        // eigenvalues below x: the n values -σᵢ plus those σᵢ < x
        neg - (b2.len() + 1) / 2
    }

    /// Every singular value, descending, by bisection.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.n();
        let (b2, upper, tiny) = self.sturm_setup();
        (0..n).rev().map(|j| kth_smallest(&b2, j, upper, tiny)).collect()
    }

    fn sturm_setup(&self) -> (Vec<f64>, f64, f64) {
        let b = self.gk_offdiag();
        let b2: Vec<f64> = b.iter().map(|x| x * x).collect();
        let frob = libm::sqrt(b2.iter().sum::<f64>());
        let upper = frob * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        let tiny = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * frob * frob);
        (b2, upper, tiny)
    }

    /// Applies `V` to a vector in the bidiagonal's right basis.
    pub fn apply_v(&self, y: &mut [f64]) {
        for (start, tau, tail) in self.reflectors.iter().rev() {
            if *tau == 0.0 {
                continue;
            }
            let seg = &mut y[*start..];
            let s = seg[0] + dot(&seg[1..], tail);
            let f = -tau * s;
            seg[0] += f;
            axpy(f, tail, &mut seg[1..]);
        }
    }
}

/// `j`-th smallest singular value (0-based) from Sturm counts.
fn kth_smallest(b2: &[f64], j: usize, upper: f64, tiny: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = upper;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if Bidiagonal::count_below(b2, mid, tiny) <= j {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the symmetric tridiagonal system `(T - σI) x = rhs` with partial
/// pivoting; zero pivots are nudged to `tiny`. `off` holds the off-diagonal.
fn shifted_tridiagonal_solve(off: &[f64], sigma: f64, rhs: &[f64], tiny: f64) -> Vec<f64> {
    let m = rhs.len();
    let mut d = vec![-sigma; m];
    let mut du: Vec<f64> = off.to_vec();
    let mut dl: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; m.saturating_sub(2)];
    let mut b = rhs.to_vec();
    for i in 0..m.saturating_sub(1) {
        if libm::fabs(d[i]) >= libm::fabs(dl[i]) {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            du[i] = t;
            if i + 2 < m {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[m - 1] == 0.0 {
        d[m - 1] = tiny;
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = b[i];
        if i + 1 < m {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < m {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = libm::sqrt(dot(v, v));
    if nrm > 0.0 {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

/// `‖Aᵀ(Av) - s²v‖₂` for unit `v`, row-major `a`.
fn normal_residual(n: usize, a: &[f64], v: &[f64], s: f64) -> f64 {
    let av: Vec<f64> = (0..n).map(|i| dot(&a[i * n..(i + 1) * n], v)).collect();
    let mut r: Vec<f64> = v.iter().map(|x| -s * s * x).collect();
    for i in 0..n {
        axpy(av[i], &a[i * n..(i + 1) * n], &mut r);
    }
    libm::sqrt(dot(&r, &r))
}

/// Largest and smallest singular values of a square row-major matrix.
pub fn singular_extremes_dense(n: usize, a: &[f64]) -> Result<SingularPair> {
    if n == 0 || a.len() != n * n {
        return Err(Error::invalid("matrix", "need a nonempty square matrix"));
    }
    if n > MAX_DENSE_DIM {
        return Err(Error::budget("dense dimension", n as u128, MAX_DENSE_DIM as u128));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    let mut work = a.to_vec();
    let bd = bidiagonalize(n, &mut work);
    let (b2, upper, tiny) = bd.sturm_setup();
    let s1 = kth_smallest(&b2, n - 1, upper, tiny);
    let sn = kth_smallest(&b2, 0, upper, tiny);
    if s1 == 0.0 {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        return Ok(SingularPair {
            s1,
            sn,
            residual: 0.0,
            right_vector: v,
        });
    }
    let off = bd.gk_offdiag();
    let m = 2 * n;
    let solve_tiny = f64::EPSILON * s1;
    // Iterates on vectors (v, 0) in interleaved order: these have equal weight on
    // the eigenvectors (v, ±u) of ±sn and none on the left null space of B.
    let mut z: Vec<f64> = (0..m)
        .map(|i| if i % 2 == 0 { 1.0 + 0.5 * libm::sin(1.0 + i as f64) } else { 0.0 })
        .collect();
    normalize(&mut z);
    let tol = RESIDUAL_TOLERANCE * s1 * s1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for it in 0..12 {
        z = shifted_tridiagonal_solve(&off, sn, &z, solve_tiny);
        for x in z.iter_mut().skip(1).step_by(2) {
            *x = 0.0;
        }
        if normalize(&mut z) == 0.0 || z.iter().any(|x| !x.is_finite()) {
            break;
        }
        if it < 2 {
            continue;
        }
        let mut v: Vec<f64> = z.iter().step_by(2).copied().collect();
        if normalize(&mut v) == 0.0 {
            continue;
        }
        bd.apply_v(&mut v);
        normalize(&mut v);
        let r = normal_residual(n, a, &v, sn);
        let better = best.as_ref().map_or(true, |(br, _)| r < *br);
        if better {
            best = Some((r, v));
        }
        if r <= tol {
            break;
        }
    }
    match best {
        Some((residual, right_vector)) if residual <= tol => Ok(SingularPair {
            s1,
            sn,
            residual,
            right_vector,
        }),
        Some((residual, _)) => Err(Error::NonConvergence {
            what: "smallest singular vector",
            detail: format!("residual {residual:e} exceeds {tol:e}"),
        }),
        None => Err(Error::NonConvergence {
            what: "smallest singular vector",
            detail: "inverse iteration broke down".into(),
        }),
    }
}

/// `s1` alone, skipping the singular-vector certificate.
pub fn largest_singular_value_dense(n: usize, a: &[f64]) -> Result<f64> {
    if n == 0 || a.len() != n * n {
        return Err(Error::invalid("matrix", "need a nonempty square matrix"));
    }
    if n > MAX_DENSE_DIM {
        return Err(Error::budget("dense dimension", n as u128, MAX_DENSE_DIM as u128));
    }
    let mut work = a.to_vec();
    let bd = bidiagonalize(n, &mut work);
    let (b2, upper, tiny) = bd.sturm_setup();
    Ok(kth_smallest(&b2, n - 1, upper, tiny))
}

pub fn singular_extremes(m: &RandomMatrix) -> Result<SingularPair> {
    singular_extremes_dense(m.n(), &m.to_f64())
}

/// All singular values of a square row-major matrix, descending.
pub fn singular_values_dense(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    if n == 0 || a.len() != n * n {
        return Err(Error::invalid("matrix", "need a nonempty square matrix"));
    }
    let mut work = a.to_vec();
    Ok(bidiagonalize(n, &mut work).singular_values())
}

/// Largest dimension accepted by [`exact_rank`].
pub const MAX_RANK_DIM: usize = 512;

/// Prime used by the modular full-rank check, `2³¹ - 1`.
const RANK_PRIME: u64 = 2_147_483_647;

fn rank_mod_p(rows: usize, cols: usize, entries: &[i64]) -> usize {
    let p = RANK_PRIME;
    let mut m: Vec<u64> = entries.iter().map(|&x| (x as i128).rem_euclid(p as i128) as u64).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| m[r * cols + c] != 0) else {
            continue;
        };
        if pr != rank {
            for j in 0..cols {
                m.swap(pr * cols + j, rank * cols + j);
            }
        }
        let inv = crate::prime::pow_mod(m[rank * cols + c], p - 2, p);
        for r in rank + 1..rows {
            let f = m[r * cols + c] * inv % p;
            if f == 0 {
                continue;
            }
            for j in c..cols {
                let sub = f * m[rank * cols + j] % p;
                let cell = &mut m[r * cols + j];
                *cell = if *cell >= sub { *cell - sub } else { *cell + p - sub };
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Fraction-free elimination in `i128`; `None` on overflow.
fn bareiss_i128(rows: usize, cols: usize, entries: &[i64]) -> Option<usize> {
    let mut m: Vec<i128> = entries.iter().map(|&x| x as i128).collect();
    let mut prev: i128 = 1;
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| m[r * cols + c] != 0) else {
            continue;
        };
        if pr != rank {
            for j in 0..cols {
                m.swap(pr * cols + j, rank * cols + j);
            }
        }
        let piv = m[rank * cols + c];
        for r in rank + 1..rows {
            let lead = m[r * cols + c];
            for j in c + 1..cols {
                let x = piv.checked_mul(m[r * cols + j])?;
                let y = lead.checked_mul(m[rank * cols + j])?;
                m[r * cols + j] = x.checked_sub(y)? / prev;
            }
            m[r * cols + c] = 0;
        }
        prev = piv;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Some(rank)
}

fn bareiss_big(rows: usize, cols: usize, entries: &[i64]) -> usize {
    let mut m: Vec<BigInt> = entries.iter().map(|&x| BigInt::from(x)).collect();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !m[r * cols + c].is_zero()) else {
            continue;
        };
        if pr != rank {
            for j in 0..cols {
                m.swap(pr * cols + j, rank * cols + j);
            }
        }
        let piv = m[rank * cols + c].clone();
        for r in rank + 1..rows {
            let lead = m[r * cols + c].clone();
            for j in c + 1..cols {
                let v = (&piv * &m[r * cols + j] - &lead * &m[rank * cols + j]) / &prev;
                m[r * cols + j] = v;
            }
            m[r * cols + c] = BigInt::zero();
        }
        prev = piv.abs() * piv.signum();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Rank over ℚ of a row-major integer matrix.
///
/// Full rank modulo a prime certifies full rank over ℚ; otherwise the rank
/// comes from fraction-free elimination, in `i128` and then in arbitrary
/// precision if an intermediate overflows.
pub fn exact_rank(rows: usize, cols: usize, entries: &[i64]) -> Result<usize> {
    if entries.len() != rows * cols {
        return Err(Error::invalid("matrix", "entry count does not match shape"));
    }
    if rows == 0 || cols == 0 {
        return Ok(0);
    }
    if rows.max(cols) > MAX_RANK_DIM {
        return Err(Error::budget("exact rank dimension", rows.max(cols) as u128, MAX_RANK_DIM as u128));
    }
    if rank_mod_p(rows, cols, entries) == rows.min(cols) {
        return Ok(rows.min(cols));
    }
    Ok(bareiss_i128(rows, cols, entries).unwrap_or_else(|| bareiss_big(rows, cols, entries)))
}

/// Exact rank of a lazy matrix.
pub fn exact_rank_matrix(m: &RandomMatrix) -> Result<usize> {
    let e = m
        .lazy_entries()
        .ok_or(Error::invalid("matrix", "exact rank needs integer entries"))?;
    let ints: Vec<i64> = e.iter().map(|&x| x as i64).collect();
    exact_rank(m.n(), m.n(), &ints)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn small_examples() {
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let s = singular_extremes_dense(3, &id).unwrap();
        assert!(rel(s.s1, 1.0) < 1e-14 && rel(s.sn, 1.0) < 1e-14);
        let d = [3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0];
        let s = singular_extremes_dense(3, &d).unwrap();
        assert!(rel(s.s1, 3.0) < 1e-14 && rel(s.sn, 1.0) < 1e-14);
        assert!((s.right_vector[2].abs() - 1.0).abs() < 1e-10);
        let ones = [1.0, 1.0, 1.0, 1.0];
        let s = singular_extremes_dense(2, &ones).unwrap();
        assert!(rel(s.s1, 2.0) < 1e-14 && s.sn < 1e-15);
        let one = singular_extremes_dense(1, &[-4.0]).unwrap();
        assert!(rel(one.s1, 4.0) < 1e-14 && rel(one.sn, 4.0) < 1e-14);
    }

    #[test]
    fn all_values_of_known_matrix() {
        // [[2,0],[0,-5]] has singular values 5, 2
        let v = singular_values_dense(2, &[2.0, 0.0, 0.0, -5.0]).unwrap();
        assert!(rel(v[0], 5.0) < 1e-14 && rel(v[1], 2.0) < 1e-14);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(exact_rank(3, 3, &[1, 0, 0, 0, 1, 0, 0, 0, 1]).unwrap(), 3);
        assert_eq!(exact_rank(2, 2, &[1, 1, 1, 1]).unwrap(), 1);
        assert_eq!(exact_rank(2, 3, &[1, 2, 3, 2, 4, 6]).unwrap(), 1);
        assert_eq!(exact_rank(2, 2, &[0, 0, 0, 0]).unwrap(), 0);
        // singular mod 2^31-1 but not over ℚ
        let p = RANK_PRIME as i64;
        assert_eq!(exact_rank(2, 2, &[p, 0, 0, 1]).unwrap(), 2);
        assert_eq!(rank_mod_p(2, 2, &[p, 0, 0, 1]), 1);
    }

    #[test]
    fn bareiss_paths_agree() {
        let e = [2, 4, 1, 3, 6, 9, 1, 2, 3, 4, 0, 1, 5, 10, 4, 7];
        let a = bareiss_i128(4, 4, &e).unwrap();
        assert_eq!(a, bareiss_big(4, 4, &e));
        assert_eq!(a, rank_mod_p(4, 4, &e));
    }
}
