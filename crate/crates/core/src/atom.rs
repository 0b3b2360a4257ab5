//! Laws of lazy random walks `Y = Σ ηᵢ wᵢ` over ℤ and F_p, their largest
//! atoms, Lévy concentration and the characteristic-function bound.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::math::{adaptive_simpson, NeumaierSum, Proportion};
use crate::sample::SeedSpec;
use crate::types::{Budgets, CalibrationConstants, FpVector, IntVector, LazyDist, UnitVector};
use crate::{Error, Result};

/// Below this modulus the Fourier branch sums cosine products directly.
pub const DIRECT_FOURIER_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Domain {
    Integers,
    Residues(u64),
}

/// Point masses on a contiguous integer grid or on all residues mod p.
///
/// `probs[i]` is the mass at `offset + i`. For residues `offset` is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDistribution {
    pub domain: Domain,
    pub offset: i64,
    pub probs: Vec<f64>,
    pub total_mass: f64,
}

impl AtomDistribution {
    fn new(domain: Domain, offset: i64, mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total_mass = probs.iter().copied().collect::<NeumaierSum>().value();
        AtomDistribution {
            domain,
            offset,
            probs,
            total_mass,
        }
    }

    /// Mass at `x` (a residue is reduced mod p first).
    pub fn prob(&self, x: i64) -> f64 {
        match self.domain {
            Domain::Integers => {
                let i = x as i128 - self.offset as i128;
                if i < 0 || i >= self.probs.len() as i128 {
                    0.0
                } else {
                    self.probs[i as usize]
                }
            }
            Domain::Residues(p) => self.probs[(x as i128).rem_euclid(p as i128) as usize],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Largest atom, ties broken toward the smallest absolute value and then
    /// the positive sign (residues compare by centered representative).
    pub fn max_atom(&self) -> AtomProb {
        let mut best = AtomProb {
            rho: f64::NEG_INFINITY,
            argmax_value: 0,
        };
        let mut consider = |x: i64, p: f64| {
            if p > best.rho {
                best = AtomProb { rho: p, argmax_value: x };
            }
        };
        match self.domain {
            Domain::Integers => {
                let lo = self.offset;
                let hi = self.offset + self.probs.len() as i64 - 1;
                let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as i64;
                for m in 0..=reach {
                    for x in [m, -m] {
                        if (m == 0 && x < 0) || x < lo || x > hi {
                            continue;
                        }
                        consider(x, self.probs[(x - lo) as usize]);
                    }
                }
            }
            Domain::Residues(p) => {
                let half = (p / 2) as i64;
                for m in 0..=half {
                    for x in [m, -m] {
                        if m == 0 && x < 0 {
                            continue;
                        }
                        let r = x.rem_euclid(p as i64);
                        consider(r, self.probs[r as usize]);
                    }
                }
            }
        }
        best
    }

    /// Folds an integer law onto residues mod `p`.
    pub fn fold_mod(&self, p: u64) -> Result<AtomDistribution> {
        if self.domain != Domain::Integers {
            return Err(Error::invalid("law", "only integer laws can be folded"));
        }
        if p == 0 || p > usize::MAX as u64 {
            return Err(Error::invalid("p", "modulus out of range"));
        }
        let mut acc = vec![NeumaierSum::new(); p as usize];
        for (i, &m) in self.probs.iter().enumerate() {
            let x = self.offset as i128 + i as i128;
            acc[x.rem_euclid(p as i128) as usize].add(m);
        }
        Ok(AtomDistribution::new(
            Domain::Residues(p),
            0,
            acc.iter().map(|s| s.value()).collect(),
        ))
    }
}

/// The largest atom and one value attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtomProb {
    pub rho: f64,
    /// Integer value, or residue in `[0, p)`.
    pub argmax_value: i64,
}

fn checked_radius(w: &IntVector, budgets: &Budgets) -> Result<usize> {
    let l1 = w.l1_norm();
    if l1 > budgets.grid_cap as u128 {
        return Err(Error::budget("integer walk grid", l1, budgets.grid_cap as u128));
    }
    Ok(l1 as usize)
}

/// Exact law of `Σ ηᵢ wᵢ` on `[-Σ|wᵢ|, Σ|wᵢ|]` by sequential convolution.
///
/// Each step writes `(1-μ)·P(x) + μ/2·(P(x-w) + P(x+w))`; the bracketed pair
/// is added in the same order at `x` and `-x`, so symmetry is exact.
pub fn walk_law_int(w: &IntVector, dist: &LazyDist, budgets: &Budgets) -> Result<AtomDistribution> {
    let radius = checked_radius(w, budgets)?;
    let len = 2 * radius + 1;
    let stay = 1.0 - dist.mu();
    let half = dist.mu() / 2.0;
    let mut cur = vec![0.0f64; len];
    let mut next = vec![0.0f64; len];
    cur[radius] = 1.0;
    let mut reach = 0usize;
    for &c in w.coords() {
        let s = c.unsigned_abs() as usize;
        if s == 0 {
            continue;
        }
        let new_reach = reach + s;
        let lo = radius - new_reach;
        let hi = radius + new_reach;
        let old_lo = radius - reach;
        let old_hi = radius + reach;
        let get = |v: &[f64], i: isize| -> f64 {
            if i < old_lo as isize || i > old_hi as isize {
                0.0
            } else {
                v[i as usize]
            }
        };
        for i in lo..=hi {
            let ii = i as isize;
            let pair = get(&cur, ii - s as isize) + get(&cur, ii + s as isize);
            next[i] = stay * get(&cur, ii) + half * pair;
        }
        core::mem::swap(&mut cur, &mut next);
        reach = new_reach;
    }
    Ok(AtomDistribution::new(Domain::Integers, -(radius as i64), cur))
}

/// `sup_x P(Σ ηᵢ wᵢ = x)`.
pub fn atom_prob_int(w: &IntVector, dist: &LazyDist, budgets: &Budgets) -> Result<AtomProb> {
    Ok(walk_law_int(w, dist, budgets)?.max_atom())
}

/// Exact rational law of `Σ ηᵢ wᵢ`, with μ taken as the exact binary value
/// of the given float. Intended for small cross-checks.
pub fn walk_law_int_exact(w: &IntVector, mu: f64, budgets: &Budgets) -> Result<Vec<BigRational>> {
    LazyDist::new(mu)?;
    let radius = checked_radius(w, budgets)?;
    let mu_q = BigRational::from_float(mu).ok_or(Error::invalid("mu", "not representable"))?;
    let two = BigRational::from_integer(BigInt::from(2));
    let half = &mu_q / &two;
    let stay = BigRational::one() - &mu_q;
    let len = 2 * radius + 1;
    let mut cur = vec![BigRational::zero(); len];
    cur[radius] = BigRational::one();
    for &c in w.coords() {
        let s = c.unsigned_abs() as usize;
        if s == 0 {
            continue;
        }
        let mut next = vec![BigRational::zero(); len];
        for i in 0..len {
            if cur[i].is_zero() {
                continue;
            }
            next[i] += &stay * &cur[i];
            let share = &half * &cur[i];
            next[i + s] += &share;
            next[i - s] += share;
        }
        cur = next;
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FpAlgorithm {
    /// Convolution over residues, `O(n·p)`.
    ResidueDp,
    /// Character-sum evaluation of the Fourier identity.
    Fourier,
}

/// Exact law of `Σ ηᵢ aᵢ` over F_p.
pub fn walk_law_fp(a: &FpVector, dist: &LazyDist, algorithm: FpAlgorithm, budgets: &Budgets) -> Result<AtomDistribution> {
    match algorithm {
        FpAlgorithm::ResidueDp => walk_law_fp_dp(a, dist, budgets),
        FpAlgorithm::Fourier => walk_law_fp_fourier(a, dist, budgets),
    }
}

fn walk_law_fp_dp(a: &FpVector, dist: &LazyDist, budgets: &Budgets) -> Result<AtomDistribution> {
    let p = a.modulus();
    if p > budgets.residue_modulus {
        return Err(Error::budget("residue convolution modulus", p as u128, budgets.residue_modulus as u128));
    }
    let pu = p as usize;
    let stay = 1.0 - dist.mu();
    let half = dist.mu() / 2.0;
    let mut cur = vec![0.0f64; pu];
    let mut next = vec![0.0f64; pu];
    cur[0] = 1.0;
    for &c in a.coords() {
        if c == 0 {
            continue;
        }
        let s = c as usize;
        for r in 0..pu {
            let down = cur[if r >= s { r - s } else { r + pu - s }];
            let up = cur[if r + s < pu { r + s } else { r + s - pu }];
            next[r] = stay * cur[r] + half * (down + up);
        }
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(AtomDistribution::new(Domain::Residues(p), 0, cur))
}

/// `cos(2π m / p)` for `m ∈ [0, p)`, computed on the first half and mirrored.
pub(crate) fn cos_table(p: u64) -> Vec<f64> {
    let pu = p as usize;
    let mut t = vec![0.0f64; pu];
    for m in 0..=pu / 2 {
        t[m] = libm::cos(2.0 * PI * m as f64 / p as f64);
    }
    for m in pu / 2 + 1..pu {
        t[m] = t[pu - m];
    }
    t
}

/// `φ(r) = Πⱼ (1 - μ + μ cos(2π r aⱼ / p))` for every residue `r`.
pub fn fp_char_products(a: &FpVector, dist: &LazyDist, table: &[f64]) -> Vec<f64> {
    let p = a.modulus();
    let mu = dist.mu();
    let nz: Vec<u64> = a.coords().iter().copied().filter(|&c| c != 0).collect();
    (0..p)
        .map(|r| {
            nz.iter()
                .map(|&c| 1.0 - mu + mu * table[crate::prime::mul_mod(r, c, p) as usize])
                .product()
        })
        .collect()
}

fn walk_law_fp_fourier(a: &FpVector, dist: &LazyDist, budgets: &Budgets) -> Result<AtomDistribution> {
    let p = a.modulus();
    let work = p as u128 * a.dim() as u128;
    if work > budgets.fourier_work as u128 {
        return Err(Error::budget("Fourier evaluation p*n", work, budgets.fourier_work as u128));
    }
    let table = cos_table(p);
    let phi = fp_char_products(a, dist, &table);
    let probs = inverse_character_sum(&phi, &table, p);
    Ok(AtomDistribution::new(Domain::Residues(p), 0, probs))
}

/// `P(q) = (1/p) Σ_r cos(2π r q / p) φ(r)`; φ is real and even in `r`.
#[cfg(feature = "std")]
fn inverse_character_sum(phi: &[f64], table: &[f64], p: u64) -> Vec<f64> {
    if p < DIRECT_FOURIER_LIMIT {
        return direct_character_sum(phi, table, p);
    }
    use rustfft::num_complex::Complex;
    let mut buf: Vec<Complex<f64>> = phi.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut planner = rustfft::FftPlanner::<f64>::new();
    planner.plan_fft_forward(p as usize).process(&mut buf);
    buf.iter().map(|z| z.re / p as f64).collect()
}

#[cfg(not(feature = "std"))]
fn inverse_character_sum(phi: &[f64], table: &[f64], p: u64) -> Vec<f64> {
    direct_character_sum(phi, table, p)
}

fn direct_character_sum(phi: &[f64], table: &[f64], p: u64) -> Vec<f64> {
    let pu = p as usize;
    (0..pu)
        .map(|q| {
            let mut s = NeumaierSum::new();
            let mut idx = 0usize;
            for &f in phi {
                s.add(table[idx] * f);
                idx += q;
                if idx >= pu {
                    idx -= pu;
                }
            }
            s.value() / p as f64
        })
        .collect()
}

/// Largest residue atom; uses the residue convolution when the modulus fits
/// its budget and the Fourier identity otherwise.
pub fn atom_prob_fp(a: &FpVector, dist: &LazyDist, budgets: &Budgets) -> Result<AtomProb> {
    let alg = if a.modulus() <= budgets.residue_modulus {
        FpAlgorithm::ResidueDp
    } else {
        FpAlgorithm::Fourier
    };
    Ok(walk_law_fp(a, dist, alg, budgets)?.max_atom())
}

/// Monte Carlo estimate of the largest atom of `Σ ηᵢ wᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McAtomEstimate {
    /// Frequency of the modal bin with its Wilson 99% interval.
    pub frequency: Proportion,
    pub argmax_value: i64,
}

pub fn atom_prob_mc(w: &IntVector, dist: &LazyDist, trials: u64, seed: SeedSpec) -> Result<McAtomEstimate> {
    if trials < 100 {
        return Err(Error::invalid("trials", "need at least 100 trials"));
    }
    if w.l1_norm() > i64::MAX as u128 {
        return Err(Error::Overflow("walk range exceeds 64 bits"));
    }
    let nz: Vec<i64> = w.coords().iter().copied().filter(|&c| c != 0).collect();
    let mut s = seed.stream();
    let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
    for _ in 0..trials {
        let mut y = 0i64;
        for &c in &nz {
            y += s.lazy(dist) as i64 * c;
        }
        *hist.entry(y).or_insert(0) += 1;
    }
    let mut best: Option<(i64, u64)> = None;
    for (&x, &cnt) in &hist {
        let better = match best {
            None => true,
            Some((bx, bc)) => {
                cnt > bc || (cnt == bc && (x.unsigned_abs(), x < 0) < (bx.unsigned_abs(), bx < 0))
            }
        };
        if better {
            best = Some((x, cnt));
        }
    }
    let (x, cnt) = best.unwrap_or((0, 0));
    Ok(McAtomEstimate {
        frequency: Proportion::wilson99(cnt, trials),
        argmax_value: x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LevyMethod {
    /// Sliding window over the exact integer law; needs an integer direction.
    ExactRational,
    MonteCarlo { trials: u64, seed: SeedSpec },
}

/// Relative slack when converting the window width to a count of lattice
/// steps, so that widths landing exactly on an integer are not lost to
/// rounding of `‖w‖₂`.
const WINDOW_SLACK: f64 = 1e-12;

/// `sup_x P(|S - x| ≤ δ)` for `S = Σ ηᵢ aᵢ` (closed window of radius δ).
pub fn levy_concentration(
    a: &UnitVector,
    dist: &LazyDist,
    delta: f64,
    method: LevyMethod,
    budgets: &Budgets,
) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", "must be finite and nonnegative"));
    }
    match method {
        LevyMethod::ExactRational => {
            let w = a.integer_direction().ok_or(Error::NonRationalDirection)?;
            let law = walk_law_int(w, dist, budgets)?;
            let width = 2.0 * delta * w.l2_norm();
            Ok(window_max(&law.probs, width))
        }
        LevyMethod::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::invalid("trials", "must be positive"));
            }
            let mut s = seed.stream();
            let coords = a.coords();
            let mut xs: Vec<f64> = (0..trials)
                .map(|_| {
                    let mut acc = 0.0;
                    for &c in coords {
                        acc += s.lazy(dist) as f64 * c;
                    }
                    acc
                })
                .collect();
            xs.sort_by(|x, y| x.total_cmp(y));
            let mut best = 0usize;
            let mut lo = 0usize;
            for hi in 0..xs.len() {
                while xs[hi] - xs[lo] > 2.0 * delta {
                    lo += 1;
                }
                best = best.max(hi - lo + 1);
            }
            Ok(best as f64 / trials as f64)
        }
    }
}

/// Largest mass inside a closed window of the given width sliding over the
/// unit grid (a width of `m` steps covers `m + 1` points).
fn window_max(probs: &[f64], width: f64) -> f64 {
    let steps = libm::floor(width * (1.0 + WINDOW_SLACK) + WINDOW_SLACK);
    if steps >= probs.len() as f64 {
        return probs.iter().copied().collect::<NeumaierSum>().value().min(1.0);
    }
    let span = steps as usize + 1;
    let mut prefix = Vec::with_capacity(probs.len() + 1);
    let mut acc = NeumaierSum::new();
    prefix.push(0.0);
    for &p in probs {
        acc.add(p);
        prefix.push(acc.value());
    }
    let mut best: f64 = 0.0;
    for start in 0..=probs.len() - span {
        let mass = if span == 1 {
            probs[start]
        } else {
            prefix[start + span] - prefix[start]
        };
        best = best.max(mass);
    }
    best.min(1.0)
}

/// `|E e^{iθS}| = Πⱼ |1 - μ + μ cos(aⱼ θ)|`.
pub fn char_fn(a: &[f64], dist: &LazyDist, theta: f64) -> f64 {
    let mu = dist.mu();
    a.iter()
        .map(|&c| libm::fabs(1.0 - mu + mu * libm::cos(c * theta)))
        .product::<f64>()
        .min(1.0)
}

/// `C ∫_{-2}^{2} |E exp(iθS/δ)| dθ`, clipped to 1.
pub fn esseen_bound(a: &UnitVector, dist: &LazyDist, delta: f64, constants: &CalibrationConstants) -> Result<f64> {
    Ok((constants.esseen_const * esseen_integral(a, dist, delta)?).min(1.0))
}

/// `∫_{-2}^{2} Πⱼ |1 - μ + μ cos(aⱼθ/δ)| dθ` to absolute error 1e-8.
pub fn esseen_integral(a: &UnitVector, dist: &LazyDist, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", "must be finite and positive"));
    }
    let coords = a.coords();
    // about eight panels per period of the fastest factor
    let cycles = 2.0 * a.max_abs() / delta / (2.0 * PI);
    let panels = (libm::ceil(8.0 * cycles) as usize).clamp(16, 1 << 20);
    let f = |theta: f64| char_fn(coords, dist, theta / delta);
    Ok(2.0 * adaptive_simpson(&f, 0.0, 2.0, 0.5e-8, panels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> IntVector {
        IntVector::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn int_law_small_cases() {
        let b = Budgets::default();
        let law = walk_law_int(&iv(&[1]), &LazyDist::new(1.0).unwrap(), &b).unwrap();
        assert_eq!(law.offset, -1);
        assert!(close(law.prob(-1), 0.5) && close(law.prob(1), 0.5) && law.prob(0) == 0.0);

        let law = walk_law_int(&iv(&[1, 1]), &LazyDist::new(0.5).unwrap(), &b).unwrap();
        assert!(close(law.prob(0), 0.375));
        assert!(close(law.prob(1), 0.25) && close(law.prob(-1), 0.25));
        assert!(close(law.prob(2), 0.0625) && close(law.prob(-2), 0.0625));

        let law = walk_law_int(&iv(&[0, 0, 0]), &LazyDist::new(0.2).unwrap(), &b).unwrap();
        assert_eq!(law.probs, vec![1.0]);
    }

    #[test]
    fn int_atoms() {
        let b = Budgets::default();
        let r = atom_prob_int(&iv(&[1]), &LazyDist::new(0.3).unwrap(), &b).unwrap();
        assert!(close(r.rho, 0.7) && r.argmax_value == 0);
        let r = atom_prob_int(&iv(&[1, 2, 4, 8, 16, 32]), &LazyDist::new(1.0).unwrap(), &b).unwrap();
        assert!(close(r.rho, 1.0 / 64.0));
        // Rademacher: tie between ±1 resolves to +1
        let r = atom_prob_int(&iv(&[1]), &LazyDist::new(1.0).unwrap(), &b).unwrap();
        assert_eq!(r.argmax_value, 1);
    }

    #[test]
    fn grid_cap_enforced() {
        let b = Budgets {
            grid_cap: 10,
            ..Budgets::default()
        };
        let e = walk_law_int(&iv(&[6, 5]), &LazyDist::new(0.5).unwrap(), &b).unwrap_err();
        assert!(e.is_budget());
    }

    #[test]
    fn fp_laws_agree() {
        let b = Budgets::default();
        let d = LazyDist::new(0.5).unwrap();
        let a = FpVector::new(vec![1, 1], 5).unwrap();
        for alg in [FpAlgorithm::ResidueDp, FpAlgorithm::Fourier] {
            let law = walk_law_fp(&a, &d, alg, &b).unwrap();
            let want = [0.375, 0.25, 0.0625, 0.0625, 0.25];
            for (q, w) in want.iter().enumerate() {
                assert!((law.prob(q as i64) - w).abs() < 1e-14, "{alg:?} {q}");
            }
        }
        let a = FpVector::new(vec![1, 2], 3).unwrap();
        let r = atom_prob_fp(&a, &LazyDist::new(1.0).unwrap(), &b).unwrap();
        assert!(close(r.rho, 0.5) && r.argmax_value == 0);
        let a = FpVector::new(vec![3, 0, 0], 7).unwrap();
        let r = atom_prob_fp(&a, &LazyDist::new(0.4).unwrap(), &b).unwrap();
        assert!(close(r.rho, 0.6) && r.argmax_value == 0);
    }

    #[cfg(feature = "std")]
    #[test]
    fn fast_transform_matches_direct() {
        let b = Budgets::default();
        let d = LazyDist::new(0.3).unwrap();
        let p = 10_007;
        let a = FpVector::new(vec![1, 17, 400, 9001, 3], p).unwrap();
        let fft = walk_law_fp(&a, &d, FpAlgorithm::Fourier, &b).unwrap();
        let dp = walk_law_fp(&a, &d, FpAlgorithm::ResidueDp, &b).unwrap();
        for q in 0..p as usize {
            assert!((fft.probs[q] - dp.probs[q]).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_law_matches_float() {
        let b = Budgets::default();
        let w = iv(&[1, -2, 3]);
        let exact = walk_law_int_exact(&w, 0.3, &b).unwrap();
        let float = walk_law_int(&w, &LazyDist::new(0.3).unwrap(), &b).unwrap();
        for (q, f) in exact.iter().zip(&float.probs) {
            let qf = num_traits::ToPrimitive::to_f64(q).unwrap();
            assert!((qf - f).abs() < 1e-15);
        }
    }

    #[test]
    fn levy_examples() {
        let b = Budgets::default();
        let e1 = UnitVector::from_int(&iv(&[1])).unwrap();
        let v = levy_concentration(&e1, &LazyDist::new(0.3).unwrap(), 0.0, LevyMethod::ExactRational, &b).unwrap();
        assert!(close(v, 0.7));
        let a = UnitVector::from_int(&iv(&[1, 1])).unwrap();
        let d = LazyDist::new(0.5).unwrap();
        let v = levy_concentration(&a, &d, 2.0, LevyMethod::ExactRational, &b).unwrap();
        assert!(close(v, 1.0));
        let v = levy_concentration(&a, &d, 0.1, LevyMethod::ExactRational, &b).unwrap();
        assert!(close(v, 0.375));
        // radius 1/√2 in S is one lattice step either side of 0 in Y
        let v = levy_concentration(&a, &d, core::f64::consts::FRAC_1_SQRT_2, LevyMethod::ExactRational, &b).unwrap();
        assert!(close(v, 0.875));
        let raw = UnitVector::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(
            levy_concentration(&raw, &d, 0.1, LevyMethod::ExactRational, &b),
            Err(Error::NonRationalDirection)
        );
    }

    #[test]
    fn char_fn_examples() {
        let d1 = LazyDist::new(1.0).unwrap();
        let d5 = LazyDist::new(0.5).unwrap();
        assert_eq!(char_fn(&[0.3, 0.4], &d5, 0.0), 1.0);
        assert!(close(char_fn(&[1.0], &d1, PI), 1.0));
        assert!(close(char_fn(&[1.0, 1.0], &d5, PI / 2.0), 0.25));
    }

    #[test]
    fn esseen_dominates_exact() {
        let b = Budgets::default();
        let c = CalibrationConstants::default();
        let e1 = UnitVector::from_int(&iv(&[1])).unwrap();
        let d = LazyDist::new(0.3).unwrap();
        assert!(esseen_bound(&e1, &d, 0.01, &c).unwrap() >= 0.7);
        let a = UnitVector::from_int(&iv(&[1, 1, 1, 1])).unwrap();
        let d = LazyDist::new(1.0).unwrap();
        let bound = esseen_bound(&a, &d, 0.5, &c).unwrap();
        let exact = levy_concentration(&a, &d, 0.5, LevyMethod::ExactRational, &b).unwrap();
        assert!(bound >= exact, "{bound} < {exact}");
        assert_eq!(esseen_bound(&a, &d, 1e6, &c).unwrap(), 1.0);
    }
}
