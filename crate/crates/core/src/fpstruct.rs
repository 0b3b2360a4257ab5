//! Additive structure of vectors over F_p: signed solution counts, level
//! sets of the Fourier side, B-sets and the W_t grading of integer vectors.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::atom::cos_table;
use crate::math::{binomial_u128, NeumaierSum};
use crate::prime::mul_mod;
use crate::types::{Budgets, FpVector, IntVector, Support};
use crate::{Error, Result};

/// Distinctness exponent fixed for `R_k^*`.
pub const STAR_BETA: f64 = 0.01;

/// Residues of an integer vector, with whether reduction is injective on the
/// box `[-(p-1)/2, (p-1)/2]ⁿ` containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub vector: FpVector,
    pub injective: bool,
}

pub fn reduce_mod_p(w: &IntVector, p: u64) -> Result<Reduction> {
    let vector = FpVector::from_signed(w.coords(), p)?;
    let injective = 2 * (w.max_abs() as u128) < p as u128;
    Ok(Reduction { vector, injective })
}

/// `R_k(a)`: signed `2k`-tuples `±a_{i₁} ± … ± a_{i₂ₖ} ≡ 0`, indices free.
///
/// Evaluated as `(1/p) Σ_r (Σⱼ 2cos(2π r aⱼ / p))^{2k}` and rounded; the
/// accumulator must sit within 0.4 of an integer.
pub fn rk_exact(a: &FpVector, k: u32, budgets: &Budgets) -> Result<u128> {
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    let p = a.modulus();
    let n = a.dim();
    let work = p as u128 * n as u128;
    if work > budgets.fourier_work as u128 {
        return Err(Error::budget("moment identity p*n", work, budgets.fourier_work as u128));
    }
    let e = 2 * k as i32;
    let top = libm::pow(2.0 * n as f64, e as f64);
    // worst-case float error of the average is about 2k·ε·(2n)^{2k}
    if 2.0 * k as f64 * top * f64::EPSILON > 0.05 {
        return Err(Error::PrecisionExhausted {
            what: "moment identity",
            value: top,
            distance: f64::NAN,
        });
    }
    let table = cos_table(p);
    let mut total = NeumaierSum::new();
    for r in 0..p {
        let mut s = NeumaierSum::new();
        for &c in a.coords() {
            s.add(2.0 * table[mul_mod(r, c, p) as usize]);
        }
        total.add(libm::pow(s.value(), e as f64));
    }
    let v = total.value() / p as f64;
    let nearest = libm::round(v);
    let distance = libm::fabs(v - nearest);
    if distance > 0.4 || nearest < 0.0 {
        return Err(Error::PrecisionExhausted {
            what: "moment identity",
            value: v,
            distance,
        });
    }
    Ok(nearest as u128)
}

/// Solution counts from direct enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RkCount {
    pub k: u32,
    pub beta: f64,
    /// `R_k`: all solutions.
    pub total: u128,
    /// `R_k^β`: solutions using at least `⌈(1+β)k⌉` distinct indices.
    pub restricted: u128,
}

/// `⌈(1+β)k⌉`, tolerant of `(1+β)k` landing a hair above an integer.
pub fn distinct_threshold(k: u32, beta: f64) -> usize {
    let x = (1.0 + beta) * k as f64;
    libm::ceil(x - 1e-9) as usize
}

pub fn rk_restricted_bruteforce(a: &FpVector, k: u32, beta: f64, budgets: &Budgets) -> Result<RkCount> {
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::invalid("beta", "must lie in [0, 1]"));
    }
    let n = a.dim();
    let tuples = (2 * n as u128).checked_pow(2 * k);
    match tuples {
        Some(t) if t <= budgets.tuple_enumeration as u128 => {}
        _ => {
            return Err(Error::budget(
                "signed tuple enumeration",
                tuples.unwrap_or(u128::MAX),
                budgets.tuple_enumeration as u128,
            ))
        }
    }
    let (total, restricted) = enumerate_signed(a.coords(), a.modulus(), 2 * k as usize, distinct_threshold(k, beta));
    Ok(RkCount {
        k,
        beta,
        total,
        restricted,
    })
}

/// `R_k^*(a)` by enumeration.
pub fn rk_star(a: &FpVector, k: u32, budgets: &Budgets) -> Result<u128> {
    Ok(rk_restricted_bruteforce(a, k, STAR_BETA, budgets)?.restricted)
}

fn enumerate_signed(a: &[u64], p: u64, slots: usize, threshold: usize) -> (u128, u128) {
    struct Walk<'a> {
        a: &'a [u64],
        p: u64,
        slots: usize,
        threshold: usize,
        uses: Vec<u32>,
        total: u128,
        restricted: u128,
    }
    impl Walk<'_> {
        fn go(&mut self, depth: usize, sum: u64, distinct: usize) {
            if depth == self.slots {
                if sum == 0 {
                    self.total += 1;
                    if distinct >= self.threshold {
                        self.restricted += 1;
                    }
                }
                return;
            }
            for i in 0..self.a.len() {
                let fresh = self.uses[i] == 0;
                self.uses[i] += 1;
                let d = distinct + fresh as usize;
                let c = self.a[i];
                let plus = if sum + c >= self.p { sum + c - self.p } else { sum + c };
                let minus = if sum >= c { sum - c } else { sum + self.p - c };
                self.go(depth + 1, plus, d);
                self.go(depth + 1, minus, d);
                self.uses[i] -= 1;
            }
        }
    }
    let mut w = Walk {
        a,
        p,
        slots,
        threshold,
        uses: vec![0; a.len()],
        total: 0,
        restricted: 0,
    };
    w.go(0, 0, 0);
    (w.total, w.restricted)
}

/// `(40 k^{1-β} n^{1+β})^k`, the slack between `R_k` and `R_k^β`.
pub fn restricted_count_slack(k: u32, n: usize, beta: f64) -> f64 {
    let kf = k as f64;
    libm::pow(40.0 * libm::pow(kf, 1.0 - beta) * libm::pow(n as f64, 1.0 + beta), kf)
}

/// `p² Σⱼ min_q |r aⱼ/p - q|²` for every residue `r`, as exact integers.
pub fn scaled_wrapped_distances(a: &FpVector, budgets: &Budgets) -> Result<Vec<u128>> {
    let p = a.modulus();
    if p > budgets.residue_modulus {
        return Err(Error::budget("level set modulus", p as u128, budgets.residue_modulus as u128));
    }
    Ok((0..p)
        .map(|r| {
            a.coords()
                .iter()
                .map(|&c| {
                    let x = mul_mod(r, c, p);
                    let d = x.min(p - x) as u128;
                    d * d
                })
                .sum()
        })
        .collect())
}

/// Largest integer `m` with `m ≤ t·p²`, exactly.
fn level_cutoff(t: f64, p: u64) -> Result<u128> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "must be finite and nonnegative"));
    }
    let q = BigRational::from_float(t).ok_or(Error::invalid("t", "not representable"))?;
    let scaled = q * BigRational::from_integer(BigInt::from(p) * BigInt::from(p));
    let f = scaled.floor().to_integer();
    if f.is_negative() {
        return Ok(0);
    }
    Ok(f.to_u128().unwrap_or(u128::MAX))
}

/// `T_t = {r ∈ F_p : Σⱼ min_q |r aⱼ/p - q|² ≤ t}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelSet {
    pub t: f64,
    pub members: Vec<u64>,
    pub size: usize,
}

pub fn level_set(a: &FpVector, t: f64, budgets: &Budgets) -> Result<LevelSet> {
    let d = scaled_wrapped_distances(a, budgets)?;
    let cut = level_cutoff(t, a.modulus())?;
    let members: Vec<u64> = (0..a.modulus()).filter(|&r| d[r as usize] <= cut).collect();
    Ok(LevelSet {
        t,
        size: members.len(),
        members,
    })
}

/// `|T_t|` for each `t`, sharing one pass over the residues.
pub fn level_set_sizes(a: &FpVector, ts: &[f64], budgets: &Budgets) -> Result<Vec<usize>> {
    let d = scaled_wrapped_distances(a, budgets)?;
    ts.iter()
        .map(|&t| {
            let cut = level_cutoff(t, a.modulus())?;
            Ok(d.iter().filter(|&&x| x <= cut).count())
        })
        .collect()
}

/// The two level-set inequalities behind the Halász-type bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelSetReport {
    pub size_t: usize,
    pub size_2m: usize,
    pub rk: u128,
    /// `√(2t)·|T_{2M}|/√M + 1`.
    pub first_rhs: f64,
    /// `√2·p·R_k/(2^{2k} n^{2k})`.
    pub second_rhs: f64,
    pub first_holds: bool,
    pub second_holds: bool,
    /// `30M ≤ |supp(a)|` and `80kM ≤ n`, under which the bound built on these
    /// inequalities is stated.
    pub bound_hypotheses: bool,
}

impl LevelSetReport {
    pub fn holds(&self) -> bool {
        self.first_holds && self.second_holds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevelSetOutcome {
    NotApplicable(&'static str),
    Evaluated(LevelSetReport),
}

/// Checks `|T_t| ≤ √(2t)|T_{2M}|/√M + 1` and `|T_{2M}| ≤ √2 p R_k/(2^{2k} n^{2k})`
/// when `t ≤ 2M ≤ |supp(a)|/15`.
pub fn check_hal4(a: &FpVector, k: u32, m: f64, t: f64, budgets: &Budgets) -> Result<LevelSetOutcome> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::invalid("M", "must be finite and positive"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "must be finite and nonnegative"));
    }
    if t > 2.0 * m {
        return Ok(LevelSetOutcome::NotApplicable("t > 2M"));
    }
    if 2.0 * m > a.support_size() as f64 / 15.0 {
        return Ok(LevelSetOutcome::NotApplicable("2M > |supp(a)|/15"));
    }
    let sizes = level_set_sizes(a, &[t, 2.0 * m], budgets)?;
    let rk = rk_exact(a, k, budgets)?;
    let n = a.dim() as f64;
    let p = a.modulus() as f64;
    let first_rhs = libm::sqrt(2.0 * t) * sizes[1] as f64 / libm::sqrt(m) + 1.0;
    let denom = libm::pow(4.0 * n * n, k as f64);
    let second_rhs = core::f64::consts::SQRT_2 * p * rk as f64 / denom;
    Ok(LevelSetOutcome::Evaluated(LevelSetReport {
        size_t: sizes[0],
        size_2m: sizes[1],
        rk,
        first_rhs,
        second_rhs,
        first_holds: sizes[0] as f64 <= first_rhs,
        second_holds: sizes[1] as f64 <= second_rhs,
        bound_hypotheses: 30.0 * m <= a.support_size() as f64 && 80.0 * k as f64 * m <= n,
    }))
}

/// Parameters of `B^{s₁}_{k,s₂,≥t}(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BSetParams {
    pub k: u32,
    pub s1: usize,
    pub s2: usize,
    pub t: u64,
}

impl BSetParams {
    pub fn validate(&self, n: usize, p: u64) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be positive"));
        }
        if !(1 <= self.s2 && self.s2 <= self.s1 && self.s1 <= n) {
            return Err(Error::invalid("s1/s2", "need 1 <= s2 <= s1 <= n"));
        }
        if !(1 <= self.t && self.t <= p) {
            return Err(Error::invalid("t", "must lie in [1, p]"));
        }
        Ok(())
    }

    /// `k = max(1, ⌊n^{0.01}⌋)`, `s₁ = s₂ = ⌈n^{0.99} μ⌉` (at most n).
    pub fn for_dimension(n: usize, mu: f64, t: u64) -> Self {
        let nf = n as f64;
        let k = (libm::floor(libm::pow(nf, 0.01)) as u32).max(1);
        let s = (libm::ceil(libm::pow(nf, 0.99) * mu) as usize).clamp(1, n.max(1));
        BSetParams { k, s1: s, s2: s, t }
    }
}

/// Lexicographic `m`-subsets of `0..n`.
fn for_each_subset<F: FnMut(&[usize]) -> Result<()>>(n: usize, m: usize, mut f: F) -> Result<()> {
    if m > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..m).rev().find(|&i| idx[i] < i + n - m) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest integer `t` with `a ∈ B^{s₁}_{k,s₂,≥t}`, or `None` when
/// `|supp(a)| < s₁`. Sub-vectors are coordinate projections and `|b|` is the
/// projection length.
pub fn bset_tmax(a: &FpVector, k: u32, s1: usize, s2: usize, budgets: &Budgets) -> Result<Option<u128>> {
    let n = a.dim();
    if k == 0 || s2 == 0 || s2 > s1 {
        return Err(Error::invalid("s1/s2", "need k >= 1 and 1 <= s2 <= s1"));
    }
    if a.support_size() < s1 {
        return Ok(None);
    }
    let subsets: u128 = (s2..=n).map(|m| binomial_u128(n as u64, m as u64)).fold(0u128, |x, y| x.saturating_add(y));
    if subsets > budgets.subset_enumeration as u128 {
        return Err(Error::budget("sub-vector enumeration", subsets, budgets.subset_enumeration as u128));
    }
    let p = a.modulus() as u128;
    let four_k = 4u128.pow(k);
    let mut tmax = u128::MAX;
    for m in s2..=n {
        let scale = (m as u128)
            .checked_pow(2 * k)
            .and_then(|x| x.checked_mul(four_k))
            .ok_or(Error::Overflow("2^{2k}|b|^{2k}"))?;
        for_each_subset(n, m, |idx| {
            let b = a.project(idx);
            if b.support_size() < s2 {
                return Ok(());
            }
            let r = rk_star(&b, k, budgets)?;
            let num = r.checked_mul(p).ok_or(Error::Overflow("R_k^* p"))?;
            tmax = tmax.min(num / scale);
            Ok(())
        })?;
    }
    Ok(Some(tmax))
}

/// `a ∈ B^{s₁}_{k,s₂,≥t}(n)`.
pub fn bset_membership(a: &FpVector, params: &BSetParams, budgets: &Budgets) -> Result<bool> {
    params.validate(a.dim(), a.modulus())?;
    Ok(match bset_tmax(a, params.k, params.s1, params.s2, budgets)? {
        None => false,
        Some(tmax) => params.t as u128 <= tmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WtClass {
    /// Fails the support gate `|supp(w)| ≥ s₁`.
    OutsideW,
    /// `ι(w) ∈ B_{≥t-1} \ B_{≥t}`.
    Class(u64),
    /// `ι(w) ∈ B_{≥p}`: no class in `[1, p]`.
    AboveClasses,
}

/// The W_t class of `w`, located by binary search on the monotone
/// membership `t ↦ [ι(w) ∈ B_{≥t}]`. `params.t` is ignored.
pub fn classify_wt(w: &IntVector, p: u64, params: &BSetParams, budgets: &Budgets) -> Result<WtClass> {
    let a = reduce_mod_p(w, p)?.vector;
    params.validate(a.dim(), p).or_else(|e| match e {
        Error::InvalidParameter { name: "t", .. } => Ok(()),
        e => Err(e),
    })?;
    let tmax = match bset_tmax(&a, params.k, params.s1, params.s2, budgets)? {
        None => return Ok(WtClass::OutsideW),
        Some(v) => v,
    };
    let member = |t: u64| t as u128 <= tmax;
    if member(p) {
        return Ok(WtClass::AboveClasses);
    }
    // largest t in [0, p) with membership; t = 0 always holds
    let (mut lo, mut hi) = (0u64, p);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if member(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(WtClass::Class(lo + 1))
}

/// Exhaustive `|B^{s₁}_{k,s₂,≥t}(n)|` with the counting lemma's bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BSetCount {
    pub count: u64,
    /// `n ln 200 + (2k-1) ln(s₂/s₁) + n ln p + (s₂-n) ln t`.
    pub log_bound: f64,
    /// The bound is at least `pⁿ`, so it says nothing.
    pub vacuous: bool,
}

pub fn count_bset_log_bound(n: usize, p: u64, params: &BSetParams) -> f64 {
    let nf = n as f64;
    nf * libm::log(200.0)
        + (2.0 * params.k as f64 - 1.0) * libm::log(params.s2 as f64 / params.s1 as f64)
        + nf * libm::log(p as f64)
        + (params.s2 as f64 - nf) * libm::log(params.t as f64)
}

/// Largest-`t` profile over all of `F_pⁿ` (`None` marks vectors below the
/// support gate), in lexicographic order of coordinates.
pub fn bset_profile(n: usize, p: u64, k: u32, s1: usize, s2: usize, budgets: &Budgets) -> Result<Vec<Option<u128>>> {
    let space = (p as u128).checked_pow(n as u32);
    let space = match space {
        Some(s) if s <= budgets.exhaustive_space as u128 => s as usize,
        _ => {
            return Err(Error::budget(
                "exhaustive F_p^n sweep",
                space.unwrap_or(u128::MAX),
                budgets.exhaustive_space as u128,
            ))
        }
    };
    let mut out = Vec::with_capacity(space);
    let mut coords = vec![0u64; n];
    for _ in 0..space {
        let a = FpVector::new(coords.clone(), p)?;
        out.push(bset_tmax(&a, k, s1, s2, budgets)?);
        for c in coords.iter_mut().rev() {
            *c += 1;
            if *c < p {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

pub fn count_bset(n: usize, p: u64, params: &BSetParams, budgets: &Budgets) -> Result<BSetCount> {
    if !crate::prime::is_odd_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let log_bound = count_bset_log_bound(n, p, params);
    let vacuous = log_bound >= n as f64 * libm::log(p as f64);
    if params.s1 > n {
        return Ok(BSetCount {
            count: 0,
            log_bound,
            vacuous,
        });
    }
    params.validate(n, p)?;
    let profile = bset_profile(n, p, params.k, params.s1, params.s2, budgets)?;
    let count = profile
        .iter()
        .filter(|t| matches!(t, Some(v) if *v >= params.t as u128))
        .count() as u64;
    Ok(BSetCount {
        count,
        log_bound,
        vacuous,
    })
}
