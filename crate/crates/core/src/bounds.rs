//! Bound evaluators, empirical calibration of hidden constants, and a
//! log-space replay of the union bound over non-sparse integer vectors.
//!
//! Every "≲" statement becomes a [`BoundReport`] whose right side is split
//! as `rhs_fixed + C·rhs_scaled`: the part with an explicit constant and the
//! part multiplied by the unspecified absolute constant `C`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::atom::{atom_prob_fp, levy_concentration, LevyMethod};
use crate::fpstruct::{bset_tmax, rk_star};
use crate::lcd::{eta_floor, lcd, LcdParams, LcdStatus};
use crate::runner::TrialRunner;
use crate::sample::SeedSpec;
use crate::types::{Budgets, CalibrationConstants, FpVector, IntVector, LazyDist, Support, UnitVector};
use crate::{Error, Result};

/// Candidate constants at which every report is checked.
pub const CANDIDATE_CONSTANTS: [f64; 7] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Trials used for the Lévy concentration of directions without an integer
/// representative.
pub const LEVY_MC_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundName {
    LcdLevy,
    Halasz,
    WtAtom,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::LcdLevy => "lcd-levy",
            BoundName::Halasz => "halasz",
            BoundName::WtAtom => "wt-atom",
        }
    }
}

impl FromStr for BoundName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcd-levy" => Ok(BoundName::LcdLevy),
            "halasz" => Ok(BoundName::Halasz),
            "wt-atom" => Ok(BoundName::WtAtom),
            _ => Err(Error::invalid("bound", format!("unknown bound `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub name: BoundName,
    pub applicable: bool,
    /// Why the gate failed, when it did.
    pub reason: Option<String>,
    pub lhs: f64,
    pub rhs_fixed: f64,
    pub rhs_scaled: f64,
    /// Smallest `C ≥ 0` with `lhs ≤ rhs_fixed + C·rhs_scaled`.
    pub empirical_c: f64,
    pub holds_at_c: Vec<(f64, bool)>,
    /// Auxiliary quantities (gate values, counts) by name.
    pub details: Vec<(String, f64)>,
}

impl BoundReport {
    fn evaluated(name: BoundName, lhs: f64, rhs_fixed: f64, rhs_scaled: f64, details: Vec<(String, f64)>) -> Self {
        let empirical_c = if lhs <= rhs_fixed {
            0.0
        } else if rhs_scaled > 0.0 {
            (lhs - rhs_fixed) / rhs_scaled
        } else {
            f64::INFINITY
        };
        let holds_at_c = CANDIDATE_CONSTANTS
            .iter()
            .map(|&c| (c, lhs <= rhs_fixed + c * rhs_scaled))
            .collect();
        BoundReport {
            name,
            applicable: true,
            reason: None,
            lhs,
            rhs_fixed,
            rhs_scaled,
            empirical_c,
            holds_at_c,
            details,
        }
    }

    fn not_applicable(name: BoundName, lhs: f64, reason: String, details: Vec<(String, f64)>) -> Self {
        BoundReport {
            name,
            applicable: false,
            reason: Some(reason),
            lhs,
            rhs_fixed: 0.0,
            rhs_scaled: 0.0,
            empirical_c: 0.0,
            holds_at_c: Vec::new(),
            details,
        }
    }

    /// `rhs_fixed + c·rhs_scaled`.
    pub fn rhs_at(&self, c: f64) -> f64 {
        self.rhs_fixed + c * self.rhs_scaled
    }

    pub fn holds_at(&self, c: f64) -> bool {
        self.applicable && self.lhs <= self.rhs_at(c)
    }
}

fn require_lazy_half(mu: f64) -> Result<LazyDist> {
    let d = LazyDist::new(mu)?;
    d.require_at_most_half()?;
    Ok(d)
}

/// `𝓛(S, δ) ≲ δ/(√μ γ) + exp(-2μα²)`, applicable when `δ ≥ (2/π)/LCD_{γ,α}(a)`.
///
/// The gate is certified by scanning the LCD up to `(2/π)/δ`.
pub fn bound_lcd_levy(a: &UnitVector, mu: f64, delta: f64, gamma: f64, alpha: f64, budgets: &Budgets) -> Result<BoundReport> {
    let dist = require_lazy_half(mu)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", "must be finite and positive"));
    }
    let method = if a.integer_direction().is_some() {
        LevyMethod::ExactRational
    } else {
        LevyMethod::MonteCarlo {
            trials: LEVY_MC_TRIALS,
            seed: SeedSpec::default(),
        }
    };
    let lhs = levy_concentration(a, &dist, delta, method, budgets)?;
    let gate = core::f64::consts::FRAC_2_PI / delta;
    let params = LcdParams::new(gamma, alpha, gate)?;
    let scan = lcd(a, &params)?;
    let mut details = alloc::vec![("lcd_gate".into(), gate), ("lcd_lower_bound".into(), scan.lower_bound())];
    if let LcdStatus::Found { theta_star, .. } = scan.status {
        details.push(("lcd_upper_bracket".into(), theta_star));
        return Ok(BoundReport::not_applicable(
            BoundName::LcdLevy,
            lhs,
            format!("LCD <= {theta_star} is below (2/pi)/delta = {gate}"),
            details,
        ));
    }
    let scaled = delta / (libm::sqrt(mu) * gamma) + libm::exp(-2.0 * mu * alpha * alpha);
    Ok(BoundReport::evaluated(BoundName::LcdLevy, lhs, 0.0, scaled, details))
}

/// `ρ_{F_p}(a) ≤ 1/p + C(R_k^* + (40k^{0.99}n^{1.01})^k)/(2^{2k}n^{2k}√(μM)) + e^{-16μM}`
/// under `30M ≤ |supp(a)|`, `80kM ≤ n`, `k ≤ n/2`, `a ≠ 0`.
pub fn bound_halasz(a: &FpVector, mu: f64, k: u32, m: f64, budgets: &Budgets) -> Result<BoundReport> {
    let dist = require_lazy_half(mu)?;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::invalid("M", "must be finite and positive"));
    }
    let n = a.dim();
    let lhs = atom_prob_fp(a, &dist, budgets)?.rho;
    let supp = a.support_size();
    let gate = if supp == 0 {
        Some("a is the zero vector".into())
    } else if 30.0 * m > supp as f64 {
        Some(format!("30M = {} exceeds |supp(a)| = {supp}", 30.0 * m))
    } else if 80.0 * k as f64 * m > n as f64 {
        Some(format!("80kM = {} exceeds n = {n}", 80.0 * k as f64 * m))
    } else if 2 * k as usize > n {
        Some("k exceeds n/2".into())
    } else {
        None
    };
    if let Some(reason) = gate {
        return Ok(BoundReport::not_applicable(BoundName::Halasz, lhs, reason, Vec::new()));
    }
    let star = rk_star(a, k, budgets)?;
    let nf = n as f64;
    let kf = k as f64;
    let slack = libm::pow(40.0 * libm::pow(kf, 0.99) * libm::pow(nf, 1.01), kf);
    let denom = libm::pow(4.0 * nf * nf, kf) * libm::sqrt(mu * m);
    let fixed = 1.0 / a.modulus() as f64 + libm::exp(-16.0 * mu * m);
    let scaled = (star as f64 + slack) / denom;
    Ok(BoundReport::evaluated(
        BoundName::Halasz,
        lhs,
        fixed,
        scaled,
        alloc::vec![("rk_star".into(), star as f64)],
    ))
}

/// `C/p · (t/(n^{0.48}μ) + 1)` at the configured constant.
pub fn bound_lem47(t_class: u64, n: usize, mu: f64, p: u64, constants: &CalibrationConstants) -> Result<f64> {
    LazyDist::new(mu)?;
    if !(1 <= t_class && t_class <= p) {
        return Err(Error::invalid("t", "must lie in [1, p]"));
    }
    Ok(constants.atom_const * wt_atom_scale(t_class, n, mu, p))
}

fn wt_atom_scale(t: u64, n: usize, mu: f64, p: u64) -> f64 {
    (t as f64 / (libm::pow(n as f64, 0.48) * mu) + 1.0) / p as f64
}

/// Report form of the W_t atom bound for one vector of class `t`.
pub fn wt_atom_report(a: &FpVector, t_class: u64, mu: f64, budgets: &Budgets) -> Result<BoundReport> {
    let dist = LazyDist::new(mu)?;
    if !(1 <= t_class && t_class <= a.modulus()) {
        return Err(Error::invalid("t", "must lie in [1, p]"));
    }
    let lhs = atom_prob_fp(a, &dist, budgets)?.rho;
    let scaled = wt_atom_scale(t_class, a.dim(), mu, a.modulus());
    Ok(BoundReport::evaluated(
        BoundName::WtAtom,
        lhs,
        0.0,
        scaled,
        alloc::vec![("t".into(), t_class as f64)],
    ))
}

/// `ln |W_t| ≤ n ln(300 p/t)` for `√p ≤ t ≤ p`.
pub fn bound_lem48(t: f64, n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && t >= libm::sqrt(p) && t <= p) {
        return Err(Error::RegimeViolation(format!("need sqrt(p) <= t <= p, got t = {t}, p = {p}")));
    }
    Ok(n as f64 * libm::log(300.0 * p / t))
}

/// Where `(n, μ, η)` sits relative to the proven regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeFlags {
    /// `μ ≥ n^{-0.45}`.
    pub mu_ok: bool,
    /// `η ≥ 2^{-n^{0.0001}}`.
    pub eta_above_floor: bool,
    /// `η ≥ n^{-3/2}√μ`: the bound is trivially 1.
    pub trivial: bool,
}

impl RegimeFlags {
    pub fn new(n: f64, mu: f64, eta: f64) -> Self {
        RegimeFlags {
            mu_ok: mu >= libm::pow(n, -0.45),
            eta_above_floor: eta >= libm::exp2(-libm::pow(n, 0.0001)),
            trivial: eta >= trivial_eta(n, mu),
        }
    }

    pub fn in_regime(&self) -> bool {
        self.mu_ok && self.eta_above_floor
    }
}

/// `n^{-3/2} √μ`.
pub fn trivial_eta(n: f64, mu: f64) -> f64 {
    libm::pow(n, -1.5) * libm::sqrt(mu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MainBound {
    pub value: f64,
    pub regime: RegimeFlags,
}

/// `min(η n^{3/2}/√μ, 1)`; regime conditions are reported, not enforced.
pub fn bound_main(n: usize, mu: f64, eta: f64) -> Result<MainBound> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    LazyDist::new(mu)?;
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::invalid("eta", "must be finite and nonnegative"));
    }
    let nf = n as f64;
    let regime = RegimeFlags::new(nf, mu, eta);
    let value = if regime.trivial {
        1.0
    } else {
        (eta * libm::pow(nf, 1.5) / libm::sqrt(mu)).min(1.0)
    };
    Ok(MainBound { value, regime })
}

/// [`bound_main`] that rejects parameters outside the proven regime.
pub fn bound_main_strict(n: usize, mu: f64, eta: f64) -> Result<f64> {
    let b = bound_main(n, mu, eta)?;
    if !b.regime.mu_ok {
        return Err(Error::RegimeViolation(format!("mu = {mu} is below n^-0.45")));
    }
    if !b.regime.eta_above_floor {
        return Err(Error::RegimeViolation(format!("eta = {eta} is below 2^(-n^0.0001)")));
    }
    Ok(b.value)
}

/// One named logarithm of the union-bound replay.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LogTerm {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Replay {
    pub n: f64,
    pub mu: f64,
    pub eta: f64,
    /// `ln p` for the idealized prime `p = 2^{n^{0.001}}`.
    pub ln_p: f64,
    /// `ln t` at the smallest admissible class `t = √p`.
    pub ln_t: f64,
    /// ball_cover, wt_count, atom, product, target, in that order.
    pub terms: Vec<LogTerm>,
    /// `product ≤ target`.
    pub verdict: bool,
    pub regime: RegimeFlags,
    /// `η ≤ n^{-3/2}√μ`, needed for the integer-box reduction.
    pub eta_below_trivial: bool,
}

impl Replay {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// Log-space replay of
/// `(200 C* n^{1/4} √μ)ⁿ · (300 p/t)ⁿ · (2 C t/(p n^{0.48} μ))ⁿ` against
/// `n^{-0.01 n}`. Regime conditions are flagged, not enforced.
pub fn replay_pro45(n: f64, mu: f64, eta: f64, constants: &CalibrationConstants) -> Result<Replay> {
    if !(n.is_finite() && n >= 2.0) {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::invalid("mu", "must lie in (0, 1]"));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("eta", "must be finite and positive"));
    }
    constants.validate()?;
    let ln = libm::log;
    let ln_p = libm::pow(n, 0.001) * core::f64::consts::LN_2;
    let ln_t = 0.5 * ln_p;
    let cover_radius = 2.0 * constants.norm_const_star() * libm::pow(n, 0.25) * libm::sqrt(mu);
    let ball_cover = n * ln(100.0 * cover_radius);
    let wt_count = n * (ln(300.0) + ln_p - ln_t);
    let atom = n * (ln(2.0 * constants.atom_const) + ln_t - ln_p - ln(libm::pow(n, 0.48) * mu));
    let product = ball_cover + wt_count + atom;
    let target = -0.01 * n * ln(n);
    let terms = alloc::vec![
        LogTerm { name: "ball_cover", value: ball_cover },
        LogTerm { name: "wt_count", value: wt_count },
        LogTerm { name: "atom", value: atom },
        LogTerm { name: "product", value: product },
        LogTerm { name: "target", value: target },
    ];
    Ok(Replay {
        n,
        mu,
        eta,
        ln_p,
        ln_t,
        terms,
        verdict: product <= target,
        regime: RegimeFlags::new(n, mu, eta),
        eta_below_trivial: eta <= trivial_eta(n, mu),
    })
}

/// How μ follows n in a crossover scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MuRule {
    Fixed(f64),
    /// `μ = n^{-e}`.
    Power(f64),
}

impl MuRule {
    pub fn at(&self, n: f64) -> f64 {
        match *self {
            MuRule::Fixed(mu) => mu,
            MuRule::Power(e) => libm::pow(n, -e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ScanOrder {
    Ascending,
    Descending,
}

/// Smallest integer `n ∈ [n_lo, n_hi]` whose replay verdict is true, with
/// `η = 2^{-n^{0.0001}}`. The scan order only changes the evaluation order.
pub fn replay_crossover(n_lo: u64, n_hi: u64, mu_rule: MuRule, constants: &CalibrationConstants, order: ScanOrder) -> Result<Option<u64>> {
    if n_lo < 2 || n_lo > n_hi {
        return Err(Error::invalid("n range", "need 2 <= n_lo <= n_hi"));
    }
    let check = |n: u64| -> Result<bool> {
        let nf = n as f64;
        Ok(replay_pro45(nf, mu_rule.at(nf), eta_floor(n as usize), constants)?.verdict)
    };
    match order {
        ScanOrder::Ascending => {
            for n in n_lo..=n_hi {
                if check(n)? {
                    return Ok(Some(n));
                }
            }
            Ok(None)
        }
        ScanOrder::Descending => {
            let mut found = None;
            for n in (n_lo..=n_hi).rev() {
                if check(n)? {
                    found = Some(n);
                }
            }
            Ok(found)
        }
    }
}

/// Instance families used to measure hidden constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InstanceFamily {
    /// Random integer directions `w/‖w‖₂`, `|wᵢ| ≤ max_coord`, with δ placed
    /// at the certified LCD gate.
    RationalDirections {
        count: u64,
        dim: usize,
        max_coord: i64,
        mu: f64,
        gamma: f64,
        alpha: f64,
        seed: u64,
    },
    /// Random full-support vectors of F_pⁿ.
    FullSupportFp {
        count: u64,
        n: usize,
        p: u64,
        mu: f64,
        k: u32,
        m: f64,
        seed: u64,
    },
    /// Every vector of F_pⁿ that has a W_t class, against the W_t atom bound.
    ExhaustiveSmall {
        n: usize,
        p: u64,
        mu: f64,
        k: u32,
        s1: usize,
        s2: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationSummary {
    pub instances: u64,
    pub applicable: u64,
    pub max: f64,
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
    /// Applicable instances failing at each candidate constant.
    pub violations: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CalibrationOutcome {
    Calibrated(CalibrationSummary),
    NoApplicableInstances { instances: u64 },
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = libm::ceil(q * sorted.len() as f64) as usize;
    sorted[idx.clamp(1, sorted.len()) - 1]
}

pub fn summarize(reports: &[BoundReport]) -> CalibrationOutcome {
    let instances = reports.len() as u64;
    let mut cs: Vec<f64> = reports.iter().filter(|r| r.applicable).map(|r| r.empirical_c).collect();
    if cs.is_empty() {
        return CalibrationOutcome::NoApplicableInstances { instances };
    }
    cs.sort_by(|a, b| a.total_cmp(b));
    let violations = CANDIDATE_CONSTANTS
        .iter()
        .map(|&c| {
            let bad = reports.iter().filter(|r| r.applicable && !r.holds_at(c)).count() as u64;
            (c, bad)
        })
        .collect();
    CalibrationOutcome::Calibrated(CalibrationSummary {
        instances,
        applicable: cs.len() as u64,
        max: *cs.last().unwrap(),
        median: quantile(&cs, 0.5),
        q90: quantile(&cs, 0.9),
        q99: quantile(&cs, 0.99),
        violations,
    })
}

/// Random integer vector with coordinates in `[-max_coord, max_coord]`,
/// redrawn until nonzero.
pub fn random_int_vector(dim: usize, max_coord: i64, seed: SeedSpec) -> Result<IntVector> {
    if dim == 0 || max_coord <= 0 {
        return Err(Error::invalid("dim/max_coord", "must be positive"));
    }
    let mut s = seed.stream();
    loop {
        let v: Vec<i64> = (0..dim).map(|_| s.range_i64(-max_coord, max_coord)).collect();
        if v.iter().any(|&c| c != 0) {
            return IntVector::new(v);
        }
    }
}

/// Uniform vector of F_pⁿ with every coordinate nonzero.
pub fn random_full_support(n: usize, p: u64, seed: SeedSpec) -> Result<FpVector> {
    let mut s = seed.stream();
    FpVector::new((0..n).map(|_| 1 + s.below(p - 1)).collect(), p)
}

fn lcd_levy_instance(dim: usize, max_coord: i64, mu: f64, gamma: f64, alpha: f64, seed: SeedSpec, budgets: &Budgets) -> Result<BoundReport> {
    let w = random_int_vector(dim, max_coord, seed)?;
    let a = UnitVector::from_int(&w)?;
    // LCD ≤ ‖w‖₂, so scanning slightly past it always finds a solution
    let params = LcdParams::new(gamma, alpha, w.l2_norm() + 1.0)?;
    let scan = lcd(&a, &params)?;
    let lower = scan.lower_bound();
    let delta = core::f64::consts::FRAC_2_PI / lower * (1.0 + 1e-9);
    bound_lcd_levy(&a, mu, delta, gamma, alpha, budgets)
}

/// Evaluates the named bound over every instance of the family.
pub fn calibration_reports<R: TrialRunner>(bound: BoundName, family: &InstanceFamily, budgets: &Budgets, runner: &R) -> Result<Vec<BoundReport>> {
    match (bound, *family) {
        (
            BoundName::LcdLevy,
            InstanceFamily::RationalDirections {
                count,
                dim,
                max_coord,
                mu,
                gamma,
                alpha,
                seed,
            },
        ) => runner
            .map_trials(count, |i| {
                lcd_levy_instance(dim, max_coord, mu, gamma, alpha, SeedSpec::new(seed, i), budgets)
            })
            .into_iter()
            .collect(),
        (
            BoundName::Halasz,
            InstanceFamily::FullSupportFp {
                count,
                n,
                p,
                mu,
                k,
                m,
                seed,
            },
        ) => runner
            .map_trials(count, |i| {
                let a = random_full_support(n, p, SeedSpec::new(seed, i))?;
                bound_halasz(&a, mu, k, m, budgets)
            })
            .into_iter()
            .collect(),
        (BoundName::WtAtom, InstanceFamily::ExhaustiveSmall { n, p, mu, k, s1, s2 }) => {
            let space = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if space > budgets.exhaustive_space as u128 {
                return Err(Error::budget("exhaustive F_p^n sweep", space, budgets.exhaustive_space as u128));
            }
            let results = runner.map_trials(space as u64, |idx| -> Result<Option<BoundReport>> {
                let mut coords = alloc::vec![0u64; n];
                let mut x = idx;
                for c in coords.iter_mut().rev() {
                    *c = x % p;
                    x /= p;
                }
                let a = FpVector::new(coords, p)?;
                let t = match bset_tmax(&a, k, s1, s2, budgets)? {
                    Some(tmax) if tmax < p as u128 => tmax as u64 + 1,
                    _ => return Ok(None),
                };
                wt_atom_report(&a, t, mu, budgets).map(Some)
            });
            let mut out = Vec::new();
            for r in results {
                if let Some(rep) = r? {
                    out.push(rep);
                }
            }
            Ok(out)
        }
        _ => Err(Error::invalid("family", format!("family does not apply to bound `{}`", bound.as_str()))),
    }
}

/// Distribution of the empirical constant over a family.
pub fn calibrate_constant<R: TrialRunner>(bound: BoundName, family: &InstanceFamily, budgets: &Budgets, runner: &R) -> Result<CalibrationOutcome> {
    Ok(summarize(&calibration_reports(bound, family, budgets, runner)?))
}
