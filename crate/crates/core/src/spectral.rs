//! Monte Carlo experiments on singular values of lazy and Gaussian matrices.
//!
//! Every trial draws its matrix from the stream keyed by its trial index, so
//! results do not depend on how a [`TrialRunner`] schedules the work.

use alloc::vec::Vec;

use crate::bounds::{bound_main, RegimeFlags};
use crate::linalg::{self, MAX_RANK_DIM};
use crate::math::{NeumaierSum, Proportion};
use crate::runner::TrialRunner;
use crate::sample::{sample_gaussian_matrix, sample_lazy_matrix, SeedSpec};
use crate::types::{CalibrationConstants, LazyDist, UnitVector};
use crate::{Error, Result};

pub use crate::linalg::{exact_rank, exact_rank_matrix, singular_extremes, SingularPair};

pub const MIN_TAIL_TRIALS: u64 = 1000;

/// Which trials of a tail experiment also get an exact rank computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankPolicy {
    /// Every matrix up to this dimension is ranked.
    pub full_up_to: usize,
    /// Beyond it, every `stride`-th trial is ranked.
    pub stride: u64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy {
            full_up_to: 128,
            stride: 100,
        }
    }
}

impl RankPolicy {
    pub fn ranks(&self, n: usize, trial: u64) -> bool {
        if n > MAX_RANK_DIM {
            return false;
        }
        n <= self.full_up_to || (self.stride > 0 && trial % self.stride == 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailReport {
    pub n: usize,
    pub mu: f64,
    pub eta_grid: Vec<f64>,
    /// Frequency of `{sn ≤ η}` per grid point with Wilson 99% intervals.
    pub estimates: Vec<Proportion>,
    /// `min(η n^{3/2}/√μ, 1)` per grid point.
    pub bound_curve: Vec<f64>,
    pub regime: Vec<RegimeFlags>,
    pub trials: u64,
    /// Singular fraction among the ranked trials.
    pub exact_singular_fraction: f64,
    pub ranked: u64,
    pub singular: u64,
    pub seed: u64,
    pub max_residual_ratio: f64,
}

struct TailTrial {
    sn: f64,
    residual_ratio: f64,
    singular: Option<bool>,
}

fn check_grid(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid(name, "entries must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid(name, "must be sorted ascending"));
    }
    Ok(())
}

fn count_at_most(sorted: &[f64], x: f64) -> u64 {
    sorted.partition_point(|&s| s <= x) as u64
}

/// Estimates `P(sn ≤ η)` over a grid from one SVD per sampled matrix.
///
/// Matrices found singular by exact rank have `sn` set to 0, so the η = 0
/// entry equals the singular fraction whenever every trial is ranked.
pub fn tail_experiment<R: TrialRunner>(
    n: usize,
    dist: &LazyDist,
    eta_grid: &[f64],
    trials: u64,
    seed: u64,
    policy: RankPolicy,
    runner: &R,
) -> Result<TailReport> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::invalid("trials", "tail experiments need at least 1000 trials"));
    }
    check_grid(eta_grid, "eta_grid")?;
    let outcomes = runner.map_trials(trials, |t| -> Result<TailTrial> {
        let m = sample_lazy_matrix(n, dist, SeedSpec::new(seed, t))?;
        let singular = if policy.ranks(n, t) {
            Some(exact_rank_matrix(&m)? < n)
        } else {
            None
        };
        let pair = singular_extremes(&m)?;
        let scale = (pair.s1 * pair.s1).max(f64::MIN_POSITIVE);
        Ok(TailTrial {
            sn: if singular == Some(true) { 0.0 } else { pair.sn },
            residual_ratio: pair.residual / scale,
            singular,
        })
    });
    let mut sns = Vec::with_capacity(trials as usize);
    let (mut ranked, mut singular) = (0u64, 0u64);
    let mut max_residual_ratio = 0.0f64;
    for o in outcomes {
        let o = o?;
        sns.push(o.sn);
        max_residual_ratio = max_residual_ratio.max(o.residual_ratio);
        if let Some(s) = o.singular {
            ranked += 1;
            singular += s as u64;
        }
    }
    sns.sort_by(f64::total_cmp);
    let mu = dist.mu();
    let mut bound_curve = Vec::with_capacity(eta_grid.len());
    let mut regime = Vec::with_capacity(eta_grid.len());
    for &eta in eta_grid {
        let b = bound_main(n, mu, eta)?;
        bound_curve.push(b.value);
        regime.push(b.regime);
    }
    Ok(TailReport {
        n,
        mu,
        eta_grid: eta_grid.to_vec(),
        estimates: eta_grid
            .iter()
            .map(|&eta| Proportion::wilson99(count_at_most(&sns, eta), trials))
            .collect(),
        bound_curve,
        regime,
        trials,
        exact_singular_fraction: if ranked == 0 { 0.0 } else { singular as f64 / ranked as f64 },
        ranked,
        singular,
        seed,
        max_residual_ratio,
    })
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let k = libm::ceil(q * sorted.len() as f64) as usize;
    sorted[k.clamp(1, sorted.len()) - 1]
}

pub const REPORTED_QUANTILES: [f64; 5] = [0.01, 0.5, 0.9, 0.99, 1.0];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormReport {
    pub n: usize,
    pub mu: f64,
    pub threshold_const: f64,
    /// Frequency of `{‖M‖ ≥ C √(nμ)}`.
    pub exceed: Proportion,
    /// `exp(-c nμ)` with the configured rate.
    pub predicted: f64,
    /// Density gate `μ ≥ log n / n`.
    pub gate_ok: bool,
    /// `(q, quantile of ‖M‖/√(nμ))`.
    pub quantiles: Vec<(f64, f64)>,
    pub seed: u64,
}

pub fn spectral_norm_experiment<R: TrialRunner>(
    n: usize,
    dist: &LazyDist,
    trials: u64,
    seed: u64,
    constants: &CalibrationConstants,
    runner: &R,
) -> Result<NormReport> {
    if n == 0 || trials == 0 {
        return Err(Error::invalid("trials", "n and trials must be positive"));
    }
    if !(constants.norm_const >= 0.0) {
        return Err(Error::invalid("norm_const", "must be nonnegative"));
    }
    let mu = dist.mu();
    let scale = libm::sqrt(n as f64 * mu);
    let ratios = runner.map_trials(trials, |t| -> Result<f64> {
        let m = sample_lazy_matrix(n, dist, SeedSpec::new(seed, t))?;
        Ok(linalg::largest_singular_value_dense(n, &m.to_f64())? / scale)
    });
    let mut ratios = ratios.into_iter().collect::<Result<Vec<f64>>>()?;
    ratios.sort_by(f64::total_cmp);
    let below = ratios.partition_point(|&r| r < constants.norm_const) as u64;
    Ok(NormReport {
        n,
        mu,
        threshold_const: constants.norm_const,
        exceed: Proportion::wilson99(trials - below, trials),
        predicted: libm::exp(-constants.norm_rate * n as f64 * mu),
        gate_ok: mu >= libm::log(n as f64) / n as f64,
        quantiles: REPORTED_QUANTILES.iter().map(|&q| (q, quantile(&ratios, q))).collect(),
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImageReport {
    pub n: usize,
    pub mu: f64,
    pub threshold_const: f64,
    /// Frequency of `{‖Ma‖₂ ≤ C √(nμ)}`.
    pub below: Proportion,
    pub predicted: f64,
    /// Sample mean of `‖Ma‖₂²` and its standard error.
    pub mean_sq: f64,
    pub mean_sq_std_err: f64,
    /// `E‖Ma‖₂² = nμ` for unit `a`.
    pub expected_sq: f64,
    pub seed: u64,
}

/// Image of a fixed unit vector under `n×n` lazy matrices.
pub fn fixed_vector_image_experiment<R: TrialRunner>(
    a: &UnitVector,
    n: usize,
    dist: &LazyDist,
    trials: u64,
    seed: u64,
    constants: &CalibrationConstants,
    runner: &R,
) -> Result<ImageReport> {
    if a.dim() != n {
        return Err(Error::invalid("a", "dimension must equal n"));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least 2 trials"));
    }
    let coords = a.coords();
    let norms = runner.map_trials(trials, |t| {
        let mut stream = SeedSpec::new(seed, t).stream();
        let mut total = NeumaierSum::new();
        for _ in 0..n {
            let mut row = NeumaierSum::new();
            for &c in coords {
                let x = stream.lazy(dist);
                if x != 0 {
                    row.add(x as f64 * c);
                }
            }
            let r = row.value();
            total.add(r * r);
        }
        total.value()
    });
    let mu = dist.mu();
    let threshold = constants.image_const * libm::sqrt(n as f64 * mu);
    let hits = norms.iter().filter(|&&s| libm::sqrt(s) <= threshold).count() as u64;
    let k = trials as f64;
    let mean = norms.iter().sum::<f64>() / k;
    let var = norms.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1.0);
    Ok(ImageReport {
        n,
        mu,
        threshold_const: constants.image_const,
        below: Proportion::wilson99(hits, trials),
        predicted: libm::exp(-constants.image_rate * n as f64 * mu),
        mean_sq: mean,
        mean_sq_std_err: libm::sqrt(var / k),
        expected_sq: n as f64 * mu,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdelmanReport {
    pub n: usize,
    pub eps_grid: Vec<f64>,
    /// Frequency of `{sn ≤ ε n^{-1/2}}`.
    pub estimates: Vec<Proportion>,
    /// Least-squares slope of the frequencies against ε through the origin.
    pub slope: f64,
    pub monotone: bool,
    pub trials: u64,
    pub seed: u64,
}

/// Smallest singular value of Gaussian matrices against the `P ≈ ε` law.
pub fn edelman_baseline<R: TrialRunner>(
    n: usize,
    trials: u64,
    seed: u64,
    eps_grid: &[f64],
    runner: &R,
) -> Result<EdelmanReport> {
    if n == 0 || trials == 0 {
        return Err(Error::invalid("trials", "n and trials must be positive"));
    }
    check_grid(eps_grid, "eps_grid")?;
    let scaled = runner.map_trials(trials, |t| -> Result<f64> {
        let m = sample_gaussian_matrix(n, SeedSpec::new(seed, t))?;
        Ok(singular_extremes(&m)?.sn * libm::sqrt(n as f64))
    });
    let mut scaled = scaled.into_iter().collect::<Result<Vec<f64>>>()?;
    scaled.sort_by(f64::total_cmp);
    let estimates: Vec<Proportion> = eps_grid
        .iter()
        .map(|&e| Proportion::wilson99(count_at_most(&scaled, e), trials))
        .collect();
    let num: f64 = eps_grid.iter().zip(&estimates).map(|(e, p)| e * p.estimate).sum();
    let den: f64 = eps_grid.iter().map(|e| e * e).sum();
    Ok(EdelmanReport {
        n,
        eps_grid: eps_grid.to_vec(),
        slope: if den > 0.0 { num / den } else { 0.0 },
        monotone: estimates.windows(2).all(|w| w[0].estimate <= w[1].estimate),
        estimates,
        trials,
        seed,
    })
}
