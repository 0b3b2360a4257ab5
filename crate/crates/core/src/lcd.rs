//! Least common denominators of unit vectors and the sphere split they
//! induce.
//!
//! The scan walks `θ` upward from `1/(2‖a‖∞)` (below it every coordinate of
//! `θa` rounds to zero and the condition cannot hold). The gap
//! `f(θ) = dist(θa, ℤⁿ) - min(γθ‖a‖, α)` is Lipschitz with constant
//! `L = ‖a‖(1 + γ)`, so from a point with `f = v > 0` the next `v/L` of the
//! axis is free of solutions. When `v/L` drops below the grid step the scan
//! instead advances one grid step, probing the step for a dip below zero by
//! golden-section search, and bisects to the crossing once one is seen.

use alloc::vec::Vec;

use crate::math::golden_section_min;
use crate::types::{IntVector, UnitVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LcdParams {
    pub gamma: f64,
    pub alpha: f64,
    pub theta_max: f64,
    pub grid_step: f64,
    /// Cap on distance evaluations before the scan gives up.
    pub max_evaluations: u64,
}

pub const DEFAULT_MAX_EVALUATIONS: u64 = 10_000_000;

impl LcdParams {
    /// Grid step defaults to `min(γ, 0.01)/8`.
    pub fn new(gamma: f64, alpha: f64, theta_max: f64) -> Result<Self> {
        let p = LcdParams {
            gamma,
            alpha,
            theta_max,
            grid_step: gamma.min(0.01) / 8.0,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        };
        p.validate()?;
        Ok(p)
    }

    /// `α = n^{1/4}` and `θ_max = 4 n^{3/4} √μ / η`.
    pub fn for_regime(n: usize, mu: f64, eta: f64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid("eta", "must be finite and positive"));
        }
        let nf = n as f64;
        LcdParams::new(gamma, libm::pow(nf, 0.25), 4.0 * sphere_threshold(n, mu, eta))
    }

    pub fn with_grid_step(mut self, grid_step: f64) -> Result<Self> {
        self.grid_step = grid_step;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid("gamma", "must lie in (0, 1)"));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be finite and positive"));
        }
        if !(self.theta_max.is_finite() && self.theta_max > 0.0) {
            return Err(Error::invalid("theta_max", "must be finite and positive"));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= self.gamma) {
            return Err(Error::invalid("grid_step", "must lie in (0, gamma]"));
        }
        if self.max_evaluations == 0 {
            return Err(Error::invalid("max_evaluations", "must be positive"));
        }
        Ok(())
    }
}

/// `n^{3/4} √μ / η`.
pub fn sphere_threshold(n: usize, mu: f64, eta: f64) -> f64 {
    libm::pow(n as f64, 0.75) * libm::sqrt(mu) / eta
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LcdStatus {
    /// `theta_star` satisfies the strict condition; no solution was seen
    /// below `lower_bracket`.
    Found {
        theta_star: f64,
        lower_bracket: f64,
        witness: IntVector,
    },
    /// No solution in `(0, theta_max]`.
    Exceeds { theta_max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LcdResult {
    pub status: LcdStatus,
    /// Found: `min(γθ*‖a‖, α) - dist(θ*a, ℤⁿ)`. Exceeds: the smallest gap
    /// `f` seen during the scan.
    pub certified_margin: f64,
    pub evaluations: u64,
}

impl LcdResult {
    pub fn theta_star(&self) -> Option<f64> {
        match self.status {
            LcdStatus::Found { theta_star, .. } => Some(theta_star),
            LcdStatus::Exceeds { .. } => None,
        }
    }

    /// Largest `θ` below which no solution is known to exist.
    pub fn lower_bound(&self) -> f64 {
        match self.status {
            LcdStatus::Found { lower_bracket, .. } => lower_bracket,
            LcdStatus::Exceeds { theta_max } => theta_max,
        }
    }
}

/// `‖θa - round(θa)‖₂` with per-coordinate rounding, ties away from zero.
pub fn dist_to_lattice(a: &UnitVector, theta: f64) -> Result<(f64, IntVector)> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid("theta", "must be finite and positive"));
    }
    let mut nearest = Vec::with_capacity(a.dim());
    let mut ss = 0.0;
    for &c in a.coords() {
        let x = theta * c;
        let r = libm::round(x);
        if !(r.abs() < 9.0e18) {
            return Err(Error::Overflow("lattice point exceeds 64 bits"));
        }
        nearest.push(r as i64);
        ss += (x - r) * (x - r);
    }
    Ok((libm::sqrt(ss), IntVector::new(nearest)?))
}

fn dist_only(a: &[f64], theta: f64) -> f64 {
    let mut ss = 0.0;
    for &c in a {
        let x = theta * c;
        let d = x - libm::round(x);
        ss += d * d;
    }
    libm::sqrt(ss)
}

struct Gap<'a> {
    a: &'a [f64],
    norm: f64,
    gamma: f64,
    alpha: f64,
    evaluations: u64,
    cap: u64,
}

impl Gap<'_> {
    fn eval(&mut self, theta: f64) -> Result<f64> {
        self.evaluations += 1;
        if self.evaluations > self.cap {
            return Err(Error::budget("LCD scan evaluations", self.evaluations as u128, self.cap as u128));
        }
        Ok(dist_only(self.a, theta) - (self.gamma * theta * self.norm).min(self.alpha))
    }
}

/// `LCD_{γ,α}(a) = inf{θ > 0 : dist(θa, ℤⁿ) < min(γθ‖a‖₂, α)}`.
pub fn lcd(a: &UnitVector, params: &LcdParams) -> Result<LcdResult> {
    params.validate()?;
    let coords = a.coords();
    let norm = libm::sqrt(coords.iter().map(|c| c * c).sum::<f64>());
    let amax = a.max_abs();
    if amax == 0.0 {
        return Err(Error::invalid("a", "must be nonzero"));
    }
    let lip = norm * (1.0 + params.gamma);
    let mut gap = Gap {
        a: coords,
        norm,
        gamma: params.gamma,
        alpha: params.alpha,
        evaluations: 0,
        cap: params.max_evaluations,
    };
    let h = params.grid_step;
    let mut theta = 0.5 / amax;
    let mut min_gap = f64::INFINITY;
    while theta <= params.theta_max {
        let v = gap.eval(theta)?;
        min_gap = min_gap.min(v);
        if v < 0.0 {
            // only reachable on the first point, which the Lipschitz bound
            // already certifies; kept as a guard for degenerate input
            return finish(a, &mut gap, theta * 0.5, theta);
        }
        let safe = v / lip;
        if safe >= h {
            theta += safe;
            continue;
        }
        let hi = (theta + h).min(params.theta_max);
        if hi <= theta {
            break;
        }
        let v_hi = gap.eval(hi)?;
        min_gap = min_gap.min(v_hi);
        let mut probe: Result<()> = Ok(());
        let (x, fx) = golden_section_min(
            |t| match gap.eval(t) {
                Ok(v) => v,
                Err(e) => {
                    probe = Err(e);
                    f64::INFINITY
                }
            },
            theta,
            hi,
            h * 1e-3,
        );
        probe?;
        min_gap = min_gap.min(fx);
        if fx < 0.0 {
            return finish(a, &mut gap, theta, x);
        }
        if v_hi < 0.0 {
            return finish(a, &mut gap, theta, hi);
        }
        if hi >= params.theta_max {
            break;
        }
        theta = hi;
    }
    Ok(LcdResult {
        status: LcdStatus::Exceeds {
            theta_max: params.theta_max,
        },
        certified_margin: min_gap,
        evaluations: gap.evaluations,
    })
}

/// Bisects `[lo, hi]` with `f(lo) ≥ 0 > f(hi)` down to relative width 1e-12.
fn finish(a: &UnitVector, gap: &mut Gap<'_>, mut lo: f64, mut hi: f64) -> Result<LcdResult> {
    let tol = 1e-12 * hi.max(1.0);
    let mut iters = 0;
    while hi - lo > tol && iters < 200 {
        let mid = 0.5 * (lo + hi);
        if gap.eval(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    let (d, witness) = dist_to_lattice(a, hi)?;
    let threshold = (gap.gamma * hi * gap.norm).min(gap.alpha);
    if !(d < threshold) {
        return Err(Error::NonConvergence {
            what: "LCD refinement",
            detail: alloc::format!("witness at {hi} fails re-verification"),
        });
    }
    Ok(LcdResult {
        status: LcdStatus::Found {
            theta_star: hi,
            lower_bracket: lo,
            witness,
        },
        certified_margin: threshold - d,
        evaluations: gap.evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SphereClass {
    /// Large LCD: arithmetically unstructured directions.
    Gamma1,
    /// Small LCD.
    Gamma2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereClassification {
    pub class: SphereClass,
    pub threshold: f64,
    pub lcd: LcdResult,
}

/// Smallest η of the proven regime, `2^{-n^{0.0001}}`.
pub fn eta_floor(n: usize) -> f64 {
    libm::exp2(-libm::pow(n as f64, 0.0001))
}

/// Splits the sphere at `LCD ≥ n^{3/4} √μ / η`.
pub fn classify_sphere(a: &UnitVector, eta: f64, n: usize, mu: f64, params: &LcdParams) -> Result<SphereClassification> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("eta", "must be finite and positive"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::invalid("mu", "must lie in (0, 1]"));
    }
    if eta < eta_floor(n) {
        return Err(Error::RegimeViolation(alloc::format!(
            "eta = {eta} is below 2^(-n^0.0001) = {}",
            eta_floor(n)
        )));
    }
    let threshold = sphere_threshold(n, mu, eta);
    if params.theta_max < threshold {
        return Err(Error::Uncertifiable(alloc::format!(
            "theta_max = {} is below the threshold {threshold}",
            params.theta_max
        )));
    }
    let scan = LcdParams {
        theta_max: threshold,
        ..*params
    };
    let result = lcd(a, &scan)?;
    let class = match &result.status {
        LcdStatus::Exceeds { .. } => SphereClass::Gamma1,
        LcdStatus::Found { theta_star, .. } if *theta_star < threshold => SphereClass::Gamma2,
        LcdStatus::Found { lower_bracket, .. } if *lower_bracket >= threshold => SphereClass::Gamma1,
        LcdStatus::Found { .. } => {
            return Err(Error::Uncertifiable("LCD brackets the threshold".into()));
        }
    };
    Ok(SphereClassification {
        class,
        threshold,
        lcd: result,
    })
}
