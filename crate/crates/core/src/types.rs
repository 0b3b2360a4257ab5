//! Shared domain types.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::prime::is_odd_prime;
use crate::{Error, Result};

/// Law of the μ-lazy variable: 0 with probability 1−μ, ±1 with μ/2 each.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LazyDist {
    mu: f64,
}

impl LazyDist {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0 && mu <= 1.0) {
            return Err(Error::invalid("mu", "must lie in (0, 1]"));
        }
        Ok(LazyDist { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `(P(0), P(+1), P(-1))`.
    pub fn probabilities(&self) -> (f64, f64, f64) {
        (1.0 - self.mu, self.mu / 2.0, self.mu / 2.0)
    }

    /// Rejects μ > 1/2, the range where `|1-μ+μ cos x| = 1 - 2μ sin²(x/2)`
    /// stops holding.
    pub fn require_at_most_half(&self) -> Result<()> {
        if self.mu > 0.5 {
            return Err(Error::RegimeViolation("bound requires mu <= 1/2".to_string()));
        }
        Ok(())
    }
}

/// Count of nonzero coordinates.
pub trait Support {
    fn support_size(&self) -> usize;
}

pub fn support_size<V: Support + ?Sized>(v: &V) -> usize {
    v.support_size()
}

/// Integer coefficient vector `w ∈ ℤⁿ`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntVector {
    coords: Vec<i64>,
}

impl IntVector {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("w", "dimension must be at least 1"));
        }
        if coords.iter().any(|&c| c == i64::MIN) {
            return Err(Error::invalid("w", "coordinate i64::MIN is not supported"));
        }
        Ok(IntVector { coords })
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Indices of nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn l1_norm(&self) -> u128 {
        self.coords.iter().map(|&c| c.unsigned_abs() as u128).sum()
    }

    pub fn max_abs(&self) -> u64 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coords.iter().map(|&c| (c as f64) * (c as f64)).sum();
        libm::sqrt(s)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|&c| c as f64).collect()
    }
}

impl Support for IntVector {
    fn support_size(&self) -> usize {
        self.coords.iter().filter(|&&c| c != 0).count()
    }
}

/// Residue vector `a ∈ F_pⁿ` over an odd prime `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FpVector {
    coords: Vec<u64>,
    p: u64,
}

impl FpVector {
    /// Every coordinate must already be reduced.
    pub fn new(coords: Vec<u64>, p: u64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if coords.is_empty() {
            return Err(Error::invalid("a", "dimension must be at least 1"));
        }
        if coords.iter().any(|&c| c >= p) {
            return Err(Error::invalid("a", "coordinates must lie in [0, p)"));
        }
        Ok(FpVector { coords, p })
    }

    /// Reduces arbitrary signed integers into `[0, p)`.
    pub fn from_signed(coords: &[i64], p: u64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let pi = p as i128;
        let reduced = coords
            .iter()
            .map(|&c| (c as i128).rem_euclid(pi) as u64)
            .collect();
        FpVector::new(reduced, p)
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Projection onto the given coordinate indices.
    pub fn project(&self, indices: &[usize]) -> FpVector {
        FpVector {
            coords: indices.iter().map(|&i| self.coords[i]).collect(),
            p: self.p,
        }
    }

    /// Centered representative in `(-p/2, p/2]`.
    pub fn centered(&self, i: usize) -> i64 {
        centered_residue(self.coords[i], self.p)
    }
}

pub(crate) fn centered_residue(r: u64, p: u64) -> i64 {
    if r > p / 2 {
        r as i64 - p as i64
    } else {
        r as i64
    }
}

impl Support for FpVector {
    fn support_size(&self) -> usize {
        self.coords.iter().filter(|&&c| c != 0).count()
    }
}

/// Unit vector on the sphere `S^{n-1}`.
///
/// When built from an integer vector the direction is remembered so exact
/// rational computations stay available.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitVector {
    coords: Vec<f64>,
    integer_direction: Option<IntVector>,
}

impl UnitVector {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("a", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("a", "coordinates must be finite"));
        }
        let norm = libm::sqrt(coords.iter().map(|c| c * c).sum::<f64>());
        if libm::fabs(norm - 1.0) > Self::NORM_TOLERANCE {
            return Err(Error::invalid("a", "must have unit Euclidean norm"));
        }
        Ok(UnitVector {
            coords,
            integer_direction: None,
        })
    }

    /// Scales a nonzero real vector onto the sphere.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        let norm = libm::sqrt(coords.iter().map(|c| c * c).sum::<f64>());
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("a", "cannot normalize a zero or non-finite vector"));
        }
        UnitVector::new(coords.iter().map(|c| c / norm).collect())
    }

    /// `w / ‖w‖₂` for a nonzero integer vector.
    pub fn from_int(w: &IntVector) -> Result<Self> {
        if w.is_zero() {
            return Err(Error::invalid("w", "direction of the zero vector is undefined"));
        }
        let mut u = UnitVector::normalize(&w.to_f64())?;
        u.integer_direction = Some(w.clone());
        Ok(u)
    }

    /// Standard basis vector `e_i` in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::invalid("i", "index out of range"));
        }
        let mut w = alloc::vec![0i64; n];
        w[i] = 1;
        UnitVector::from_int(&IntVector::new(w)?)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn integer_direction(&self) -> Option<&IntVector> {
        self.integer_direction.as_ref()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, &c| m.max(libm::fabs(c)))
    }
}

/// Hidden constants of the "≲" statements, exposed for calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CalibrationConstants {
    /// Spectral norm threshold multiplier: `‖M‖ ≥ C·√(nμ)` is rare.
    pub norm_const: f64,
    /// Exponent rate for the spectral norm tail.
    pub norm_rate: f64,
    /// Fixed-vector image threshold multiplier: `‖Ma‖ ≤ C·√(nμ)` is rare.
    pub image_const: f64,
    /// Exponent rate for the fixed-vector image tail.
    pub image_rate: f64,
    /// Multiplier of the atom bound for W_t classes.
    pub atom_const: f64,
    /// Divisor in `γ = image_const / (r · max(norm_const, 1))`; at least 100.
    pub gamma_divisor: f64,
    /// Constant of the concentration-vs-characteristic-function inequality.
    pub esseen_const: f64,
}

impl Default for CalibrationConstants {
    fn default() -> Self {
        CalibrationConstants {
            norm_const: 4.0,
            norm_rate: 1.0,
            image_const: 0.5,
            image_rate: 1.0,
            atom_const: 2.0,
            gamma_divisor: 100.0,
            esseen_const: esseen_fejer_constant(),
        }
    }
}

/// `1 / (2 sin² 1)`: from the triangular kernel on `[-2, 2]`, whose Fourier
/// transform `2 sin²(y)/y²` is at least `2 sin² 1` on `|y| ≤ 1`.
pub fn esseen_fejer_constant() -> f64 {
    let s = libm::sin(1.0);
    1.0 / (2.0 * s * s)
}

impl CalibrationConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("norm_const", self.norm_const),
            ("norm_rate", self.norm_rate),
            ("image_const", self.image_const),
            ("image_rate", self.image_rate),
            ("atom_const", self.atom_const),
            ("gamma_divisor", self.gamma_divisor),
            ("esseen_const", self.esseen_const),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and positive"));
            }
        }
        if self.gamma_divisor < 100.0 {
            return Err(Error::invalid("gamma_divisor", "must be at least 100"));
        }
        if self.gamma() > 0.01 {
            return Err(Error::invalid("image_const", "gamma = C25/(r C24*) must not exceed 1/100"));
        }
        Ok(())
    }

    /// `max(norm_const, 1)`.
    pub fn norm_const_star(&self) -> f64 {
        self.norm_const.max(1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.image_const / (self.gamma_divisor * self.norm_const_star())
    }
}

/// Work limits for exact and exhaustive computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Budgets {
    /// Max `Σ|w_i|` for integer walk laws.
    pub grid_cap: u64,
    /// Max `p·n` for the Fourier evaluation of F_p laws and moment sums.
    pub fourier_work: u64,
    /// Max modulus for the residue convolution and level sets.
    pub residue_modulus: u64,
    /// Max signed tuples `(2n)^{2k}` enumerated when counting solutions.
    pub tuple_enumeration: u64,
    /// Max sub-vectors enumerated per B-set membership test.
    pub subset_enumeration: u64,
    /// Max `pⁿ` for exhaustive sweeps of `F_pⁿ`.
    pub exhaustive_space: u64,
    /// Max evaluations of `θ ↦ dist(θa, ℤⁿ)` during an LCD scan.
    pub lcd_evaluations: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            grid_cap: 1_000_000,
            fourier_work: 1_000_000_000,
            residue_modulus: 1_000_000,
            tuple_enumeration: 100_000_000,
            subset_enumeration: 1_000_000,
            exhaustive_space: 10_000_000,
            lcd_evaluations: 10_000_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn lazy_dist_bounds() {
        assert!(LazyDist::new(0.0).is_err());
        assert!(LazyDist::new(1.0001).is_err());
        assert!(LazyDist::new(f64::NAN).is_err());
        let d = LazyDist::new(0.3).unwrap();
        let (z, p, m) = d.probabilities();
        assert!((z + p + m - 1.0).abs() < 1e-15);
        assert!(d.require_at_most_half().is_ok());
        assert!(LazyDist::new(0.6).unwrap().require_at_most_half().is_err());
    }

    #[test]
    fn support_examples() {
        assert_eq!(support_size(&IntVector::new(vec![0, 0, 0]).unwrap()), 0);
        assert_eq!(support_size(&IntVector::new(vec![1, 0, -3]).unwrap()), 2);
        let f = FpVector::from_signed(&[5, 5, 5, 5], 5).unwrap();
        assert_eq!(support_size(&f), 0);
    }

    #[test]
    fn fp_vector_rejects_bad_modulus() {
        assert_eq!(FpVector::new(vec![1], 9), Err(Error::NotPrime(9)));
        assert_eq!(FpVector::new(vec![1], 2), Err(Error::NotPrime(2)));
        assert!(FpVector::new(vec![5], 5).is_err());
        assert_eq!(FpVector::from_signed(&[-1, 7], 5).unwrap().coords(), &[4, 2]);
    }

    #[test]
    fn unit_vector_norm_check() {
        assert!(UnitVector::new(vec![0.6, 0.8]).is_ok());
        assert!(UnitVector::new(vec![0.6, 0.81]).is_err());
        let u = UnitVector::from_int(&IntVector::new(vec![3, 4]).unwrap()).unwrap();
        assert_eq!(u.integer_direction().unwrap().coords(), &[3, 4]);
        assert!(UnitVector::from_int(&IntVector::new(vec![0, 0]).unwrap()).is_err());
    }

    #[test]
    fn default_constants_are_valid() {
        let c = CalibrationConstants::default();
        c.validate().unwrap();
        assert!(c.gamma() <= 0.01);
        let bad = CalibrationConstants {
            gamma_divisor: 50.0,
            ..c
        };
        assert!(bad.validate().is_err());
        let bad = CalibrationConstants {
            image_const: 10.0,
            ..c
        };
        assert!(bad.validate().is_err());
    }
}
