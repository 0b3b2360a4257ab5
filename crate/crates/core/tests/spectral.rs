use lazysv_core::linalg::{singular_extremes_dense, singular_values_dense};
use lazysv_core::runner::SerialRunner;
use lazysv_core::sample::{sample_gaussian_matrix, sample_lazy_matrix, RandomMatrix, SeedSpec};
use lazysv_core::spectral::*;
use lazysv_core::{CalibrationConstants, LazyDist, UnitVector};
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;

fn oracle_extremes(n: usize, a: &[f64]) -> (f64, f64) {
    let m = DMatrix::from_row_slice(n, n, a);
    let sv = m.singular_values();
    let s1 = sv.iter().cloned().fold(0.0, f64::max);
    let sn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (s1, sn)
}

/// Rank by Gaussian elimination over ℚ.
fn oracle_rank(n: usize, e: &[i8]) -> usize {
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer((e[i * n + j] as i64).into())).collect())
        .collect();
    let mut rank = 0;
    for c in 0..n {
        let Some(pr) = (rank..n).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(pr, rank);
        for r in 0..n {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for j in c..n {
                    let v = &f * &m[rank][j];
                    m[r][j] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn extremes_match_dense_oracle() {
    for n in [1usize, 2, 3, 5, 8, 17, 40, 64] {
        for (k, mu) in [0.05, 0.2, 0.5, 1.0].iter().enumerate() {
            let d = LazyDist::new(*mu).unwrap();
            for s in 0..6 {
                let m = sample_lazy_matrix(n, &d, SeedSpec::new(100 + k as u64, s)).unwrap();
                let a = m.to_f64();
                let (s1, sn) = oracle_extremes(n, &a);
                let got = singular_extremes(&m).unwrap();
                let tol = 1e-8 * s1.max(1e-300);
                assert!((got.s1 - s1).abs() <= tol, "n={n} s1 {} vs {s1}", got.s1);
                assert!((got.sn - sn).abs() <= tol, "n={n} sn {} vs {sn}", got.sn);
                assert!(got.sn <= got.s1);
                assert!(got.residual <= 1e-8 * got.s1 * got.s1);
            }
        }
        let g = sample_gaussian_matrix(n, SeedSpec::new(7, n as u64)).unwrap();
        let (s1, sn) = oracle_extremes(n, &g.to_f64());
        let got = singular_extremes(&g).unwrap();
        assert!((got.s1 - s1).abs() <= 1e-8 * s1);
        assert!((got.sn - sn).abs() <= 1e-8 * s1);
    }
}

#[test]
fn all_singular_values_match_oracle() {
    let n = 12;
    let g = sample_gaussian_matrix(n, SeedSpec::new(3, 3)).unwrap();
    let a = g.to_f64();
    let mut want: Vec<f64> = DMatrix::from_row_slice(n, n, &a).singular_values().iter().cloned().collect();
    want.sort_by(|x, y| y.total_cmp(x));
    let got = singular_values_dense(n, &a).unwrap();
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-10 * want[0]);
    }
}

#[test]
fn scale_equivariance() {
    for s in 0..10 {
        let n = 6 + s as usize;
        let g = sample_gaussian_matrix(n, SeedSpec::new(17, s)).unwrap();
        let a = g.to_f64();
        let scaled: Vec<f64> = a.iter().map(|x| 3.0 * x).collect();
        let base = singular_values_dense(n, &a).unwrap();
        let big = singular_values_dense(n, &scaled).unwrap();
        for (x, y) in base.iter().zip(&big) {
            assert!((3.0 * x - y).abs() <= 1e-10 * y.abs().max(1e-300) + 1e-14 * big[0]);
        }
    }
}

#[test]
fn rank_agrees_with_rational_elimination_and_sn() {
    for n in [2usize, 3, 4, 6, 10] {
        for mu in [0.1, 0.3, 0.6] {
            let d = LazyDist::new(mu).unwrap();
            for s in 0..40 {
                let m = sample_lazy_matrix(n, &d, SeedSpec::new(55, s)).unwrap();
                let rank = exact_rank_matrix(&m).unwrap();
                assert_eq!(rank, oracle_rank(n, m.lazy_entries().unwrap()));
                let pair = singular_extremes(&m).unwrap();
                if rank < n {
                    assert!(pair.sn <= 1e-7 * pair.s1, "singular but sn={}", pair.sn);
                } else {
                    assert!(pair.sn > 0.0);
                }
            }
        }
    }
}

#[test]
fn rank_of_structured_matrices() {
    let n = 40;
    let mut id = vec![0i64; n * n];
    for i in 0..n {
        id[i * n + i] = 1;
    }
    assert_eq!(exact_rank(n, n, &id).unwrap(), n);
    // two equal rows
    let mut e = vec![0i8; 9];
    e.copy_from_slice(&[1, -1, 0, 1, -1, 0, 0, 1, 1]);
    let m = RandomMatrix::from_lazy_entries(3, 0.5, e).unwrap();
    assert_eq!(exact_rank_matrix(&m).unwrap(), 2);
}

#[test]
fn residual_certificate_on_nearly_singular() {
    // a tiny perturbation of a rank-one matrix
    let n = 5;
    let mut a = vec![1.0; n * n];
    a[0] += 1e-9;
    let p = singular_extremes_dense(n, &a).unwrap();
    let (s1, sn) = oracle_extremes(n, &a);
    assert!((p.s1 - s1).abs() <= 1e-8 * s1);
    assert!((p.sn - sn).abs() <= 1e-8 * s1);
}

#[test]
fn exact_singular_probability_for_two_by_two() {
    let mu: f64 = 0.5;
    let w = |x: i8| if x == 0 { 1.0 - mu } else { mu / 2.0 };
    let vals = [-1i8, 0, 1];
    let mut exact = 0.0;
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                for &d in &vals {
                    if a as i32 * d as i32 == b as i32 * c as i32 {
                        exact += w(a) * w(b) * w(c) * w(d);
                    }
                }
            }
        }
    }
    let r = tail_experiment(2, &LazyDist::new(mu).unwrap(), &[0.0], 20_000, 4, RankPolicy::default(), &SerialRunner).unwrap();
    let sd = (exact * (1.0 - exact) / 20_000.0).sqrt();
    assert!((r.exact_singular_fraction - exact).abs() <= 3.0 * sd);
    assert_eq!(r.estimates[0].estimate, r.exact_singular_fraction);
}

#[test]
fn disjoint_seed_reruns_overlap() {
    let d = LazyDist::new(0.4).unwrap();
    let grid = [0.05, 0.2];
    let runs = 100;
    let mut agree = 0;
    for i in 0..runs {
        let a = tail_experiment(6, &d, &grid, 1000, 2 * i, RankPolicy::default(), &SerialRunner).unwrap();
        let b = tail_experiment(6, &d, &grid, 1000, 2 * i + 1, RankPolicy::default(), &SerialRunner).unwrap();
        let overlap = a.estimates.iter().zip(&b.estimates).all(|(x, y)| x.ci_lo <= y.ci_hi && y.ci_lo <= x.ci_hi);
        agree += overlap as usize;
    }
    assert!(agree >= 95, "{agree} of {runs}");
}

#[test]
fn image_of_basis_vector_follows_binomial() {
    let n = 30;
    let mu = 0.2;
    let mut c = CalibrationConstants::default();
    c.image_const = 1.1;
    let trials = 20_000;
    let a = UnitVector::basis(n, 0).unwrap();
    let r = fixed_vector_image_experiment(&a, n, &LazyDist::new(mu).unwrap(), trials, 8, &c, &SerialRunner).unwrap();
    // ‖Me₁‖² ~ Binomial(n, μ); threshold (C√(nμ))² = 7.26
    let cut = (c.image_const * c.image_const * n as f64 * mu).floor() as u64;
    let mut pmf = (1.0 - mu).powi(n as i32);
    let mut cdf = 0.0;
    for k in 0..=cut {
        cdf += pmf;
        pmf *= (n as u64 - k) as f64 / (k + 1) as f64 * mu / (1.0 - mu);
    }
    let sd = (cdf * (1.0 - cdf) / trials as f64).sqrt();
    assert!((r.below.estimate - cdf).abs() <= 3.0 * sd, "{} vs {cdf}", r.below.estimate);
}

#[test]
fn image_second_moment() {
    let n = 200;
    let mu = 0.1;
    let coords: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) + 0.5).collect();
    let a = UnitVector::normalize(&coords).unwrap();
    let r = fixed_vector_image_experiment(
        &a,
        n,
        &LazyDist::new(mu).unwrap(),
        10_000,
        12,
        &CalibrationConstants::default(),
        &SerialRunner,
    )
    .unwrap();
    assert!((r.mean_sq - r.expected_sq).abs() <= 3.0 * r.mean_sq_std_err);
}

#[test]
fn norm_quantiles_are_ordered() {
    let d = LazyDist::new(0.3).unwrap();
    let r = spectral_norm_experiment(30, &d, 200, 1, &CalibrationConstants::default(), &SerialRunner).unwrap();
    assert!(r.quantiles.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(r.gate_ok);
}
