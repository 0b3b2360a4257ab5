use lazysv_core::sample::*;
use lazysv_core::LazyDist;

#[test]
fn equal_seeds_give_equal_draws() {
    let d = LazyDist::new(0.3).unwrap();
    let s = SeedSpec::new(42, 7);
    assert_eq!(sample_lazy(&d, s, 1000), sample_lazy(&d, s, 1000));
    let a = sample_gaussian_matrix(6, s).unwrap();
    let b = sample_gaussian_matrix(6, s).unwrap();
    assert_eq!(a.to_f64(), b.to_f64());
    assert_ne!(sample_lazy(&d, s, 1000), sample_lazy(&d, s.with_stream(8), 1000));
}

#[test]
fn lazy_frequencies_fit() {
    // χ² with two degrees of freedom exceeds 27.63 with probability 1e-6
    let critical = 27.631;
    for (i, &mu) in [0.05, 0.3, 0.5, 1.0].iter().enumerate() {
        let d = LazyDist::new(mu).unwrap();
        let n = 1_000_000usize;
        let draws = sample_lazy(&d, SeedSpec::new(2024, i as u64), n);
        let mut counts = [0f64; 3];
        for x in draws {
            counts[(x + 1) as usize] += 1.0;
        }
        let expect = [mu / 2.0, 1.0 - mu, mu / 2.0].map(|p| p * n as f64);
        let chi2: f64 = counts
            .iter()
            .zip(expect)
            .filter(|(_, e)| *e > 0.0)
            .map(|(c, e)| (c - e).powi(2) / e)
            .sum();
        if mu == 1.0 {
            assert_eq!(counts[1], 0.0);
        }
        assert!(chi2 < critical, "mu={mu}: chi2={chi2}");
    }
}

#[test]
fn streams_are_uncorrelated() {
    let pairs = 100_000;
    let mut a = SeedSpec::new(9, 0).stream();
    let mut b = SeedSpec::new(9, 1).stream();
    let xs: Vec<f64> = (0..pairs).map(|_| a.uniform()).collect();
    let ys: Vec<f64> = (0..pairs).map(|_| b.uniform()).collect();
    let mx = xs.iter().sum::<f64>() / pairs as f64;
    let my = ys.iter().sum::<f64>() / pairs as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    let r = sxy / (sxx * syy).sqrt();
    assert!(r.abs() < 0.01, "correlation {r}");
}

#[test]
fn gaussian_moments() {
    let mut s = SeedSpec::new(1, 3).stream();
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| s.gaussian()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    assert!(mean.abs() < 5.0 / (n as f64).sqrt());
    assert!((var - 1.0).abs() < 0.02);
}

#[test]
fn matrix_shapes() {
    let d = LazyDist::new(0.2).unwrap();
    let m = sample_lazy_matrix(5, &d, SeedSpec::new(3, 0)).unwrap();
    assert_eq!(m.n(), 5);
    assert_eq!(m.lazy_entries().unwrap().len(), 25);
    assert!(m.lazy_entries().unwrap().iter().all(|x| (-1..=1).contains(x)));
    assert!(sample_lazy_matrix(0, &d, SeedSpec::new(3, 0)).is_err());
}
