use lazysv_core::lcd::*;
use lazysv_core::{IntVector, UnitVector};
use proptest::prelude::*;

fn found(r: &LcdResult) -> (f64, IntVector) {
    match &r.status {
        LcdStatus::Found { theta_star, witness, .. } => (*theta_star, witness.clone()),
        s => panic!("expected a solution, got {s:?}"),
    }
}

fn small_int_dir() -> impl Strategy<Value = IntVector> {
    prop::collection::vec(-5i64..=5, 2..=5)
        .prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
        .prop_map(|v| IntVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn witness_satisfies_strict_condition(w in small_int_dir(), gamma in 0.01f64..0.3) {
        let a = UnitVector::from_int(&w).unwrap();
        let alpha = (a.dim() as f64).powf(0.25);
        let params = LcdParams::new(gamma, alpha, 2.0 * w.l2_norm() + 1.0).unwrap();
        let r = lcd(&a, &params).unwrap();
        let (theta, witness) = found(&r);
        let scaled: Vec<f64> = a.coords().iter().map(|c| c * theta).collect();
        let d: f64 = scaled
            .iter()
            .zip(witness.coords())
            .map(|(x, &q)| (x - q as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!(d < (gamma * theta).min(alpha));
        prop_assert!(r.certified_margin > 0.0);
    }

    #[test]
    fn integer_directions_bound_lcd_by_norm(w in small_int_dir(), gamma in 0.01f64..0.3) {
        let a = UnitVector::from_int(&w).unwrap();
        let params = LcdParams::new(gamma, 1.0, w.l2_norm() + 1.0).unwrap();
        let (theta, _) = found(&lcd(&a, &params).unwrap());
        prop_assert!(theta <= w.l2_norm() + params.grid_step);
    }

    #[test]
    fn lcd_decreases_as_gamma_grows(w in small_int_dir(), g1 in 0.01f64..0.3, g2 in 0.01f64..0.3) {
        let a = UnitVector::from_int(&w).unwrap();
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let tmax = w.l2_norm() + 1.0;
        let p_lo = LcdParams::new(lo, 1.0, tmax).unwrap();
        let p_hi = LcdParams::new(hi, 1.0, tmax).unwrap();
        let (t_lo, _) = found(&lcd(&a, &p_lo).unwrap());
        let (t_hi, _) = found(&lcd(&a, &p_hi).unwrap());
        prop_assert!(t_lo >= t_hi - p_lo.grid_step.max(p_hi.grid_step));
    }

    #[test]
    fn finer_rescan_does_not_move_far_below(
        coords in prop::collection::vec(-1.0f64..1.0, 2..=4),
        gamma in 0.02f64..0.2,
    ) {
        prop_assume!(coords.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let a = UnitVector::normalize(&coords).unwrap();
        let params = LcdParams::new(gamma, 1.0, 30.0).unwrap();
        let coarse = lcd(&a, &params).unwrap();
        let fine = lcd(&a, &params.with_grid_step(params.grid_step / 10.0).unwrap()).unwrap();
        match (coarse.theta_star(), fine.theta_star()) {
            (Some(c), Some(f)) => prop_assert!(f >= c - params.grid_step),
            (None, Some(f)) => prop_assert!(f >= 30.0 - params.grid_step),
            _ => {}
        }
    }
}

#[test]
fn closed_forms() {
    let gamma = 0.01;
    let e1 = UnitVector::basis(4, 0).unwrap();
    let params = LcdParams::new(gamma, 4f64.powf(0.25), 10.0).unwrap();
    let (t, w) = found(&lcd(&e1, &params).unwrap());
    assert!((t - 1.0 / (1.0 + gamma)).abs() < 1e-6);
    assert_eq!(w.coords(), &[1, 0, 0, 0]);

    let diag = UnitVector::normalize(&[1.0, 1.0]).unwrap();
    let params = LcdParams::new(gamma, 2f64.powf(0.25), 10.0).unwrap();
    let (t, w) = found(&lcd(&diag, &params).unwrap());
    assert!((t - 2f64.sqrt() / (1.0 + gamma)).abs() < 1e-6);
    assert_eq!(w.coords(), &[1, 1]);
}

#[test]
fn exceeds_when_range_too_short() {
    let e1 = UnitVector::basis(3, 1).unwrap();
    let params = LcdParams::new(0.01, 1.0, 0.5).unwrap();
    let r = lcd(&e1, &params).unwrap();
    assert!(matches!(r.status, LcdStatus::Exceeds { .. }));
    assert_eq!(r.lower_bound(), 0.5);
}

#[test]
fn lattice_distance_rounds_coordinates() {
    let a = UnitVector::normalize(&[3.0, 4.0]).unwrap();
    let (d, q) = dist_to_lattice(&a, 5.0).unwrap();
    assert!(d < 1e-12);
    assert_eq!(q.coords(), &[3, 4]);
    let (d, q) = dist_to_lattice(&a, 2.5).unwrap();
    assert_eq!(q.coords(), &[2, 2]);
    assert!((d - (0.5f64.powi(2) + 0.0).sqrt()).abs() < 1e-12);
}

#[test]
fn sphere_classification_respects_floor() {
    let a = UnitVector::basis(4, 0).unwrap();
    let n = 4;
    let params = LcdParams::new(0.01, 1.0, 10.0).unwrap();
    assert!(classify_sphere(&a, eta_floor(n) / 2.0, n, 0.3, &params).is_err());
}
