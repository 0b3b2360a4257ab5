use lazysv_core::prime::*;
use lazysv_core::{support_size, FpVector, IntVector, LazyDist};
use proptest::prelude::*;

fn trial_division(m: u64) -> bool {
    m >= 2 && (2..).take_while(|d| d * d <= m).all(|d| m % d != 0)
}

proptest! {
    #[test]
    fn next_odd_prime_is_minimal(m in 3u64..200_000) {
        let p = next_odd_prime(m).unwrap();
        prop_assert!(p >= m && p % 2 == 1 && trial_division(p));
        prop_assert!((m..p).all(|x| x % 2 == 0 || !trial_division(x)));
    }

    #[test]
    fn support_invariant_under_signs_and_order(v in prop::collection::vec(-5i64..=5, 1..10), flips in prop::collection::vec(any::<bool>(), 10)) {
        let w = IntVector::new(v.clone()).unwrap();
        let mut u: Vec<i64> = v.iter().zip(&flips).map(|(&x, &f)| if f { -x } else { x }).collect();
        u.reverse();
        prop_assert_eq!(support_size(&w), support_size(&IntVector::new(u).unwrap()));
    }
}

#[test]
fn composite_moduli_rejected() {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut rejected = 0;
    while rejected < 1000 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let a = 2 + (state >> 40) % 1000;
        let b = 2 + (state >> 20) % 1000;
        let m = a * b;
        assert!(FpVector::new(vec![1, 2], m).is_err(), "accepted composite {m}");
        rejected += 1;
    }
    assert!(FpVector::new(vec![1, 2], 2).is_err());
    assert!(FpVector::new(vec![1, 2], 7).is_ok());
}

#[test]
fn primality_agrees_with_trial_division() {
    for m in 2..20_000u64 {
        assert_eq!(is_prime(m).unwrap(), trial_division(m), "m={m}");
    }
    assert!(is_prime(2_147_483_647).unwrap());
    assert!(!is_prime(2_147_483_649).unwrap());
}

#[test]
fn lazy_parameter_range() {
    assert!(LazyDist::new(0.0).is_err());
    assert!(LazyDist::new(1.5).is_err());
    assert!(LazyDist::new(f64::NAN).is_err());
    assert!(LazyDist::new(1.0).is_ok());
    assert!(LazyDist::new(0.7).unwrap().require_at_most_half().is_err());
}
