//! Built-in verification suites: exhaustive small-field checks, the dual
//! atom-law routes, and LCD closed forms.

use lazysv_core::atom::{atom_prob_int, walk_law_fp, walk_law_int, FpAlgorithm};
use lazysv_core::fpstruct::{
    bset_membership, classify_wt, level_set_sizes, restricted_count_slack, reduce_mod_p, rk_exact, rk_restricted_bruteforce,
    BSetParams, WtClass,
};
use lazysv_core::lcd::{lcd, LcdParams, LcdStatus};
use lazysv_core::prime::next_odd_prime;
use lazysv_core::sample::SeedSpec;
use lazysv_core::{Budgets, FpVector, IntVector, LazyDist, UnitVector};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(suite: &'static str, name: &str, passed: bool, detail: String) -> Self {
        Check {
            suite,
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    FpSmall,
    AtomDual,
    Lcd,
    All,
}

impl std::str::FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "fp-small" => Ok(Suite::FpSmall),
            "atom-dual" => Ok(Suite::AtomDual),
            "lcd" => Ok(Suite::Lcd),
            "all" => Ok(Suite::All),
            other => Err(CliError::config(format!(
                "suite: unknown suite {other:?} (expected fp-small, atom-dual, lcd or all)"
            ))),
        }
    }
}

pub fn run_suite(suite: Suite, budgets: &Budgets) -> CliResult<Vec<Check>> {
    Ok(match suite {
        Suite::FpSmall => fp_small(budgets)?,
        Suite::AtomDual => atom_dual(budgets, 1000, 0)?,
        Suite::Lcd => lcd_suite()?,
        Suite::All => {
            let mut all = fp_small(budgets)?;
            all.extend(atom_dual(budgets, 1000, 0)?);
            all.extend(lcd_suite()?);
            all
        }
    })
}

/// Every vector of `F_pⁿ` in lexicographic order.
pub fn all_vectors(n: usize, p: u64) -> impl Iterator<Item = Vec<u64>> {
    (0..p.pow(n as u32)).map(move |mut code| {
        let mut v = vec![0u64; n];
        for c in v.iter_mut().rev() {
            *c = code % p;
            code /= p;
        }
        v
    })
}

pub const RESTRICTED_BETAS: [f64; 4] = [0.0, 0.01, 0.5, 1.0];

/// Exhaustive checks over `F_5⁴` (and `F_5³` for the reduction map).
pub fn fp_small(budgets: &Budgets) -> CliResult<Vec<Check>> {
    const S: &str = "fp-small";
    let (n, p) = (4usize, 5u64);
    let mut moment_mismatch = 0u64;
    let mut slack_violations = 0u64;
    let mut level_failures = 0u64;
    let ts = [0.0, 0.1, 0.5, 1.0, 2.0, 4.0];
    for coords in all_vectors(n, p) {
        let a = FpVector::new(coords, p)?;
        for k in 1..=2 {
            let moment = rk_exact(&a, k, budgets)?;
            for beta in RESTRICTED_BETAS {
                let c = rk_restricted_bruteforce(&a, k, beta, budgets)?;
                if c.total != moment {
                    moment_mismatch += 1;
                }
                if c.total as f64 > c.restricted as f64 + restricted_count_slack(k, n, beta) {
                    slack_violations += 1;
                }
            }
        }
        let sizes = level_set_sizes(&a, &ts, budgets)?;
        if sizes[0] < 1 || sizes.windows(2).any(|w| w[0] > w[1]) {
            level_failures += 1;
        }
    }
    let mut checks = vec![
        Check::new(S, "moment identity vs enumeration", moment_mismatch == 0, format!("{moment_mismatch} mismatches")),
        Check::new(S, "R_k <= R_k^beta + slack", slack_violations == 0, format!("{slack_violations} violations")),
        Check::new(S, "level sets nested, 0 in T_0", level_failures == 0, format!("{level_failures} failures")),
    ];

    // W_t classes against direct membership, over the centered box that
    // reduces onto F_5⁴
    let params = BSetParams { k: 1, s1: 2, s2: 2, t: 1 };
    let mut partition_failures = 0u64;
    let mut classified = 0u64;
    for coords in all_vectors(n, p) {
        let w: Vec<i64> = coords.iter().map(|&c| c as i64 - 2).collect();
        let w = IntVector::new(w)?;
        let a = reduce_mod_p(&w, p)?.vector;
        let member = |t: u64| bset_membership(&a, &BSetParams { t, ..params }, budgets);
        let ok = match classify_wt(&w, p, &params, budgets)? {
            WtClass::OutsideW => a.coords().iter().filter(|&&c| c != 0).count() < params.s1,
            WtClass::AboveClasses => (1..=p).map(member).collect::<Result<Vec<_>, _>>()?.iter().all(|&m| m),
            WtClass::Class(t) => {
                let flags = (1..=p).map(member).collect::<Result<Vec<_>, _>>()?;
                (1..=p).contains(&t) && flags.iter().zip(1..=p).all(|(&m, s)| m == (s < t))
            }
        };
        classified += 1;
        partition_failures += (!ok) as u64;
    }
    checks.push(Check::new(
        S,
        "W_t classes partition",
        partition_failures == 0,
        format!("{classified} vectors, {partition_failures} failures"),
    ));

    let mut seen = std::collections::HashSet::new();
    let mut injective = true;
    for coords in all_vectors(3, p) {
        let w = IntVector::new(coords.iter().map(|&c| c as i64 - 2).collect())?;
        let r = reduce_mod_p(&w, p)?;
        injective &= r.injective && seen.insert(r.vector.coords().to_vec());
    }
    checks.push(Check::new(
        S,
        "reduction injective on the centered box",
        injective && seen.len() == 125,
        format!("{} images", seen.len()),
    ));
    Ok(checks)
}

/// Integer DP folded mod p vs residue DP vs Fourier inversion on random
/// instances with `n ≤ 12`, `|wᵢ| ≤ 20`, `μ ∈ {0.1, 0.3, 0.5}`.
pub fn atom_dual(budgets: &Budgets, instances: u64, seed: u64) -> CliResult<Vec<Check>> {
    const S: &str = "atom-dual";
    let mut worst = 0.0f64;
    let mut rho_gap = 0.0f64;
    for i in 0..instances {
        let mut s = SeedSpec::new(seed, i).stream();
        let n = 1 + s.below(12) as usize;
        let mu = [0.1, 0.3, 0.5][s.below(3) as usize];
        let w: Vec<i64> = (0..n).map(|_| s.range_i64(-20, 20)).collect();
        let iv = IntVector::new(w.clone())?;
        let dist = LazyDist::new(mu)?;
        let p = next_odd_prime((2 * iv.l1_norm() as u64 + 1).max(3))?;
        let folded = walk_law_int(&iv, &dist, budgets)?.fold_mod(p)?;
        let a = FpVector::from_signed(&w, p)?;
        let dp = walk_law_fp(&a, &dist, FpAlgorithm::ResidueDp, budgets)?;
        let ft = walk_law_fp(&a, &dist, FpAlgorithm::Fourier, budgets)?;
        for r in 0..p as i64 {
            worst = worst
                .max((folded.prob(r) - dp.prob(r)).abs())
                .max((folded.prob(r) - ft.prob(r)).abs())
                .max((dp.prob(r) - ft.prob(r)).abs());
        }
        let rho = atom_prob_int(&iv, &dist, budgets)?.rho;
        rho_gap = rho_gap.max((rho - dp.max_atom().rho).abs());
    }
    Ok(vec![
        Check::new(S, "three atom-law routes agree", worst <= 1e-10, format!("max gap {worst:e} over {instances} instances")),
        Check::new(S, "largest atom agrees across domains", rho_gap <= 1e-10, format!("max gap {rho_gap:e}")),
    ])
}

/// Closed-form LCDs of `e₁` and `(1,1)/√2` and the refined-rescan check.
pub fn lcd_suite() -> CliResult<Vec<Check>> {
    const S: &str = "lcd";
    let gamma = 0.01;
    let mut checks = Vec::new();
    let cases = [
        ("LCD(e1) = 1/(1+gamma)", UnitVector::basis(4, 0)?, 1.0 / (1.0 + gamma)),
        (
            "LCD((1,1)/sqrt2) = sqrt2/(1+gamma)",
            UnitVector::normalize(&[1.0, 1.0])?,
            std::f64::consts::SQRT_2 / (1.0 + gamma),
        ),
    ];
    for (name, a, want) in cases {
        let alpha = (a.dim() as f64).powf(0.25);
        let params = LcdParams::new(gamma, alpha, 10.0)?;
        let coarse = lcd(&a, &params)?;
        let fine = lcd(&a, &params.with_grid_step(params.grid_step / 10.0)?)?;
        let got = coarse.theta_star();
        let closed = matches!(coarse.status, LcdStatus::Found { .. }) && got.is_some_and(|t| (t - want).abs() <= 1e-6);
        checks.push(Check::new(S, name, closed, format!("theta*={got:?}, expected {want}")));
        let moved = match (got, fine.theta_star()) {
            (Some(c), Some(f)) => (c - f).abs(),
            _ => f64::INFINITY,
        };
        checks.push(Check::new(
            S,
            &format!("{name}: refined rescan"),
            moved < params.grid_step,
            format!("moved {moved:e}, grid step {}", params.grid_step),
        ));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_vectors() {
        let v: Vec<Vec<u64>> = all_vectors(2, 3).collect();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], vec![0, 0]);
        assert_eq!(v[1], vec![0, 1]);
        assert_eq!(v[8], vec![2, 2]);
    }

    #[test]
    fn suites_pass() {
        let b = Budgets::default();
        for c in lcd_suite().unwrap().into_iter().chain(atom_dual(&b, 50, 3).unwrap()) {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn suite_names() {
        assert_eq!("fp-small".parse::<Suite>().unwrap(), Suite::FpSmall);
        assert!("nope".parse::<Suite>().is_err());
    }
}
