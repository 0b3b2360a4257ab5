//! Argument parsing and subcommand execution.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lazysv_core::atom::{atom_prob_int, atom_prob_mc, walk_law_fp, FpAlgorithm};
use lazysv_core::bounds::{
    bound_halasz, calibration_reports, random_full_support, replay_crossover, replay_pro45, summarize, BoundName,
    CalibrationOutcome, InstanceFamily, MuRule, ScanOrder,
};
use lazysv_core::fpstruct::{check_hal4, level_set, restricted_count_slack, rk_exact, rk_restricted_bruteforce, LevelSetOutcome};
use lazysv_core::lcd::{lcd, LcdParams, LcdStatus};
use lazysv_core::sample::{sample_gaussian_matrix, sample_lazy, sample_lazy_matrix, Entries, SeedSpec};
use lazysv_core::spectral::{edelman_baseline, spectral_norm_experiment, tail_experiment, RankPolicy};
use lazysv_core::{Budgets, CalibrationConstants, FpVector, IntVector, LazyDist, UnitVector};

use crate::config::{self, ConfigDoc};
use crate::error::{CliError, CliResult};
use crate::report::{num, text, Report};
use crate::runner::RayonRunner;
use crate::verify::{run_suite, Suite};

#[derive(Parser, Debug)]
#[command(name = "lazysv", version, about = "Experiments on the smallest singular value of sparse lazy random matrices")]
pub struct Cli {
    /// JSON configuration document; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving <command>.csv and <command>.json.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: LAZYSV_WORKERS, else all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw lazy or Gaussian entries.
    Sample(SampleArgs),
    /// Largest atom of a lazy random walk.
    Atom(AtomArgs),
    /// Least common denominator of a direction.
    Lcd(LcdArgs),
    /// Signed solution counts over F_p.
    Rk(RkArgs),
    /// Level sets of the Fourier side over F_p.
    Levelset(LevelsetArgs),
    /// Level-set inequalities and the Halasz-type atom bound.
    Halasz(HalaszArgs),
    /// Monte Carlo tail of the smallest singular value.
    Tail(TailArgs),
    /// Spectral norm exceedance frequency.
    SpectralNorm(SpectralNormArgs),
    /// Gaussian baseline for the smallest singular value.
    Edelman(EdelmanArgs),
    /// Log-space replay of the union-bound exponent.
    Replay(ReplayArgs),
    /// Built-in verification suites.
    Verify(VerifyArgs),
    /// Empirical constants of the bound evaluators.
    Calibrate(CalibrateArgs),
    /// Run the command named in --config.
    Run,
}

macro_rules! params {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* pub $field: Option<$ty>,)*
        }
    };
}

params!(SampleArgs {
    /// Lazy parameter μ.
    #[arg(long)] mu: f64,
    /// Number of scalar draws.
    #[arg(long)] count: usize,
    /// Draw an n×n matrix instead.
    #[arg(long)] n: usize,
    /// lazy or gaussian.
    #[arg(long)] model: String,
    #[arg(long)] seed: u64,
    #[arg(long)] stream: u64,
});

params!(AtomArgs {
    /// Integer weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] w: Vec<i64>,
    #[arg(long)] mu: f64,
    /// Work over F_p instead of the integers.
    #[arg(long)] p: u64,
    /// dp or fourier (F_p only).
    #[arg(long)] algorithm: String,
    /// Also estimate by Monte Carlo with this many trials.
    #[arg(long)] mc_trials: u64,
    #[arg(long)] seed: u64,
});

params!(LcdArgs {
    /// Direction (normalized internally).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] a: Vec<f64>,
    /// Integer direction, normalized internally.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] w: Vec<i64>,
    #[arg(long)] gamma: f64,
    /// Defaults to n^{1/4}.
    #[arg(long)] alpha: f64,
    #[arg(long)] theta_max: f64,
    #[arg(long)] grid_step: f64,
    #[arg(long)] max_evaluations: u64,
});

params!(RkArgs {
    /// Coordinates (reduced mod p).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] a: Vec<i64>,
    #[arg(long)] p: u64,
    #[arg(long)] k: u32,
    /// Distinctness exponent for the restricted count (enables enumeration).
    #[arg(long)] beta: f64,
});

params!(LevelsetArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] a: Vec<i64>,
    #[arg(long)] p: u64,
    /// Levels t, comma separated.
    #[arg(long, value_delimiter = ',')] t: Vec<f64>,
});

params!(HalaszArgs {
    /// Fixed vector; otherwise random full-support vectors are drawn.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] a: Vec<i64>,
    #[arg(long)] n: usize,
    #[arg(long)] p: u64,
    /// Number of random vectors.
    #[arg(long)] count: u64,
    #[arg(long)] seed: u64,
    #[arg(long)] k: u32,
    #[arg(long)] m: f64,
    #[arg(long, value_delimiter = ',')] t: Vec<f64>,
    #[arg(long)] mu: f64,
});

params!(TailArgs {
    #[arg(long)] n: usize,
    #[arg(long)] mu: f64,
    /// μ = n^{-e} when --mu is absent (default 0.45).
    #[arg(long)] mu_exponent: f64,
    /// Thresholds η, ascending.
    #[arg(long, value_delimiter = ',')] eta: Vec<f64>,
    /// Thresholds η = c·√μ·n^{-3/2} (default 0.02,0.05,0.1,0.2).
    #[arg(long, value_delimiter = ',')] c: Vec<f64>,
    #[arg(long)] trials: u64,
    #[arg(long)] seed: u64,
    /// Rank every matrix up to this dimension.
    #[arg(long)] rank_full_up_to: usize,
    /// Beyond it, rank every k-th trial.
    #[arg(long)] rank_stride: u64,
});

params!(SpectralNormArgs {
    #[arg(long)] n: usize,
    #[arg(long)] mu: f64,
    #[arg(long)] mu_exponent: f64,
    #[arg(long)] trials: u64,
    #[arg(long)] seed: u64,
    /// Threshold constant C in ‖M‖ ≥ C√(nμ).
    #[arg(long)] norm_const: f64,
});

params!(EdelmanArgs {
    #[arg(long)] n: usize,
    #[arg(long)] trials: u64,
    #[arg(long)] seed: u64,
    #[arg(long, value_delimiter = ',')] eps: Vec<f64>,
});

params!(ReplayArgs {
    #[arg(long)] n: f64,
    #[arg(long)] mu: f64,
    #[arg(long)] mu_exponent: f64,
    /// Defaults to 2^{-n^{0.0001}}.
    #[arg(long)] eta: f64,
    /// Crossover scan range.
    #[arg(long)] n_lo: u64,
    #[arg(long)] n_hi: u64,
});

params!(VerifyArgs {
    /// fp-small, atom-dual, lcd or all.
    #[arg(long)] suite: String,
});

params!(CalibrateArgs {
    /// lcd-levy, halasz or wt-atom.
    #[arg(long)] bound: String,
    #[arg(long)] count: u64,
    #[arg(long)] dim: usize,
    #[arg(long)] max_coord: i64,
    #[arg(long)] mu: f64,
    #[arg(long)] gamma: f64,
    #[arg(long)] alpha: f64,
    #[arg(long)] seed: u64,
    #[arg(long)] n: usize,
    #[arg(long)] p: u64,
    #[arg(long)] k: u32,
    #[arg(long)] m: f64,
    #[arg(long)] s1: usize,
    #[arg(long)] s2: usize,
});

/// Shared state for one invocation.
pub struct Context {
    pub budgets: Budgets,
    pub constants: CalibrationConstants,
    pub runner: RayonRunner,
}

/// A finished command: its report and, for `verify`, any failure.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, failure: None }
    }
}

fn need<T>(v: Option<T>, cmd: &str, key: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("{cmd}: missing required parameter `{key}`")))
}

fn lazy(mu: f64) -> CliResult<LazyDist> {
    Ok(LazyDist::new(mu)?)
}

fn echo<T: Serialize>(params: &T, ctx: &Context) -> Value {
    json!({ "params": params, "budgets": ctx.budgets, "constants": ctx.constants })
}

fn resolve_mu(mu: Option<f64>, exponent: Option<f64>, n: f64) -> f64 {
    mu.unwrap_or_else(|| n.powf(-exponent.unwrap_or(0.45)))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn sample(a: SampleArgs, ctx: &Context) -> CliResult<Report> {
    let model = a.model.clone().unwrap_or_else(|| "lazy".into());
    let seed = SeedSpec::new(a.seed.unwrap_or(0), a.stream.unwrap_or(0));
    let mut r = Report::new("sample", echo(&a, ctx), &["index", "value"]);
    let values: Vec<f64> = match (model.as_str(), a.n) {
        ("lazy", Some(n)) => {
            let m = sample_lazy_matrix(n, &lazy(a.mu.unwrap_or(0.5))?, seed)?;
            r.set("nonzeros", json!(m.nonzeros()));
            m.to_f64()
        }
        ("gaussian", Some(n)) => match sample_gaussian_matrix(n, seed)?.entries() {
            Entries::Real(v) => v.clone(),
            Entries::Lazy(v) => v.iter().map(|&x| x as f64).collect(),
        },
        ("lazy", None) => sample_lazy(&lazy(a.mu.unwrap_or(0.5))?, seed, a.count.unwrap_or(10))
            .into_iter()
            .map(f64::from)
            .collect(),
        ("gaussian", None) => {
            let mut s = seed.stream();
            (0..a.count.unwrap_or(10)).map(|_| s.gaussian()).collect()
        }
        (other, _) => return Err(CliError::config(format!("sample: model must be lazy or gaussian, got {other:?}"))),
    };
    for (i, v) in values.iter().enumerate() {
        r.push_row(vec![json!(i), num(*v)]);
    }
    r.set("model", text(model));
    r.set("draws", json!(values.len()));
    if let Some(n) = a.n {
        r.set("n", json!(n));
    }
    Ok(r)
}

fn atom(a: AtomArgs, ctx: &Context) -> CliResult<Report> {
    let w = need(a.w.clone(), "atom", "w")?;
    let mu = need(a.mu, "atom", "mu")?;
    let dist = lazy(mu)?;
    let iv = IntVector::new(w.clone())?;
    let mut r = Report::new(
        "atom",
        echo(&a, ctx),
        &["method", "domain", "mu", "rho", "ci_lo", "ci_hi", "argmax_value"],
    );
    let (rho, arg, method, domain) = match a.p {
        None => {
            let x = atom_prob_int(&iv, &dist, &ctx.budgets)?;
            (x.rho, x.argmax_value, "exact-dp".to_string(), "Z".to_string())
        }
        Some(p) => {
            let alg = match a.algorithm.as_deref().unwrap_or("dp") {
                "dp" => FpAlgorithm::ResidueDp,
                "fourier" => FpAlgorithm::Fourier,
                other => return Err(CliError::config(format!("atom: algorithm must be dp or fourier, got {other:?}"))),
            };
            let fp = FpVector::from_signed(&w, p)?;
            let x = walk_law_fp(&fp, &dist, alg, &ctx.budgets)?.max_atom();
            let name = if alg == FpAlgorithm::Fourier { "exact-fourier" } else { "exact-dp" };
            (x.rho, x.argmax_value, name.to_string(), format!("F_{p}"))
        }
    };
    r.push_row(vec![text(&method), text(&domain), num(mu), num(rho), num(rho), num(rho), json!(arg)]);
    r.set("rho", num(rho));
    r.set("argmax_value", json!(arg));
    if let Some(trials) = a.mc_trials {
        let mc = atom_prob_mc(&iv, &dist, trials, SeedSpec::new(a.seed.unwrap_or(0), 0))?;
        let f = mc.frequency;
        r.push_row(vec![
            text("monte-carlo"),
            text("Z"),
            num(mu),
            num(f.estimate),
            num(f.ci_lo),
            num(f.ci_hi),
            json!(mc.argmax_value),
        ]);
        r.set("mc_rho", num(f.estimate));
    }
    Ok(r)
}

fn lcd_cmd(a: LcdArgs, ctx: &Context) -> CliResult<Report> {
    let dir = match (&a.a, &a.w) {
        (Some(x), None) => UnitVector::normalize(x)?,
        (None, Some(w)) => UnitVector::from_int(&IntVector::new(w.clone())?)?,
        _ => return Err(CliError::config("lcd: give exactly one of `a` or `w`")),
    };
    let alpha = a.alpha.unwrap_or_else(|| (dir.dim() as f64).powf(0.25));
    let mut params = LcdParams::new(a.gamma.unwrap_or(0.01), alpha, a.theta_max.unwrap_or(100.0))?;
    params.max_evaluations = a.max_evaluations.unwrap_or(ctx.budgets.lcd_evaluations);
    if let Some(g) = a.grid_step {
        params = params.with_grid_step(g)?;
    }
    let res = lcd(&dir, &params)?;
    let (status, theta, witness) = match &res.status {
        LcdStatus::Found { theta_star, witness, .. } => ("found", num(*theta_star), text(join(witness.coords()))),
        LcdStatus::Exceeds { .. } => ("exceeds", Value::Null, Value::Null),
    };
    let mut r = Report::new(
        "lcd",
        echo(&a, ctx),
        &["status", "theta_star", "lower_bound", "certified_margin", "evaluations", "witness"],
    );
    r.push_row(vec![
        text(status),
        theta.clone(),
        num(res.lower_bound()),
        num(res.certified_margin),
        json!(res.evaluations),
        witness,
    ]);
    r.set("status", text(status));
    r.set("theta_star", theta);
    r.set("lower_bound", num(res.lower_bound()));
    r.set("grid_step", num(params.grid_step));
    Ok(r)
}

fn rk(a: RkArgs, ctx: &Context) -> CliResult<Report> {
    let p = need(a.p, "rk", "p")?;
    let v = FpVector::from_signed(&need(a.a.clone(), "rk", "a")?, p)?;
    let k = a.k.unwrap_or(1);
    let moment = rk_exact(&v, k, &ctx.budgets)?;
    let mut r = Report::new(
        "rk",
        echo(&a, ctx),
        &["k", "beta", "rk_moment", "rk_enumerated", "rk_restricted", "slack", "slack_bound_holds"],
    );
    r.set("rk", json!(moment));
    match a.beta {
        None => r.push_row(vec![json!(k), Value::Null, json!(moment), Value::Null, Value::Null, Value::Null, Value::Null]),
        Some(beta) => {
            let c = rk_restricted_bruteforce(&v, k, beta, &ctx.budgets)?;
            let slack = restricted_count_slack(k, v.dim(), beta);
            let holds = c.total as f64 <= c.restricted as f64 + slack;
            r.push_row(vec![
                json!(k),
                num(beta),
                json!(moment),
                json!(c.total),
                json!(c.restricted),
                num(slack),
                json!(holds),
            ]);
            r.set("rk_restricted", json!(c.restricted));
            r.set("slack_bound_holds", json!(holds));
            r.set("routes_agree", json!(c.total == moment));
        }
    }
    Ok(r)
}

fn levelset(a: LevelsetArgs, ctx: &Context) -> CliResult<Report> {
    let p = need(a.p, "levelset", "p")?;
    let v = FpVector::from_signed(&need(a.a.clone(), "levelset", "a")?, p)?;
    let ts = a.t.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]);
    let mut r = Report::new("levelset", echo(&a, ctx), &["t", "size", "members"]);
    for &t in &ts {
        let l = level_set(&v, t, &ctx.budgets)?;
        r.push_row(vec![num(t), json!(l.size), text(join(&l.members))]);
    }
    r.set("p", json!(p));
    r.set("levels", json!(ts.len()));
    Ok(r)
}

fn halasz(a: HalaszArgs, ctx: &Context) -> CliResult<Report> {
    let p = a.p.unwrap_or(101);
    let k = a.k.unwrap_or(1);
    let m = a.m.unwrap_or(2.0);
    let mu = a.mu.unwrap_or(0.5);
    let ts = a.t.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let vectors: Vec<FpVector> = match &a.a {
        Some(v) => vec![FpVector::from_signed(v, p)?],
        None => {
            let n = a.n.unwrap_or(160);
            let seed = a.seed.unwrap_or(0);
            (0..a.count.unwrap_or(1))
                .map(|i| random_full_support(n, p, SeedSpec::new(seed, i)))
                .collect::<Result<_, _>>()?
        }
    };
    let mut r = Report::new(
        "halasz",
        echo(&a, ctx),
        &["instance", "k", "m", "t", "status", "size_t", "size_2m", "rk", "first_rhs", "second_rhs"],
    );
    let (mut violations, mut applicable, mut bound_violations) = (0u64, 0u64, 0u64);
    let mut max_c: f64 = 0.0;
    let mut hypotheses = true;
    for (i, v) in vectors.iter().enumerate() {
        for &t in &ts {
            let row = match check_hal4(v, k, m, t, &ctx.budgets)? {
                LevelSetOutcome::NotApplicable(why) => vec![
                    json!(i),
                    json!(k),
                    num(m),
                    num(t),
                    text(format!("not-applicable: {why}")),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                ],
                LevelSetOutcome::Evaluated(h) => {
                    violations += (!h.holds()) as u64;
                    hypotheses &= h.bound_hypotheses;
                    vec![
                        json!(i),
                        json!(k),
                        num(m),
                        num(t),
                        text(if h.holds() { "holds" } else { "violated" }),
                        json!(h.size_t),
                        json!(h.size_2m),
                        json!(h.rk),
                        num(h.first_rhs),
                        num(h.second_rhs),
                    ]
                }
            };
            r.push_row(row);
        }
        let b = bound_halasz(v, mu, k, m, &ctx.budgets)?;
        if b.applicable {
            applicable += 1;
            max_c = max_c.max(b.empirical_c);
            bound_violations += (!b.holds_at(4.0)) as u64;
        }
    }
    r.set("instances", json!(vectors.len()));
    r.set("level_set_violations", json!(violations));
    r.set("bound_hypotheses", json!(hypotheses));
    r.set("bound_applicable", json!(applicable));
    r.set("bound_max_c", num(max_c));
    r.set("bound_violations_at_c4", json!(bound_violations));
    Ok(r)
}

fn tail(a: TailArgs, ctx: &Context) -> CliResult<Report> {
    let n = need(a.n, "tail", "n")?;
    let mu = resolve_mu(a.mu, a.mu_exponent, n as f64);
    let scale = mu.sqrt() * (n as f64).powf(-1.5);
    let (eta, cs) = match (&a.eta, &a.c) {
        (Some(_), Some(_)) => return Err(CliError::config("tail: give at most one of `eta` or `c`")),
        (Some(e), None) => (e.clone(), None),
        (None, c) => {
            let c = c.clone().unwrap_or_else(|| vec![0.02, 0.05, 0.1, 0.2]);
            (c.iter().map(|c| c * scale).collect(), Some(c))
        }
    };
    let trials = a.trials.unwrap_or(10_000);
    let seed = a.seed.unwrap_or(0);
    let defaults = RankPolicy::default();
    let policy = RankPolicy {
        full_up_to: a.rank_full_up_to.unwrap_or(defaults.full_up_to),
        stride: a.rank_stride.unwrap_or(defaults.stride),
    };
    let rep = tail_experiment(n, &lazy(mu)?, &eta, trials, seed, policy, &ctx.runner)?;
    let mut r = Report::new(
        "tail",
        echo(&a, ctx),
        &["n", "mu", "eta", "p_hat", "ci_lo", "ci_hi", "bound", "trials", "seed"],
    );
    for ((e, est), b) in rep.eta_grid.iter().zip(&rep.estimates).zip(&rep.bound_curve) {
        r.push_row(vec![
            json!(n),
            num(mu),
            num(*e),
            num(est.estimate),
            num(est.ci_lo),
            num(est.ci_hi),
            num(*b),
            json!(trials),
            json!(seed),
        ]);
    }
    r.set("exact_singular_fraction", num(rep.exact_singular_fraction));
    r.set("ranked", json!(rep.ranked));
    r.set("singular", json!(rep.singular));
    r.set("max_residual_ratio", num(rep.max_residual_ratio));
    let proven = rep.regime.iter().all(|f| f.in_regime());
    r.set("regime", text(if proven { "proven" } else { "monitoring" }));
    if let Some(cs) = cs {
        let c_cal = cs.iter().zip(&rep.estimates).map(|(c, e)| e.estimate / c).fold(0.0, f64::max);
        r.set("c_cal", num(c_cal));
    }
    Ok(r)
}

fn spectral_norm(a: SpectralNormArgs, ctx: &Context) -> CliResult<Report> {
    let n = a.n.unwrap_or(500);
    let mu = resolve_mu(a.mu, a.mu_exponent, n as f64);
    let mut constants = ctx.constants;
    if let Some(c) = a.norm_const {
        constants.norm_const = c;
    }
    let trials = a.trials.unwrap_or(200);
    let seed = a.seed.unwrap_or(0);
    let rep = spectral_norm_experiment(n, &lazy(mu)?, trials, seed, &constants, &ctx.runner)?;
    let mut cols = vec!["n", "mu", "norm_const", "freq", "ci_lo", "ci_hi", "predicted", "gate_ok"];
    let qnames = ["q01", "q50", "q90", "q99", "max"];
    cols.extend(qnames);
    cols.extend(["trials", "seed"]);
    let mut r = Report::new("spectral-norm", echo(&a, ctx), &cols);
    let mut row = vec![
        json!(n),
        num(mu),
        num(rep.threshold_const),
        num(rep.exceed.estimate),
        num(rep.exceed.ci_lo),
        num(rep.exceed.ci_hi),
        num(rep.predicted),
        json!(rep.gate_ok),
    ];
    row.extend(rep.quantiles.iter().map(|&(_, v)| num(v)));
    row.extend([json!(trials), json!(seed)]);
    r.push_row(row);
    r.set("freq", num(rep.exceed.estimate));
    r.set("gate_ok", json!(rep.gate_ok));
    for (name, (_, v)) in qnames.iter().zip(&rep.quantiles) {
        r.set(name, num(*v));
    }
    Ok(r)
}

fn edelman(a: EdelmanArgs, ctx: &Context) -> CliResult<Report> {
    let n = a.n.unwrap_or(100);
    let trials = a.trials.unwrap_or(20_000);
    let seed = a.seed.unwrap_or(0);
    let eps = a.eps.clone().unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.4, 0.5]);
    let rep = edelman_baseline(n, trials, seed, &eps, &ctx.runner)?;
    let mut r = Report::new("edelman", echo(&a, ctx), &["n", "eps", "p_hat", "ci_lo", "ci_hi", "trials", "seed"]);
    for (e, p) in rep.eps_grid.iter().zip(&rep.estimates) {
        r.push_row(vec![json!(n), num(*e), num(p.estimate), num(p.ci_lo), num(p.ci_hi), json!(trials), json!(seed)]);
    }
    r.set("slope", num(rep.slope));
    r.set("monotone", json!(rep.monotone));
    Ok(r)
}

fn replay(a: ReplayArgs, ctx: &Context) -> CliResult<Report> {
    let n = a.n.unwrap_or(1e6);
    let mu = resolve_mu(a.mu, a.mu_exponent, n);
    let eta = a.eta.unwrap_or_else(|| (-n.powf(0.0001)).exp2());
    let rep = replay_pro45(n, mu, eta, &ctx.constants)?;
    let mut r = Report::new("replay", echo(&a, ctx), &["term", "value"]);
    r.push_row(vec![text("ln_p"), num(rep.ln_p)]);
    r.push_row(vec![text("ln_t"), num(rep.ln_t)]);
    for t in &rep.terms {
        r.push_row(vec![text(t.name), num(t.value)]);
    }
    r.set("verdict", json!(rep.verdict));
    r.set("mu_ok", json!(rep.regime.mu_ok));
    r.set("eta_above_floor", json!(rep.regime.eta_above_floor));
    r.set("eta_below_trivial", json!(rep.eta_below_trivial));
    if let (Some(lo), Some(hi)) = (a.n_lo, a.n_hi) {
        let rule = match a.mu {
            Some(m) => MuRule::Fixed(m),
            None => MuRule::Power(a.mu_exponent.unwrap_or(0.45)),
        };
        let up = replay_crossover(lo, hi, rule, &ctx.constants, ScanOrder::Ascending)?;
        let down = replay_crossover(lo, hi, rule, &ctx.constants, ScanOrder::Descending)?;
        let show = |x: Option<u64>| x.map_or_else(|| text("none"), |v| json!(v));
        r.set("crossover_ascending", show(up));
        r.set("crossover_descending", show(down));
        r.set("crossover_stable", json!(up == down));
    }
    Ok(r)
}

fn verify(a: VerifyArgs, ctx: &Context) -> CliResult<Outcome> {
    let suite: Suite = a.suite.as_deref().unwrap_or("all").parse()?;
    let checks = run_suite(suite, &ctx.budgets)?;
    let mut r = Report::new("verify", echo(&a, ctx), &["suite", "check", "passed", "detail"]);
    let mut failed = Vec::new();
    for c in &checks {
        r.push_row(vec![text(c.suite), text(&c.name), json!(c.passed), text(&c.detail)]);
        if !c.passed {
            failed.push(format!("{}: {}", c.suite, c.name));
        }
    }
    r.set("checks", json!(checks.len()));
    r.set("failed", json!(failed.len()));
    Ok(Outcome {
        report: r,
        failure: (!failed.is_empty()).then(|| failed.join(", ")),
    })
}

fn calibrate(a: CalibrateArgs, ctx: &Context) -> CliResult<Report> {
    let name = need(a.bound.clone(), "calibrate", "bound")?;
    let bound: BoundName = name.parse()?;
    let seed = a.seed.unwrap_or(0);
    let family = match bound {
        BoundName::LcdLevy => InstanceFamily::RationalDirections {
            count: a.count.unwrap_or(200),
            dim: a.dim.unwrap_or(4),
            max_coord: a.max_coord.unwrap_or(10),
            mu: a.mu.unwrap_or(0.3),
            gamma: a.gamma.unwrap_or(0.01),
            alpha: a.alpha.unwrap_or(1.0),
            seed,
        },
        BoundName::Halasz => InstanceFamily::FullSupportFp {
            count: a.count.unwrap_or(200),
            n: a.n.unwrap_or(160),
            p: a.p.unwrap_or(101),
            mu: a.mu.unwrap_or(0.3),
            k: a.k.unwrap_or(1),
            m: a.m.unwrap_or(2.0),
            seed,
        },
        BoundName::WtAtom => InstanceFamily::ExhaustiveSmall {
            n: a.n.unwrap_or(3),
            p: a.p.unwrap_or(7),
            mu: a.mu.unwrap_or(0.3),
            k: a.k.unwrap_or(1),
            s1: a.s1.unwrap_or(2),
            s2: a.s2.unwrap_or(2),
        },
    };
    let reports = calibration_reports(bound, &family, &ctx.budgets, &ctx.runner)?;
    let mut r = Report::new(
        "calibrate",
        json!({ "params": a, "family": family, "budgets": ctx.budgets, "constants": ctx.constants }),
        &["instance", "applicable", "lhs", "rhs_fixed", "rhs_scaled", "empirical_c", "reason"],
    );
    for (i, b) in reports.iter().enumerate() {
        r.push_row(vec![
            json!(i),
            json!(b.applicable),
            num(b.lhs),
            num(b.rhs_fixed),
            num(b.rhs_scaled),
            num(b.empirical_c),
            b.reason.clone().map_or(Value::Null, text),
        ]);
    }
    r.set("bound", text(bound.as_str()));
    match summarize(&reports) {
        CalibrationOutcome::Calibrated(s) => {
            r.set("applicable", json!(s.applicable));
            r.set("max", num(s.max));
            r.set("median", num(s.median));
            r.set("q90", num(s.q90));
            r.set("q99", num(s.q99));
            for (c, bad) in s.violations {
                r.set(&format!("violations_at_{c}"), json!(bad));
            }
        }
        CalibrationOutcome::NoApplicableInstances { instances } => {
            r.set("applicable", json!(0));
            r.set("instances", json!(instances));
        }
    }
    Ok(r)
}

fn merged<T: Serialize + DeserializeOwned>(name: &str, doc: Option<&ConfigDoc>, flags: &T) -> CliResult<T> {
    if let Some(d) = doc {
        if d.command != name {
            return Err(CliError::config(format!(
                "command: config is for `{}` but `{name}` was requested",
                d.command
            )));
        }
    }
    config::merge(doc.map(|d| &d.params), flags)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::Atom(_) => "atom",
        Command::Lcd(_) => "lcd",
        Command::Rk(_) => "rk",
        Command::Levelset(_) => "levelset",
        Command::Halasz(_) => "halasz",
        Command::Tail(_) => "tail",
        Command::SpectralNorm(_) => "spectral-norm",
        Command::Edelman(_) => "edelman",
        Command::Replay(_) => "replay",
        Command::Verify(_) => "verify",
        Command::Calibrate(_) => "calibrate",
        Command::Run => "run",
    }
}

fn default_command(name: &str) -> CliResult<Command> {
    Ok(match name {
        "sample" => Command::Sample(Default::default()),
        "atom" => Command::Atom(Default::default()),
        "lcd" => Command::Lcd(Default::default()),
        "rk" => Command::Rk(Default::default()),
        "levelset" => Command::Levelset(Default::default()),
        "halasz" => Command::Halasz(Default::default()),
        "tail" => Command::Tail(Default::default()),
        "spectral-norm" => Command::SpectralNorm(Default::default()),
        "edelman" => Command::Edelman(Default::default()),
        "replay" => Command::Replay(Default::default()),
        "verify" => Command::Verify(Default::default()),
        "calibrate" => Command::Calibrate(Default::default()),
        other => return Err(CliError::config(format!("command: unknown command {other:?}"))),
    })
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> CliResult<Outcome> {
    let doc = cli.config.as_deref().map(config::load).transpose()?;
    let command = match cli.command {
        Command::Run => {
            let d = doc.as_ref().ok_or_else(|| CliError::config("run: --config is required"))?;
            default_command(&d.command)?
        }
        c => c,
    };
    let budgets = doc.as_ref().and_then(|d| d.budgets).unwrap_or_default();
    let ctx = Context {
        budgets: config::apply_budget_env(budgets)?,
        constants: doc.as_ref().and_then(|d| d.constants).unwrap_or_default(),
        runner: RayonRunner::new(cli.workers)?,
    };
    ctx.constants.validate()?;
    let name = command_name(&command);
    let d = doc.as_ref();
    let outcome = match command {
        Command::Sample(a) => sample(merged(name, d, &a)?, &ctx)?.into(),
        Command::Atom(a) => atom(merged(name, d, &a)?, &ctx)?.into(),
        Command::Lcd(a) => lcd_cmd(merged(name, d, &a)?, &ctx)?.into(),
        Command::Rk(a) => rk(merged(name, d, &a)?, &ctx)?.into(),
        Command::Levelset(a) => levelset(merged(name, d, &a)?, &ctx)?.into(),
        Command::Halasz(a) => halasz(merged(name, d, &a)?, &ctx)?.into(),
        Command::Tail(a) => tail(merged(name, d, &a)?, &ctx)?.into(),
        Command::SpectralNorm(a) => spectral_norm(merged(name, d, &a)?, &ctx)?.into(),
        Command::Edelman(a) => edelman(merged(name, d, &a)?, &ctx)?.into(),
        Command::Replay(a) => replay(merged(name, d, &a)?, &ctx)?.into(),
        Command::Verify(a) => verify(merged(name, d, &a)?, &ctx)?,
        Command::Calibrate(a) => calibrate(merged(name, d, &a)?, &ctx)?.into(),
        Command::Run => unreachable!("resolved above"),
    };
    if let Some(dir) = &cli.out_dir {
        outcome.report.write(dir)?;
    }
    Ok(outcome)
}

/// Parses `args`, runs the command, prints its summary and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            for line in outcome.report.summary_lines() {
                println!("{line}");
            }
            match outcome.failure {
                Some(f) => {
                    eprintln!("error: {}", CliError::Verify(f.clone()));
                    CliError::Verify(f).exit_code()
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
