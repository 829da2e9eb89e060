//! One function per subcommand. Each validates its config, runs the
//! experiment and returns the files to write plus any failed checks.

use serde::Serialize;
use varlorentz::compactness::{classify, ClassifyParams, CompactnessVerdict, WitnessParams};
use varlorentz::extremal::{analytic_floor, gamma_limit, GammaTrace, OptimizerOptions};
use varlorentz::norms::level_set_norm;
use varlorentz::rearrangement::{decreasing_rearrangement, symmetric_decreasing_rearrangement};
use varlorentz::system::{bernstein_lower_bound, build_system, tail_index, SystemParams};
use varlorentz::{
    lorentz_norm, luxemburg_norm, modular, rearranged_lorentz_norm_pow, BallDomain, ExponentField, NormSpec,
};

use crate::config::{validate_exponent, BernsteinConfig, GammaConfig, NormConfig, RearrangeConfig};
use crate::error::{as_config, CliError};
use crate::output::{num, Artifacts, Table};

pub struct Outcome {
    pub artifacts: Artifacts,
    /// Checks that did not hold; any entry makes the run exit with 1.
    pub failures: Vec<String>,
}

fn require(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn sorted_unique(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn uniform(top: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| top * k as f64 / (n - 1) as f64)
}

#[derive(Serialize)]
struct RearrangeSummary {
    max: f64,
    support_measure: f64,
    domain_measure: f64,
    /// Values of `t` where `f*` may fail to be smooth.
    breakpoints: Vec<f64>,
    symmetric_knots: usize,
}

pub fn rearrange(cfg: &RearrangeConfig) -> Result<Outcome, CliError> {
    require(cfg.samples >= 2, "samples must be at least 2")?;
    require(cfg.levels.iter().all(|l| l.is_finite() && *l >= 0.0), "levels must be finite and non-negative")?;
    let f = cfg.profile.build()?;

    let re = decreasing_rearrangement(&f);
    let dist = re.distribution();
    let total = f.domain.measure();

    let mut levels: Vec<f64> = uniform(re.max(), cfg.samples).collect();
    levels.extend(dist.breakpoints());
    levels.extend(&cfg.levels);
    let mut distribution = Table::new(&["lambda", "measure"]);
    for l in sorted_unique(levels) {
        distribution.numbers(&[l, dist.eval(l)]);
    }

    let breakpoints = re.breakpoints();
    let mut ts: Vec<f64> = uniform(total, cfg.samples).collect();
    ts.extend(&breakpoints);
    let mut rearrangement = Table::new(&["t", "value"]);
    for t in sorted_unique(ts) {
        rearrangement.numbers(&[t, re.eval(t)]);
    }
    let mut steps = Table::new(&["t", "value"]);
    for &t in &breakpoints {
        steps.numbers(&[t, re.eval(t)]);
    }

    let sharp = symmetric_decreasing_rearrangement(&f);
    let mut symmetric = Table::new(&["radius", "value"]);
    for (r, v) in sharp.radii.iter().zip(&sharp.values) {
        symmetric.numbers(&[*r, *v]);
    }

    let summary = RearrangeSummary {
        max: re.max(),
        support_measure: re.support_measure(),
        domain_measure: total,
        breakpoints,
        symmetric_knots: sharp.radii.len(),
    };
    let mut artifacts = Artifacts::default();
    artifacts.json("rearrange.json", "rearrange", cfg, &summary)?;
    artifacts.csv("distribution.csv", distribution)?;
    artifacts.csv("rearrangement.csv", rearrangement)?;
    artifacts.csv("breakpoints.csv", steps)?;
    artifacts.csv("symmetric.csv", symmetric)?;
    Ok(Outcome { artifacts, failures: Vec::new() })
}

#[derive(Serialize)]
struct NormSummary {
    luxemburg: f64,
    /// Modular of `f / luxemburg`; 1 up to the solver tolerance.
    modular_at_norm: f64,
    lorentz: f64,
    lorentz_symmetrized: f64,
    /// Whether `lorentz <= lorentz_symmetrized` was required.
    symmetrization_checked: bool,
}

pub fn norm(cfg: &NormConfig) -> Result<Outcome, CliError> {
    validate_exponent(&cfg.exponent)?;
    let spec = NormSpec::new(cfg.exponent.clone(), cfg.second_index).map_err(as_config)?;
    require(cfg.level_samples >= 1, "level_samples must be at least 1")?;
    require(cfg.tol >= 0.0 && cfg.tol.is_finite(), "tol must be non-negative")?;
    let f = cfg.profile.build()?;
    let q = &cfg.exponent;

    let luxemburg = luxemburg_norm(&f, q)?;
    let modular_at_norm = if luxemburg > 0.0 { modular(&f.scaled(1.0 / luxemburg), q)? } else { 0.0 };
    let lorentz = lorentz_norm(&f, &spec)?;
    let lorentz_symmetrized = rearranged_lorentz_norm_pow(&f, &spec)?.powf(1.0 / cfg.second_index);
    let symmetrization_checked = q.is_radially_decreasing();

    let mut failures = Vec::new();
    if luxemburg > 0.0 && (modular_at_norm - 1.0).abs() > cfg.tol {
        failures.push(format!("modular at the Luxemburg norm is {modular_at_norm}, not 1"));
    }
    if symmetrization_checked && lorentz > lorentz_symmetrized * (1.0 + cfg.tol) {
        failures.push(format!("norm {lorentz} exceeds the norm {lorentz_symmetrized} of the symmetrization"));
    }

    let top = f.sup_abs();
    let mut levels = Table::new(&["lambda", "measure", "level_set_norm"]);
    for k in 0..cfg.level_samples {
        let l = top * k as f64 / cfg.level_samples as f64;
        let set = f.superlevel_set(l, false);
        levels.numbers(&[l, f.set_measure(&set), level_set_norm(&f, l, q)?]);
    }

    let summary = NormSummary { luxemburg, modular_at_norm, lorentz, lorentz_symmetrized, symmetrization_checked };
    let mut artifacts = Artifacts::default();
    artifacts.json("norm.json", "norm", cfg, &summary)?;
    artifacts.csv("levels.csv", levels)?;
    Ok(Outcome { artifacts, failures })
}

pub fn classify_command(params: &ClassifyParams) -> Result<Outcome, CliError> {
    params.exponent().map_err(as_config)?;
    params.domain().map_err(as_config)?;
    require(params.delta_factor > 0.0 && params.delta_factor.is_finite(), "delta_factor must be positive")?;
    require(params.alphas.iter().all(|a| *a > 1.0 && a.is_finite()), "alphas must be finite and above 1")?;
    require(params.n_list.iter().all(|n| *n >= 1), "n_list entries must be positive")?;

    let verdict: CompactnessVerdict = classify(params)?;
    let ev = &verdict.evidence;

    let mut decay = Table::new(&["radius", "indicator_norm"]);
    for (r, v) in ev.decay_radii.iter().zip(&ev.indicator_decay) {
        decay.numbers(&[*r, *v]);
    }
    let mut finiteness = Table::new(&["alpha", "log_value", "log_value_substituted", "tail_relative", "converged"]);
    for fi in &ev.finiteness {
        finiteness.numbers(&[
            fi.alpha,
            fi.log_value,
            fi.log_value_substituted,
            fi.tail_relative,
            f64::from(u8::from(fi.converged)),
        ]);
    }
    let mut bump =
        Table::new(&["n", "modular", "indicator_norm", "indicator_lower", "lorentz_pow", "gradient_norm", "lp_norm"]);
    for e in ev.bump.iter().flat_map(|b| &b.entries) {
        bump.numbers(&[
            e.n as f64,
            e.modular,
            e.indicator_norm,
            e.indicator_lower,
            e.lorentz_pow,
            e.gradient_norm,
            e.lp_norm,
        ]);
    }

    let mut artifacts = Artifacts::default();
    artifacts.json("verdict.json", "classify", params, &verdict)?;
    artifacts.csv("decay.csv", decay)?;
    artifacts.csv("finiteness.csv", finiteness)?;
    artifacts.csv("bump.csv", bump)?;
    Ok(Outcome { artifacts, failures: Vec::new() })
}

fn check_optimizer(knots: usize, restarts: usize) -> Result<(), CliError> {
    require(knots >= 3, "knots must be at least 3")?;
    require(restarts >= 1, "restarts must be at least 1")
}

#[derive(Serialize)]
struct GammaSummary {
    /// Quotient lower bound from the bump witness; present when `ell = 1`.
    floor: Option<f64>,
    trace: GammaTrace,
}

pub fn gamma(cfg: &GammaConfig) -> Result<Outcome, CliError> {
    let exponent = ExponentField::log_singular(cfg.p, cfg.dim, cfg.c0, cfg.ell, cfg.eta0).map_err(as_config)?;
    let spec = NormSpec::new(exponent, cfg.p).map_err(as_config)?;
    check_optimizer(cfg.knots, cfg.restarts)?;
    require(!cfg.radii.is_empty(), "radii must not be empty")?;
    require(cfg.radii.iter().all(|r| *r > 0.0 && r.is_finite()), "radii must be positive")?;
    require(cfg.radii.windows(2).all(|w| w[1] < w[0]), "radii must decrease")?;
    require(cfg.tol >= 0.0 && cfg.tol.is_finite(), "tol must be non-negative")?;

    let floor = if cfg.ell == 1.0 {
        Some(analytic_floor(&WitnessParams::new(cfg.p, cfg.dim, cfg.c0, cfg.eta0)).map_err(as_config)?)
    } else {
        None
    };
    let options = OptimizerOptions { knots: cfg.knots, restarts: cfg.restarts, budget: cfg.budget, seed: cfg.seed };
    let trace = gamma_limit(&cfg.radii, cfg.dim, &spec, &options, None)?;

    let mut failures = Vec::new();
    let mut table = Table::new(&["r", "gamma_hat", "floor", "evaluations", "converged"]);
    for e in &trace.estimates {
        if let Some(fl) = floor {
            if e.gamma_hat < fl - cfg.tol {
                failures.push(format!("quotient {} at radius {} is below the floor {fl}", e.gamma_hat, e.r));
            }
        }
        table.row(vec![
            num(e.r),
            num(e.gamma_hat),
            floor.map(num).unwrap_or_default(),
            e.evaluations.to_string(),
            u8::from(e.converged).to_string(),
        ]);
    }

    let mut artifacts = Artifacts::default();
    artifacts.json("gamma.json", "gamma", cfg, &GammaSummary { floor, trace })?;
    artifacts.csv("gamma.csv", table)?;
    Ok(Outcome { artifacts, failures })
}

pub fn bernstein(cfg: &BernsteinConfig) -> Result<Outcome, CliError> {
    let params = SystemParams {
        p: cfg.p,
        dim: cfg.dim,
        c0: cfg.c0,
        eta0: cfg.eta0,
        eps: cfg.eps,
        levels: cfg.levels,
        optimizer: OptimizerOptions { knots: cfg.knots, restarts: cfg.restarts, budget: cfg.budget, seed: cfg.seed },
    };
    params.spec().map_err(as_config)?;
    tail_index(cfg.eps).map_err(as_config)?;
    check_optimizer(cfg.knots, cfg.restarts)?;
    require(cfg.levels >= 1, "levels must be at least 1")?;
    require(cfg.samples >= 1, "samples must be at least 1")?;
    require(cfg.tol >= 0.0 && cfg.tol.is_finite(), "tol must be non-negative")?;
    let ambient = BallDomain::new(cfg.dim, cfg.eta0).map_err(as_config)?;
    require(ambient.measure() <= 1.0, "the ball of radius eta0 must have measure at most 1")?;

    let system = build_system(&params)?;
    let report = bernstein_lower_bound(&system, cfg.levels, cfg.samples, cfg.seed)?;

    let mut failures = Vec::new();
    if report.inf_quotient < report.analytic_bound - cfg.tol {
        failures.push(format!(
            "sampled infimum {} is below the analytic bound {}",
            report.inf_quotient, report.analytic_bound
        ));
    }
    if report.link_violations.iter().any(|&v| v > 0) {
        failures.push(format!("chain links violated: {:?}", report.link_violations));
    }

    let mut chain = Table::new(&[
        "sample",
        "kind",
        "quotient",
        "link1",
        "link2",
        "link3",
        "link4",
        "link5",
        "bound",
        "gradient_direct",
    ]);
    for (i, s) in report.chain.iter().enumerate() {
        let kind = serde_json::to_value(s.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let mut row = vec![i.to_string(), kind];
        row.extend(s.chain.iter().map(|&v| num(v)));
        row.push(num(s.gradient_direct));
        chain.row(row);
    }
    let mut levels = Table::new(&["level", "r", "w", "s", "t", "height", "gamma_hat", "g_gradient_pow", "cut_norm"]);
    for (j, l) in system.levels.iter().enumerate() {
        let mut row = vec![(j + 1).to_string()];
        row.extend([l.r, l.w, l.s, l.t, l.height, l.gamma_hat, l.g_gradient_pow, l.cut_norm].map(num));
        levels.row(row);
    }

    let mut artifacts = Artifacts::default();
    artifacts.json("bernstein.json", "bernstein", cfg, &report)?;
    artifacts.json("system.json", "bernstein", cfg, &system)?;
    artifacts.csv("chain.csv", chain)?;
    artifacts.csv("levels.csv", levels)?;
    Ok(Outcome { artifacts, failures })
}
