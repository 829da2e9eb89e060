//! A nested system of near-extremal radial profiles with disjoint gradient
//! supports, and the lower bound it yields for Bernstein numbers of the
//! embedding.
//!
//! Level `j` lives on `B_{r_j}`. A near-extremal non-increasing profile `f_j`
//! (normalized to unit gradient norm) is flattened inside `B_{s_j}` to give
//! `g_j`, then cut out of `B_{t_j}` to give `h_j`. The next level starts at
//! `r_{j+1} <= t_j`, so the `h_j` have disjoint annular supports and the
//! gradients of the `g_j` do too.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::compactness::WitnessParams;
use crate::domain::{gradient_integral, BallDomain, ExponentField, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::extremal::{analytic_floor, maximize_gamma_r, GammaEstimate, OptimizerOptions};
use crate::norms::{indicator_norm, lorentz_norm, lorentz_norm_pow, NormSpec};
use crate::par;
use crate::rearrangement::symmetric_decreasing_rearrangement;

const BISECTION_STEPS: usize = 40;

/// Least `k` with `2^-k < eps`.
pub fn tail_index(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    let mut k = 1;
    while 0.5f64.powi(k as i32) >= eps {
        k += 1;
    }
    Ok(k)
}

/// Whether `|alpha_j| > 2^-(j + k)` (1-based `j`).
fn above_threshold(alpha: f64, j: usize, k: u32) -> bool {
    alpha.abs() > 0.5f64.powi((j + k as usize) as i32)
}

/// `sum |alpha_j|^p` over the coefficients at or below their threshold.
pub fn small_coefficient_mass(alphas: &[f64], p: f64, k: u32) -> f64 {
    alphas.iter().enumerate().filter(|(i, a)| !above_threshold(**a, i + 1, k)).map(|(_, a)| a.abs().powf(p)).sum()
}

fn lp_norm(alphas: &[f64], p: f64) -> f64 {
    alphas.iter().map(|a| a.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn sup_norm(alphas: &[f64]) -> f64 {
    alphas.iter().fold(0.0, |m, a| m.max(a.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub p: f64,
    pub dim: usize,
    pub c0: f64,
    pub eta0: f64,
    pub eps: f64,
    pub levels: usize,
    pub optimizer: OptimizerOptions,
}

impl SystemParams {
    pub fn new(p: f64, dim: usize, c0: f64, eta0: f64, eps: f64, levels: usize) -> Self {
        Self { p, dim, c0, eta0, eps, levels, optimizer: OptimizerOptions::default() }
    }

    pub fn spec(&self) -> Result<NormSpec> {
        NormSpec::new(ExponentField::log_singular(self.p, self.dim, self.c0, 1.0, self.eta0)?, self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Outer support radius.
    pub r: f64,
    /// Radius below which `f` carries less than `eps` of both norms.
    pub w: f64,
    /// Plateau radius.
    pub s: f64,
    /// Inner cut radius.
    pub t: f64,
    /// Plateau height `f(s)`.
    pub height: f64,
    /// Measured quotient of this level's optimizer output.
    pub gamma_hat: f64,
    pub f_lorentz_pow: f64,
    pub g_lorentz_pow: f64,
    pub h_lorentz_pow: f64,
    pub g_gradient_pow: f64,
    /// `||g - h||` in the Lorentz norm.
    pub cut_norm: f64,
    pub f: RadialProfile,
    pub g: RadialProfile,
    pub h: RadialProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: u8,
    pub level: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSystem {
    pub params: SystemParams,
    pub spec: NormSpec,
    pub k_eps: u32,
    pub domain_radius: f64,
    pub floor: f64,
    /// Level-1 optimizer output; its quotient is the reference `gamma_hat`.
    pub gamma_ref: GammaEstimate,
    pub gamma_hat: f64,
    pub levels: Vec<Level>,
    pub checks: Vec<PropertyCheck>,
}

impl FunctionSystem {
    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn domain(&self) -> BallDomain {
        self.levels[0].g.domain.clone()
    }

    /// `sum alpha_j g_j` over the first `alphas.len()` levels.
    pub fn combine_g(&self, alphas: &[f64]) -> Result<RadialProfile> {
        self.combine(alphas, |l| &l.g)
    }

    /// `sum alpha_j h_j` over the first `alphas.len()` levels.
    pub fn combine_h(&self, alphas: &[f64]) -> Result<RadialProfile> {
        self.combine(alphas, |l| &l.h)
    }

    fn combine(&self, alphas: &[f64], pick: impl Fn(&Level) -> &RadialProfile) -> Result<RadialProfile> {
        if alphas.len() > self.levels.len() {
            return Err(invalid("more coefficients than levels"));
        }
        let terms: Vec<(f64, &RadialProfile)> =
            alphas.iter().zip(&self.levels).filter(|(a, _)| **a != 0.0).map(|(a, l)| (*a, pick(l))).collect();
        RadialProfile::linear_combination(self.domain(), &terms)
    }
}

/// `integral over B_w of |grad f|^p`.
fn gradient_pow_inside(f: &RadialProfile, p: f64, w: f64) -> f64 {
    let d = f.domain.dim as i32;
    let shell = f.domain.shell_factor();
    f.pieces()
        .filter(|&(r0, _, _, _)| r0 < w)
        .map(|(r0, r1, v0, v1)| {
            let slope = ((v1 - v0) / (r1 - r0)).abs();
            let hi = r1.min(w);
            slope.powf(p) * (hi.powi(d) - r0.powi(d)) / d as f64
        })
        .sum::<f64>()
        * shell
}

/// Largest `x` in `[0, hi]` (up to `BISECTION_STEPS` halvings) with `ok(x)`,
/// for a predicate that holds at 0 and is monotone.
fn largest_satisfying(hi: f64, mut ok: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, hi);
    if ok(hi)? {
        return Ok(hi);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `(1/p) (nu_d delta^d)^{p/q+} (1 + nu_d delta^d) (R 2^{j+k})^p`, the
/// smallness the next level's radius must meet.
fn next_radius_bound(domain: &BallDomain, p: f64, q_plus: f64, height: f64, scale_exp: i32, delta: f64) -> f64 {
    let m = domain.ball_measure(delta);
    m.powf(p / q_plus) * (1.0 + m) * (height * 2f64.powi(scale_exp)).powf(p) / p
}

/// Builds `levels` levels of the system and verifies properties (1)-(7).
pub fn build_system(params: &SystemParams) -> Result<FunctionSystem> {
    let spec = params.spec()?;
    let p = params.p;
    let eps = params.eps;
    let k_eps = tail_index(eps)?;
    if params.levels == 0 {
        return Err(invalid("need at least one level"));
    }
    let q_plus = spec.exponent.sup();
    let domain = BallDomain::new(params.dim, params.eta0)?;
    if domain.measure() > 1.0 {
        return Err(invalid("the ambient ball must have measure at most 1"));
    }
    let floor = analytic_floor(&WitnessParams::new(p, params.dim, params.c0, params.eta0))?;

    let mut levels: Vec<Level> = Vec::with_capacity(params.levels);
    let mut gamma_ref: Option<GammaEstimate> = None;
    let mut r = 0.5 * domain.radius;
    for j in 1..=params.levels {
        let options = OptimizerOptions { seed: params.optimizer.seed.wrapping_add(j as u64), ..params.optimizer };
        let est = maximize_gamma_r(r, params.dim, &spec, &options, Some(floor))?;
        let raw = symmetric_decreasing_rearrangement(&est.argmax_profile.extended_to(domain.clone())?);
        let f = raw.scaled(1.0 / gradient_integral(&raw, p)?.powf(1.0 / p));
        let f_lorentz_pow = lorentz_norm_pow(&f, &spec)?;
        if gamma_ref.is_none() {
            let reference = est.clone();
            let gamma = reference.gamma_hat;
            if gamma.powf(p) / 2f64.powf(p) - 4.0 * eps <= 0.0 {
                return Err(Error::Precondition(format!(
                    "eps = {eps} too large for the measured quotient {gamma}: gamma^p/2^p - 4 eps <= 0"
                )));
            }
            gamma_ref = Some(reference);
        }

        let w = largest_satisfying(r, |w| {
            if gradient_pow_inside(&f, p, w) >= eps {
                return Ok(false);
            }
            Ok(lorentz_norm_pow(&f.truncated_outside(w)?, &spec)? < eps)
        })?;
        if w <= 0.0 {
            return Err(Error::PropertyFailure { property: 2, level: j, detail: "no admissible w".into() });
        }
        let s = 0.5 * w;
        let height = f.eval(s);
        let g = f.flattened_inside(s)?;
        let g_lorentz_pow = lorentz_norm_pow(&g, &spec)?;
        let cut = |t: f64| -> Result<f64> {
            let n = indicator_norm(&domain, &[(0.0, t)], &spec.exponent)?;
            Ok(height * n / p.powf(1.0 / p))
        };
        let level_tol = eps / 2f64.powi(j as i32);
        let t = largest_satisfying(s, |t| {
            if t <= 0.0 {
                return Ok(true);
            }
            if t >= s || cut(t)? >= level_tol || cut(t)?.powf(p) >= eps {
                return Ok(false);
            }
            Ok(g_lorentz_pow - lorentz_norm_pow(&g.with_hole(t)?, &spec)? <= eps)
        })?;
        if t <= 0.0 {
            return Err(Error::PropertyFailure { property: 4, level: j, detail: "no admissible t".into() });
        }
        let h = g.with_hole(t)?;
        let h_lorentz_pow = lorentz_norm_pow(&h, &spec)?;
        let g_gradient_pow = gradient_integral(&g, p)?;
        let scale_exp = (j + 1 + k_eps as usize) as i32;
        let delta = {
            // bisection in log-radius: the bound is increasing in delta
            let (mut lo, mut hi) = ((1e-300f64).ln(), t.ln());
            if next_radius_bound(&domain, p, q_plus, height, scale_exp, t) < eps {
                t
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if next_radius_bound(&domain, p, q_plus, height, scale_exp, mid.exp()) < eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo.exp()
            }
        };
        levels.push(Level {
            r,
            w,
            s,
            t,
            height,
            gamma_hat: est.gamma_hat,
            f_lorentz_pow,
            g_lorentz_pow,
            h_lorentz_pow,
            g_gradient_pow,
            cut_norm: cut(t)?,
            f,
            g,
            h,
        });
        r = t.min(delta);
    }

    let gamma_ref = gamma_ref.expect("at least one level");
    let gamma_hat = gamma_ref.gamma_hat;
    let mut system = FunctionSystem {
        params: *params,
        spec,
        k_eps,
        domain_radius: domain.radius,
        floor,
        gamma_ref,
        gamma_hat,
        levels,
        checks: Vec::new(),
    };
    system.checks = verify_properties(&system)?;
    if let Some(bad) = system.checks.iter().find(|c| !c.holds) {
        return Err(Error::PropertyFailure {
            property: bad.property,
            level: bad.level,
            detail: format!("lhs {} vs rhs {}", bad.lhs, bad.rhs),
        });
    }
    Ok(system)
}

/// Checks properties (1)-(6) per level and (7) on coordinate vectors plus a
/// fixed set of random unit vectors.
fn verify_properties(sys: &FunctionSystem) -> Result<Vec<PropertyCheck>> {
    let eps = sys.params.eps;
    let p = sys.params.p;
    let gamma_term = sys.gamma_hat.powf(p) / 2f64.powf(p) - eps;
    let tol = 1e-12;
    let mut checks = Vec::new();
    let mut push = |property: u8, level: usize, lhs: f64, rhs: f64, holds: bool| {
        checks.push(PropertyCheck { property, level, lhs, rhs, holds });
    };
    for (i, l) in sys.levels.iter().enumerate() {
        let j = i + 1;
        // (1) gamma^p / 2^p - eps < ||f#||^p
        push(1, j, l.f_lorentz_pow, gamma_term, l.f_lorentz_pow > gamma_term);
        // (2) 1 - eps < ||grad g||^p <= ||grad f||^p = 1
        push(2, j, l.g_gradient_pow, 1.0 - eps, l.g_gradient_pow > 1.0 - eps && l.g_gradient_pow <= 1.0 + tol);
        // (3) ||f||^p - eps <= ||g||^p <= ||f||^p
        push(
            3,
            j,
            l.g_lorentz_pow,
            l.f_lorentz_pow - eps,
            l.g_lorentz_pow >= l.f_lorentz_pow - eps && l.g_lorentz_pow <= l.f_lorentz_pow * (1.0 + tol),
        );
        // (4) ||g||^p - eps <= ||h||^p <= ||g||^p
        push(
            4,
            j,
            l.h_lorentz_pow,
            l.g_lorentz_pow - eps,
            l.h_lorentz_pow >= l.g_lorentz_pow - eps && l.h_lorentz_pow <= l.g_lorentz_pow * (1.0 + tol),
        );
        // sup |g| = R = sup |h|
        let sup_ok =
            (l.g.sup_abs() - l.height).abs() <= tol * l.height && (l.h.sup_abs() - l.height).abs() <= tol * l.height;
        push(4, j, l.h.sup_abs(), l.height, sup_ok);
        if let Some(next) = sys.levels.get(i + 1) {
            // (5) supp h_j = [t_j, r_j] lies outside B_{r_{j+1}}
            push(5, j, l.t, next.r, next.r <= l.t);
            // (6) grad g_j lives on [s_j, r_j]
            push(6, j, l.s, next.r, next.r < l.s);
        }
        // the cut of step (4) also keeps ||g_j - h_j|| < eps / 2^j
        let bound = eps / 2f64.powi(j as i32);
        push(4, j, l.cut_norm, bound, l.cut_norm < bound);
    }
    let n = sys.levels.len();
    let mut vectors: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    vectors.extend(random_unit_vectors(n, p, 8, sys.params.optimizer.seed ^ 0x5eed));
    let results = par::map_slice(&vectors, |a| disjoint_sum_lower_bound(sys, a));
    for r in results {
        let (lhs, rhs) = r?;
        push(7, 0, lhs, rhs, lhs >= rhs - 1e-8);
    }
    Ok(checks)
}

/// `n` random vectors on the unit `l^p` sphere (normalized Gaussians).
pub fn random_unit_vectors(n: usize, p: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = lp_norm(&v, p);
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

/// Both sides of `||sum alpha_j h_j||^p >= sum_{j in J} |alpha_j|^p (||h_j||^p - eps)`,
/// `J = { j : |alpha_j| > 2^-(j + k_eps) }`. The supports are disjoint annuli,
/// so each level set of the sum is the union of the levels' level sets.
pub fn disjoint_sum_lower_bound(sys: &FunctionSystem, alphas: &[f64]) -> Result<(f64, f64)> {
    let p = sys.params.p;
    let lhs = lorentz_norm_pow(&sys.combine_h(alphas)?, &sys.spec)?;
    let rhs = alphas
        .iter()
        .zip(&sys.levels)
        .enumerate()
        .filter(|(i, (a, _))| above_threshold(**a, i + 1, sys.k_eps))
        .map(|(_, (a, l))| a.abs().powf(p) * (l.h_lorentz_pow - sys.params.eps))
        .sum();
    Ok((lhs, rhs))
}

/// `(||sum alpha_n (f_n - g_n)||, ||alpha||_p eps)` after checking
/// `||f_n - g_n|| < eps / 2^n` for each `n`.
pub fn perturbation_bound(
    fs: &[RadialProfile],
    gs: &[RadialProfile],
    alphas: &[f64],
    eps: f64,
    spec: &NormSpec,
) -> Result<(f64, f64)> {
    if fs.len() != gs.len() || fs.len() != alphas.len() || fs.is_empty() {
        return Err(invalid("need equally many profiles on each side and coefficients"));
    }
    let domain = fs[0].domain.clone();
    for (i, (f, g)) in fs.iter().zip(gs).enumerate() {
        let diff = RadialProfile::linear_combination(domain.clone(), &[(1.0, f), (-1.0, g)])?;
        let d = lorentz_norm(&diff, spec)?;
        let bound = eps / 2f64.powi(i as i32 + 1);
        if d >= bound {
            return Err(Error::Precondition(format!("||f_{0} - g_{0}|| = {d} is not below {bound}", i + 1)));
        }
    }
    let mut terms: Vec<(f64, &RadialProfile)> = Vec::new();
    for ((a, f), g) in alphas.iter().zip(fs).zip(gs) {
        terms.push((*a, f));
        terms.push((-*a, g));
    }
    let defect = lorentz_norm(&RadialProfile::linear_combination(domain, &terms)?, spec)?;
    Ok((defect, lp_norm(alphas, spec.second_index) * eps))
}

/// One sampled coefficient vector and the quotient chain evaluated at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub kind: SampleKind,
    pub alphas: Vec<f64>,
    /// `chain[0]` is the measured quotient; each later entry is the next
    /// lower bound in the chain, ending at the bound for this vector.
    pub chain: [f64; 7],
    /// `||grad sum alpha_j g_j||_p` computed directly.
    pub gradient_direct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Coordinate,
    EqualWeight,
    Threshold,
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub eps: f64,
    pub k_eps: u32,
    pub gamma_hat: f64,
    /// Smallest sampled `||sum alpha g||_{L^{q,p}} / ||sum alpha grad g||_p`.
    pub inf_quotient: f64,
    /// `(gamma^p/2^p - 4 eps)^{1/p} (1 - eps)^{1/p} - eps`.
    pub analytic_bound: f64,
    /// `gamma_hat / 2`, the lower bound for the measure of non-compactness.
    pub beta_lower: f64,
    /// Number of samples violating each of the six chain links.
    pub link_violations: [usize; 6],
    /// Largest relative gap between the direct gradient norm of the sum and
    /// `(sum |alpha_j|^p ||grad g_j||^p)^{1/p}`.
    pub additivity_error: f64,
    pub chain: Vec<ChainSample>,
}

/// Coefficient vectors: coordinates, equal weights with alternating signs,
/// vectors with entries just above and below their thresholds, then random
/// sphere points until `samples` vectors in total.
fn sample_vectors(n: usize, p: f64, k: u32, samples: usize, seed: u64) -> Vec<(SampleKind, Vec<f64>)> {
    let mut out: Vec<(SampleKind, Vec<f64>)> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push((SampleKind::Coordinate, e));
    }
    let equal = (n as f64).powf(-1.0 / p);
    out.push((SampleKind::EqualWeight, vec![equal; n]));
    out.push((SampleKind::EqualWeight, (0..n).map(|i| if i % 2 == 0 { equal } else { -equal }).collect()));
    for i in 0..n {
        for factor in [0.999, 1.001] {
            let mut v = vec![0.0; n];
            v[i] = factor * 0.5f64.powi((i + 1) as i32 + k as i32);
            let rest = (1.0 - v[i].abs().powf(p)).powf(1.0 / p);
            v[(i + 1) % n.max(1)] += if n > 1 { rest } else { 0.0 };
            let norm = lp_norm(&v, p);
            out.push((SampleKind::Threshold, v.into_iter().map(|x| x / norm).collect()));
        }
    }
    out.truncate(samples);
    let extra = samples - out.len();
    out.extend(random_unit_vectors(n, p, extra, seed).into_iter().map(|v| (SampleKind::Sphere, v)));
    out
}

/// Samples unit coefficient vectors over the first `n` levels and evaluates
/// the quotient chain at each. Fails when a sampled quotient falls below the
/// analytic bound by more than `1e-6`.
pub fn bernstein_lower_bound(sys: &FunctionSystem, n: usize, samples: usize, seed: u64) -> Result<BernsteinReport> {
    if n == 0 || n > sys.levels.len() {
        return Err(invalid(format!("system has {} levels, asked for {n}", sys.levels.len())));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let p = sys.params.p;
    let eps = sys.params.eps;
    let gamma = sys.gamma_hat;
    let gamma_term = gamma.powf(p) / 2f64.powf(p) - 4.0 * eps;
    let analytic_bound = gamma_term.powf(1.0 / p) * (1.0 - eps).powf(1.0 / p) - eps;
    let levels = &sys.levels[..n];
    let vectors = sample_vectors(n, p, sys.k_eps, samples, seed);

    let chain = par::map_slice(&vectors, |(kind, alphas)| -> Result<ChainSample> {
        let a_norm = lorentz_norm(&sys.combine_g(alphas)?, &sys.spec)?;
        let b_norm = lorentz_norm(&sys.combine_h(alphas)?, &sys.spec)?;
        let dg = alphas.iter().zip(levels).map(|(a, l)| a.abs().powf(p) * l.g_gradient_pow).sum::<f64>().powf(1.0 / p);
        let gradient_direct = gradient_integral(&sys.combine_g(alphas)?, p)?.powf(1.0 / p);
        let sup_eps = sup_norm(alphas) * eps;
        let in_j: Vec<bool> = alphas.iter().enumerate().map(|(i, a)| above_threshold(*a, i + 1, sys.k_eps)).collect();
        let j_sum = |term: &dyn Fn(&Level) -> f64| -> f64 {
            alphas
                .iter()
                .zip(levels)
                .zip(&in_j)
                .filter(|(_, inside)| **inside)
                .map(|((a, l), _)| a.abs().powf(p) * term(l))
                .sum::<f64>()
        };
        let root = |x: f64| x.max(0.0).powf(1.0 / p);
        let a_p = lp_norm(alphas, p);
        let df = a_p;
        let q0 = a_norm / dg;
        let q1 = (b_norm - sup_eps) / dg;
        let q2 = (root(j_sum(&|l| l.h_lorentz_pow - eps)) - sup_eps) / dg;
        let q3 = (root(j_sum(&|l| l.g_lorentz_pow - 2.0 * eps)) - sup_eps) / dg;
        let q4 = (root(j_sum(&|l| l.f_lorentz_pow - 3.0 * eps)) - sup_eps) / df;
        let q5 = (root(j_sum(&|_| gamma_term)) - sup_eps) / df;
        let q6 = gamma_term.powf(1.0 / p) * (1.0 - eps).powf(1.0 / p) - sup_eps / a_p;
        Ok(ChainSample { kind: *kind, alphas: alphas.clone(), chain: [q0, q1, q2, q3, q4, q5, q6], gradient_direct })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut link_violations = [0usize; 6];
    let mut additivity_error: f64 = 0.0;
    let mut inf_quotient = f64::INFINITY;
    for c in &chain {
        for (i, v) in link_violations.iter_mut().enumerate() {
            let (hi, lo) = (c.chain[i], c.chain[i + 1]);
            if hi < lo - 1e-9 * lo.abs().max(1e-300) {
                *v += 1;
            }
        }
        let dg =
            c.alphas.iter().zip(levels).map(|(a, l)| a.abs().powf(p) * l.g_gradient_pow).sum::<f64>().powf(1.0 / p);
        additivity_error = additivity_error.max((c.gradient_direct - dg).abs() / dg);
        inf_quotient = inf_quotient.min(c.chain[0]);
    }
    if inf_quotient < analytic_bound - 1e-6 {
        return Err(Error::BoundViolation(format!(
            "sampled quotient {inf_quotient} is below the analytic bound {analytic_bound}"
        )));
    }
    Ok(BernsteinReport {
        n,
        samples: chain.len(),
        seed,
        eps,
        k_eps: sys.k_eps,
        gamma_hat: gamma,
        inf_quotient,
        analytic_bound,
        beta_lower: gamma / 2.0,
        link_violations,
        additivity_error,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_index_examples() {
        assert_eq!(tail_index(0.1).unwrap(), 4);
        assert_eq!(tail_index(0.5).unwrap(), 2);
        assert_eq!(tail_index(0.01).unwrap(), 7);
        assert!(tail_index(1.0).is_err());
        assert!(tail_index(0.0).is_err());
    }

    #[test]
    fn next_radius_bound_is_increasing() {
        let d = BallDomain::new(2, 0.1).unwrap();
        let a = next_radius_bound(&d, 1.0, 2.0, 10.0, 8, 1e-6);
        let b = next_radius_bound(&d, 1.0, 2.0, 10.0, 8, 1e-5);
        assert!(a < b);
    }
}
