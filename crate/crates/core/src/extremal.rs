//! The localized Sobolev-Lorentz quotient `||f||_{L^{q(.),p}} / ||grad f||_p`
//! over profiles supported in `B_r`, and its numerical maximization.
//!
//! The search runs over non-increasing radial profiles on a uniform knot
//! grid (symmetrization does not decrease the numerator and does not
//! increase the denominator). Knot values are encoded as non-negative
//! decrements with the boundary value pinned to 0.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::compactness::WitnessParams;
use crate::domain::{sobolev_seminorm_radial, w0_seminorm, BallDomain, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::nelder_mead::{self, Settings};
use crate::norms::{lorentz_norm, DecreasingLorentzTable, NormSpec};
use crate::par;

/// `||f||_{L^{q(.),p}} / ||grad f||_{L^p}` for `f` vanishing on the boundary,
/// with `p` the second Lorentz index.
pub fn quotient(f: &RadialProfile, spec: &NormSpec) -> Result<f64> {
    let grad = w0_seminorm(f, spec.second_index)?;
    if grad == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(lorentz_norm(f, spec)? / grad)
}

/// `delta / (p^{1/p} ||grad phi||_{L^p(B_1)})` with the bump witness's `delta`.
pub fn analytic_floor(witness: &WitnessParams) -> Result<f64> {
    let unit = BallDomain::new(witness.dim, 1.0)?;
    let grad = sobolev_seminorm_radial(&RadialProfile::scaled_bump(unit, 1.0, witness.p)?, witness.p)?;
    let delta = witness.delta_factor * witness.threshold()?;
    Ok(delta / (witness.p.powf(1.0 / witness.p) * grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Knots on `[0, r]`, including both ends.
    pub knots: usize,
    pub restarts: usize,
    /// Total quotient evaluations over all restarts.
    pub budget: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { knots: 17, restarts: 8, budget: 5000, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub r: f64,
    pub gamma_hat: f64,
    pub argmax_profile: RadialProfile,
    pub floor: Option<f64>,
    pub evaluations: usize,
    /// Best surrogate quotient reached by each restart.
    pub restart_values: Vec<f64>,
    pub converged: bool,
}

/// Fixed-grid surrogate of the quotient for non-increasing profiles.
struct Objective {
    table: DecreasingLorentzTable,
    p: f64,
}

impl Objective {
    fn values(decrements: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; decrements.len() + 1];
        for i in (0..decrements.len()).rev() {
            v[i] = v[i + 1] + decrements[i].max(0.0);
        }
        v
    }

    fn quotient(&self, decrements: &[f64]) -> f64 {
        let v = Self::values(decrements);
        let grad = self.table.gradient_pow(&v);
        if grad <= 0.0 {
            return 0.0;
        }
        (self.table.lorentz_pow(&v) / grad).powf(1.0 / self.p)
    }
}

fn seeds(k: usize) -> Vec<Vec<f64>> {
    let n = k - 1;
    let grid: Vec<f64> = (0..k).map(|j| j as f64 / n as f64).collect();
    let from_values = |v: Vec<f64>| -> Vec<f64> { v.windows(2).map(|w| w[0] - w[1]).collect() };
    // plateau-tent rescaled to B_r: 1 on [0, r/2], linear to 0 at r
    let bump = from_values(grid.iter().map(|&s| (2.0 * (1.0 - s)).min(1.0)).collect());
    let mut out = vec![bump];
    for beta in [0.5, 1.0, 2.0] {
        out.push(from_values(grid.iter().map(|&s| (1.0 - s).powf(beta)).collect()));
    }
    out
}

/// Maximizes the quotient over non-increasing profiles supported in `B_r`.
///
/// Restart `k` starts from seed `k mod 4` (bump, then `(1 - rho/r)^beta` for
/// beta = 0.5, 1, 2); restarts from the fifth on perturb their seed with
/// log-normal noise drawn from a generator keyed by `(seed, k)`. The winning
/// profile is re-evaluated with the exact level-set quadrature.
pub fn maximize_gamma_r(
    r: f64,
    dim: usize,
    spec: &NormSpec,
    options: &OptimizerOptions,
    floor: Option<f64>,
) -> Result<GammaEstimate> {
    if options.knots < 3 || options.restarts == 0 {
        return Err(invalid("optimizer needs at least 3 knots and one restart"));
    }
    let domain = BallDomain::new(dim, r)?;
    let radii: Vec<f64> = (0..options.knots).map(|j| r * j as f64 / (options.knots - 1) as f64).collect();
    let objective =
        Objective { table: DecreasingLorentzTable::new(&domain, radii.clone(), spec)?, p: spec.second_index };
    let base = seeds(options.knots);
    let per_restart = options.budget / options.restarts;
    let extra = options.budget % options.restarts;

    let runs = par::map_indexed(options.restarts, |k| {
        let mut x0 = base[k % base.len()].clone();
        if k >= base.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k as u64);
            let noise = Normal::new(0.0f64, 0.3).expect("valid normal");
            for x in &mut x0 {
                *x = (*x + 1e-3) * noise.sample(&mut rng).exp();
            }
        }
        let scale = x0.iter().cloned().fold(0.0, f64::max);
        let budget = per_restart + usize::from(k < extra);
        if budget == 0 {
            let v = objective.quotient(&x0);
            return (x0, v, 0, false);
        }
        let m = nelder_mead::minimize(
            |x| -objective.quotient(x),
            &x0,
            Settings { max_evaluations: budget, f_tol: 1e-12, step: 0.25 * scale },
        );
        (m.x, -m.value, m.evaluations, m.converged)
    });

    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.1 > runs[best].1 {
            best = k;
        }
    }
    let (x, _, _, converged) = &runs[best];
    let values = Objective::values(x);
    let top = values[0];
    let normalized: Vec<f64> = values.iter().map(|v| v / top).collect();
    let argmax_profile = RadialProfile::new(domain, radii, normalized)?;
    let gamma_hat = quotient(&argmax_profile, spec)?;
    if let Some(fl) = floor {
        if gamma_hat < fl - 1e-9 {
            return Err(Error::BoundViolation(format!(
                "quotient {gamma_hat} at radius {r} is below the analytic floor {fl}"
            )));
        }
    }
    Ok(GammaEstimate {
        r,
        gamma_hat,
        argmax_profile,
        floor,
        evaluations: runs.iter().map(|run| run.2).sum(),
        restart_values: runs.iter().map(|run| run.1).collect(),
        converged: options.budget > 0 && *converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTrace {
    pub estimates: Vec<GammaEstimate>,
    /// Estimate at the smallest radius.
    pub gamma: f64,
    /// Infimum of the per-radius estimates.
    pub running_inf: f64,
}

/// Runs [`maximize_gamma_r`] at each radius (decreasing).
pub fn gamma_limit(
    radii: &[f64],
    dim: usize,
    spec: &NormSpec,
    options: &OptimizerOptions,
    floor: Option<f64>,
) -> Result<GammaTrace> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("radii must be a non-empty decreasing sequence"));
    }
    let estimates =
        radii.iter().map(|&r| maximize_gamma_r(r, dim, spec, options, floor)).collect::<Result<Vec<_>>>()?;
    let gamma = estimates.last().map(|e| e.gamma_hat).unwrap_or(f64::NAN);
    let running_inf = estimates.iter().map(|e| e.gamma_hat).fold(f64::INFINITY, f64::min);
    Ok(GammaTrace { estimates, gamma, running_inf })
}
