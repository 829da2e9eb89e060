//! Distribution functions and rearrangements of radial profiles.
//!
//! Level sets of a piecewise-linear radial profile are finite unions of
//! annuli, so `d_f(lambda)` is evaluated exactly. The decreasing
//! rearrangement is its generalized inverse, evaluated by bracketing
//! `lambda` between consecutive knot values and bisecting inside the bracket
//! (where `d_f` is continuous and strictly decreasing).

use serde::{Deserialize, Serialize};

use crate::domain::{BallDomain, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{gl10, integrate_adaptive};

/// A right-continuous non-increasing step function on `[0, inf)`:
/// `levels[i]` on `[breakpoints[i], breakpoints[i + 1])`, zero after the
/// last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != levels.len() + 1 || breakpoints.first() != Some(&0.0) {
            return Err(invalid("step function needs breakpoints 0 = t0 < ... < tM and M levels"));
        }
        if !breakpoints.iter().all(|t| t.is_finite()) || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("step breakpoints must be finite and strictly increasing"));
        }
        if levels.iter().any(|c| c.is_nan())
            || levels.windows(2).any(|w| w[1] >= w[0])
            || levels.last().is_some_and(|&c| c < 0.0)
        {
            return Err(invalid("step levels must be strictly decreasing and non-negative"));
        }
        Ok(Self { breakpoints, levels })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.levels.first().copied().unwrap_or(0.0);
        }
        let i = self.breakpoints.partition_point(|&b| b <= t);
        if i == 0 || i > self.levels.len() {
            0.0
        } else {
            self.levels[i - 1]
        }
    }

    /// `|{t : g(t) > lambda}|`, exact.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let k = self.levels.partition_point(|&c| c > lambda);
        self.breakpoints[k]
    }

    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }
}

/// `lambda -> |{|f| > lambda}|` for a radial profile, evaluated exactly.
#[derive(Debug, Clone)]
pub struct Distribution {
    profile: RadialProfile,
    /// distinct |knot values| in ascending order, starting at 0
    levels: Vec<f64>,
}

impl Distribution {
    pub fn new(profile: RadialProfile) -> Self {
        let mut levels: Vec<f64> = profile.values.iter().map(|v| v.abs()).collect();
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        Self { profile, levels }
    }

    pub fn domain(&self) -> &BallDomain {
        &self.profile.domain
    }

    /// `|{|f| > lambda}|`.
    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda < 0.0 {
            return self.profile.domain.measure();
        }
        // the pieces are disjoint and {f > lambda}, {f < -lambda} are disjoint
        let d = self.profile.domain.dim as i32;
        let mut total = 0.0;
        for (r0, r1, v0, v1) in self.profile.pieces() {
            for (a, b) in [(v0, v1), (-v0, -v1)] {
                let (lo, hi) = match (a > lambda, b > lambda) {
                    (true, true) => (r0, r1),
                    (false, false) => continue,
                    (above_at_start, _) => {
                        let rc = r0 + (r1 - r0) * ((lambda - a) / (b - a)).clamp(0.0, 1.0);
                        if above_at_start {
                            (r0, rc)
                        } else {
                            (rc, r1)
                        }
                    }
                };
                total += hi.powi(d) - lo.powi(d);
            }
        }
        total * self.profile.domain.unit_volume()
    }

    /// `|{|f| >= lambda}|`, the left limit of [`Self::eval`] at `lambda > 0`.
    pub fn eval_inclusive(&self, lambda: f64) -> f64 {
        self.profile.set_measure(&self.profile.superlevel_set(lambda, true))
    }

    /// Levels at which `d_f` may fail to be smooth.
    pub fn breakpoints(&self) -> &[f64] {
        &self.levels
    }

    /// `(lambda, d_f(lambda))` at every breakpoint.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.levels.iter().map(|&l| (l, self.eval(l))).collect()
    }
}

/// The decreasing rearrangement `f*(t) = inf { lambda >= 0 : d_f(lambda) <= t }`.
#[derive(Debug, Clone)]
pub struct Rearrangement {
    dist: Distribution,
    /// `d_f` at each breakpoint level
    measures: Vec<f64>,
}

impl Rearrangement {
    pub fn new(dist: Distribution) -> Self {
        let measures = dist.levels.iter().map(|&l| dist.eval(l)).collect();
        Self { dist, measures }
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn domain(&self) -> &BallDomain {
        self.dist.domain()
    }

    pub fn max(&self) -> f64 {
        *self.dist.levels.last().unwrap_or(&0.0)
    }

    /// `|{|f| > 0}|`, the length of the support of `f*`.
    pub fn support_measure(&self) -> f64 {
        self.measures[0]
    }

    /// Values of `t` at which `f*` may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let levels = &self.dist.levels;
        let mut ts: Vec<f64> = self.measures.clone();
        ts.extend(levels.iter().skip(1).map(|&l| self.dist.eval_inclusive(l)));
        ts.push(0.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    pub fn eval(&self, t: f64) -> f64 {
        let levels = &self.dist.levels;
        if t >= self.measures[0] {
            return 0.0;
        }
        let t = t.max(0.0);
        // smallest i with d(L_i) <= t; d(L_0) > t so i >= 1
        let i = self.measures.partition_point(|&m| m > t);
        let (mut lo, mut hi) = (levels[i - 1], levels[i]);
        let (mut g_lo, mut g_hi) = (self.measures[i - 1] - t, self.measures[i] - t);
        // invariant: d(lo) > t >= d(hi); Illinois steps, every fourth one a bisection
        let mut last_side = 0i8;
        for step in 0..400 {
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
            let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
            if !(x > lo && x < hi) || step % 4 == 3 {
                x = 0.5 * (lo + hi);
            }
            if x <= lo || x >= hi {
                break;
            }
            let g = self.dist.eval(x) - t;
            if g > 0.0 {
                lo = x;
                g_lo = g;
                if last_side == 1 {
                    g_hi *= 0.5;
                }
                last_side = 1;
            } else {
                hi = x;
                g_hi = g;
                if last_side == -1 {
                    g_lo *= 0.5;
                }
                last_side = -1;
            }
        }
        hi
    }

    /// `f*(domain measure of B_rho)`, i.e. the symmetric rearrangement at radius `rho`.
    pub fn eval_radial(&self, rho: f64) -> f64 {
        self.eval(self.domain().ball_measure(rho))
    }

    /// Step approximation from above with at most `max_steps` uniformly spaced
    /// levels plus every knot level, so the sup error is at most
    /// `max / max_steps`.
    pub fn to_step_function(&self, max_steps: usize) -> StepFunction {
        let top = self.max();
        if top == 0.0 {
            return StepFunction { breakpoints: vec![0.0], levels: vec![] };
        }
        let n = max_steps.max(1);
        let mut grid: Vec<f64> = (0..n).map(|k| top * k as f64 / n as f64).collect();
        grid.extend(self.dist.levels.iter().copied());
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        // f* lies in (grid[k], grid[k+1]] on {d(grid[k+1]) <= t < d(grid[k])}
        let mut breakpoints = vec![0.0];
        let mut levels = Vec::new();
        for k in (0..grid.len() - 1).rev() {
            let end = self.dist.eval(grid[k]);
            if end > *breakpoints.last().unwrap() {
                breakpoints.push(end);
                levels.push(grid[k + 1]);
            }
        }
        StepFunction { breakpoints, levels }
    }
}

/// Relative value tolerance of the interpolated `f#`.
pub const REFINE_TOL: f64 = 1e-7;

pub fn distribution_function(f: &RadialProfile) -> Distribution {
    Distribution::new(f.clone())
}

pub fn decreasing_rearrangement(f: &RadialProfile) -> Rearrangement {
    Rearrangement::new(distribution_function(f))
}

/// Radius of the ball with measure `m`, clamped into the domain.
fn radius_for(domain: &BallDomain, m: f64) -> f64 {
    domain.radius_of_measure(m.clamp(0.0, domain.measure())).min(domain.radius)
}

/// `f#(x) = f*(nu_d |x|^d)` as a radial profile on the same ball.
///
/// Between consecutive knot values the inverse `lambda -> rho(lambda)` is
/// smooth but not linear (for `d >= 2` it involves `d`-th roots); it is
/// sampled adaptively until linear interpolation in `rho` is within
/// `1e-7 * max|f|`. Non-increasing and step profiles are reproduced exactly. Plateaus of `|f|` become plateaus of `f#`; gaps
/// in the range of `|f|` become jumps.
pub fn symmetric_decreasing_rearrangement(f: &RadialProfile) -> RadialProfile {
    let domain = f.domain.clone();
    let re = decreasing_rearrangement(f);
    let top = re.max();
    if top == 0.0 {
        return RadialProfile::constant(domain, 0.0);
    }
    let tol = REFINE_TOL * top;
    let levels = &re.dist.levels;
    let rho = |lambda: f64| radius_for(&domain, re.dist.eval(lambda));
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let push = |knots: &mut Vec<(f64, f64)>, r: f64, v: f64| {
        let r = knots.last().map_or(r, |&(lr, _)| r.max(lr));
        if knots.last() != Some(&(r, v)) {
            knots.push((r, v));
        }
    };
    for i in (0..levels.len()).rev() {
        let li = levels[i];
        // plateau of f# at level li
        push(&mut knots, rho(li), li);
        push(&mut knots, radius_for(&domain, re.dist.eval_inclusive(li)), li);
        if i == 0 {
            break;
        }
        let lo = levels[i - 1];
        let start = knots.last().unwrap().0;
        let end = rho(lo);
        let mut interior = Vec::new();
        refine(&rho, (start, li), (end, lo), tol, 0, &mut interior);
        for (r, v) in interior {
            push(&mut knots, r, v);
        }
        push(&mut knots, end, lo);
    }
    // |f| > 0 a.e. leaves f# positive up to the boundary: no jump at r = a
    if let Some(first_at_edge) = knots.iter().position(|&(r, _)| r >= domain.radius) {
        knots.truncate(first_at_edge + 1);
    }
    let (mut radii, mut values): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
    if *radii.last().unwrap() < domain.radius {
        radii.push(domain.radius);
        values.push(0.0);
    } else {
        *radii.last_mut().unwrap() = domain.radius;
    }
    dedupe_triples(&mut radii, &mut values);
    RadialProfile::new(domain, radii, values).expect("rearranged knots are ordered")
}

/// Pushes interior points of the curve from `a` to `b` (as `(rho, lambda)`,
/// lambda descending) until linear interpolation is within `tol`.
fn refine(rho: &impl Fn(f64) -> f64, a: (f64, f64), b: (f64, f64), tol: f64, depth: usize, out: &mut Vec<(f64, f64)>) {
    if depth >= 48 || b.0 - a.0 <= 0.0 {
        return;
    }
    let probes = [0.25, 0.5, 0.75].map(|s| {
        let lam = a.1 + (b.1 - a.1) * s;
        (rho(lam), lam)
    });
    let interp = |r: f64| a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0);
    let worst = probes.iter().map(|&(r, lam)| (interp(r) - lam).abs()).fold(0.0, f64::max);
    if worst <= tol {
        return;
    }
    let mid = probes[1];
    refine(rho, a, mid, tol, depth + 1, out);
    out.push(mid);
    refine(rho, mid, b, tol, depth + 1, out);
}

/// Profiles allow at most two knots at one radius; collapse longer runs to
/// their first and last knot.
fn dedupe_triples(radii: &mut Vec<f64>, values: &mut Vec<f64>) {
    let mut r_out = Vec::with_capacity(radii.len());
    let mut v_out = Vec::with_capacity(values.len());
    let mut i = 0;
    while i < radii.len() {
        let mut j = i;
        while j + 1 < radii.len() && radii[j + 1] == radii[i] {
            j += 1;
        }
        r_out.push(radii[i]);
        v_out.push(values[i]);
        if j > i {
            r_out.push(radii[j]);
            v_out.push(values[j]);
        }
        i = j + 1;
    }
    *radii = r_out;
    *values = v_out;
}

/// `[alpha^{s(.)}]*` for a non-negative radial `s`, in the form
/// `t -> alpha^{s*(t)}` on `[0, |domain|)`.
#[derive(Debug, Clone)]
pub struct ExponentRearrangement {
    pub alpha: f64,
    inner: Rearrangement,
}

impl ExponentRearrangement {
    pub fn eval(&self, t: f64) -> f64 {
        if t >= self.inner.domain().measure() {
            0.0
        } else {
            self.alpha.powf(self.inner.eval(t))
        }
    }

    /// `[alpha^s]*(t)` computed from the distribution of `alpha^s` directly:
    /// `|{alpha^s > mu}|` is `|{s > log_alpha mu}|` for `mu >= 1` and the whole
    /// domain below 1.
    pub fn eval_direct(&self, t: f64) -> f64 {
        let measure = self.inner.domain().measure();
        if t >= measure {
            return 0.0;
        }
        let dist = |mu: f64| {
            if mu < 1.0 {
                measure
            } else {
                self.inner.dist.eval(mu.ln() / self.alpha.ln())
            }
        };
        let (mut lo, mut hi) = (1.0, self.alpha.powf(self.inner.max()));
        if dist(lo) <= t {
            return 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if dist(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn rearrangement(&self) -> &Rearrangement {
        &self.inner
    }
}

/// Rearranges `alpha^{s(.)}`, checking `[alpha^s]* = alpha^{s*}` at every
/// breakpoint of `s*` and on a uniform grid of 64 interior points.
pub fn exponent_rearrangement(s: &RadialProfile, alpha: f64) -> Result<ExponentRearrangement> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(invalid(format!("base {alpha} must exceed 1")));
    }
    if !s.is_nonnegative() {
        return Err(invalid("exponent profile must be non-negative"));
    }
    let out = ExponentRearrangement { alpha, inner: decreasing_rearrangement(s) };
    let measure = s.domain.measure();
    let mut ts = out.inner.breakpoints();
    ts.extend((0..64).map(|k| measure * (k as f64 + 0.5) / 64.0));
    for t in ts.into_iter().filter(|&t| t < measure) {
        let (a, b) = (out.eval(t), out.eval_direct(t));
        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
            return Err(Error::IdentityViolation(format!("at t = {t}: {a} vs {b}")));
        }
    }
    Ok(out)
}

/// `(integral f g dx, integral_0^inf f*(y) g*(y) dy)` for non-negative `f`, `g`
/// on a common ball.
pub fn hardy_littlewood_check(f: &RadialProfile, g: &RadialProfile) -> Result<(f64, f64)> {
    if !f.is_nonnegative() || !g.is_nonnegative() {
        return Err(invalid("Hardy-Littlewood check needs non-negative profiles"));
    }
    if f.domain.dim != g.domain.dim || (f.radius() - g.radius()).abs() > 1e-12 * f.radius() {
        return Err(invalid("profiles live on different balls"));
    }
    let domain = &f.domain;
    let d = domain.dim as i32;
    let shell = domain.shell_factor();
    let mut cuts: Vec<f64> = f.radii.iter().chain(&g.radii).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut lhs = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // both factors are linear inside (a, b); use one-sided limits at the ends
        let (fa, fb, ga, gb) = (f.eval(a), f.eval_left(b), g.eval(a), g.eval_left(b));
        lhs += gl10().integrate(a, b, |r| {
            let s = (r - a) / (b - a);
            (fa + (fb - fa) * s) * (ga + (gb - ga) * s) * r.powi(d - 1)
        });
    }
    lhs *= shell;

    let (fs, gs) = (decreasing_rearrangement(f), decreasing_rearrangement(g));
    let mut tcuts = fs.breakpoints();
    tcuts.extend(gs.breakpoints());
    let mut rcuts: Vec<f64> = tcuts.into_iter().map(|t| radius_for(domain, t)).collect();
    rcuts.push(0.0);
    rcuts.push(domain.radius);
    rcuts.sort_by(f64::total_cmp);
    rcuts.dedup();
    let mut rhs = 0.0;
    for w in rcuts.windows(2) {
        let integrand = |r: f64| {
            let t = domain.ball_measure(r);
            fs.eval(t) * gs.eval(t) * r.powi(d - 1)
        };
        rhs += integrate_adaptive(integrand, w[0], w[1], 0.0, 1e-13, 200).value;
    }
    Ok((lhs, rhs * shell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn two_level() -> RadialProfile {
        // |A| = 0.1 where f = 2, |B| = 0.2 where f = 1, on a ball of measure 0.5
        let dom = BallDomain::with_measure(2, 0.5).unwrap();
        let ra = dom.radius_of_measure(0.1);
        let rb = dom.radius_of_measure(0.3);
        let a = dom.radius;
        RadialProfile::new(dom, vec![0.0, ra, ra, rb, rb, a], vec![2.0, 2.0, 1.0, 1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let d = distribution_function(&two_level());
        assert_relative_eq!(d.eval(0.5), 0.3, max_relative = 1e-12);
        assert_relative_eq!(d.eval(1.5), 0.1, max_relative = 1e-12);
        assert_eq!(d.eval(2.5), 0.0);
        let zero = RadialProfile::constant(BallDomain::new(2, 1.0).unwrap(), 0.0);
        assert_eq!(distribution_function(&zero).eval(0.0), 0.0);
        let tent = RadialProfile::tent(BallDomain::new(2, 1.0).unwrap());
        assert_relative_eq!(distribution_function(&tent).eval(0.5), PI / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn rearrangement_of_two_levels() {
        let fs = decreasing_rearrangement(&two_level());
        assert_eq!(fs.eval(0.0), 2.0);
        assert_eq!(fs.eval(0.099), 2.0);
        assert_eq!(fs.eval(0.1 + 1e-9), 1.0);
        assert_eq!(fs.eval(0.2999), 1.0);
        assert_eq!(fs.eval(0.3 + 1e-9), 0.0);
        let step = fs.to_step_function(4);
        assert_relative_eq!(step.measure_above(1.5), 0.1, max_relative = 1e-12);
        assert_relative_eq!(step.support_end(), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn rearrangement_of_radial_decreasing_profile() {
        let dom = BallDomain::new(3, 1.3).unwrap();
        let f = RadialProfile::new(dom.clone(), vec![0.0, 0.4, 0.9, 1.3], vec![5.0, 3.0, 2.5, 0.0]).unwrap();
        let fs = decreasing_rearrangement(&f);
        for k in 1..100 {
            let r = 1.3 * k as f64 / 100.0;
            assert_relative_eq!(fs.eval(dom.ball_measure(r)), f.eval(r), max_relative = 1e-12, epsilon = 1e-13);
        }
        let sharp = symmetric_decreasing_rearrangement(&f);
        for (r, v) in f.radii.iter().zip(&f.values) {
            assert_relative_eq!(sharp.eval(*r), *v, epsilon = 1e-9);
        }
    }

    #[test]
    fn annulus_indicator_rearranges_to_ball() {
        let dom = BallDomain::new(2, 1.0).unwrap();
        let f = RadialProfile::annulus_indicator(dom.clone(), 0.5, 0.8, 3.0).unwrap();
        let sharp = symmetric_decreasing_rearrangement(&f);
        let rho = dom.radius_of_measure(dom.annulus_measure(0.5, 0.8));
        assert_eq!(sharp.eval(0.0), 3.0);
        assert_eq!(sharp.eval(rho * (1.0 - 1e-9)), 3.0);
        assert_eq!(sharp.eval(rho * (1.0 + 1e-9)), 0.0);
        let fs = decreasing_rearrangement(&f);
        assert_eq!(fs.eval(dom.annulus_measure(0.5, 0.8) * 0.999), 3.0);
    }

    #[test]
    fn exponent_identity_on_constant() {
        let dom = BallDomain::new(2, 0.7).unwrap();
        let s = RadialProfile::constant(dom.clone(), 1.5);
        let e = exponent_rearrangement(&s, 2.0).unwrap();
        assert_relative_eq!(e.eval(0.3), 2f64.powf(1.5), max_relative = 1e-14);
        assert_eq!(e.eval(dom.measure()), 0.0);
        assert!(exponent_rearrangement(&s, 1.0).is_err());
    }

    #[test]
    fn hardy_littlewood_examples() {
        let dom = BallDomain::new(2, 1.0).unwrap();
        let f = RadialProfile::tent(dom.clone());
        let one = RadialProfile::constant(dom.clone(), 1.0);
        let (l, r) = hardy_littlewood_check(&f, &one).unwrap();
        assert_relative_eq!(l, PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r, PI / 3.0, max_relative = 1e-10);
        let a = RadialProfile::annulus_indicator(dom.clone(), 0.0, 0.3, 1.0).unwrap();
        let b = RadialProfile::annulus_indicator(dom.clone(), 0.5, 0.9, 1.0).unwrap();
        let (l, r) = hardy_littlewood_check(&a, &b).unwrap();
        assert_eq!(l, 0.0);
        assert_relative_eq!(r, dom.ball_measure(0.3), max_relative = 1e-10);
        assert!(hardy_littlewood_check(&f.scaled(-1.0), &one).is_err());
    }
}
