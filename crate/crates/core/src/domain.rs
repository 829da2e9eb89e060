//! Balls in R^d, radial piecewise-linear profiles on them, and the
//! variable exponent fields the norms are taken with.
//!
//! Every function in the toolkit is radial about the ball's center, so a
//! profile is a list of `(radius, value)` knots with linear interpolation.
//! Two knots may share a radius; that encodes a jump (needed for
//! indicators and plateau cut-offs).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{graded_cells, integrate_adaptive};

/// Volume of the unit ball in R^d, `pi^(d/2) / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let pi = std::f64::consts::PI;
    let k = d / 2;
    let gamma = if d.is_multiple_of(2) {
        // Gamma(k + 1) = k!
        (1..=k).map(|i| i as f64).product::<f64>()
    } else {
        // Gamma(k + 3/2) = (2k+2)! sqrt(pi) / (4^(k+1) (k+1)!)
        let m = k + 1;
        let num: f64 = (1..=2 * m).map(|i| i as f64).product();
        let den: f64 = 4f64.powi(m as i32) * (1..=m).map(|i| i as f64).product::<f64>();
        num / den * pi.sqrt()
    };
    Ok(pi.powf(d as f64 / 2.0) / gamma)
}

/// An open ball `B_a(x0)` in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    pub dim: usize,
    pub radius: f64,
    pub center: Vec<f64>,
}

impl BallDomain {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        Self::with_center(dim, radius, vec![0.0; dim])
    }

    pub fn with_center(dim: usize, radius: f64, center: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("dimension {dim} < 2")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius {radius} must be positive")));
        }
        if center.len() != dim {
            return Err(invalid("center has wrong dimension"));
        }
        Ok(Self { dim, radius, center })
    }

    /// Ball with radius chosen so that its measure equals `measure`.
    pub fn with_measure(dim: usize, measure: f64) -> Result<Self> {
        let nu = unit_ball_volume(dim)?;
        Self::new(dim, (measure / nu).powf(1.0 / dim as f64))
    }

    pub fn unit_volume(&self) -> f64 {
        unit_ball_volume(self.dim).expect("dim >= 2")
    }

    pub fn measure(&self) -> f64 {
        self.ball_measure(self.radius)
    }

    /// Measure of the concentric ball of radius `r`.
    pub fn ball_measure(&self, r: f64) -> f64 {
        self.unit_volume() * r.powi(self.dim as i32)
    }

    /// Measure of the annulus `lo <= |x| < hi`.
    pub fn annulus_measure(&self, lo: f64, hi: f64) -> f64 {
        let d = self.dim as i32;
        self.unit_volume() * (hi.powi(d) - lo.powi(d))
    }

    /// Radius of the concentric ball with the given measure.
    pub fn radius_of_measure(&self, m: f64) -> f64 {
        (m.max(0.0) / self.unit_volume()).powf(1.0 / self.dim as f64)
    }

    /// Surface factor `d * nu_d`, so that `dx = d nu_d r^(d-1) dr`.
    pub fn shell_factor(&self) -> f64 {
        self.dim as f64 * self.unit_volume()
    }
}

/// Parameters of `q(r) = p* - C / |log(1/r)|^ell` near the singular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSingular {
    pub p: f64,
    pub dim: usize,
    pub c: f64,
    pub ell: f64,
    pub eta: f64,
}

impl LogSingular {
    pub fn new(p: f64, dim: usize, c: f64, ell: f64, eta: f64) -> Result<Self> {
        let me = Self { p, dim, c, ell, eta };
        me.validate()?;
        Ok(me)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim as f64;
        if self.dim < 2 || !(1.0 <= self.p && self.p < d) {
            return Err(Error::InvalidExponent(format!("need 1 <= p < d, got p={} d={}", self.p, self.dim)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidExponent(format!("C must be positive, got {}", self.c)));
        }
        if !(self.ell > 0.0 && self.ell <= 1.0) {
            return Err(Error::InvalidExponent(format!("ell must lie in (0, 1], got {}", self.ell)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidExponent(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        Ok(())
    }

    /// Sobolev conjugate `dp / (d - p)`.
    pub fn p_star(&self) -> f64 {
        let d = self.dim as f64;
        d * self.p / (d - self.p)
    }

    /// The unclamped gap `p* - q(r) = C / |log(1/r)|^ell` for `r <= eta`,
    /// frozen at its `eta` value beyond.
    pub fn gap(&self, r: f64) -> f64 {
        let r = r.min(self.eta);
        if r <= 0.0 {
            return 0.0;
        }
        self.c / (-r.ln()).powf(self.ell)
    }

    pub fn value(&self, r: f64) -> f64 {
        let ps = self.p_star();
        (ps - self.gap(r)).clamp(1.0, ps)
    }

    /// True when the formula dips below 1 somewhere and clamping is active.
    pub fn is_clamped(&self) -> bool {
        self.p_star() - self.gap(self.eta) < 1.0
    }
}

/// A variable exponent `q(.)` as a function of the distance to the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentField {
    Constant {
        q: f64,
    },
    LogSingular(LogSingular),
    /// `outer * inner / (outer - inner)`, infinite where the two coincide.
    Conjugate {
        outer: Box<ExponentField>,
        inner: Box<ExponentField>,
    },
}

impl ExponentField {
    pub fn constant(q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidExponent(format!("constant exponent {q} must be in [1, inf)")));
        }
        Ok(Self::Constant { q })
    }

    pub fn log_singular(p: f64, dim: usize, c: f64, ell: f64, eta: f64) -> Result<Self> {
        Ok(Self::LogSingular(LogSingular::new(p, dim, c, ell, eta)?))
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::Constant { q } => *q,
            Self::LogSingular(ls) => ls.value(r),
            Self::Conjugate { outer, inner } => {
                let (a, b) = (outer.value(r), inner.value(r));
                if a <= b {
                    f64::INFINITY
                } else {
                    a * b / (a - b)
                }
            }
        }
    }

    /// Essential supremum over the domain.
    pub fn sup(&self) -> f64 {
        match self {
            Self::Constant { q } => *q,
            Self::LogSingular(ls) => ls.p_star(),
            Self::Conjugate { .. } => f64::INFINITY,
        }
    }

    /// Infimum over radii in (0, a].
    pub fn inf_on(&self, a: f64) -> f64 {
        match self {
            Self::Constant { q } => *q,
            Self::LogSingular(ls) => ls.value(a.max(ls.eta)),
            Self::Conjugate { .. } => {
                // conjugate fields are only built from radially monotone parts
                sample_radii(a).map(|r| self.value(r)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Self::Constant { q } => Some(*q),
            _ => None,
        }
    }

    /// Radius where the field has a kink (the freeze radius of the
    /// log-singular family).
    pub fn kink(&self) -> Option<f64> {
        match self {
            Self::Constant { .. } => None,
            Self::LogSingular(ls) => Some(ls.eta),
            Self::Conjugate { outer, inner } => inner.kink().or_else(|| outer.kink()),
        }
    }

    /// True when the field is non-increasing in the radius.
    pub fn is_radially_decreasing(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::LogSingular(_) => true,
            Self::Conjugate { .. } => {
                let rs: Vec<f64> = sample_radii(1.0).collect();
                rs.windows(2).all(|w| self.value(w[1]) >= self.value(w[0]))
            }
        }
    }
}

/// Log-spaced radii from 1e-300 * a up to a, descending.
fn sample_radii(a: f64) -> impl Iterator<Item = f64> {
    (0..=600).map(move |k| a * 10f64.powf(-(k as f64) * 0.5))
}

/// A radial function on a ball, piecewise linear in the radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub domain: BallDomain,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    /// Knots must start at radius 0, end at the domain radius, be
    /// non-decreasing, and repeat a radius at most twice.
    pub fn new(domain: BallDomain, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::InvalidProfile("need at least two knots and matching lengths".into()));
        }
        if radii[0] != 0.0 {
            return Err(Error::InvalidProfile(format!("first knot must be at 0, got {}", radii[0])));
        }
        let a = domain.radius;
        let last = *radii.last().unwrap();
        if (last - a).abs() > 1e-12 * a {
            return Err(Error::InvalidProfile(format!("last knot {last} must equal domain radius {a}")));
        }
        if values.iter().any(|v| !v.is_finite()) || radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidProfile("non-finite knot".into()));
        }
        for w in radii.windows(3) {
            if w[0] == w[1] && w[1] == w[2] {
                return Err(Error::InvalidProfile(format!("radius {} repeated three times", w[0])));
            }
        }
        if radii.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile("knot radii must be non-decreasing".into()));
        }
        let mut radii = radii;
        *radii.last_mut().unwrap() = a;
        Ok(Self { domain, radii, values })
    }

    /// Builds a profile from knots that may stop short of the domain radius;
    /// the profile is extended by zero (with a jump if the last value is not 0).
    pub fn supported(domain: BallDomain, mut radii: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        let a = domain.radius;
        if let (Some(&r), Some(&v)) = (radii.last(), values.last()) {
            if r > a * (1.0 + 1e-12) {
                return Err(Error::InvalidProfile(format!("knot {r} beyond domain radius {a}")));
            }
            if r < a * (1.0 - 1e-12) {
                if v != 0.0 {
                    radii.push(r);
                    values.push(0.0);
                }
                radii.push(a);
                values.push(0.0);
            }
        }
        Self::new(domain, radii, values)
    }

    pub fn constant(domain: BallDomain, c: f64) -> Self {
        let a = domain.radius;
        Self { domain, radii: vec![0.0, a], values: vec![c, c] }
    }

    /// `c` on the annulus `lo <= r < hi`, zero elsewhere.
    pub fn annulus_indicator(domain: BallDomain, lo: f64, hi: f64, c: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= domain.radius) {
            return Err(invalid(format!("annulus [{lo}, {hi}) not inside the domain")));
        }
        let mut r = Vec::new();
        let mut v = Vec::new();
        if lo > 0.0 {
            r.extend([0.0, lo]);
            v.extend([0.0, 0.0]);
        }
        r.extend([lo, hi]);
        v.extend([c, c]);
        Self::supported(domain, r, v)
    }

    /// `1 - r / a` on the ball.
    pub fn tent(domain: BallDomain) -> Self {
        let a = domain.radius;
        Self { domain, radii: vec![0.0, a], values: vec![1.0, 0.0] }
    }

    /// The plateau-tent bump: 1 on `[0, 1/2]`, linear down to 0 at 1,
    /// scaled by `n^((d-p)/p)` and compressed to support radius `1/n`.
    pub fn scaled_bump(domain: BallDomain, n: f64, p: f64) -> Result<Self> {
        let d = domain.dim as f64;
        let h = n.powf((d - p) / p);
        Self::supported(domain, vec![0.0, 0.5 / n, 1.0 / n], vec![h, h, 0.0])
    }

    pub fn radius(&self) -> f64 {
        self.domain.radius
    }

    /// Linear pieces `(r0, r1, v0, v1)` with `r0 < r1`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.radii.len() - 1)
            .filter(|&i| self.radii[i + 1] > self.radii[i])
            .map(|i| (self.radii[i], self.radii[i + 1], self.values[i], self.values[i + 1]))
    }

    fn locate(&self, r: f64) -> usize {
        // last index i with radii[i] <= r
        self.radii.partition_point(|&x| x <= r).saturating_sub(1)
    }

    /// Value at radius `r`; right-continuous at jumps, zero outside `[0, a]`.
    pub fn eval(&self, r: f64) -> f64 {
        if !(0.0..=self.radius()).contains(&r) {
            return 0.0;
        }
        let i = self.locate(r);
        if i + 1 >= self.radii.len() {
            return *self.values.last().unwrap();
        }
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if r1 == r0 {
            return v1;
        }
        let t = (r - r0) / (r1 - r0);
        v0 + (v1 - v0) * t
    }

    /// Left limit at `r` (the value itself at r = 0).
    pub fn eval_left(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.values[0];
        }
        if r > self.radius() {
            return 0.0;
        }
        let i = self.radii.partition_point(|&x| x < r);
        // radii[i] >= r > radii[i-1]
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let t = (r - r0) / (r1 - r0);
        v0 + (v1 - v0) * t
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Non-increasing in the radius (the "decreasing" flag).
    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn jumps(&self) -> impl Iterator<Item = f64> + '_ {
        self.radii
            .windows(2)
            .zip(self.values.windows(2))
            .filter(|(r, v)| r[0] == r[1] && v[0] != v[1])
            .map(|(r, _)| r[0])
    }

    pub fn boundary_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            domain: self.domain.clone(),
            radii: self.radii.clone(),
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }

    /// `r -> f(lambda * r)` on the ball of radius `a / lambda`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        let domain = BallDomain::with_center(self.domain.dim, self.radius() / lambda, self.domain.center.clone())?;
        let radii = self.radii.iter().map(|r| r / lambda).collect();
        Self::new(domain, radii, self.values.clone())
    }

    /// Re-homes the profile on a larger concentric ball, extending by zero.
    pub fn extended_to(&self, domain: BallDomain) -> Result<Self> {
        if domain.radius < self.radius() * (1.0 - 1e-12) {
            return Err(invalid("target domain is smaller than the profile's"));
        }
        if (domain.radius - self.radius()).abs() <= 1e-12 * domain.radius {
            return Self::new(domain, self.radii.clone(), self.values.clone());
        }
        Self::supported(domain, self.radii.clone(), self.values.clone())
    }

    /// `sum_k c_k f_k` on `domain`, exact on the union of all knots.
    pub fn linear_combination(domain: BallDomain, terms: &[(f64, &RadialProfile)]) -> Result<Self> {
        let mut knots: Vec<f64> = terms.iter().flat_map(|(_, f)| f.radii.iter().copied()).collect();
        knots.push(0.0);
        knots.push(domain.radius);
        knots.retain(|&r| r <= domain.radius);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut radii = Vec::with_capacity(2 * knots.len());
        let mut values = Vec::with_capacity(2 * knots.len());
        for &r in &knots {
            let left: f64 = terms.iter().map(|(c, f)| c * f.eval_left(r)).sum();
            let right: f64 = terms
                .iter()
                .map(|(c, f)| {
                    if r < f.radius() {
                        c * f.eval(r)
                    } else if r == f.radius() {
                        c * f.boundary_value()
                    } else {
                        0.0
                    }
                })
                .sum();
            radii.push(r);
            values.push(left);
            if right != left && r < domain.radius {
                radii.push(r);
                values.push(right);
            }
        }
        Self::new(domain, radii, values)
    }

    /// `f * chi_{B_w}`.
    pub fn truncated_outside(&self, w: f64) -> Result<Self> {
        let w = w.min(self.radius());
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (i, &r) in self.radii.iter().enumerate() {
            if r < w {
                radii.push(r);
                values.push(self.values[i]);
            }
        }
        radii.push(w);
        values.push(self.eval_left(w));
        Self::supported(self.domain.clone(), radii, values)
    }

    /// `(1 - chi_{B_t}) f`.
    pub fn with_hole(&self, t: f64) -> Result<Self> {
        if t <= 0.0 {
            return Ok(self.clone());
        }
        let mut radii = vec![0.0, t, t];
        let mut values = vec![0.0, 0.0, self.eval(t)];
        for (i, &r) in self.radii.iter().enumerate() {
            if r > t {
                radii.push(r);
                values.push(self.values[i]);
            }
        }
        Self::new(self.domain.clone(), radii, values)
    }

    /// Flattens the profile to its value at `s` inside `B_s`.
    pub fn flattened_inside(&self, s: f64) -> Result<Self> {
        let h = self.eval(s);
        let mut radii = vec![0.0, s];
        let mut values = vec![h, h];
        for (i, &r) in self.radii.iter().enumerate() {
            if r > s {
                radii.push(r);
                values.push(self.values[i]);
            }
        }
        Self::new(self.domain.clone(), radii, values)
    }

    /// Radial intervals where `|f| > lambda` (for `lambda >= 0`), merged and
    /// sorted. With `inclusive`, the set `|f| >= lambda` is returned instead.
    pub fn superlevel_set(&self, lambda: f64, inclusive: bool) -> Vec<(f64, f64)> {
        let above = |v: f64| if inclusive { v >= lambda } else { v > lambda };
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut push = |lo: f64, hi: f64| {
            if hi <= lo {
                return;
            }
            if let Some(last) = out.last_mut() {
                if lo <= last.1 {
                    last.1 = last.1.max(hi);
                    return;
                }
            }
            out.push((lo, hi));
        };
        for (r0, r1, v0, v1) in self.pieces() {
            let mut local: [(f64, f64); 2] = [(0.0, 0.0); 2];
            for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
                let (a, b) = (sign * v0, sign * v1);
                local[slot] = match (above(a), above(b)) {
                    (true, true) => (r0, r1),
                    (false, false) => (0.0, 0.0),
                    (ina, _) => {
                        let t = ((lambda - a) / (b - a)).clamp(0.0, 1.0);
                        let rc = r0 + (r1 - r0) * t;
                        if ina {
                            (r0, rc)
                        } else {
                            (rc, r1)
                        }
                    }
                };
            }
            if local[1].0 < local[0].0 {
                local.swap(0, 1);
            }
            for (lo, hi) in local {
                push(lo, hi);
            }
        }
        out
    }

    /// Lebesgue measure of a set of radial intervals on this profile's domain.
    pub fn set_measure(&self, set: &[(f64, f64)]) -> f64 {
        set.iter().map(|&(lo, hi)| self.domain.annulus_measure(lo, hi)).sum()
    }
}

/// `(integral over the ball of |f|^p)^(1/p)` by adaptive quadrature on each
/// knot interval.
pub fn lp_norm_radial(f: &RadialProfile, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("p = {p} must be in [1, inf)")));
    }
    Ok(lp_integral(f, p).powf(1.0 / p))
}

/// `integral |f|^p dx` without the final root.
pub(crate) fn lp_integral(f: &RadialProfile, p: f64) -> f64 {
    let d = f.domain.dim as i32;
    let mut total = 0.0;
    for (r0, r1, v0, v1) in f.pieces() {
        // split at a sign change so the integrand is smooth inside each part
        let mut parts = vec![(r0, r1)];
        if v0 * v1 < 0.0 {
            let rc = r0 + (r1 - r0) * v0 / (v0 - v1);
            parts = vec![(r0, rc), (rc, r1)];
        }
        let slope = (v1 - v0) / (r1 - r0);
        for (a, b) in parts {
            let va = v0 + slope * (a - r0);
            let vb = v0 + slope * (b - r0);
            if va == 0.0 && vb == 0.0 {
                continue;
            }
            let integrand = |r: f64| (v0 + slope * (r - r0)).abs().powf(p) * r.powi(d - 1);
            let smooth = p.fract() == 0.0 || (va != 0.0 && vb != 0.0);
            let cells = if smooth { vec![(a, b)] } else { graded_cells(a, b, va == 0.0, vb == 0.0, 1e-14) };
            for (c0, c1) in cells {
                total += integrate_adaptive(integrand, c0, c1, 0.0, 1e-14, 200).value;
            }
        }
    }
    total * f.domain.shell_factor()
}

/// `(integral |grad f|^p dx)^(1/p)`, exact: the radial slope is constant on
/// each knot interval. Jumps are rejected.
pub fn sobolev_seminorm_radial(f: &RadialProfile, p: f64) -> Result<f64> {
    Ok(gradient_integral(f, p)?.powf(1.0 / p))
}

/// Seminorm of an element of W0^(1,p): additionally requires `f(a) = 0`.
pub fn w0_seminorm(f: &RadialProfile, p: f64) -> Result<f64> {
    let b = f.boundary_value();
    if b != 0.0 {
        return Err(Error::NonzeroBoundary(b));
    }
    sobolev_seminorm_radial(f, p)
}

/// `integral |grad f|^p dx`.
pub fn gradient_integral(f: &RadialProfile, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("p = {p} must be in [1, inf)")));
    }
    if let Some(r) = f.jumps().next() {
        return Err(Error::JumpDiscontinuity(r));
    }
    let d = f.domain.dim as i32;
    let sum: f64 = f
        .pieces()
        .map(|(r0, r1, v0, v1)| {
            let slope = ((v1 - v0) / (r1 - r0)).abs();
            if slope == 0.0 {
                0.0
            } else {
                slope.powf(p) * (r1.powi(d) - r0.powi(d)) / d as f64
            }
        })
        .sum();
    Ok(sum * f.domain.shell_factor())
}
