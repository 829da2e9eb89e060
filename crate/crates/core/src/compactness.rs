//! Compactness classification of the embedding of `W0^{1,p}` into the
//! variable Lorentz space `L^{q(.),p}` for the log-singular exponent family.
//!
//! The compact side rests on the integrability of `alpha^{s*(t)}`, where
//! `s = 1 / (p* - q)`; the non-compact side on a concentrating bump family
//! whose Lorentz norms stay bounded below.

use serde::{Deserialize, Serialize};

use crate::domain::{lp_norm_radial, sobolev_seminorm_radial, BallDomain, ExponentField, LogSingular, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::norms::{holder_conjugate_field, indicator_norm, lorentz_norm_pow, modular, NormSpec};
use crate::par;
use crate::quadrature::{gl10, integrate_adaptive};

/// The field `s(r) = 1 / (p* - q(r))`, infinite where `q = p*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReciprocal {
    pub q: ExponentField,
    pub p_star: f64,
}

impl GapReciprocal {
    pub fn value(&self, r: f64) -> f64 {
        let gap = match &self.q {
            // the unclamped formula: s depends only on (C, ell, eta)
            ExponentField::LogSingular(ls) if ls.p_star() == self.p_star => ls.gap(r),
            q => self.p_star - q.value(r),
        };
        if gap <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / gap
        }
    }

    /// Piecewise-linear interpolant of `s` on `n` log-spaced radii in
    /// `[r_min, a]` (plus the freeze radius), constant on `[0, r_min]`.
    pub fn sampled_profile(&self, domain: &BallDomain, r_min: f64, n: usize) -> Result<RadialProfile> {
        let a = domain.radius;
        if !(r_min > 0.0 && r_min < a) || n < 2 {
            return Err(invalid("sampling needs 0 < r_min < radius and n >= 2"));
        }
        let ratio = (a / r_min).ln() / (n - 1) as f64;
        let mut radii: Vec<f64> = (0..n).map(|k| r_min * (ratio * k as f64).exp()).collect();
        if let Some(k) = self.q.kink().filter(|&k| k > r_min && k < a) {
            radii.push(k);
        }
        radii.push(0.0);
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        *radii.last_mut().unwrap() = a;
        let values = radii.iter().map(|&r| self.value(r.max(r_min))).collect();
        RadialProfile::new(domain.clone(), radii, values)
    }
}

/// `s = 1 / (p* - q)` for a field with `q <= p*`.
pub fn s_field(q: &ExponentField, p_star: f64) -> Result<GapReciprocal> {
    let probe = (0..=600).map(|k| 10f64.powf(-(k as f64) * 0.5)).chain(q.kink());
    for r in probe {
        if q.value(r) > p_star * (1.0 + 1e-14) {
            return Err(Error::InvalidExponent(format!("q exceeds p* = {p_star} at radius {r}")));
        }
    }
    Ok(GapReciprocal { q: q.clone(), p_star })
}

/// The decreasing rearrangement of `s` for the log-singular family on a ball
/// centered at the singular point:
/// `(1/(C d^ell)) ln(nu_d / t)^ell` below `nu_d eta^d`, then the frozen value
/// `(1/C) ln(1/eta)^ell` up to `|domain|`, then 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SStar {
    pub c: f64,
    pub dim: usize,
    pub ell: f64,
    pub eta: f64,
    pub unit_volume: f64,
    pub measure: f64,
}

impl SStar {
    fn new_unchecked(params: &LogSingular, domain: &BallDomain) -> Result<Self> {
        params.validate()?;
        if domain.dim != params.dim {
            return Err(invalid("domain and exponent dimensions differ"));
        }
        if domain.radius >= 1.0 {
            return Err(invalid("log-singular family needs a domain radius below 1"));
        }
        Ok(Self {
            c: params.c,
            dim: params.dim,
            ell: params.ell,
            eta: params.eta,
            unit_volume: domain.unit_volume(),
            measure: domain.measure(),
        })
    }

    /// Measure where the log branch ends: `min(nu_d eta^d, |domain|)`.
    pub fn knee(&self) -> f64 {
        (self.unit_volume * self.eta.powi(self.dim as i32)).min(self.measure)
    }

    pub fn frozen_value(&self) -> f64 {
        (-self.eta.ln()).powf(self.ell) / self.c
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= self.measure {
            0.0
        } else if t <= 0.0 {
            f64::INFINITY
        } else {
            self.eval_log_t(t.ln())
        }
    }

    /// `s*(e^{ln_t})` for `e^{ln_t} < |domain|`; usable far below the
    /// smallest positive double.
    pub fn eval_log_t(&self, ln_t: f64) -> f64 {
        if ln_t >= self.knee().ln() {
            return self.frozen_value();
        }
        let y = self.unit_volume.ln() - ln_t;
        y.powf(self.ell) / (self.c * (self.dim as f64).powf(self.ell))
    }
}

pub fn closed_form_s_star(params: &LogSingular, domain: &BallDomain) -> Result<SStar> {
    if params.ell >= 1.0 {
        return Err(Error::InvalidExponent("closed-form s* is defined for ell < 1".into()));
    }
    SStar::new_unchecked(params, domain)
}

/// Both evaluations of `integral_0^{|domain|} alpha^{s*(t)} dt`, with the
/// tail certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitenessIntegral {
    pub alpha: f64,
    /// Direct dyadic quadrature in `t`; may be `inf` when it exceeds f64 range.
    pub value: f64,
    pub log_value: f64,
    /// Quadrature of the substituted form in `y = ln(nu_d / t)`.
    pub log_value_substituted: f64,
    /// Upper bound on the truncated tail relative to the value.
    pub tail_relative: f64,
    /// Rate in `c y^ell - y <= -omega y` for `y >= y0`.
    pub omega: f64,
    pub y0: f64,
    pub tail_inequality_holds: bool,
    pub dyadic_cells: usize,
    pub converged: bool,
}

/// Exponent of the substituted integrand `h(y) = c y^ell - y` and its
/// derivative, with `c = ln(alpha) / (C d^ell)`.
#[derive(Debug, Clone, Copy)]
struct SubstitutedExponent {
    c: f64,
    ell: f64,
}

impl SubstitutedExponent {
    fn h(&self, y: f64) -> f64 {
        self.c * y.powf(self.ell) - y
    }

    fn dh(&self, y: f64) -> f64 {
        self.c * self.ell * y.powf(self.ell - 1.0) - 1.0
    }

    /// `ln` of an upper bound for `integral_y^inf e^h`, from concavity of `h`
    /// (tangent-line bound); infinite while `h` is still increasing.
    fn log_tail(&self, y: f64) -> f64 {
        let slope = self.dh(y);
        if slope >= 0.0 {
            f64::INFINITY
        } else {
            self.h(y) - (-slope).ln()
        }
    }

    /// Maximizer of `h` over `[lo, inf)`.
    fn peak(&self, lo: f64) -> f64 {
        if self.ell >= 1.0 {
            return lo;
        }
        let y = (self.c * self.ell).powf(1.0 / (1.0 - self.ell));
        y.max(lo)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

const MAX_DYADIC_CELLS: usize = 20_000_000;
const TAIL_TOL: f64 = 1e-8;
const ROUTE_TOL: f64 = 1e-4;

/// `integral_0^{|domain|} alpha^{s*(t)} dt` for the log-singular family,
/// evaluated in log space. Divergence (only possible for `ell = 1`) is
/// reported as `converged = false` with an infinite value.
pub fn finiteness_integral(alpha: f64, params: &LogSingular, domain: &BallDomain) -> Result<FinitenessIntegral> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(invalid(format!("base {alpha} must exceed 1")));
    }
    let s = SStar::new_unchecked(params, domain)?;
    let d = s.dim as f64;
    let ln_alpha = alpha.ln();
    let g = SubstitutedExponent { c: ln_alpha / (s.c * d.powf(s.ell)), ell: s.ell };
    let ln_nu = s.unit_volume.ln();
    let knee = s.knee();
    let y_start = ln_nu - knee.ln();
    // constant piece on [knee, |domain|)
    let flat = s.measure - knee;
    let log_flat = if flat > 0.0 { ln_alpha * s.frozen_value() + flat.ln() } else { f64::NEG_INFINITY };

    let (omega, y0, tail_inequality_holds) = tail_certificate(&g, y_start);

    if s.ell >= 1.0 && g.c >= 1.0 {
        return Ok(FinitenessIntegral {
            alpha,
            value: f64::INFINITY,
            log_value: f64::INFINITY,
            log_value_substituted: f64::INFINITY,
            tail_relative: f64::INFINITY,
            omega,
            y0,
            tail_inequality_holds,
            dyadic_cells: 0,
            converged: false,
        });
    }

    // Route 1: dyadic cells [t_k / 2, t_k] in t, t_k = knee 2^-k, each with a
    // 10-point Gauss rule in t written as t = t_k u, u in [1/2, 1].
    let rule = gl10();
    let ln_knee = knee.ln();
    let mut log_direct = f64::NEG_INFINITY;
    let mut cells = 0usize;
    let mut tail_direct = f64::INFINITY;
    loop {
        let ln_tk = ln_knee - cells as f64 * std::f64::consts::LN_2;
        let mut terms = Vec::with_capacity(10);
        rule.for_each_node(0.5, 1.0, |u, w| {
            let ln_t = ln_tk + u.ln();
            terms.push(w.ln() + ln_tk + ln_alpha * s.eval_log_t(ln_t));
        });
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cell = m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        log_direct = log_add(log_direct, cell);
        cells += 1;
        // remaining piece is [0, knee 2^-cells]: y beyond ln(nu) - that
        let y_rest = ln_nu - (ln_knee - cells as f64 * std::f64::consts::LN_2);
        if cells >= 60 {
            tail_direct = (ln_nu + g.log_tail(y_rest) - log_direct).exp();
            if tail_direct < TAIL_TOL * 1e-2 {
                break;
            }
        }
        if cells >= MAX_DYADIC_CELLS {
            break;
        }
    }
    let log_value = log_add(log_direct, log_flat);

    // Route 2: nu * integral_{y_start}^inf e^{h(y)} dy, adaptively, scaled by
    // the peak value of h.
    let peak = g.peak(y_start);
    let h_ref = g.h(peak);
    let mut y_end = peak + 1.0;
    let mut width = 1.0;
    while g.log_tail(y_end) > h_ref - 60.0 {
        width *= 2.0;
        y_end = peak + width;
    }
    let integrand = |y: f64| (g.h(y) - h_ref).exp();
    let mut scaled = 0.0;
    for (a, b) in [(y_start, peak), (peak, y_end)] {
        if b > a {
            scaled += integrate_adaptive(integrand, a, b, 0.0, 1e-12, 4000).value;
        }
    }
    let log_sub_core = ln_nu + h_ref + scaled.ln();
    let tail_sub = (ln_nu + g.log_tail(y_end) - log_sub_core).exp();
    let log_value_substituted = log_add(log_sub_core, log_flat);

    let tail_relative = tail_direct.max(tail_sub);
    let agree = (log_value - log_value_substituted).abs() <= ROUTE_TOL;
    Ok(FinitenessIntegral {
        alpha,
        value: log_value.exp(),
        log_value,
        log_value_substituted,
        tail_relative,
        omega,
        y0,
        tail_inequality_holds,
        dyadic_cells: cells,
        converged: agree && tail_relative < TAIL_TOL && log_value.is_finite(),
    })
}

/// Exhibits `omega = 1/2` and `y0` with `c y^ell - y <= -omega y` for
/// `y >= y0` and checks the inequality on a geometric grid.
fn tail_certificate(g: &SubstitutedExponent, y_start: f64) -> (f64, f64, bool) {
    let omega = 0.5;
    let y0 = if g.ell < 1.0 { ((g.c / (1.0 - omega)).powf(1.0 / (1.0 - g.ell))).max(y_start) } else { y_start };
    let holds = (0..=200).all(|k| {
        let y = y0 * 10f64.powf(k as f64 * 0.05);
        g.h(y) <= -omega * y * (1.0 - 1e-12)
    });
    (omega, y0, holds)
}

/// Luxemburg norms of `chi_{B_r}` in the field `p* q / (p* - q)` for each
/// radius in `radii` (which must be positive and decreasing).
pub fn indicator_decay_diagnostic(
    domain: &BallDomain,
    q: &ExponentField,
    p_star: f64,
    radii: &[f64],
) -> Result<Vec<f64>> {
    if radii.iter().any(|&r| !(r > 0.0 && r <= domain.radius)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("radii must be positive, inside the domain, and decreasing"));
    }
    let m = holder_conjugate_field(&ExponentField::constant(p_star)?, q)?;
    par::map_slice(radii, |&r| indicator_norm(domain, &[(0.0, r)], &m)).into_iter().collect()
}

/// Parameters of the concentrating bump family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub p: f64,
    pub dim: usize,
    pub c0: f64,
    pub eta0: f64,
    /// `delta = delta_factor * e^{-C0 (d-p)/p} nu_d / 2^d`; below 1 for a
    /// valid witness.
    pub delta_factor: f64,
    pub domain_radius: f64,
}

impl WitnessParams {
    pub fn new(p: f64, dim: usize, c0: f64, eta0: f64) -> Self {
        Self { p, dim, c0, eta0, delta_factor: 0.5, domain_radius: 0.5 }
    }

    pub fn exponent(&self) -> Result<LogSingular> {
        LogSingular::new(self.p, self.dim, self.c0, 1.0, self.eta0)
    }

    pub fn domain(&self) -> Result<BallDomain> {
        BallDomain::new(self.dim, self.domain_radius)
    }

    /// `e^{-C0 (d-p)/p} nu_d / 2^d`.
    pub fn threshold(&self) -> Result<f64> {
        let d = self.dim as f64;
        Ok((-self.c0 * (d - self.p) / self.p).exp() * crate::domain::unit_ball_volume(self.dim)?
            / 2f64.powi(self.dim as i32))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpEntry {
    pub n: u64,
    /// Modular of the plateau indicator divided by `delta n^{-(d-p)/p}`.
    pub modular: f64,
    /// Luxemburg norm of the plateau indicator.
    pub indicator_norm: f64,
    /// `delta n^{-(d-p)/p}`.
    pub indicator_lower: f64,
    /// `||phi_n||^p` in `L^{q(.),p}`.
    pub lorentz_pow: f64,
    pub gradient_norm: f64,
    pub lp_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpWitness {
    pub delta: f64,
    pub threshold: f64,
    /// `delta / p^{1/p}`, the claimed uniform lower bound for `||phi_n||`.
    pub lorentz_lower: f64,
    pub entries: Vec<BumpEntry>,
    pub holds: bool,
}

/// Evaluates the bump family `phi_n(x) = n^{(d-p)/p} phi(n x)` (plateau-tent
/// `phi`) and checks modular > 1, the Luxemburg lower bound and the Lorentz
/// lower bound `delta^p / p` for every `n`.
pub fn bump_noncompactness_witness(params: &WitnessParams, n_list: &[u64]) -> Result<BumpWitness> {
    let ls = params.exponent()?;
    let domain = params.domain()?;
    if domain.radius >= 1.0 {
        return Err(invalid("bump witness needs a domain radius below 1"));
    }
    if n_list.iter().any(|&n| (n as f64) * domain.radius < 1.0) {
        return Err(invalid("every n must place supp phi_n inside the domain"));
    }
    let q = ExponentField::LogSingular(ls);
    let spec = NormSpec::new(q.clone(), params.p)?;
    let (p, d) = (params.p, params.dim as f64);
    let threshold = params.threshold()?;
    let delta = params.delta_factor * threshold;
    let entries: Vec<BumpEntry> = par::map_slice(n_list, |&n| -> Result<BumpEntry> {
        let nf = n as f64;
        let height = nf.powf((d - p) / p);
        let plateau = 0.5 / nf;
        let lower = delta / height;
        let scaled = RadialProfile::annulus_indicator(domain.clone(), 0.0, plateau, 1.0 / lower)?;
        let chi = RadialProfile::annulus_indicator(domain.clone(), 0.0, plateau, 1.0)?;
        let phi = RadialProfile::scaled_bump(domain.clone(), nf, p)?;
        Ok(BumpEntry {
            n,
            modular: modular(&scaled, &q)?,
            indicator_norm: crate::norms::luxemburg_norm(&chi, &q)?,
            indicator_lower: lower,
            lorentz_pow: lorentz_norm_pow(&phi, &spec)?,
            gradient_norm: sobolev_seminorm_radial(&phi, p)?,
            lp_norm: lp_norm_radial(&phi, p)?,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let bound = delta.powf(p) / p;
    let holds = entries
        .iter()
        .all(|e| e.modular > 1.0 && e.indicator_norm >= e.indicator_lower && e.lorentz_pow >= bound * (1.0 - 1e-12));
    Ok(BumpWitness { delta, threshold, lorentz_lower: delta / p.powf(1.0 / p), entries, holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Compact,
    NonCompact,
    Inconclusive,
}

/// What [`classify`] evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub p: f64,
    pub dim: usize,
    pub c: f64,
    pub ell: f64,
    pub eta: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<u64>,
    #[serde(default = "default_delta_factor")]
    pub delta_factor: f64,
    #[serde(default = "default_domain_radius")]
    pub domain_radius: f64,
    /// Radii `2^-k` for `k = 1..=decay_levels` in the indicator diagnostic.
    #[serde(default = "default_decay_levels")]
    pub decay_levels: u32,
}

fn default_alphas() -> Vec<f64> {
    vec![2.0, 10.0, 1e2, 1e4, 1e8]
}
fn default_n_list() -> Vec<u64> {
    (1..=10).map(|k| 1u64 << k).collect()
}
fn default_delta_factor() -> f64 {
    0.5
}
fn default_domain_radius() -> f64 {
    0.5
}
fn default_decay_levels() -> u32 {
    20
}

impl ClassifyParams {
    pub fn new(p: f64, dim: usize, c: f64, ell: f64, eta: f64) -> Self {
        Self {
            p,
            dim,
            c,
            ell,
            eta,
            alphas: default_alphas(),
            n_list: default_n_list(),
            delta_factor: default_delta_factor(),
            domain_radius: default_domain_radius(),
            decay_levels: default_decay_levels(),
        }
    }

    pub fn exponent(&self) -> Result<LogSingular> {
        LogSingular::new(self.p, self.dim, self.c, self.ell, self.eta)
    }

    pub fn domain(&self) -> Result<BallDomain> {
        BallDomain::new(self.dim, self.domain_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub finiteness: Vec<FinitenessIntegral>,
    pub decay_radii: Vec<f64>,
    pub indicator_decay: Vec<f64>,
    pub bump: Option<BumpWitness>,
    /// `q(r) >= p* - C / ln(1/r)` on a grid of radii below `eta`.
    pub pointwise_lower_bound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessVerdict {
    pub verdict: Verdict,
    pub params: ClassifyParams,
    pub evidence: Evidence,
}

/// Compact when `ell < 1` and every finiteness integral converges;
/// non-compact when `ell = 1` and the bump witness holds; inconclusive
/// otherwise.
pub fn classify(params: &ClassifyParams) -> Result<CompactnessVerdict> {
    let ls = params.exponent()?;
    let domain = params.domain()?;
    let q = ExponentField::LogSingular(ls);
    let decay_radii: Vec<f64> =
        (1..=params.decay_levels).map(|k| 0.5f64.powi(k as i32)).filter(|&r| r <= domain.radius).collect();
    let indicator_decay = indicator_decay_diagnostic(&domain, &q, ls.p_star(), &decay_radii)?;
    let mut evidence =
        Evidence { finiteness: Vec::new(), decay_radii, indicator_decay, bump: None, pointwise_lower_bound: None };
    let verdict = if params.ell < 1.0 {
        evidence.finiteness = par::map_slice(&params.alphas, |&a| finiteness_integral(a, &ls, &domain))
            .into_iter()
            .collect::<Result<_>>()?;
        if !evidence.finiteness.is_empty() && evidence.finiteness.iter().all(|f| f.converged) {
            Verdict::Compact
        } else {
            Verdict::Inconclusive
        }
    } else {
        let lower_ok = (1..=400).all(|k| {
            let r = params.eta * 0.9f64.powi(k);
            q.value(r) >= ls.p_star() - params.c / (-r.ln()) - 1e-12
        });
        evidence.pointwise_lower_bound = Some(lower_ok);
        let witness = WitnessParams {
            p: params.p,
            dim: params.dim,
            c0: params.c,
            eta0: params.eta,
            delta_factor: params.delta_factor,
            domain_radius: params.domain_radius,
        };
        let bump = bump_noncompactness_witness(&witness, &params.n_list)?;
        let ok = bump.holds && lower_ok;
        evidence.bump = Some(bump);
        if ok {
            Verdict::NonCompact
        } else {
            Verdict::Inconclusive
        }
    };
    Ok(CompactnessVerdict { verdict, params: params.clone(), evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn family(ell: f64) -> LogSingular {
        LogSingular::new(1.0, 2, 1.0, ell, 0.1).unwrap()
    }

    #[test]
    fn s_field_examples() {
        let q = ExponentField::constant(2.0 - 1.0 / 3.0).unwrap();
        assert_relative_eq!(s_field(&q, 2.0).unwrap().value(0.2), 3.0, max_relative = 1e-14);
        let s = s_field(&ExponentField::LogSingular(family(0.5)), 2.0).unwrap();
        assert_relative_eq!(s.value((-4f64).exp()), 2.0, max_relative = 1e-14);
        assert!(s.value(1e-10) > s.value(1e-5));
        assert!(s_field(&ExponentField::constant(3.0).unwrap(), 2.0).is_err());
    }

    #[test]
    fn closed_form_example() {
        let dom = BallDomain::new(2, 0.5).unwrap();
        let s = closed_form_s_star(&family(0.5), &dom).unwrap();
        let expect = (std::f64::consts::PI / 0.01).ln().sqrt() / 2f64.sqrt();
        assert_relative_eq!(s.eval(0.01), expect, max_relative = 1e-14);
        assert_relative_eq!(expect, 1.6955, max_relative = 1e-4);
        assert_eq!(s.eval(dom.measure()), 0.0);
        assert_relative_eq!(s.eval(0.1), (10f64).ln().sqrt(), max_relative = 1e-14);
        assert!(closed_form_s_star(&family(1.0), &dom).is_err());
    }

    #[test]
    fn finiteness_examples() {
        let dom = BallDomain::new(2, 0.5).unwrap();
        for alpha in [2.0, 10.0, 100.0] {
            let f = finiteness_integral(alpha, &family(0.5), &dom).unwrap();
            assert!(f.converged, "{f:?}");
        }
        let f = finiteness_integral(1.0 + 1e-12, &family(0.5), &dom).unwrap();
        assert_relative_eq!(f.value, dom.measure(), max_relative = 1e-9);
        let div = finiteness_integral((4.0f64).exp(), &family(1.0), &dom).unwrap();
        assert!(!div.converged);
    }

    #[test]
    fn witness_threshold() {
        let w = WitnessParams::new(1.0, 2, 1.0, 0.1);
        assert_relative_eq!(w.threshold().unwrap(), (-1f64).exp() * std::f64::consts::PI / 4.0, max_relative = 1e-14);
        assert_relative_eq!(0.5 * w.threshold().unwrap(), 0.14446, max_relative = 1e-4);
    }
}
