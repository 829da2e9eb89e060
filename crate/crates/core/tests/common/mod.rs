//! Generators and brute-force oracles shared by the integration tests.
//! Nothing here calls the library's rearrangement or norm code.

#![allow(dead_code)]

use rand::Rng;
use varlorentz::{BallDomain, RadialProfile};

/// Unit-ball volumes for the dimensions the tests use.
pub fn nu(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => panic!("no tabulated volume for d = {d}"),
    }
}

pub fn shell_measure(d: usize, lo: f64, hi: f64) -> f64 {
    nu(d) * (hi.powi(d as i32) - lo.powi(d as i32))
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_knots: usize,
    pub signed: bool,
    pub jumps: bool,
    /// Pin the boundary value to 0 (continuous at the boundary).
    pub vanish: bool,
}

/// A random piecewise-linear profile with between 2 and `max_knots` knots.
pub fn random_profile<R: Rng>(rng: &mut R, dim: usize, radius: f64, shape: Shape) -> RadialProfile {
    let domain = BallDomain::new(dim, radius).unwrap();
    loop {
        let k = rng.random_range(2..=shape.max_knots.max(2));
        let mut radii: Vec<f64> = (0..k.saturating_sub(2)).map(|_| radius * rng.random::<f64>()).collect();
        radii.sort_by(f64::total_cmp);
        if shape.jumps {
            let mut with_jumps = Vec::with_capacity(radii.len() * 2);
            for r in radii {
                with_jumps.push(r);
                if rng.random::<f64>() < 0.25 && with_jumps.len() + 2 < shape.max_knots {
                    with_jumps.push(r);
                }
            }
            radii = with_jumps;
        }
        radii.insert(0, 0.0);
        radii.push(radius);
        let lo = if shape.signed { -1.0 } else { 0.0 };
        let mut values: Vec<f64> = radii.iter().map(|_| rng.random_range(lo..=1.0)).collect();
        if shape.vanish {
            *values.last_mut().unwrap() = 0.0;
        }
        if values.iter().all(|v| v.abs() < 1e-3) {
            continue;
        }
        if let Ok(f) = RadialProfile::new(domain.clone(), radii, values) {
            return f;
        }
    }
}

/// Knot pieces `(r0, r1, v0, v1)` with `r0 < r1`, read straight off the knots.
pub fn pieces(f: &RadialProfile) -> Vec<(f64, f64, f64, f64)> {
    (0..f.radii.len() - 1)
        .filter(|&i| f.radii[i + 1] > f.radii[i])
        .map(|i| (f.radii[i], f.radii[i + 1], f.values[i], f.values[i + 1]))
        .collect()
}

/// `|{ |f| > lambda }|`, exact for piecewise-linear `f`.
pub fn measure_above(f: &RadialProfile, lambda: f64) -> f64 {
    let d = f.domain.dim;
    let mut total = 0.0;
    for (r0, r1, v0, v1) in pieces(f) {
        for sign in [1.0, -1.0] {
            let (a, b) = (sign * v0, sign * v1);
            let (s_lo, s_hi) = if a > lambda && b > lambda {
                (0.0, 1.0)
            } else if a <= lambda && b <= lambda {
                continue;
            } else {
                let s = ((lambda - a) / (b - a)).clamp(0.0, 1.0);
                if a > lambda {
                    (0.0, s)
                } else {
                    (s, 1.0)
                }
            };
            total += shell_measure(d, r0 + (r1 - r0) * s_lo, r0 + (r1 - r0) * s_hi);
        }
    }
    total
}

/// `f*(t) = inf { lambda : |{|f| > lambda}| <= t }` by bisection on the
/// exact distribution.
pub fn rearranged_value(f: &RadialProfile, t: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, f.sup_abs());
    if measure_above(f, 0.0) <= t {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if measure_above(f, mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Range of `|f|` over the closed radial interval `[lo, hi]`.
pub fn abs_range(f: &RadialProfile, lo: f64, hi: f64) -> (f64, f64) {
    let mut vals = vec![f.eval(lo), f.eval_left(hi)];
    if lo == 0.0 {
        vals.push(f.values[0]);
    }
    for (i, &r) in f.radii.iter().enumerate() {
        if r > lo && r < hi {
            vals.push(f.values[i]);
        }
    }
    let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let crosses = vals.iter().any(|&v| v <= 0.0) && vals.iter().any(|&v| v >= 0.0);
    let min = if crosses { 0.0 } else { vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())) };
    (min, max)
}

/// Sort-based rearrangement on `n` equal-measure cells: for each cell the
/// sorted midpoint, minimum and maximum of `|f|`. The sorted minima and
/// maxima bracket `f*` on the corresponding `t`-cell.
pub struct SortOracle {
    pub cell: f64,
    pub mid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn sort_oracle(f: &RadialProfile, n: usize) -> SortOracle {
    let d = f.domain.dim;
    let total = nu(d) * f.radius().powi(d as i32);
    let cell = total / n as f64;
    let radius_of = |m: f64| (m / nu(d)).powf(1.0 / d as f64).min(f.radius());
    let mut mid = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (radius_of(i as f64 * cell), radius_of((i + 1) as f64 * cell));
        let (lo, hi) = abs_range(f, a, b);
        mid.push(f.eval(radius_of((i as f64 + 0.5) * cell)).abs());
        lower.push(lo);
        upper.push(hi);
    }
    for v in [&mut mid, &mut lower, &mut upper] {
        v.sort_by(|x, y| y.total_cmp(x));
    }
    SortOracle { cell, mid, lower, upper }
}

/// Nodes and weights of the 5-point Gauss-Legendre rule on [0, 1].
const GL5: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

/// Composite 5-point Gauss on `cells` equal cells of `[a, b]`, with the
/// smoothstep substitution applied twice to flatten endpoint singularities.
pub fn dense_integral(a: f64, b: f64, cells: usize, f: impl Fn(f64) -> f64) -> f64 {
    let smooth = |u: f64| (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u));
    let mut total = 0.0;
    for c in 0..cells {
        for (x, w) in GL5 {
            let u = (c as f64 + x) / cells as f64;
            let (v, dv) = smooth(u);
            let (s, ds) = smooth(v);
            total += w * f(a + (b - a) * s) * ds * dv;
        }
    }
    total * (b - a) / cells as f64
}

/// `(integral |f|^q dx)^{1/q}` by dense quadrature on each piece.
pub fn lq_norm_dense(f: &RadialProfile, q: f64) -> f64 {
    let d = f.domain.dim;
    let mut total = 0.0;
    for (r0, r1, v0, v1) in pieces(f) {
        let mut cuts = vec![r0, r1];
        if v0 * v1 < 0.0 {
            cuts.insert(1, r0 + (r1 - r0) * v0 / (v0 - v1));
        }
        for w in cuts.windows(2) {
            total += dense_integral(w[0], w[1], 200, |r| {
                let v = v0 + (v1 - v0) * (r - r0) / (r1 - r0);
                v.abs().powf(q) * r.powi(d as i32 - 1)
            });
        }
    }
    (total * d as f64 * nu(d)).powf(1.0 / q)
}

/// `integral_0^max lambda^{p-1} |{|f| > lambda}|^{p/q} dlambda` for constant `q`,
/// split at the distinct knot levels.
pub fn lorentz_pow_dense(f: &RadialProfile, q: f64, p: f64) -> f64 {
    let mut levels: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
        .windows(2)
        .map(|w| dense_integral(w[0], w[1], 400, |l| l.powf(p - 1.0) * measure_above(f, l).powf(p / q)))
        .sum()
}
