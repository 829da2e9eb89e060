//! One-dimensional quadrature: Gauss-Legendre rules, an adaptive
//! Gauss-Kronrod (7, 15) integrator, and geometric mesh grading toward
//! endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>() * half
    }

    /// Maps the rule onto [a, b], calling `emit(node, weight)` per node.
    pub fn for_each_node<F: FnMut(f64, f64)>(&self, a: f64, b: f64, mut emit: F) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            emit(mid + half * x, w * half);
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 10-point rule used on graded cells.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Shared 20-point rule.
pub fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Gauss-Kronrod 15 panel: (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK15 integration of `f` over [a, b]: bisects the panel
/// with the largest error estimate until the total error falls below
/// `max(abs_tol, rel_tol * |I|)` or `max_panels` is reached.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, panels: 0 };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut panels = 1;
    while err > abs_tol.max(rel_tol * total.abs()) && panels < max_panels {
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        panels += 1;
    }
    // re-sum to shed accumulated cancellation
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    QuadResult { value, error, panels }
}

/// Splits [lo, hi] into cells graded geometrically (ratio 2) toward the
/// endpoints flagged in `toward_lo` / `toward_hi`. Grading stops once a
/// cell is shorter than `min_rel * (hi - lo)`; the remaining piece is kept
/// as one final cell so the cells always cover [lo, hi] exactly.
pub fn graded_cells(lo: f64, hi: f64, toward_lo: bool, toward_hi: bool, min_rel: f64) -> Vec<(f64, f64)> {
    if hi <= lo {
        return Vec::new();
    }
    let len = hi - lo;
    let floor = (min_rel * len).max(f64::MIN_POSITIVE);
    let mut pts = vec![lo, hi];
    match (toward_lo, toward_hi) {
        (false, false) => {}
        (true, false) => {
            let mut d = len / 2.0;
            while d > floor {
                pts.push(lo + d);
                d /= 2.0;
            }
        }
        (false, true) => {
            let mut d = len / 2.0;
            while d > floor {
                pts.push(hi - d);
                d /= 2.0;
            }
        }
        (true, true) => {
            pts.push(lo + len / 2.0);
            let mut d = len / 4.0;
            while d > floor {
                pts.push(lo + d);
                pts.push(hi - d);
                d /= 2.0;
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

/// Geometric cells for [lo, hi] where the only singular point is the origin
/// (lo may be zero). Cells shrink by halves from `hi` toward `lo` or, when
/// lo == 0, down to `hi * min_rel`.
pub fn geometric_toward_origin(lo: f64, hi: f64, min_rel: f64) -> Vec<(f64, f64)> {
    if hi <= lo {
        return Vec::new();
    }
    let mut pts = vec![hi];
    let stop = lo.max(hi * min_rel);
    let mut x = hi / 2.0;
    while x > stop {
        pts.push(x);
        x /= 2.0;
    }
    pts.push(lo);
    pts.reverse();
    pts.dedup();
    pts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        // degree 19 is the exactness limit
        let v = rule.integrate(0.0, 2.0, |x| x.powi(19));
        assert_relative_eq!(v, 2f64.powi(20) / 20.0, max_relative = 1e-13);
        let wsum: f64 = rule.weights.iter().sum();
        assert_relative_eq!(wsum, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_adaptive(|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-10, 1e-12, 2000);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn adaptive_smooth() {
        let r = integrate_adaptive(f64::sin, 0.0, std::f64::consts::PI, 1e-13, 0.0, 500);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn graded_cells_cover_interval() {
        let cells = graded_cells(1.0, 3.0, true, true, 1e-6);
        assert_eq!(cells.first().unwrap().0, 1.0);
        assert_eq!(cells.last().unwrap().1, 3.0);
        for w in cells.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let g = geometric_toward_origin(0.0, 1.0, 1e-9);
        assert_eq!(g[0].0, 0.0);
        assert!(g[0].1 < 1e-8);
    }
}
