//! Derivative-free simplex minimization (Nelder-Mead with the standard
//! reflection, expansion, contraction and shrink coefficients).

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// True when the simplex collapsed below the tolerance before the budget
    /// ran out.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub max_evaluations: usize,
    /// Stop once `max f - min f` over the simplex is below
    /// `f_tol * (|min f| + f_tol)`.
    pub f_tol: f64,
    /// Initial edge length along each coordinate.
    pub step: f64,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], settings: Settings) -> Minimum {
    let n = x0.len();
    let budget = settings.max_evaluations;
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if budget == 0 || n == 0 {
        return Minimum { x: x0.to_vec(), value: f64::NAN, evaluations: 0, converged: false };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += settings.step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    if simplex.len() < n + 1 {
        let best = best_of(&simplex);
        return Minimum { x: best.0.clone(), value: best.1, evaluations: evals, converged: false };
    }

    let mut converged = false;
    while evals < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[n].1);
        if (hi - lo).abs() <= settings.f_tol * (lo.abs() + settings.f_tol) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            if evals >= budget {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if evals >= budget {
                break;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(REFLECT * CONTRACT);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if evals >= budget {
                        break;
                    }
                    let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, xi)| b + SHRINK * (xi - b)).collect();
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
    }
    let best = best_of(&simplex);
    Minimum { x: best.0.clone(), value: best.1, evaluations: evals, converged }
}

/// Lowest value, ties to the earliest vertex.
fn best_of(simplex: &[(Vec<f64>, f64)]) -> &(Vec<f64>, f64) {
    let mut best = &simplex[0];
    for entry in &simplex[1..] {
        if entry.1 < best.1 {
            best = entry;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(rosen, &[-1.2, 1.0], Settings { max_evaluations: 5000, f_tol: 1e-14, step: 0.5 });
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{m:?}");
    }

    #[test]
    fn respects_budget() {
        let m = minimize(
            |x: &[f64]| x.iter().map(|v| v * v).sum(),
            &[1.0; 5],
            Settings { max_evaluations: 17, f_tol: 0.0, step: 0.1 },
        );
        assert!(m.evaluations <= 17);
        assert!(!m.converged);
    }
}
