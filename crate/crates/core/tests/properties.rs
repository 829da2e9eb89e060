mod common;

use common::{lq_norm_dense, measure_above};
use proptest::prelude::*;
use varlorentz::compactness::{closed_form_s_star, finiteness_integral, s_field};
use varlorentz::domain::{sobolev_seminorm_radial, w0_seminorm};
use varlorentz::extremal::quotient;
use varlorentz::norms::lorentz_norm_pow_decreasing;
use varlorentz::rearrangement::{
    decreasing_rearrangement, distribution_function, symmetric_decreasing_rearrangement, REFINE_TOL,
};
use varlorentz::{
    holder_conjugate_field, lorentz_norm, lorentz_norm_pow, luxemburg_norm, modular, rearranged_lorentz_norm_pow,
    BallDomain, ExponentField, LogSingular, NormSpec, RadialProfile,
};

fn profile(dim: usize, max_knots: usize, signed: bool) -> impl Strategy<Value = RadialProfile> {
    let lo = if signed { -1.0 } else { 0.0 };
    (0.2f64..1.0, prop::collection::vec((0.0f64..1.0, lo..1.0f64), 1..max_knots), lo..1.0f64).prop_filter_map(
        "profile must not vanish",
        move |(radius, mut knots, last)| {
            knots.sort_by(|a, b| a.0.total_cmp(&b.0));
            knots[0].0 = 0.0;
            let mut radii: Vec<f64> = knots.iter().map(|k| k.0 * radius).collect();
            let mut values: Vec<f64> = knots.iter().map(|k| k.1).collect();
            radii.push(radius);
            values.push(last);
            let f = RadialProfile::new(BallDomain::new(dim, radius).ok()?, radii, values).ok()?;
            (f.sup_abs() > 1e-3).then_some(f)
        },
    )
}

fn decreasing(dim: usize, max_knots: usize) -> impl Strategy<Value = RadialProfile> {
    profile(dim, max_knots, false).prop_map(|f| {
        let mut values = f.values.clone();
        values.sort_by(|a, b| b.total_cmp(a));
        RadialProfile::new(f.domain.clone(), f.radii.clone(), values).unwrap()
    })
}

fn log_singular_spec(ell: f64, second: f64) -> NormSpec {
    NormSpec::new(ExponentField::log_singular(1.0, 2, 1.0, ell, 0.1).unwrap(), second).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_is_non_increasing(f in profile(2, 12, true)) {
        let re = decreasing_rearrangement(&f);
        let m = f.domain.measure();
        let vals: Vec<f64> = (0..=200).map(|k| re.eval(m * k as f64 / 200.0)).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!((vals[0] - f.sup_abs()).abs() <= 1e-12 * f.sup_abs());
    }

    #[test]
    fn distribution_matches_oracle(f in profile(3, 12, true), u in 0.0f64..1.0) {
        let lambda = u * f.sup_abs();
        let d = distribution_function(&f).eval(lambda);
        prop_assert!((d - measure_above(&f, lambda)).abs() <= 1e-12 * f.domain.measure());
    }

    #[test]
    fn rearrangement_is_equimeasurable(f in profile(2, 12, true), u in 0.0f64..1.0) {
        let re = decreasing_rearrangement(&f);
        let lambda = u * f.sup_abs();
        let (mut lo, mut hi) = (0.0, f.domain.measure());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if re.eval(mid) > lambda { lo = mid } else { hi = mid }
        }
        prop_assert!((hi - measure_above(&f, lambda)).abs() <= 1e-9 * f.domain.measure());
    }

    #[test]
    fn rearrangement_commutes_with_scaling(f in profile(2, 10, true), c in -5.0f64..5.0, u in 0.0f64..1.0) {
        let t = u * f.domain.measure();
        let a = decreasing_rearrangement(&f.scaled(c)).eval(t);
        let b = c.abs() * decreasing_rearrangement(&f).eval(t);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn symmetric_rearrangement_fixes_decreasing_profiles(f in decreasing(3, 10)) {
        let sharp = symmetric_decreasing_rearrangement(&f);
        for r in f.radii.iter().chain(sharp.radii.iter()) {
            prop_assert!((sharp.eval(*r) - f.eval(*r)).abs() <= 1e-9 * f.sup_abs());
        }
        let again = symmetric_decreasing_rearrangement(&sharp);
        for r in again.radii.iter().chain(sharp.radii.iter()) {
            prop_assert!((again.eval(*r) - sharp.eval(*r)).abs() <= 1e-9 * f.sup_abs());
        }
        prop_assume!(f.jumps().next().is_none());
        let p = 1.5;
        let (a, b) = (sobolev_seminorm_radial(&f, p).unwrap(), sobolev_seminorm_radial(&sharp, p).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
    }

    #[test]
    fn symmetric_rearrangement_is_decreasing_and_close_in_measure(f in profile(2, 8, true), u in 0.02f64..0.98) {
        let sharp = symmetric_decreasing_rearrangement(&f);
        prop_assert!(sharp.is_decreasing() && sharp.is_nonnegative());
        let top = f.sup_abs();
        let lambda = u * top;
        let slack = 2.0 * REFINE_TOL * top;
        let m = measure_above(&sharp, lambda);
        prop_assert!(m <= measure_above(&f, lambda - slack) + 1e-12);
        prop_assert!(m >= measure_above(&f, lambda + slack) - 1e-12);
    }

    #[test]
    fn luxemburg_is_homogeneous_and_normalizing(f in profile(2, 8, true), c in 0.1f64..10.0) {
        let q = ExponentField::log_singular(1.0, 2, 1.0, 0.5, 0.1).unwrap();
        let n = luxemburg_norm(&f, &q).unwrap();
        let nc = luxemburg_norm(&f.scaled(-c), &q).unwrap();
        prop_assert!((nc - c * n).abs() <= 1e-9 * c * n);
        let rho = modular(&f.scaled(1.0 / n), &q).unwrap();
        prop_assert!((rho - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn luxemburg_triangle_inequality(f in profile(2, 8, true), g in profile(2, 8, true)) {
        let q = ExponentField::log_singular(1.0, 2, 0.5, 1.0, 0.2).unwrap();
        let g = RadialProfile::new(f.domain.clone(), g.radii.iter().map(|r| r * f.radius() / g.radius()).collect(), g.values.clone()).unwrap();
        let sum = RadialProfile::linear_combination(f.domain.clone(), &[(1.0, &f), (1.0, &g)]).unwrap();
        let (a, b, s) = (luxemburg_norm(&f, &q).unwrap(), luxemburg_norm(&g, &q).unwrap(), luxemburg_norm(&sum, &q).unwrap());
        prop_assert!(s <= (a + b) * (1.0 + 1e-9));
    }

    #[test]
    fn constant_exponent_luxemburg_is_lq(f in profile(3, 8, true), q0 in 1.0f64..5.0) {
        let n = luxemburg_norm(&f, &ExponentField::constant(q0).unwrap()).unwrap();
        let oracle = lq_norm_dense(&f, q0);
        prop_assert!((n - oracle).abs() <= 1e-6 * oracle);
    }

    #[test]
    fn lorentz_is_homogeneous(f in profile(2, 8, true), c in 0.1f64..10.0, second in 1.0f64..3.0) {
        let spec = log_singular_spec(0.5, second);
        let n = lorentz_norm(&f, &spec).unwrap();
        let nc = lorentz_norm(&f.scaled(c), &spec).unwrap();
        prop_assert!((nc - c * n).abs() <= 1e-9 * c * n);
    }

    #[test]
    fn lorentz_routes_agree_on_decreasing_profiles(f in decreasing(2, 8), second in 1.0f64..3.0) {
        let f = RadialProfile::new(f.domain.clone(), f.radii.clone(), {
            let mut v = f.values.clone();
            *v.last_mut().unwrap() = 0.0;
            v
        }).unwrap();
        prop_assume!(!f.is_zero());
        let spec = log_singular_spec(1.0, second);
        let a = lorentz_norm_pow(&f, &spec).unwrap();
        let b = lorentz_norm_pow_decreasing(&f, &spec).unwrap();
        let c = rearranged_lorentz_norm_pow(&f, &spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a, "{} vs {}", a, b);
        prop_assert!((a - c).abs() <= 1e-10 * a, "{} vs {}", a, c);
    }

    #[test]
    fn lorentz_is_monotone_under_pointwise_order(f in profile(2, 8, false), bump in 0.0f64..1.0) {
        let spec = log_singular_spec(0.5, 1.5);
        let lifted = RadialProfile::linear_combination(f.domain.clone(), &[
            (1.0, &f),
            (bump, &RadialProfile::tent(f.domain.clone())),
        ]).unwrap();
        prop_assert!(lorentz_norm(&lifted, &spec).unwrap() >= lorentz_norm(&f, &spec).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn quotient_is_dilation_and_scale_invariant_for_constant_critical_exponent(f in decreasing(2, 8), c in 0.1f64..10.0, lam in 0.5f64..4.0) {
        let f = RadialProfile::new(f.domain.clone(), f.radii.clone(), {
            let mut v = f.values.clone();
            *v.last_mut().unwrap() = 0.0;
            v
        }).unwrap();
        prop_assume!(w0_seminorm(&f, 1.0).map(|g| g > 1e-6).unwrap_or(false));
        // q = p* = 2 in d = 2 with p = 1: the quotient is invariant under dilations
        let spec = NormSpec::new(ExponentField::constant(2.0).unwrap(), 1.0).unwrap();
        let a = quotient(&f, &spec).unwrap();
        let b = quotient(&f.scaled(c).dilated(lam).unwrap(), &spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn s_star_is_non_increasing(c in 0.3f64..3.0, ell in 0.1f64..0.95, eta in 0.02f64..0.3) {
        let ls = LogSingular::new(1.0, 2, c, ell, eta).unwrap();
        let dom = BallDomain::new(2, 0.5).unwrap();
        let s = closed_form_s_star(&ls, &dom).unwrap();
        let ts: Vec<f64> = (0..100).map(|k| dom.measure() * 10f64.powf(-12.0 + 12.0 * k as f64 / 100.0)).collect();
        prop_assert!(ts.windows(2).all(|w| s.eval(w[1]) <= s.eval(w[0])));
        let field = s_field(&ExponentField::LogSingular(ls), ls.p_star()).unwrap();
        prop_assert!((field.value(1e-3) - s.eval(dom.ball_measure(1e-3))).abs() <= 1e-12 * field.value(1e-3));
    }

    #[test]
    fn finiteness_integral_grows_with_alpha(c in 0.5f64..2.0, ell in 0.25f64..0.75, a in 1.5f64..100.0) {
        let ls = LogSingular::new(1.0, 2, c, ell, 0.1).unwrap();
        let dom = BallDomain::new(2, 0.5).unwrap();
        let lo = finiteness_integral(a, &ls, &dom).unwrap();
        let hi = finiteness_integral(a * 10.0, &ls, &dom).unwrap();
        prop_assert!(lo.converged && hi.converged);
        prop_assert!(hi.log_value > lo.log_value);
        prop_assert!(lo.log_value >= dom.measure().ln());
    }

    #[test]
    fn holder_conjugate_matches_formula(q0 in 1.0f64..1.99, r in 1e-6f64..0.5) {
        let m = holder_conjugate_field(&ExponentField::constant(2.0).unwrap(), &ExponentField::constant(q0).unwrap()).unwrap();
        prop_assert!((m.value(r) - 2.0 * q0 / (2.0 - q0)).abs() <= 1e-12 * m.value(r));
    }
}
