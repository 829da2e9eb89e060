use varlorentz::domain::gradient_integral;
use varlorentz::system::{
    bernstein_lower_bound, build_system, random_unit_vectors, small_coefficient_mass, tail_index, SystemParams,
};
use varlorentz::Error;

fn params(levels: usize) -> SystemParams {
    let mut p = SystemParams::new(1.0, 2, 1.0, 0.1, 0.01, levels);
    p.optimizer.budget = 800;
    p
}

#[test]
fn single_level_system_and_report() {
    let sys = build_system(&params(1)).unwrap();
    assert_eq!(sys.count(), 1);
    assert!(sys.checks.iter().all(|c| c.holds), "{:?}", sys.checks);
    let report = bernstein_lower_bound(&sys, 1, 30, 5).unwrap();
    assert_eq!(report.n, 1);
    assert_eq!(report.chain.len(), 30);
    assert!(report.chain.iter().all(|s| s.alphas.len() == 1 && s.alphas[0].abs() == 1.0));
    assert!(report.inf_quotient >= report.analytic_bound);
    assert_eq!(report.link_violations, [0; 6]);
    assert_eq!(report.beta_lower, 0.5 * sys.gamma_hat);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(matches!(build_system(&params(0)), Err(Error::InvalidArgument(_))));
    for eps in [0.0, 1.0, -0.5, f64::NAN] {
        let p = SystemParams { eps, ..params(1) };
        assert!(matches!(build_system(&p), Err(Error::InvalidArgument(_))), "eps = {eps}");
    }
    // the ball of radius 0.6 in the plane has measure above 1
    let wide = SystemParams { eta0: 0.6, ..params(1) };
    assert!(build_system(&wide).is_err());
    // gamma^p / 2^p - 4 eps must stay positive
    let coarse = SystemParams { eps: 0.3, ..params(1) };
    assert!(matches!(build_system(&coarse), Err(Error::Precondition(_))));

    let sys = build_system(&params(1)).unwrap();
    assert!(matches!(bernstein_lower_bound(&sys, 2, 10, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(bernstein_lower_bound(&sys, 0, 10, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(bernstein_lower_bound(&sys, 1, 0, 1), Err(Error::InvalidArgument(_))));
}

#[test]
fn levels_nest_and_gradients_add() {
    let sys = build_system(&params(3)).unwrap();
    for pair in sys.levels.windows(2) {
        assert!(pair[1].r <= pair[0].t, "level starts outside the previous cut");
    }
    for l in &sys.levels {
        assert!(0.0 < l.t && l.t <= l.s && l.s < l.w && l.w <= l.r, "{} {} {} {}", l.t, l.s, l.w, l.r);
    }
    let p = sys.params.p;
    for alphas in [vec![1.0, -2.0, 0.5], vec![0.0, 3.0, -1.0], vec![0.25, 0.25, 0.25]] {
        let direct = gradient_integral(&sys.combine_g(&alphas).unwrap(), p).unwrap();
        let summed: f64 = alphas.iter().zip(&sys.levels).map(|(a, l)| a.abs().powf(p) * l.g_gradient_pow).sum();
        assert!((direct - summed).abs() <= 1e-9 * summed, "{direct} vs {summed}");
    }
}

#[test]
fn reruns_serialize_identically() {
    let a = serde_json::to_string(&build_system(&params(2)).unwrap()).unwrap();
    let b = serde_json::to_string(&build_system(&params(2)).unwrap()).unwrap();
    assert_eq!(a, b);
    let sys = build_system(&params(2)).unwrap();
    let r1 = serde_json::to_string(&bernstein_lower_bound(&sys, 2, 40, 9).unwrap()).unwrap();
    let r2 = serde_json::to_string(&bernstein_lower_bound(&sys, 2, 40, 9).unwrap()).unwrap();
    assert_eq!(r1, r2);
}

#[test]
fn tail_index_and_small_mass_match_direct_counts() {
    for eps in [0.3, 0.25, 0.1, 0.01, 1e-6] {
        let k = tail_index(eps).unwrap();
        assert!(0.5f64.powi(k as i32) < eps && 0.5f64.powi(k as i32 - 1) >= eps, "eps = {eps}, k = {k}");
    }
    // thresholds 2^-(j + 2): 1/8, 1/16, 1/32
    let alphas = [0.2, -0.05, 1.0 / 32.0];
    let mass = small_coefficient_mass(&alphas, 2.0, 2);
    assert_eq!(mass, 0.05f64.powi(2) + (1.0f64 / 32.0).powi(2));
}

#[test]
fn sampled_vectors_lie_on_the_unit_sphere() {
    for p in [1.0, 1.5, 3.0] {
        for v in random_unit_vectors(5, p, 20, 3) {
            let norm: f64 = v.iter().map(|a| a.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
    assert_eq!(random_unit_vectors(4, 2.0, 10, 1), random_unit_vectors(4, 2.0, 10, 1));
}
