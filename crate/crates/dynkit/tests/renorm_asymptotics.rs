use dynkit::renorm::{build_model, verify_asymptotics, ModelMap};

fn default_model() -> ModelMap {
    build_model(0.5, 1.0, 3.0, 0.0).unwrap()
}

#[test]
fn residual_decreases_with_n() {
    let rep = verify_asymptotics(&default_model(), (4, 16)).unwrap();
    for w in rep.records.windows(2) {
        assert!(w[1].residual <= 2.0 * w[0].residual, "n = {}: {} -> {}", w[1].n, w[0].residual, w[1].residual);
    }
}

#[test]
fn fitted_r_sign_matches_prediction() {
    let m = default_model();
    let rep = verify_asymptotics(&m, (4, 16)).unwrap();
    for r in &rep.records {
        let predicted = 2.0 * m.j1() / r.b * (m.lambda * m.lambda * m.gamma).powi(r.n as i32);
        assert_eq!(r.r.signum(), predicted.signum(), "n = {}", r.n);
    }
}

#[test]
fn r_ratio_matches_lambda2_gamma() {
    let rep = verify_asymptotics(&default_model(), (4, 16)).unwrap();
    assert!(rep.r_ratio_pass, "{:?}", rep.r_ratios);
}
