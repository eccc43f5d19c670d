use num_complex::Complex64 as C;
use proptest::prelude::*;
use uqsp_core::bethe_engine::{companion_roots_n1, solve_bethe_roots, SolverCfg};
use uqsp_core::chain_rep::{ChainRep, ChainSpec};
use uqsp_core::scalar_field::{Backend, FieldCtx};
use uqsp_core::verify_harness::{run_suite, Status, Suite, SuiteSpec};

fn chain(q: C, ws: Vec<C>) -> ChainRep<C> {
    let ctx = FieldCtx::new(1, q, 11).unwrap();
    ChainRep::find_vacuum(ChainSpec::new(ctx, ws).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // every Newton root squares to a companion-matrix root
    #[test]
    fn newton_roots_match_companion(
        qr in 0.3f64..0.9, qi in -0.4f64..0.4,
        w1 in 0.5f64..2.0, w2 in 0.5f64..2.0, phase in 0.0f64..3.0,
    ) {
        let q = C::new(qr, qi);
        let ws = vec![C::new(w1, 0.0), C::from_polar(w2, phase)];
        prop_assume!((ws[0] - ws[1]).norm() > 0.1);
        let rep = chain(q, ws.clone());
        let oracle = companion_roots_n1(q, &ws);
        let roots = solve_bethe_roots(&rep, 1, &SolverCfg::default()).unwrap();
        prop_assert!(!roots.is_empty());
        for r in roots {
            let t = r.us[0] * r.us[0];
            let near = oracle.iter().map(|o| (o - t).norm() / t.norm().max(1.0)).fold(f64::MAX, f64::min);
            prop_assert!(near < 1e-7, "u = {}, distance {near:e}", r.us[0]);
            prop_assert!(r.ratio_residual < 1e-10);
        }
    }
}

#[test]
fn report_schema() {
    let mut spec = SuiteSpec::new(Suite::Thm3, 1);
    spec.trials = 2;
    spec.seed = 4;
    let r = run_suite(&spec).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for key in [
        "suite",
        "params",
        "residual_max",
        "exact",
        "status",
        "adopted_variants",
        "details",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["n", "L", "M", "q", "seed", "backend", "trials", "tolerance"] {
        assert!(v["params"].get(key).is_some(), "missing params.{key}");
    }
    assert_eq!(v["status"], "pass");
    assert_eq!(v["params"]["backend"], "exact");
}

#[test]
fn float_backend_agrees_with_exact_on_theorem3() {
    for backend in [Backend::Exact, Backend::Float] {
        let mut spec = SuiteSpec::new(Suite::Thm3, 2);
        spec.backend = backend;
        spec.l = 2;
        spec.trials = 2;
        assert_eq!(
            run_suite(&spec).unwrap().status,
            Status::Pass,
            "{backend:?}"
        );
    }
}
