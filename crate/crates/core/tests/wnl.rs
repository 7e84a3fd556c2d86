use approx::assert_abs_diff_eq;
use crb_core::scenario::{counter_ic, mean_decomposition, preset, solitary_ic};
use crb_core::wnl::{channel_spec, theta_tilde, ExpansionOrder, Rho2Variant, WnlOptions, WnlSolver};
use crb_core::{CaseKind, CrbError, CrbSolver, GridSpec, InitialCondition, PhysParams};
use proptest::prelude::*;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn assert_reproduces_data(ic: &InitialCondition, case: CaseKind, p: &PhysParams, opts: WnlOptions) {
    let mut s = WnlSolver::new(ic, case, p, opts).unwrap();
    let fields = s.assemble();
    assert_eq!(fields.t, 0.0);
    let scale = ic.max_abs_displacement().max(1.0);
    for order in ExpansionOrder::ALL {
        let (u, w) = fields.at(order);
        assert!(
            max_diff(u, &ic.f1) < 1e-11 * scale,
            "{order:?} u {:e}",
            max_diff(u, &ic.f1)
        );
        assert!(
            max_diff(w, &ic.f2) < 1e-11 * scale,
            "{order:?} w {:e}",
            max_diff(w, &ic.f2)
        );
    }
}

#[test]
fn order_parsing() {
    assert_eq!("eps".parse::<ExpansionOrder>().unwrap(), ExpansionOrder::Eps);
    assert_eq!("1".parse::<ExpansionOrder>().unwrap(), ExpansionOrder::SqrtEps);
    assert!("eps2".parse::<ExpansionOrder>().is_err());
    for o in ExpansionOrder::ALL {
        assert_eq!(o.as_str().parse::<ExpansionOrder>().unwrap(), o);
    }
}

#[test]
fn channel_coefficients() {
    let p = PhysParams::new(0.01, 2.0, 3.0, 0.5, 0.7, 2.0).unwrap();
    let g = GridSpec::new(10.0, 64).unwrap();
    let ic = solitary_ic(&p, g, 0.5, 0.5, 0.0, 1.5).unwrap();
    let ms = mean_decomposition(&ic, &p);
    let s = channel_spec(CaseKind::DistinctSpeeds, &p, &ms, 1, 0).unwrap();
    assert_eq!(s.sigma, 1.0);
    assert_eq!(s.divisor, 2.0);
    assert_abs_diff_eq!(s.adv, 2.0 * ms.d1);
    assert_abs_diff_eq!(s.disp, 12.0);
    assert_abs_diff_eq!(s.coup, 0.5);
    let s = channel_spec(CaseKind::CloseSpeeds, &p, &ms, 1, 1).unwrap();
    assert_eq!(s.sigma, -1.0);
    assert_abs_diff_eq!(s.adv, 2.0 * ms.d1 + 3.0 / 0.01);
    let s = channel_spec(CaseKind::CloseSpeeds, &p, &ms, 0, 0).unwrap();
    assert_abs_diff_eq!(s.adv, ms.d1);
    assert_abs_diff_eq!(s.coup, 0.7);
    assert!(channel_spec(CaseKind::CloseSpeeds, &p, &ms, 2, 0).is_err());
    // θ̃1 = δ d2/(2ω̃), θ̃2 = αγd2/(2cω̃) for distinct speeds.
    let th = theta_tilde(CaseKind::DistinctSpeeds, &p, &ms);
    let wt = p.omega_tilde();
    assert_abs_diff_eq!(th[0], 0.7 * ms.d2 / (2.0 * wt), epsilon = 1e-15);
    assert_abs_diff_eq!(th[1], 2.0 * 0.5 * ms.d2 / (2.0 * 2.0 * wt), epsilon = 1e-15);
}

#[test]
fn preset_data_are_reproduced_at_t0() {
    for name in ["fig2", "fig5", "fig6-co", "fig7", "fig11"] {
        let pr = preset(name).unwrap();
        let ic = pr.initial_condition().unwrap();
        assert_reproduces_data(&ic, pr.case, &pr.params, WnlOptions::default());
    }
}

#[test]
fn distinct_case_rejects_equal_speeds() {
    let p = PhysParams::new(0.01, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let g = GridSpec::new(20.0, 128).unwrap();
    let ic = solitary_ic(&p, g, 0.5, 0.5, 0.0, 0.0).unwrap();
    let err = WnlSolver::new(&ic, CaseKind::DistinctSpeeds, &p, WnlOptions::default()).unwrap_err();
    assert!(matches!(err, CrbError::Config(_)));
}

#[test]
fn velocity_mean_is_rejected() {
    let p = PhysParams::new(0.01, 1.0, 1.0, 1.0, 1.0, 1.5).unwrap();
    let g = GridSpec::new(20.0, 128).unwrap();
    let mut ic = solitary_ic(&p, g, 0.5, 0.5, 0.0, 0.0).unwrap();
    ic.v1.iter_mut().for_each(|v| *v += 0.01);
    let err = WnlSolver::new(&ic, CaseKind::DistinctSpeeds, &p, WnlOptions::default()).unwrap_err();
    assert!(matches!(err, CrbError::Precondition(_)));
}

#[test]
fn evolved_fields_keep_zero_mean() {
    let p = PhysParams::new(0.02, 1.5, 1.2, 0.8, 0.6, 1.1).unwrap();
    let g = GridSpec::new(30.0, 256).unwrap();
    let ic = counter_ic(&p, g, 0.5, 0.5, 10.0, -10.0).unwrap();
    for case in [CaseKind::CloseSpeeds, CaseKind::DistinctSpeeds] {
        let mut s = WnlSolver::new(&ic, case, &p, WnlOptions::default()).unwrap();
        s.evolve(0.05, 200).unwrap();
        assert_abs_diff_eq!(s.time(), 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.slow_time(), 0.2, epsilon = 1e-10);
        assert!(s.max_field_mean() < 1e-12, "{case:?} {:e}", s.max_field_mean());
        let f = s.assemble();
        for order in ExpansionOrder::ALL {
            let (u, w) = f.at(order);
            assert!(u.iter().chain(w).all(|v| v.is_finite()));
        }
    }
}

#[test]
fn advance_to_hits_target_exactly() {
    let pr = preset("fig2").unwrap();
    let ic = pr.initial_condition().unwrap();
    let mut a = WnlSolver::new(&ic, pr.case, &pr.params, WnlOptions::default()).unwrap();
    a.advance_to(1.005, 0.01).unwrap();
    assert_abs_diff_eq!(a.time(), 1.005, epsilon = 1e-12);
}

#[test]
fn rho2_variants_coincide_for_distinct_speeds() {
    let pr = preset("fig2").unwrap();
    let ic = pr.initial_condition().unwrap();
    let run = |rho2| {
        let opts = WnlOptions {
            rho2,
            ..WnlOptions::default()
        };
        let mut s = WnlSolver::new(&ic, pr.case, &pr.params, opts).unwrap();
        s.advance_to(5.0, 0.01).unwrap();
        s.assemble()
    };
    assert_eq!(run(Rho2Variant::Gamma), run(Rho2Variant::Delta));
}

#[test]
fn higher_orders_track_direct_solution_better() {
    // Short run at fig2 parameters: every correction reduces the error
    // against the direct solver.
    let pr = preset("fig2").unwrap();
    let ic = pr.initial_condition().unwrap();
    let mut direct = CrbSolver::new(&ic, &pr.params).unwrap();
    let mut wnl = WnlSolver::new(&ic, pr.case, &pr.params, WnlOptions::default()).unwrap();
    let t = 40.0;
    direct.advance_to(t, 0.01).unwrap();
    wnl.advance_to(t, 0.01).unwrap();
    let (u, w) = direct.fields();
    let f = wnl.assemble();
    let errs: Vec<(f64, f64)> = ExpansionOrder::ALL
        .iter()
        .map(|&o| {
            let (ua, wa) = f.at(o);
            (max_diff(ua, &u), max_diff(wa, &w))
        })
        .collect();
    assert!(errs[1].0 < errs[0].0 && errs[2].0 < errs[1].0, "{errs:?}");
    assert!(errs[1].1 < errs[0].1 && errs[2].1 < errs[1].1, "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn initial_data_are_reproduced(
        eps in 0.001f64..0.05,
        alpha in 0.5f64..2.0,
        beta in 0.5f64..2.0,
        gamma in 0.2f64..1.5,
        delta in 0.2f64..1.5,
        c in 1.3f64..2.5,
        k in 0.3f64..0.6,
        pedestal in -2.0f64..3.0,
        close in any::<bool>(),
        counter in any::<bool>(),
    ) {
        let p = PhysParams::new(eps, alpha, beta, gamma, delta, c).unwrap();
        let g = GridSpec::new(40.0, 256).unwrap();
        let mut ic = if counter {
            counter_ic(&p, g, k, k, 15.0, -15.0).unwrap()
        } else {
            solitary_ic(&p, g, k, k, 0.0, 0.0).unwrap()
        };
        ic.f1.iter_mut().for_each(|v| *v += pedestal);
        let case = if close { CaseKind::CloseSpeeds } else { CaseKind::DistinctSpeeds };
        assert_reproduces_data(&ic, case, &p, WnlOptions::default());
    }
}
