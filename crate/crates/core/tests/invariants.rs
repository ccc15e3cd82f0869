use proptest::prelude::*;

use nvconf::dilation::compose;
use nvconf::{build_state_pair, conditional_error, decompose_two_level, dilate, helstrom, mc_solve, threshold_measurement, StatePair, C64};

fn pair() -> impl Strategy<Value = StatePair> {
    (0.0..=1.0f64, 0.0..=1.0f64, -3.2..3.2f64, 0.01..0.99f64)
        .prop_map(|(nu, r, phase, eta0)| build_state_pair(nu, C64::from_polar(r, phase), eta0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn solution_is_a_valid_povm(p in pair()) {
        let sol = mc_solve(&p).unwrap();
        prop_assert!(sol.povm.completeness_error() < 1e-12);
        prop_assert!(sol.povm.min_eigenvalue().unwrap() > -1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&sol.p_inc_opt));
        prop_assert!((sol.povm.inconclusive_rate(&p) - sol.p_inc_opt).abs() < 1e-10);
    }

    #[test]
    fn confidences_are_bounded_by_one_and_priors(p in pair()) {
        let sol = mc_solve(&p).unwrap();
        for (j, c) in [sol.c0_max, sol.c1_max].into_iter().enumerate() {
            prop_assert!(c <= 1.0 + 1e-12);
            prop_assert!(c >= p.eta(j) - 1e-12);
        }
    }

    #[test]
    fn firing_detectors_achieve_the_closed_form(p in pair()) {
        let sol = mc_solve(&p).unwrap();
        for (j, want) in [sol.c0_max, sol.c1_max].into_iter().enumerate() {
            if let Some(c) = sol.povm.confidence(&p, j) {
                prop_assert!((c - want).abs() < 1e-9, "outcome {j}: {c} vs {want}");
            }
        }
    }

    #[test]
    fn confidences_invariant_under_field_reversal(nu in 0.0..=1.0f64, r in 0.0..=1.0f64, phase in -3.2..3.2f64, eta0 in 0.01..0.99f64) {
        let a = mc_solve(&build_state_pair(nu, C64::from_polar(r, phase), eta0).unwrap()).unwrap();
        let b = mc_solve(&build_state_pair(nu, C64::from_polar(r, -phase), eta0).unwrap()).unwrap();
        prop_assert!((a.c0_max - b.c0_max).abs() < 1e-10 && (a.c1_max - b.c1_max).abs() < 1e-10);
        prop_assert!((a.p_inc_opt - b.p_inc_opt).abs() < 1e-10);
    }

    #[test]
    fn threshold_meets_its_budget(p in pair(), frac in 0.0..=1.0f64) {
        let sol = mc_solve(&p).unwrap();
        let target = frac * sol.p_inc_opt;
        let t = threshold_measurement(&sol, &p, target).unwrap();
        prop_assert!(t.p_inc <= target + 1e-12);
        prop_assert!((0.0..=1.0).contains(&t.lambda));
        prop_assert!((t.povm.inconclusive_rate(&p) - t.p_inc).abs() < 1e-10);
    }

    #[test]
    fn zero_budget_is_minimum_error(p in pair()) {
        let t = threshold_measurement(&mc_solve(&p).unwrap(), &p, 0.0).unwrap();
        let e = conditional_error(&t.povm, &p).unwrap();
        prop_assert!((e - helstrom(&p).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn dilation_is_unitary_and_reproduces_clicks(p in pair()) {
        let povm = mc_solve(&p).unwrap().povm;
        let d = dilate(&povm).unwrap();
        prop_assert!(d.u.unitarity_error() < 1e-12);
        prop_assert!(d.born_residual(&povm, &p) < 1e-12);
        let factors = decompose_two_level(&d.u).unwrap();
        prop_assert!(factors.len() <= 3);
        prop_assert!(compose(&factors).max_abs_diff(&d.u) < 1e-10);
    }
}
