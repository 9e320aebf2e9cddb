mod common;

use pplab::geometry::{make_entanglement_geometry, EntanglementGeometry, UnitVector3};
use pplab::nonclassicality::{
    chsh_test, coherence_test, discord_test, distributivity_test, linear_ent_test, nonlinear_ent_test,
    standard_chsh_observables, DiscordOptions, LinearVariant, NonlinearVariant, TestReport,
};
use pplab::random;
use proptest::prelude::*;

fn consistent(r: &TestReport) -> Result<(), TestCaseError> {
    r.self_check().map_err(|e| TestCaseError::fail(e.to_string()))?;
    let w = r.recompute_weak_statistic();
    if let Some(w) = w {
        prop_assert!((w - r.statistic).abs() <= 1e-10);
    }
    Ok(())
}

fn random_frame(r: &mut rand_chacha::ChaCha8Rng) -> [UnitVector3; 3] {
    let a = random::unit_vector(r);
    let b = pplab::geometry::mub_partner(a);
    let c = UnitVector3::normalize(pplab::geometry::cross(a.to_array(), b.to_array())).unwrap();
    [a, b, c]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chsh_negativity_iff_violation(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let rho = random::density_matrix(&mut r, 4);
        let [a1, a2, b1, b2] = standard_chsh_observables();
        let rep = chsh_test(&rho, &a1, &a2, &b1, &b2).unwrap();
        consistent(&rep)?;
        let chsh = rep.extras["chsh_value"];
        prop_assert!((rep.statistic - 0.25 * (2.0 + chsh)).abs() <= 1e-10);
        prop_assert_eq!(rep.statistic < 0.0, chsh < -2.0);
    }

    #[test]
    fn separable_states_pass_in_range(seed in any::<u64>(), k in 1usize..=4, frac in 0.05f64..=1.0) {
        let mut r = common::rng(seed);
        let rho = random::separable_two_qubit(&mut r, k).unwrap();
        let (fa, fb) = (random_frame(&mut r), random_frame(&mut r));
        for v in [LinearVariant::I, LinearVariant::II] {
            let g = make_entanglement_geometry(v.alpha_range().1 * frac, fa, fb).unwrap();
            let rep = linear_ent_test(&rho, &g, v).unwrap();
            consistent(&rep)?;
            prop_assert!(!rep.verdict, "{:?} statistic {}", v, rep.statistic);
        }
        for v in [NonlinearVariant::I, NonlinearVariant::II, NonlinearVariant::III] {
            let g = make_entanglement_geometry(v.alpha_range().1 * frac, fa, fb).unwrap();
            let rep = nonlinear_ent_test(&rho, &g, v).unwrap();
            consistent(&rep)?;
            prop_assert!(!rep.verdict, "{:?} statistic {}", v, rep.statistic);
        }
    }

    #[test]
    fn closed_forms_agree_on_random_states(seed in any::<u64>(), alpha in 0.1f64..3.0) {
        let mut r = common::rng(seed);
        let rho = random::density_matrix(&mut r, 4);
        let g = EntanglementGeometry::standard(alpha).unwrap();
        for v in [LinearVariant::I, LinearVariant::II] {
            consistent(&linear_ent_test(&rho, &g, v).unwrap())?;
        }
        for v in [NonlinearVariant::I, NonlinearVariant::II, NonlinearVariant::III] {
            consistent(&nonlinear_ent_test(&rho, &g, v).unwrap())?;
        }
        consistent(&discord_test(&rho, alpha, DiscordOptions::default()).unwrap())?;
    }

    #[test]
    fn zero_discord_states_never_flag(seed in any::<u64>(), k in 1usize..=2) {
        let mut r = common::rng(seed);
        let rho = random::zero_discord_two_qubit(&mut r, k).unwrap();
        for i in 1..=30 {
            let rep = discord_test(&rho, 0.1 * i as f64, DiscordOptions::default()).unwrap();
            prop_assert!(!rep.verdict, "alpha {} gives {:?}", 0.1 * i as f64, rep.extras);
        }
    }

    #[test]
    fn single_qubit_reports_are_consistent(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let rho = random::qubit_state(&mut r);
        let (a1, a2, a3) = (random::unit_vector(&mut r), random::unit_vector(&mut r), random::unit_vector(&mut r));
        consistent(&coherence_test(&rho, a1, a2).unwrap())?;
        consistent(&pplab::nonclassicality::boolean_state_dep_test(&rho, a1, a2).unwrap())?;
        consistent(&distributivity_test(&rho, a1, a2, a3).unwrap())?;
    }

    #[test]
    fn reports_round_trip_through_json(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let rho = random::density_matrix(&mut r, 4);
        let g = EntanglementGeometry::standard(1.2).unwrap();
        let rep = nonlinear_ent_test(&rho, &g, NonlinearVariant::III).unwrap();
        let back: TestReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        consistent(&back)?;
        prop_assert!((back.recompute_statistic().unwrap() - rep.statistic).abs() <= 1e-10);
    }
}
