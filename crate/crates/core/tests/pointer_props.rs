mod common;

use pplab::pointer::{perturbative_prediction, simulate_pointers, PointerConfig};
use pplab::random;
use pplab::DensityMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// In the weak regime the simulated correlation follows the leading-order
    /// prediction.
    #[test]
    fn weak_limit(seed in any::<u64>(), n in 1usize..=2, tau in 0.02f64..0.1) {
        let mut r = common::rng(seed);
        let rho = random::qubit_state(&mut r);
        let post = if seed % 2 == 0 { DensityMatrix::maximally_mixed(2) } else { random::qubit_state(&mut r) };
        let fs = common::qubit_projectors(&mut r, n);
        let cfg = PointerConfig { g: tau, ..Default::default() };
        let lead = perturbative_prediction(&rho, &fs, &post, &cfg).unwrap();
        // Skip draws whose leading coefficient is accidentally tiny.
        prop_assume!(lead.abs() > 0.05 * tau.powi(n as i32));
        let sim = simulate_pointers(&rho, &fs, &post, &cfg).unwrap();
        prop_assert!((sim.norm - 1.0).abs() <= 1e-10);
        prop_assert!((sim.correlation - lead).abs() / lead.abs() <= 0.05, "{} vs {}", sim.correlation, lead);
    }
}

#[test]
fn grid_refinement_is_stable() {
    let mut r = common::rng(11);
    let fs = common::qubit_projectors(&mut r, 2);
    let rho = random::qubit_state(&mut r);
    let sim = simulate_pointers(&rho, &fs, &DensityMatrix::maximally_mixed(2), &PointerConfig::default()).unwrap();
    assert!(sim.convergence_estimate < 0.01, "{}", sim.convergence_estimate);
}
