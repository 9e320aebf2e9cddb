mod common;

use pplab::pseudo::Prescription;
use pplab::random;
use pplab::scheme::{build_scheme, marginalize, ObservableSpec};
use proptest::prelude::*;

fn observables(r: &mut rand_chacha::ChaCha8Rng, n: usize, qubits: usize) -> Vec<ObservableSpec> {
    (0..n)
        .map(|i| ObservableSpec::axis(i % qubits, format!("o{i}"), random::unit_vector(r)))
        .collect()
}

fn prescription(k: u8) -> Prescription {
    match k % 3 {
        0 => Prescription::Unit,
        1 => Prescription::Symmetrized,
        // equal weights over the canonical orderings
        _ => Prescription::Convex(Vec::new()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normalization_and_born_marginals(seed in any::<u64>(), n in 1usize..=4, qubits in 1usize..=2, k in any::<u8>()) {
        let mut r = common::rng(seed);
        let dims = vec![2; qubits];
        let rho = random::density_matrix(&mut r, 1 << qubits);
        let obs = observables(&mut r, n, qubits);
        let s = build_scheme(&rho, &dims, &obs, &prescription(k)).unwrap();
        prop_assert!((s.total() - 1.0).abs() <= 1e-10);
        s.check_invariants(&rho).unwrap();
    }

    #[test]
    fn marginalization_commutes_with_construction(seed in any::<u64>(), n in 2usize..=4, drop in 0usize..4) {
        let drop = drop % n;
        let mut r = common::rng(seed);
        let rho = random::density_matrix(&mut r, 2);
        let obs = observables(&mut r, n, 1);
        let full = build_scheme(&rho, &[2], &obs, &Prescription::Unit).unwrap();
        let mut rest = obs.clone();
        rest.remove(drop);
        let direct = build_scheme(&rho, &[2], &rest, &Prescription::Unit).unwrap();
        let m = marginalize(&full, drop).unwrap();
        for (a, b) in m.entries().iter().zip(direct.entries()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn commuting_observables_are_classical(seed in any::<u64>(), n in 1usize..=4, flips in any::<u8>()) {
        let mut r = common::rng(seed);
        let rho = random::density_matrix(&mut r, 4);
        let axes = [random::unit_vector(&mut r), random::unit_vector(&mut r)];
        // Parallel or antiparallel axes on each qubit: all observables commute.
        let obs: Vec<_> = (0..n)
            .map(|i| {
                let a = axes[i % 2];
                let a = if (flips >> i) & 1 == 1 { a.neg() } else { a };
                ObservableSpec::axis(i % 2, format!("o{i}"), a)
            })
            .collect();
        let s = build_scheme(&rho, &[2, 2], &obs, &Prescription::Unit).unwrap();
        prop_assert!(s.entries().iter().all(|&v| v >= -1e-12));
    }
}
