use num_complex::Complex64;
use proptest::prelude::*;
use stabscope_core::certification::CertificationPlan;
use stabscope_core::models::{build_clifford_t_state, build_gue_state};
use stabscope_core::oracles::d_min;
use stabscope_core::rng::{gaussian_pair, rng_from_seed};
use stabscope_core::sre::sre;
use stabscope_core::stabilizer::sample_random_clifford;
use stabscope_core::{pauli_spectrum, Gate, StateVector, Tableau};

const ALPHAS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 6.0];

fn gaussian_state(n: usize, seed: u64) -> StateVector {
    let mut rng = rng_from_seed(seed);
    let amps = (0..1usize << n)
        .map(|_| {
            let (a, b) = gaussian_pair(&mut rng);
            Complex64::new(a, b)
        })
        .collect();
    let mut s = StateVector::from_amplitudes_unchecked(n, amps).unwrap();
    s.normalize().unwrap();
    s
}

fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
    let single = (0..n, any::<bool>()).prop_map(|(q, h)| if h { Gate::H(q) } else { Gate::S(q) });
    if n < 2 {
        return single.boxed();
    }
    let cnot = (0..n, 1..n).prop_map(move |(c, off)| Gate::Cnot(c, (c + off) % n));
    prop_oneof![single, cnot].boxed()
}

fn conjugated(psi: &StateVector, clifford_seed: u64) -> StateVector {
    let c = sample_random_clifford(psi.n(), &mut rng_from_seed(clifford_seed)).unwrap();
    let mut out = psi.clone();
    out.apply_circuit(&c).unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sre_is_monotone_in_alpha_and_bounded(n in 1usize..=6, seed in any::<u64>()) {
        let spec = pauli_spectrum(&gaussian_state(n, seed)).unwrap();
        let values: Vec<f64> = ALPHAS.iter().map(|&a| sre(&spec, a).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-9, "{values:?}");
        }
        let cap = n as f64 * std::f64::consts::LN_2 + 1e-9;
        prop_assert!(values.iter().all(|&v| (0.0..=cap).contains(&v)), "{values:?}");
    }

    #[test]
    fn sre_is_additive_on_products(na in 1usize..=3, nb in 1usize..=3, sa in any::<u64>(), sb in any::<u64>()) {
        let a = gaussian_state(na, sa);
        let b = gaussian_state(nb, sb);
        let ab = pauli_spectrum(&a.tensor(&b).unwrap()).unwrap();
        let (sa, sb) = (pauli_spectrum(&a).unwrap(), pauli_spectrum(&b).unwrap());
        for alpha in ALPHAS {
            let lhs = sre(&ab, alpha).unwrap();
            let rhs = sre(&sa, alpha).unwrap() + sre(&sb, alpha).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9, "alpha {alpha}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn sre_and_sorted_spectrum_are_clifford_invariant(n in 1usize..=6, seed in any::<u64>(), cseed in any::<u64>()) {
        let psi = gaussian_state(n, seed);
        let (s0, s1) = (pauli_spectrum(&psi).unwrap(), pauli_spectrum(&conjugated(&psi, cseed)).unwrap());
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            prop_assert!((sre(&s0, alpha).unwrap() - sre(&s1, alpha).unwrap()).abs() < 1e-9);
        }
        for (x, y) in s0.sorted().iter().zip(s1.sorted()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_one_is_bracketed_by_neighbours(n in 1usize..=5, seed in any::<u64>()) {
        let spec = pauli_spectrum(&gaussian_state(n, seed)).unwrap();
        let (lo, mid, hi) = (sre(&spec, 1.0 - 1e-4).unwrap(), sre(&spec, 1.0).unwrap(), sre(&spec, 1.0 + 1e-4).unwrap());
        prop_assert!(lo >= mid - 1e-9 && mid >= hi - 1e-9);
        prop_assert!((lo - mid).abs() < 1e-3 && (mid - hi).abs() < 1e-3);
    }

    #[test]
    fn purity_sum_rule(n in 1usize..=6, seed in any::<u64>()) {
        let spec = pauli_spectrum(&gaussian_state(n, seed)).unwrap();
        prop_assert!((spec.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tableau_stays_valid_under_gate_sequences(
        (n, gates) in (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(arb_gate(n), 0..60)))
    ) {
        let mut t = Tableau::new(n).unwrap();
        let mut dense = StateVector::zero(n).unwrap();
        for g in gates {
            t.apply_gate(g).unwrap();
            dense.apply_gate(g).unwrap();
        }
        prop_assert!(Tableau::from_generators(t.generators().to_vec()).is_ok());
        let f = t.to_statevector().unwrap().fidelity(&dense).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn certification_distribution_is_normalized(n in 1usize..=5, seed in any::<u64>()) {
        let plan = CertificationPlan::new(gaussian_state(n, seed), 100, 0.05, 0.05).unwrap();
        let total: f64 = (0..1usize << (2 * n)).map(|i| plan.probability(i)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dmin_is_clifford_invariant_and_self_certifying(n in 1usize..=2, seed in any::<u64>(), cseed in any::<u64>()) {
        let psi = gaussian_state(n, seed);
        let a = d_min(&psi).unwrap();
        let b = d_min(&conjugated(&psi, cseed)).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-9);
        prop_assert!((a.reevaluate(&psi).unwrap() - a.value).abs() < 1e-9);
    }

    #[test]
    fn model_states_are_normalized_and_reproducible(n in 2usize..=5, nt in 0usize..8, t in 0.0f64..3.0, seed in any::<u64>()) {
        let ct = build_clifford_t_state(n, nt, seed).unwrap();
        prop_assert!((ct.state.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert_eq!(&ct.state, &build_clifford_t_state(n, nt, seed).unwrap().state);
        if nt == 0 {
            let spec = pauli_spectrum(&ct.state).unwrap();
            prop_assert!(ALPHAS.iter().all(|&a| sre(&spec, a).unwrap().abs() < 1e-10));
        }
        let g = build_gue_state(n, t, seed).unwrap();
        prop_assert!((g.state.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert_eq!(&g.state, &build_gue_state(n, t, seed).unwrap().state);
    }
}
