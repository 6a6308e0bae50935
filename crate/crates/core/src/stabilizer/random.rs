//! Exactly uniform Clifford sampling.
//!
//! The symplectic part is built qubit by qubit: at step `k` a uniformly
//! random anticommuting pair `(P, Q)` supported on qubits `k..n` is drawn
//! and a circuit `V_k` is synthesized with `V_k X_k V_k^dagger = ±P` and
//! `V_k Z_k V_k^dagger = ±Q`, acting trivially on qubits below `k`. The
//! product `V_0 V_1 ... V_{n-1}` is then uniform over the symplectic group.
//! A uniformly random Pauli layer applied first makes the signs uniform,
//! so the circuit unitary is uniform over the Clifford group modulo global
//! phase.

use rand::Rng;

use super::circuit::{CliffordCircuit, Gate};
use crate::error::Result;
use crate::pauli::PauliString;

fn range_mask(lo: usize, n: usize) -> u64 {
    let hi = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    hi & !((1u64 << lo) - 1)
}

fn random_pauli_on<R: Rng + ?Sized>(n: usize, mask: u64, rng: &mut R) -> PauliString {
    let x = rng.gen::<u64>() & mask;
    let z = rng.gen::<u64>() & mask;
    PauliString::hermitian(n, x, z).expect("masks inside register")
}

/// Records gates while conjugating the tracked Paulis.
struct Builder<'a> {
    gates: Vec<Gate>,
    tracked: [&'a mut PauliString; 2],
}

impl Builder<'_> {
    fn push(&mut self, g: Gate) {
        for p in self.tracked.iter_mut() {
            g.conjugate(p);
        }
        self.gates.push(g);
    }

    /// H on Z, S on Y, so the support of `tracked[which]` becomes X-type
    /// on every qubit in `mask`.
    fn clear_z(&mut self, which: usize, mask: u64) {
        let p = *self.tracked[which];
        for q in 0..64 {
            let bit = 1u64 << q;
            if mask & bit == 0 || p.z_mask() & bit == 0 {
                continue;
            }
            if p.x_mask() & bit != 0 {
                self.push(Gate::S(q));
            } else {
                self.push(Gate::H(q));
            }
        }
    }

    /// CNOTs from `k` onto every other qubit of an X-type support.
    fn fold_x_into(&mut self, which: usize, k: usize) {
        let x = self.tracked[which].x_mask();
        for q in 0..64 {
            if q != k && x & (1u64 << q) != 0 {
                self.push(Gate::Cnot(k, q));
            }
        }
    }
}

/// Gates `C` with `C P C^dagger = ±X_k` and `C Q C^dagger = ±Z_k`.
fn reduce_pair(k: usize, mut p: PauliString, mut q: PauliString) -> Vec<Gate> {
    let n = p.n();
    let upper = range_mask(k, n);
    let mut b = Builder {
        gates: Vec::new(),
        tracked: [&mut p, &mut q],
    };
    b.clear_z(0, upper);
    let x = b.tracked[0].x_mask();
    if x & (1 << k) == 0 {
        let j = x.trailing_zeros() as usize;
        b.push(Gate::Cnot(k, j));
        b.push(Gate::Cnot(j, k));
        b.push(Gate::Cnot(k, j));
    }
    b.fold_x_into(0, k);
    b.push(Gate::H(k));
    // P = ±Z_k now, so Q carries X on qubit k
    b.clear_z(1, upper);
    b.fold_x_into(1, k);
    b.push(Gate::H(k));
    debug_assert_eq!((b.tracked[0].x_mask(), b.tracked[0].z_mask()), (1 << k, 0));
    debug_assert_eq!((b.tracked[1].x_mask(), b.tracked[1].z_mask()), (0, 1 << k));
    b.gates
}

/// Uniformly random Pauli layer written with H and S (`Z = SS`,
/// `X = H SS H`), appended to `circuit`.
pub fn random_pauli_layer<R: Rng + ?Sized>(circuit: &mut CliffordCircuit, rng: &mut R) {
    for q in 0..circuit.n() {
        let v: u8 = rng.gen_range(0..4);
        if v & 1 != 0 {
            circuit.push_unchecked(Gate::S(q));
            circuit.push_unchecked(Gate::S(q));
        }
        if v & 2 != 0 {
            circuit.push_unchecked(Gate::H(q));
            circuit.push_unchecked(Gate::S(q));
            circuit.push_unchecked(Gate::S(q));
            circuit.push_unchecked(Gate::H(q));
        }
    }
}

/// A circuit whose unitary is uniform over the `n`-qubit Clifford group up
/// to global phase.
pub fn sample_random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordCircuit> {
    let mut circuit = CliffordCircuit::new(n)?;
    let mut layers = Vec::with_capacity(n);
    for k in 0..n {
        let mask = range_mask(k, n);
        let p = loop {
            let p = random_pauli_on(n, mask, rng);
            if !p.is_identity() {
                break p;
            }
        };
        let q = loop {
            let q = random_pauli_on(n, mask, rng);
            if !q.commutes_unchecked(&p) {
                break q;
            }
        };
        layers.push(reduce_pair(k, p, q));
    }
    random_pauli_layer(&mut circuit, rng);
    // U = V_0 V_1 ... V_{n-1} Pi: V_{n-1} acts right after the Pauli layer
    for reduce in layers.iter().rev() {
        for &g in reduce.iter().rev() {
            match g {
                Gate::S(_) => (0..3).for_each(|_| circuit.push_unchecked(g)),
                _ => circuit.push_unchecked(g),
            }
        }
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stabilizer::Tableau;

    fn within_5_sigma(count: usize, total: usize, cells: usize) -> bool {
        let p = 1.0 / cells as f64;
        let mean = total as f64 * p;
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - mean).abs() <= 5.0 * sd
    }

    #[test]
    fn reduction_maps_pair_to_canonical_axes() {
        let mut rng = rng_from_seed(5);
        for n in 1..=6 {
            for k in 0..n {
                for _ in 0..20 {
                    let mask = range_mask(k, n);
                    let p = loop {
                        let p = random_pauli_on(n, mask, &mut rng);
                        if !p.is_identity() {
                            break p;
                        }
                    };
                    let q = loop {
                        let q = random_pauli_on(n, mask, &mut rng);
                        if !q.commutes_unchecked(&p) {
                            break q;
                        }
                    };
                    let c = CliffordCircuit::from_gates(n, reduce_pair(k, p, q)).unwrap();
                    let pp = c.conjugate(&p).unwrap();
                    let qq = c.conjugate(&q).unwrap();
                    assert_eq!((pp.x_mask(), pp.z_mask()), (1 << k, 0));
                    assert_eq!((qq.x_mask(), qq.z_mask()), (0, 1 << k));
                    assert!(c.gates().iter().all(|g| match *g {
                        Gate::H(a) | Gate::S(a) => a >= k,
                        Gate::Cnot(a, b) => a >= k && b >= k,
                    }));
                }
            }
        }
    }

    #[test]
    fn single_qubit_states_are_uniform() {
        let mut rng = rng_from_seed(2024);
        let total = 6000;
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..total {
            let c = sample_random_clifford(1, &mut rng).unwrap();
            let t = Tableau::from_circuit(&c).unwrap();
            *counts.entry(t.generators()[0].to_string()).or_default() += 1;
        }
        let mut keys: Vec<_> = counts.keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["-X", "-Y", "-Z", "X", "Y", "Z"]);
        for c in counts.values() {
            assert!(within_5_sigma(*c, total, 6), "{counts:?}");
        }
    }

    #[test]
    fn single_qubit_cliffords_are_uniform() {
        let mut rng = rng_from_seed(8);
        let total = 24_000;
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let mut counts: HashMap<(String, String), usize> = HashMap::new();
        for _ in 0..total {
            let c = sample_random_clifford(1, &mut rng).unwrap();
            let key = (
                c.conjugate(&x).unwrap().to_string(),
                c.conjugate(&z).unwrap().to_string(),
            );
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        assert!(
            counts.values().all(|&c| within_5_sigma(c, total, 24)),
            "{counts:?}"
        );
    }

    #[test]
    fn two_qubit_pauli_image_is_uniform() {
        // 15 non-identity strings times two signs
        let mut rng = rng_from_seed(99);
        let total = 30_000;
        let xi: PauliString = "XI".parse().unwrap();
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..total {
            let c = sample_random_clifford(2, &mut rng).unwrap();
            let img = c.conjugate(&xi).unwrap();
            assert!(img.sign().is_some() && !img.is_identity());
            *counts.entry(img.to_string()).or_default() += 1;
        }
        assert_eq!(counts.len(), 30);
        assert!(
            counts.values().all(|&c| within_5_sigma(c, total, 30)),
            "{counts:?}"
        );
    }

    #[test]
    fn sampled_circuits_map_paulis_to_signed_paulis() {
        let mut rng = rng_from_seed(1);
        let c = sample_random_clifford(3, &mut rng).unwrap();
        let mut psi = crate::statevector::StateVector::zero(3).unwrap();
        psi.apply_h(0).unwrap();
        psi.apply_t(0).unwrap();
        psi.apply_cnot(0, 2).unwrap();
        let mut phi = psi.clone();
        phi.apply_circuit(&c).unwrap();
        for idx in 1..64 {
            let s = PauliString::from_index(3, idx).unwrap();
            let img = c.conjugate(&s).unwrap();
            assert!(img.sign().is_some());
            // <phi| U s U^dag |phi> = <psi| s |psi>
            let lhs = phi.expectation(&img).unwrap();
            let rhs = psi.expectation(&s).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
