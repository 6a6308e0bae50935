use num_complex::Complex64;

use super::circuit::{CliffordCircuit, Gate};
use crate::error::{guard, Error, Result};
use crate::pauli::{PauliString, MAX_QUBITS};
use crate::statevector::{i_pow, StateVector, MAX_DENSE_QUBITS};

/// Largest register for which the full stabilizer group is materialized.
pub const MAX_GROUP_QUBITS: usize = 16;

/// Signed stabilizer generators of a pure state.
///
/// Each generator is a Hermitian [`PauliString`] whose phase carries the
/// sign, so `-Z` is stored with phase power 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    generators: Vec<PauliString>,
}

/// Rank over GF(2) of the symplectic vectors `(x, z)`.
fn symplectic_rank(ps: &[PauliString]) -> usize {
    let mut rows: Vec<u128> = ps
        .iter()
        .map(|p| ((p.x_mask() as u128) << 64) | p.z_mask() as u128)
        .collect();
    let mut rank = 0;
    for bit in (0..128).rev() {
        let m = 1u128 << bit;
        if let Some(i) = (rank..rows.len()).find(|&i| rows[i] & m != 0) {
            rows.swap(rank, i);
            let pivot = rows[rank];
            for (j, r) in rows.iter_mut().enumerate() {
                if j != rank && *r & m != 0 {
                    *r ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

impl Tableau {
    /// `|0...0>`, stabilized by `+Z_q` for every qubit.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "tableaux need 1..={MAX_QUBITS} qubits, got {n}"
            )));
        }
        let generators = (0..n)
            .map(|q| PauliString::hermitian(n, 0, 1 << q))
            .collect::<Result<_>>()?;
        Ok(Self { n, generators })
    }

    /// Validates `n` signed Hermitian, independent, pairwise commuting
    /// generators.
    pub fn from_generators(generators: Vec<PauliString>) -> Result<Self> {
        let n = generators
            .first()
            .map(|g| g.n())
            .ok_or_else(|| Error::InvalidArgument("no generators".into()))?;
        if generators.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{n}-qubit tableau needs {n} generators, got {}",
                generators.len()
            )));
        }
        for g in &generators {
            if g.n() != n {
                return Err(Error::DimensionMismatch(n, g.n()));
            }
            if g.sign().is_none() {
                return Err(Error::InvalidArgument(format!(
                    "generator {g} is not Hermitian"
                )));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_unchecked(b) {
                    return Err(Error::InvalidArgument(format!(
                        "generators {a} and {b} anticommute"
                    )));
                }
            }
        }
        if symplectic_rank(&generators) != n {
            return Err(Error::InvalidArgument(
                "generators are not independent".into(),
            ));
        }
        Ok(Self { n, generators })
    }

    /// Tableau of `circuit |0...0>`.
    pub fn from_circuit(circuit: &CliffordCircuit) -> Result<Self> {
        let mut t = Self::new(circuit.n())?;
        t.apply_circuit(circuit)?;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// `+1` or `-1` per generator.
    pub fn signs(&self) -> Vec<i8> {
        self.generators
            .iter()
            .map(|g| g.sign().expect("generators stay Hermitian"))
            .collect()
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        let c = CliffordCircuit::from_gates(self.n, vec![gate])?;
        self.apply_circuit(&c)
    }

    pub fn apply_circuit(&mut self, circuit: &CliffordCircuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, circuit.n()));
        }
        for g in self.generators.iter_mut() {
            for gate in circuit.gates() {
                gate.conjugate(g);
            }
        }
        Ok(())
    }

    /// Dense vector of the stabilized state, with the first nonzero
    /// amplitude real and positive.
    pub fn to_statevector(&self) -> Result<StateVector> {
        guard("dense state vector", self.n, MAX_DENSE_QUBITS)?;
        let dim = 1usize << self.n;
        // generic start vector: its overlap with any stabilizer state is nonzero
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|i| {
                let a = 1.0 + 0.3 * ((i as f64 + 1.0) * 0.754_877_666).fract();
                Complex64::from_polar(a, 0.5 + 2.399_963 * i as f64)
            })
            .collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        for g in &self.generators {
            let ph = i_pow(g.phase_power() as u32);
            let (x, z) = (g.x_mask() as usize, g.z_mask() as usize);
            for (y, a) in amps.iter().enumerate() {
                let s = if (z & y).count_ones() % 2 == 0 {
                    ph
                } else {
                    -ph
                };
                scratch[y ^ x] = s * a;
            }
            for (a, b) in amps.iter_mut().zip(&scratch) {
                *a = 0.5 * (*a + b);
            }
            let ns: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if ns < 1e-200 {
                return Err(Error::Numerical("stabilizer projection vanished".into()));
            }
            let inv = 1.0 / ns.sqrt();
            amps.iter_mut().for_each(|a| *a *= inv);
        }
        let mut s = StateVector::from_amplitudes_unchecked(self.n, amps)?;
        s.normalize()?;
        s.canonicalize_phase();
        Ok(s)
    }

    /// All `2^n` signed members of the stabilizer group.
    pub fn stabilizer_group(&self) -> Result<Vec<PauliString>> {
        guard("stabilizer group", self.n, MAX_GROUP_QUBITS)?;
        let size = 1usize << self.n;
        let mut out = Vec::with_capacity(size);
        let mut cur = PauliString::identity(self.n)?;
        out.push(cur);
        // Gray code: step i flips generator trailing_zeros(i)
        for i in 1..size {
            let g = &self.generators[i.trailing_zeros() as usize];
            cur = cur.mul(g)?;
            if cur.sign().is_none() {
                return Err(Error::Numerical(format!(
                    "non-Hermitian group element {cur}: generators do not commute"
                )));
            }
            out.push(cur);
        }
        Ok(out)
    }
}
