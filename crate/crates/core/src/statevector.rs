//! Dense state vectors and gate kernels.
//!
//! Amplitude index bit `q` is qubit `q`, matching the Pauli mask layout.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::pauli::PauliString;
use crate::stabilizer::{CliffordCircuit, Gate};

/// Largest register held densely.
pub const MAX_DENSE_QUBITS: usize = 20;

pub(crate) const NORM_TOL: f64 = 1e-10;

/// `i^k`.
#[inline]
pub fn i_pow(k: u32) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "state needs at least one qubit".into(),
            ));
        }
        guard("dense state vector", n, MAX_DENSE_QUBITS)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps amplitudes, checking length and normalization.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_amplitudes_unchecked(n, amps)?;
        s.check_normalized()?;
        Ok(s)
    }

    /// Wraps amplitudes, checking only the length.
    pub fn from_amplitudes_unchecked(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "state needs at least one qubit".into(),
            ));
        }
        guard("dense state vector", n, MAX_DENSE_QUBITS)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes for {n} qubits, got {}",
                1usize << n,
                amps.len()
            )));
        }
        Ok(Self { n, amps })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let ns = self.norm_sqr();
        if (ns - 1.0).abs() > NORM_TOL {
            Err(Error::NotNormalized(ns))
        } else {
            Ok(())
        }
    }

    pub fn normalize(&mut self) -> Result<()> {
        let ns = self.norm_sqr();
        if ns.is_nan() || ns <= 0.0 || !ns.is_finite() {
            return Err(Error::Numerical(format!(
                "cannot normalize vector with norm^2 {ns}"
            )));
        }
        let inv = 1.0 / ns.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_dims(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// `self ⊗ other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n + other.n;
        guard("dense state vector", n, MAX_DENSE_QUBITS)?;
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { n, amps })
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.h_kernel(q);
        Ok(())
    }

    pub fn apply_s(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.phase_kernel(q, Complex64::i());
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidArgument("CNOT needs distinct qubits".into()));
        }
        self.cnot_kernel(control, target);
        Ok(())
    }

    /// `T = diag(1, e^{-i pi/4})` on qubit `q`.
    pub fn apply_t(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.phase_kernel(q, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4));
        Ok(())
    }

    /// `R_z(theta) = exp(-i theta Z / 2)` on qubit `q`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let lo = Complex64::from_polar(1.0, -0.5 * theta);
        let hi = lo.conj();
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => self.apply_h(q),
            Gate::S(q) => self.apply_s(q),
            Gate::Cnot(c, t) => self.apply_cnot(c, t),
        }
    }

    /// Applies the gates of `circuit` in order.
    pub fn apply_circuit(&mut self, circuit: &CliffordCircuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::DimensionMismatch(circuit.n(), self.n));
        }
        for &g in circuit.gates() {
            match g {
                Gate::H(q) => self.h_kernel(q),
                Gate::S(q) => self.phase_kernel(q, Complex64::i()),
                Gate::Cnot(c, t) => self.cnot_kernel(c, t),
            }
        }
        Ok(())
    }

    /// `sigma |self>`.
    pub fn apply_pauli(&self, sigma: &PauliString) -> Result<Self> {
        if sigma.n() != self.n {
            return Err(Error::DimensionMismatch(sigma.n(), self.n));
        }
        let ph = i_pow(sigma.phase_power() as u32);
        let (x, z) = (sigma.x_mask() as usize, sigma.z_mask() as usize);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (y, a) in self.amps.iter().enumerate() {
            let s = if (z & y).count_ones() % 2 == 0 {
                ph
            } else {
                -ph
            };
            out[y ^ x] = s * a;
        }
        Ok(Self {
            n: self.n,
            amps: out,
        })
    }

    /// `<self|sigma|self>` as a complex number.
    pub fn expectation_complex(&self, sigma: &PauliString) -> Result<Complex64> {
        if sigma.n() != self.n {
            return Err(Error::DimensionMismatch(sigma.n(), self.n));
        }
        let (x, z) = (sigma.x_mask() as usize, sigma.z_mask() as usize);
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, a) in self.amps.iter().enumerate() {
            let term = self.amps[y ^ x].conj() * a;
            if (z & y).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Ok(acc * i_pow(sigma.phase_power() as u32))
    }

    /// Real expectation value of a Hermitian Pauli string.
    pub fn expectation(&self, sigma: &PauliString) -> Result<f64> {
        if !sigma.is_hermitian() {
            return Err(Error::InvalidArgument(format!("{sigma} is not Hermitian")));
        }
        let e = self.expectation_complex(sigma)?;
        if e.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!(
                "imaginary expectation {} for Hermitian {sigma}",
                e.im
            )));
        }
        Ok(e.re)
    }

    /// Multiplies by a global phase so the first significant amplitude is
    /// real and positive.
    pub fn canonicalize_phase(&mut self) {
        if let Some(a) = self.amps.iter().find(|a| a.norm_sqr() > 1e-12).copied() {
            let rot = a.conj() / a.norm();
            self.amps.iter_mut().for_each(|x| *x *= rot);
        }
    }

    #[inline]
    fn h_kernel(&mut self, q: usize) {
        let bit = 1usize << q;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * r;
                self.amps[i | bit] = (a - b) * r;
            }
        }
    }

    #[inline]
    fn phase_kernel(&mut self, q: usize, phase: Complex64) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
    }

    #[inline]
    fn cnot_kernel(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateVectorFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateVectorFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// On-disk form: `{"n": int, "amplitudes": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct StateVectorFile {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl From<&StateVector> for StateVectorFile {
    fn from(s: &StateVector) -> Self {
        Self {
            n: s.n,
            amplitudes: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateVectorFile> for StateVector {
    type Error = Error;

    fn try_from(f: StateVectorFile) -> Result<Self> {
        let amps = f
            .amplitudes
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        StateVector::from_amplitudes(f.n, amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_pair, rng_from_seed};

    pub(crate) fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = rng_from_seed(seed);
        let amps = (0..1 << n)
            .map(|_| {
                let (a, b) = gaussian_pair(&mut rng);
                Complex64::new(a, b)
            })
            .collect();
        let mut s = StateVector::from_amplitudes_unchecked(n, amps).unwrap();
        s.normalize().unwrap();
        s
    }

    fn plus() -> StateVector {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_h(0).unwrap();
        s
    }

    #[test]
    fn t_gate_examples() {
        let mut z = StateVector::zero(1).unwrap();
        z.apply_t(0).unwrap();
        assert_eq!(z, StateVector::zero(1).unwrap());

        let mut p = plus();
        p.apply_t(0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = Complex64::from_polar(r, -std::f64::consts::FRAC_PI_4);
        assert!((p.amplitudes()[0] - r).norm() < 1e-15);
        assert!((p.amplitudes()[1] - expect).norm() < 1e-15);

        let orig = random_state(4, 3);
        let mut s = orig.clone();
        for _ in 0..8 {
            s.apply_t(2).unwrap();
        }
        for (a, b) in s.amplitudes().iter().zip(orig.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(matches!(
            s.apply_t(4),
            Err(Error::QubitOutOfRange { index: 4, n: 4 })
        ));
    }

    #[test]
    fn rz_examples() {
        let orig = random_state(3, 5);
        let mut s = orig.clone();
        s.apply_rz(1, 0.0).unwrap();
        assert_eq!(s, orig);

        // with T = diag(1, e^{-i pi/4}): R_z(pi/4) = e^{-i pi/8} T^dagger
        let mut a = orig.clone();
        a.apply_rz(0, std::f64::consts::FRAC_PI_4).unwrap();
        let mut b = orig.clone();
        for _ in 0..7 {
            b.apply_t(0).unwrap();
        }
        assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-12);
        let ratio = a.amplitudes()[0] / b.amplitudes()[0];
        assert!((ratio - Complex64::from_polar(1.0, -std::f64::consts::PI / 8.0)).norm() < 1e-12);
        // and R_z(-pi/4) = e^{i pi/8} T
        let mut a = orig.clone();
        a.apply_rz(0, -std::f64::consts::FRAC_PI_4).unwrap();
        let mut b = orig.clone();
        b.apply_t(0).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!(
                (x - y * Complex64::from_polar(1.0, std::f64::consts::PI / 8.0)).norm() < 1e-12
            );
        }

        let mut c = orig.clone();
        c.apply_rz(2, 0.37).unwrap();
        c.apply_rz(2, -0.37).unwrap();
        for (x, y) in c.amplitudes().iter().zip(orig.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn fidelity_examples() {
        let a = random_state(3, 9);
        assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-14);
        let e0 = StateVector::basis(2, 0).unwrap();
        let e3 = StateVector::basis(2, 3).unwrap();
        assert_eq!(e0.fidelity(&e3).unwrap(), 0.0);
        let z = StateVector::zero(1).unwrap();
        assert!((z.fidelity(&plus()).unwrap() - 0.5).abs() < 1e-15);
        assert!(z.fidelity(&e0).is_err());
    }

    #[test]
    fn gates_preserve_norm() {
        let mut s = random_state(5, 11);
        for q in 0..5 {
            s.apply_h(q).unwrap();
            s.apply_t(q).unwrap();
            s.apply_s((q + 1) % 5).unwrap();
            s.apply_cnot(q, (q + 2) % 5).unwrap();
            s.apply_rz(q, 0.3 * q as f64).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(s.apply_cnot(1, 1).is_err());
    }

    #[test]
    fn expectation_matches_dense_operator() {
        let s = random_state(3, 21);
        for idx in 0..64 {
            let sigma = PauliString::from_index(3, idx).unwrap();
            let m = sigma.to_dense();
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..8 {
                for j in 0..8 {
                    acc += s.amplitudes()[i].conj() * m[i * 8 + j] * s.amplitudes()[j];
                }
            }
            assert!(acc.im.abs() < 1e-12);
            assert!((acc.re - s.expectation(&sigma).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = random_state(2, 4);
        let back = StateVector::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        assert!(StateVector::from_json(r#"{"n":1,"amplitudes":[[1,0],[1,0]]}"#).is_err());
        assert!(StateVector::from_json(r#"{"n":2,"amplitudes":[[1,0]]}"#).is_err());
        assert!(StateVector::from_json("{").is_err());
    }

    #[test]
    fn tensor_layout() {
        // |1> ⊗ |0> puts qubit 0 in state 1: index 1
        let one = StateVector::basis(1, 1).unwrap();
        let zero = StateVector::zero(1).unwrap();
        let t = one.tensor(&zero).unwrap();
        assert_eq!(t, StateVector::basis(2, 1).unwrap());
    }
}
