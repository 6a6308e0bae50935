//! GUE Hamiltonians and exact time evolution.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{guard, Error, Result};
use crate::rng::gaussian_pair;
use crate::statevector::StateVector;

pub const MAX_HAMILTONIAN_QUBITS: usize = 12;

/// Dense Hermitian matrix on `n` qubits.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    n: usize,
    matrix: Array2<Complex64>,
}

impl Hamiltonian {
    pub fn from_matrix(n: usize, matrix: Array2<Complex64>) -> Result<Self> {
        guard("Hamiltonian", n, MAX_HAMILTONIAN_QUBITS)?;
        let dim = 1usize << n;
        if matrix.dim() != (dim, dim) {
            return Err(Error::InvalidArgument(format!(
                "expected a {dim}x{dim} matrix, got {:?}",
                matrix.dim()
            )));
        }
        let h = Self { n, matrix };
        let r = h.hermiticity_residual();
        if r > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (residual {r})"
            )));
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// `max |H - H^dagger|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = &self.matrix;
        let dim = m.nrows();
        let mut r: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                r = r.max((m[[i, j]] - m[[j, i]].conj()).norm());
            }
        }
        r
    }

    /// `tr(H^2) = sum |H_ij|^2`.
    pub fn trace_squared(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn eigendecompose(&self) -> Result<Propagator> {
        let (vals, vecs) = self
            .matrix
            .eigh(UPLO::Upper)
            .map_err(|e| Error::Numerical(format!("eigensolver failed: {e}")))?;
        Ok(Propagator {
            n: self.n,
            eigenvalues: vals,
            eigenvectors: vecs,
        })
    }
}

/// `H = (A + A^dagger) / 2` with i.i.d. complex Gaussian `A`, scaled so
/// every entry of `H` has variance `(2^n + 1) / 4^n` and hence
/// `E[tr H^2] = 2^n + 1`.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Hamiltonian> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Hamiltonian needs at least one qubit".into(),
        ));
    }
    guard("GUE sampling", n, MAX_HAMILTONIAN_QUBITS)?;
    let dim = 1usize << n;
    let sigma = ((dim as f64 + 1.0) / (dim * dim) as f64).sqrt();
    let mut a = Array2::<Complex64>::zeros((dim, dim));
    for v in a.iter_mut() {
        let (re, im) = gaussian_pair(rng);
        *v = Complex64::new(re, im) * sigma;
    }
    let mut h = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            h[[i, j]] = 0.5 * (a[[i, j]] + a[[j, i]].conj());
        }
    }
    Ok(Hamiltonian { n, matrix: h })
}

/// Spectral decomposition `H = V diag(lambda) V^dagger`.
#[derive(Clone, Debug)]
pub struct Propagator {
    n: usize,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<Complex64>,
}

impl Propagator {
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// Prepares `psi(0)` for evolution to many times.
    pub fn prepare(&self, state: &StateVector) -> Result<PreparedEvolution<'_>> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, state.n()));
        }
        let psi = Array1::from(state.amplitudes().to_vec());
        let coeffs = self.eigenvectors.t().mapv(|v| v.conj()).dot(&psi);
        Ok(PreparedEvolution { prop: self, coeffs })
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        self.prepare(state)?.at(t)
    }
}

/// Eigenbasis coefficients of an initial state.
pub struct PreparedEvolution<'a> {
    prop: &'a Propagator,
    coeffs: Array1<Complex64>,
}

impl PreparedEvolution<'_> {
    /// `e^{-iHt} |psi(0)>`.
    pub fn at(&self, t: f64) -> Result<StateVector> {
        let phased: Array1<Complex64> = self
            .coeffs
            .iter()
            .zip(self.prop.eigenvalues.iter())
            .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t))
            .collect();
        let out = self.prop.eigenvectors.dot(&phased);
        let s = StateVector::from_amplitudes_unchecked(self.prop.n, out.to_vec())?;
        s.check_normalized()?;
        Ok(s)
    }
}

/// `e^{-iHt} |state>` by full diagonalization.
pub fn evolve(state: &StateVector, h: &Hamiltonian, t: f64) -> Result<StateVector> {
    if state.n() != h.n {
        return Err(Error::DimensionMismatch(h.n, state.n()));
    }
    h.eigendecompose()?.evolve(state, t)
}
