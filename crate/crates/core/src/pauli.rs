//! Pauli strings in binary-symplectic form.
//!
//! A [`PauliString`] stores the operator `i^phase X^x Z^z`, where `x` and `z`
//! are bit masks over the qubits (bit `q` addresses qubit `q`) and the phase
//! power is taken mod 4. The Hermitian string labelled `Y` is therefore
//! `x = 1, z = 1, phase = 1`, since `Y = i X Z`.
//!
//! In text form the leftmost character is qubit 0: `"XIZ"` has X on qubit 0
//! and Z on qubit 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported register; masks are single machine words.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

#[inline]
fn mask_fits(n: usize, m: u64) -> bool {
    n >= MAX_QUBITS || (m >> n) == 0
}

impl PauliString {
    pub fn new(n: usize, x_mask: u64, z_mask: u64, phase_power: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "Pauli strings need 1..={MAX_QUBITS} qubits, got {n}"
            )));
        }
        if !mask_fits(n, x_mask) || !mask_fits(n, z_mask) {
            return Err(Error::InvalidArgument(format!(
                "masks x={x_mask:#b} z={z_mask:#b} do not fit in {n} qubits"
            )));
        }
        Ok(Self {
            n,
            x: x_mask,
            z: z_mask,
            phase: phase_power & 3,
        })
    }

    /// The Hermitian string `X^x Z^z` with the `+1` sign, i.e. with the phase
    /// power `|x & z| mod 4` that turns every `XZ` pair into a `Y`.
    pub fn hermitian(n: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        let phase = ((x_mask & z_mask).count_ones() & 3) as u8;
        Self::new(n, x_mask, z_mask, phase)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0, 0, 0)
    }

    /// A single-qubit Hermitian Pauli (`'X'`, `'Y'` or `'Z'`) on `qubit`.
    pub fn single(n: usize, qubit: usize, kind: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitOutOfRange { index: qubit, n });
        }
        let bit = 1u64 << qubit;
        match kind {
            'I' => Self::identity(n),
            'X' => Self::hermitian(n, bit, 0),
            'Y' => Self::hermitian(n, bit, bit),
            'Z' => Self::hermitian(n, 0, bit),
            other => Err(Error::InvalidPauli(other.to_string())),
        }
    }

    /// Builds the Hermitian string whose flat spectrum index is
    /// `(x << n) | z`.
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        let low = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        let index = index as u64;
        Self::hermitian(n, index >> n, index & low)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    #[inline]
    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    /// Position of this string in a flat spectrum array, `(x << n) | z`.
    /// Only meaningful for `n <= 31`.
    #[inline]
    pub fn index(&self) -> usize {
        ((self.x << self.n) | self.z) as usize
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Phase power of the unsigned Hermitian string with the same masks.
    #[inline]
    fn hermitian_phase(&self) -> u8 {
        ((self.x & self.z).count_ones() & 3) as u8
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase + 4 - self.hermitian_phase()) % 2 == 0
    }

    /// `+1` or `-1` relative to the Hermitian convention, `None` when the
    /// operator carries a factor of `±i`.
    pub fn sign(&self) -> Option<i8> {
        match (self.phase + 4 - self.hermitian_phase()) & 3 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// The same masks with the `+1` Hermitian phase.
    pub fn unsigned(&self) -> Self {
        Self {
            phase: self.hermitian_phase(),
            ..*self
        }
    }

    pub fn negate(&self) -> Self {
        Self {
            phase: (self.phase + 2) & 3,
            ..*self
        }
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    /// Exact product `self * other`.
    ///
    /// `(i^p X^a Z^b)(i^q X^c Z^d) = i^(p+q) (-1)^|b&c| X^(a^c) Z^(b^d)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let swaps = (self.z & other.x).count_ones();
        let phase = (self.phase as u32 + other.phase as u32 + 2 * swaps) & 3;
        Ok(Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: phase as u8,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    // Conjugation rules `P -> U P U^dagger` for the Clifford generators.

    #[inline]
    pub(crate) fn conjugate_h(&mut self, q: usize) {
        let bit = 1u64 << q;
        let (xb, zb) = (self.x & bit, self.z & bit);
        if xb != 0 && zb != 0 {
            // XZ -> ZX = -XZ
            self.phase = (self.phase + 2) & 3;
        }
        self.x = (self.x & !bit) | zb;
        self.z = (self.z & !bit) | xb;
    }

    #[inline]
    pub(crate) fn conjugate_s(&mut self, q: usize) {
        let bit = 1u64 << q;
        if self.x & bit != 0 {
            // X -> Y = iXZ
            self.phase = (self.phase + 1) & 3;
            self.z ^= bit;
        }
    }

    #[inline]
    pub(crate) fn conjugate_cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1u64 << control, 1u64 << target);
        if self.x & cb != 0 {
            self.x ^= tb;
        }
        if self.z & tb != 0 {
            self.z ^= cb;
        }
    }

    /// Dense `2^n x 2^n` matrix of the operator, row-major. Test and
    /// debugging helper; only sensible for small `n`.
    pub fn to_dense(&self) -> Vec<num_complex::Complex64> {
        use num_complex::Complex64;
        let dim = 1usize << self.n;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        let ph = crate::statevector::i_pow(self.phase as u32);
        for col in 0..dim {
            let sign = if (self.z & col as u64).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let row = col ^ self.x as usize;
            m[row * dim + col] = ph * sign;
        }
        m
    }

    /// Text label without sign, e.g. `"XIZ"`.
    pub fn label(&self) -> String {
        (0..self.n)
            .map(|q| {
                let bit = 1u64 << q;
                match (self.x & bit != 0, self.z & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                }
            })
            .collect()
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a Hermitian string over `{I, X, Y, Z}`.
    fn from_str(text: &str) -> Result<Self> {
        if text.is_empty() || text.chars().count() > MAX_QUBITS {
            return Err(Error::InvalidPauli(text.to_string()));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in text.chars().enumerate() {
            let bit = 1u64 << q;
            match c {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                _ => return Err(Error::InvalidPauli(text.to_string())),
            }
        }
        Self::hermitian(text.chars().count(), x, z)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match (self.phase + 4 - self.hermitian_phase()) & 3 {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}
