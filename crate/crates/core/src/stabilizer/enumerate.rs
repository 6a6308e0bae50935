//! Exhaustive enumeration of pure stabilizer states.
//!
//! Every stabilizer state is, up to global phase, uniquely
//!
//! ```text
//! |phi> = 2^{-k/2} sum_{x in F_2^k} i^{l.x} (-1)^{x^T Q x} |R x + t>
//! ```
//!
//! with `R` an `n x k` basis in reduced row-echelon form, `t` a shift that
//! vanishes on the pivot coordinates, `l` a linear phase and `Q` an upper
//! triangular binary matrix. The diagonal of `Q` is needed: together with
//! `l` it gives each basis direction one of the four phases `1, i, -1, -i`.
//! The supports `(R, t)` are few (2451 at `n = 5`) and are materialized;
//! the phase choices are expanded lazily.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::statevector::{i_pow, StateVector};

/// Enumeration is exhaustive, so the register is capped.
pub const MAX_ENUMERATION_QUBITS: usize = 5;

/// `2^n prod_{k=1..n} (2^k + 1)`.
pub fn stabilizer_state_count(n: usize) -> u64 {
    (1..=n as u32).fold(1u64 << n, |acc, k| acc * ((1u64 << k) + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StabilizerStateDescriptor {
    pub n: usize,
    /// Basis vectors `R e_i` as n-bit masks; the lowest set bit of each is
    /// its pivot, pivots strictly increase and no other vector has a pivot
    /// bit set.
    pub basis: Vec<u64>,
    pub shift: u64,
    /// Bit `i` is `l_i`.
    pub linear: u32,
    /// Row `i` of `Q`; only bits `j >= i` may be set.
    pub quadratic: Vec<u32>,
}

impl StabilizerStateDescriptor {
    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            basis: Vec::new(),
            shift: 0,
            linear: 0,
            quadratic: Vec::new(),
        }
    }

    #[inline]
    fn point(&self, x: u32) -> usize {
        let mut y = self.shift;
        for (i, b) in self.basis.iter().enumerate() {
            if x >> i & 1 == 1 {
                y ^= b;
            }
        }
        y as usize
    }

    /// Phase power of amplitude `x`: `l.x + 2 x^T Q x` mod 4.
    #[inline]
    fn phase(&self, x: u32) -> u32 {
        phase_power(self.linear, &self.quadratic, x)
    }

    pub fn to_statevector(&self) -> Result<StateVector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n];
        let norm = (0.5f64).powf(self.k() as f64 / 2.0);
        for x in 0..1u32 << self.k() {
            amps[self.point(x)] = i_pow(self.phase(x)) * norm;
        }
        StateVector::from_amplitudes(self.n, amps)
    }

    /// `<phi_d | psi>`.
    pub fn overlap(&self, psi: &StateVector) -> Result<Complex64> {
        if psi.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, psi.n()));
        }
        let a = psi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..1u32 << self.k() {
            // conj(i^p) = i^{-p}
            acc += i_pow(4 - self.phase(x)) * a[self.point(x)];
        }
        Ok(acc * (0.5f64).powf(self.k() as f64 / 2.0))
    }
}

#[inline]
fn phase_power(linear: u32, quadratic: &[u32], x: u32) -> u32 {
    let mut quad = 0u32;
    for (i, row) in quadratic.iter().enumerate() {
        if x >> i & 1 == 1 {
            quad ^= (row & x).count_ones() & 1;
        }
    }
    ((linear & x).count_ones() + 2 * quad) & 3
}

/// An affine support `{R x + t}`.
#[derive(Clone, Debug)]
pub(crate) struct Support {
    pub basis: Vec<u64>,
    pub shift: u64,
    /// Enumeration ordinal of the first descriptor on this support.
    pub offset: u64,
}

impl Support {
    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// `4^k 2^{k(k-1)/2}` phase choices.
    pub fn phase_count(&self) -> u64 {
        let k = self.k() as u32;
        1u64 << (2 * k + k * k.saturating_sub(1) / 2)
    }

    /// Splits a phase index into `(l, Q)`: the low `k` bits are `l`, the
    /// next `k` the diagonal of `Q`, the rest its strict upper triangle.
    pub fn phases(&self, index: u64) -> (u32, Vec<u32>) {
        let k = self.k();
        let linear = (index & ((1 << k) - 1)) as u32;
        let diag = (index >> k) as u32;
        let mut upper = index >> (2 * k);
        let mut quadratic = vec![0u32; k];
        for (i, row) in quadratic.iter_mut().enumerate() {
            *row |= (diag >> i & 1) << i;
            for j in i + 1..k {
                *row |= ((upper & 1) as u32) << j;
                upper >>= 1;
            }
        }
        (linear, quadratic)
    }

    pub fn descriptor(&self, n: usize, index: u64) -> StabilizerStateDescriptor {
        let (linear, quadratic) = self.phases(index);
        StabilizerStateDescriptor {
            n,
            basis: self.basis.clone(),
            shift: self.shift,
            linear,
            quadratic,
        }
    }

    /// Largest `|<phi|psi>|^2` over the phase choices on this support,
    /// stopping early once `stop` is reached. Returns `(value, index)`; the
    /// first maximizer wins ties.
    pub fn best_overlap(&self, psi: &[Complex64], stop: f64) -> (f64, u64) {
        let k = self.k();
        let size = 1usize << k;
        let mut vals = Vec::with_capacity(size);
        for x in 0..size {
            let mut y = self.shift;
            for (i, b) in self.basis.iter().enumerate() {
                if x >> i & 1 == 1 {
                    y ^= b;
                }
            }
            vals.push(psi[y as usize]);
        }
        let scale = 1.0 / size as f64;
        let (mut best, mut arg) = (-1.0, 0u64);
        for idx in 0..self.phase_count() {
            let (linear, quadratic) = self.phases(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, v) in vals.iter().enumerate() {
                let p = phase_power(linear, &quadratic, x as u32);
                // multiply by (-i)^p
                acc += match p {
                    0 => *v,
                    1 => Complex64::new(v.im, -v.re),
                    2 => -*v,
                    _ => Complex64::new(-v.im, v.re),
                };
            }
            let f = acc.norm_sqr() * scale;
            if f > best {
                best = f;
                arg = idx;
                if best >= stop {
                    break;
                }
            }
        }
        (best, arg)
    }
}

/// All affine supports in enumeration order.
pub(crate) fn supports(n: usize) -> Vec<Support> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    let full = (1u64 << n) - 1;
    for k in 0..=n {
        // pivot sets of size k, in increasing numeric order
        for pivots in 0u64..1 << n {
            if pivots.count_ones() as usize != k {
                continue;
            }
            let piv: Vec<usize> = (0..n).filter(|&i| pivots >> i & 1 == 1).collect();
            // free bits of row i: above its pivot and not a pivot
            let free: Vec<Vec<usize>> = piv
                .iter()
                .map(|&p| (p + 1..n).filter(|&j| pivots >> j & 1 == 0).collect())
                .collect();
            let total_free: usize = free.iter().map(Vec::len).sum();
            let shift_bits: Vec<usize> = (0..n).filter(|&j| pivots >> j & 1 == 0).collect();
            for fill in 0u64..1 << total_free {
                let mut basis = Vec::with_capacity(k);
                let mut used = 0;
                for (row, &p) in piv.iter().enumerate() {
                    let mut v = 1u64 << p;
                    for &j in &free[row] {
                        if fill >> used & 1 == 1 {
                            v |= 1 << j;
                        }
                        used += 1;
                    }
                    basis.push(v);
                }
                for s in 0u64..1 << shift_bits.len() {
                    let shift = shift_bits
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (i, &j)| acc | ((s >> i & 1) << j));
                    debug_assert_eq!(shift & pivots, 0);
                    debug_assert_eq!(shift & !full, 0);
                    let sup = Support {
                        basis: basis.clone(),
                        shift,
                        offset,
                    };
                    offset += sup.phase_count();
                    out.push(sup);
                }
            }
        }
    }
    out
}

/// Streams every pure stabilizer state exactly once.
pub struct StabilizerEnumeration {
    n: usize,
    supports: Vec<Support>,
    current: usize,
    index: u64,
}

impl Iterator for StabilizerEnumeration {
    type Item = StabilizerStateDescriptor;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let sup = self.supports.get(self.current)?;
            if self.index < sup.phase_count() {
                let d = sup.descriptor(self.n, self.index);
                self.index += 1;
                return Some(d);
            }
            self.current += 1;
            self.index = 0;
        }
    }
}

pub fn enumerate_stabilizer_states(n: usize) -> Result<StabilizerEnumeration> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "enumeration needs at least one qubit".into(),
        ));
    }
    guard("stabilizer enumeration", n, MAX_ENUMERATION_QUBITS)?;
    Ok(StabilizerEnumeration {
        n,
        supports: supports(n),
        current: 0,
        index: 0,
    })
}
