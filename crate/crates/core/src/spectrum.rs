//! Full Pauli spectra `beta_sigma^2 = <psi|sigma|psi>^2` in `O(n 4^n)`.
//!
//! For a fixed X part `a`, `<psi|i^{|a&b|} X^a Z^b|psi>` equals
//! `i^{|a&b|} sum_y (-1)^{b.y} conj(psi(y^a)) psi(y)`, so one Walsh–Hadamard
//! transform of `g_a(y) = conj(psi(y^a)) psi(y)` yields every Z part `b` at
//! once. X parts are processed in parallel.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::pauli::PauliString;
use crate::statevector::{i_pow, StateVector};

pub const MAX_SPECTRUM_QUBITS: usize = 12;

/// `beta^2` below this is an exact zero.
pub const ZERO_THRESHOLD: f64 = 1e-20;

const IMAG_TOL: f64 = 1e-9;

/// Squared Pauli expectations indexed by `(x << n) | z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSpectrum {
    n: usize,
    values: Vec<f64>,
}

/// In-place unnormalized Walsh–Hadamard transform.
fn fwht(v: &mut [Complex64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, w) = (*a, *b);
                *a = u + w;
                *b = u - w;
            }
        }
        h *= 2;
    }
}

/// Signed expectations `<psi|sigma|psi>` for every Hermitian string.
pub fn pauli_expectations(state: &StateVector) -> Result<Vec<f64>> {
    let n = state.n();
    guard("Pauli spectrum", n, MAX_SPECTRUM_QUBITS)?;
    state.check_normalized()?;
    let dim = 1usize << n;
    let psi = state.amplitudes();
    let mut out = vec![0.0; dim * dim];
    out.par_chunks_mut(dim)
        .enumerate()
        .try_for_each(|(a, row)| -> Result<()> {
            let mut g: Vec<Complex64> = (0..dim).map(|y| psi[y ^ a].conj() * psi[y]).collect();
            fwht(&mut g);
            for (b, (dst, v)) in row.iter_mut().zip(&g).enumerate() {
                let e = i_pow((a & b).count_ones()) * v;
                if e.im.abs() > IMAG_TOL {
                    return Err(Error::Numerical(format!(
                        "imaginary part {} for Pauli index {}",
                        e.im,
                        (a << n) | b
                    )));
                }
                *dst = e.re;
            }
            Ok(())
        })?;
    Ok(out)
}

/// Direct `O(8^n)` evaluation, one string at a time. Reference only.
pub fn pauli_expectations_naive(state: &StateVector) -> Result<Vec<f64>> {
    let n = state.n();
    guard("naive Pauli spectrum", n, 8)?;
    (0..1usize << (2 * n))
        .map(|idx| state.expectation(&PauliString::from_index(n, idx)?))
        .collect()
}

pub fn pauli_spectrum(state: &StateVector) -> Result<PauliSpectrum> {
    let mut values: Vec<f64> = pauli_expectations(state)?
        .into_iter()
        .map(|b| (b * b).min(1.0))
        .collect();
    // identity is the norm, checked to be one
    values[0] = 1.0;
    Ok(PauliSpectrum {
        n: state.n(),
        values,
    })
}

impl PauliSpectrum {
    /// Wraps precomputed values, checking length and range.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        guard("Pauli spectrum", n, MAX_SPECTRUM_QUBITS)?;
        if values.len() != 1 << (2 * n) {
            return Err(Error::InvalidArgument(format!(
                "spectrum of {n} qubits needs {} values, got {}",
                1usize << (2 * n),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(-1e-12..=1.0 + 1e-12).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "spectrum value {v} outside [0, 1]"
            )));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values of every non-identity string.
    pub fn non_identity(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn get(&self, sigma: &PauliString) -> Result<f64> {
        if sigma.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, sigma.n()));
        }
        Ok(self.values[sigma.index()])
    }

    /// `2^{-n} sum beta^2`, equal to one for pure states.
    pub fn purity(&self) -> f64 {
        self.values.iter().sum::<f64>() / (1u64 << self.n) as f64
    }

    pub fn check_pure(&self) -> Result<()> {
        let p = self.purity();
        if (p - 1.0).abs() > 1e-9 {
            Err(Error::NotNormalized(p))
        } else {
            Ok(())
        }
    }

    /// Sorted copy, for comparing spectra up to permutation.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Histogram over log-spaced `beta^2` bins plus an underflow bin for exact
/// zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumHistogram {
    /// `bins + 1` increasing edges; the last is 1.
    pub edges: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Mass with `beta^2 < ZERO_THRESHOLD`.
    pub underflow: f64,
    pub metadata: Vec<(String, String)>,
}

impl SpectrumHistogram {
    /// Default lower edge `min(1e-8, 2^{-2n})`, so the `2^{-n}` bulk sits
    /// well inside the range.
    pub fn default_lower_edge(n: usize) -> f64 {
        1e-8f64.min(0.25f64.powi(n as i32))
    }

    pub fn empty(n: usize, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 bins, got {bins}"
            )));
        }
        let lo = Self::default_lower_edge(n).log10();
        let edges = (0..=bins)
            .map(|i| 10f64.powf(lo * (1.0 - i as f64 / bins as f64)))
            .collect();
        Ok(Self {
            edges,
            probabilities: vec![0.0; bins],
            underflow: 0.0,
            metadata: Vec::new(),
        })
    }

    fn bin_of(&self, v: f64) -> Option<usize> {
        if v < ZERO_THRESHOLD {
            return None;
        }
        let bins = self.probabilities.len();
        let lo = self.edges[0].log10();
        let pos = (v.max(self.edges[0]).log10() - lo) / -lo * bins as f64;
        Some((pos.floor().max(0.0) as usize).min(bins - 1))
    }

    /// Adds the spectrum's non-identity mass with weight `weight` (the
    /// caller averages instances by passing `1 / instances`). Values below
    /// the first edge but above the zero threshold land in the first bin.
    pub fn accumulate(&mut self, spec: &PauliSpectrum, weight: f64) {
        let vals = spec.non_identity();
        let w = weight / vals.len() as f64;
        for &v in vals {
            match self.bin_of(v) {
                Some(b) => self.probabilities[b] += w,
                None => self.underflow += w,
            }
        }
    }

    /// Adds another histogram's mass bin by bin.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::InvalidArgument(
                "histograms use different bins".into(),
            ));
        }
        for (a, b) in self.probabilities.iter_mut().zip(&other.probabilities) {
            *a += b;
        }
        self.underflow += other.underflow;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.underflow + self.probabilities.iter().sum::<f64>()
    }

    /// Total variation distance over the bins including underflow.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.edges != other.edges {
            return Err(Error::InvalidArgument(
                "histograms use different bins".into(),
            ));
        }
        let body: f64 = self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(0.5 * (body + (self.underflow - other.underflow).abs()))
    }

    /// CSV with `#` metadata lines and columns `bin_lo,bin_hi,probability`;
    /// the underflow bin is written as `0,<threshold>`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# stabscope histogram v1")?;
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "bin_lo,bin_hi,probability")?;
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e}",
            0.0, ZERO_THRESHOLD, self.underflow
        )?;
        for (i, p) in self.probabilities.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.edges[i],
                self.edges[i + 1],
                p
            )?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// One-shot histogram of a single spectrum.
pub fn spectrum_histogram(spec: &PauliSpectrum, bins: usize) -> Result<SpectrumHistogram> {
    let mut h = SpectrumHistogram::empty(spec.n(), bins)?;
    h.accumulate(spec, 1.0);
    Ok(h)
}

/// Spectrum split by membership in a stabilizer group `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPeakSummary {
    pub in_group_mean: f64,
    pub out_group_mean: f64,
    pub in_group_min: f64,
    pub out_group_max: f64,
}

impl TwoPeakSummary {
    /// `min_{G} beta^2 - max_{not G} beta^2`; positive when the peaks are
    /// separated.
    pub fn gap(&self) -> f64 {
        self.in_group_min - self.out_group_max
    }
}

pub fn two_peak_summary(spec: &PauliSpectrum, group: &[PauliString]) -> Result<TwoPeakSummary> {
    let n = spec.n();
    if group.len() != 1 << n {
        return Err(Error::InvalidArgument(format!(
            "group of {n} qubits has {} elements, expected {}",
            group.len(),
            1usize << n
        )));
    }
    let mut member = vec![false; spec.values.len()];
    for g in group {
        if g.n() != n {
            return Err(Error::DimensionMismatch(n, g.n()));
        }
        member[g.index()] = true;
    }
    let (mut s_in, mut s_out) = (0.0, 0.0);
    let (mut min_in, mut max_out) = (f64::INFINITY, f64::NEG_INFINITY);
    for (v, &m) in spec.values.iter().zip(&member) {
        if m {
            s_in += v;
            min_in = min_in.min(*v);
        } else {
            s_out += v;
            max_out = max_out.max(*v);
        }
    }
    let n_in = group.len() as f64;
    let n_out = (spec.values.len() - group.len()) as f64;
    Ok(TwoPeakSummary {
        in_group_mean: s_in / n_in,
        out_group_mean: s_out / n_out,
        in_group_min: min_in,
        out_group_max: max_out,
    })
}
