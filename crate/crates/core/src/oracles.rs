//! Brute-force magic monotones: stabilizer fidelity, min-relative entropy,
//! log-free robustness and stabilizer nullity, plus a checker for the SRE
//! bounds on them.
//!
//! Every result carries a witness from which its value can be recomputed
//! independently with [`OracleResult::reevaluate`].

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::lp::LinearProgram;
use crate::pauli::PauliString;
use crate::spectrum::{pauli_expectations, pauli_spectrum};
use crate::sre::sre;
use crate::stabilizer::enumerate::supports;
use crate::stabilizer::{
    enumerate_stabilizer_states, StabilizerStateDescriptor, MAX_ENUMERATION_QUBITS,
};
use crate::statevector::StateVector;

/// The LP has `2 * |STAB_n|` columns and `4^n` rows.
pub const MAX_LR_QUBITS: usize = 3;

/// Maximization stops once a stabilizer state this close is found.
pub const FSTAB_STOP: f64 = 1.0 - 1e-12;

/// Tolerance for `|beta|^2 = 1` in the nullity count.
pub const NULLITY_TOL: f64 = 1e-9;

const WITNESS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Fstab,
    Dmin,
    Lr,
    Nullity,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Fstab => "fstab",
            Measure::Dmin => "dmin",
            Measure::Lr => "lr",
            Measure::Nullity => "nullity",
        })
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fstab" => Ok(Measure::Fstab),
            "dmin" => Ok(Measure::Dmin),
            "lr" => Ok(Measure::Lr),
            "nullity" => Ok(Measure::Nullity),
            _ => Err(Error::InvalidArgument(format!(
                "unknown measure {s:?} (expected fstab, dmin, lr or nullity)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTerm {
    pub state: StabilizerStateDescriptor,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Closest stabilizer state and its enumeration ordinal.
    Stabilizer {
        state: StabilizerStateDescriptor,
        ordinal: u64,
    },
    /// `rho = sum_i c_i |eta_i><eta_i|`.
    Decomposition { terms: Vec<DecompositionTerm> },
    /// Signed labels of the strings with `<sigma> = +1`.
    Stabilizers { paulis: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub measure: Measure,
    pub n: usize,
    /// Nats, except `fstab` which is a fidelity.
    pub value: f64,
    pub witness: Witness,
}

impl OracleResult {
    /// Recomputes the value from the witness alone, failing if the witness
    /// is inconsistent with `psi`.
    pub fn reevaluate(&self, psi: &StateVector) -> Result<f64> {
        if psi.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, psi.n()));
        }
        match (&self.measure, &self.witness) {
            (Measure::Fstab | Measure::Dmin, Witness::Stabilizer { state, .. }) => {
                let f = state.overlap(psi)?.norm_sqr();
                Ok(if self.measure == Measure::Fstab {
                    f
                } else {
                    -f.ln()
                })
            }
            (Measure::Lr, Witness::Decomposition { terms }) => {
                let target = pauli_expectations(psi)?;
                let mut sum = vec![0.0; target.len()];
                let mut l1 = 0.0;
                for t in terms {
                    let b = pauli_expectations(&t.state.to_statevector()?)?;
                    for (s, v) in sum.iter_mut().zip(&b) {
                        *s += t.coefficient * v;
                    }
                    l1 += t.coefficient.abs();
                }
                let residual = sum
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if residual > WITNESS_TOL * l1.max(1.0) {
                    return Err(Error::Numerical(format!(
                        "decomposition misses the state by {residual:e}"
                    )));
                }
                Ok(l1.ln())
            }
            (Measure::Nullity, Witness::Stabilizers { paulis }) => {
                for label in paulis {
                    let p: PauliString = label.parse()?;
                    let e = psi.expectation(&p)?;
                    if (e - 1.0).abs() > NULLITY_TOL {
                        return Err(Error::Numerical(format!("{label} has expectation {e}")));
                    }
                }
                Ok(self.n as f64 * LN_2 - (paulis.len() as f64).ln())
            }
            _ => Err(Error::InvalidArgument(format!(
                "witness kind does not match measure {}",
                self.measure
            ))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_oracle_input(psi: &StateVector, what: &'static str, max: usize) -> Result<()> {
    if psi.n() == 0 {
        return Err(Error::InvalidArgument(format!(
            "{what} needs at least one qubit"
        )));
    }
    guard(what, psi.n(), max)?;
    psi.check_normalized()
}

/// Exhaustive `max |<phi|psi>|^2` over stabilizer states; ties go to the
/// lowest enumeration ordinal.
pub fn stabilizer_fidelity(psi: &StateVector) -> Result<OracleResult> {
    check_oracle_input(psi, "stabilizer fidelity", MAX_ENUMERATION_QUBITS)?;
    let n = psi.n();
    let sups = supports(n);
    let amps = psi.amplitudes();
    let done = AtomicBool::new(false);
    let (value, support, index) = sups
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if done.load(Ordering::Relaxed) {
                return (-1.0, usize::MAX, 0);
            }
            let (v, idx) = s.best_overlap(amps, FSTAB_STOP);
            if v >= FSTAB_STOP {
                done.store(true, Ordering::Relaxed);
            }
            (v, i, idx)
        })
        .reduce(
            || (-1.0, usize::MAX, 0),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let sup = &sups[support];
    Ok(OracleResult {
        measure: Measure::Fstab,
        n,
        value: value.min(1.0),
        witness: Witness::Stabilizer {
            state: sup.descriptor(n, index),
            ordinal: sup.offset + index,
        },
    })
}

/// `-ln F_STAB`.
pub fn d_min(psi: &StateVector) -> Result<OracleResult> {
    let f = stabilizer_fidelity(psi)?;
    Ok(OracleResult {
        measure: Measure::Dmin,
        value: -f.value.ln(),
        ..f
    })
}

/// `ln min { ||x||_1 : psi = sum_i x_i eta_i }` over pure stabilizer
/// states `eta_i`, matched on all Pauli expectations.
pub fn log_free_robustness(psi: &StateVector) -> Result<OracleResult> {
    check_oracle_input(psi, "log-free robustness", MAX_LR_QUBITS)?;
    let n = psi.n();
    let states: Vec<StabilizerStateDescriptor> = enumerate_stabilizer_states(n)?.collect();
    let columns: Vec<Vec<f64>> = states
        .iter()
        .map(|d| pauli_expectations(&d.to_statevector()?))
        .collect::<Result<_>>()?;
    let target = pauli_expectations(psi)?;
    let s = states.len();
    let a: Vec<Vec<f64>> = (0..target.len())
        .map(|sigma| {
            let mut row = Vec::with_capacity(2 * s);
            row.extend(columns.iter().map(|c| c[sigma]));
            row.extend(columns.iter().map(|c| -c[sigma]));
            row
        })
        .collect();
    let sol = LinearProgram::new(a, target, vec![1.0; 2 * s])?.solve()?;
    let terms: Vec<DecompositionTerm> = states
        .into_iter()
        .enumerate()
        .filter_map(|(i, state)| {
            let coefficient = sol.x[i] - sol.x[s + i];
            (coefficient.abs() > 1e-12).then_some(DecompositionTerm { state, coefficient })
        })
        .collect();
    let l1: f64 = terms.iter().map(|t| t.coefficient.abs()).sum();
    Ok(OracleResult {
        measure: Measure::Lr,
        n,
        value: l1.ln(),
        witness: Witness::Decomposition { terms },
    })
}

/// `n ln 2 - ln s`, with `s` the number of strings whose squared
/// expectation is within [`NULLITY_TOL`] of one.
pub fn stabilizer_nullity(psi: &StateVector) -> Result<OracleResult> {
    let n = psi.n();
    let exps = pauli_expectations(psi)?;
    let paulis: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, b)| (*b * *b - 1.0).abs() <= NULLITY_TOL)
        .map(|(idx, b)| {
            let p = PauliString::from_index(n, idx)?;
            Ok(if *b < 0.0 { p.negate() } else { p }.to_string())
        })
        .collect::<Result<_>>()?;
    Ok(OracleResult {
        measure: Measure::Nullity,
        n,
        value: n as f64 * LN_2 - (paulis.len() as f64).ln(),
        witness: Witness::Stabilizers { paulis },
    })
}

pub fn run_oracle(measure: Measure, psi: &StateVector) -> Result<OracleResult> {
    match measure {
        Measure::Fstab => stabilizer_fidelity(psi),
        Measure::Dmin => d_min(psi),
        Measure::Lr => log_free_robustness(psi),
        Measure::Nullity => stabilizer_nullity(psi),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `lhs - rhs`.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub d_min: f64,
    pub lr: Option<f64>,
    pub nullity: f64,
    pub checks: Vec<BoundCheck>,
}

impl BoundsReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }
}

/// Tolerance on `lhs >= rhs`.
pub const BOUND_TOL: f64 = 1e-9;

/// Evaluates `D_min >= (alpha-1)/(2 alpha) M_alpha` for every `alpha > 1`
/// (only for `n > 1`), `LR >= M_{1/2} / 2` when `n <= 3`, and
/// `nu >= M_0`.
pub fn check_bounds(psi: &StateVector, alphas: &[f64]) -> Result<BoundsReport> {
    let n = psi.n();
    let spec = pauli_spectrum(psi)?;
    let d = d_min(psi)?.value;
    let lr = if n <= MAX_LR_QUBITS {
        Some(log_free_robustness(psi)?.value)
    } else {
        None
    };
    let nu = stabilizer_nullity(psi)?.value;
    let mut checks = Vec::new();
    let mut push = |name: &str, alpha: f64, lhs: f64, rhs: f64| {
        checks.push(BoundCheck {
            name: name.to_string(),
            alpha,
            lhs,
            rhs,
            satisfied: lhs >= rhs - BOUND_TOL,
            slack: lhs - rhs,
        });
    };
    if n > 1 {
        for &alpha in alphas.iter().filter(|&&a| a > 1.0) {
            let m = sre(&spec, alpha)?;
            push("dmin", alpha, d, (alpha - 1.0) / (2.0 * alpha) * m);
        }
    }
    if let Some(lr) = lr {
        push("lr", 0.5, lr, 0.5 * sre(&spec, 0.5)?);
    }
    push("nullity", 0.0, nu, sre(&spec, 0.0)?);
    Ok(BoundsReport {
        n,
        d_min: d,
        lr,
        nullity: nu,
        checks,
    })
}
