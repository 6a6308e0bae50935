use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
}

impl Gate {
    fn max_qubit(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::S(q) => q,
            Gate::Cnot(c, t) => c.max(t),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Gate::Cnot(c, t) = *self {
            if c == t {
                return Err(Error::InvalidArgument(format!(
                    "CNOT control and target coincide on qubit {c}"
                )));
            }
        }
        let q = self.max_qubit();
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        Ok(())
    }

    /// Conjugates `p` in place: `p -> G p G^dagger`.
    #[inline]
    pub(crate) fn conjugate(&self, p: &mut PauliString) {
        match *self {
            Gate::H(q) => p.conjugate_h(q),
            Gate::S(q) => p.conjugate_s(q),
            Gate::Cnot(c, t) => p.conjugate_cnot(c, t),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H({q})"),
            Gate::S(q) => write!(f, "S({q})"),
            Gate::Cnot(c, t) => write!(f, "CNOT({c},{t})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    gate: String,
    q: Vec<usize>,
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (gate, q) = match *self {
            Gate::H(q) => ("H", vec![q]),
            Gate::S(q) => ("S", vec![q]),
            Gate::Cnot(c, t) => ("CNOT", vec![c, t]),
        };
        GateRecord {
            gate: gate.to_string(),
            q,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GateRecord::deserialize(d)?;
        match (r.gate.as_str(), r.q.as_slice()) {
            ("H", &[q]) => Ok(Gate::H(q)),
            ("S", &[q]) => Ok(Gate::S(q)),
            ("CNOT", &[c, t]) => Ok(Gate::Cnot(c, t)),
            (g, q) => Err(de::Error::custom(format!(
                "unknown gate {g:?} with {} qubit argument(s)",
                q.len()
            ))),
        }
    }
}

/// Ordered H/S/CNOT sequence; the first gate acts first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "circuits need 1..={MAX_QUBITS} qubits, got {n}"
            )));
        }
        Ok(Self {
            n,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Push without validation, for internally generated gates.
    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.validate(self.n).is_ok());
        self.gates.push(gate);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends all gates of `other` after those of `self`.
    pub fn extend(&mut self, other: &CliffordCircuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// The inverse circuit, using `S^dagger = S^3`.
    pub fn inverse(&self) -> Self {
        let mut gates = Vec::with_capacity(self.gates.len());
        for &g in self.gates.iter().rev() {
            match g {
                Gate::S(_) => gates.extend([g, g, g]),
                _ => gates.push(g),
            }
        }
        Self { n: self.n, gates }
    }

    /// `U p U^dagger` for the circuit unitary `U`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, p.n()));
        }
        let mut out = *p;
        for g in &self.gates {
            g.conjugate(&mut out);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.gates)?)
    }

    pub fn from_json(n: usize, text: &str) -> Result<Self> {
        let gates: Vec<Gate> = serde_json::from_str(text)?;
        Self::from_gates(n, gates)
    }
}
