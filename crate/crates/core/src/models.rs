//! The three state ensembles: T-doped Clifford circuits, random-basis
//! rotations and GUE evolution. Every instance is a pure function of its
//! seed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{sample_gue, Propagator};
use crate::rng::rng_from_seed;
use crate::stabilizer::{sample_random_clifford, Tableau};
use crate::statevector::StateVector;

/// Default number of rotation layers for the random-basis model.
pub const DEFAULT_DEPTH: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    CliffordT,
    RandomBasis,
    Gue,
}

impl Model {
    /// `"clifford_t"`, `"random_basis"` or `"gue"`.
    pub fn tag(&self) -> &'static str {
        match self {
            Model::CliffordT => "clifford_t",
            Model::RandomBasis => "random_basis",
            Model::Gue => "gue",
        }
    }

    /// Name of the swept parameter.
    pub fn param_kind(&self) -> &'static str {
        match self {
            Model::CliffordT => "q",
            Model::RandomBasis | Model::Gue => "t",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Model {
    type Err = Error;

    /// Accepts both `clifford-t` and `clifford_t` spellings.
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "clifford_t" => Ok(Model::CliffordT),
            "random_basis" => Ok(Model::RandomBasis),
            "gue" => Ok(Model::Gue),
            _ => Err(Error::InvalidArgument(format!(
                "unknown model {s:?} (expected clifford-t, random-basis or gue)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionRecord {
    pub model: Model,
    pub n: usize,
    /// T-gate count for `clifford_t`, time otherwise.
    pub param: f64,
    pub seed: u64,
    pub state: StateVector,
}

/// Alternates fresh uniform Cliffords with `T` on qubit 0, `n_t` times,
/// ending with a Clifford, starting from `|0...0>`.
pub fn build_clifford_t_state(n: usize, n_t: usize, seed: u64) -> Result<EvolutionRecord> {
    let mut rng = rng_from_seed(seed);
    let mut state = StateVector::zero(n)?;
    for _ in 0..n_t {
        state.apply_circuit(&sample_random_clifford(n, &mut rng)?)?;
        state.apply_t(0)?;
    }
    state.apply_circuit(&sample_random_clifford(n, &mut rng)?)?;
    Ok(EvolutionRecord {
        model: Model::CliffordT,
        n,
        param: n_t as f64,
        seed,
        state,
    })
}

/// `d` layers of (uniform Clifford, `R_z(2t/sqrt(d))` on qubit 0), then a
/// final Clifford, on `|0...0>`.
pub fn build_random_basis_state(n: usize, t: f64, d: u64, seed: u64) -> Result<EvolutionRecord> {
    if d == 0 {
        return Err(Error::InvalidArgument("depth d must be >= 1".into()));
    }
    let theta = 2.0 * t / (d as f64).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut state = StateVector::zero(n)?;
    for _ in 0..d {
        state.apply_circuit(&sample_random_clifford(n, &mut rng)?)?;
        state.apply_rz(0, theta)?;
    }
    state.apply_circuit(&sample_random_clifford(n, &mut rng)?)?;
    Ok(EvolutionRecord {
        model: Model::RandomBasis,
        n,
        param: t,
        seed,
        state,
    })
}

/// One GUE Hamiltonian, diagonalized once, and its initial stabilizer
/// state.
pub struct GueInstance {
    pub seed: u64,
    pub initial: StateVector,
    pub initial_tableau: Tableau,
    propagator: Propagator,
}

impl GueInstance {
    /// Starts from `|0...0>`, or from a uniformly random stabilizer state
    /// when `random_initial` is set.
    pub fn new(n: usize, seed: u64, random_initial: bool) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let h = sample_gue(n, &mut rng)?;
        let propagator = h.eigendecompose()?;
        let initial_tableau = if random_initial {
            Tableau::from_circuit(&sample_random_clifford(n, &mut rng)?)?
        } else {
            Tableau::new(n)?
        };
        let initial = initial_tableau.to_statevector()?;
        Ok(Self {
            seed,
            initial,
            initial_tableau,
            propagator,
        })
    }

    pub fn n(&self) -> usize {
        self.initial.n()
    }

    /// States at each of `times`.
    pub fn states(&self, times: &[f64]) -> Result<Vec<StateVector>> {
        let prep = self.propagator.prepare(&self.initial)?;
        times.iter().map(|&t| prep.at(t)).collect()
    }

    pub fn record(&self, t: f64) -> Result<EvolutionRecord> {
        Ok(EvolutionRecord {
            model: Model::Gue,
            n: self.n(),
            param: t,
            seed: self.seed,
            state: self.propagator.evolve(&self.initial, t)?,
        })
    }
}

/// Single GUE run from `|0...0>`.
pub fn build_gue_state(n: usize, t: f64, seed: u64) -> Result<EvolutionRecord> {
    GueInstance::new(n, seed, false)?.record(t)
}
