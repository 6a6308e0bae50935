//! Fidelity estimation by Pauli sampling.
//!
//! Strings are drawn with probability `P(sigma) = 2^{-n} beta_sigma(psi)^2`
//! and the ratio `beta_sigma(rho) / beta_sigma(psi)` is averaged; its mean
//! is `<psi|rho|psi>`. Certifying against the closest stabilizer state
//! instead of `psi` trades a bounded bias for a flat sampling distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{stabilizer_fidelity, Witness};
use crate::pauli::PauliString;
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectrum::{pauli_expectations, pauli_spectrum, ZERO_THRESHOLD};
use crate::sre::{sre, SreValue};
use crate::statevector::StateVector;

/// Draws per independent RNG stream; fixed so results do not depend on
/// the worker count.
const CHUNK: usize = 4096;

/// Sampling distribution for one reference state.
#[derive(Clone, Debug)]
pub struct CertificationPlan {
    reference: StateVector,
    expectations: Vec<f64>,
    cdf: Vec<f64>,
    pub samples: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl CertificationPlan {
    pub fn new(reference: StateVector, samples: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("sample budget must be >= 1".into()));
        }
        check_unit_interval("epsilon", epsilon)?;
        check_unit_interval("delta", delta)?;
        let expectations = pauli_expectations(&reference)?;
        let scale = 1.0 / (1u64 << reference.n()) as f64;
        let mut cdf = Vec::with_capacity(expectations.len());
        let mut acc = 0.0;
        for b in &expectations {
            let p = b * b;
            if p >= ZERO_THRESHOLD {
                acc += p * scale;
            }
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "sampling distribution sums to {acc}"
            )));
        }
        Ok(Self {
            reference,
            expectations,
            cdf,
            samples,
            epsilon,
            delta,
        })
    }

    pub fn reference(&self) -> &StateVector {
        &self.reference
    }

    pub fn n(&self) -> usize {
        self.reference.n()
    }

    /// `P(sigma)` at flat index `index`.
    pub fn probability(&self, index: usize) -> f64 {
        let prev = if index == 0 { 0.0 } else { self.cdf[index - 1] };
        self.cdf[index] - prev
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.gen::<f64>() * total;
        // first index whose cumulative mass exceeds u; zero-mass entries
        // repeat the previous value and are never selected
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

/// One string drawn from the plan's distribution.
pub fn sample_pauli<R: Rng + ?Sized>(plan: &CertificationPlan, rng: &mut R) -> PauliString {
    let idx = plan.sample_index(rng);
    PauliString::from_index(plan.n(), idx).expect("index within the spectrum")
}

/// Global depolarizing noise `rho = (1-p) |phi><phi| + p I / 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    None,
    Depolarizing { p: f64 },
}

impl Noise {
    fn strength(&self) -> f64 {
        match self {
            Noise::None => 0.0,
            Noise::Depolarizing { p } => *p,
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::None => f.write_str("none"),
            Noise::Depolarizing { p } => write!(f, "depolarizing:{p}"),
        }
    }
}

impl FromStr for Noise {
    type Err = Error;

    /// `none` or `depolarizing:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(Noise::None);
        }
        let p = s
            .strip_prefix("depolarizing:")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("bad noise spec {s:?}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing strength {p} outside [0, 1]"
            )));
        }
        Ok(Noise::Depolarizing { p })
    }
}

/// The state actually prepared: a pure state, possibly depolarized.
#[derive(Clone, Debug)]
pub struct NoisyState {
    pub state: StateVector,
    pub noise: Noise,
}

impl NoisyState {
    pub fn pure(state: StateVector) -> Self {
        Self {
            state,
            noise: Noise::None,
        }
    }

    pub fn depolarized(state: StateVector, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing strength {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            state,
            noise: Noise::Depolarizing { p },
        })
    }

    pub fn n(&self) -> usize {
        self.state.n()
    }

    /// `tr(rho sigma)` for every string; non-identity entries shrink by
    /// `1 - p`.
    pub fn expectations(&self) -> Result<Vec<f64>> {
        let keep = 1.0 - self.noise.strength();
        let mut e = pauli_expectations(&self.state)?;
        for v in e.iter_mut().skip(1) {
            *v *= keep;
        }
        e[0] = 1.0;
        Ok(e)
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_with(&self, psi: &StateVector) -> Result<f64> {
        let p = self.noise.strength();
        let dim = (1u64 << self.n()) as f64;
        Ok((1.0 - p) * self.state.fidelity(psi)? + p / dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proxy {
    Direct,
    ClosestStabilizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationOutcome {
    pub n: usize,
    pub proxy: Proxy,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub noise: Noise,
    /// Bound on the proxy bias `|F(rho, psi) - F(rho, psi')|`; zero for
    /// direct estimation.
    pub delta_f: f64,
    pub m2: Option<f64>,
    pub fstab: Option<f64>,
    /// `M_2 <= ln(4/3)`, where the closest stabilizer state is unique and
    /// the bound stays below one.
    pub nontrivial: bool,
}

impl CertificationOutcome {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Mean of `plan.samples` ratio draws against `rho`.
pub fn estimate_fidelity(
    plan: &CertificationPlan,
    rho: &NoisyState,
    seed: u64,
) -> Result<CertificationOutcome> {
    if rho.n() != plan.n() {
        return Err(Error::DimensionMismatch(plan.n(), rho.n()));
    }
    let target = rho.expectations()?;
    let m = plan.samples;
    let chunks = m.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, c as u64));
            let len = CHUNK.min(m - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let idx = plan.sample_index(&mut rng);
                let r = target[idx] / plan.expectations[idx];
                s += r;
                s2 += r * r;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let mf = m as f64;
    let mean = s / mf;
    let stderr = if m > 1 {
        ((s2 - mf * mean * mean).max(0.0) / (mf - 1.0) / mf).sqrt()
    } else {
        0.0
    };
    Ok(CertificationOutcome {
        n: plan.n(),
        proxy: Proxy::Direct,
        estimate: mean,
        stderr,
        samples: m,
        epsilon: plan.epsilon,
        delta: plan.delta,
        seed,
        noise: rho.noise,
        delta_f: 0.0,
        m2: None,
        fstab: None,
        nontrivial: true,
    })
}

/// The two published sample-count expressions, kept apart and labeled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    /// `2 eps^-2 ln(2/delta) e^{M_2}`.
    pub m2_side: f64,
    /// `64 eps^-4 ln(2/delta) e^{M_0}`.
    pub m0_side: f64,
}

pub fn sample_budget_bounds(
    epsilon: f64,
    delta: f64,
    m2: &SreValue,
    m0: &SreValue,
) -> Result<SampleBudget> {
    check_unit_interval("epsilon", epsilon)?;
    check_unit_interval("delta", delta)?;
    if m2.alpha != 2.0 || m0.alpha != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "expected M_2 and M_0, got alpha = {} and {}",
            m2.alpha, m0.alpha
        )));
    }
    let log_term = (2.0 / delta).ln();
    Ok(SampleBudget {
        m2_side: 2.0 / (epsilon * epsilon) * log_term * m2.value.exp(),
        m0_side: 64.0 / epsilon.powi(4) * log_term * m0.value.exp(),
    })
}

/// `2 sqrt(1 - e^{-M_2})`.
pub fn proxy_error_bound(m2: f64) -> f64 {
    2.0 * (1.0 - (-m2).exp()).max(0.0).sqrt()
}

/// Estimates `F(rho, psi')` for the closest stabilizer state `psi'` of
/// `psi` and attaches the bias bound in terms of `M_2(psi)`.
pub fn certify_via_closest_stabilizer(
    psi: &StateVector,
    rho: &NoisyState,
    samples: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<CertificationOutcome> {
    let closest = stabilizer_fidelity(psi)?;
    let Witness::Stabilizer { state, .. } = &closest.witness else {
        unreachable!("stabilizer fidelity returns a stabilizer witness")
    };
    let proxy = state.to_statevector()?;
    let m2 = sre(&pauli_spectrum(psi)?, 2.0)?;
    let plan = CertificationPlan::new(proxy, samples, epsilon, delta)?;
    let out = estimate_fidelity(&plan, rho, seed)?;
    Ok(CertificationOutcome {
        proxy: Proxy::ClosestStabilizer,
        delta_f: proxy_error_bound(m2),
        m2: Some(m2),
        fstab: Some(closest.value),
        nontrivial: m2 <= (4.0f64 / 3.0).ln(),
        ..out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn t_state() -> StateVector {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_h(0).unwrap();
        s.apply_t(0).unwrap();
        s
    }

    fn counts(plan: &CertificationPlan, draws: usize, seed: u64) -> Vec<usize> {
        let mut rng = rng_from_seed(seed);
        let mut c = vec![0; 1 << (2 * plan.n())];
        for _ in 0..draws {
            c[sample_pauli(plan, &mut rng).index()] += 1;
        }
        c
    }

    #[test]
    fn zero_state_draws_only_i_and_z() {
        let plan = CertificationPlan::new(StateVector::zero(1).unwrap(), 1, 0.1, 0.05).unwrap();
        let c = counts(&plan, 4000, 1);
        // flat index (x << 1) | z: I=0, Z=1, X=2, Y=3
        assert_eq!(c[2] + c[3], 0);
        assert!((c[0] as f64 - 2000.0).abs() < 5.0 * 1000f64.sqrt());
    }

    #[test]
    fn t_state_frequencies() {
        let plan = CertificationPlan::new(t_state(), 1, 0.1, 0.05).unwrap();
        let draws = 10_000;
        let c = counts(&plan, draws, 2);
        assert_eq!(c[1], 0);
        for (idx, p) in [(0, 0.5), (2, 0.25), (3, 0.25)] {
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (c[idx] as f64 - draws as f64 * p).abs() < 5.0 * sd,
                "{idx}: {}",
                c[idx]
            );
        }
    }

    #[test]
    fn bell_state_chi_square() {
        let mut bell = StateVector::zero(2).unwrap();
        bell.apply_h(0).unwrap();
        bell.apply_cnot(0, 1).unwrap();
        let plan = CertificationPlan::new(bell, 1, 0.1, 0.05).unwrap();
        let draws = 8000;
        let c = counts(&plan, draws, 3);
        let group: Vec<usize> = ["II", "XX", "YY", "ZZ"]
            .iter()
            .map(|l| l.parse::<PauliString>().unwrap().index())
            .collect();
        let expected = draws as f64 / 4.0;
        let chi2: f64 = group
            .iter()
            .map(|&g| (c[g] as f64 - expected).powi(2) / expected)
            .sum();
        // 3 degrees of freedom, 99.9% quantile 16.27
        assert!(chi2 < 16.27, "{chi2}");
        assert_eq!(group.iter().map(|&g| c[g]).sum::<usize>(), draws);
    }

    #[test]
    fn pure_reference_estimates_one() {
        let psi = t_state().tensor(&t_state()).unwrap();
        let plan = CertificationPlan::new(psi.clone(), 500, 0.1, 0.05).unwrap();
        let out = estimate_fidelity(&plan, &NoisyState::pure(psi), 7).unwrap();
        assert_eq!(out.estimate, 1.0);
        assert_eq!(out.stderr, 0.0);
    }

    #[test]
    fn depolarized_estimate_is_unbiased() {
        let mut psi = StateVector::zero(4).unwrap();
        for q in 0..4 {
            psi.apply_h(q).unwrap();
            psi.apply_t(q).unwrap();
        }
        psi.apply_cnot(0, 2).unwrap();
        psi.apply_rz(1, 0.3).unwrap();
        let rho = NoisyState::depolarized(psi.clone(), 0.1).unwrap();
        let exact = rho.fidelity_with(&psi).unwrap();
        assert!((exact - (0.9 + 0.1 / 16.0)).abs() < 1e-12);
        let plan = CertificationPlan::new(psi, 10_000, 0.1, 0.05).unwrap();
        let out = estimate_fidelity(&plan, &rho, 11).unwrap();
        assert!((out.estimate - exact).abs() < 3.0 * out.stderr, "{out:?}");
    }

    #[test]
    fn estimate_is_reproducible() {
        let plan = CertificationPlan::new(t_state(), 9000, 0.1, 0.05).unwrap();
        let rho = NoisyState::depolarized(StateVector::zero(1).unwrap(), 0.2).unwrap();
        let a = estimate_fidelity(&plan, &rho, 5).unwrap();
        let b = estimate_fidelity(&plan, &rho, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_expressions() {
        let zero = |alpha| SreValue {
            alpha,
            n: 2,
            value: 0.0,
        };
        let b = sample_budget_bounds(0.1, 0.05, &zero(2.0), &zero(0.0)).unwrap();
        let ln40 = 40f64.ln();
        assert!((b.m2_side - 200.0 * ln40).abs() < 1e-9);
        assert!((b.m0_side - 640_000.0 * ln40).abs() < 1e-6);
        let more = SreValue {
            alpha: 2.0,
            n: 2,
            value: LN_2,
        };
        let b2 = sample_budget_bounds(0.1, 0.05, &more, &zero(0.0)).unwrap();
        assert!((b2.m2_side / b.m2_side - 2.0).abs() < 1e-12);
        let finer = sample_budget_bounds(0.05, 0.05, &zero(2.0), &zero(0.0)).unwrap();
        assert!(finer.m2_side > b.m2_side && finer.m0_side > b.m0_side);
        assert!(sample_budget_bounds(1.5, 0.05, &zero(2.0), &zero(0.0)).is_err());
        assert!(sample_budget_bounds(0.1, 0.05, &zero(0.0), &zero(2.0)).is_err());
    }

    #[test]
    fn proxy_bound_at_regime_edge() {
        assert!((proxy_error_bound((4.0f64 / 3.0).ln()) - 1.0).abs() < 1e-12);
        assert_eq!(proxy_error_bound(0.0), 0.0);
    }

    #[test]
    fn stabilizer_reference_reduces_to_direct() {
        let mut psi = StateVector::zero(3).unwrap();
        psi.apply_h(0).unwrap();
        psi.apply_cnot(0, 2).unwrap();
        psi.apply_s(2).unwrap();
        let rho = NoisyState::depolarized(psi.clone(), 0.05).unwrap();
        let out = certify_via_closest_stabilizer(&psi, &rho, 2000, 0.1, 0.05, 1).unwrap();
        assert!(out.delta_f < 1e-6);
        assert!((out.fstab.unwrap() - 1.0).abs() < 1e-12);
        assert!(out.nontrivial);
        let exact = rho.fidelity_with(&psi).unwrap();
        assert!((out.estimate - exact).abs() < 3.0 * out.stderr, "{out:?}");
    }

    #[test]
    fn noise_spec_parsing() {
        assert_eq!("none".parse::<Noise>().unwrap(), Noise::None);
        assert_eq!(
            "depolarizing:0.05".parse::<Noise>().unwrap(),
            Noise::Depolarizing { p: 0.05 }
        );
        assert!("depolarizing:2".parse::<Noise>().is_err());
        assert!("amplitude:0.1".parse::<Noise>().is_err());
    }
}
