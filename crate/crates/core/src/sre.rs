//! Stabilizer Rényi entropies and their closed forms. All values in nats.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::spectrum::PauliSpectrum;

const LN2: f64 = std::f64::consts::LN_2;

/// `beta^2` above this counts towards `M_0`.
pub const M0_THRESHOLD: f64 = 1e-10;

/// `M_alpha` of a state, with its density `M_alpha / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SreValue {
    pub alpha: f64,
    pub n: usize,
    pub value: f64,
}

impl SreValue {
    pub fn density(&self) -> f64 {
        self.value / self.n as f64
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Renyi index must be finite and >= 0, got {alpha}"
        )))
    }
}

/// `ln(e^a + e^b)`.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `M_alpha` from squared expectations.
///
/// `alpha = 1` uses the von Neumann form and `alpha = 0` counts values
/// above [`M0_THRESHOLD`].
pub fn sre_from_values(n: usize, values: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let ln_d = n as f64 * LN2;
    if alpha == 0.0 {
        let count = values.iter().filter(|&&v| v > M0_THRESHOLD).count();
        return Ok((count as f64).ln() - ln_d);
    }
    if alpha == 1.0 {
        let s: f64 = values
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum();
        return Ok(-s / (1u64 << n) as f64);
    }
    // log-sum-exp of alpha ln(beta^2)
    let logs: Vec<f64> = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| alpha * v.ln())
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok((max + s.ln() - ln_d) / (1.0 - alpha))
}

pub fn sre(spec: &PauliSpectrum, alpha: f64) -> Result<f64> {
    spec.check_pure()?;
    sre_from_values(spec.n(), spec.values(), alpha)
}

pub fn sre_value(spec: &PauliSpectrum, alpha: f64) -> Result<SreValue> {
    Ok(SreValue {
        alpha,
        n: spec.n(),
        value: sre(spec, alpha)?,
    })
}

/// Ensemble-average `M_2` of Clifford circuits doped with `n_t` T gates.
pub fn m2_clifford_t_exact(n: usize, n_t: f64) -> Result<f64> {
    if n == 0 || n_t.is_nan() || n_t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and n_t >= 0, got {n}, {n_t}"
        )));
    }
    let d = 2f64.powi(n as i32);
    let r = (-4.0 + 3.0 * (d * d - d)) / (4.0 * (d * d - 1.0));
    Ok(-((4.0 + (d - 1.0) * r.powf(n_t)) / (3.0 + d)).ln())
}

/// Large-`n` form in the T-gate density `q = n_t / n`. May be slightly
/// negative near `q = 0`.
pub fn m2_clifford_t_asymptotic(n: usize, q: f64) -> Result<f64> {
    if q.is_nan() || q < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "T-gate density must be >= 0, got {q}"
        )));
    }
    let nf = n as f64;
    Ok(-(4.0 * 2f64.powf(-nf) + (0.75f64).powf(q * nf)).ln())
}

/// SRE added by one T gate on a stabilizer state,
/// `(1-alpha)^{-1} ln(2^{-alpha} + 1/2)`; `ln(2)/2` at `alpha = 1`.
///
/// At `alpha = 0` this returns `ln 2`, the increment of `M_0` per T gate
/// once each gate breaks one stabilizer generator; the closed form itself
/// evaluates to `ln(3/2)` there, which is `M_0` of a single T state.
pub fn sre_per_tgate(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(LN2);
    }
    if alpha == 1.0 {
        return Ok(0.5 * LN2);
    }
    Ok((2f64.powf(-alpha) + 0.5).ln() / (1.0 - alpha))
}

/// Maximal SRE: the flat-spectrum value and its `n >> 1` limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SreMax {
    pub uniform: f64,
    pub limit: f64,
}

pub fn sre_max(alpha: f64, n: usize) -> Result<SreMax> {
    check_alpha(alpha)?;
    let nf = n as f64;
    let limit = if alpha <= 2.0 {
        nf * LN2
    } else {
        nf * LN2 / (alpha - 1.0)
    };
    let uniform = if alpha == 1.0 {
        // von Neumann form on the flat spectrum
        (1.0 - 4f64.powf(-nf)) * nf * LN2
    } else {
        log_add(-nf * LN2, nf * (1.0 - alpha) * LN2) / (1.0 - alpha)
    };
    Ok(SreMax { uniform, limit })
}

/// `min(n_t M_alpha^T, M_alpha^max)`, using the large-`n` maximum.
pub fn sre_linear_model(n: usize, n_t: f64, alpha: f64) -> Result<f64> {
    if n_t.is_nan() || n_t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "n_t must be >= 0, got {n_t}"
        )));
    }
    Ok((n_t * sre_per_tgate(alpha)?).min(sre_max(alpha, n)?.limit))
}

/// Average SRE of Haar-random states. Undefined at `alpha = 1`.
pub fn sre_haar(alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Err(Error::InvalidArgument(
            "Haar average is not available at alpha = 1".into(),
        ));
    }
    let nf = n as f64;
    let ln_first = (4f64.powf(nf) - 1.0).ln()
        + alpha * (2.0 / (2f64.powf(nf - 1.0) + 1.0)).ln()
        + ln_gamma(alpha + 0.5)
        - 0.5 * std::f64::consts::PI.ln()
        - nf * LN2;
    Ok(log_add(ln_first, -nf * LN2) / (1.0 - alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    TgateDensity,
    TimeSquared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub alpha: f64,
    pub kind: CriticalKind,
    pub value: f64,
    /// True when `value` grows linearly with `n`.
    pub linear_in_n: bool,
    pub note: Option<String>,
}

pub fn critical_tgate_density(alpha: f64) -> Result<CriticalPoint> {
    check_alpha(alpha)?;
    let value = if alpha == 0.0 {
        1.0
    } else if alpha <= 2.0 {
        LN2 / sre_per_tgate(alpha)?
    } else {
        LN2 / ((alpha - 1.0) * sre_per_tgate(alpha)?)
    };
    Ok(CriticalPoint {
        alpha,
        kind: CriticalKind::TgateDensity,
        value,
        linear_in_n: false,
        note: None,
    })
}

pub fn critical_time_squared(alpha: f64, n: usize) -> Result<CriticalPoint> {
    check_alpha(alpha)?;
    let ln_d = n as f64 * LN2;
    let (value, linear_in_n, note) = if alpha == 0.0 {
        (0.0, false, None)
    } else if alpha < 1.0 {
        (0.5, false, None)
    } else if alpha == 1.0 {
        (
            0.5,
            false,
            Some("possible logarithmic corrections at alpha = 1".to_string()),
        )
    } else if alpha <= 2.0 {
        ((alpha - 1.0) / (2.0 * alpha) * ln_d, true, None)
    } else {
        (ln_d / (2.0 * alpha), true, None)
    };
    Ok(CriticalPoint {
        alpha,
        kind: CriticalKind::TimeSquared,
        value,
        linear_in_n,
        note,
    })
}

/// Ensemble-average `M_2` of `d` layers of random Cliffords and `R_z(theta)`.
pub fn m2_random_basis_exact(theta: f64, d: u64, n: usize) -> Result<f64> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("need d >= 1 and n >= 1".into()));
    }
    let dim = 2f64.powi(n as i32);
    // bracket = 1 - delta, kept in this form so small angles stay accurate
    let s = (2.0 * theta).sin();
    let delta = dim * (dim + 3.0) * 2.0 * s * s / (8.0 * (dim * dim - 1.0));
    let pow = (d as f64 * (-delta).ln_1p()).exp();
    Ok(-((4.0 + (dim - 1.0) * pow) / (3.0 + dim)).ln())
}

/// [`m2_random_basis_exact`] at `theta = 2 t / sqrt(d)`.
pub fn m2_random_basis_time(t: f64, d: u64, n: usize) -> Result<f64> {
    m2_random_basis_exact(2.0 * t / (d as f64).sqrt(), d, n)
}

/// `d -> infinity` limit of [`m2_random_basis_time`] at fixed `n`.
pub fn m2_random_basis_deep_limit(t: f64, n: usize) -> f64 {
    let dim = 2f64.powi(n as i32);
    let rate = 4.0 * dim * (dim + 3.0) / (dim * dim - 1.0);
    -((4.0 + (dim - 1.0) * (-rate * t * t).exp()) / (3.0 + dim)).ln()
}

/// Large-`n` form `n ln 2 - ln(4 + 2^n e^{-4 t^2})`.
pub fn m2_random_basis_asymptotic(t: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf * LN2 - log_add(4f64.ln(), nf * LN2 - 4.0 * t * t)
}

/// SRE of the two-peak spectrum with in-group weight `F^2` and out-group
/// weight `2^{-n}(1-F^2)`.
pub fn gue_sre_from_fidelity(alpha: f64, n: usize, f: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!(
            "fidelity must lie in [0, 1], got {f}"
        )));
    }
    let nf = n as f64;
    let f2 = f * f;
    let g = 1.0 - f2;
    if alpha == 1.0 {
        let a = if f2 > 0.0 { -f2 * f2.ln() } else { 0.0 };
        let b = if g > 0.0 {
            -g * (g.ln() - nf * LN2)
        } else {
            0.0
        };
        return Ok(a + b);
    }
    let first = if f2 > 0.0 {
        alpha * f2.ln()
    } else {
        f64::NEG_INFINITY
    };
    let second = if g > 0.0 {
        nf * (1.0 - alpha) * LN2 + alpha * g.ln()
    } else {
        f64::NEG_INFINITY
    };
    Ok(log_add(first, second) / (1.0 - alpha))
}

/// Short-time regime formulas with `F = 1 - t^2`, clamped at the large-`n`
/// maximum.
pub fn gue_sre_approx(alpha: f64, n: usize, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time must be >= 0, got {t}"
        )));
    }
    let max = sre_max(alpha, n)?.limit;
    if t == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let t2 = t * t;
    let value = if alpha == 0.0 {
        max
    } else if alpha < 1.0 {
        let weight = 2f64.powf(nf * (1.0 - alpha)) * (2.0 * t2).powf(alpha);
        if weight < 1.0 {
            weight / (1.0 - alpha)
        } else {
            alpha / (1.0 - alpha) * (2.0 * t2).ln() + nf * LN2
        }
    } else if alpha == 1.0 {
        2.0 * t2 * (nf * LN2 - (2.0 * t2).ln())
    } else {
        2.0 * alpha / (alpha - 1.0) * t2
    };
    Ok(value.min(max))
}
