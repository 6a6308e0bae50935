//! Commands that act on one state.

use anyhow::{Context, Result};
use serde::Serialize;
use stabscope_core::certification::{certify_via_closest_stabilizer, estimate_fidelity};
use stabscope_core::models::{build_clifford_t_state, build_random_basis_state, GueInstance};
use stabscope_core::oracles::{check_bounds, run_oracle, Measure};
use stabscope_core::spectrum::spectrum_histogram;
use stabscope_core::sre::sre;
use stabscope_core::{
    pauli_spectrum, CertificationOutcome, CertificationPlan, Noise, NoisyState, StateVector,
};

use super::sibling;
use crate::{
    usage, CertifyArgs, Ctx, ModelArg, OracleArgs, OracleKind, Outputs, Preset, SpectrumArgs,
    StateArgs, StateCmdArgs,
};

impl StateArgs {
    /// Loads or builds the state and describes where it came from.
    pub fn resolve(&self) -> Result<(StateVector, Vec<(String, String)>)> {
        let mut desc = Vec::new();
        if let Some(path) = &self.state_file {
            let s = StateVector::read_json(path)
                .with_context(|| format!("loading {}", path.display()))?;
            desc.push(("state_file".into(), path.display().to_string()));
            return Ok((s, desc));
        }
        if let Some(preset) = self.preset {
            let n = self.n.unwrap_or(1);
            if n == 0 {
                return Err(usage("--n must be >= 1"));
            }
            let mut s = StateVector::zero(n)?;
            for q in 0..n {
                match preset {
                    Preset::Zero => {}
                    Preset::Plus => s.apply_h(q)?,
                    Preset::T => {
                        s.apply_h(q)?;
                        s.apply_t(q)?;
                    }
                }
            }
            desc.push(("preset".into(), format!("{preset:?}").to_lowercase()));
            desc.push(("n".into(), n.to_string()));
            return Ok((s, desc));
        }
        let Some(model) = self.model else {
            return Err(usage("give --state-file, --preset or --model"));
        };
        let n = self.n.ok_or_else(|| usage("--model needs --n"))?;
        desc.push(("model".into(), format!("{model:?}").to_lowercase()));
        desc.push(("n".into(), n.to_string()));
        desc.push(("seed".into(), self.seed.to_string()));
        let state = match model {
            ModelArg::CliffordT => {
                if self.t.is_some() {
                    return Err(usage("clifford-t takes --nt or --q, not --t"));
                }
                let nt = match (self.nt, self.q) {
                    (Some(k), _) => k,
                    (None, Some(q)) if q >= 0.0 => (q * n as f64).round() as usize,
                    (None, Some(q)) => return Err(usage(format!("--q must be >= 0, got {q}"))),
                    (None, None) => 0,
                };
                desc.push(("nt".into(), nt.to_string()));
                build_clifford_t_state(n, nt, self.seed)?.state
            }
            ModelArg::RandomBasis | ModelArg::Gue => {
                if self.nt.is_some() || self.q.is_some() {
                    return Err(usage("evolution models take --t, not --nt/--q"));
                }
                let t = self.t.ok_or_else(|| usage("evolution models need --t"))?;
                desc.push(("t".into(), t.to_string()));
                if model == ModelArg::RandomBasis {
                    desc.push(("depth".into(), self.depth.to_string()));
                    build_random_basis_state(n, t, self.depth, self.seed)?.state
                } else {
                    desc.push(("random_initial".into(), self.random_initial.to_string()));
                    GueInstance::new(n, self.seed, self.random_initial)?
                        .record(t)?
                        .state
                }
            }
        };
        Ok((state, desc))
    }
}

fn single(path: std::path::PathBuf, seed: Option<u64>) -> Outputs {
    Outputs {
        primary: path.clone(),
        files: vec![path],
        seed,
    }
}

fn state_seed(args: &StateArgs) -> Option<u64> {
    args.model.map(|_| args.seed)
}

pub fn oracle(args: &OracleArgs, ctx: &Ctx) -> Result<Outputs> {
    let (psi, _) = args.state.resolve()?;
    let (name, json) = match args.measure {
        OracleKind::Bounds => {
            let rep = check_bounds(&psi, &args.alphas.0)?;
            for c in &rep.checks {
                println!(
                    "{} alpha={}: {:.17} >= {:.17} {}",
                    c.name,
                    c.alpha,
                    c.lhs,
                    c.rhs,
                    if c.satisfied { "ok" } else { "VIOLATED" }
                );
            }
            ("bounds".to_string(), serde_json::to_string_pretty(&rep)?)
        }
        kind => {
            let measure = match kind {
                OracleKind::Fstab => Measure::Fstab,
                OracleKind::Dmin => Measure::Dmin,
                OracleKind::Lr => Measure::Lr,
                _ => Measure::Nullity,
            };
            let res = run_oracle(measure, &psi)?;
            println!("{measure} = {:.17}", res.value);
            (measure.to_string(), res.to_json()?)
        }
    };
    let path = ctx.output(args.out.as_deref(), &format!("oracle_{name}.json"))?;
    std::fs::write(&path, json + "\n")?;
    Ok(single(path, state_seed(&args.state)))
}

#[derive(Serialize)]
struct CertifyReport {
    outcome: CertificationOutcome,
    /// `<psi|rho|psi>`, known here because `rho` is simulated.
    exact_fidelity: f64,
    /// `|estimate - exact| <= delta_f + 3 stderr`.
    consistent: bool,
}

pub fn certify(args: &CertifyArgs, ctx: &Ctx) -> Result<Outputs> {
    let (psi, _) = args.state.resolve()?;
    let noise: Noise = args.noise.parse()?;
    let rho = match noise {
        Noise::None => NoisyState::pure(psi.clone()),
        Noise::Depolarizing { p } => NoisyState::depolarized(psi.clone(), p)?,
    };
    let outcome = match args.proxy {
        crate::ProxyArg::Stabilizer => certify_via_closest_stabilizer(
            &psi,
            &rho,
            args.samples,
            args.epsilon,
            args.delta,
            args.sample_seed,
        )?,
        crate::ProxyArg::Direct => {
            let plan = CertificationPlan::new(psi.clone(), args.samples, args.epsilon, args.delta)?;
            estimate_fidelity(&plan, &rho, args.sample_seed)?
        }
    };
    let exact = rho.fidelity_with(&psi)?;
    let consistent = (outcome.estimate - exact).abs() <= outcome.delta_f + 3.0 * outcome.stderr;
    println!(
        "estimate {:.6} +- {:.2e}, bound {:.6}, exact {:.6}",
        outcome.estimate, outcome.stderr, outcome.delta_f, exact
    );
    let report = CertifyReport {
        outcome,
        exact_fidelity: exact,
        consistent,
    };
    let path = ctx.output(args.out.as_deref(), "certify.json")?;
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(single(path, state_seed(&args.state)))
}

#[derive(Serialize)]
struct SpectrumSummary {
    n: usize,
    alphas: Vec<f64>,
    sre: Vec<f64>,
    /// Edges of the most populated bin.
    peak_bin: (f64, f64),
}

pub fn spectrum(args: &SpectrumArgs, ctx: &Ctx) -> Result<Outputs> {
    let (psi, desc) = args.state.resolve()?;
    let spec = pauli_spectrum(&psi)?;
    let mut hist = spectrum_histogram(&spec, args.bins)?;
    hist.metadata = desc;
    let sre_vals = args
        .alphas
        .0
        .iter()
        .map(|&a| sre(&spec, a))
        .collect::<stabscope_core::Result<Vec<_>>>()?;
    let peak = hist
        .probabilities
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let summary = SpectrumSummary {
        n: psi.n(),
        alphas: args.alphas.0.clone(),
        sre: sre_vals,
        peak_bin: (hist.edges[peak], hist.edges[peak + 1]),
    };
    for (a, m) in summary.alphas.iter().zip(&summary.sre) {
        println!("M_{a} = {m:.17}");
    }
    println!(
        "peak bin [{:.3e}, {:.3e})",
        summary.peak_bin.0, summary.peak_bin.1
    );
    let path = ctx.output(args.out.as_deref(), "spectrum.csv")?;
    hist.write_csv_file(&path)?;
    let json = sibling(&path, ".sre.json");
    std::fs::write(&json, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(Outputs {
        primary: path.clone(),
        files: vec![path, json],
        seed: state_seed(&args.state),
    })
}

pub fn state(args: &StateCmdArgs, ctx: &Ctx) -> Result<Outputs> {
    let (psi, _) = args.state.resolve()?;
    let path = ctx.output(args.out.as_deref(), "state.json")?;
    psi.write_json(&path)?;
    Ok(single(path, state_seed(&args.state)))
}
