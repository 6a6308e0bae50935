use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Result;
use stabscope_core::experiments::{write_sweep_csv, COMPLETE_MARKER};
use stabscope_core::sre::{
    critical_tgate_density, critical_time_squared, gue_sre_approx, m2_clifford_t_asymptotic,
    m2_clifford_t_exact, m2_random_basis_asymptotic, m2_random_basis_deep_limit,
    m2_random_basis_time, sre_haar, sre_linear_model, sre_max, sre_per_tgate,
};
use stabscope_core::SweepRow;

use crate::grid::sqrt_grid;
use crate::{usage, AnalyticArgs, Ctx, Formula, Outputs};

fn row(model: &str, n: usize, param: f64, kind: &str, alpha: f64, mean: f64) -> SweepRow {
    SweepRow {
        model: model.into(),
        n,
        param,
        param_kind: kind.into(),
        alpha,
        mean,
        stderr: 0.0,
        instances: 0,
    }
}

fn need<'a, T>(v: &'a Option<T>, flag: &str, formula: Formula) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| usage(format!("formula {formula:?} needs {flag}")))
}

pub fn rows(args: &AnalyticArgs) -> Result<Vec<SweepRow>> {
    let f = args.formula;
    let ns = || need(&args.ns, "--n", f).map(|s| s.0.clone());
    let alphas = || need(&args.alphas, "--alphas", f).map(|a| a.0.clone());
    let times = || -> Result<Vec<f64>> {
        match (&args.t, &args.t2) {
            (Some(t), None) => Ok(t.0.clone()),
            (None, Some(t2)) => sqrt_grid(&t2.0),
            _ => Err(usage(format!("formula {f:?} needs --t or --t2"))),
        }
    };
    let mut out = Vec::new();
    match f {
        Formula::M2CliffordT => {
            let nts = need(&args.nt, "--nt", f)?;
            for n in ns()? {
                for &nt in &nts.0 {
                    let m = m2_clifford_t_exact(n, nt)?;
                    out.push(row("m2_clifford_t_exact", n, nt / n as f64, "q", 2.0, m));
                }
            }
        }
        Formula::M2CliffordTAsymptotic => {
            let qs = need(&args.q, "--q", f)?;
            for n in ns()? {
                for &q in &qs.0 {
                    out.push(row(
                        "m2_clifford_t_asymptotic",
                        n,
                        q,
                        "q",
                        2.0,
                        m2_clifford_t_asymptotic(n, q)?,
                    ));
                }
            }
        }
        Formula::LinearModel => {
            let nts = need(&args.nt, "--nt", f)?;
            for n in ns()? {
                for a in alphas()? {
                    for &nt in &nts.0 {
                        out.push(row(
                            "sre_linear_model",
                            n,
                            nt / n as f64,
                            "q",
                            a,
                            sre_linear_model(n, nt, a)?,
                        ));
                    }
                }
            }
        }
        Formula::RandomBasis | Formula::RandomBasisDeep | Formula::RandomBasisAsymptotic => {
            let ts = times()?;
            for n in ns()? {
                for &t in &ts {
                    let (name, m) = match f {
                        Formula::RandomBasis => {
                            ("m2_random_basis_exact", m2_random_basis_time(t, args.d, n)?)
                        }
                        Formula::RandomBasisDeep => {
                            ("m2_random_basis_deep", m2_random_basis_deep_limit(t, n))
                        }
                        _ => (
                            "m2_random_basis_asymptotic",
                            m2_random_basis_asymptotic(t, n),
                        ),
                    };
                    out.push(row(name, n, t, "t", 2.0, m));
                }
            }
        }
        Formula::GueApprox => {
            let ts = times()?;
            for n in ns()? {
                for a in alphas()? {
                    for &t in &ts {
                        out.push(row(
                            "gue_sre_approx",
                            n,
                            t,
                            "t",
                            a,
                            gue_sre_approx(a, n, t)?,
                        ));
                    }
                }
            }
        }
        Formula::SreHaar => {
            for n in ns()? {
                for a in alphas()? {
                    out.push(row("sre_haar", n, a, "alpha", a, sre_haar(a, n)?));
                }
            }
        }
        Formula::SreMax => {
            for n in ns()? {
                for a in alphas()? {
                    let m = sre_max(a, n)?;
                    out.push(row("sre_max_uniform", n, a, "alpha", a, m.uniform));
                    out.push(row("sre_max_limit", n, a, "alpha", a, m.limit));
                }
            }
        }
        Formula::PerTgate => {
            for a in alphas()? {
                out.push(row("sre_per_tgate", 1, a, "alpha", a, sre_per_tgate(a)?));
            }
        }
        Formula::CriticalTable => {
            // q_c is n-independent (n = 0); t_c^2 is reported per requested n,
            // defaulting to n = 1, i.e. per qubit where it is linear in n
            let ns = args
                .ns
                .as_ref()
                .map(|s| s.0.clone())
                .unwrap_or_else(|| vec![1]);
            for a in alphas()? {
                out.push(row(
                    "critical_tgate_density",
                    0,
                    a,
                    "alpha",
                    a,
                    critical_tgate_density(a)?.value,
                ));
                for &n in &ns {
                    out.push(row(
                        "critical_time_squared",
                        n,
                        a,
                        "alpha",
                        a,
                        critical_time_squared(a, n)?.value,
                    ));
                }
            }
        }
    }
    Ok(out)
}

pub fn run(args: &AnalyticArgs, ctx: &Ctx) -> Result<Outputs> {
    let rows = rows(args)?;
    let name = format!("{:?}", args.formula).to_lowercase();
    let path = ctx.output(args.out.as_deref(), &format!("analytic_{name}.csv"))?;
    let mut meta = vec![("formula".to_string(), name)];
    if matches!(args.formula, Formula::RandomBasis) {
        meta.push(("depth".into(), args.d.to_string()));
    }
    let mut w = BufWriter::new(File::create(&path)?);
    write_sweep_csv(&mut w, &meta, &rows)?;
    writeln!(w, "{COMPLETE_MARKER}")?;
    w.flush()?;
    Ok(Outputs {
        primary: path.clone(),
        files: vec![path],
        seed: None,
    })
}
