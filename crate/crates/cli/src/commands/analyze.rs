use anyhow::Result;
use stabscope_core::experiments::{
    aligned_derivatives, collapse_curves, crossing_from_rows, read_sweep_csv_file, CollapseRule,
    ScalingVariable,
};

use crate::{usage, AnalyzeArgs, AnalyzeMode, Ctx, Outputs};

pub fn run(args: &AnalyzeArgs, ctx: &Ctx) -> Result<Outputs> {
    let table = read_sweep_csv_file(&args.input)?;
    if !table.complete {
        eprintln!("warning: {} has no completion marker", args.input.display());
    }
    let mut kinds: Vec<&str> = table.rows.iter().map(|r| r.param_kind.as_str()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    let mut models: Vec<&str> = table.rows.iter().map(|r| r.model.as_str()).collect();
    models.sort_unstable();
    models.dedup();
    if kinds.len() != 1 || models.len() != 1 {
        return Err(usage(format!(
            "input must hold one model and one parameter kind, found models {models:?} and kinds {kinds:?}"
        )));
    }
    let var = ScalingVariable::from_param_kind(kinds[0])?;
    let ns: std::collections::BTreeSet<usize> = table.rows.iter().map(|r| r.n).collect();
    if ns.len() < 2 {
        return Err(usage(format!(
            "{:?} analysis needs at least two values of n, found {ns:?}",
            args.mode
        )));
    }
    let (name, json, summary) = match args.mode {
        AnalyzeMode::Crossing => {
            let rep = crossing_from_rows(&table.rows, args.alpha, var)?;
            let reference = rep
                .reference
                .map_or_else(|| "none".to_string(), |r| format!("{r:.6}"));
            let summary = format!(
                "crossing {} = {:.6} (spread {:.2e}, reference {reference}, degenerate {})",
                rep.variable, rep.pooled, rep.spread, rep.degenerate
            );
            ("crossing", serde_json::to_string_pretty(&rep)?, summary)
        }
        AnalyzeMode::Collapse => {
            let kappa = args.kappa.unwrap_or(match var {
                ScalingVariable::Density => 1.0,
                ScalingVariable::TimeSquared => 0.0,
            });
            let curves = aligned_derivatives(&table.rows, args.alpha, var)?;
            let reference = var.reference(args.alpha)?;
            let rule = CollapseRule {
                kappa,
                gamma: args.gamma,
            };
            let rep = collapse_curves(&curves, |_| reference, rule, args.window)?;
            let summary = format!(
                "collapse residual {:.6e} over |x - x_c| <= {:.4}",
                rep.residual, rep.half_window
            );
            ("collapse", serde_json::to_string_pretty(&rep)?, summary)
        }
    };
    let path = ctx.output(args.out.as_deref(), &format!("{name}.json"))?;
    std::fs::write(&path, json + "\n")?;
    println!("{summary}");
    Ok(Outputs {
        primary: path.clone(),
        files: vec![path],
        seed: None,
    })
}
