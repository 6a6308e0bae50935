use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::{Context, Result};
use stabscope_core::experiments::{
    run_sweep_with, write_sweep_csv, write_sweep_rows, COMPLETE_MARKER,
};
use stabscope_core::{Model, SweepConfig};

use super::sibling;
use crate::grid::sqrt_grid;
use crate::{usage, Ctx, Outputs, Record, SweepArgs};

pub fn config(args: &SweepArgs) -> Result<SweepConfig> {
    let model = Model::from(args.model);
    let grid = match model {
        Model::CliffordT => {
            if args.t.is_some() || args.t2.is_some() {
                return Err(usage("clifford-t sweeps take --q, not --t/--t2"));
            }
            args.q
                .clone()
                .ok_or_else(|| usage("clifford-t sweeps need --q"))?
                .0
        }
        Model::RandomBasis | Model::Gue => {
            if args.q.is_some() {
                return Err(usage(format!("{model} sweeps take --t or --t2, not --q")));
            }
            match (&args.t, &args.t2) {
                (Some(t), None) => t.0.clone(),
                (None, Some(t2)) => sqrt_grid(&t2.0)?,
                _ => return Err(usage(format!("{model} sweeps need --t or --t2"))),
            }
        }
    };
    let mut c = SweepConfig::new(model, args.ns.0.clone(), grid, args.alphas.0.clone());
    c.instances = args.instances;
    c.seed = args.seed;
    c.depth = args.depth;
    c.record_histograms = args.record.contains(&Record::Hist);
    c.record_dmin = args.record.contains(&Record::Dmin);
    c.record_fidelity = args.record.contains(&Record::Fidelity);
    c.histogram_bins = args.bins;
    c.random_initial = args.random_initial;
    if c.random_initial && model != Model::Gue {
        return Err(usage("--random-initial applies to the gue model only"));
    }
    c.validate()?;
    Ok(c)
}

/// Streams rows to the CSV as each register size finishes; the completion
/// marker is written only after the last one.
pub fn run(args: &SweepArgs, ctx: &Ctx) -> Result<Outputs> {
    let config = config(args)?;
    let path = ctx.output(
        args.out.as_deref(),
        &format!("sweep_{}.csv", config.model.tag()),
    )?;
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_sweep_csv(&mut w, &config.csv_metadata(), &[])?;
    w.flush()?;
    let result = run_sweep_with(&config, |n, rows| {
        write_sweep_rows(&mut w, rows)?;
        w.flush()?;
        eprintln!("n = {n}: {} rows", rows.len());
        Ok(())
    })?;
    writeln!(w, "{COMPLETE_MARKER}")?;
    w.flush()?;
    drop(w);

    let mut files = vec![path.clone()];
    if !result.aux.is_empty() {
        let aux = sibling(&path, ".aux.csv");
        result.write_aux_csv(BufWriter::new(File::create(&aux)?))?;
        files.push(aux);
    }
    if !result.histograms.is_empty() {
        let dir = sibling(&path, "_hist");
        std::fs::create_dir_all(&dir)?;
        let kind = config.model.param_kind();
        for h in &result.histograms {
            let f = dir.join(format!("n{}_{kind}{:.4}.csv", h.n, h.param));
            h.histogram.write_csv_file(&f)?;
            files.push(f);
        }
    }
    Ok(Outputs {
        primary: path,
        files,
        seed: Some(config.seed),
    })
}
