//! Ensemble sweeps and the finite-size-scaling analysis built on them:
//! derivative estimation, crossing detection, curve collapse and the
//! GUE versus random-basis spectrum comparison.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::models::{build_random_basis_state, GueInstance, Model, DEFAULT_DEPTH};
use crate::oracles::d_min;
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectrum::{pauli_spectrum, SpectrumHistogram, MAX_SPECTRUM_QUBITS};
use crate::sre::{critical_tgate_density, critical_time_squared, sre};
use crate::stabilizer::{sample_random_clifford, MAX_ENUMERATION_QUBITS};
use crate::statevector::StateVector;

pub const SWEEP_HEADER: &str = "# stabscope sweep v1";
pub const SWEEP_COLUMNS: &str = "model,n,param,param_kind,alpha,mean,stderr,instances";
pub const AUX_COLUMNS: &str = "model,n,param,param_kind,quantity,mean,stderr,instances";
pub const DEFAULT_INSTANCES: usize = 20;
pub const DEFAULT_BINS: usize = 60;

/// Fraction of the grid span kept on each side of the critical point when
/// comparing collapsed curves.
pub const COLLAPSE_WINDOW_FRACTION: f64 = 0.2;

/// Grid spacings may differ by this relative amount and still count as
/// uniform.
const UNIFORM_TOL: f64 = 1e-6;

/// Compensated sum, independent of how the work was scheduled.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut c) = (0.0, 0.0);
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `(mean, sample std / sqrt(len))`; the error is zero for one value.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / len;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(values.iter().map(|v| (v - mean).powi(2))) / (len - 1.0);
    (mean, (var / len).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: Model,
    pub ns: Vec<usize>,
    /// T-gate densities `q` for `clifford_t` (with `n_t = round(q n)`),
    /// times otherwise.
    pub grid: Vec<f64>,
    pub alphas: Vec<f64>,
    pub instances: usize,
    pub seed: u64,
    /// Rotation layers of the random-basis model.
    pub depth: u64,
    pub record_histograms: bool,
    pub histogram_bins: usize,
    pub record_dmin: bool,
    pub record_fidelity: bool,
    /// GUE only: start from a uniformly random stabilizer state instead of
    /// `|0...0>`.
    pub random_initial: bool,
}

impl SweepConfig {
    pub fn new(model: Model, ns: Vec<usize>, grid: Vec<f64>, alphas: Vec<f64>) -> Self {
        Self {
            model,
            ns,
            grid,
            alphas,
            instances: DEFAULT_INSTANCES,
            seed: 0,
            depth: DEFAULT_DEPTH,
            record_histograms: false,
            histogram_bins: DEFAULT_BINS,
            record_dmin: false,
            record_fidelity: false,
            random_initial: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.grid.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidArgument(
                "n list, grid and alpha list must be non-empty".into(),
            ));
        }
        if self.instances == 0 {
            return Err(Error::InvalidArgument("instances must be >= 1".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "parameter grid must be strictly increasing".into(),
            ));
        }
        if self.grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "grid values must be finite and >= 0".into(),
            ));
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidArgument(
                "alphas must be finite and >= 0".into(),
            ));
        }
        if self.model == Model::RandomBasis && self.depth == 0 {
            return Err(Error::InvalidArgument("depth must be >= 1".into()));
        }
        if self.record_fidelity && self.model != Model::Gue {
            return Err(Error::InvalidArgument(
                "fidelity recording needs the gue model".into(),
            ));
        }
        if self.record_histograms && self.histogram_bins < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 histogram bins".into(),
            ));
        }
        for &n in &self.ns {
            if n == 0 {
                return Err(Error::InvalidArgument("n must be >= 1".into()));
            }
            guard("sweep statevector", n, MAX_SPECTRUM_QUBITS)?;
            if self.record_dmin {
                guard("sweep with D_min recording", n, MAX_ENUMERATION_QUBITS)?;
            }
        }
        Ok(())
    }
}

/// One `(model, n, parameter, alpha)` ensemble average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub n: usize,
    /// Realized parameter: `n_t / n` for the T-gate model, `t` otherwise.
    pub param: f64,
    pub param_kind: String,
    pub alpha: f64,
    pub mean: f64,
    pub stderr: f64,
    pub instances: usize,
}

/// Ensemble average of a non-SRE quantity (`fidelity` or `dmin`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxRow {
    pub model: String,
    pub n: usize,
    pub param: f64,
    pub param_kind: String,
    pub quantity: String,
    pub mean: f64,
    pub stderr: f64,
    pub instances: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub n: usize,
    pub param: f64,
    pub histogram: SpectrumHistogram,
}

/// Grid point as requested and as realized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub requested: f64,
    pub realized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub grid_points: Vec<GridPoint>,
    pub rows: Vec<SweepRow>,
    pub aux: Vec<AuxRow>,
    pub histograms: Vec<HistogramRecord>,
}

struct PointSample {
    sre: Vec<f64>,
    fidelity: Option<f64>,
    dmin: Option<f64>,
    histogram: Option<SpectrumHistogram>,
}

fn measure(
    config: &SweepConfig,
    state: &StateVector,
    initial: Option<&StateVector>,
) -> Result<PointSample> {
    let spec = pauli_spectrum(state)?;
    let sre_vals = config
        .alphas
        .iter()
        .map(|&a| sre(&spec, a))
        .collect::<Result<Vec<_>>>()?;
    let histogram = if config.record_histograms {
        let mut h = SpectrumHistogram::empty(state.n(), config.histogram_bins)?;
        h.accumulate(&spec, 1.0 / config.instances as f64);
        Some(h)
    } else {
        None
    };
    let fidelity = match (config.record_fidelity, initial) {
        (true, Some(init)) => Some(init.fidelity(state)?),
        _ => None,
    };
    let dmin = if config.record_dmin {
        Some(d_min(state)?.value)
    } else {
        None
    };
    Ok(PointSample {
        sre: sre_vals,
        fidelity,
        dmin,
        histogram,
    })
}

/// `n_t = round(q n)` for each density.
pub fn tgate_counts(n: usize, grid: &[f64]) -> Vec<usize> {
    grid.iter()
        .map(|q| (q * n as f64).round() as usize)
        .collect()
}

/// Seed of instance `i` at register size `n`.
pub fn instance_seed(master: u64, n: usize, i: usize) -> u64 {
    derive_seed(derive_seed(master, n as u64), i as u64)
}

/// Runs one instance across the whole grid. Grid points of one instance
/// share randomness: the T-gate model follows one circuit and snapshots
/// it after each requested count, the random-basis model reuses its
/// Clifford layers and the GUE model its Hamiltonian.
fn run_instance(config: &SweepConfig, n: usize, i: usize) -> Result<Vec<PointSample>> {
    let seed = instance_seed(config.seed, n, i);
    match config.model {
        Model::CliffordT => {
            let counts = tgate_counts(n, &config.grid);
            let max = *counts.iter().max().expect("non-empty grid");
            let mut rng = rng_from_seed(seed);
            let mut state = StateVector::zero(n)?;
            let mut snapshots: BTreeMap<usize, PointSample> = BTreeMap::new();
            for k in 0..=max {
                state.apply_circuit(&sample_random_clifford(n, &mut rng)?)?;
                if counts.contains(&k) {
                    snapshots.insert(k, measure(config, &state, None)?);
                }
                if k < max {
                    state.apply_t(0)?;
                }
            }
            // equal counts (possible after rounding) share one snapshot
            counts
                .iter()
                .map(|k| {
                    let s = &snapshots[k];
                    Ok(PointSample {
                        sre: s.sre.clone(),
                        fidelity: s.fidelity,
                        dmin: s.dmin,
                        histogram: s.histogram.clone(),
                    })
                })
                .collect()
        }
        Model::RandomBasis => config
            .grid
            .iter()
            .map(|&t| {
                let rec = build_random_basis_state(n, t, config.depth, seed)?;
                measure(config, &rec.state, None)
            })
            .collect(),
        Model::Gue => {
            let inst = GueInstance::new(n, seed, config.random_initial)?;
            let states = inst.states(&config.grid)?;
            states
                .iter()
                .map(|s| measure(config, s, Some(&inst.initial)))
                .collect()
        }
    }
}

/// Simulates every `(n, grid point, instance)` and averages.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(config, |_, _| Ok(()))
}

/// As [`run_sweep`], calling `on_block(n, rows)` as soon as each `n` is
/// finished so callers can persist partial results.
pub fn run_sweep_with<F>(config: &SweepConfig, mut on_block: F) -> Result<SweepResult>
where
    F: FnMut(usize, &[SweepRow]) -> Result<()>,
{
    config.validate()?;
    let model = config.model.tag().to_string();
    let kind = config.model.param_kind().to_string();
    let mut result = SweepResult {
        config: config.clone(),
        grid_points: Vec::new(),
        rows: Vec::new(),
        aux: Vec::new(),
        histograms: Vec::new(),
    };
    for &n in &config.ns {
        let samples: Vec<Vec<PointSample>> = (0..config.instances)
            .into_par_iter()
            .map(|i| run_instance(config, n, i))
            .collect::<Result<_>>()?;
        let realized: Vec<f64> = match config.model {
            Model::CliffordT => tgate_counts(n, &config.grid)
                .into_iter()
                .map(|k| k as f64 / n as f64)
                .collect(),
            _ => config.grid.clone(),
        };
        let start = result.rows.len();
        for (p, (&requested, &param)) in config.grid.iter().zip(&realized).enumerate() {
            result.grid_points.push(GridPoint {
                n,
                requested,
                realized: param,
            });
            for (j, &alpha) in config.alphas.iter().enumerate() {
                let vals: Vec<f64> = samples.iter().map(|s| s[p].sre[j]).collect();
                let (mean, stderr) = mean_stderr(&vals);
                result.rows.push(SweepRow {
                    model: model.clone(),
                    n,
                    param,
                    param_kind: kind.clone(),
                    alpha,
                    mean,
                    stderr,
                    instances: config.instances,
                });
            }
            let aux_quantities: [(&str, Option<Vec<f64>>); 2] = [
                ("fidelity", samples.iter().map(|s| s[p].fidelity).collect()),
                ("dmin", samples.iter().map(|s| s[p].dmin).collect()),
            ];
            for (quantity, vals) in aux_quantities {
                if let Some(vals) = vals {
                    let (mean, stderr) = mean_stderr(&vals);
                    result.aux.push(AuxRow {
                        model: model.clone(),
                        n,
                        param,
                        param_kind: kind.clone(),
                        quantity: quantity.to_string(),
                        mean,
                        stderr,
                        instances: config.instances,
                    });
                }
            }
            if config.record_histograms {
                let mut h = SpectrumHistogram::empty(n, config.histogram_bins)?;
                for s in &samples {
                    h.merge(s[p].histogram.as_ref().expect("histogram recorded"))?;
                }
                h.metadata = vec![
                    ("model".into(), model.clone()),
                    ("n".into(), n.to_string()),
                    (kind.clone(), format!("{param:.16e}")),
                    ("instances".into(), config.instances.to_string()),
                    ("seed".into(), config.seed.to_string()),
                ];
                result.histograms.push(HistogramRecord {
                    n,
                    param,
                    histogram: h,
                });
            }
        }
        on_block(n, &result.rows[start..])?;
    }
    Ok(result)
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

impl SweepConfig {
    /// `# key: value` metadata lines of the sweep CSV.
    pub fn csv_metadata(&self) -> Vec<(String, String)> {
        let mut meta = vec![
            ("model".to_string(), self.model.tag().to_string()),
            ("ns".into(), fmt_list(&self.ns)),
            ("grid".into(), fmt_list(&self.grid)),
            ("alphas".into(), fmt_list(&self.alphas)),
            ("instances".into(), self.instances.to_string()),
            ("seed".into(), self.seed.to_string()),
        ];
        if self.model == Model::RandomBasis {
            meta.push(("depth".into(), self.depth.to_string()));
        }
        if self.model == Model::Gue {
            meta.push(("random_initial".into(), self.random_initial.to_string()));
        }
        meta
    }
}

impl SweepResult {
    /// Complete CSV, ending with the completion marker.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_sweep_csv(&mut w, &self.config.csv_metadata(), &self.rows)?;
        writeln!(w, "{COMPLETE_MARKER}")?;
        w.flush()?;
        Ok(())
    }

    pub fn write_aux_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{SWEEP_HEADER}")?;
        for (k, v) in self.config.csv_metadata() {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{AUX_COLUMNS}")?;
        for r in &self.aux {
            writeln!(
                w,
                "{},{},{:.16e},{},{},{:.16e},{:.16e},{}",
                r.model, r.n, r.param, r.param_kind, r.quantity, r.mean, r.stderr, r.instances
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Sweep CSV without the completion marker: version header, `# key: value`
/// metadata, column line, rows.
pub fn write_sweep_csv<W: Write>(
    mut w: W,
    metadata: &[(String, String)],
    rows: &[SweepRow],
) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (k, v) in metadata {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{SWEEP_COLUMNS}")?;
    write_sweep_rows(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

pub fn write_sweep_rows<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    for r in rows {
        writeln!(
            w,
            "{},{},{:.16e},{},{:.16e},{:.16e},{:.16e},{}",
            r.model, r.n, r.param, r.param_kind, r.alpha, r.mean, r.stderr, r.instances
        )?;
    }
    Ok(())
}

/// Parsed sweep CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
    /// `true` when the file ends with a `# status: complete` line.
    pub complete: bool,
}

pub const COMPLETE_MARKER: &str = "# status: complete";

pub fn read_sweep_csv<R: BufRead>(reader: R) -> Result<SweepTable> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line?);
    }
    let mut it = lines.iter().filter(|l| !l.trim().is_empty());
    match it.next() {
        Some(h) if h.trim() == SWEEP_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected {SWEEP_HEADER:?} header, found {:?}",
                other.map(String::as_str).unwrap_or("")
            )))
        }
    }
    let mut metadata = Vec::new();
    let mut complete = false;
    let mut body = String::new();
    for line in it {
        if line.trim() == COMPLETE_MARKER {
            complete = true;
        } else if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    for col in SWEEP_COLUMNS.split(',') {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Parse(format!("sweep CSV is missing column {col:?}")));
        }
    }
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()?;
    Ok(SweepTable {
        metadata,
        rows,
        complete,
    })
}

pub fn read_sweep_csv_file(path: impl AsRef<Path>) -> Result<SweepTable> {
    let f = std::fs::File::open(path)?;
    read_sweep_csv(std::io::BufReader::new(f))
}

/// A sampled curve `y(x)` for one register size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn new(n: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(
                "curve abscissa and ordinate differ in length".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "curve abscissa must be strictly increasing".into(),
            ));
        }
        Ok(Self { n, x, y })
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn at(&self, x: f64) -> Option<f64> {
        let (first, last) = (*self.x.first()?, *self.x.last()?);
        if x < first || x > last {
            return None;
        }
        let i = self.x.partition_point(|&v| v <= x);
        if i == 0 {
            return Some(self.y[0]);
        }
        if i >= self.x.len() {
            return Some(self.y[self.y.len() - 1]);
        }
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let f = (x - x0) / (x1 - x0);
        Some(self.y[i - 1] + f * (self.y[i] - self.y[i - 1]))
    }
}

/// Derivative on a uniform grid: central differences inside, second-order
/// one-sided differences at the two ends.
pub fn estimate_derivative(curve: &Curve) -> Result<Curve> {
    let (x, y) = (&curve.x, &curve.y);
    let len = x.len();
    if len < 3 {
        return Err(Error::InvalidArgument(format!(
            "derivative needs >= 3 points, got {len}"
        )));
    }
    let h = (x[len - 1] - x[0]) / (len - 1) as f64;
    if x.windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > UNIFORM_TOL * h.abs())
    {
        return Err(Error::InvalidArgument(
            "derivative needs a uniform grid".into(),
        ));
    }
    let mut d = Vec::with_capacity(len);
    d.push((-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h));
    for i in 1..len - 1 {
        d.push((y[i + 1] - y[i - 1]) / (2.0 * h));
    }
    d.push((3.0 * y[len - 1] - 4.0 * y[len - 2] + y[len - 3]) / (2.0 * h));
    Ok(Curve {
        n: curve.n,
        x: x.clone(),
        y: d,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub n_a: usize,
    pub n_b: usize,
    pub crossing: f64,
    /// Sign changes of `y_a - y_b` on the common grid; the steepest one is
    /// reported.
    pub sign_changes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub alpha: f64,
    /// Abscissa of the curves: `q` or `t2_shifted`.
    pub variable: String,
    pub pairs: Vec<PairCrossing>,
    /// Unweighted mean over adjacent pairs.
    pub pooled: f64,
    /// `max - min` of the pair estimates.
    pub spread: f64,
    pub reference: Option<f64>,
    /// Every adjacent pair coincides on its whole common grid.
    pub degenerate: bool,
}

/// Sorted union of both abscissae inside their common range.
fn common_grid(a: &Curve, b: &Curve) -> Vec<f64> {
    let lo = a.x[0].max(b.x[0]);
    let hi = a.x[a.x.len() - 1].min(b.x[b.x.len() - 1]);
    let mut xs: Vec<f64> =
        a.x.iter()
            .chain(&b.x)
            .copied()
            .filter(|&x| x >= lo && x <= hi)
            .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|p, q| (*p - *q).abs() <= 1e-12 * (1.0 + q.abs()));
    xs
}

/// Intersections of adjacent-`n` curves by linear interpolation of their
/// difference.
pub fn find_crossing(
    curves: &[Curve],
    alpha: f64,
    variable: &str,
    reference: Option<f64>,
) -> Result<CrossingReport> {
    if curves.len() < 2 {
        return Err(Error::InvalidArgument(
            "crossing needs curves for at least two values of n".into(),
        ));
    }
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.n);
    let mut pairs = Vec::new();
    let mut all_degenerate = true;
    for w in sorted.windows(2) {
        let (a, b) = (w[0], w[1]);
        let xs = common_grid(a, b);
        let diffs: Vec<(f64, f64)> = xs
            .iter()
            .filter_map(|&x| Some((x, a.at(x)? - b.at(x)?)))
            .collect();
        let scale = diffs.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max);
        let identical = scale <= 1e-12;
        if identical {
            // coincident curves cross everywhere; report the window centre
            let mid = diffs.get(diffs.len() / 2).map(|p| p.0).ok_or_else(|| {
                Error::NoCrossing(format!("curves for n = {} and {} do not overlap", a.n, b.n))
            })?;
            pairs.push(PairCrossing {
                n_a: a.n,
                n_b: b.n,
                crossing: mid,
                sign_changes: diffs.len(),
            });
            continue;
        }
        all_degenerate = false;
        let mut best: Option<(f64, f64)> = None;
        let mut changes = 0;
        for p in diffs.windows(2) {
            let ((x0, d0), (x1, d1)) = (p[0], p[1]);
            let crosses =
                (d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0) || (d0 == 0.0 && d1 != 0.0);
            if !crosses {
                continue;
            }
            changes += 1;
            let x = if d0 == 0.0 {
                x0
            } else {
                x0 + (x1 - x0) * d0 / (d0 - d1)
            };
            let steep = (d1 - d0).abs();
            if best.map_or(true, |(s, _)| steep > s) {
                best = Some((steep, x));
            }
        }
        let Some((_, x)) = best else {
            return Err(Error::NoCrossing(format!(
                "no crossing in window for n = {} and {}",
                a.n, b.n
            )));
        };
        pairs.push(PairCrossing {
            n_a: a.n,
            n_b: b.n,
            crossing: x,
            sign_changes: changes,
        });
    }
    let vals: Vec<f64> = pairs.iter().map(|p| p.crossing).collect();
    let pooled = vals.iter().sum::<f64>() / vals.len() as f64;
    let spread = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CrossingReport {
        alpha,
        variable: variable.to_string(),
        pairs,
        pooled,
        spread,
        reference,
        degenerate: all_degenerate,
    })
}

/// `x -> (x - shift(n)) n^kappa`, `y -> y n^gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRule {
    pub kappa: f64,
    pub gamma: f64,
}

impl CollapseRule {
    pub const SHIFT_ONLY: CollapseRule = CollapseRule {
        kappa: 0.0,
        gamma: 0.0,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub rule: CollapseRule,
    /// `(n, shift)` per curve.
    pub shifts: Vec<(usize, f64)>,
    /// Half-width of the comparison window in the unscaled shifted
    /// variable.
    pub half_window: f64,
    /// Sup over the common rescaled window of `max_n y - min_n y`.
    pub residual: f64,
    pub points_compared: usize,
}

/// Rescales each curve around its critical point and measures how far
/// apart they remain near it.
pub fn collapse_curves(
    curves: &[Curve],
    shift: impl Fn(usize) -> f64,
    rule: CollapseRule,
    half_window: Option<f64>,
) -> Result<CollapseReport> {
    if curves.len() < 2 {
        return Err(Error::InvalidArgument(
            "collapse needs at least two curves".into(),
        ));
    }
    let span = curves
        .iter()
        .map(|c| c.x[c.x.len() - 1] - c.x[0])
        .fold(f64::INFINITY, f64::min);
    let w = half_window.unwrap_or(COLLAPSE_WINDOW_FRACTION * span);
    let mut shifts = Vec::new();
    let mut scaled = Vec::new();
    for c in curves {
        let s = shift(c.n);
        let nf = c.n as f64;
        let (sx, sy) = (nf.powf(rule.kappa), nf.powf(rule.gamma));
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (&x, &y) in c.x.iter().zip(&c.y) {
            let u = x - s;
            if u.abs() <= w * (1.0 + 1e-12) {
                xs.push(u * sx);
                ys.push(y * sy);
            }
        }
        shifts.push((c.n, s));
        if xs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "curve for n = {} has no points in the window",
                c.n
            )));
        }
        scaled.push(Curve {
            n: c.n,
            x: xs,
            y: ys,
        });
    }
    let lo = scaled
        .iter()
        .map(|c| c.x[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = scaled
        .iter()
        .map(|c| c.x[c.x.len() - 1])
        .fold(f64::INFINITY, f64::min);
    if lo > hi {
        return Err(Error::InvalidArgument(
            "rescaled curves do not overlap".into(),
        ));
    }
    let mut xs: Vec<f64> = scaled
        .iter()
        .flat_map(|c| c.x.iter().copied())
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut residual: f64 = 0.0;
    for &x in &xs {
        let vals: Vec<f64> = scaled.iter().filter_map(|c| c.at(x)).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        residual = residual.max(max - min);
    }
    Ok(CollapseReport {
        rule,
        shifts,
        half_window: w,
        residual,
        points_compared: xs.len(),
    })
}

/// How a swept parameter maps onto the scaling analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingVariable {
    /// Abscissa `q`, ordinate the density `M / n`.
    Density,
    /// Abscissa `t^2`, ordinate `M`, shifted per `n` by the critical
    /// `t_c^2`.
    TimeSquared,
}

impl ScalingVariable {
    pub fn from_param_kind(kind: &str) -> Result<Self> {
        match kind {
            "q" => Ok(ScalingVariable::Density),
            "t" => Ok(ScalingVariable::TimeSquared),
            _ => Err(Error::InvalidArgument(format!(
                "cannot analyze parameter kind {kind:?}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalingVariable::Density => "q",
            ScalingVariable::TimeSquared => "t2_shifted",
        }
    }

    /// Per-`n` shift applied before comparing curves.
    pub fn shift(&self, alpha: f64, n: usize) -> Result<f64> {
        match self {
            ScalingVariable::Density => Ok(0.0),
            ScalingVariable::TimeSquared => Ok(critical_time_squared(alpha, n)?.value),
        }
    }

    /// Critical point in the analysis variable.
    pub fn reference(&self, alpha: f64) -> Result<f64> {
        match self {
            ScalingVariable::Density => Ok(critical_tgate_density(alpha)?.value),
            ScalingVariable::TimeSquared => Ok(0.0),
        }
    }
}

/// Groups rows of one alpha (and one model) into per-`n` curves in the
/// analysis variables.
pub fn curves_from_rows(rows: &[SweepRow], alpha: f64, var: ScalingVariable) -> Result<Vec<Curve>> {
    let mut by_n: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| (r.alpha - alpha).abs() < 1e-12) {
        let (x, y) = match var {
            ScalingVariable::Density => (r.param, r.mean / r.n as f64),
            ScalingVariable::TimeSquared => (r.param * r.param, r.mean),
        };
        by_n.entry(r.n).or_default().push((x, y));
    }
    if by_n.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no rows with alpha = {alpha}"
        )));
    }
    by_n.into_iter()
        .map(|(n, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (x, y) = pts.into_iter().unzip();
            Curve::new(n, x, y)
        })
        .collect()
}

/// Derivative curves, shifted per `n` so the expected crossing is at the
/// reference.
pub fn aligned_derivatives(
    rows: &[SweepRow],
    alpha: f64,
    var: ScalingVariable,
) -> Result<Vec<Curve>> {
    curves_from_rows(rows, alpha, var)?
        .iter()
        .map(|c| {
            let mut d = estimate_derivative(c)?;
            let s = var.shift(alpha, c.n)?;
            for x in d.x.iter_mut() {
                *x -= s;
            }
            Ok(d)
        })
        .collect()
}

/// Derivative, alignment and crossing in one step.
pub fn crossing_from_rows(
    rows: &[SweepRow],
    alpha: f64,
    var: ScalingVariable,
) -> Result<CrossingReport> {
    let curves = aligned_derivatives(rows, alpha, var)?;
    find_crossing(&curves, alpha, var.name(), Some(var.reference(alpha)?))
}

/// Derivative and collapse around the reference critical point.
pub fn collapse_from_rows(
    rows: &[SweepRow],
    alpha: f64,
    var: ScalingVariable,
    rule: CollapseRule,
) -> Result<CollapseReport> {
    let curves = aligned_derivatives(rows, alpha, var)?;
    let reference = var.reference(alpha)?;
    collapse_curves(&curves, |_| reference, rule, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparisonRow {
    pub t: f64,
    pub tv_distance: f64,
    pub gue: SpectrumHistogram,
    pub random_basis: SpectrumHistogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub n: usize,
    pub depth: u64,
    pub instances: usize,
    pub seed: u64,
    pub bins: usize,
    pub rows: Vec<ModelComparisonRow>,
}

/// Binned ensemble spectra of GUE evolution and random-basis rotations at
/// matched times, with their total-variation distance.
pub fn compare_models(
    n: usize,
    times: &[f64],
    depth: u64,
    instances: usize,
    seed: u64,
    bins: usize,
) -> Result<ModelComparison> {
    guard("model comparison", n, 10)?;
    let histograms = |model: Model| -> Result<Vec<SpectrumHistogram>> {
        let mut config = SweepConfig::new(model, vec![n], times.to_vec(), vec![2.0]);
        config.instances = instances;
        config.seed = seed;
        config.depth = depth;
        config.record_histograms = true;
        config.histogram_bins = bins;
        Ok(run_sweep(&config)?
            .histograms
            .into_iter()
            .map(|h| h.histogram)
            .collect())
    };
    let gue = histograms(Model::Gue)?;
    let rb = histograms(Model::RandomBasis)?;
    let rows = times
        .iter()
        .zip(gue.into_iter().zip(rb))
        .map(|(&t, (g, r))| {
            Ok(ModelComparisonRow {
                t,
                tv_distance: g.total_variation(&r)?,
                gue: g,
                random_basis: r,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ModelComparison {
        n,
        depth,
        instances,
        seed,
        bins,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_clifford_t_state;
    use crate::sre::{m2_clifford_t_asymptotic, m2_clifford_t_exact};

    fn analytic_tgate_rows(ns: &[usize], qmax: f64, steps: usize) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for &n in ns {
            for k in 0..=steps {
                let q = qmax * k as f64 / steps as f64;
                rows.push(SweepRow {
                    model: "clifford_t_asymptotic".into(),
                    n,
                    param: q,
                    param_kind: "q".into(),
                    alpha: 2.0,
                    mean: m2_clifford_t_asymptotic(n, q).unwrap(),
                    stderr: 0.0,
                    instances: 0,
                });
            }
        }
        rows
    }

    #[test]
    fn trajectory_snapshots_match_direct_construction() {
        let mut config = SweepConfig::new(
            Model::CliffordT,
            vec![4],
            vec![0.0, 0.5, 1.0, 1.5],
            vec![2.0],
        );
        config.instances = 2;
        config.seed = 9;
        let samples = run_instance(&config, 4, 1).unwrap();
        let seed = instance_seed(9, 4, 1);
        for (k, s) in [0usize, 2, 4, 6].iter().zip(&samples) {
            let rec = build_clifford_t_state(4, *k, seed).unwrap();
            let direct = sre(&pauli_spectrum(&rec.state).unwrap(), 2.0).unwrap();
            assert!((s.sre[0] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_matches_exact_formula_small() {
        let grid: Vec<f64> = (0..=6).map(|k| k as f64 / 4.0).collect();
        let mut config = SweepConfig::new(Model::CliffordT, vec![4], grid, vec![2.0]);
        config.instances = 60;
        config.seed = 3;
        let res = run_sweep(&config).unwrap();
        for r in &res.rows {
            let exact = m2_clifford_t_exact(4, (r.param * 4.0).round()).unwrap();
            assert!(
                (r.mean - exact).abs() <= 4.0 * r.stderr + 1e-12,
                "q={} mean={} exact={} se={}",
                r.param,
                r.mean,
                exact,
                r.stderr
            );
        }
    }

    #[test]
    fn sweep_is_reproducible_byte_for_byte() {
        let mut config =
            SweepConfig::new(Model::RandomBasis, vec![3], vec![0.0, 0.5], vec![0.5, 2.0]);
        config.instances = 3;
        config.depth = 20;
        config.seed = 17;
        let mut a = Vec::new();
        run_sweep(&config).unwrap().write_csv(&mut a).unwrap();
        let mut b = Vec::new();
        run_sweep(&config).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let table = read_sweep_csv(a.as_slice()).unwrap();
        assert_eq!(table.rows, run_sweep(&config).unwrap().rows);
        assert!(table.complete);
        let mut partial = Vec::new();
        write_sweep_csv(&mut partial, &config.csv_metadata(), &table.rows[..2]).unwrap();
        let table = read_sweep_csv(partial.as_slice()).unwrap();
        assert!(!table.complete);
        assert_eq!(table.rows.len(), 2);
    }

    #[test]
    fn config_validation() {
        let ok = SweepConfig::new(Model::Gue, vec![3], vec![0.0, 1.0], vec![2.0]);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.grid = vec![1.0, 0.5];
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.instances = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.ns = vec![13];
        assert!(matches!(bad.validate(), Err(Error::SizeGuard { .. })));
        let mut bad = ok.clone();
        bad.ns = vec![6];
        bad.record_dmin = true;
        assert!(matches!(bad.validate(), Err(Error::SizeGuard { .. })));
        let mut bad = ok;
        bad.model = Model::CliffordT;
        bad.record_fidelity = true;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gue_sweep_records_fidelity_dmin_and_histograms() {
        let mut config = SweepConfig::new(Model::Gue, vec![3], vec![0.0, 0.3], vec![2.0]);
        config.instances = 4;
        config.record_fidelity = true;
        config.record_dmin = true;
        config.record_histograms = true;
        let res = run_sweep(&config).unwrap();
        assert_eq!(res.aux.len(), 4);
        let f0 = res
            .aux
            .iter()
            .find(|a| a.quantity == "fidelity" && a.param == 0.0)
            .unwrap();
        assert!((f0.mean - 1.0).abs() < 1e-12);
        let d0 = res
            .aux
            .iter()
            .find(|a| a.quantity == "dmin" && a.param == 0.0)
            .unwrap();
        assert!(d0.mean.abs() < 1e-9);
        assert_eq!(res.histograms.len(), 2);
        for h in &res.histograms {
            assert!((h.histogram.total() - 1.0).abs() < 1e-9);
        }
        let back: SweepResult = serde_json::from_str(&res.to_json().unwrap()).unwrap();
        assert_eq!(back, res);
    }

    #[test]
    fn stderr_halves_with_four_times_the_instances() {
        let run = |instances| {
            let mut c = SweepConfig::new(Model::CliffordT, vec![4], vec![0.5], vec![2.0]);
            c.instances = instances;
            c.seed = 12;
            run_sweep(&c).unwrap().rows[0].stderr
        };
        let ratio = run(400) / run(100);
        assert!((ratio - 0.5).abs() < 0.15, "{ratio}");
    }

    #[test]
    fn derivative_basics() {
        let x: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let lin = Curve::new(1, x.clone(), x.iter().map(|v| 3.0 * v + 1.0).collect()).unwrap();
        for d in estimate_derivative(&lin).unwrap().y {
            assert!((d - 3.0).abs() < 1e-12);
        }
        let par = Curve::new(1, x.clone(), x.iter().map(|v| v * v).collect()).unwrap();
        let d = estimate_derivative(&par).unwrap().y;
        for i in 0..d.len() {
            assert!((d[i] + d[d.len() - 1 - i]).abs() < 1e-12);
            assert!((d[i] - 2.0 * x[i]).abs() < 1e-12);
        }
        let bad = Curve::new(1, vec![0.0, 0.1, 0.3], vec![0.0; 3]).unwrap();
        assert!(estimate_derivative(&bad).is_err());
        let short = Curve::new(1, vec![0.0, 0.1], vec![0.0; 2]).unwrap();
        assert!(estimate_derivative(&short).is_err());
    }

    #[test]
    fn derivative_of_asymptotic_curve_at_small_q() {
        let n = 200;
        let x: Vec<f64> = (0..5).map(|i| 0.001 * i as f64).collect();
        let y = x
            .iter()
            .map(|&q| m2_clifford_t_asymptotic(n, q).unwrap() / n as f64)
            .collect();
        let d = estimate_derivative(&Curve::new(n, x, y).unwrap()).unwrap();
        assert!((d.y[2] - (4.0f64 / 3.0).ln()).abs() < 1e-4, "{}", d.y[2]);
    }

    #[test]
    fn analytic_tgate_crossing() {
        let rows = analytic_tgate_rows(&[8, 16, 32, 64], 5.0, 500);
        let rep = crossing_from_rows(&rows, 2.0, ScalingVariable::Density).unwrap();
        assert!((rep.pooled - 2.40942).abs() < 0.01, "{rep:?}");
        assert!(!rep.degenerate);
        assert_eq!(rep.pairs.len(), 3);
        let back: CrossingReport =
            serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn identical_curves_are_degenerate() {
        let c = Curve::new(4, vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 0.0]).unwrap();
        let d = Curve { n: 6, ..c.clone() };
        let rep = find_crossing(&[c.clone(), d.clone()], 2.0, "q", None).unwrap();
        assert!(rep.degenerate);
        let col = collapse_curves(&[c, d], |_| 1.0, CollapseRule::SHIFT_ONLY, None).unwrap();
        assert_eq!(col.residual, 0.0);
    }

    #[test]
    fn crossing_errors() {
        let a = Curve::new(4, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let b = Curve::new(6, vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            find_crossing(&[a.clone(), b], 2.0, "q", None),
            Err(Error::NoCrossing(_))
        ));
        assert!(find_crossing(&[a], 2.0, "q", None).is_err());
    }

    #[test]
    fn tgate_collapse_needs_the_right_shift() {
        let rows = analytic_tgate_rows(&[16, 32, 64], 5.0, 500);
        let curves = curves_from_rows(&rows, 2.0, ScalingVariable::Density)
            .unwrap()
            .iter()
            .map(|c| estimate_derivative(c).unwrap())
            .collect::<Vec<_>>();
        let qc = critical_tgate_density(2.0).unwrap().value;
        let rule = CollapseRule {
            kappa: 1.0,
            gamma: 0.0,
        };
        let good = collapse_curves(&curves, |_| qc, rule, Some(0.5)).unwrap();
        let bad = collapse_curves(&curves, |_| qc + 1.0, rule, Some(0.5)).unwrap();
        assert!(good.residual < 0.05, "{good:?}");
        assert!(
            bad.residual > 3.0 * good.residual,
            "{} vs {}",
            bad.residual,
            good.residual
        );
    }

    #[test]
    fn csv_rejects_missing_columns_and_bad_header() {
        let text = format!("{SWEEP_HEADER}\nmodel,n,param\nclifford_t,4,0.0\n");
        assert!(matches!(
            read_sweep_csv(text.as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(read_sweep_csv("model,n\n".as_bytes()).is_err());
    }

    #[test]
    fn models_agree_at_zero_time() {
        let cmp = compare_models(3, &[0.0], 10, 3, 1, 20).unwrap();
        assert!(cmp.rows[0].tv_distance < 1e-12);
    }
}
