use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn stabscope(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabscope"))
        .args(args)
        .current_dir(dir)
        .env_remove("STABSCOPE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = stabscope(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(path: &Path) -> Vec<csv::StringRecord> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sweep_grid_arithmetic_and_completion_marker() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "sweep",
            "--model",
            "clifford-t",
            "--n",
            "6,8",
            "--q",
            "0:5:0.25",
            "--alphas",
            "0.5,1,2,4",
            "--instances",
            "20",
            "--seed",
            "42",
            "--out",
            "runs/ct.csv",
        ],
    );
    let csv = dir.path().join("runs/ct.csv");
    assert_eq!(data_rows(&csv).len(), 2 * 21 * 4);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# stabscope sweep v1\n"));
    assert!(text.trim_end().ends_with("# status: complete"));
    let m = json(&dir.path().join("runs/ct.csv.manifest.json"));
    assert_eq!(m["subcommand"], "sweep");
    assert_eq!(m["seed"], 42);
}

#[test]
fn usage_and_guard_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = stabscope(
        dir.path(),
        &[
            "sweep",
            "--model",
            "heisenberg",
            "--n",
            "3",
            "--t",
            "0:1:0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = stabscope(
        dir.path(),
        &["sweep", "--model", "gue", "--n", "3", "--q", "0:1:0.5"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = stabscope(
        dir.path(),
        &["sweep", "--model", "gue", "--n", "13", "--t", "0:1:0.5"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("sweep statevector is limited to n <= 12")
    );
    let out = stabscope(dir.path(), &["oracle", "lr", "--preset", "t", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n <= 3"));
    let out = stabscope(dir.path(), &["analytic", "--formula", "no-such-formula"]);
    assert_eq!(out.status.code(), Some(2));
    let out = stabscope(
        dir.path(),
        &["sweep", "--model", "gue", "--n", "3", "--t", "1:0:0.5"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analytic_crossing_and_collapse() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "analytic",
            "--formula",
            "m2-clifford-t-asymptotic",
            "--n",
            "8,16,32,64",
            "--q",
            "0:5:0.01",
            "--out",
            "a.csv",
        ],
    );
    let stdout = ok(
        dir.path(),
        &[
            "analyze", "--in", "a.csv", "--mode", "crossing", "--out", "c.json",
        ],
    );
    assert!(stdout.contains("crossing q"));
    let rep = json(&dir.path().join("c.json"));
    assert!((rep["pooled"].as_f64().unwrap() - 2.40942).abs() < 0.01);

    // two copies of one curve under different n collapse once the density
    // normalization is undone (gamma = 1) and the abscissa is left unscaled
    let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let dup: String = text
        .lines()
        .filter(|l| l.starts_with('#') || l.starts_with("model") || l.contains(",8,"))
        .flat_map(|l| {
            if l.contains(",8,") {
                vec![l.to_string(), l.replacen(",8,", ",9,", 1)]
            } else {
                vec![l.to_string()]
            }
        })
        .map(|l| l + "\n")
        .collect();
    std::fs::write(dir.path().join("dup.csv"), dup).unwrap();
    ok(
        dir.path(),
        &[
            "analyze", "--in", "dup.csv", "--mode", "collapse", "--kappa", "0", "--gamma", "1",
            "--out", "col.json",
        ],
    );
    assert!(
        json(&dir.path().join("col.json"))["residual"]
            .as_f64()
            .unwrap()
            < 1e-12
    );

    ok(
        dir.path(),
        &[
            "analytic",
            "--formula",
            "m2-clifford-t-asymptotic",
            "--n",
            "8",
            "--q",
            "0:5:0.1",
            "--out",
            "one.csv",
        ],
    );
    let out = stabscope(
        dir.path(),
        &["analyze", "--in", "one.csv", "--mode", "crossing"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least two values of n"));
}

#[test]
fn analytic_tables() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "analytic",
            "--formula",
            "critical-table",
            "--alphas",
            "0:4:0.1",
            "--out",
            "crit.csv",
        ],
    );
    let rows = data_rows(&dir.path().join("crit.csv"));
    assert_eq!(rows.len(), 2 * 41);
    let q2 = rows
        .iter()
        .find(|r| &r[0] == "critical_tgate_density" && r[4].parse::<f64>().unwrap() == 2.0)
        .unwrap();
    assert!((q2[5].parse::<f64>().unwrap() - 2.40942).abs() < 1e-5);

    ok(
        dir.path(),
        &[
            "analytic",
            "--formula",
            "m2-clifford-t",
            "--n",
            "14",
            "--nt",
            "0:40",
            "--out",
            "m2.csv",
        ],
    );
    let rows = data_rows(&dir.path().join("m2.csv"));
    assert_eq!(rows.len(), 41);
    assert!(rows
        .iter()
        .all(|r| &r[7] == "0" && r[6].parse::<f64>().unwrap() == 0.0));

    ok(
        dir.path(),
        &[
            "analytic",
            "--formula",
            "sre-haar",
            "--n",
            "12",
            "--alphas",
            "0.5,2,3",
            "--out",
            "h.csv",
        ],
    );
    assert_eq!(data_rows(&dir.path().join("h.csv")).len(), 3);
    let out = stabscope(
        dir.path(),
        &["analytic", "--formula", "sre-haar", "--alphas", "2"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_on_t_state_file() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["state", "--preset", "t", "--out", "t.json"]);
    let stdout = ok(
        dir.path(),
        &[
            "oracle",
            "dmin",
            "--state-file",
            "t.json",
            "--out",
            "d.json",
        ],
    );
    let v: f64 = stdout.trim().rsplit(' ').next().unwrap().parse().unwrap();
    let exact = -((1.0 + 0.5f64.sqrt()) / 2.0).ln();
    assert!((v - exact).abs() < 1e-12);
    let res = json(&dir.path().join("d.json"));
    assert_eq!(res["witness"]["kind"], "stabilizer");

    let stdout = ok(
        dir.path(),
        &[
            "oracle",
            "bounds",
            "--model",
            "clifford-t",
            "--n",
            "3",
            "--nt",
            "2",
            "--seed",
            "5",
        ],
    );
    assert!(!stdout.contains("VIOLATED"));
    let out = stabscope(
        dir.path(),
        &["oracle", "dmin", "--state-file", "missing.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), "{").unwrap();
    let out = stabscope(dir.path(), &["oracle", "dmin", "--state-file", "bad.json"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn certify_reports_bound() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "certify",
            "--n",
            "4",
            "--model",
            "gue",
            "--t",
            "0.2",
            "--samples",
            "10000",
            "--noise",
            "depolarizing:0.05",
            "--out",
            "cert.json",
        ],
    );
    let rep = json(&dir.path().join("cert.json"));
    assert_eq!(rep["consistent"], true);
    let bound = rep["outcome"]["delta_f"].as_f64().unwrap();
    assert!(bound > 0.0 && bound < 1.0);
    assert_eq!(rep["outcome"]["noise"]["kind"], "depolarizing");
    let out = stabscope(
        dir.path(),
        &["certify", "--preset", "t", "--noise", "bitflip"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gue_spectrum_peaks_near_inverse_dimension() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "spectrum", "--model", "gue", "--n", "10", "--t", "1.5", "--bins", "60", "--out",
            "s.csv",
        ],
    );
    let summary = json(&dir.path().join("s.sre.json"));
    let lo = summary["peak_bin"][0].as_f64().unwrap();
    let hi = summary["peak_bin"][1].as_f64().unwrap();
    assert!(lo < 2e-3 && hi > 5e-4, "peak bin [{lo}, {hi})");
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("# stabscope histogram v1"));
}

#[test]
fn replay_reproduces_outputs_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "--threads",
            "2",
            "sweep",
            "--model",
            "gue",
            "--n",
            "3,4",
            "--t2",
            "0:0.5:0.25",
            "--alphas",
            "1,2",
            "--instances",
            "3",
            "--seed",
            "9",
            "--record",
            "hist,fidelity,dmin",
            "--bins",
            "20",
            "--out",
            "g.csv",
        ],
    );
    let m = json(&dir.path().join("g.csv.manifest.json"));
    assert!(!m["argv"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a == "--threads"));
    let outputs: Vec<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(outputs.len(), 2 + 2 * 3);
    ok(
        dir.path(),
        &["replay", "g.csv.manifest.json", "--out-dir", "again"],
    );
    for o in &outputs {
        let a = std::fs::read(dir.path().join(o)).unwrap();
        let b = std::fs::read(dir.path().join("again").join(o)).unwrap();
        assert_eq!(a, b, "{o} differs after replay");
    }
}

#[test]
fn default_output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stabscope"))
        .args([
            "state",
            "--model",
            "random-basis",
            "--n",
            "2",
            "--t",
            "0.3",
            "--depth",
            "50",
        ])
        .current_dir(dir.path())
        .env("STABSCOPE_OUT_DIR", "outdir")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("outdir/state.json").exists());
    let m = json(&dir.path().join("outdir/state.json.manifest.json"));
    let argv: Vec<&str> = m["argv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(&argv[argv.len() - 2..], ["--out", "outdir/state.json"]);
}
