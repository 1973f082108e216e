use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SIM: &str = r#"
n = 400
seed = 5

[copula]
family = "gumbel"
theta = 2.0

[[marginals]]
spec = { m = 0, n = 0, p = 1, q = 1 }
params = { a0 = 0.0, ar = [], ma = [], w = -0.1, kappa = [0.15], gamma_asym = [-0.05], beta_pers = [0.9], nu = 1.5 }

[[marginals]]
spec = { m = 0, n = 0, p = 1, q = 1 }
params = { a0 = 0.0, ar = [], ma = [], w = -0.1, kappa = [0.15], gamma_asym = [-0.05], beta_pers = [0.9], nu = 1.5 }
"#;

fn fit_toml(data: &str, second: &str) -> String {
    format!(
        "seed = 2\n[copula]\nfamilies = [\"normal\", \"gumbel\"]\nmodes = [\"static\"]\n\
         [[series]]\npath = \"{data}\"\ncolumn = \"x\"\ntransform = \"level\"\n\
         [[series]]\npath = \"{data}\"\ncolumn = \"{second}\"\ntransform = \"level\"\n"
    )
}

fn tailcop(dir: &Path, args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tailcop"));
    cmd.current_dir(dir).args(args).env_remove("TAILCOP_OUTPUT_DIR");
    if let Some(o) = out_env {
        cmd.env("TAILCOP_OUTPUT_DIR", o);
    }
    cmd.output().expect("binary runs")
}

fn simulate(dir: &Path) {
    fs::write(dir.join("sim.toml"), SIM).unwrap();
    let out = tailcop(dir, &["simulate", "sim.toml", "--output-dir", "sim"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("sim/simulated.csv").is_file());
    assert!(dir.join("sim/true_path.csv").is_file());
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_then_fit_with_env_output() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulate(dir);
    fs::write(dir.join("fit.toml"), fit_toml("sim/simulated.csv", "y")).unwrap();

    let first = dir.join("run1");
    let out = tailcop(dir, &["fit", "fit.toml"], Some(&first));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("* gumbel")), "{stdout}");

    let files = listing(&first);
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(
        names,
        [
            "comparison_x-vs-y.csv",
            "path_x-vs-y.csv",
            "pit_x.csv",
            "pit_y.csv",
            "report.json"
        ]
    );
    assert!(!dir.join("tailcop-out").exists());

    // the flag wins over the environment
    let second = dir.join("run2");
    let out = tailcop(
        dir,
        &["fit", "fit.toml", "-q", "--output-dir", "run2"],
        Some(&dir.join("ignored")),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(!dir.join("ignored").exists());
    assert_eq!(listing(&second), files);
}

#[test]
fn failed_cells_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut csv = String::from("date,x,flat\n");
    for i in 0..300 {
        let day = chrono_like_date(i);
        let x = ((i * 7919) % 211) as f64 / 50.0 - 2.1 + (i as f64 * 0.37).sin();
        csv += &format!("{day},{x},1.0\n");
    }
    fs::write(dir.join("data.csv"), csv).unwrap();
    fs::write(dir.join("fit.toml"), fit_toml("data.csv", "flat")).unwrap();
    let out = tailcop(dir, &["fit", "fit.toml"], Some(&dir.join("out")));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("out/report.json").is_file());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "partial");
}

// consecutive days from 2001-01-01 without a date crate
fn chrono_like_date(i: usize) -> String {
    const DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let mut d = i;
    let mut m = 0;
    while d >= DAYS[m] {
        d -= DAYS[m];
        m += 1;
    }
    format!("2001-{:02}-{:02}", m + 1, d + 1)
}

#[test]
fn hard_failures_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = tailcop(dir, &["fit", "missing.toml"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    fs::write(dir.join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(tailcop(dir, &["fit", "bad.toml"], None).status.code(), Some(1));

    fs::write(dir.join("nodata.toml"), fit_toml("absent.csv", "y")).unwrap();
    let out = tailcop(dir, &["fit", "nodata.toml"], Some(&dir.join("out")));
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(
        tailcop(dir, &["diagnose", "absent.csv", "--column", "x"], None)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(tailcop(dir, &[], None).status.code(), Some(1));
    assert_eq!(tailcop(dir, &["--help"], None).status.code(), Some(0));
}

#[test]
fn diagnose_prints_json() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulate(dir);
    let out = tailcop(
        dir,
        &[
            "diagnose",
            "sim/simulated.csv",
            "--column",
            "x",
            "--transform",
            "level",
            "--lags",
            "10",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["moments", "jarque_bera", "ljung_box", "ljung_box_sq", "arch_lm"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}
