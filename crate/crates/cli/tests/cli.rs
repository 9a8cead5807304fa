use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_newton-osc"));
    c.env_remove("NEWTONOSC_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("newton-osc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_bilinear_phase() {
    let v = json(&run(&["analyze", "--phase", "x*y"]));
    assert_eq!(v["schema"], "newton-osc/1");
    assert_eq!(v["command"], "analyze");
    assert_eq!(v["decay"]["delta"], "1/1");
    assert_eq!(v["F"], "1");
}

#[test]
fn analyze_square_is_completely_degenerate() {
    let v = json(&run(&["analyze", "--mixed", "--phase", "(y-x)^2"]));
    let d = &v["decay"]["degeneracy"];
    assert_eq!(d["kind"], "completely_degenerate");
    assert_eq!(d["N"], 2);
}

#[test]
fn analyze_split_square_has_two_real_branches() {
    let v = json(&run(&["analyze", "--mixed", "--phase", "(y-x)^2 - x^5"]));
    assert_eq!(v["decay"]["degeneracy"]["kind"], "non_degenerate");
    let branches = v["branches"]["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 2);
    assert!(branches.iter().all(|b| b["reality"] == "Real"));
    let mut second: Vec<f64> = branches
        .iter()
        .map(|b| b["terms"][1]["re"].as_f64().unwrap())
        .collect();
    second.sort_by(f64::total_cmp);
    assert_eq!(second, vec![-1.0, 1.0]);
}

#[test]
fn exit_codes() {
    let parse = run(&["analyze", "--phase", "x^+"]);
    assert_eq!(parse.status.code(), Some(2));
    assert_eq!(error(&parse)["error"]["kind"], "parse");

    let empty = run(&["analyze", "--phase", "x^2 + y^3"]);
    assert_eq!(empty.status.code(), Some(3));
    assert_eq!(error(&empty)["error"]["kind"], "empty_polygon");

    let radius = run(&["norm", "--phase", "x*y", "--lambda", "4", "--rho", "2"]);
    assert_eq!(radius.status.code(), Some(5));

    let unwritable = run(&[
        "analyze",
        "--phase",
        "x*y",
        "--out",
        "/nonexistent/dir/a.json",
    ]);
    assert_eq!(unwritable.status.code(), Some(6));
    assert_eq!(error(&unwritable)["schema"], "newton-osc/1");
}

#[test]
fn norm_csv_row_is_grid_converged() {
    let out = run(&[
        "norm", "--phase", "x*y", "--lambda", "256", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert_eq!(lines[0], "lambda,n,norm,conv_err,iterations");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0].parse::<f64>().unwrap(), 256.0);
    assert!(fields[3].parse::<f64>().unwrap() < 0.02);
}

#[test]
fn dyadpol_passes() {
    let v = json(&run(&[
        "dyadpol", "--r", "0,6", "--C", "1", "--trials", "1000", "--seed", "42",
    ]));
    assert_eq!(v["pass"], true, "{v}");
    assert_eq!(v["provenance"]["seed"], 42);
}

#[test]
fn selftest_passes_and_catches_the_plateau_fault() {
    let ok = run(&["selftest"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let bad = run(&["selftest", "--fault", "theta-plateau"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.contains("FAIL  theta plateau"), "{text}");
    assert_eq!(
        run(&["selftest", "--fault", "nonsense"]).status.code(),
        Some(5)
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cases: [&[&str]; 4] = [
        &[
            "norm",
            "--phase",
            "x^2*y - y^3/3",
            "--lambda",
            "64",
            "--seed",
            "3",
        ],
        &[
            "blocks",
            "--phase",
            "x^2*y^2/4",
            "--lambda",
            "64",
            "--j-max",
            "3",
        ],
        &["sweep", "--phase", "x*y", "--lambdas", "16,32,64,128"],
        &[
            "dyadpol", "--r", "1,3,4", "--C", "2", "--trials", "200", "--seed", "7",
        ],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_comes_from_flag_or_environment() {
    let flag = json(&run(&["--threads", "2", "analyze", "--phase", "x*y"]));
    assert_eq!(flag["provenance"]["threads"], 2);
    let env = bin()
        .args(["norm", "--phase", "x*y", "--lambda", "8"])
        .env("NEWTONOSC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(json(&env)["provenance"]["threads"], 3);
}

#[test]
fn out_flag_and_plot_data_write_files() {
    let report = scratch("sweep.json");
    let plot = scratch("plot.csv");
    let out = run(&[
        "sweep",
        "--phase",
        "x*y",
        "--lambdas",
        "16,32,64,128",
        "--out",
        report.to_str().unwrap(),
        "--emit-plot-data",
        plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["command"], "sweep");
    assert!(v["verdict"].is_string(), "{v}");
    let rows = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(rows.lines().next(), Some("log2_lambda,log2_norm,predicted"));
    assert_eq!(rows.lines().count(), 5);
}
