mod common;

use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use plandiv::cli::{self, Cli, RunConfig};
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plandiv"))
        .args(args)
        .output()
        .unwrap()
}

fn path(rel: &str) -> String {
    common::fixture(rel).display().to_string()
}

fn task_args(cmd: &str, dir: &str, problem: &str) -> Vec<String> {
    vec![
        cmd.into(),
        "--domain".into(),
        path(&format!("{dir}/domain.pddl")),
        "--problem".into(),
        path(&format!("{dir}/{problem}")),
    ]
}

fn run(args: &[String]) -> (Result<(), plandiv::Error>, String) {
    let cli =
        Cli::try_parse_from(std::iter::once("plandiv".to_string()).chain(args.iter().cloned()))
            .unwrap();
    let mut out = Vec::new();
    let r = cli::run(&cli, &mut out);
    (r, String::from_utf8(out).unwrap())
}

fn with(mut base: Vec<String>, extra: &[&str]) -> Vec<String> {
    base.extend(extra.iter().map(|s| s.to_string()));
    base
}

#[test]
fn identical_plan_files_give_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let text = common::read("rover/plans/a.plan");
    for n in ["one.plan", "two.plan"] {
        std::fs::write(dir.path().join(n), &text).unwrap();
    }
    let args = with(
        task_args("score", "rover", "problem.pddl"),
        &["--metrics", "a", "--plans"],
    );
    let args = with(args, &[dir.path().to_str().unwrap()]);
    let (r, out) = run(&args);
    r.unwrap();
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["plans"], serde_json::json!(["one", "two"]));
    assert_eq!(
        v["metrics"]["a"]["matrix"],
        serde_json::json!([[1.0, 1.0], [1.0, 1.0]])
    );
    assert!(out.contains("1.000000"));
    assert!(v["metrics"]["a"].get("timings_ms").is_none());
}

#[test]
fn rover_flex_and_sgo() {
    let args = with(
        task_args("score", "rover", "problem.pddl"),
        &[
            "--metrics",
            "flex,sgo",
            "--timing",
            "--plans",
            &path("rover/plans"),
        ],
    );
    let (r, out) = run(&args);
    r.unwrap();
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["metrics"]["flex"]["matrix"][0][1].as_f64().unwrap(),
        0.444444
    );
    assert_eq!(v["metrics"]["sgo"]["matrix"][1][0].as_f64().unwrap(), 0.5);
    assert_eq!(
        v["metrics"]["sgo"]["timings_ms"].as_array().unwrap().len(),
        2
    );
    let keys: Vec<_> = v["metrics"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys.len(), 2);
}

#[test]
fn output_is_byte_stable() {
    let args = with(
        task_args("score", "logistics", "problem.pddl"),
        &[
            "--plans",
            &path("logistics/plans"),
            "--weights",
            "sgo=0.5,a=0.5",
            "--select-k",
            "2",
        ],
    );
    let (r1, a) = run(&args);
    let (r2, b) = run(&args);
    r1.unwrap();
    r2.unwrap();
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert!(v["metrics"]["aggregate"]["weights"]["sgo"].is_number());
    assert_eq!(v["selection"]["metric"], "aggregate");
}

#[test]
fn invalid_plan_names_file_and_step() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.plan");
    std::fs::write(
        &bad,
        "(wrap p1 depot)\n(load p1 t1 depot)\n(unload p2 t1 l1)\n",
    )
    .unwrap();
    let mut args = task_args("score", "logistics", "problem.pddl");
    args.extend([
        "--plans".into(),
        path("logistics/plans/sym_t1.plan"),
        bad.display().to_string(),
    ]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = bin(&refs);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.plan"), "{err}");
    assert!(err.contains("step 3"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn parse_error_carries_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("p.plan");
    std::fs::write(&bad, "(wrap p1 depot)\n(fly p1)\n").unwrap();
    let mut args = task_args("trace", "logistics", "problem.pddl");
    args.extend(["--plans".into(), bad.display().to_string()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = bin(&refs);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p.plan") && err.contains("line 2"), "{err}");
}

#[test]
fn select_cases() {
    let base = with(
        task_args("select", "logistics", "problem.pddl"),
        &["--metrics", "sgo", "--plans", &path("logistics/plans")],
    );
    let (r, out) = run(&with(base.clone(), &["--select-k", "2"]));
    r.unwrap();
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["selection"]["labels"],
        serde_json::json!(["detour_t1", "swap_t1"])
    );
    assert!(v["selection"]["diversity"].is_number());
    assert!(v["metrics"]["sgo"]["matrix"].is_array());

    let (r, out) = run(&with(base.clone(), &["--select-k", "1"]));
    r.unwrap();
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["selection"]["labels"], serde_json::json!(["detour_t1"]));

    let (r, out) = run(&with(base.clone(), &["--select-k", "4", "--format", "csv"]));
    r.unwrap();
    let sel = out.lines().find(|l| l.starts_with("selected,")).unwrap();
    let mut got: Vec<&str> = sel.split(',').skip(1).collect();
    got.sort();
    assert_eq!(got, ["detour_t1", "swap_t1", "sym_t1", "sym_t2"]);

    let (r, _) = run(&with(base.clone(), &["--select-k", "5"]));
    assert!(matches!(
        r,
        Err(plandiv::Error::SelectionSize { k: 5, n: 4 })
    ));
    let (r, _) = run(&base);
    assert!(r.is_err());
}

#[test]
fn trace_output() {
    let args = with(
        task_args("trace", "rover", "problem.pddl"),
        &["--plans", &path("rover/plans"), "--format", "csv"],
    );
    let (r, out) = run(&args);
    r.unwrap();
    assert!(out.contains("a,XXBXXXXAXC"));
    assert!(out.contains("b,XXXCBXXXXA"));
    assert!(out.contains("A,(soil-communicated waypoint0)"));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.plan");
    std::fs::write(&empty, "; nothing to do\n").unwrap();
    let problem = dir.path().join("done.pddl");
    std::fs::write(
        &problem,
        "(define (problem done) (:domain switches) (:objects s1 - switch) (:init (on s1)) (:goal (on s1)))",
    )
    .unwrap();
    let args = vec![
        "trace".to_string(),
        "--domain".into(),
        path("switches/domain.pddl"),
        "--problem".into(),
        problem.display().to_string(),
        "--plans".into(),
        empty.display().to_string(),
    ];
    let (r, out) = run(&args);
    r.unwrap();
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["traces"][0]["plan"], "empty");
    assert_eq!(v["traces"][0]["trace"], "");
}

#[test]
fn output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.csv");
    let args = with(
        task_args("score", "depots", "pfile2.pddl"),
        &[
            "--plans",
            &path("depots/plans"),
            "--format",
            "csv",
            "--metrics",
            "u,sgo",
            "--output",
            target.to_str().unwrap(),
        ],
    );
    let (r, out) = run(&args);
    r.unwrap();
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("u,truck0,truck1\n"));
    assert!(text.contains("sgo,truck0,truck1\ntruck0,1.000000,1.000000\n"));
}

#[test]
fn config_validation() {
    let mk = |extra: &[&str]| {
        let args = with(
            task_args("score", "rover", "problem.pddl"),
            &["--plans", &path("rover/plans")],
        );
        let args = with(args, extra);
        let cli = Cli::try_parse_from(std::iter::once("plandiv".to_string()).chain(args)).unwrap();
        match cli.command {
            cli::Command::Score(a) => RunConfig::from_args(&a),
            _ => unreachable!(),
        }
    };
    let cfg = mk(&[]).unwrap();
    assert_eq!(cfg.metrics.len(), 6);
    assert_eq!(cfg.plans.len(), 2);
    assert!(cfg.plans.windows(2).all(|w| w[0] < w[1]));
    assert!(mk(&["--metrics", "a", "--weights", "sgo=1"]).is_err());
    assert!(mk(&["--metrics", "nope"]).is_err());
    assert!(mk(&["--weights", "a=-1"]).is_err());
    assert!(mk(&["--diversity-mode", "median"]).is_err());
    assert!(mk(&["--metrics", "flex,stability"]).is_ok());
}

#[test]
fn missing_file_exits_nonzero() {
    let out = bin(&[
        "score",
        "--domain",
        "/nonexistent/d.pddl",
        "--problem",
        "x",
        "--plans",
        "y",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!Path::new("/nonexistent").exists());
}
