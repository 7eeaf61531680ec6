//! End-to-end checks of the binary: exit codes, CSV schemas, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pullback-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn audit_builtin_passes() {
    let out = run(&["audit", "default:cubic-delayed"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn audit_violation_exits_3_and_names_check() {
    // lower the diffusion floor below the admissible threshold
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weak.json");
    let mut file = pullback_lab::problem::scenario_file(
        "cubic-delayed".parse().unwrap(),
    );
    file.diffusion.form = "constant".into();
    file.diffusion.value = Some(2.0);
    file.diffusion.base = None;
    file.diffusion.scale = None;
    file.diffusion.lower = 2.0;
    file.diffusion.upper = 2.0;
    std::fs::write(&path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = stdout(&out) + &String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("diffusion-lower"), "{text}");
}

#[test]
fn unknown_scenario_is_usage_error() {
    let out = run(&["audit", "default:not-a-scenario"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_matches_closed_form_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    for p in [&csv1, &csv2] {
        let out = run(&[
            "simulate",
            "default:linear-single-mode",
            "--tau",
            "0",
            "--t-end",
            "1",
            "--dt",
            "1e-3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&csv1).unwrap();
    let b = std::fs::read(&csv2).unwrap();
    assert_eq!(a, b, "identical invocations must produce bit-identical CSV");

    let text = String::from_utf8(a).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "t,L2_sq,grad_sq,Ht_sq,C_L2_sq,C_Ht_sq,a_value,l_value,energy_residual"
    );
    let last = text.lines().last().unwrap();
    let l2_sq: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    let exact = (-1.5f64).exp();
    let rel = (l2_sq.sqrt() - exact).abs() / exact;
    assert!(rel < 1e-6, "endpoint relative error {rel}");
}

#[test]
fn verify_energy_passes_on_cubic() {
    let out = run(&[
        "verify-energy",
        "default:cubic-delayed",
        "--tau",
        "0",
        "--t-end",
        "1",
        "--dt",
        "0.03125",
        "--halvings",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn verify_bound_monitor_passes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bound.csv");
    let out = run(&[
        "verify-bound",
        "default:cubic-delayed",
        "--tau",
        "0",
        "--t-end",
        "2",
        "--dt",
        "0.03125",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,lhs_C_Ht_sq,rhs_lemma41,rho_sq,slack");
}

#[test]
fn pullback_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ensemble.csv");
    let out = run(&[
        "pullback",
        "default:linear-single-mode",
        "--t",
        "0",
        "--taus",
        "-5,-10",
        "--tau-far",
        "-20",
        "--samples",
        "4",
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "tau,sample_id,endpoint_C_Ht_sq,within_rho");
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn regularity_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("reg.csv");
    let out = run(&[
        "regularity",
        "default:cubic-delayed",
        "--tau",
        "0",
        "--t-end",
        "1",
        "--dt",
        "0.03125",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,I1,I1_bound,I2,I2_bound,superposition_err");
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn oracle_cross_checks() {
    let out = run(&[
        "oracle",
        "default:linear-single-mode",
        "--tau",
        "0",
        "--t-end",
        "1",
        "--dt",
        "1e-3",
        "--fd-points",
        "128",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn absorb_meets_deadline() {
    let out = run(&[
        "absorb",
        "default:cubic-delayed",
        "--taus",
        "0",
        "--scale",
        "10",
        "--seeds",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn print_config_is_json() {
    let out = run(&["print-config"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["probe_grid"]["u_points"].is_number());
}

#[test]
fn scenario_file_roundtrip_via_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    let file = pullback_lab::problem::scenario_file("h-minus-one-tail".parse().unwrap());
    std::fs::write(&path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(Path::new(&path).exists());
}
