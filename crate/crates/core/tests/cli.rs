//! The `rpi` binary: exit codes, output shape and determinism.

use rpi_core::registry::CaseRegistry;
use serde_json::Value;
use std::process::{Command, Output};

fn rpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpi"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("RPI_DIGITS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_single_case() {
    let o = rpi(&["verify", "cp1", "--digits", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(v["id"], "cp1");
    assert_eq!(v["status"], "verified");
    assert_eq!(v["table_match"], true);
    assert_eq!(v["precision"], 60);
}

#[test]
fn unknown_case_is_a_usage_error() {
    assert_eq!(rpi(&["verify", "nosuch"]).status.code(), Some(2));
}

#[test]
fn digits_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_rpi")).args(["verify", "p1"]).env("RPI_DIGITS", "50").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["precision"], 50);
}

#[test]
fn verify_is_deterministic() {
    let a = rpi(&["verify", "cp1", "cw2", "u2"]);
    let b = rpi(&["verify", "cp1", "cw2", "u2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let ids: Vec<String> = stdout(&a)
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["cp1", "cw2", "u2"]);
    let u2: Value = serde_json::from_str(stdout(&a).lines().nth(2).unwrap()).unwrap();
    assert_eq!(u2["status"], "evidence-only");
}

#[test]
fn verify_all_writes_every_case() {
    let dir = std::env::temp_dir().join(format!("rpi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("all.jsonl");
    let o = rpi(&["verify", "--all", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let n = CaseRegistry::shipped().cases.len();
    assert_eq!(text.lines().count(), n);
    assert_eq!(n, 36);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn tables_check_and_formats() {
    for (t, rows) in [("1", 12), ("2", 7), ("3", 8)] {
        let o = rpi(&["tables", "--table", t, "--check"]);
        assert_eq!(o.status.code(), Some(0), "table {t}: {}", stdout(&o));
        let csv = rpi(&["tables", "--table", t, "--format", "csv"]);
        assert_eq!(stdout(&csv).lines().count(), rows + 1, "table {t}");
    }
    let json = rpi(&["tables", "--table", "3", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
}

#[test]
fn find_cm_examples() {
    let o = rpi(&["find-cm", "--family", "P", "--t", "1/100", "--x", "9/4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let taus: Vec<&str> = v["branches"].as_array().unwrap().iter().map(|b| b["tau"].as_str().unwrap()).collect();
    assert_eq!(taus, ["(1+sqrt(-7))/4", "(-1+sqrt(-7))/4"]);

    let o = rpi(&["find-cm", "--family", "W", "--t", "-1/108", "--x", "-49/12"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let taus: Vec<&str> = v["branches"].as_array().unwrap().iter().map(|b| b["tau"].as_str().unwrap()).collect();
    assert_eq!(taus, ["sqrt(-42)/2", "sqrt(-42)/6"]);

    assert_eq!(rpi(&["find-cm", "--family", "P", "--t", "0", "--x", "2"]).status.code(), Some(1));
}

#[test]
fn recognize_exit_codes() {
    // (31 - 3 sqrt(-7))/32 to 55 digits
    let o = rpi(&[
        "recognize",
        "--re",
        "0.9687500000000000000000000000000000000000000000000000000",
        "--im",
        "-0.2480391854123053678595264769036806649103367984139797044",
        "--d1",
        "1",
        "--d2",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sqrt(7)"), "{}", stdout(&o));

    let pi = "3.14159265358979323846264338327950288419716939937510582097494";
    assert_eq!(rpi(&["recognize", "--re", pi, "--im", "0", "--d1", "1", "--d2", "7"]).status.code(), Some(1));
    assert_eq!(rpi(&["recognize", "--re", "0.9687500000", "--im", "-0.2480391854", "--d1", "1", "--d2", "7"]).status.code(), Some(2));
}

#[test]
fn registry_round_trip() {
    let reg = CaseRegistry::shipped();
    let back = CaseRegistry::from_json(&reg.to_json()).unwrap();
    assert_eq!(back.to_json(), reg.to_json());
    assert_eq!(back.ids(), reg.ids());
}
