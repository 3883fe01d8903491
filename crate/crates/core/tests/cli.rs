use std::path::PathBuf;
use std::process::{Command, Output};

use wqh_core::{cyc, CycScalar};

fn wqh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqh")).args(args).env_remove("WQH_TOLERANCE").output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wqh-bin-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn emit_then_verify_aw_at_four() {
    let path = scratch("aw4.txt");
    let out = wqh(&["uqsl2", "--ell", "4", "--emit-presentation", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    let out = wqh(&["verify", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("R-matrix:"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn braiding_table_lists_the_level_four_values() {
    let out = wqh(&["uqsl2", "--ell", "4", "--braiding-table", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["braiding_table"].as_array().unwrap();
    let find = |l: u64, g: u64| rows.iter().find(|r| r["lambda"] == l && r["gamma"] == g).unwrap();
    let scalar = |v: &serde_json::Value| v.as_str().unwrap().parse::<CycScalar>().unwrap();
    assert_eq!(scalar(&find(1, 2)["expected"]), cyc(16, 1).unwrap());
    assert_eq!(scalar(&find(1, 0)["expected"]), cyc(16, -3).unwrap());
    assert!(rows.iter().all(|r| r["exact"] == true));
}

#[test]
fn corrupted_file_exits_nonzero() {
    let path = scratch("fun_minus_one.txt");
    let out = wqh(&["pointed", "--order", "2", "--power", "1", "--emit-presentation", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(wqh(&["verify", path.to_str().unwrap()]).status.success());
    // flip the sign of ω(1,1,1) in the [phi] section only
    let (head, tail) = text.split_at(text.find("[phi]").unwrap());
    let (phi, rest) = tail.split_at(tail.find("[phi_inv]").unwrap());
    let corrupted = format!("{head}{}{rest}", phi.replace("cyc(2; -1)", "2"));
    assert_ne!(corrupted, text);
    std::fs::write(&path, corrupted).unwrap();
    let out = wqh(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn machine_output_is_byte_identical() {
    let args = ["fusion", "--n", "3", "--ell", "4", "--format", "json"];
    let a = wqh(&args);
    let b = wqh(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_tolerance_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_wqh")).args(["fusion", "--sl2", "1"]).env("WQH_TOLERANCE", "-1").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn missing_file_is_an_error() {
    let out = wqh(&["verify", "/nonexistent/presentation.txt"]);
    assert_eq!(out.status.code(), Some(2));
}
