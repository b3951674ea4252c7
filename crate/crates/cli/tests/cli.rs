use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn problem(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn popnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popnc")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("popnc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn missing_file_is_an_input_error() {
    let out = popnc(&["minimize", "missing.pop"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.pop"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(popnc(&["minimize"]).status.code(), Some(3));
    assert_eq!(popnc(&["frobnicate"]).status.code(), Some(3));
    let p = problem("example31.pop");
    assert_eq!(popnc(&["minimize", &p, "--c", "two"]).status.code(), Some(3));
    assert_eq!(popnc(&["minimize", &p, "--margin", "0"]).status.code(), Some(3));
    assert_eq!(popnc(&["--help"]).status.code(), Some(0));
}

#[test]
fn syntax_errors_report_their_line() {
    let dir = scratch("syntax");
    let file = dir.join("bad.pop");
    std::fs::write(&file, "vars: x y\nobj: 2x + y\nc: 1\n").unwrap();
    let out = popnc(&["parse", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("2:7"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn parse_prints_canonical_form() {
    let out = popnc(&["parse", &problem("sextic.pop"), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["c"], "2");
    assert_eq!(doc["degree"], 6);
    assert_eq!(doc["generators"], serde_json::json!(["c-f"]));
    let text = popnc(&["parse", &problem("sextic.pop")]);
    assert!(String::from_utf8_lossy(&text.stdout).starts_with("vars: x1 x2\n"));
}

#[test]
fn minimize_reports_bounds_and_caveats() {
    let out = popnc(&["minimize", &problem("example31.pop"), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["verdict"], "stabilized");
    assert!((doc["final_bound"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(!doc["caveats"].as_array().unwrap().is_empty());
    assert_eq!(doc["certificate"]["payload"]["program"], "minimize");
}

#[test]
fn minimize_without_stabilization_is_inconclusive() {
    let out = popnc(&["minimize", &problem("example31.pop"), "--k-max", "1", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"], "reached_max_order");
}

#[test]
fn bound_overrides_change_c() {
    let out = popnc(&["parse", &problem("sextic.pop"), "--margin", "1/2", "--json"]);
    assert_eq!(json(&out)["c"], "3/2");
    let out = popnc(&["parse", &problem("sextic.pop"), "--c", "5", "--json"]);
    assert_eq!(json(&out)["c"], "5");
}

#[test]
fn certificates_verify_from_saved_reports() {
    let dir = scratch("verify");
    for (cmd, file) in [
        ("minimize", "example31.pop"),
        ("arch-check", "example31.pop"),
        ("coercive-check", "sextic.pop"),
    ] {
        let out = popnc(&[cmd, &problem(file), "--json"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let report = dir.join(format!("{cmd}.json"));
        std::fs::write(&report, &out.stdout).unwrap();
        let check = popnc(&["verify", report.to_str().unwrap(), &problem(file), "--json"]);
        assert_eq!(
            check.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&check.stdout)
        );
        assert_eq!(json(&check)["passed"], true);
    }
}

#[test]
fn tampered_certificate_fails() {
    let dir = scratch("tamper");
    let out = popnc(&["arch-check", &problem("example31.pop"), "--json"]);
    let mut doc = json(&out);
    let payload = &mut doc["certificate"]["payload"];
    payload["bound"] = Value::from(1.5);
    let file = dir.join("cert.json");
    std::fs::write(&file, serde_json::to_string(payload).unwrap()).unwrap();
    let check = popnc(&["verify", file.to_str().unwrap(), &problem("example31.pop"), "--json"]);
    assert_eq!(check.status.code(), Some(2));
    let res = json(&check);
    assert_eq!(res["passed"], false);
    assert!(res["residual"].as_f64().unwrap() > 0.4);
    // a certificate checked against another problem is rejected too
    let other = popnc(&["verify", file.to_str().unwrap(), &problem("interval.pop")]);
    assert_eq!(other.status.code(), Some(3));
}

#[test]
fn dump_sdp_writes_one_file_per_order() {
    let dir = scratch("dump");
    let out = popnc(&[
        "arch-check",
        &problem("real_line.pop"),
        "--k-max",
        "3",
        "--dump-sdp",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, vec!["arch_k1.sdp", "arch_k2.sdp", "arch_k3.sdp"]);
    let text = std::fs::read_to_string(dir.join("arch_k2.sdp")).unwrap();
    assert!(popnc_sdp::SdpProblem::from_debug_text(&text).is_ok());
}

#[test]
fn coercivity_of_a_combination() {
    let dir = scratch("combination");
    let file = dir.join("band.pop");
    std::fs::write(&file, "vars: x1 x2\nobj: x1^2\nineq: 1 - x2^2\n").unwrap();
    let f = file.to_str().unwrap();
    let out = popnc(&["coercive-check", f, "--alpha0", "1", "--lambda", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["archimedean"], true);
    assert!((doc["coercivity"]["verdict"]["delta"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    // the objective alone is not coercive in x2
    let alone = popnc(&["coercive-check", f, "--json"]);
    assert_eq!(alone.status.code(), Some(2));
    let neg = popnc(&["coercive-check", f, "--alpha0", "1", "--lambda", "-1"]);
    assert_eq!(neg.status.code(), Some(3));
    let zero = popnc(&["coercive-check", f, "--alpha0", "0", "--json"]);
    assert_eq!(zero.status.code(), Some(2));
    assert_eq!(json(&zero)["coercivity"]["verdict"]["kind"], "not_applicable");
}

#[test]
fn odd_degree_is_not_applicable() {
    let out = popnc(&["coercive-check", &problem("interval.pop"), "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"]["kind"], "not_applicable");
}

#[test]
fn human_output_shows_the_certificate() {
    let out = popnc(&["arch-check", &problem("interval.pop")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("certified"), "{text}");
    assert!(text.contains("g1 ="), "{text}");
}
