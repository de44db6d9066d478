use std::process::{Command, Output};

fn expander(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expander")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(expander(&["verify-all", "--max-level", "2"]).status.code(), Some(0));
    assert_eq!(expander(&["--help"]).status.code(), Some(0));
    assert_eq!(expander(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(expander(&["--format", "png", "export", "--level", "1"]).status.code(), Some(3));
    assert_eq!(expander(&["gamma", "normalize", "x7"]).status.code(), Some(3));
    assert_eq!(expander(&["enumerate", "--level", "9"]).status.code(), Some(2));
}

#[test]
fn report_is_versioned_json() {
    let out = expander(&["verify-all", "--max-level", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "expander-report/1");
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn edge_list_export() {
    let out = expander(&["--format", "edges", "export", "--level", "0"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0 0 2");
    let out = expander(&["--format", "edges", "export", "--level", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 64);
}

#[test]
fn normalize_prints_the_normal_form() {
    let out = expander(&["gamma", "normalize", "x2 x0"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["checks"][0]["data"]["normal_form"], "x0^-1 x1 x1 x2");
    assert_eq!(v["checks"][0]["data"]["tail"], true);
}
