use std::process::{Command, Output};

fn wicklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wicklab")).args(args).env_remove("WICKLAB_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn json_report_embeds_config_and_version() {
    let o = wicklab(&["mse", "--family", "sko-exp", "--t", "inv_pi", "--seq", "list", "--indices", "7,13", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["truncation"], 18);
    assert_eq!(v["config"]["sequence"]["indices"], serde_json::json!([7, 13]));
}

#[test]
fn csv_rows_follow_the_header() {
    let o = wicklab(&["mse", "--family", "abs", "--t", "1/3", "--seq", "rational", "--count", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("n,e2,e,truncation_bound,scaled"));
    let ns: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["3", "6"]);
    assert!(text.lines().any(|l| l.starts_with("# config {")));
}

#[test]
fn output_is_identical_across_runs_and_pool_sizes() {
    let args = ["mse", "--family", "sko-exp", "--t", "inv_pi", "--seq", "weyl", "--nmax", "2000", "--count", "4"];
    let a = wicklab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_wicklab")).args(args).env("WICKLAB_THREADS", "3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ambiguous_time_exits_with_three() {
    let o = wicklab(&["mse", "--family", "sko-exp", "--t", "0.3", "--seq", "list", "--indices", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(10, 0.3)"));
}

#[test]
fn config_errors_exit_with_two() {
    let cases: [&[&str]; 4] = [
        &["mse", "--family", "nope"],
        &["mse", "--family", "sko-exp", "--t", "inv_pi", "--seq", "rational"],
        &["mse"],
        &["weyl", "--t", "inv_pi", "--nmax", "10", "--count", "50"],
    ];
    for args in cases {
        assert_eq!(wicklab(args).status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_wicklab")).args(["weyl", "--t", "inv_pi"]).env("WICKLAB_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_integrand_file_is_reported() {
    let o = wicklab(&["mse", "--integrand", "/nonexistent/spec.json", "--seq", "list", "--indices", "4"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn integrand_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("wicklab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spec.json");
    std::fs::write(&path, r#"{"taus":[{"value":0.3,"exact":[3,10]}],"terms":[{"coeff":[{"c":1.0,"p":0,"r":0.0}],"l1":0,"l":[1]}]}"#).unwrap();
    let o = wicklab(&["mse", "--integrand", path.to_str().unwrap(), "--seq", "list", "--indices", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e2 = v["reports"][0]["e2"].as_f64().unwrap();
    assert!((e2 - 0.04).abs() < 1e-15, "{v}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_quick_passes() {
    let o = wicklab(&["verify", "--level", "quick", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn weyl_runs_without_an_integrand() {
    let o = wicklab(&["weyl", "--t", "inv_sqrt2", "--nmax", "1000", "--count", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(wicklab(&["weyl", "--nmax", "1000"]).status.code(), Some(2));
}
