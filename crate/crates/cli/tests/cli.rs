use std::path::Path;
use std::process::{Command, Output};

fn cat0(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cat0"));
    cmd.args(args).env_remove("CAT0_TOLERANCE");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_template() {
    let out = cat0(&["list"], &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["metric-audit", "seaweed-tits", "morse-probe", "seaweed-oracle"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn template_run_writes_report_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let json = stdout(&cat0(&["template", "metric-audit"], &[]));
    let scenario = write(dir.path(), "audit.json", &json);
    let out_dir = dir.path().join("out");
    let out = cat0(&["run", &scenario, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["scenario"]["seed"], 7);
    assert_eq!(report["versions"]["report_schema"], 1);
    let rows = std::fs::read_to_string(out_dir.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("index,label,x,value,aux,pass"));
    assert!(rows.lines().any(|l| l.contains(",random_tree#499,")));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", &stdout(&cat0(&["template", "theta-commute"], &[])));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(cat0(&["run", &scenario, "--out", d.to_str().unwrap()], &[]).status.success());
    }
    for file in ["report.json", "rows.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn explicit_cone_pair_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "cone.json",
        r#"{"operation": "cone-converge",
            "spaces": [{"kind": "euclidean", "dimension": 2}],
            "rays": [{"kind": "euclidean", "direction": [1, 0]}, {"kind": "euclidean", "direction": [0, 1]}],
            "schedule": {"kind": "geometric", "ratio": 2, "len": 6}}"#,
    );
    let out_dir = dir.path().join("out");
    assert!(cat0(&["run", &scenario, "--out", out_dir.to_str().unwrap()], &[]).status.success());
    let rows = std::fs::read_to_string(out_dir.join("rows.csv")).unwrap();
    let values: Vec<f64> = rows.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 6);
    assert!(values.iter().all(|v| (v - 2f64.sqrt()).abs() < 1e-15));
}

#[test]
fn failed_property_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let scenario =
        write(dir.path(), "sweep.json", r#"{"operation": "spiral-sweep", "params": {"distortion_scales": [1048576]}}"#);
    let out_dir = dir.path().join("out");
    let out = cat0(&["run", &scenario, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL loglog distortion"));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(report.contains("\"status\": \"fail\""));
}

#[test]
fn invalid_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown operation", r#"{"operation": "nope"}"#),
        ("unknown field", r#"{"operation": "cut-point", "spaces": [{"kind": "random_tree"}], "sed": 1}"#),
        (
            "bad parameter",
            r#"{"operation": "metric-audit", "spaces": [{"kind": "seaweed"}], "params": {"triples": "many"}}"#,
        ),
        ("wrong space", r#"{"operation": "seaweed-oracle", "spaces": [{"kind": "euclidean", "dimension": 2}]}"#),
        ("schema version", r#"{"schema_version": 9, "operation": "scale-lattice"}"#),
        (
            "bad schedule",
            r#"{"operation": "sine-formula", "spaces": [{"kind": "seaweed"}], "schedule": {"kind": "explicit", "values": [2, 1]}}"#,
        ),
        ("negative tolerance", r#"{"operation": "scale-lattice", "tolerances": {"convergence": -1}}"#),
        ("not json", "{"),
    ];
    for (name, text) in cases {
        let scenario = write(dir.path(), "bad.json", text);
        for args in [vec!["validate", scenario.as_str()], vec!["run", scenario.as_str(), "--out", "unused"]] {
            let out = cat0(&args, &[]);
            assert_eq!(out.status.code(), Some(2), "{name}: {:?}", args[0]);
            assert!(!out.stderr.is_empty());
        }
    }
    assert_eq!(cat0(&["run", "/nonexistent.json"], &[]).status.code(), Some(2));
    assert_eq!(cat0(&["template", "nope"], &[]).status.code(), Some(2));
    assert!(!Path::new("unused").exists());
}

#[test]
fn tolerance_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", r#"{"operation": "scale-lattice"}"#);
    assert!(cat0(&["validate", &scenario], &[("CAT0_TOLERANCE", "1e-8")]).status.success());
    assert_eq!(cat0(&["validate", &scenario], &[("CAT0_TOLERANCE", "0")]).status.code(), Some(2));
    assert_eq!(cat0(&["validate", &scenario], &[("CAT0_TOLERANCE", "abc")]).status.code(), Some(2));
}
