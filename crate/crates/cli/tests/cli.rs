use std::process::{Command, Output};

use serde_json::Value;

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn table_values() {
    let cases: [(&[&str], &str); 3] = [
        (&["table", "rhs", "--probe", "power:1", "--n", "1", "--alpha", "2"], "power:1,1.000000000"),
        (&["table", "j", "--n", "1", "--alpha", "2", "--s", "1"], "1,0.500000000"),
        (&["table", "entropy-bound", "--n", "1", "--alpha", "2"], "2,2.000000000"),
    ];
    for (args, row) in cases {
        let o = bergman(args);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), format!("parameter,value\n{row}\n"), "{args:?}");
    }
}

#[test]
fn table_j_grid() {
    let o = bergman(&["table", "j", "--n", "2", "--alpha", "3", "--s", "0,1,4"]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "0,0.000000000");
}

#[test]
fn coherent_state_is_in_equality_band() {
    let o = bergman(&["verify", "wehrl", "--n", "1", "--alpha", "2", "--probe", "power:2", "--fn", "coherent:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["result"][0]["verdict"], "equality-band");
    assert_eq!(v["config"]["function"], "coherent:0.5");
}

#[test]
fn identities_pass() {
    let o = bergman(&["verify", "identities", "--n", "2", "--alpha", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let checks = v["result"].as_array().unwrap();
    assert!(checks.len() > 10);
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn usage_errors_exit_2() {
    let runs: [&[&str]; 6] = [
        &["verify", "wehrl", "--n", "1", "--alpha", "1", "--fn", "coherent:0.5"],
        &["verify", "wehrl", "--n", "1", "--alpha", "2"],
        &["verify", "wehrl", "--fn", "coherent:1.5"],
        &["verify", "wehrl", "--fn", "coherent:0.1", "--probe", "power:0.5"],
        &["verify", "faber-krahn", "--fn", "random:2:1", "--set", "annulus:0.5:0.2"],
        &["verify", "sideways"],
    ];
    for args in runs {
        assert_eq!(bergman(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let out_s = out.to_str().unwrap();
    let args = [
        "verify", "wehrl", "--n", "2", "--alpha", "3", "--fn", "random:3:9", "--probe", "power:2", "--probe", "xlogx",
        "--samples", "20000", "--seed", "5", "--out", out_s,
    ];
    assert_eq!(bergman(&args).status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();
    assert_eq!(bergman(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&out).unwrap());
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["config"]["mc"]["seed"], 5);
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
    // nothing but the report is left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn faber_krahn_sets() {
    for set in ["ball:1", "ball:0.5:0.2", "annulus:0.1:0.6", "superlevel:0.2"] {
        let o = bergman(&["verify", "faber-krahn", "--fn", "random:3:2", "--samples", "40000", "--set", set]);
        assert_eq!(o.status.code(), Some(0), "{set}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["config"]["set"], set);
    }
}

#[test]
fn mixture_and_pointwise() {
    let o = bergman(&["verify", "mixture", "--n", "2", "--alpha", "3", "--fn", "random:2:4", "--rank", "3", "--samples", "40000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["result"][0]["auxiliary"].is_object());
    let o = bergman(&["verify", "pointwise", "--fn", "random:4:4", "--samples", "20000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("check,probe,lhs,stderr,rhs,margin,sigmas,verdict,rerun\n"));
}

#[test]
fn poly_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(&path, r#"{"kind":"poly","params":{"n":1,"alpha":2.0},"coeffs":[{"m":[1],"c":[1.0,0.0]}]}"#).unwrap();
    let spec = format!("poly:{}", path.display());
    let o = bergman(&["verify", "wehrl", "--fn", &spec, "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json(&o)["result"][0];
    assert_eq!(r["renormalized"], true);
    assert_eq!(r["verdict"], "holds");
    let o = bergman(&["verify", "wehrl", "--n", "2", "--alpha", "3", "--fn", &spec]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extremize_trivial_cases() {
    // degree 0: the constant is the coherent state at the origin
    let o = bergman(&["extremize", "--alpha", "2", "--probe", "power:2", "--degree", "0", "--restarts", "2", "--samples", "6400"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json(&o)["result"];
    assert!((r["coherence"]["overlap"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["rhs"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    // affine probe: every unit vector is optimal, value 1/c_α
    let o = bergman(&["extremize", "--alpha", "2", "--probe", "power:1", "--degree", "3", "--restarts", "2", "--samples", "6400"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json(&o)["result"];
    assert!((r["value"]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["restarts"].as_array().unwrap().iter().all(|s| s["status"] == "converged"));
}

#[test]
fn profile_emits_plot_data() {
    let o = bergman(&["profile", "--fn", "coherent:0", "--levels", "5", "--samples", "20000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,mu,stderr,li_su");
    assert_eq!(rows.len(), 6);
}
