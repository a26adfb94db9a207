use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use holonomic::fock::{convergence_table, TableConfig};
use holonomic::matrix::ComplexMatrix;
use serde_json::Value;

fn holonomy(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_holonomy"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("HOLONOMY_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = holonomy(args, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const C1_RECT: &str = r#"{"chart":"CPN","n":2,"plane":["theta_1","phi_1"],"kind":"rectangle",
    "corner":[0.0,0.0],"sides":[0.4,3.141592653589793]}"#;

#[test]
fn irreducibility_of_cp2() {
    let v = ok_json(&["irreducibility", "--chart", "CPN", "--n", "2"]);
    assert_eq!(v["span_dim"], 4);
    assert_eq!(v["lie_dim"], 4);
    assert_eq!(v["n_squared"], 4);
}

#[test]
fn kick_table_matches_library() {
    let out = holonomy(&["kick-table"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,dev00,dev01,dev10,dev11"));
    let rows = convergence_table(&TableConfig::default()).unwrap();
    for (line, row) in lines.zip(&rows) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0].parse::<usize>().unwrap(), row.n);
        for k in 0..4 {
            assert_eq!(fields[k + 1].parse::<f64>().unwrap(), row.deviations[k].unwrap());
        }
    }
}

#[test]
fn kick_table_config_and_cutoff_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", r#"{"Ns":[4,8],"refN":32,"T":0.1,"X":1.0,"radius":0.5}"#);
    let out = dir.path().join("table.csv");
    let status = holonomy(&["kick-table", "--config", &cfg, "--cutoff", "20", "--out", out.to_str().unwrap()], None);
    assert!(status.status.success());
    let text = fs::read_to_string(out).unwrap();
    let expected = convergence_table(&TableConfig {
        ns: vec![4, 8],
        ref_n: 32,
        radius: 0.5,
        duration: 0.1,
        kerr: 1.0,
        cutoff: 20,
    })
    .unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("8,"));
    let dev00: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(dev00, expected[0].deviations[0].unwrap());
}

#[test]
fn malformed_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"loop": "#);
    assert_eq!(holonomy(&["holonomy", "--config", &bad], None).status.code(), Some(2));
    let unknown = write(dir.path(), "u.json", &format!(r#"{{"loop": {C1_RECT}, "bogus": 1}}"#));
    assert_eq!(holonomy(&["holonomy", "--config", &unknown], None).status.code(), Some(2));
    let missing = dir.path().join("none.json");
    assert_eq!(holonomy(&["kick-table", "--config", missing.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(holonomy(&["irreducibility", "--chart", "NOPE"], None).status.code(), Some(2));
    assert_eq!(holonomy(&["synthesize", "--random"], None).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    // The flux form refuses a non-commuting plane.
    let cfg = write(
        dir.path(),
        "nc.json",
        r#"{"method":"flux","loop":{"chart":"SU2INT","plane":["alpha","beta"],"kind":"rectangle",
            "corner":[0.0,0.0],"sides":[1.0,1.0]}}"#,
    );
    assert_eq!(holonomy(&["holonomy", "--config", &cfg], None).status.code(), Some(1));
}

#[test]
fn holonomy_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let get = |method: &str| -> ComplexMatrix {
        let cfg = write(dir.path(), &format!("{method}.json"), &format!(r#"{{"loop": {C1_RECT}, "method": "{method}"}}"#));
        serde_json::from_value(ok_json(&["holonomy", "--config", &cfg])["unitary"].clone()).unwrap()
    };
    let ordered = get("ordered");
    assert!(ordered.distance(&get("stokes")) < 1e-5);
    assert!(ordered.distance(&get("flux")) < 1e-8);
}

#[test]
fn composed_loops_multiply_on_the_left() {
    let dir = tempfile::tempdir().unwrap();
    let other = r#"{"chart":"CPN","n":2,"plane":["theta_1","theta_2"],"kind":"rectangle",
        "corner":[0.0,0.0],"sides":[0.5,0.7]}"#;
    let single = |s: &str, name: &str| -> ComplexMatrix {
        let cfg = write(dir.path(), name, &format!(r#"{{"loop": {s}}}"#));
        serde_json::from_value(ok_json(&["holonomy", "--config", &cfg])["unitary"].clone()).unwrap()
    };
    let (u1, u2) = (single(C1_RECT, "a.json"), single(other, "b.json"));
    let cfg = write(dir.path(), "ab.json", &format!(r#"{{"loops": [{C1_RECT}, {other}]}}"#));
    let u: ComplexMatrix = serde_json::from_value(ok_json(&["holonomy", "--config", &cfg])["unitary"].clone()).unwrap();
    assert!(u.distance(&(&u2 * &u1)) < 1e-10);
}

#[test]
fn curvature_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"chart":"CPN","n":1,"coords":[0.5,0.2]}"#);
    let v = ok_json(&["curvature", "--config", &cfg]);
    let blocks = v.as_array().unwrap();
    assert_eq!(blocks.len(), 1);
    // CP¹ zero mode: A_φ = −i sin²θ, so F_θφ = −i sin 2θ.
    let im = blocks[0]["value"]["im"][0].as_f64().unwrap();
    assert!((im + (1.0f64).sin()).abs() < 1e-6, "{im}");
}

#[test]
fn synthesize_from_target_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let target = write(dir.path(), "t.json", &format!(r#"{{"rows":2,"cols":2,"re":[{h},{h},{h},-{h}],"im":[0,0,0,0]}}"#));
    let v = ok_json(&["synthesize", "--target", &target]);
    assert!(v["program"]["verified_error"].as_f64().unwrap() <= 1e-4);
    assert!(!v["program"]["plans"].as_array().unwrap().is_empty());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.json", &format!(r#"{{"loop": {C1_RECT}, "steps": 3000}}"#));
    let runs: Vec<Vec<u8>> = [None, Some("1"), Some("3")]
        .iter()
        .map(|t| holonomy(&["holonomy", "--config", &cfg], *t).stdout)
        .collect();
    assert!(!runs[0].is_empty());
    assert!(runs.iter().all(|r| *r == runs[0]));
    let synth = |t| holonomy(&["synthesize", "--random", "--seed", "11"], t).stdout;
    assert_eq!(synth(Some("1")), synth(Some("4")));
    assert_ne!(synth(None), holonomy(&["synthesize", "--random", "--seed", "12"], None).stdout);
}

#[test]
fn bad_thread_count_is_rejected() {
    assert_eq!(holonomy(&["irreducibility", "--chart", "CPN", "--n", "1"], Some("zero")).status.code(), Some(2));
}

#[test]
fn adiabatic_check_converges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        r#"{"loop":{"chart":"CPN","n":1,"plane":["theta_1","phi_1"],"kind":"ellipse",
            "center":[0.6,1.0],"semi_axes":[0.3,0.8]},
            "epsilon":1.0,"durations":[50.0,100.0,200.0],"steps_per_time":16.0,"tolerance":0.05}"#,
    );
    let v = ok_json(&["adiabatic-check", "--config", &cfg]);
    assert_eq!(v["converged"], true);
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() < 0.2, "{slope}");
}
