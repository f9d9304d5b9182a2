use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_melzak");

fn melzak(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn prism_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "p.off");
    assert_eq!(
        melzak(&["build", "--shape", "prism", "--out", &off]).status.code(),
        Some(0)
    );
    let o = melzak(&["ratio", &off]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let e = 2f64.powf(2.0 / 3.0) * 3f64.powf(11.0 / 6.0);
    let m = 4.0 * 3f64.powf(5.5);
    assert!((field(&text, "e") - e).abs() < 1e-9 * e, "{text}");
    assert!((field(&text, "m") - m).abs() < 1e-9 * m, "{text}");
}

#[test]
fn prism_audit_is_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "p.off");
    let json = path(dir.path(), "a.json");
    melzak(&["build", "--shape", "prism", "--out", &off]);
    let o = melzak(&["audit", &off, "--mode", "candidate", "--json", &json]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("candidate_minimizer true"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["summary"]["is_candidate_minimizer"], true);
    let ids: Vec<&str> = v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for c in v["criteria"].as_array().unwrap() {
        for key in ["applicable", "passed", "witnesses"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn octahedron_audit_has_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "o.off");
    let json = path(dir.path(), "a.json");
    melzak(&["build", "--shape", "octahedron", "--out", &off]);
    assert_eq!(melzak(&["audit", &off, "--json", &json]).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let degree = v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == "degree")
        .unwrap();
    assert_eq!(degree["passed"], false);
    let w = &degree["witnesses"][0];
    assert!(w["dM"].as_f64().unwrap() < -1e-10);
    assert!(w["perturbation"].is_string());
}

#[test]
fn cube_translation_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "c.off");
    melzak(&["build", "--shape", "cube", "--out", &off]);
    let o = melzak(&[
        "perturb",
        &off,
        "--kind",
        "translate",
        "--target",
        "0",
        "--dir",
        "out",
        "--fd",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["dM"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(v["fd"]["passed"], true);
    assert_eq!(v["dE"], 4.0);
}

#[test]
fn optimize_box_reaches_cube() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "b.off");
    let out = path(dir.path(), "opt.off");
    let trace = path(dir.path(), "t.csv");
    melzak(&["build", "--shape", "box:0.8,1,1.25", "--out", &off]);
    let o = melzak(&["optimize", &off, "--out", &out, "--trace", &trace]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["ratio"].as_f64().unwrap() - 1728.0).abs() < 1e-6 * 1728.0);
    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,ratio"));
    let ratios: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
    let r = melzak(&["ratio", &out]);
    assert!((field(&stdout(&r), "m") - 1728.0).abs() < 1e-6 * 1728.0);
}

#[test]
fn randomized_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let json = path(dir.path(), name);
        assert_eq!(
            melzak(&["quad-scan", "--samples", "40", "--seed", "7", "--json", &json])
                .status
                .code(),
            Some(0)
        );
        std::fs::read(json).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
    let seq = |name: &str| {
        let json = path(dir.path(), name);
        let o = melzak(&["sequence", "--max-faces", "5", "--seed", "3", "--json", &json]);
        assert_eq!(o.status.code(), Some(0));
        (stdout(&o), std::fs::read(json).unwrap())
    };
    assert_eq!(seq("s.json"), seq("t.json"));
}

#[test]
fn sequence_prefers_prism() {
    let o = melzak(&["sequence", "--max-faces", "5"]);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with(' '))
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows[0][..2], ["4", "s4.1"]);
    assert_eq!(rows[1][..2], ["5", "s5.1"]);
    let m4: f64 = rows[0][2].parse().unwrap();
    let m5: f64 = rows[1][2].parse().unwrap();
    assert!((m4 - 1296.0 * 2f64.sqrt()).abs() < 1e-6 * m4);
    assert!((m5 - 4.0 * 3f64.powf(5.5)).abs() < 1e-6 * m5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let off = path(dir.path(), "c.off");
    melzak(&["build", "--shape", "cube", "--out", &off]);
    assert_eq!(melzak(&[]).status.code(), Some(1));
    assert_eq!(melzak(&["ratio"]).status.code(), Some(1));
    assert_eq!(
        melzak(&["build", "--shape", "dodecagon", "--out", &off]).status.code(),
        Some(1)
    );
    assert_eq!(
        melzak(&["build", "--shape", "box:1,2", "--out", &off]).status.code(),
        Some(1)
    );
    assert_eq!(melzak(&["sequence", "--max-faces", "9"]).status.code(), Some(1));
    assert_eq!(
        melzak(&["quad-scan", "--samples", "0", "--seed", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        melzak(&["perturb", &off, "--kind", "hinge", "--target", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        melzak(&["ratio", &path(dir.path(), "missing.off")]).status.code(),
        Some(1)
    );
    assert_eq!(melzak(&["--help"]).status.code(), Some(0));

    let bad = path(dir.path(), "bad.off");
    std::fs::write(&bad, "OFZ\n").unwrap();
    let o = melzak(&["ratio", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    // Face index out of range for the cube.
    assert_eq!(
        melzak(&["perturb", &off, "--kind", "translate", "--target", "6"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn non_convex_input_is_rejected_by_optimize() {
    let dir = tempfile::tempdir().unwrap();
    // Cube with its top face dented down to a central vertex.
    let text = "OFF
9 9 0
0 0 0
2 0 0
2 2 0
0 2 0
0 0 2
2 0 2
2 2 2
0 2 2
1 1 1.5
4 0 3 2 1
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
3 4 5 8
3 5 6 8
3 6 7 8
3 7 4 8
";
    let off = path(dir.path(), "dent.off");
    std::fs::write(&off, text).unwrap();
    let r = melzak(&["ratio", &off]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!((field(&stdout(&r), "v") - (8.0 - 4.0 * 0.5 / 3.0)).abs() < 1e-9);
    let o = melzak(&["optimize", &off, "--out", &path(dir.path(), "x.off")]);
    assert_eq!(o.status.code(), Some(2));
}
