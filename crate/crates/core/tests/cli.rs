use std::path::PathBuf;
use std::process::Command;

use maxbrane::cli::render_human;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_maxbrane")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn write_tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maxbrane-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn human_output_is_the_flattened_json_result() {
    let cases: [&[&str]; 5] = [
        &["lattice", "--expr", "U + E8(-1)"],
        &["hilbert", "betti", "--b2", "22", "--n", "2"],
        &["smith", "--model", "octahedron-antipodal", "--kalinin", "3"],
        &["k3n", "symplectic", "--og6"],
        &["k3n", "representative", "--n", "4", "--case", "3", "--line", "0"],
    ];
    for args in cases {
        let (code, human, _) = run(args);
        assert_eq!(code, 0, "{args:?}");
        let v = run_json(args);
        assert_eq!(human, render_human(&v["result"]), "{args:?}");
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
        assert!(v["timing_ms"].is_number());
    }
}

#[test]
fn json_results_are_deterministic() {
    for args in [
        &["--seed", "7", "k3n", "sweep", "--n", "3", "--count", "5"][..],
        &["--seed", "3", "smith", "--model", "hexagon-antipodal", "--kalinin", "2"][..],
    ] {
        let a = run_json(args);
        assert_eq!(a["result"], run_json(args)["result"]);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), a);
    }
}

#[test]
fn headline_values() {
    assert_eq!(run_json(&["hilbert", "betti", "--b2", "22", "--n", "3"])["result"]["total"], 3200);
    let swap = write_tmp("swap.json", r#"{"sigma": [[0, 1], [1, 0]]}"#);
    assert_eq!(run_json(&["comessatti", swap.to_str().unwrap()])["result"]["lambda"], 1);
    let p2 = write_tmp(
        "p2.json",
        r#"{"b2": 1, "sigma": [[-1]], "kind": "antiholo", "maximal": true, "fixed_points": true, "h20": false}"#,
    );
    assert_eq!(run_json(&["hilbert", "maximality", p2.to_str().unwrap(), "--n", "3"])["result"]["maximal"], true);
    let og6 = run_json(&["k3n", "symplectic", "--og6"]);
    assert_eq!(og6["result"]["fixed_total"], 384);
    assert_eq!(og6["result"]["ambient_total"], 1920);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["hilbert", "betti", "--b2", "x", "--n", "2"]).0, 2);
    assert_eq!(run(&["k3n", "representative", "--n", "3", "--case", "3", "--line", "0"]).0, 2);
    let bad = write_tmp("bad.json", "{ not json");
    assert_eq!(run(&["comessatti", bad.to_str().unwrap()]).0, 2);
    let not_inv = write_tmp("notinv.json", r#"{"sigma": [[1, 1], [0, 1]]}"#);
    let (code, out, err) = run(&["comessatti", not_inv.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.starts_with("error:"));
}
