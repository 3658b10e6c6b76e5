//! Exit-code contract and output determinism of the `stacl` binary:
//! 0 success/true, 1 false/violation, 2 usage/parse error, 3 internal
//! invariant breach.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn stacl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stacl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn drug() -> String {
    fixtures().join("drug.json").display().to_string()
}

fn collider() -> String {
    fixtures().join("collider.json").display().to_string()
}

#[test]
fn validate_reports_ok_and_violations() {
    let out = stacl(&["validate", &drug()]);
    assert_eq!(code(&out), 0, "{out:?}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("cyclic.json");
    std::fs::write(
        &bad,
        r#"{
            "id": "bad", "domain_size": 2,
            "names": {}, "constants": {},
            "functions": {
                "f": { "arity": 1, "table": { "0": ["1", "0"], "1": ["0", "1"] } }
            },
            "generator": { "x": "f(z)", "z": "f(x)" }
        }"#,
    )
    .unwrap();
    let out = stacl(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("cyclic"));
}

#[test]
fn dsep_true_false_and_errors() {
    let out = stacl(&["dsep", &collider(), "--x", "x", "--y", "y", "--z", ""]);
    assert_eq!(code(&out), 0, "{out:?}");
    // conditioning on the collider opens the path
    let out = stacl(&["dsep", &collider(), "--x", "x", "--y", "y", "--z", "z"]);
    assert_eq!(code(&out), 1, "{out:?}");
    // unknown variable is a usage error
    let out = stacl(&["dsep", &collider(), "--x", "q", "--y", "y", "--z", ""]);
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn pred_subcommand() {
    let out = stacl(&["pred", &drug(), "--pred", "pa", "--a", "z", "--b", "x"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let out = stacl(&["pred", &drug(), "--pred", "pa", "--a", "z", "--b", "y"]);
    assert_eq!(code(&out), 1, "{out:?}");
    let out = stacl(&[
        "pred", &drug(), "--pred", "allnanc", "--a", "x", "--b", "x", "--c", "z",
    ]);
    assert_eq!(code(&out), 0, "z has no endogenous ancestors: {out:?}");
    let out = stacl(&[
        "pred", &drug(), "--pred", "allnanc", "--a", "x", "--b", "x", "--c", "y",
    ]);
    assert_eq!(code(&out), 1, "x is an ancestor of y: {out:?}");
    let out = stacl(&["pred", &drug(), "--pred", "nosuch", "--a", "x", "--b", "y"]);
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn effect_matches_spec_example_and_is_deterministic() {
    let out = stacl(&["effect", &drug(), "--do", "x=1", "--on", "y"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["0"], "33/160");
    assert_eq!(v["1"], "127/160");
    // named-constant form agrees byte for byte
    let out2 = stacl(&["effect", &drug(), "--do", "x=c1", "--on", "y"]);
    assert_eq!(String::from_utf8(out2.stdout).unwrap(), text);
}

#[test]
fn intervene_writes_reloadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("intervened.json");
    let out = stacl(&[
        "intervene", &drug(), "--mode", "lazy", "--set", "x=c1", "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("\"y\": \"fy(c1,z)\""), "{text}");
    // the written model validates and keeps x's mechanism
    let out = stacl(&["validate", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(text.contains("\"x\": \"fx(z)\""));
}

#[test]
fn check_subcommand_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("formula.txt");
    std::fs::write(&f, "pa(<z>;<x>) & pos(<x,z>)\n").unwrap();
    let out = stacl(&["check", &drug(), "-f", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");

    std::fs::write(&f, "dsep(<x>;<y>;<z>)\n").unwrap();
    let out = stacl(&["check", &drug(), "-f", f.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{out:?}");

    std::fs::write(&f, "pa(<z>;<x>").unwrap();
    let out = stacl(&["check", &drug(), "-f", f.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{out:?}");

    // the experiment/adjustment equivalence under canonical bindings
    std::fs::write(
        &f,
        "([x:=c1]E (#n(drug[x:=c1]E; <y>) == <y>)) <-> \
         (#f(drug; cond(<y>;<z>;x=c1)) == cond(<y>;<z>;x=c1) \
          & #n(drug; <z>) == <z> \
          & #n(drug[x:=c1]E; <y>) == margin(#f(drug; cond(<y>;<z>;x=c1))(#n(drug; <z>)); <y>))\n",
    )
    .unwrap();
    let out = stacl(&["check", &drug(), "-f", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
}

#[test]
fn prove_accepts_bundles_and_rejects_tampering() {
    for proof in ["backdoor.proof.json", "do2.proof.json", "do3.proof.json"] {
        let out = stacl(&["prove", fixtures().join(proof).to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{proof}: {out:?}");
    }
    // drop an MP premise and expect a structured rejection with a path
    let text = std::fs::read_to_string(fixtures().join("backdoor.proof.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let premises = v["root"]["premises"].as_array_mut().unwrap();
    premises.remove(0);
    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("tampered.proof.json");
    std::fs::copy(fixtures().join("drug.json"), dir.path().join("drug.json")).unwrap();
    std::fs::write(&tampered, serde_json::to_string(&v).unwrap()).unwrap();
    let out = stacl(&["prove", tampered.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{out:?}");
    let body = String::from_utf8_lossy(&out.stdout);
    assert!(body.contains("root"), "rejection names a node path: {body}");
}

#[test]
fn fuzz_exit_codes() {
    let out = stacl(&["fuzz", "--schema", "MPD", "--trials", "40", "--seed", "5", "--min-nonvacuous", "10"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let out = stacl(&[
        "fuzz", "--schema", "pseudo_modus_ponens", "--trials", "400", "--seed", "5",
    ]);
    assert_eq!(code(&out), 0, "counterexample found is a success: {out:?}");
    let body: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("fuzz emits JSON");
    assert!(body["violations"].as_u64().unwrap() > 0);
    assert!(body["first_counterexample"]["world"]["generator"].is_object());
    // the known-unsound schema yields violations and exit 1
    let out = stacl(&["fuzz", "--schema", "Dsep_EI1", "--trials", "200", "--seed", "5", "--min-nonvacuous", "20"]);
    assert_eq!(code(&out), 1, "{out:?}");
}

#[test]
fn simpson_runs_from_fixture_path() {
    let out = stacl(&["simpson", &drug()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["conditional_rates"]["male_drug"], "9/10");
    assert_eq!(body["effects"]["do_x_c1"]["1"], "127/160");
    assert_eq!(body["equivalence_holds"], true);
}
