use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdhier")).args(args).env_remove("MDHIER_TABLE_DIR").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn value(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    json_of(&out)["value"].as_str().unwrap().to_string()
}

#[test]
fn correlators() {
    assert_eq!(value(&["correlator", "--model", "wk", "--d", "2", "--g", "1"]), "1/24");
    assert_eq!(value(&["correlator", "--model", "bgw", "--d", "0", "--g", "1"]), "1/8");
    assert_eq!(value(&["correlator", "--model", "qwk", "--d", "3", "--g", "1", "--l", "1"]), "0");
    assert_eq!(value(&["correlator", "--model", "wk", "--d", "5", "--g", "2"]), "1/1152");
    assert_eq!(value(&["correlator", "--model", "wk", "--d", "0,0,1", "--g", "0"]), "1");
}

#[test]
fn batch_file() {
    let path = std::env::temp_dir().join(format!("mdhier-batch-{}.json", std::process::id()));
    std::fs::write(&path, r#"[{"model":"WK","d":[2],"g":1},{"model":"QWK","d":[3],"g":1,"l":0}]"#).unwrap();
    let out = run(&["correlator", "--batch", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v[0]["value"], "1/24");
    assert_eq!(v[1]["value"], "1/24");
}

#[test]
fn verify_examples_pass() {
    for args in [
        &["verify", "ehrhart", "--nmax", "4", "--dmax", "4", "--Amax", "12"][..],
        &["verify", "main-theorem", "--g", "1", "--l", "1", "--d", "0", "--n", "2"],
        &["verify", "integrability", "--kind", "md", "--d1", "0", "--d2", "1", "--gmax", "1"],
        &["verify", "tau-symmetry", "--kind", "dr1", "--d1", "1", "--d2", "2", "--gmax", "1"],
        &["verify", "dr1-link", "--d", "2", "--gmax", "1"],
        &["verify", "degree-zero", "--d", "1", "--gmax", "1"],
        &["verify", "commutator", "--count", "4", "--seed", "3"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json_of(&out)["verdict"], "PASS");
    }
}

#[test]
fn vacuous_main_theorem_is_not_a_pass() {
    let out = run(&["verify", "main-theorem", "--g", "1", "--l", "1", "--d", "0", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["verdict"], "INCONCLUSIVE");
}

#[test]
fn density_documents() {
    let out = run(&["density", "--kind", "md", "--family", "g", "--d", "1", "--gmax", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let eps2 = v["slices"].as_array().unwrap().iter().find(|s| s["eps"] == 2 && s["hbar"] == 0).unwrap();
    assert_eq!(eps2["u"], "[(-1/48)]·u0^2/x^2 + [(1/24)]·u0*u1/x + [(1/24)]·u0*u2");
    let out = run(&["density", "--kind", "dr", "--family", "h", "--d", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["density", "--kind", "md", "--family", "g", "--d", "0", "--gmax", "0"]);
    assert_eq!(json_of(&out)["slices"][0]["u"], "[(1/2)]·u0^2");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["density", "--kind", "md", "--family", "g", "--d", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["correlator", "--model", "wk", "--d", "5", "--g", "3"]).status.code(), Some(3));
    assert_eq!(run(&["correlator", "--model", "qwk", "--d", "3", "--g", "1"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "commutator", "--count", "3", "--seed", "11"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["density", "--kind", "dr1", "--family", "h", "--d", "1", "--gmax", "1", "--pretty"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn table_commands() {
    let out = run(&["table", "show", "--kind", "dr"]);
    let v = json_of(&out);
    let rows = v["entries"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["kind"] == "DR" && r["provenance"] == "derived"));
    let out = run(&["table", "lookup", "--kind", "dr", "--shape", "g", "--g", "1", "--n", "2", "--psi-pow", "1", "--lam", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["monomial"], "1/24*m2^2 + 1/24*m1^2");

    let dir = std::env::temp_dir().join(format!("mdhier-tables-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let gen = run(&["table", "generate", "--g", "3", "--psi-max", "2", "--output", dir.join("genus3.json").to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0), "{}", String::from_utf8_lossy(&gen.stderr));
    let check = run(&["table", "check", dir.join("genus3.json").to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    let with_env = Command::new(env!("CARGO_BIN_EXE_mdhier"))
        .args(["table", "show", "--g", "3"])
        .env("MDHIER_TABLE_DIR", &dir)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(!json_of(&with_env)["entries"].as_array().unwrap().is_empty());
}
