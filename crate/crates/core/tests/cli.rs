use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dbr_core::io::matrix_from_csv;
use serde_json::Value;
use tempfile::TempDir;

fn dbr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbr")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn assert_certificate(c: &Value) {
    for key in ["kind", "pass", "witness", "tolerance", "context"] {
        assert!(c.get(key).is_some(), "certificate lacks {key}: {c}");
    }
}

#[test]
fn mate_valid_and_extreme() {
    let dir = TempDir::new().unwrap();
    let ok = write(
        dir.path(),
        "b.json",
        r#"{"c":{"re":0,"im":0},"gamma":{"re":0.5,"im":0},"beta":{"re":0.2,"im":0.1}}"#,
    );
    let out = dbr(&["mate", &ok]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!(v["rho"].as_f64().unwrap() > 0.0);
    assert!(v["sigma"]["re"].is_number());
    assert_certificate(&v["certificate"]);

    let inner = write(
        dir.path(),
        "inner.json",
        r#"{"c":{"re":0,"im":0},"gamma":{"re":1,"im":0},"beta":{"re":0,"im":0}}"#,
    );
    let out = dbr(&["mate", &inner]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("inner symbol (extreme)"), "{}", stderr(&out));

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"c":{"re":0.9,"im":0},"gamma":{"re":0.9,"im":0},"beta":{"re":0,"im":0}}"#,
    );
    assert_eq!(dbr(&["mate", &bad]).status.code(), Some(2));
}

#[test]
fn synthesize_writes_symbol_schema() {
    let out = dbr(&["synthesize", "--alpha", "1", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["c"]["re"], 0.0);
    assert!((v["gamma"]["re"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(v["beta"]["re"], 0.0);

    let out = dbr(&["synthesize", "--alpha", "1", "--lambda", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("outside the closed unit disk"));
}

#[test]
fn verify_equality_writes_grams() {
    let dir = TempDir::new().unwrap();
    let grams = dir.path().join("grams");
    let out = dbr(&[
        "verify-equality",
        "--alpha",
        "0.8",
        "--lambda",
        "0.3+0.4i",
        "-N",
        "12",
        "--gram-dir",
        grams.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_certificate(&v["certificate"]);
    assert_eq!(v["certificate"]["pass"], true);

    let gd = matrix_from_csv(&fs::read_to_string(grams.join("dmu_gram.csv")).unwrap()).unwrap();
    let gb = matrix_from_csv(&fs::read_to_string(grams.join("hb_gram.csv")).unwrap()).unwrap();
    assert_eq!(gd.shape(), (12, 12));
    assert!(dbr_core::max_abs(&(gd - gb)) < 1e-9);
}

#[test]
fn verify_equality_from_measure_and_multi_atom_rejection() {
    let dir = TempDir::new().unwrap();
    let one = write(dir.path(), "one.json", r#"{"atoms":[{"re":0.5,"im":0,"weight":1}]}"#);
    let out = dbr(&["verify-equality", "--measure", &one, "-N", "10", "--gram-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let two = write(
        dir.path(),
        "two.json",
        r#"{"atoms":[{"re":0.5,"im":0,"weight":1},{"re":-0.5,"im":0,"weight":1}]}"#,
    );
    let out = dbr(&["verify-equality", "--measure", &two, "--gram-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("single-atom"), "{}", stderr(&out));
}

#[test]
fn certify_reports_all_certificates() {
    let dir = TempDir::new().unwrap();
    let mu = write(
        dir.path(),
        "mu.json",
        r#"{"atoms":[{"re":0.5,"im":0.2,"weight":2},{"re":0,"im":-1,"weight":0.7}]}"#,
    );
    let out = dbr(&["certify", &mu, "-N", "16", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let certs = json(&out);
    let certs = certs.as_array().unwrap();
    assert_eq!(certs.len(), 4 + 2);
    for c in certs {
        assert_certificate(c);
        assert_eq!(c["pass"], true, "{c}");
    }
    let rank = certs.iter().find(|c| c["kind"] == "defect-rank").unwrap();
    assert_eq!(rank["context"]["rank"], 2);

    assert_eq!(dbr(&["certify", &mu, "-N", "4", "--n-max", "4"]).status.code(), Some(2));
}

#[test]
fn recover_from_moments_and_measure() {
    let dir = TempDir::new().unwrap();
    // Moments of 2δ_{0.5}: M[n][m] = 2 · 0.5^{n+m}.
    let mut csv = String::new();
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|s| format!("{},0", 2.0 * 0.5f64.powi(r + s))).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let m = write(dir.path(), "m.csv", &csv);
    let out = dbr(&["recover", "--moments", &m]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let atoms = v["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0]["re"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((atoms[0]["weight"].as_f64().unwrap() - 2.0).abs() < 1e-10);

    let mu = write(
        dir.path(),
        "mu.json",
        r#"{"atoms":[{"re":0.6,"im":0.1,"weight":1.5},{"re":-0.2,"im":0.9,"weight":0.4}]}"#,
    );
    let out = dbr(&["recover", "--measure", &mu, "-N", "12", "--atoms", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_certificate(&json(&out)["certificate"]);

    let skew = write(dir.path(), "skew.csv", "1,0,1,0\n0,0,1,0\n");
    assert_eq!(dbr(&["recover", "--moments", &skew]).status.code(), Some(2));
    assert_eq!(dbr(&["recover", "--moments", &m, "--atoms", "many"]).status.code(), Some(2));
}

#[test]
fn kernel_norms_default_and_explicit_points() {
    let out = dbr(&["kernel-norms", "--alpha", "1", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = dbr(&["kernel-norms", "--alpha", "0.7", "--lambda", "-i", "--w", "0.3", "--w", "-0.2-0.5i"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(dbr(&["kernel-norms", "--alpha", "1", "--lambda", "0", "--w", "1.2"]).status.code(), Some(2));
}

#[test]
fn tolerance_overrides() {
    let base = ["verify-equality", "--alpha", "1", "--lambda", "0.5", "-N", "10"];
    let dir = TempDir::new().unwrap();
    let gd = dir.path().to_str().unwrap();

    let mut args = base.to_vec();
    args.extend(["--gram-dir", gd, "--tol", "equality=1e-300"]);
    let out = dbr(&args);
    assert_eq!(out.status.code(), Some(1), "an impossible tolerance must fail");
    assert_eq!(json(&out)["certificate"]["pass"], false);

    let mut args = base.to_vec();
    args.extend(["--gram-dir", gd, "--tol", "nonsense=1"]);
    let out = dbr(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown tolerance"));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let gd = dir.path().join(sub);
        let out = dbr(&[
            "verify-equality",
            "--alpha",
            "1.3",
            "--lambda",
            "0.1-0.7i",
            "-N",
            "16",
            "--gram-dir",
            gd.to_str().unwrap(),
        ]);
        let text = String::from_utf8(out.stdout).unwrap();
        let text = text.replace(gd.to_str().unwrap(), "<dir>");
        (text, fs::read(gd.join("dmu_gram.csv")).unwrap(), fs::read(gd.join("hb_gram.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));

    let mu = write(dir.path(), "mu.json", r#"{"atoms":[{"re":0.3,"im":0.3,"weight":1},{"re":1,"im":0,"weight":2}]}"#);
    assert_eq!(dbr(&["certify", &mu]).stdout, dbr(&["certify", &mu]).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("sym.json");
    let out = dbr(&["synthesize", "--alpha", "2", "--lambda", "0.5i", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(target).unwrap()).unwrap();
    assert!(v["gamma"]["re"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dbr(&[]).status.code(), Some(2));
    assert_eq!(dbr(&["synthesize", "--alpha", "x", "--lambda", "0"]).status.code(), Some(2));
    assert_eq!(dbr(&["mate", "/nonexistent/b.json"]).status.code(), Some(2));
    assert_eq!(dbr(&["--help"]).status.code(), Some(0));
}
