//! End-to-end tests against the compiled binary: exit codes, artifact
//! files, stream prefixes, and the seed-resolution order.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn severilab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_severilab"))
        .args(args)
        .current_dir(dir)
        .env_remove("SEVERILAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Run `construct` in a fresh tempdir and hand back the bundle path.
fn construct(n: usize, seed: &str, dir: &Path) -> PathBuf {
    let out = severilab(&["construct", "--n", &n.to_string(), "--seed", seed], dir);
    assert_eq!(out.status.code(), Some(0), "construct failed: {}", stderr(&out));
    let bundle = dir.join(format!("sigma-n{n}.json"));
    assert!(bundle.exists(), "missing bundle {}", bundle.display());
    bundle
}

#[test]
fn construct_writes_a_bundle_and_exits_clean() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = construct(3, "1", dir.path());
    let text = std::fs::read_to_string(&bundle).unwrap();
    assert!(text.ends_with('\n'));
    let value: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["schema"], "severilab/surface-model/1");
    assert_eq!(value["n"], 3);
    assert_eq!(value["prime"], 10007);
    assert_eq!(value["ell"], 2);
}

#[test]
fn construct_rejects_bad_configuration() {
    let dir = tempfile::tempdir().unwrap();
    // composite --prime
    let out = severilab(&["construct", "--n", "3", "--prime", "4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("configuration error:"), "{}", stderr(&out));
    // identical primes
    let out = severilab(&["construct", "--n", "3", "--prime2", "10007"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // unparsable seed from the environment
    let out = Command::new(env!("CARGO_BIN_EXE_severilab"))
        .args(["construct", "--n", "3"])
        .current_dir(dir.path())
        .env("SEVERILAB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("configuration error:"), "{}", stderr(&out));
}

#[test]
fn verify_accepts_a_fresh_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = construct(3, "1", dir.path());
    let out = severilab(&["verify", bundle.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("18 of 18 checks passed"), "{}", stdout(&out));
}

#[test]
fn verify_flags_a_tampered_node() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = construct(4, "1", dir.path());
    let mut value: Value =
        serde_json::from_str(&std::fs::read_to_string(&bundle).unwrap()).unwrap();
    let coord = value["nodes"][0][1].as_str().unwrap().to_owned();
    value["nodes"][0][1] = Value::String(if coord == "1" { "2".into() } else { "1".into() });
    std::fs::write(&bundle, serde_json::to_string_pretty(&value).unwrap()).unwrap();

    let out = severilab(&["verify", bundle.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("failing check: node-gradient"), "{}", stdout(&out));
    // the count of recorded nodes is untouched, so that check still passes
    assert!(stdout(&out).contains("pass node-count"), "{}", stdout(&out));
}

#[test]
fn verify_rejects_malformed_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "this is not json").unwrap();
    let out = severilab(&["verify", garbage.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("malformed bundle:"), "{}", stderr(&out));

    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, "{\"schema\":\"bogus/1\"}").unwrap();
    let out = severilab(&["verify", wrong.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("malformed bundle:"), "{}", stderr(&out));

    let missing = dir.path().join("nowhere.json");
    let out = severilab(&["verify", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_scan_confirms_the_singular_locus() {
    let dir = tempfile::tempdir().unwrap();
    let out = severilab(
        &["construct", "--n", "3", "--seed", "1", "--prime", "101", "--prime2", "103"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let bundle = dir.path().join("sigma-n3.json");
    let out = severilab(&["verify", bundle.to_str().unwrap(), "--scan"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("pass scan"), "{}", stdout(&out));
    assert!(
        stdout(&out).contains("no unexpected singular points off the marked line"),
        "{}",
        stdout(&out)
    );
    // a big prime is over the scan bound and must be refused loudly
    let big = construct(3, "1", dir.path());
    let out = severilab(&["verify", big.to_str().unwrap(), "--scan"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("configuration error:"), "{}", stderr(&out));
}

#[test]
fn claims_sweep_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = severilab(
        &["claims", "--n", "3..5", "--out", dir.path().to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("claims.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("claim,parameter,pass,witness"));
    assert!(lines.clone().all(|l| l.contains(",true,")), "{csv}");
    assert!(csv.contains("\"prop4.4-deg\""), "{csv}");
    assert!(csv.contains("\"claim4.7-degy\""), "{csv}");
    assert!(csv.contains("\"formula-table\""), "{csv}");
}

#[test]
fn claims_modal_targets_report_their_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = severilab(&["claims", "--determinacy", "fermat"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("determinacy-fermat "), "{}", stdout(&out));
    assert!(stdout(&out).contains("determinacy-fermat-koszul"), "{}", stdout(&out));

    let out = severilab(&["claims", "--cayley", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("quasi-ordinary-7"), "{}", stdout(&out));
    assert!(stdout(&out).contains("quasi-ordinary-severi-d3"), "{}", stdout(&out));
    assert!(stdout(&out).contains("quasi-ordinary-severi-d2"), "{}", stdout(&out));
}

#[test]
fn formulas_csv_artifact_has_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = severilab(
        &["formulas", "--n", "3..6", "--format", "csv", "--out", dir.path().to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("n,m,delta0,t_nm,f_n,s_n,ell,eps,codim\n"), "{}", stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("formulas.csv")).unwrap();
    assert!(csv.starts_with("n,m,delta0,t_nm,f_n,s_n,ell,eps,codim\n"), "{csv}");
    // delta_0(4) = 16 with no chord count at m = n
    assert!(csv.lines().any(|l| l.starts_with("4,,16,")), "{csv}");
}

#[test]
fn seed_flag_env_and_default_resolve_in_order() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let dir3 = tempfile::tempdir().unwrap();

    let flag = construct(3, "9", dir1.path());

    // env alone supplies the seed
    let out = Command::new(env!("CARGO_BIN_EXE_severilab"))
        .args(["construct", "--n", "3"])
        .current_dir(dir2.path())
        .env("SEVERILAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let env_bundle = dir2.path().join("sigma-n3.json");

    // the flag wins over a conflicting env value
    let out = Command::new(env!("CARGO_BIN_EXE_severilab"))
        .args(["construct", "--n", "3", "--seed", "9"])
        .current_dir(dir3.path())
        .env("SEVERILAB_SEED", "4444")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let flag_over_env = dir3.path().join("sigma-n3.json");

    let reference = std::fs::read(&flag).unwrap();
    assert_eq!(reference, std::fs::read(&env_bundle).unwrap());
    assert_eq!(reference, std::fs::read(&flag_over_env).unwrap());
}

#[test]
fn sub_maximal_ell_gets_its_own_bundle_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = severilab(&["construct", "--n", "4", "--ell", "3", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("sigma-n4-ell3.json").exists());
    assert!(!dir.path().join("sigma-n4.json").exists());
}
