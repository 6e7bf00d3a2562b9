use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use epcore_cli::trace::declared;
use epcore_cli::{execute, ExperimentConfig, SubcommandName, OPERATIONS};
use serde_json::Value;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn configs() -> Vec<(SubcommandName, PathBuf)> {
    let mut v: Vec<(SubcommandName, PathBuf)> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| {
            let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&p).unwrap()).unwrap();
            let name = cfg.subcommand.clone().expect("sample configs name their subcommand");
            let sub = *SubcommandName::ALL.iter().find(|s| s.as_str() == name).unwrap();
            (sub, p)
        })
        .collect();
    v.sort_by(|a, b| a.1.cmp(&b.1));
    v
}

fn epcore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epcore")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["code"].as_str().unwrap().to_string()
}

#[test]
fn every_sample_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, path) in configs() {
        let out = dir.path().join(format!("{}.csv", path.file_stem().unwrap().to_str().unwrap()));
        let res = epcore(&[
            sub.as_str(),
            "--config",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&res.stderr));
        let meta: Value = serde_json::from_slice(&std::fs::read(format!("{}.meta.json", out.display())).unwrap()).unwrap();
        assert_eq!(meta["subcommand"], sub.as_str());
        assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn sample_configs_cover_every_operation() {
    let mut union = BTreeSet::new();
    let mut subs = BTreeSet::new();
    for (sub, path) in configs() {
        let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let (_, trace) = execute(sub, &cfg).unwrap();
        let allowed = declared(sub);
        for op in trace.operations() {
            assert!(allowed.contains(&op), "{} hit undeclared {op}", path.display());
            union.insert(op);
        }
        subs.insert(sub.as_str());
    }
    let all: BTreeSet<&str> = OPERATIONS.iter().copied().collect();
    assert_eq!(union, all, "missing {:?}", all.difference(&union).collect::<Vec<_>>());
    assert_eq!(subs.len(), SubcommandName::ALL.len());
}

#[test]
fn invalid_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"subcommand":"encircle","family":{"kind":"canonical_dimer"},
            "encircle":{"loops":[{"center":{"re":0,"im":-1},"radius":-0.5}]}}"#,
    );
    let out = dir.path().join("out.csv");
    let res = epcore(&["encircle", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
    assert!(!dir.path().join("out.csv.meta.json").exists());
    assert_eq!(stderr_code(&res), "config.value");
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"family":{"kind":"canonical_dimer"},"bogus":1}"#);
    let res = epcore(&["census", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"family":{"kind":"canonical_dimer"}}"#);
    let res = epcore(&["frobnicate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(stderr_code(&res), "cli.usage");
}

#[test]
fn subcommand_mismatch_exits_2() {
    let cfg = configs_dir().join("census_dimer.json");
    let res = epcore(&["metric", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(stderr_code(&res), "config.subcommand_mismatch");
}

#[test]
fn domain_failure_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"subcommand":"twolevel",
            "family":{"kind":"twolevel","omega":[1,-1],"delta":[0,0]},
            "twolevel":{"samples":[]}}"#,
    );
    let out = dir.path().join("out.csv");
    let res = epcore(&["twolevel", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(!out.exists());
    assert_eq!(stderr_code(&res), "twolevel.crossing_not_ep");
}

#[test]
fn zero_workers_is_rejected() {
    let cfg = configs_dir().join("census_dimer.json");
    let res = epcore(&["census", "--config", cfg.to_str().unwrap(), "--workers", "0"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn json_complex_values_are_objects() {
    let cfg = configs_dir().join("census_dimer.json");
    let res = epcore(&["census", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(res.status.success());
    let rows: Value = serde_json::from_slice(&res.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let mut ims: Vec<f64> = rows.iter().map(|r| r["lambda"]["im"].as_f64().unwrap()).collect();
    ims.sort_by(f64::total_cmp);
    assert!((ims[0] + 1.0).abs() < 1e-8 && (ims[1] - 1.0).abs() < 1e-8);
    assert!(rows.iter().all(|r| r["lambda"]["re"].as_f64().unwrap().abs() < 1e-8));
    assert_eq!(rows[0]["kind"], "ep2");
}

#[test]
fn csv_reals_carry_seventeen_digits() {
    let cfg = configs_dir().join("census_dimer.json");
    let res = epcore(&["census", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..4], ["index", "lambda_re", "lambda_im", "energy_re"]);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mantissa = first[2].split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.replace('.', "").len(), 17);
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("encircle_track.json");
    let bytes: Vec<Vec<u8>> = ["1", "2", "4"]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}.json"));
            let res = epcore(&[
                "encircle",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--workers",
                w,
            ]);
            assert!(res.status.success());
            std::fs::read(out).unwrap()
        })
        .collect();
    assert!(bytes.windows(2).all(|w| w[0] == w[1]));
}
