use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use monotone_play::cli::{run_command, ExperimentConfig};

fn preset_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets")
}

fn presets() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(preset_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn every_preset_passes_and_reruns_identically() {
    let list = presets();
    assert_eq!(list.len(), 10);
    for path in list {
        let cfg = ExperimentConfig::load(&path).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out = run_command(&cfg, &preset_dir(), a.path()).unwrap();
        assert_eq!(out.exit_code(), 0, "{}: {}", path.display(), out.summary());
        assert!(out.lines.iter().all(|l| !l.to_string().contains("fails")));
        run_command(&cfg, &preset_dir(), b.path()).unwrap();
        let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
        assert!(sa.len() >= 2, "{}", path.display());
        assert_eq!(sa, sb, "{} not reproducible", path.display());
    }
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_monotone-play"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["regret", "--config"])
        .arg(preset_dir().join("AC10.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("eg demo: holds (regret 500,"));
    assert!(dir.path().join("regret.csv").exists());

    let mismatch = bin()
        .args(["simulate", "--config"])
        .arg(preset_dir().join("AC10.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(mismatch.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"command": "regret", "T": 10, "colour": "blue"}"#).unwrap();
    let out = bin()
        .args(["regret", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let strict = dir.path().join("strict.json");
    fs::write(
        &strict,
        r#"{"command": "regret", "T": 100, "eta": 0.5, "D": 1,
            "regret": {"grad_bound": 1, "max_average_regret": 1e-6}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["regret", "--config"])
        .arg(&strict)
        .arg("--out")
        .arg(dir.path().join("strict"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let diverge = dir.path().join("diverge.json");
    fs::write(
        &diverge,
        r#"{"command": "simulate", "algorithm": "gd", "eta": 0.5, "T": 100000,
            "operator": {"kind": "bilinear", "M": [[1]], "D": 1}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&diverge)
        .arg("--out")
        .arg(dir.path().join("diverge"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: Option<&str>, dir: &Path| {
        let mut cmd = bin();
        cmd.args(["scli-sweep", "--config"])
            .arg(preset_dir().join("AC7.json"))
            .arg("--out")
            .arg(dir);
        match threads {
            Some(t) => cmd.env("MONOTONE_PLAY_THREADS", t),
            None => cmd.env_remove("MONOTONE_PLAY_THREADS"),
        };
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        snapshot(dir)
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(Some("1"), a.path()), run(None, b.path()));
}

#[test]
fn ratefit_reads_lowerbound_table() {
    let dir = tempfile::tempdir().unwrap();
    let lb = ExperimentConfig::load(&preset_dir().join("AC8.json")).unwrap();
    run_command(&lb, &preset_dir(), dir.path()).unwrap();
    let cfg = ExperimentConfig::from_json(
        r#"{"command": "ratefit",
            "ratefit": {"input": "lowerbound.csv", "x": "T", "y": "max_gradgap", "burn_in": 0,
                        "slope_range": [-0.65, -0.35]}}"#,
    )
    .unwrap();
    let out = run_command(&cfg, dir.path(), &dir.path().join("fit")).unwrap();
    assert!(
        out.summary().contains("rate slope: holds"),
        "{}",
        out.summary()
    );
    let fit = fs::read_to_string(dir.path().join("fit").join("fit.csv")).unwrap();
    assert!(fit.starts_with("slope,intercept,r2,points_used\n"));
}
