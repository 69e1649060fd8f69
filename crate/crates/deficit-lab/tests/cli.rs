//! Binary-level contract: argument handling, exit codes, file outputs, and
//! the mixture-file interface.

use std::path::{Path, PathBuf};
use std::process::Command;

use deficit_lab::corpus::standard_corpus;
use deficit_lab::heat_model::GaussianMixture;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deficit-lab"))
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(
        &path,
        "n=1\ntau_min=0.5\ntau_max=2.0\nN_list=1000,10000,100000\nbeta_list=0.9,0.95,0.99\nseed=42\n",
    )
    .unwrap();
    path
}

#[test]
fn usage_errors_exit_two() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["frobnicate", "--config", "x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["identities"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "--config is required");

    let out = bin()
        .args(["identities", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "tau_min=0\n").unwrap();
    let out = bin()
        .args(["identities", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn projection_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "projection",
            "--config",
            cfg.to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("projection.csv").exists());
    assert!(out_dir.join("summary.csv").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS]"));

    // rerun into a second directory: byte-identical artifacts
    let out_dir2 = dir.path().join("out2");
    bin()
        .args([
            "projection",
            "--config",
            cfg.to_str().unwrap(),
            "--output-dir",
            out_dir2.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let a = std::fs::read(out_dir.join("projection.csv")).unwrap();
    let b = std::fs::read(out_dir2.join("projection.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mixture_files_match_builtin_corpus() {
    // the shipped .mix files parse to exactly the built-in corpus
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    for entry in standard_corpus() {
        let path = root.join(format!("{}.mix", entry.name));
        let parsed =
            GaussianMixture::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parsed.dim(), entry.mixture.dim());
        assert_eq!(parsed.components().len(), entry.mixture.components().len());
        for (a, b) in parsed
            .components()
            .iter()
            .zip(entry.mixture.components().iter())
        {
            assert_eq!(a.weight, b.weight);
            assert_eq!(a.center, b.center);
            assert_eq!(a.time_offset, b.time_offset);
        }
    }
}

#[test]
fn identities_run_on_mixture_file() {
    let dir = tempfile::tempdir().unwrap();
    let mix_path = dir.path().join("pair.mix");
    std::fs::write(&mix_path, "n=1\n0.5 -1.0 0.2\n0.5 1.0 0.2\n").unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        format!(
            "mixture_file={}\nseed=1\noutput_dir={}\n",
            mix_path.display(),
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = bin()
        .args(["identities", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("out/identities.csv")).unwrap();
    assert!(csv.contains("pair,"), "mixture name from the file stem");
}
