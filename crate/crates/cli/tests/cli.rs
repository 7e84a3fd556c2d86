use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn crb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crb")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const PARAMS: &str = "[params]\neps = 0.1\nalpha = 1.0\nbeta = 1.0\ngamma = 1.0\ndelta = 1.0\nc = 1.5\n";

fn zero_config(extra: &str) -> String {
    format!(
        "{PARAMS}[grid]\nhalf_length = 5.0\nn_points = 16\n[time]\ndt = 0.01\nt_end = 0.2\nsnapshots = [0.0, 0.1, 0.2]\n\
         [initial]\nkind = \"zero\"\n[run]\ncase = \"distinct\"\n{extra}"
    )
}

fn manifest_files(dir: &Path) -> Vec<(String, String)> {
    let text = fs::read_to_string(dir.join("manifest.toml")).unwrap();
    let mut out = Vec::new();
    let mut path = None;
    for line in text.lines() {
        if let Some(v) = line.strip_prefix("path = ") {
            path = Some(v.trim_matches('"').to_string());
        }
        if let Some(v) = line.strip_prefix("sha256 = ") {
            out.push((path.take().unwrap(), v.trim_matches('"').to_string()));
        }
    }
    out
}

#[test]
fn presets_are_listed_and_dumped_configs_validate() {
    let out = crb(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1-conservation", "fig2", "fig7", "fig15"] {
        assert!(text.contains(name));
    }
    let dump = crb(&["presets", "--dump", "fig7"]);
    assert!(dump.status.success());
    let dumped = String::from_utf8(dump.stdout).unwrap();
    assert!(dumped.contains("eps = 0.0005"));
    assert!(dumped.contains("n_points = 6000"));
    assert!(dumped.contains("half_length = 300.0"));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "fig7.toml", &dumped);
    let v = crb(&["validate-config", "--config", &cfg]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
}

#[test]
fn fig15_preset_snapshots_every_fifty() {
    let dump = String::from_utf8(crb(&["presets", "--dump", "fig15"]).stdout).unwrap();
    assert!(dump.contains("sources = \"direct\""));
    assert!(dump.contains("t_end = 1000.0"));
    let snaps = dump.split("snapshots = [").nth(1).unwrap().split(']').next().unwrap();
    let vals: Vec<f64> = snaps.split(',').filter_map(|s| s.trim().parse().ok()).collect();
    assert_eq!(vals, (0..=20).map(|i| 50.0 * i as f64).collect::<Vec<_>>());
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "bad.toml", &zero_config("bogus_key = 1\n"));
    let out = crb(&["validate-config", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus_key"), "{err}");
    assert!(err.contains("line"), "{err}");

    let neg = write_config(
        tmp.path(),
        "neg.toml",
        &zero_config("").replace("eps = 0.1", "eps = -0.1"),
    );
    assert_eq!(crb(&["validate-config", "--config", &neg]).status.code(), Some(2));
    assert_eq!(crb(&["simulate", "--preset", "fig99"]).status.code(), Some(2));
    assert_eq!(
        crb(&["simulate", "--preset", "fig2", "--config", &neg]).status.code(),
        Some(2)
    );
    assert_eq!(
        crb(&["validate-config", "--preset", "fig2", "--order", "eps3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        crb(&["validate-config", "--preset", "fig2", "--case", "sideways"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn zero_data_give_zero_csvs_with_checksummed_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", &zero_config(""));
    let dir = tmp.path().join("run");
    let out = crb(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = manifest_files(&dir);
    // Three snapshots: a direct file plus wnl and diff files per order.
    assert_eq!(files.len(), 3 * (1 + 2 * 3));
    for (name, sum) in &files {
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(&format!("{:x}", Sha256::digest(&bytes)), sum);
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header == "t,x,u,w" || header == "t,x,du,dw");
        for l in lines {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols.len(), 4);
            assert!(cols[2..].iter().all(|c| c.parse::<f64>().unwrap() == 0.0));
        }
    }
    let manifest = fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"complete\""));
    assert!(manifest.contains("rho2.outcome"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{PARAMS}[grid]\nhalf_length = 10.0\nn_points = 64\n[time]\ndt = 0.02\nt_end = 1.0\n\
         [initial]\nkind = \"solitary\"\nk1 = 0.5\nk2 = 0.5\nx0 = 0.0\npedestal = 0.5\n[run]\ncase = \"distinct\"\n"
    );
    let cfg = write_config(tmp.path(), "sol.toml", &text);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        let out = crb(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            d.to_str().unwrap(),
            "--order",
            "sqrt-eps",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let fa = manifest_files(&a);
    assert_eq!(fa, manifest_files(&b));
    assert_eq!(fa.len(), 2 * 3);
    let sample = fs::read_to_string(a.join("direct_001.csv")).unwrap();
    let v = sample.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    // 17 significant digits in scientific notation.
    let mantissa = v.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.replace('.', "").len(), 17);
}

#[test]
fn sweep_rejects_duplicate_eps_and_fits_slopes() {
    let tmp = tempfile::tempdir().unwrap();
    let dup = write_config(
        tmp.path(),
        "dup.toml",
        "preset = \"fig2\"\n[sweep]\neps = [0.01, 0.01, 0.02, 0.02, 0.03]\n",
    );
    let out = crb(&[
        "sweep",
        "--config",
        &dup,
        "--out",
        tmp.path().join("d").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));

    let text = format!(
        "{PARAMS}[grid]\nhalf_length = 10.0\nn_points = 64\n[time]\ndt = 0.05\nt_end = 1.0\n\
         [initial]\nkind = \"solitary\"\nk1 = 0.5\nk2 = 0.5\nx0 = 0.0\npedestal = 0.0\n[run]\ncase = \"distinct\"\n\
         [sweep]\neps = [0.1, 0.14, 0.2, 0.28]\n"
    );
    let cfg = write_config(tmp.path(), "sweep.toml", &text);
    let dir = tmp.path().join("s");
    let out = crb(&["sweep", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let slopes = fs::read_to_string(dir.join("slopes.csv")).unwrap();
    assert_eq!(slopes.lines().count(), 1 + 6);
    assert!(slopes.starts_with("field,order,alpha,prefactor,residual"));
    assert_eq!(manifest_files(&dir).len(), 4 + 2);
}

#[test]
fn zero_data_conservation_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &zero_config("[conservation]\ndt = 0.01\nsample_every = 2\n"),
    );
    let dir = tmp.path().join("c");
    let out = crb(&["conservation", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.join("conservation.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 9);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for r in rows {
        assert!(r.split(',').skip(1).all(|c| c.parse::<f64>().unwrap() == 0.0));
    }
}

#[test]
fn divergence_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{PARAMS}[grid]\nhalf_length = 10.0\nn_points = 64\n[time]\ndt = 5.0\nt_end = 5000.0\n\
         [initial]\nkind = \"solitary\"\nk1 = 1.0\nk2 = 1.0\nx0 = 0.0\npedestal = 0.0\n\
         [run]\ncase = \"distinct\"\nsources = \"direct\"\n"
    );
    let cfg = write_config(tmp.path(), "div.toml", &text);
    let dir = tmp.path().join("div");
    let out = crb(&["simulate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"failed"));
}
