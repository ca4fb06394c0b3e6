//! End-to-end tests of the `mcle` binary: file contracts, manifest
//! round-trips, determinism across thread counts, and error reporting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcle"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mcle-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL_STUDY: &str = "\
[model]
name = gauss-scale
theta = 1.0

[study]
n_ladder = 64,128
replicates = 100
j = 4
";

#[test]
fn figure1_writes_the_contracted_file() {
    let dir = tmp_dir("fig1");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "[model]\nname = gauss-scale\ntheta = 1.0\n\n[study]\nn_ladder = 100\n",
    );
    let out = dir.join("out");
    run_ok(&["figure1", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);

    let csv = fs::read_to_string(out.join("figure1_100_0.25.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 22, "21 data rows plus header");
    assert_eq!(lines[0], "theta,exact,noisy");
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn scale_emits_one_row_per_ladder_entry() {
    let dir = tmp_dir("scale");
    let cfg = write_config(&dir, "run.cfg", SMALL_STUDY);
    let out = dir.join("out");
    run_ok(&["scale", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let csv = fs::read_to_string(out.join("scaling_report.csv")).unwrap();
    let data_rows: Vec<&str> =
        csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with('n')).collect();
    assert_eq!(data_rows.len(), 2);
    assert!(csv.lines().next().unwrap().starts_with("# se_mc^2"));
}

#[test]
fn identical_configs_give_byte_identical_outputs_at_any_thread_count() {
    let dir = tmp_dir("det");
    let cfg = write_config(&dir, "run.cfg", SMALL_STUDY);
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    run_ok(&[
        "scale",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    run_ok(&[
        "scale",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--threads",
        "3",
    ]);
    let a = fs::read(out1.join("scaling_report.csv")).unwrap();
    let b = fs::read(out2.join("scaling_report.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn manifest_reruns_reproduce_the_outputs() {
    let dir = tmp_dir("manifest");
    let cfg = write_config(&dir, "run.cfg", SMALL_STUDY);
    let out1 = dir.join("a");
    run_ok(&["scale", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap()]);

    // rerun from the emitted manifest into a fresh directory
    let manifest = out1.join("manifest.txt");
    let out2 = dir.join("b");
    run_ok(&[
        "scale",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]);
    let a = fs::read(out1.join("scaling_report.csv")).unwrap();
    let b = fs::read(out2.join("scaling_report.csv")).unwrap();
    assert_eq!(a, b);

    // and the manifests differ only in the output directory line
    let ma = fs::read_to_string(out1.join("manifest.txt")).unwrap();
    let mb = fs::read_to_string(out2.join("manifest.txt")).unwrap();
    let strip = |s: &str| -> String {
        s.lines().filter(|l| !l.starts_with("dir = ")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&ma), strip(&mb));
}

#[test]
fn seed_flag_changes_outputs_and_is_recorded() {
    let dir = tmp_dir("seed");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "[model]\nname = gauss-scale\ntheta = 1.0\n\n[study]\nn_ladder = 64\n",
    );
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    run_ok(&["figure1", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap()]);
    run_ok(&[
        "figure1",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--seed",
        "77",
    ]);
    let a = fs::read_to_string(out1.join("figure1_64_0.25.csv")).unwrap();
    let b = fs::read_to_string(out2.join("figure1_64_0.25.csv")).unwrap();
    assert_ne!(a, b);
    let manifest = fs::read_to_string(out2.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 77"));
}

#[test]
fn rlan_check_and_snr_and_fit_write_their_files() {
    let dir = tmp_dir("subs");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "[model]\nname = gauss-scale\ntheta = 1.0\n\n[study]\nn_ladder = 64,128\nremainder_replicates = 10\nreplicates = 60\nj = 3\n",
    );
    let out = dir.join("rlan");
    run_ok(&["rlan-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let coeffs = fs::read_to_string(out.join("coefficients.csv")).unwrap();
    assert!(coeffs.starts_with("theta,info,w_cubic,q_quartic"));
    let remainder = fs::read_to_string(out.join("remainder.csv")).unwrap();
    // 2 ladder entries x 2 exponents x 10 replicates + header
    assert_eq!(remainder.lines().count(), 41);

    let out = dir.join("snr");
    run_ok(&["snr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let snr = fs::read_to_string(out.join("snr.csv")).unwrap();
    assert_eq!(snr.lines().count(), 5);

    let out = dir.join("fit");
    run_ok(&["fit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let fit = fs::read_to_string(out.join("fit.csv")).unwrap();
    assert!(fit.starts_with("n,J,delta,beta0"));
    assert_eq!(fit.lines().count(), 3);
    assert!(out.join("bias_curve.csv").exists());
}

#[test]
fn bad_configs_fail_with_named_lines() {
    let dir = tmp_dir("bad");
    let cases = [
        ("j.cfg", "[model]\nname = gauss-scale\ntheta = 1\n[study]\nj = 1\n", "J must be >= 2"),
        (
            "m.cfg",
            "[model]\nname = gauss-scale\ntheta = 1\n[study]\nm_exponent = 1.0\n",
            "open interval (0.5, 1)",
        ),
        ("typo.cfg", "[model]\nname = gauss-scale\ntheta = 1\nthetta = 2\n", "unknown key `thetta`"),
        ("type.cfg", "[model]\nname = gauss-scale\ntheta = soon\n", "expects real number"),
        ("missing.cfg", "[model]\nname = gauss-scale\n", "missing required key `model.theta`"),
    ];
    for (name, body, needle) in cases {
        let cfg = write_config(&dir, name, body);
        let out = bin()
            .args(["scale", "--config", cfg.to_str().unwrap(), "--out", dir.join("x").to_str().unwrap()])
            .output()
            .unwrap();
        assert!(!out.status.success(), "{name} unexpectedly succeeded");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains(needle), "{name}: stderr `{stderr}` lacks `{needle}`");
    }
}

#[test]
fn unwritable_output_directory_is_a_clean_failure() {
    let dir = tmp_dir("unwritable");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "[model]\nname = gauss-scale\ntheta = 1.0\n",
    );
    let out = bin()
        .args(["snr", "--config", cfg.to_str().unwrap(), "--out", "/proc/nonexistent/nested"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn subcommand_mismatch_with_manifest_is_rejected() {
    let dir = tmp_dir("mismatch");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "subcommand = snr\n[model]\nname = gauss-scale\ntheta = 1.0\n",
    );
    let out = bin()
        .args(["scale", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config names subcommand `snr`"), "{stderr}");
}
