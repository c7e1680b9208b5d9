//! Black-box tests of the command-line interface: subcommand wiring,
//! output files, and the documented exit codes (0 ok, 1 usage,
//! 2 I/O, 3 spec validation).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ltejam"))
}

/// Fresh scratch directory per test, under the target-adjacent tmp root.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ltejam-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary spawns")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Tiny but complete sweep spec pointing its outputs into `dir`.
fn write_small_spec(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("spec-{seed}.toml"));
    let body = format!(
        "strategies = [\"barrage\", \"pcfich\"]\n\
         jsr_start_db = -20.0\n\
         jsr_stop_db = -15.0\n\
         jsr_step_db = 5.0\n\
         n_trial = 20\n\
         rng_seed = {seed}\n\
         csv_path = \"{}\"\n\
         summary_path = \"{}\"\n\
         bandwidth_path = \"{}\"\n",
        dir.join("results.csv").display(),
        dir.join("summary.txt").display(),
        dir.join("bandwidth.csv").display(),
    );
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_executes_a_spec_and_writes_all_outputs() {
    let dir = scratch("run");
    let spec = write_small_spec(&dir, 3);
    let out = run_in(&dir, &["run", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,jsr_re_db,jsr_f_db,rho_pdsch_db,jsr_n_db,n_err,n_trial,p_err"
    );
    // 2 strategies x 2 sweep points.
    assert_eq!(lines.count(), 4);

    let summary = fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.contains("strategy"), "summary: {summary}");
    assert!(summary.contains("jsr_n_dos"), "summary: {summary}");

    let bandwidth = fs::read_to_string(dir.join("bandwidth.csv")).unwrap();
    assert!(bandwidth.starts_with("strategy,bandwidth_mhz,jsr_n_dos_db"));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("wrote"), "stdout: {stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn identical_seeds_reproduce_identical_files() {
    let dir_a = scratch("det-a");
    let dir_b = scratch("det-b");
    let spec_a = write_small_spec(&dir_a, 8);
    let spec_b = write_small_spec(&dir_b, 8);
    assert_eq!(code(&run_in(&dir_a, &["run", spec_a.to_str().unwrap()])), 0);
    assert_eq!(code(&run_in(&dir_b, &["run", spec_b.to_str().unwrap()])), 0);
    let csv_a = fs::read(dir_a.join("results.csv")).unwrap();
    let csv_b = fs::read(dir_b.join("results.csv")).unwrap();
    assert!(!csv_a.is_empty());
    assert_eq!(csv_a, csv_b, "same spec and seed must give identical CSV bytes");
    let _ = fs::remove_dir_all(&dir_a);
    let _ = fs::remove_dir_all(&dir_b);
}

#[test]
fn missing_spec_file_is_an_io_error() {
    let dir = scratch("missing");
    let out = run_in(&dir, &["run", "no-such-spec.toml"]);
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn malformed_and_invalid_specs_are_validation_errors() {
    let dir = scratch("invalid");

    let garbled = dir.join("garbled.toml");
    fs::write(&garbled, "strategies = [\"no-such-strategy\"]\n").unwrap();
    let out = run_in(&dir, &["run", garbled.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let backwards = dir.join("backwards.toml");
    fs::write(&backwards, "jsr_start_db = 10.0\njsr_stop_db = -10.0\n").unwrap();
    let out = run_in(&dir, &["run", backwards.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let unknown = dir.join("unknown.toml");
    fs::write(&unknown, "no_such_knob = 1\n").unwrap();
    let out = run_in(&dir, &["run", unknown.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn usage_errors_and_help_use_the_standard_codes() {
    let dir = scratch("usage");
    assert_eq!(code(&run_in(&dir, &[])), 1);
    assert_eq!(code(&run_in(&dir, &["no-such-command"])), 1);
    assert_eq!(code(&run_in(&dir, &["--help"])), 0);
    assert_eq!(code(&run_in(&dir, &["--version"])), 0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn scale_projects_the_builtin_reference_thresholds() {
    let dir = scratch("scale");
    let output = dir.join("bw.csv");
    let out = run_in(&dir, &["scale", "--output", output.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(&output).unwrap();
    assert!(csv.starts_with("strategy,bandwidth_mhz,jsr_n_dos_db"));
    // 6 strategies x 6 bandwidths.
    assert_eq!(csv.lines().count(), 1 + 36);
    let sync_10 = csv
        .lines()
        .find(|l| l.starts_with("pss-sss,10,"))
        .expect("sync row at 10 MHz");
    let db: f64 = sync_10.rsplit(',').next().unwrap().parse().unwrap();
    assert!((db - (-3.54)).abs() < 0.01, "sync at 10 MHz scaled to {db}");

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("true"), "conclusions missing: {stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn scale_accepts_custom_threshold_maps_and_rejects_bad_tokens() {
    let dir = scratch("scale-custom");
    let input = dir.join("thresholds.toml");
    fs::write(
        &input,
        "barrage = -10.0\n\"pss-sss\" = 5.0\npdcch = -16.0\npbch = -3.0\n\
         pcfich = -19.0\ncrs = -26.0\n",
    )
    .unwrap();
    let output = dir.join("bw.csv");
    let out = run_in(
        &dir,
        &[
            "scale",
            "--input",
            input.to_str().unwrap(),
            "--output",
            output.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(output.exists());

    let bogus = dir.join("bogus.toml");
    fs::write(&bogus, "laser = -3.0\n").unwrap();
    let out = run_in(&dir, &["scale", "--input", bogus.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn export_writes_interleaved_float_pairs() {
    let dir = scratch("export");
    let path = dir.join("capture.iq");
    let out = run_in(
        &dir,
        &[
            "export-iq",
            "--output",
            path.to_str().unwrap(),
            "--subframes",
            "2",
            "--strategy",
            "pss-sss",
            "--jsr-re-db",
            "0",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(&path).unwrap();
    // 2 subframes at 1.92 MHz = 3840 samples, 8 bytes per I/Q pair.
    assert_eq!(bytes.len(), 3840 * 8);
    let first_i = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    assert!(first_i.is_finite());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn export_rejects_bad_lengths_and_tokens() {
    let dir = scratch("export-bad");
    let path = dir.join("capture.iq");
    let out = run_in(
        &dir,
        &[
            "export-iq",
            "--output",
            path.to_str().unwrap(),
            "--subframes",
            "0",
        ],
    );
    assert_eq!(code(&out), 3);
    let out = run_in(
        &dir,
        &[
            "export-iq",
            "--output",
            path.to_str().unwrap(),
            "--strategy",
            "no-such-jammer",
        ],
    );
    assert_eq!(code(&out), 3);
    let _ = fs::remove_dir_all(&dir);
}
