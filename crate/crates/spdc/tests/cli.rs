//! End-to-end tests of the `spdc` binary: exit codes, file outputs,
//! metadata headers and determinism.

use std::process::{Command, Output};

use spdc::report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn tdc_prints_expected_temperature() {
    let out = run(&["tdc"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("composite-406nm,98.98"), "{stdout}");
}

#[test]
fn tdc_all_sets_lists_every_registered_set() {
    let out = run(&["tdc", "--all-sets"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for set in ["composite-406nm", "kato-takaoka-2002", "konig-fradkin-emanueli"] {
        assert!(stdout.contains(set), "missing {set} in {stdout}");
    }
}

#[test]
fn unknown_set_exits_2_and_lists_alternatives() {
    let out = run(&["--set", "bogus", "tdc"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bogus") && stderr.contains("composite-406nm"), "{stderr}");
}

#[test]
fn impossible_phase_match_exits_3() {
    // A 3 um poling period has no collinear degenerate solution.
    let out = run(&["--period", "3.0", "tdc"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[pump]\nlambda_nm = 405.0\n").unwrap();
    let with_file = run(&["--config", cfg.to_str().unwrap(), "tdc"]);
    assert!(with_file.status.success());
    let stdout = String::from_utf8(with_file.stdout).unwrap();
    assert!(stdout.contains("pump 405 nm"), "{stdout}");
    let with_flag = run(&["--config", cfg.to_str().unwrap(), "--lambda-p", "406.2", "tdc"]);
    let stdout = String::from_utf8(with_flag.stdout).unwrap();
    assert!(stdout.contains("pump 406.2 nm"), "{stdout}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[pump]\nnot_a_field = 1\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "tdc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_tuning_writes_csv_with_recoverable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "sweep",
        "tuning",
        "--t-min",
        "70",
        "--t-max",
        "120",
        "--t-step",
        "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("tuning.csv")).unwrap();
    assert!(text.contains("# columns: T,lambda_H,lambda_V"), "{text}");
    let config = report::config_from_header(&text).unwrap();
    assert_eq!(config.pump.lambda_nm, 406.2);
    assert_eq!(config.output.dir, dir.path());
    // data rows parse as numbers
    let data_rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data_rows.len() >= 5);
    for row in data_rows {
        for cell in row.split(',') {
            cell.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn sweep_ring_emits_both_polarizations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "sweep",
        "ring",
        "--t",
        "68.6",
    ]);
    assert!(out.status.success());
    assert!(dir.path().join("ring_h.csv").exists());
    assert!(dir.path().join("ring_v.csv").exists());
}

#[test]
fn tomo_simulation_round_trips_density_matrix_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "3",
        "tomo",
        "--simulate",
        "bell",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("tomography.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rho: report::DensityMatrixJson =
        serde_json::from_value(value["density_matrix"].clone()).unwrap();
    let matrix = rho.to_matrix();
    assert!((matrix.trace().re - 1.0).abs() < 1e-9);
    let conc = value["metrics"]["concurrence"].as_f64().unwrap();
    assert!(conc > 0.999, "concurrence {conc}");
    // the counts file round-trips through the parser
    let counts = std::fs::read_to_string(dir.path().join("tomography_counts.csv")).unwrap();
    spdc::tomography::TomographyRecord::from_csv_str(&counts).unwrap();
}

#[test]
fn tomo_without_input_or_simulate_exits_2() {
    let out = run(&["tomo"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tomo_malformed_counts_file_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.csv");
    std::fs::write(&path, "HH,100\nHV,oops\n").unwrap();
    let out = run(&["tomo", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn tomo_reads_back_its_own_counts_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "9",
        "tomo",
        "--simulate",
        "werner",
        "--p",
        "0.8",
        "--noise",
        "poisson",
    ]);
    assert!(out.status.success());
    let counts = dir.path().join("tomography_counts.csv");
    let dir2 = tempfile::tempdir().unwrap();
    let again = run(&[
        "--out",
        dir2.path().to_str().unwrap(),
        "tomo",
        "--input",
        counts.to_str().unwrap(),
    ]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
}

#[test]
fn identical_config_and_seed_give_byte_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for _ in 0..2 {
        let out = run(&[
            "--out",
            dir.path().to_str().unwrap(),
            "--seed",
            "21",
            "tomo",
            "--simulate",
            "werner",
            "--p",
            "0.95",
            "--noise",
            "poisson",
        ]);
        assert!(out.status.success());
        files.push(std::fs::read(dir.path().join("tomography.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn hom_sweep_reports_unit_visibility() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--out",
        dir.path().to_str().unwrap(),
        "sweep",
        "hom",
        "--tau-max",
        "2000",
        "--tau-step",
        "25",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("visibility = 1.0000"), "{stdout}");
}

#[test]
fn stability_sweep_matches_reference_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--out", dir.path().to_str().unwrap(), "sweep", "stability"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("0.0169 x 2pi"), "{stdout}");
}
