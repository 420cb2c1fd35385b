use std::fs;
use std::path::Path;
use std::process::Command as Process;

use superfocus_cli::output::sha256_file;
use superfocus_cli::{execute, Command, RunConfig};
use tempfile::TempDir;

const SMALL: &str = r#"
[potential]
interpolation_nodes = 16

[beam]
n_protons = 10

[propagation]
step_nm = 0.2
"#;

fn config(extra: &str, out: &Path) -> RunConfig {
    let mut c = RunConfig::from_toml(&format!("{SMALL}\n{extra}")).unwrap();
    c.output.directory = out.to_path_buf();
    c
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_superfocus"))
}

fn write_config(dir: &TempDir, text: &str) -> std::path::PathBuf {
    let p = dir.path().join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_simulation_writes_records_and_manifest() {
    let dir = TempDir::new().unwrap();
    let report = execute(Command::Simulate, &config("", dir.path()), Some(1)).unwrap();
    let text = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with("index,x_nm,y_nm,theta_x_mrad,theta_y_mrad,e_exit_eV,flag"));
    assert_eq!(report.protons, 10);
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn manifest_lists_every_artifact_with_its_hash() {
    let dir = TempDir::new().unwrap();
    let report = execute(Command::Simulate, &config("", dir.path()), None).unwrap();
    let manifest: toml::Table = fs::read_to_string(dir.path().join("manifest.toml")).unwrap().parse().unwrap();
    let listed = manifest["artifacts"].as_array().unwrap();
    let on_disk: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.toml")
        .collect();
    assert_eq!(listed.len(), on_disk.len());
    assert_eq!(listed.len(), report.artifacts.len());
    for entry in listed {
        let path = entry["path"].as_str().unwrap();
        let hash = entry["sha256"].as_str().unwrap();
        assert_eq!(sha256_file(&dir.path().join(path)).unwrap(), hash, "{path}");
    }
}

#[test]
fn rerunning_the_manifest_config_reproduces_hashes() {
    let first = TempDir::new().unwrap();
    let report = execute(Command::Simulate, &config("", first.path()), Some(2)).unwrap();
    let echoed = fs::read_to_string(first.path().join("config.toml")).unwrap();
    let second = TempDir::new().unwrap();
    let mut again = RunConfig::from_toml(&echoed).unwrap();
    again.output.directory = second.path().to_path_buf();
    let rerun = execute(Command::Simulate, &again, Some(3)).unwrap();
    for (a, b) in report.artifacts.iter().zip(&rerun.artifacts) {
        if a.path == "config.toml" {
            continue;
        }
        assert_eq!(a, b);
    }
}

#[test]
fn record_dumps_do_not_depend_on_thread_count() {
    let mut hashes = Vec::new();
    for threads in [1, 4, 16] {
        let dir = TempDir::new().unwrap();
        let mut c = config("", dir.path());
        c.beam.n_protons = 64;
        execute(Command::Simulate, &c, Some(threads)).unwrap();
        hashes.push(sha256_file(&dir.path().join("records.csv")).unwrap());
    }
    assert!(hashes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn single_tilt_scan_has_one_summary_row() {
    let dir = TempDir::new().unwrap();
    execute(Command::ScanTilt, &config("[scan]\ntilts = [0.0]", dir.path()), None).unwrap();
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(dir.path().join("tilt_0.000/records.csv").exists());
}

#[test]
fn single_thickness_scan_has_one_summary_row() {
    let dir = TempDir::new().unwrap();
    execute(Command::ScanThickness, &config("[scan]\nreduced_thickness = [0.25]", dir.path()), None).unwrap();
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0.25");
    assert_eq!(row.last(), Some(&"ok"));
}

#[test]
fn analyze_reproduces_simulation_analysis() {
    let dir = TempDir::new().unwrap();
    execute(Command::Simulate, &config("", dir.path()), None).unwrap();
    let again = TempDir::new().unwrap();
    let mut c = config("", again.path());
    c.analysis.input = Some(dir.path().join("records.csv"));
    execute(Command::Analyze, &c, None).unwrap();
    for name in ["analysis.csv", "configuration_density.csv", "angular_density.csv", "sigma.csv"] {
        assert_eq!(
            sha256_file(&dir.path().join(name)).unwrap(),
            sha256_file(&again.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn spin_sweep_writes_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let mut c = RunConfig::from_toml("[spin]\nsweep = \"exchange\"\nsweep_from = 0.5\nsweep_to = 2.0\nsweep_points = 4").unwrap();
    c.output.directory = dir.path().to_path_buf();
    execute(Command::Spin, &c, None).unwrap();
    let text = fs::read_to_string(dir.path().join("levels.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("exchange,e0,e1,e2,e3,j"));
}

#[test]
fn zero_area_angular_window_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, &format!("{SMALL}\n[analysis]\nangular_window = [1.0, 1.0, -2.0, 2.0]\n"));
    let out = binary().arg("simulate").arg(&path).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("analysis.angular_window"), "{err}");
    assert!(!dir.path().join("o/records.csv").exists());
}

#[test]
fn every_violation_is_reported() {
    let dir = TempDir::new().unwrap();
    let mut c = config("", dir.path());
    c.beam.tilt = 0.7;
    c.beam.energy_mev = -1.0;
    c.analysis.bins = [1, 128];
    match execute(Command::Simulate, &c, None) {
        Err(e @ superfocus_cli::CliError::Config(_)) => {
            let msg = e.to_string();
            for key in ["beam.tilt", "beam.energy_mev", "analysis.bins"] {
                assert!(msg.contains(key), "{key} missing from {msg}");
            }
            assert_eq!(e.exit_code(), 2);
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn unknown_keys_and_missing_files_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "[beam]\nprotons = 3\n");
    let out = binary().arg("simulate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = binary().arg("simulate").arg(dir.path().join("absent.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scans_require_their_lists() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, SMALL);
    for sub in ["scan-tilt", "scan-thickness", "analyze"] {
        let out = binary().arg(sub).arg(&path).arg("--out").arg(dir.path().join("o")).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{sub}");
    }
}

#[test]
fn unreadable_record_dump_is_a_runtime_failure() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "not,a,record,dump\n").unwrap();
    let path = write_config(&dir, SMALL);
    let out = binary()
        .args(["analyze"])
        .arg(&path)
        .arg("--input")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn seed_flag_changes_records() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, SMALL);
    let run = |seed: &str, out: &str| {
        let s = binary()
            .arg("simulate")
            .arg(&path)
            .args(["--seed", seed, "--threads", "2", "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(s.success());
        sha256_file(&dir.path().join(out).join("records.csv")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "c"), run("6", "d"));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (file, command) in [
        ("simulate.toml", Command::Simulate),
        ("scan_tilt.toml", Command::ScanTilt),
        ("scan_thickness.toml", Command::ScanThickness),
        ("spin.toml", Command::Spin),
    ] {
        let c = RunConfig::load(&dir.join(file)).unwrap();
        assert_eq!(c.violations(command), Vec::<String>::new(), "{file}");
    }
}
