use std::process::{Command, Output};

use vfold_core::cli::parse_json;

fn vfold(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vfold"));
    cmd.args(args).env_remove("VFOLD_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

#[test]
fn run_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = vfold(
        &["run", "--scenario", "S1", "--selectors", "mal,2fcv", "--N", "4", "--seed", "3", "--output", path.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("scenario,"));
    assert!(lines[1].starts_with("S1,mal,"));
    assert!(lines[2].starts_with("S1,2fcv,"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let out = vfold(&["run", "--scenario", "BOGUS", "--N", "2"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("BOGUS"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flag_values_are_config_errors() {
    for extra in [&["--N", "1"][..], &["--threads", "0"], &["--format", "xml"], &["--selectors", "7fcx"], &["--seed", "-1"]] {
        let mut args = vec!["run", "--scenario", "S1"];
        args.extend(extra);
        assert_eq!(vfold(&args, &[]).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(vfold(&["run", "--N", "2"], &[]).status.code(), Some(2));
    let out = vfold(&["run", "--scenario", "S1", "--N", "2"], &[("VFOLD_THREADS", "many")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("VFOLD_THREADS"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# smoke\nscenario = S1\nselectors = mal, loo\nN = 3\nseed = 9\nformat = csv\n").unwrap();
    let out = vfold(&["run", "--config", conf.to_str().unwrap(), "--N", "5", "--format", "json"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tables = parse_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(tables.len(), 1);
    assert_eq!((tables[0].n_reps, tables[0].seed), (5, 9));
    let labels: Vec<_> = tables[0].rows.iter().map(|r| r.selector.as_str()).collect();
    assert_eq!(labels, ["mal", "loo"]);

    std::fs::write(&conf, "scenario = S1\nwidth = 3\n").unwrap();
    let out = vfold(&["run", "--config", conf.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["run", "--scenario", "S1", "--selectors", "mal+,5fcv,pen2f", "--N", "6", "--seed", "2", "--format", "csv"];
    let one = vfold(&args, &[("VFOLD_THREADS", "1")]);
    let three = vfold(&args, &[("VFOLD_THREADS", "3")]);
    let mut flagged = args.to_vec();
    flagged.extend(["--threads", "2"]);
    let two = vfold(&flagged, &[("VFOLD_THREADS", "many")]);
    assert!(one.status.success() && three.status.success() && two.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn markdown_output_and_listing() {
    let out = vfold(&["run", "--scenario", "S1", "--selectors", "mal,penloo+", "--N", "3", "--format", "markdown"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mal") && text.contains("penloo+"));
    assert!(text.lines().any(|l| l.starts_with('|')));

    let out = vfold(&["list"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in vfold_core::experiments::PRESET_NAMES {
        assert!(text.contains(name), "{name}");
    }
}
