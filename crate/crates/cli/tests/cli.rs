use std::path::{Path, PathBuf};
use std::process::Command;

use echo_rmt_cli::output::{read_table, theory_table, write_table, Table, CP_HEADER, FIDELITY_HEADER, PURITY_HEADER};
use echo_rmt_cli::{CliError, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_echo-rmt"));
    cmd.env_remove("ECHO_RMT_WORKERS");
    cmd
}

fn run(args: &[&str]) -> i32 {
    bin().args(args).output().expect("binary runs").status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn header(path: &Path) -> Vec<String> {
    read_table(path).expect("readable csv").0
}

const SMALL_FIDELITY: [&str; 10] = ["--n", "64", "--realizations", "3", "--states", "2", "--seed", "7", "--tmax", "1.5"];

fn fidelity_run(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["fidelity-mc", "--out", path_str(&out)];
    args.extend_from_slice(&SMALL_FIDELITY);
    args.extend_from_slice(extra);
    assert_eq!(run(&args), EXIT_OK);
    out
}

#[test]
fn theory_curve_has_requested_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gue.csv");
    let args = ["fidelity-theory", "--kind", "susy-gue", "--eps2", "1.0", "--tmax", "2", "--points", "200", "--out", path_str(&out)];
    assert_eq!(run(&args), EXIT_OK);
    let (head, rows) = read_table(&out).unwrap();
    assert_eq!(head, ["t", "value"]);
    assert_eq!(rows.len(), 200);
    assert_eq!(rows[0], [0.0, 1.0]);
    assert_eq!(rows[199][0], 2.0);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn fidelity_runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = fidelity_run(dir.path(), "a.csv", &[]);
    let b = fidelity_run(dir.path(), "b.csv", &[]);
    let c = fidelity_run(dir.path(), "c.csv", &["--workers", "3"]);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
    assert_eq!(header(&a), FIDELITY_HEADER);
}

#[test]
fn worker_count_from_environment_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let a = fidelity_run(dir.path(), "a.csv", &[]);
    let out = dir.path().join("env.csv");
    let mut args = vec!["fidelity-mc", "--out", path_str(&out)];
    args.extend_from_slice(&SMALL_FIDELITY);
    let status = bin().args(&args).env("ECHO_RMT_WORKERS", "2").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&out).unwrap());
}

#[test]
fn sidecar_records_seed_and_reruns_the_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let a = fidelity_run(dir.path(), "a.csv", &[]);
    let sidecar = a.with_extension("meta");
    let text = std::fs::read_to_string(&sidecar).unwrap();
    assert!(text.lines().any(|l| l == "seed = 7"));
    assert!(text.contains("# wall_time_s = "));
    assert!(text.contains("# version = "));

    let rerun = dir.path().join("rerun.csv");
    let args = ["fidelity-mc", "--config", path_str(&sidecar), "--out", path_str(&rerun)];
    assert_eq!(run(&args), EXIT_OK);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&rerun).unwrap());
}

#[test]
fn command_line_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nn = 64\nrealizations = 3\nstates = 2\ntmax = 1.5\nseed = 99\n").unwrap();
    let out = dir.path().join("cfg.csv");
    let args = ["fidelity-mc", "--config", path_str(&cfg), "--seed", "7", "--out", path_str(&out)];
    assert_eq!(run(&args), EXIT_OK);
    let reference = fidelity_run(dir.path(), "flags.csv", &[]);
    assert_eq!(std::fs::read(&reference).unwrap(), std::fs::read(&out).unwrap());
}

#[test]
fn bad_input_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = path_str(&out);
    assert_eq!(run(&["fidelity-mc", "--out", out, "--no-such-flag", "1"]), EXIT_CONFIG);
    assert_eq!(run(&["no-such-command"]), EXIT_CONFIG);
    assert_eq!(run(&["fidelity-mc", "--out", out, "--band", "2.0"]), EXIT_CONFIG);
    assert_eq!(run(&["purity-mc", "--out", out, "--theta1", "1.2"]), EXIT_CONFIG);
    assert_eq!(run(&["fidelity-theory", "--out", out, "--points", "1"]), EXIT_CONFIG);
    assert_eq!(run(&["fidelity-theory", "--out", out, "--kind", "bogus"]), EXIT_CONFIG);
    assert!(!Path::new(out).exists());
}

#[test]
fn unwritable_path_exits_with_failure_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    assert_eq!(run(&["fidelity-theory", "--out", path_str(&out)]), EXIT_FAILURE);
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]), EXIT_OK);
    assert_eq!(run(&["purity-mc", "--help"]), EXIT_OK);
}

#[test]
fn written_tables_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let points: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 / 7.0, (i as f64).sqrt().exp() * 1e-7)).collect();
    write_table(&theory_table(&points), &path).unwrap();
    let (_, rows) = read_table(&path).unwrap();
    let back: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(back, points);
}

#[test]
fn empty_series_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let err = write_table(&Table { header: vec!["t", "value"], rows: vec![] }, &path).unwrap_err();
    assert!(matches!(err, CliError::Numerical(_)));
    assert!(!path.exists());
}

#[test]
fn every_subcommand_writes_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let cases: Vec<(Vec<String>, PathBuf, Vec<&str>)> = vec![
        (
            vec!["ensemble-validate", "--n", "64", "--realizations", "5"].into_iter().map(String::from).collect(),
            p("spacing.csv"),
            vec!["s", "density", "reference"],
        ),
        (
            vec!["freeze", "--n", "64", "--realizations", "2", "--states", "2", "--points", "5"].into_iter().map(String::from).collect(),
            p("freeze.csv"),
            FIDELITY_HEADER.to_vec(),
        ),
        (
            vec!["purity-mc", "--ne", "16", "--realizations", "2", "--states", "2", "--delta", "8"].into_iter().map(String::from).collect(),
            p("purity.csv"),
            PURITY_HEADER.to_vec(),
        ),
        (
            vec!["purity-theory", "--kind", "elr", "--delta", "1"].into_iter().map(String::from).collect(),
            p("purity_theory.csv"),
            vec!["t", "value"],
        ),
        (
            vec!["cp-plane", "--ne", "16", "--lambda", "0.14", "--delta", "1", "--realizations", "2", "--states", "2"]
                .into_iter()
                .map(String::from)
                .collect(),
            p("cp.csv"),
            CP_HEADER.to_vec(),
        ),
        (
            vec!["concurrence-decay", "--ne", "16", "--lambda", "0.05", "--realizations", "2", "--states", "2", "--points", "6"]
                .into_iter()
                .map(String::from)
                .collect(),
            p("decay.csv"),
            vec!["t_over_tauh", "C", "stderr_C", "P", "stderr_P", "C_elr"],
        ),
    ];
    for (mut args, out, expected) in cases {
        args.extend(["--out".to_string(), path_str(&out).to_string()]);
        assert_eq!(run(&args.iter().map(String::as_str).collect::<Vec<_>>()), EXIT_OK, "{args:?}");
        assert_eq!(header(&out), expected, "{args:?}");
        assert!(out.with_extension("meta").exists());
    }
    assert_eq!(header(&p("spacing_formfactor.csv")), ["tau", "K2", "stderr_K2"]);
    assert_eq!(header(&p("freeze_theory.csv")), ["t", "value"]);
    let cp_meta = std::fs::read_to_string(p("cp.meta")).unwrap();
    assert!(cp_meta.contains("# p_min = "));
}
