//! Black-box tests of the installed binary: exit codes, diagnostics,
//! config precedence, and the CSV contracts of each subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_idseries"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary should run")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const TWO_ATOM_MODEL: &str = "atom = -1,0.5\natom = 0.5,2\n";
const IDENTITY_SERIES: &str = "1\n2\n1 0\n0 1\n";

#[test]
fn help_and_version_exit_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("curves") && text.contains("qopt"), "help text:\n{text}");

    let out = bin().arg("--version").output().unwrap();
    assert!(out.status.success());
}

#[test]
fn unknown_flag_is_a_usage_error_naming_the_flag() {
    let out = bin().args(["bounds", "--foo", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("ERROR:cli:usage"), "stderr:\n{err}");
    assert!(err.contains("--foo"), "stderr:\n{err}");
}

#[test]
fn missing_model_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["bounds"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("ERROR:cli:missing_input"), "stderr:\n{}", stderr_of(&out));

    let out = run_in(dir.path(), &["bounds", "--model", "no_such_file", "--series", "also_missing"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("ERROR:cli:missing_input"), "stderr:\n{}", stderr_of(&out));
}

#[test]
fn malformed_model_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "model.txt", "atom = x\n");
    write(dir.path(), "series.txt", IDENTITY_SERIES);
    let out = run_in(dir.path(), &["bounds", "--model", "model.txt", "--series", "series.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("ERROR:cli:parse"), "stderr:\n{}", stderr_of(&out));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "t_min = 2\nt_max = 4\nt_steps = 3\noutput_path = from_file.csv\n");
    let out = run_in(dir.path(), &["curves", "--config", "run.cfg", "--t-steps", "4"]);
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("from_file.csv")).unwrap();
    // four grid rows from the flag override, no crossing row since 0.883
    // sits outside [2, 4]
    assert_eq!(text.lines().count(), 5, "csv:\n{text}");
    assert!(text.starts_with("s,Q,B,T,H\n"));
}

#[test]
fn unknown_config_key_is_named_with_location() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "# comment\ntrails = 10\n");
    let out = run_in(dir.path(), &["curves", "--config", "run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("ERROR:cli:parse"), "stderr:\n{err}");
    assert!(err.contains("trails") && err.contains("run.cfg:2"), "stderr:\n{err}");
}

#[test]
fn curves_with_large_c_contains_the_crossing_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["curves", "--c", "1000", "--t-min", "0.5", "--t-max", "1.5", "--t-steps", "5"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    assert!(out.stdout.is_empty(), "stdout should be silent on success");
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let crossing: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .filter(|row: &Vec<f64>| (row[0] - 0.8830491743431347).abs() < 1e-5)
        .collect();
    assert_eq!(crossing.len(), 1, "csv:\n{text}");
    let row = &crossing[0];
    assert!((row[2] - row[4]).abs() < 1e-6, "B and H should meet at the crossing: {row:?}");
    assert!((row[4] - 0.3012230115937177).abs() < 1e-6, "crossing height: {row:?}");
}

#[test]
fn simulate_on_the_gaussian_reference_instance_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "model.txt", "sigma2 = 1\n");
    write(dir.path(), "series.txt", IDENTITY_SERIES);
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--model", "model.txt", "--series", "series.txt", "--trials", "2000",
            "--t-min", "0.5", "--t-max", "4", "--t-steps", "5",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "t,p_hat,ci_low,ci_high,exact,bennett,bernstein_smooth,bernstein_piecewise,hc,beta0"
    );
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(cells[2] <= cells[1] && cells[1] <= cells[3], "interval ordering in {line}");
        for b in &cells[4..] {
            assert!(*b >= cells[2], "bound {b} below ci_low {} in {line}", cells[2]);
        }
    }
}

#[test]
fn out_of_domain_grid_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "model.txt", "atom = 4,0.25\n");
    write(dir.path(), "series.txt", "1\n1\n1\n");
    let out = run_in(
        dir.path(),
        &["bounds", "--model", "model.txt", "--series", "series.txt", "--t-max", "40"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("ERROR:tail_bounds:domain"), "stderr:\n{}", stderr_of(&out));
}

#[test]
fn expectation_report_lists_the_four_quantities() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "model.txt", TWO_ATOM_MODEL);
    write(dir.path(), "series.txt", IDENTITY_SERIES);
    let out = run_in(
        dir.path(),
        &["expectation", "--model", "model.txt", "--series", "series.txt", "--trials", "2000"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "quantity,value");
    let quantities: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        quantities,
        ["expectation_statement", "expectation_proof", "empirical_mean", "empirical_std_err"]
    );
}

#[test]
fn nemirovski_chance_and_qopt_emit_single_reports() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "model.txt", TWO_ATOM_MODEL);
    write(dir.path(), "rect_series.txt", "2\n2 2\n1 0\n0 0\n2 2\n0 0\n0 1\n");
    let out = run_in(
        dir.path(),
        &["nemirovski", "--model", "model.txt", "--series", "rect_series.txt", "--output", "nem.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("nem.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "c_alpha,tau_alpha,t_star,condition_ok,model_scale");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains("true") || lines[1].contains("false"));

    write(
        dir.path(),
        "chance.txt",
        "base\n2\n2 0\n0 2\nterm\n2\n1 0\n0 -1\nterm\n2\n0 1\n1 0\n",
    );
    let out = run_in(
        dir.path(),
        &["chance", "--model", "model.txt", "--problem", "chance.txt", "--c", "3", "--output", "ch.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("ch.csv")).unwrap();
    assert!(text.starts_with("gamma2,tau_c,rho2,precondition_ok,model_scale\n"), "csv:\n{text}");

    write(
        dir.path(),
        "quad.txt",
        "dims = 1,1\nobjective\n1\n-1\nB\n1\n1\n",
    );
    let out = run_in(
        dir.path(),
        &["qopt", "--model", "model.txt", "--problem", "quad.txt", "--output", "q.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("q.csv")).unwrap();
    assert!(text.starts_with("quantity,value\n"), "csv:\n{text}");
    // the scalar problem saturates the cap at Y = [1], theta = -1
    let theta: f64 = text
        .lines()
        .find(|l| l.starts_with("theta_hat,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((theta + 1.0).abs() <= 1e-4, "theta_hat = {theta}");
}
