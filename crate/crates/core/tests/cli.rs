//! End-to-end tests of the command-line interface: each test spawns the
//! built binary and checks output text and exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use pseudosym::report::ClassificationReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudosym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_text(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn err_text(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

const FLAT_METRIC: &str = "\
name flat
dimension 4
coordinates t x y z
signature 1 3
components {
  1 1 : -1
  2 2 : 1
  3 3 : 1
  4 4 : 1
}
";

#[test]
fn classify_defaults_to_the_magnetic_cylinder_and_prints_the_headline() {
    let o = run(&["classify"]);
    assert!(o.status.success(), "stderr: {}", err_text(&o));
    let text = out_text(&o);
    for needle in [
        "pseudosymmetric (R.R = L Q(g,R)): holds",
        "weyl pseudosymmetric (C.C = L Q(g,C)): holds",
        "scalar pseudosymmetric type: holds",
        "roter: holds",
        "generalized roter: holds",
        "conformal 2-form recurrency: holds",
        "ein_level: 2",
        "qe_rank: 2",
    ] {
        assert!(text.contains(needle), "missing '{needle}' in:\n{text}");
    }
}

#[test]
fn classify_reads_a_metric_file_and_reports_flat_space_as_vacuous() {
    let path = tmp("flat.metric");
    fs::write(&path, FLAT_METRIC).unwrap();
    let o = run(&["classify", "--metric-file", path.to_str().unwrap()]);
    assert!(o.status.success(), "stderr: {}", err_text(&o));
    let text = out_text(&o);
    for needle in [
        "metric flat",
        "pseudosymmetric (R.R = L Q(g,R)): vacuous",
        "ein_level: 1",
        "qe_rank: 0",
    ] {
        assert!(text.contains(needle), "missing '{needle}' in:\n{text}");
    }
}

#[test]
fn classify_rejects_a_grid_pinned_to_the_exceptional_radius() {
    let o = run(&["classify", "--metric", "melvin", "--param", "B0=1", "--grid", "r=2"]);
    assert_eq!(o.status.code(), Some(5), "stderr: {}", err_text(&o));
    assert!(
        err_text(&o).contains("no sample points survive"),
        "stderr: {}",
        err_text(&o)
    );
}

#[test]
fn machine_output_is_deterministic_and_parses_back() {
    let first = tmp("run1.txt");
    let second = tmp("run2.txt");
    for path in [&first, &second] {
        let o = run(&[
            "classify",
            "--metric",
            "base_3metric(ln(1 + r))",
            "--format",
            "machine",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "stderr: {}", err_text(&o));
    }
    let a = fs::read(&first).unwrap();
    let b = fs::read(&second).unwrap();
    assert_eq!(a, b, "identical invocations must produce identical bytes");
    let text = String::from_utf8(a).unwrap();
    let report = ClassificationReport::parse(&text).expect("machine output parses");
    assert_eq!(report.to_text(), text, "parse followed by print is the identity");
    assert_eq!(report.metric_name, "base_3metric");
}

#[test]
fn components_defaults_to_the_magnetic_cylinder() {
    let o = run(&["components", "--tensor", "R", "--at", "r=1"]);
    assert!(o.status.success(), "stderr: {}", err_text(&o));
    let text = out_text(&o);
    assert!(text.contains("R[1,3,1,3]"), "missing R[1,3,1,3] in:\n{text}");
    assert!(text.contains("0.25"), "missing value 0.25 in:\n{text}");
}

#[test]
fn components_floors_the_vanishing_scalar_curvature() {
    let o = run(&["components", "--tensor", "kappa", "--at", "r=1"]);
    assert!(o.status.success(), "stderr: {}", err_text(&o));
    let text = out_text(&o);
    assert!(text.contains("kappa = 0"), "missing 'kappa = 0' in:\n{text}");
    assert!(text.contains("(reference 0)"), "missing reference column in:\n{text}");
}

#[test]
fn components_says_so_when_everything_is_below_the_floor() {
    let o = run(&[
        "components",
        "--metric",
        "base_3metric(ln(1 + r))",
        "--tensor",
        "C",
        "--at",
        "r=1",
    ]);
    assert!(o.status.success(), "stderr: {}", err_text(&o));
    assert!(
        out_text(&o).contains("(no components above the floor)"),
        "got:\n{}",
        out_text(&o)
    );
}

#[test]
fn components_rejects_an_unknown_tensor_name() {
    let o = run(&["components", "--tensor", "bogus"]);
    assert_eq!(o.status.code(), Some(2), "stderr: {}", err_text(&o));
}

#[test]
fn verify_flags_exactly_the_documented_failure() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(1), "stderr: {}", err_text(&o));
    let text = out_text(&o);
    let fails: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "expected one failing claim, got:\n{text}");
    assert!(
        fails[0].contains("base.ricci_one_form_recurrency"),
        "unexpected failing claim: {}",
        fails[0]
    );
    assert!(
        text.contains("34 claims: 26 pass, 7 disputed, 1 fail"),
        "unexpected summary in:\n{text}"
    );
}

#[test]
fn loosening_the_tolerance_creates_no_new_failures() {
    let o = run(&["verify", "--tol", "1e-2"]);
    assert_eq!(o.status.code(), Some(1), "stderr: {}", err_text(&o));
    let text = out_text(&o);
    let fails: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "expected one failing claim, got:\n{text}");
    assert!(fails[0].contains("base.ricci_one_form_recurrency"));
}
