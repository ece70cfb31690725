use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ot1d::measure::{DiscreteMeasure, Measure, MeasureSpec};

fn ot1d(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ot1d"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn diracs(dir: &Path) {
    write(dir, "dirac0.json", r#"{"type":"discrete","atoms":[0],"weights":[1]}"#);
    write(dir, "dirac1.json", r#"{"type":"discrete","atoms":[1],"weights":[1]}"#);
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn cost_of_two_diracs() {
    let dir = tempfile::tempdir().unwrap();
    diracs(dir.path());
    let o = ot1d(&["cost", "--cost", "quadratic", "--mu", "dirac0.json", "--nu", "dirac1.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn resolved_config_is_one_json_line_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    diracs(dir.path());
    let o = ot1d(&["cost", "--cost", "power:3", "--mu", "dirac0.json", "--nu", "dirac1.json"], dir.path());
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["seed"], 0);
    assert_eq!(v["command"]["subcommand"], "cost");
    assert_eq!(v["command"]["cost"], "power:3");
}

#[test]
fn barycenter_of_two_diracs() {
    let dir = tempfile::tempdir().unwrap();
    diracs(dir.path());
    let o = ot1d(
        &[
            "barycenter", "--cost", "quadratic", "--weights", "0.5,0.5", "--mu", "dirac0.json", "--mu", "dirac1.json",
            "--emit-quantiles", "q.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let spec = MeasureSpec::from_json(&stdout(&o)).unwrap();
    assert_eq!(spec.resolve().unwrap(), Measure::Discrete(DiscreteMeasure::dirac(0.5).unwrap()));
    assert_eq!(std::fs::read_to_string(dir.path().join("q.csv")).unwrap(), "p,psi(p)\n0.5,0.5\n");
}

#[test]
fn non_convex_cost_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    diracs(dir.path());
    let o = ot1d(&["cost", "--cost", "power:0.5", "--mu", "dirac0.json", "--nu", "dirac1.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cost must be strictly convex: p > 1 required"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    diracs(dir.path());
    write(dir.path(), "two.json", r#"{"type":"discrete","atoms":[0,1],"weights":[0.5,0.5]}"#);
    write(dir.path(), "bad.json", r#"{"type":"discrete","atoms":[0,1],"weights":[0.5,0.6]}"#);

    // Computational: mass at 0 must split.
    let o = ot1d(&["plan", "--mu", "dirac0.json", "--nu", "two.json", "--map"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no Monge map"));

    for args in [
        &["cost", "--cost", "quadratic", "--mu", "missing.json", "--nu", "dirac1.json"][..],
        &["cost", "--cost", "quadratic", "--mu", "bad.json", "--nu", "dirac1.json"],
        &["cost", "--cost", "cubic", "--mu", "dirac0.json", "--nu", "dirac1.json"],
        &["cost", "--mu", "dirac0.json"],
        &["frobnicate"],
        &["barycenter", "--cost", "quadratic", "--weights", "1,2", "--mu", "dirac0.json"],
    ] {
        let o = ot1d(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn plan_csv_and_samples_input() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "xs.csv", "# three samples\n0\n\n2\n1\n");
    write(dir.path(), "y.json", r#"{"type":"discrete","atoms":[1.5],"weights":[1]}"#);
    let o = ot1d(&["plan", "--mu", "y.json", "--nu", "xs.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let got = stdout(&o);
    let rows: Vec<Vec<&str>> = got.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["x", "y", "mass"]);
    assert_eq!(rows.iter().skip(1).map(|r| r[1]).collect::<Vec<_>>(), ["0", "1", "2"]);
    let masses: f64 = rows.iter().skip(1).map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((masses - 1.0).abs() < 1e-15, "{got}");
}

#[test]
fn emitted_measures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", r#"{"type":"discrete","atoms":[0.1,0.7,3],"weights":[0.2,0.3,0.5]}"#);
    write(dir.path(), "b.json", r#"{"type":"gaussian","mean":1,"std":2}"#);
    let o = ot1d(&["barycenter", "--cost", "skewquad:3", "--mu", "a.json", "--mu", "b.json", "--grid", "16"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let first = match MeasureSpec::from_json(&text).unwrap().resolve().unwrap() {
        Measure::Discrete(d) => d,
        Measure::Analytic(_) => panic!("barycenters are discrete"),
    };
    std::fs::write(dir.path().join("c.json"), &text).unwrap();
    // Barycenter of a single measure is the measure itself.
    let o = ot1d(&["barycenter", "--cost", "quadratic", "--mu", "c.json"], dir.path());
    let second = match MeasureSpec::from_json(&stdout(&o)).unwrap().resolve().unwrap() {
        Measure::Discrete(d) => d,
        Measure::Analytic(_) => unreachable!(),
    };
    assert!(first.approx_eq(&second, 1e-12));
    assert_eq!(first.atoms(), second.atoms());
}

#[test]
fn population_barycenter_from_sampler() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s.json",
        r#"{"family":"random_dirac","location":{"family":"uniform","a":0,"b":2}}"#,
    );
    let args = ["barycenter", "--cost", "quadratic", "--sampler", "s.json", "--mc-samples", "400", "--grid", "8",
        "--emit-quantiles", "q.csv", "--seed", "3"];
    let a = ot1d(&args, dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let q = std::fs::read_to_string(dir.path().join("q.csv")).unwrap();
    assert_eq!(q.lines().count(), 8);
    // Every quantile of a random Dirac's barycenter is E X = 1.
    for line in q.lines().skip(1) {
        let psi: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((psi - 1.0).abs() < 0.15, "{line}");
    }
    let b = ot1d(&args, dir.path());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn lln_outputs_match_golden_files() {
    let golden = golden_dir();
    let dir = tempfile::tempdir().unwrap();
    for name in ["scalar", "barycenter", "strongweak"] {
        let config = golden.join(format!("{name}.json"));
        let out = dir.path().join(format!("{name}.csv"));
        for _ in 0..2 {
            let o = ot1d(
                &["lln", name, "--config", config.to_str().unwrap(), "--seed", "0", "--out", out.to_str().unwrap()],
                dir.path(),
            );
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            let expected = std::fs::read_to_string(golden.join(format!("{name}.csv"))).unwrap();
            assert_eq!(std::fs::read_to_string(&out).unwrap(), expected, "{name}");
        }
    }
}

#[test]
fn lln_seed_changes_random_outputs() {
    let config = golden_dir().join("scalar.json");
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| stdout(&ot1d(&["lln", "scalar", "--config", config.to_str().unwrap(), "--seed", seed], dir.path()));
    assert_ne!(run("0"), run("1"));
    assert!(run("1").lines().skip(1).all(|l| l.ends_with(",1,analytic")));
}

#[test]
fn check_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ot1d(&["check", "--trials", "200"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(!text.contains("FAIL"));
}
