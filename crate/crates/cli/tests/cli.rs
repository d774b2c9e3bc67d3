use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dyncover::metrics::read_metrics;
use dyncover::{parse, to_text};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dyncover"))
}

fn call(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let o = call(&full);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    path
}

fn summary_value(text: &str, key: &str) -> String {
    let (_, summary) = read_metrics(text);
    summary.into_iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1
}

#[test]
fn generated_files_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 4] = [
        (
            "sc.txt",
            &["random-sc", "--n", "50", "--m", "20", "--f", "4", "--cost-ratio", "16", "--ops", "300", "--seed", "9"],
        ),
        ("ds.txt", &["random-ds", "--n", "40", "--delta", "5", "--cost-ratio", "16", "--ops", "300", "--seed", "9"]),
        ("lbsc.txt", &["lb-sc", "--q", "5"]),
        ("lbds.txt", &["lb-ds", "--q", "3"]),
    ];
    for (name, args) in cases {
        let path = gen(dir.path(), name, args);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(to_text(&parse(&text).unwrap().workload), text, "{name}");
        // generation is a pure function of its arguments
        let again = gen(dir.path(), &format!("again-{name}"), args);
        assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());
    }
}

#[test]
fn set_cover_construction_reports_level_changes() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(dir.path(), "lb5.txt", &["lb-sc", "--q", "5"]);
    let o = call(&["run", w.to_str().unwrap(), "--no-timing"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(summary_value(&text, "ops"), "32");
    let changes: u64 = summary_value(&text, "level_changes").parse().unwrap();
    assert!(changes >= 16 * 4, "{changes}");
}

#[test]
fn runs_are_deterministic_and_summaries_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(
        dir.path(),
        "ds.txt",
        &["random-ds", "--n", "60", "--delta", "4", "--cost-ratio", "8", "--ops", "800", "--seed", "4"],
    );
    let outs: Vec<PathBuf> = (0..2).map(|k| dir.path().join(format!("m{k}.txt"))).collect();
    for out in &outs {
        let o = call(&["run", w.to_str().unwrap(), "--eps", "0.2", "--no-timing", "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = std::fs::read_to_string(&outs[0]).unwrap();
    assert_eq!(a, std::fs::read_to_string(&outs[1]).unwrap());
    assert!(!a.contains("ns="));

    let (steps, _) = read_metrics(&a);
    assert_eq!(steps.len(), 800);
    for key in ["level_changes", "recourse", "rises", "stale_skips", "pulled"] {
        let sum: u64 = steps.iter().map(|r| r.iter().find(|(k, _)| k == key).unwrap().1.parse::<u64>().unwrap()).sum();
        assert_eq!(sum.to_string(), summary_value(&a, key), "{key}");
    }
}

#[test]
fn timing_fields_present_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(dir.path(), "sc.txt", &["random-sc", "--n", "20", "--m", "10", "--f", "3", "--ops", "50"]);
    let o = call(&["run", w.to_str().unwrap(), "--eps", "0.2"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains(" ns="));
    assert!(text.contains("ns_per_op="));
}

#[test]
fn empty_workload_gives_zero_summary() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("empty.txt");
    std::fs::write(&w, "SC 3 1 1 1 0.2\nS 0 1 0 1 2\n").unwrap();
    let o = call(&["run", w.to_str().unwrap(), "--no-timing"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let (steps, summary) = read_metrics(&text);
    assert!(steps.is_empty());
    for (k, v) in summary {
        assert!(v == "0", "{k}={v}");
    }
}

#[test]
fn parse_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("bad.txt");
    std::fs::write(&w, "SC 3 1 1 1 0.2\nS 0 1 0 1 2\n+ 0\n+ zero\n").unwrap();
    let o = call(&["run", w.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    // a well-formed file whose op sequence is invalid
    std::fs::write(&w, "SC 3 1 1 1 0.2\nS 0 1 0 1 2\n+ 0\n# again\n+ 0\n").unwrap();
    let o = call(&["verify", w.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));

    let o = call(&["run", dir.path().join("missing.txt").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_generator_params_exit_2() {
    let o = call(&["gen", "random-sc", "--n", "40", "--m", "3", "--f", "5", "--ops", "10"]);
    assert_eq!(code(&o), 2);
    let o = call(&["gen", "lb-sc", "--q", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_passes_and_catches_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let w =
        gen(dir.path(), "r.txt", &["random-sc", "--n", "40", "--m", "14", "--f", "3", "--ops", "300", "--seed", "1"]);
    let report = dir.path().join("report.txt");
    let o = call(&["verify", w.to_str().unwrap(), "--eps", "0.2", "-r", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("verdict=PASS checkpoints=300 approx_checks=300"), "{text}");

    // step 32 has a rise and no reset; skipping its cascade leaves a
    // positive-dirty set behind
    let o =
        call(&["verify", w.to_str().unwrap(), "--eps", "0.2", "--inject-fault", "32", "-r", report.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("violation step=32 kind=INV1"), "{text}");
    assert!(text.ends_with("verdict=FAIL first_failing_step=32 checkpoints=32\n"), "{text}");
}

#[test]
fn small_instance_meets_approximation_bound() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(
        dir.path(),
        "r.txt",
        &["random-sc", "--n", "40", "--m", "12", "--f", "4", "--cost-ratio", "8", "--ops", "2000", "--seed", "3"],
    );
    let o = call(&["verify", w.to_str().unwrap(), "--eps", "0.2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("verdict=PASS checkpoints=2000 approx_checks=2000"), "{text}");
}

#[test]
fn large_instance_skips_approximation_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(dir.path(), "r.txt", &["random-sc", "--n", "60", "--m", "30", "--f", "3", "--ops", "100"]);
    let o = call(&["verify", w.to_str().unwrap(), "--eps", "0.2", "--verify-every", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("approximation check disabled"));
    assert!(String::from_utf8(o.stdout).unwrap().contains("approx_checks=0"));
}

#[test]
fn beta_mismatch_warns() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(dir.path(), "lb.txt", &["lb-sc", "--q", "4"]);
    let o = call(&["run", w.to_str().unwrap(), "--eps", "0.2", "--no-timing"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("tuned for beta"));
    let o = call(&["run", w.to_str().unwrap(), "--no-timing"]);
    assert!(!stderr(&o).contains("tuned for beta"));
    let o = call(&["run", w.to_str().unwrap(), "--eps", "0.5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_with_zero_ops_prints_nothing() {
    let o = call(&["bench", "--ops-per-element", "0", "--no-timing"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
}

#[test]
fn bench_reports_rows() {
    let o = call(&["bench", "--min-log", "6", "--max-log", "7", "--compare-exact", "--no-timing"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("n=64 m=32 ops=128 "));
    assert!(text.contains("exact_counter_refreshes="));
}
