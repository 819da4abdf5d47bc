//! End-to-end tests of the command-line binary: every subcommand is
//! exercised through a real process, checking stdout contracts, file
//! artifacts, exit codes, and seed handling.

mod common;

use certctx::cli::{AnalysisReport, ExtractReport, ProtocolSummary, EXIT_ABORT, EXIT_ERROR, EXIT_OK};
use certctx::extractor::read_bits;
use certctx::npa::sf_level;
use common::{fixture, load_fixture};
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_certctx");

/// Run the binary with `args`, shielding it from any ambient seed variable.
fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CERTCTX_SEED")
        .output()
        .expect("spawn the binary")
}

fn stdout_json<T: serde::de::DeserializeOwned>(out: &Output) -> T {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is the report JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[test]
fn analyze_scores_the_shipped_fixtures() {
    let theory = fixture("device_theory_v093.json");
    let report: AnalysisReport = stdout_json(&run(&["analyze", theory.to_str().unwrap()]));
    assert_eq!(report.game, "or");
    assert!((report.score - 0.841_179).abs() < 1e-6);
    let i = report.chsh_value.expect("bipartite binary input has a CHSH value");
    assert!((i - 2.729_432).abs() < 5e-7);
    assert!(report.signalling_fraction < 1e-9);
    assert!((report.contextual_fraction - (i - 2.0) / 2.0).abs() < 1e-6);

    let pr = fixture("pr_box.json");
    let report: AnalysisReport = stdout_json(&run(&["analyze", pr.to_str().unwrap()]));
    assert!((report.score - 1.0).abs() < 1e-12);
    assert!((report.contextual_fraction - 1.0).abs() < 1e-6);

    let uniform = fixture("uniform.json");
    let report: AnalysisReport = stdout_json(&run(&["analyze", uniform.to_str().unwrap()]));
    assert!((report.score - 0.5).abs() < 1e-12);
    assert!(report.contextual_fraction < 1e-9);
}

#[test]
fn analyze_level_three_matches_the_library() {
    let observed = fixture("device_observed.json");
    let out = run(&["analyze", observed.to_str().unwrap(), "--level", "3"]);
    let report: AnalysisReport = stdout_json(&out);
    let expected = sf_level(&load_fixture("device_observed.json"), 3).unwrap().value;
    assert!(
        (report.sf_level - expected).abs() < 1e-9,
        "CLI {} vs library {}",
        report.sf_level,
        expected
    );
    assert_eq!(report.level, 3);
}

#[test]
fn analyze_honours_the_game_flag() {
    let theory = fixture("device_theory_v093.json");
    let or_report: AnalysisReport =
        stdout_json(&run(&["analyze", theory.to_str().unwrap(), "--game", "or"]));
    let and_report: AnalysisReport =
        stdout_json(&run(&["analyze", theory.to_str().unwrap(), "--game", "and"]));
    assert_eq!(or_report.game, "or");
    assert_eq!(and_report.game, "and");
    // the device is aligned with the OR convention; under AND it scores 1/2
    assert!((or_report.score - 0.841_179).abs() < 1e-6);
    assert!((and_report.score - 0.5).abs() < 1e-9);
}

#[test]
fn analyze_rejects_missing_and_malformed_input() {
    assert_eq!(code(&run(&["analyze", "/nonexistent/path.json"])), EXIT_ERROR);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, b"{\"not\": \"a behaviour\"}").unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_ERROR);
    assert!(!out.stderr.is_empty());
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// A small, fast run. The threshold is set low enough that every seed used
/// below succeeds: with only ~1000 test rounds the estimated behaviour is
/// noisy, so the signalling allowance subtracted from the statistic is large.
fn simulate_in(dir: &Path, extra: &[&str]) -> Output {
    let transcript = dir.join("transcript.csv");
    let summary = dir.join("summary.json");
    let mut args = vec![
        "simulate".to_string(),
        "--rounds".into(),
        "20000".into(),
        "--q".into(),
        "0.05".into(),
        "--chi".into(),
        "0.76".into(),
        "--transcript-out".into(),
        transcript.to_str().unwrap().into(),
        "--summary-out".into(),
        summary.to_str().unwrap().into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run(&args)
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();
    assert_eq!(code(&simulate_in(d1.path(), &["--seed", "7"])), EXIT_OK);
    assert_eq!(code(&simulate_in(d2.path(), &["--seed", "7"])), EXIT_OK);
    assert_eq!(code(&simulate_in(d3.path(), &["--seed", "8"])), EXIT_OK);
    let t1 = std::fs::read(d1.path().join("transcript.csv")).unwrap();
    let t2 = std::fs::read(d2.path().join("transcript.csv")).unwrap();
    let t3 = std::fs::read(d3.path().join("transcript.csv")).unwrap();
    assert_eq!(t1, t2, "same seed must give byte-identical transcripts");
    assert_ne!(t1, t3, "different seeds must give different transcripts");
}

#[test]
fn simulate_env_seed_matches_the_flag_and_is_overridden_by_it() {
    let by_flag = tempfile::tempdir().unwrap();
    let by_env = tempfile::tempdir().unwrap();
    let flag_wins = tempfile::tempdir().unwrap();
    assert_eq!(code(&simulate_in(by_flag.path(), &["--seed", "9"])), EXIT_OK);

    let transcript = by_env.path().join("transcript.csv");
    let summary = by_env.path().join("summary.json");
    let out = Command::new(BIN)
        .args(["simulate", "--rounds", "20000", "--q", "0.05", "--chi", "0.76"])
        .args(["--transcript-out", transcript.to_str().unwrap()])
        .args(["--summary-out", summary.to_str().unwrap()])
        .env("CERTCTX_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));

    let t_transcript = flag_wins.path().join("transcript.csv");
    let t_summary = flag_wins.path().join("summary.json");
    let out = Command::new(BIN)
        .args(["simulate", "--rounds", "20000", "--q", "0.05", "--chi", "0.76", "--seed", "9"])
        .args(["--transcript-out", t_transcript.to_str().unwrap()])
        .args(["--summary-out", t_summary.to_str().unwrap()])
        .env("CERTCTX_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));

    let reference = std::fs::read(by_flag.path().join("transcript.csv")).unwrap();
    assert_eq!(std::fs::read(&transcript).unwrap(), reference);
    assert_eq!(std::fs::read(&t_transcript).unwrap(), reference);
}

#[test]
fn simulate_aborts_when_the_device_is_too_noisy() {
    // at 40% visibility the device scores ≈ 0.747, below any valid threshold
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_in(dir.path(), &["--vhom", "0.40", "--seed", "1"]);
    assert_eq!(code(&out), EXIT_ABORT);
    let summary: ProtocolSummary =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.decision, "abort");
    assert!(summary.test_statistic < 0.76);
    assert!(summary.entropy.h_min == 0.0);
}

#[test]
fn simulate_with_q_one_makes_every_round_a_test() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("t.csv");
    let summary = dir.path().join("s.json");
    let out = run(&[
        "simulate",
        "--rounds",
        "1000",
        "--q",
        "1",
        "--seed",
        "3",
        "--transcript-out",
        transcript.to_str().unwrap(),
        "--summary-out",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), EXIT_OK);
    let summary: ProtocolSummary =
        serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(summary.n_tests, 1000);
    assert_eq!(summary.n_generation_bits, 0);
}

#[test]
fn analyze_accepts_a_protocol_summary() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&simulate_in(dir.path(), &["--seed", "11"])), EXIT_OK);
    let summary_path = dir.path().join("summary.json");
    let summary: ProtocolSummary =
        serde_json::from_slice(&std::fs::read(&summary_path).unwrap()).unwrap();
    let report: AnalysisReport = stdout_json(&run(&["analyze", summary_path.to_str().unwrap()]));
    assert!((report.score - summary.e_hat_score.unwrap()).abs() < 1e-9);
    assert!((report.sf_level - summary.sf_level.unwrap()).abs() < 1e-9);
}

#[test]
fn simulate_batch_writes_one_artifact_set_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_in(dir.path(), &["--seed", "5", "--batch", "2", "--jobs", "2"]);
    assert_eq!(code(&out), EXIT_OK);
    for seed in [5, 6] {
        assert!(dir.path().join(format!("transcript-{seed}.csv")).exists());
        let summary: ProtocolSummary = serde_json::from_slice(
            &std::fs::read(dir.path().join(format!("summary-{seed}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(summary.seed, seed);
        assert_eq!(summary.decision, "succeed");
    }
}

#[test]
fn simulate_writes_generation_bits_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let bits_path = dir.path().join("raw.bits");
    let out = simulate_in(
        dir.path(),
        &["--seed", "2", "--bits-out", bits_path.to_str().unwrap()],
    );
    assert_eq!(code(&out), EXIT_OK);
    let summary: ProtocolSummary =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let bits = read_bits(&bits_path).unwrap();
    // the file is byte-granular, so up to 7 padding bits may follow
    assert!(bits.len() >= summary.n_generation_bits as usize);
    assert!(bits.len() < summary.n_generation_bits as usize + 8);
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

#[test]
fn bound_reproduces_the_production_scale_number() {
    let out = run(&[
        "bound", "--rounds", "2.4e9", "--q", "1.34e-4", "--chi", "0.8306", "--eps", "6e-5",
    ]);
    let bound: certctx::protocol::EntropyBound = stdout_json(&out);
    assert!(
        bound.h_min > 2.15e6 && bound.h_min < 2.25e6,
        "h_min = {} outside the expected window",
        bound.h_min
    );
    assert_eq!(bound.n_rounds, 2_400_000_000);
}

#[test]
fn bound_requires_a_threshold() {
    let out = run(&["bound", "--rounds", "1e6", "--q", "0.01"]);
    assert_eq!(code(&out), EXIT_ERROR);
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

#[test]
fn extract_pipeline_with_saved_seed_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let bits_path = dir.path().join("raw.bits");
    assert_eq!(
        code(&simulate_in(dir.path(), &["--seed", "6", "--bits-out", bits_path.to_str().unwrap()])),
        EXIT_OK
    );

    let seed_path = dir.path().join("toeplitz.seed");
    let out_path = dir.path().join("hashed.bits");
    let first = run(&[
        "extract",
        "--input",
        bits_path.to_str().unwrap(),
        "--os-entropy",
        "--seed-out",
        seed_path.to_str().unwrap(),
        "--m",
        "256",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let report: ExtractReport = stdout_json(&first);
    assert_eq!(report.output_bits, 256);
    assert!(seed_path.exists());
    let first_bytes = std::fs::read(&out_path).unwrap();
    assert_eq!(first_bytes.len(), 32);

    // replaying with the saved seed reproduces the output exactly
    let again = run(&[
        "extract",
        "--input",
        bits_path.to_str().unwrap(),
        "--seed-file",
        seed_path.to_str().unwrap(),
        "--m",
        "256",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&again), EXIT_OK);
    assert_eq!(std::fs::read(&out_path).unwrap(), first_bytes);
}

#[test]
fn extract_sizes_output_from_the_entropy_bound() {
    let dir = tempfile::tempdir().unwrap();
    let bits_path = dir.path().join("raw.bits");
    assert_eq!(
        code(&simulate_in(dir.path(), &["--seed", "6", "--bits-out", bits_path.to_str().unwrap()])),
        EXIT_OK
    );
    let out = run(&[
        "extract",
        "--input",
        bits_path.to_str().unwrap(),
        "--os-entropy",
        "--seed-out",
        dir.path().join("s.seed").to_str().unwrap(),
        "--h-min",
        "1000",
        "--delta-ext",
        "1e-10",
        "--out",
        dir.path().join("o.bits").to_str().unwrap(),
    ]);
    let report: ExtractReport = stdout_json(&out);
    assert_eq!(report.output_bits, 933, "floor(1000 − 2·log₂(1/1e-10))");
}

#[test]
fn extract_never_self_seeds_silently() {
    let dir = tempfile::tempdir().unwrap();
    let bits_path = dir.path().join("raw.bits");
    std::fs::write(&bits_path, [0xAAu8; 64]).unwrap();
    let out = run(&[
        "extract",
        "--input",
        bits_path.to_str().unwrap(),
        "--m",
        "16",
        "--out",
        dir.path().join("o.bits").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), EXIT_ERROR);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

// ---------------------------------------------------------------------------
// sweep-chsh-hom
// ---------------------------------------------------------------------------

#[test]
fn sweep_emits_the_law_as_csv() {
    let out = run(&["sweep-chsh-hom", "--points", "11"]);
    assert_eq!(code(&out), EXIT_OK);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v_hom,i_chsh"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (v, i) = l.split_once(',').expect("two columns");
            (v.parse().unwrap(), i.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 12, "11 grid points plus the threshold row");
    assert!((rows[0].0 - 0.0).abs() < 1e-12);
    assert!((rows[0].1 - std::f64::consts::SQRT_2).abs() < 1e-8);
    let last = rows.last().unwrap();
    assert!((last.0 - 1.0).abs() < 1e-12);
    assert!((last.1 - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-8);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0), "v column strictly increasing");
    assert!(rows.windows(2).all(|w| w[0].1 < w[1].1), "I column strictly increasing");
    let threshold = std::f64::consts::SQRT_2 - 1.0;
    assert!(
        rows.iter().any(|&(v, i)| (v - threshold).abs() < 1e-8 && (i - 2.0).abs() < 1e-8),
        "the classical threshold row is present"
    );
}

#[test]
fn sweep_writes_the_same_csv_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("law.csv");
    let to_stdout = run(&["sweep-chsh-hom", "--points", "5"]);
    let to_file = run(&["sweep-chsh-hom", "--points", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&to_file), EXIT_OK);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

// ---------------------------------------------------------------------------
// exit codes and argument errors
// ---------------------------------------------------------------------------

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&["no-such-command"])), EXIT_ERROR);
    assert_eq!(code(&run(&["simulate", "--rounds", "not-a-number"])), EXIT_ERROR);
    assert_eq!(code(&run(&["simulate", "--q", "1.5"])), EXIT_ERROR);
    assert_eq!(code(&run(&["extract"])), EXIT_ERROR);
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&run(&["--help"])), EXIT_OK);
    assert_eq!(code(&run(&["--version"])), EXIT_OK);
    assert_eq!(code(&run(&["simulate", "--help"])), EXIT_OK);
}
