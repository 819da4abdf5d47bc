//! One seeded protocol run, start to finish: rounds, counters, the
//! empirical behaviour, the abort decision, and the transcript file.
//!
//! Every round flips a q-biased coin. Test rounds draw a uniform context
//! and are scored under a⊕b = x∨y; generation rounds play the
//! distinguished context and contribute two raw output bits. The run is a
//! pure function of (seed, config, device): identical inputs give a
//! byte-identical transcript, and the geometric-skip formulation of the
//! sampling loop reproduces it draw for draw.
//!
//! Run with: cargo run --example protocol_simulation

use certctx::cli::summarize_run;
use certctx::npa::sf_level;
use certctx::protocol::{
    decide, max_admissible_chi, read_transcript_csv, run_protocol, run_protocol_geometric,
    test_statistic, write_transcript_csv, ProtocolConfig,
};
use certctx::photonic::DeviceModel;

fn main() -> certctx::Result<()> {
    let device = DeviceModel::new(0.93)?;
    let mut cfg = ProtocolConfig::chsh(100_000, 0.01, 0.80, 42);
    cfg.level = 1;

    // ------------------------------------------------------------------
    // Run and inspect the first few rounds.
    // ------------------------------------------------------------------
    let t = run_protocol(&device, &cfg)?;
    println!("round  kind        (x,y)  (a,b)");
    for r in t.records().iter().take(8) {
        println!(
            "{:>5}  {:<10}  ({},{})  ({},{})",
            r.round,
            if r.is_test { "test" } else { "generation" },
            r.x,
            r.y,
            r.a,
            r.b
        );
    }
    println!("  …");
    println!(
        "\n{} rounds: {} tests, {} wins, {} generation bits",
        t.n_rounds(),
        t.n_tests(),
        t.c(),
        t.generation_bits().len()
    );
    println!(
        "per-test score c/T = {:.6}; thresholded statistic c/(qN) = {:.6}",
        t.empirical_test_score().unwrap(),
        test_statistic(&t, &cfg)
    );

    // ------------------------------------------------------------------
    // The empirical behaviour feeds the abort rule via its hierarchy
    // signalling fraction.
    // ------------------------------------------------------------------
    let e_hat = t.e_hat()?;
    let sfl = sf_level(&e_hat, cfg.level)?.value;
    let decision = decide(&t, &cfg, sfl)?;
    println!(
        "\nSF_{}(ê) = {:.3e};  c/(qN) − SF·(2ⁿ−k)/2ⁿ = {:.6}  vs  χ = {}  →  {}",
        cfg.level,
        sfl,
        max_admissible_chi(&t, &cfg, sfl),
        cfg.threshold,
        decision
    );

    // ------------------------------------------------------------------
    // Determinism, three ways: same seed, same transcript; the geometric
    // loop, same transcript; the CSV file, same transcript.
    // ------------------------------------------------------------------
    let again = run_protocol(&device, &cfg)?;
    let geometric = run_protocol_geometric(&device, &cfg)?;
    println!(
        "\nsame-seed rerun identical: {};  geometric loop identical: {}",
        t == again,
        t == geometric
    );

    let dir = tempfile::tempdir().map_err(certctx::Error::Io)?;
    let path = dir.path().join("transcript.csv");
    write_transcript_csv(&t, &path)?;
    let back = read_transcript_csv(&path)?;
    println!(
        "transcript.csv: {} bytes, round-trips identically: {}",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        back == t
    );

    // ------------------------------------------------------------------
    // The summary JSON carries every decision input.
    // ------------------------------------------------------------------
    let summary = summarize_run(&t, &cfg, device.v_hom())?;
    println!("\nsummary (abridged):");
    println!("  decision            = {}", summary.decision);
    println!("  e_hat_score         = {:.6}", summary.e_hat_score.unwrap());
    println!("  sf_level            = {:.3e}", summary.sf_level.unwrap());
    println!("  max_admissible_chi  = {:.6}", summary.max_admissible_chi.unwrap());
    println!("  h_min               = {:.3e}", summary.entropy.h_min);
    Ok(())
}
