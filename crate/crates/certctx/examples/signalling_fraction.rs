//! The signalling fraction and budget-constrained game scores.
//!
//! SF(e) = 1 − (the largest weight of a non-signalling part inside e): the
//! linear program searches for a subnormalized table dominated by e whose
//! marginals are consistent across contexts. SF = 0 exactly when e itself
//! is non-signalling.
//!
//! The second program asks a sharper question: given a signalling budget σ,
//! how high can a CHSH score go while the distinguished context stays
//! deterministic in the underlying model? The answer is (3+σ)/4 — the
//! quantity the spot-checking protocol's threshold is calibrated against.
//!
//! Run with: cargo run --example signalling_fraction

use certctx::fractions::{
    distinguished_context_score, max_signalling_violation, signalling_fraction,
};
use certctx::games::chsh_game;
use certctx::photonic::{device_behaviour, DeviceModel};
use certctx::scenario::{read_behaviour, Behaviour, MeasurementScenario};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn main() -> certctx::Result<()> {
    // ------------------------------------------------------------------
    // Non-signalling inputs have SF = 0; the measured table carries a
    // small but nonzero marginal mismatch.
    // ------------------------------------------------------------------
    println!("{:<28} {:>12} {:>22}", "behaviour", "SF (LP)", "max marginal mismatch");
    let fixtures = std::path::Path::new(FIXTURES);
    for name in ["uniform.json", "pr_box.json", "device_observed.json"] {
        let e = read_behaviour(fixtures.join(name).as_path(), 2e-3)?;
        let sf = signalling_fraction(&e)?;
        println!(
            "{name:<28} {:>12.6} {:>22.6}",
            sf.value,
            max_signalling_violation(&e)
        );
    }
    let drifted = {
        let m = DeviceModel::new(0.93)?;
        device_behaviour(&m)
    };
    let sf = signalling_fraction(&drifted)?;
    println!(
        "{:<28} {:>12.6} {:>22.6}   (phase drift keeps marginals at 1/2)",
        "device model, any drift",
        sf.value,
        max_signalling_violation(&drifted)
    );

    // ------------------------------------------------------------------
    // A hand-built signalling behaviour: Alice's marginal depends on y.
    // ------------------------------------------------------------------
    let echo = Behaviour::from_tables(
        MeasurementScenario::chsh(),
        (0..4)
            .map(|c| {
                let mut t = vec![0.0; 4];
                // outcome (a,b) = (y, x): each side announces the other's input
                t[((c % 2) << 1) | (c >> 1)] = 1.0;
                t
            })
            .collect(),
    )?;
    let sf = signalling_fraction(&echo)?;
    println!(
        "{:<28} {:>12.6} {:>22.6}   (no NS part fits at all)",
        "input-echo behaviour",
        sf.value,
        max_signalling_violation(&echo)
    );

    // ------------------------------------------------------------------
    // Budget-constrained scores: σ buys score linearly, (3+σ)/4, and the
    // bound is attained for every choice of distinguished context.
    // ------------------------------------------------------------------
    let game = chsh_game();
    println!("\nmax score with the distinguished context deterministic, budget σ:");
    println!("{:>6} {:>12} {:>12} {:>12}", "σ", "context 0", "context 3", "(3+σ)/4");
    for step in 0..=5 {
        let sigma = step as f64 / 5.0;
        let s0 = distinguished_context_score(&game, 0, sigma)?;
        let s3 = distinguished_context_score(&game, 3, sigma)?;
        println!("{sigma:>6.2} {s0:>12.6} {s3:>12.6} {:>12.6}", (3.0 + sigma) / 4.0);
    }
    println!("\nσ = 0 recovers the classical score 3/4; σ = 1 removes the constraint.");
    Ok(())
}
