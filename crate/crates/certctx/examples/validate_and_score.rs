//! Load behaviour files, validate them, and score them under both CHSH
//! winning conventions.
//!
//! A behaviour is one outcome table per input pair (x,y). The score of a
//! parity game is the winning probability under uniform inputs, and for
//! CHSH-type games it is tied to the familiar correlator combination I by
//! S = (I+4)/8. The two conventions differ only in which parity wins:
//! `a⊕b = x∨y` is the one the modeled hardware is aligned to, `a⊕b = x·y`
//! is the textbook assignment; each behaviour favors one of them.
//!
//! Run with: cargo run --example validate_and_score

use certctx::games::{chsh_game, chsh_game_or, game_score};
use certctx::scenario::{read_behaviour, validate_behaviour, Behaviour, MeasurementScenario};

use std::path::Path;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

/// Published tables are rounded to 3 decimals, so normalization can be off
/// by a few thousandths.
const TABLE_TOL: f64 = 2e-3;

fn show(name: &str, e: &Behaviour) -> certctx::Result<()> {
    println!("── {name} ──");
    let report = validate_behaviour(e, TABLE_TOL);
    println!("  validation: {report}");

    for (label, game) in [("a⊕b = x∨y", chsh_game_or()), ("a⊕b = x·y", chsh_game())] {
        let s = game_score(e, &game)?;
        let i = s.chsh_value.expect("CHSH games report I");
        println!(
            "  {label}:  S = {:.6}   I = {:+.6}   (I+4)/8 − S = {:+.1e}",
            s.score,
            i,
            (i + 4.0) / 8.0 - s.score
        );
    }
    if let Some(corr) = game_score(e, &chsh_game_or())?.correlators {
        println!(
            "  correlators ⟨A·B⟩ per (x,y): {:+.4} {:+.4} {:+.4} {:+.4}",
            corr[0], corr[1], corr[2], corr[3]
        );
    }
    println!();
    Ok(())
}

fn main() -> certctx::Result<()> {
    let fixtures = Path::new(FIXTURES);

    // ------------------------------------------------------------------
    // Files: the analytic device table, the measured table, and the two
    // polytope landmarks.
    // ------------------------------------------------------------------
    for name in ["device_theory_v093.json", "device_observed.json", "pr_box.json", "uniform.json"] {
        let e = read_behaviour(&fixtures.join(name), TABLE_TOL)?;
        show(name, &e)?;
    }

    // ------------------------------------------------------------------
    // The same scoring applies to programmatic behaviours.
    // ------------------------------------------------------------------
    let uniform = Behaviour::uniform(MeasurementScenario::chsh());
    let s = game_score(&uniform, &chsh_game_or())?;
    println!("uniform behaviour built in memory: S = {} (coin flipping)", s.score);
    Ok(())
}
