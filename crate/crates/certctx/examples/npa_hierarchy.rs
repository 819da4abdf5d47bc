//! The moment-matrix hierarchy: outer approximations of the quantum set
//! and the signalling fractions they certify.
//!
//! Level ℓ indexes the operator words entering the moment matrix: products
//! of Alice/Bob measurement projectors up to length ℓ, deduplicated by
//! projector algebra. SF_ℓ(e) = 1 − (the largest mass of a level-ℓ member
//! dominated by e) tightens as ℓ grows, and each level is a semidefinite
//! program solved here by alternating projections. The same machinery
//! maximizes a game score over the level-ℓ set, recovering the quantum
//! CHSH optimum cos²(π/8) already at ℓ = 1.
//!
//! Run with: cargo run --example npa_hierarchy

use certctx::games::{chsh_game, chsh_game_or};
use certctx::npa::{build_monomials, npa_max_score, sf_level, sf_level_bisection, MomentMatrix};
use certctx::photonic::{device_behaviour, DeviceModel};
use certctx::scenario::{read_behaviour, MeasurementScenario};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn main() -> certctx::Result<()> {
    let scenario = MeasurementScenario::chsh();

    // ------------------------------------------------------------------
    // The basis grows with the level; the matrix entries collapse into
    // far fewer distinct moments.
    // ------------------------------------------------------------------
    println!("{:>5} {:>8} {:>12} {:>15}", "level", "words", "matrix", "moment classes");
    for level in 1..=3 {
        let basis = build_monomials(&scenario, level)?;
        let mm = MomentMatrix::new(basis);
        println!(
            "{level:>5} {:>8} {:>12} {:>15}",
            mm.dim(),
            format!("{0}×{0}", mm.dim()),
            mm.n_classes()
        );
    }
    let basis = build_monomials(&scenario, 2)?;
    print!("level-2 words: ");
    for i in 0..basis.len() {
        print!("{}{}", if i == 0 { "" } else { ", " }, basis.word(i));
    }
    println!("\n");

    // ------------------------------------------------------------------
    // Relaxed game maxima: the level-1 value is already the quantum bound.
    // ------------------------------------------------------------------
    let quantum = (std::f64::consts::PI / 8.0).cos().powi(2);
    for (name, game) in [("a⊕b = x∨y", chsh_game_or()), ("a⊕b = x·y", chsh_game())] {
        let s1 = npa_max_score(&game, 1)?;
        println!("max score over level 1, {name}: {s1:.6}   (cos²(π/8) = {quantum:.6})");
    }
    println!();

    // ------------------------------------------------------------------
    // Signalling fractions down the hierarchy. The ideal device table is
    // quantum, so every level accepts it; the measured table keeps a small
    // residue at every level.
    // ------------------------------------------------------------------
    let ideal = device_behaviour(&DeviceModel::new(1.0)?);
    let observed = read_behaviour(std::path::Path::new(FIXTURES).join("device_observed.json").as_path(), 2e-3)?;
    println!("{:>5} {:>16} {:>16}", "level", "SF_ℓ (ideal v=1)", "SF_ℓ (measured)");
    for level in 1..=3 {
        let a = sf_level(&ideal, level)?;
        let b = sf_level(&observed, level)?;
        println!("{level:>5} {:>16.3e} {:>16.6}", a.value, b.value);
    }

    // ------------------------------------------------------------------
    // An independent feasibility bisection lands on the same fractions.
    // ------------------------------------------------------------------
    let direct = sf_level(&observed, 1)?.value;
    let bisected = sf_level_bisection(&observed, 1, 1e-4)?;
    println!("\nmeasured table, level 1: direct {direct:.6} vs bisection {bisected:.6}");
    Ok(())
}
