//! The contextual fraction: how much of a behaviour resists a
//! noncontextual explanation.
//!
//! CF(e) = 1 − (the largest weight λ such that e = λ·e_NC + (1−λ)·e' with
//! e_NC a mixture of global deterministic assignments). The linear program
//! optimizes over all 16 deterministic assignments of the CHSH scenario at
//! once; for CHSH behaviours the optimum is also expressible through the
//! eight facet values I_i, giving an independent cross-check
//! CF = max(0, (max_i I_i − 2)/2).
//!
//! Run with: cargo run --example contextual_fraction

use certctx::fractions::{contextual_fraction, FractionCertificate};
use certctx::games::{chsh_game_or, game_score};
use certctx::photonic::{device_behaviour, DeviceModel};
use certctx::scenario::{mix, read_behaviour, Behaviour, MeasurementScenario};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

/// All eight CHSH facets: the four sign patterns with an odd number of
/// minus signs, each in both orientations.
fn facet_oracle(e: &Behaviour) -> certctx::Result<f64> {
    let corr = game_score(e, &chsh_game_or())?.correlators.expect("CHSH correlators");
    let mut best = f64::NEG_INFINITY;
    for signs in 0..16u32 {
        if (signs.count_ones() % 2) == 1 {
            let i: f64 = (0..4)
                .map(|k| if signs >> k & 1 == 1 { -corr[k] } else { corr[k] })
                .sum();
            best = best.max(i);
        }
    }
    Ok(((best - 2.0) / 2.0).max(0.0))
}

fn main() -> certctx::Result<()> {
    // ------------------------------------------------------------------
    // Landmarks: PR box (fully contextual), uniform (not at all),
    // the quantum optimum (√2−1), and the measured device table.
    // ------------------------------------------------------------------
    println!("{:<28} {:>10} {:>12} {:>10}", "behaviour", "CF (LP)", "facet oracle", "LP iters");
    for name in ["pr_box.json", "uniform.json", "device_observed.json"] {
        let e = read_behaviour(std::path::Path::new(FIXTURES).join(name).as_path(), 2e-3)?;
        let r = contextual_fraction(&e)?;
        println!(
            "{name:<28} {:>10.6} {:>12.6} {:>10}",
            r.value,
            facet_oracle(&e)?,
            r.diagnostics.iterations
        );
    }

    let tsirelson = device_behaviour(&DeviceModel::new(1.0)?);
    let r = contextual_fraction(&tsirelson)?;
    println!(
        "{:<28} {:>10.6} {:>12.6} {:>10}   (expect √2−1 = {:.6})",
        "ideal device (v = 1)",
        r.value,
        facet_oracle(&tsirelson)?,
        r.diagnostics.iterations,
        std::f64::consts::SQRT_2 - 1.0
    );

    // ------------------------------------------------------------------
    // The certificate of a noncontextual behaviour is a convex
    // decomposition into deterministic assignments that reconstructs it.
    // ------------------------------------------------------------------
    let noisy = mix(&[
        (0.3, &tsirelson),
        (0.7, &Behaviour::uniform(MeasurementScenario::chsh())),
    ])?;
    let r = contextual_fraction(&noisy)?;
    println!("\n30% quantum + 70% noise: CF = {:.6}, residual = {:.1e}", r.value, r.diagnostics.residual);
    if let FractionCertificate::Noncontextual { weights } = &r.certificate {
        println!("noncontextual part uses {} deterministic assignments:", weights.len());
        for (g, w) in weights.iter().take(5) {
            println!("  weight {:.4} on outcomes {:?}", w, g.outcomes());
        }
        if weights.len() > 5 {
            println!("  … and {} more", weights.len() - 5);
        }
    }

    // ------------------------------------------------------------------
    // CF is convex: mixing can never create contextuality.
    // ------------------------------------------------------------------
    println!("\nλ·PR + (1−λ)·uniform:");
    let pr = read_behaviour(std::path::Path::new(FIXTURES).join("pr_box.json").as_path(), 1e-9)?;
    let uniform = Behaviour::uniform(MeasurementScenario::chsh());
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let e = mix(&[(lambda, &pr), (1.0 - lambda, &uniform)])?;
        let cf = contextual_fraction(&e)?.value;
        println!("  λ = {lambda:.2} → CF = {cf:.6}  (≤ λ·CF(PR) = {lambda:.2})");
    }
    Ok(())
}
