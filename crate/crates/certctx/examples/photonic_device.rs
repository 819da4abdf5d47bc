//! The photonic device model: phases to behaviours, resistor voltages to
//! phases, and the slow life of a drifting interferometer.
//!
//! Each input pair (x,y) selects one phase setting (φ^A, φ^B); the two-
//! photon interference pattern at HOM visibility v fixes the outcome table
//! analytically. Because both single-outcome marginals are exactly 1/2 at
//! every phase, the model stays non-signalling no matter how far a common
//! phase drift wanders — drift costs score, never consistency.
//!
//! Run with: cargo run --example photonic_device

use certctx::games::{chsh_game_or, game_score};
use certctx::photonic::{
    behaviour_from_phases, device_behaviour, hom_coincidence_probability, ichsh_from_vhom,
    phases_from_voltages, DeviceConfig, DeviceModel, PhaseMap, CONTEXT_PHASES,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() -> certctx::Result<()> {
    // ------------------------------------------------------------------
    // Phases → outcome tables at the four context settings.
    // ------------------------------------------------------------------
    let v = 0.93;
    println!("outcome tables at v = {v} (cells p(a,b) in order 00 01 10 11):");
    for (c, &(phi_a, phi_b)) in CONTEXT_PHASES.iter().enumerate() {
        let t = behaviour_from_phases(phi_a, phi_b, v)?;
        println!(
            "  (x,y) = ({},{})  φ = ({:+.4}, {:+.4})  →  {:.3} {:.3} {:.3} {:.3}",
            c / 2,
            c % 2,
            phi_a,
            phi_b,
            t[0],
            t[1],
            t[2],
            t[3]
        );
    }

    let device = DeviceModel::new(v)?;
    let e = device_behaviour(&device);
    let s = game_score(&e, &chsh_game_or())?;
    println!(
        "\nscore S = {:.6}, I = {:.4}; analytic law √2(v+1) = {:.4}; HOM dip height (1−v)/2 = {:.4}",
        s.score,
        s.chsh_value.unwrap(),
        ichsh_from_vhom(v)?,
        hom_coincidence_probability(v)?
    );

    // ------------------------------------------------------------------
    // Resistor voltages → phases, with and without thermal crosstalk.
    // ------------------------------------------------------------------
    let map = PhaseMap::calibrated();
    let isolated = PhaseMap::calibrated().without_crosstalk();
    let volts = [1.0, 1.0, 2.0, 2.0];
    let full = phases_from_voltages(&map, volts)?;
    let solo = phases_from_voltages(&isolated, volts)?;
    println!("\nvoltages {volts:?} V:");
    println!(
        "  calibrated map:  φ_Z = ({:+.4}, {:+.4})  φ_Y = ({:+.4}, {:+.4})",
        full.0, full.1, full.2, full.3
    );
    println!(
        "  crosstalk off :  φ_Z = ({:+.4}, {:+.4})  φ_Y = ({:+.4}, {:+.4})",
        solo.0, solo.1, solo.2, solo.3
    );

    // ------------------------------------------------------------------
    // Drift: a slow common ramp with periodic recalibration and jitter.
    // The run advances hour by hour; the score sags quadratically in the
    // accumulated offset and snaps back after each recalibration.
    // ------------------------------------------------------------------
    let config = DeviceConfig {
        v_hom: v,
        drift_mrad_per_hour: 40.0,
        recalibration_hours: 6.0,
        jitter_std_mrad: 0.0,
    };
    let mut model = DeviceModel::from_config(&config)?;
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let mut previous_offset = 0.0;
    println!("\nclock  offset(mrad)   score");
    for _hour in 0..13 {
        let s = game_score(&device_behaviour(&model), &chsh_game_or())?.score;
        let reset = model.drift_offset() < previous_offset;
        previous_offset = model.drift_offset();
        println!(
            "{:>4.0}h  {:>12.2} {:>9.6}{}",
            model.clock(),
            model.drift_offset() * 1e3,
            s,
            if reset { "   ← recalibrated" } else { "" }
        );
        model = model.advance(1.0, &mut rng)?;
    }

    // ------------------------------------------------------------------
    // Split advances land on the identical state: 7h ≡ 3.5h + 2.5h + 1h.
    // ------------------------------------------------------------------
    let base = DeviceModel::new(v)?.with_drift(0.04, 6.0, 0.0)?;
    let one = base.advance(7.0, &mut ChaCha12Rng::seed_from_u64(9))?;
    let mut split_rng = ChaCha12Rng::seed_from_u64(9);
    let split = base
        .advance(3.5, &mut split_rng)?
        .advance(2.5, &mut split_rng)?
        .advance(1.0, &mut split_rng)?;
    println!(
        "\nsplit-advance check: offsets {:.9} vs {:.9} rad, clocks {} vs {} h",
        one.drift_offset(),
        split.drift_offset(),
        one.clock(),
        split.clock()
    );
    Ok(())
}
