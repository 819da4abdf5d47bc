//! Analytic model of a dual-rail photonic chip producing CHSH behaviours.
//!
//! Two photons interfere on-chip; the quality of that interference is
//! summarized by a single Hong–Ou–Mandel visibility v ∈ [0,1]. Each CHSH
//! context (x,y) is realized by a pair of interferometer phases (φ^A, φ^B),
//! and the four outcome probabilities have the closed form implemented in
//! [`behaviour_from_phases`]. On top of the ideal model this module carries
//!
//! * the standard context→phase table and [`device_behaviour`] assembling a
//!   full behaviour from a [`DeviceModel`],
//! * the CHSH facet value as a function of visibility
//!   ([`ichsh_from_vhom`]: I = √2(v+1), crossing the classical bound 2 at
//!   v = √2−1),
//! * calibrated voltage→phase polynomials with thermal crosstalk
//!   ([`PhaseMap`], [`phases_from_voltages`]),
//! * a slow phase-drift process with periodic recalibration
//!   ([`DeviceModel::advance`]).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::{Behaviour, MeasurementScenario};
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2, TAU};

// ---------------------------------------------------------------------------
// Single-context probabilities
// ---------------------------------------------------------------------------

/// Outcome distribution of one context at interferometer phases (φ^A, φ^B)
/// and visibility v, in (a,b)-lexicographic order. The structure is exactly
/// symmetric: p(0,0) = p(1,1) and p(0,1) = p(1,0).
pub fn behaviour_from_phases(phi_a: f64, phi_b: f64, v: f64) -> Result<[f64; 4]> {
    check_visibility(v)?;
    if !phi_a.is_finite() || !phi_b.is_finite() {
        return Err(Error::Domain(format!("non-finite phases ({phi_a}, {phi_b})")));
    }
    // |d| ≤ (1−v)/8 + (v+1)/8 = 1/4, so all four entries are nonnegative
    let d = (v - 1.0) / 8.0 * (phi_a - phi_b).cos() - (v + 1.0) / 8.0 * (phi_a + phi_b).cos();
    let equal = 0.25 + d;
    let unequal = 0.25 - d;
    Ok([equal, unequal, unequal, equal])
}

fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("visibility {v} outside [0,1]")));
    }
    Ok(())
}

/// CHSH facet value reached by the ideal chip at visibility v: √2(v+1).
/// Crosses the classical bound 2 at v = √2−1 ≈ 0.414 and reaches the
/// quantum maximum 2√2 at v = 1.
pub fn ichsh_from_vhom(v: f64) -> Result<f64> {
    check_visibility(v)?;
    Ok(SQRT_2 * (v + 1.0))
}

/// Two-photon coincidence probability at the interference dip: (1−v)/2.
/// This is the arithmetic inverse of defining v = 1 − 2·p_coincidence.
pub fn hom_coincidence_probability(v: f64) -> Result<f64> {
    check_visibility(v)?;
    Ok((1.0 - v) / 2.0)
}

/// Phase pairs (φ^A, φ^B) realizing the four CHSH contexts, indexed by
/// (x,y) in lexicographic order.
pub const CONTEXT_PHASES: [(f64, f64); 4] = [
    (-FRAC_PI_2, -FRAC_PI_4),
    (-FRAC_PI_2, FRAC_PI_4),
    (0.0, -FRAC_PI_4),
    (0.0, FRAC_PI_4),
];

// ---------------------------------------------------------------------------
// Device model with drift
// ---------------------------------------------------------------------------

/// Residual phase error after a recalibration, radians: offsets restart
/// uniformly inside ±1.5 mrad (the stabilization loop confines phases to a
/// 3 mrad interval).
pub const RECALIBRATION_RESIDUAL: f64 = 1.5e-3;

/// A chip at a point in time: visibility, context phases, and a slowly
/// drifting common phase offset that periodic recalibration pulls back.
/// Values are immutable; [`DeviceModel::advance`] returns the later state.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    v_hom: f64,
    context_phases: [(f64, f64); 4],
    /// Extra output phases (ψ^A, ψ^B); the modeled chip operates at (0,0)
    /// and the closed-form probabilities assume it, so these are stored
    /// for completeness but fixed.
    psi: (f64, f64),
    drift_rate: f64,
    recalibration_period: f64,
    jitter_std: f64,
    clock: f64,
    drift_offset: f64,
    next_recalibration: f64,
}

impl DeviceModel {
    /// An undrifting chip at visibility `v_hom` with the standard context
    /// phases.
    pub fn new(v_hom: f64) -> Result<Self> {
        check_visibility(v_hom)?;
        Ok(Self {
            v_hom,
            context_phases: CONTEXT_PHASES,
            psi: (0.0, 0.0),
            drift_rate: 0.0,
            recalibration_period: f64::INFINITY,
            jitter_std: 0.0,
            clock: 0.0,
            drift_offset: 0.0,
            next_recalibration: f64::INFINITY,
        })
    }

    /// Attach a drift process to a freshly built model: a linear ramp of
    /// `drift_rate` radians/hour on both φ^A and φ^B, recalibrated every
    /// `recalibration_period` hours (0 or ∞ disables), plus optional
    /// zero-mean Gaussian jitter applied per [`DeviceModel::advance`] call.
    pub fn with_drift(
        mut self,
        drift_rate: f64,
        recalibration_period: f64,
        jitter_std: f64,
    ) -> Result<Self> {
        if !drift_rate.is_finite() {
            return Err(Error::Domain(format!("drift rate {drift_rate} is not finite")));
        }
        if recalibration_period < 0.0 || recalibration_period.is_nan() {
            return Err(Error::Domain(format!(
                "recalibration period {recalibration_period} must be nonnegative"
            )));
        }
        if !(jitter_std >= 0.0) || jitter_std.is_infinite() {
            return Err(Error::Domain(format!(
                "jitter standard deviation {jitter_std} must be finite and nonnegative"
            )));
        }
        self.drift_rate = drift_rate;
        self.recalibration_period = if recalibration_period == 0.0 {
            f64::INFINITY
        } else {
            recalibration_period
        };
        self.jitter_std = jitter_std;
        self.next_recalibration = self.clock + self.recalibration_period;
        Ok(self)
    }

    pub fn v_hom(&self) -> f64 {
        self.v_hom
    }

    pub fn context_phases(&self) -> &[(f64, f64); 4] {
        &self.context_phases
    }

    /// Elapsed model time, hours.
    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Current common phase offset on φ^A and φ^B, radians.
    pub fn drift_offset(&self) -> f64 {
        self.drift_offset
    }

    /// Step the model forward by `hours`, ramping the drift offset,
    /// recalibrating at every multiple of the recalibration period crossed
    /// (drawing the residual offset from `rng`), and finally adding one
    /// jitter draw when jitter is enabled. Splitting an advance into parts
    /// consumes the same draws and lands in the same state.
    pub fn advance<R: Rng>(&self, hours: f64, rng: &mut R) -> Result<Self> {
        if !(hours >= 0.0) || hours.is_infinite() {
            return Err(Error::Domain(format!("cannot advance by {hours} hours")));
        }
        let mut m = self.clone();
        let mut remaining = hours;
        while remaining > 0.0 {
            // a recalibration instant reached earlier becomes due as soon
            // as time moves again
            if m.clock >= m.next_recalibration - 1e-9 {
                m.drift_offset =
                    rng.gen_range(-RECALIBRATION_RESIDUAL..=RECALIBRATION_RESIDUAL);
                m.next_recalibration += m.recalibration_period;
                continue;
            }
            let step = (m.next_recalibration - m.clock).min(remaining);
            m.drift_offset += m.drift_rate * step;
            m.clock += step;
            remaining -= step;
        }
        if m.jitter_std > 0.0 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            m.drift_offset += m.jitter_std * (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos();
        }
        Ok(m)
    }

    /// Build a model from its serialized configuration.
    pub fn from_config(cfg: &DeviceConfig) -> Result<Self> {
        DeviceModel::new(cfg.v_hom)?.with_drift(
            cfg.drift_mrad_per_hour * 1e-3,
            cfg.recalibration_hours,
            cfg.jitter_std_mrad * 1e-3,
        )
    }

    /// The serializable configuration reproducing this model at time zero.
    pub fn config(&self) -> DeviceConfig {
        DeviceConfig {
            v_hom: self.v_hom,
            drift_mrad_per_hour: self.drift_rate * 1e3,
            recalibration_hours: if self.recalibration_period.is_infinite() {
                0.0
            } else {
                self.recalibration_period
            },
            jitter_std_mrad: self.jitter_std * 1e3,
        }
    }
}

/// The behaviour the chip currently produces: each context evaluated at its
/// phases shifted by the accumulated drift offset. Any common offset leaves
/// the φ^A−φ^B difference intact, so outcome marginals stay exactly 1/2 and
/// the result is non-signalling at every drift.
pub fn device_behaviour(m: &DeviceModel) -> Behaviour {
    let tables = m
        .context_phases
        .iter()
        .map(|&(pa, pb)| {
            behaviour_from_phases(pa + m.drift_offset, pb + m.drift_offset, m.v_hom)
                .expect("visibility and phases validated at construction")
                .to_vec()
        })
        .collect();
    Behaviour::from_tables(MeasurementScenario::chsh(), tables)
        .expect("closed-form cells are nonnegative and sum to 1")
}

/// On-disk device description. Rates are in milliradians to match how
/// drift magnitudes are usually quoted; `recalibration_hours: 0` disables
/// recalibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub v_hom: f64,
    #[serde(default = "default_drift_mrad")]
    pub drift_mrad_per_hour: f64,
    #[serde(default = "default_recalibration_hours")]
    pub recalibration_hours: f64,
    #[serde(default)]
    pub jitter_std_mrad: f64,
}

fn default_drift_mrad() -> f64 {
    0.25
}

fn default_recalibration_hours() -> f64 {
    6.0
}

// ---------------------------------------------------------------------------
// Voltage → phase calibration
// ---------------------------------------------------------------------------

/// Calibrated voltage→phase response of the chip's two phase-shifter
/// columns: φ = const + Q·V² − R·V⁴ per column, with off-diagonal entries
/// capturing thermal crosstalk between neighbouring resistors.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    /// Quadratic coefficients for (V₁,V₂) → (φ_Z^A, φ_Z^B).
    pub z_quad: [[f64; 2]; 2],
    /// Quartic corrections for the Z column (subtracted).
    pub z_quartic: [[f64; 2]; 2],
    /// Constant offsets for (φ_Y^A, φ_Y^B).
    pub y_const: [f64; 2],
    /// Quadratic coefficients for (V₃,V₄) → (φ_Y^A, φ_Y^B).
    pub y_quad: [[f64; 2]; 2],
    /// Quartic corrections for the Y column (subtracted).
    pub y_quartic: [[f64; 2]; 2],
}

impl PhaseMap {
    /// The measured calibration of the modeled chip.
    pub fn calibrated() -> Self {
        Self {
            z_quad: [[1.2890, -0.0785], [0.0988, -1.2777]],
            z_quartic: [[0.0192, -0.0009], [0.0012, -0.0203]],
            y_const: [0.2703, -0.2799],
            y_quad: [[1.4693, -0.1111], [0.1120, -1.4776]],
            y_quartic: [[0.0351, -0.0026], [0.0027, -0.0343]],
        }
    }

    /// The same map with all cross-resistor coefficients zeroed: each phase
    /// then depends on its own voltage alone (single-resistor polynomial).
    pub fn without_crosstalk(mut self) -> Self {
        for m in [&mut self.z_quad, &mut self.z_quartic, &mut self.y_quad, &mut self.y_quartic] {
            m[0][1] = 0.0;
            m[1][0] = 0.0;
        }
        self
    }
}

/// Heater voltages above this are rejected before they would be applied.
pub const MAX_VOLTAGE: f64 = 10.0;

/// Evaluate a [`PhaseMap`] at heater voltages (V₁..V₄), returning
/// (φ_Z^A, φ_Z^B, φ_Y^A, φ_Y^B) in radians.
pub fn phases_from_voltages(map: &PhaseMap, volts: [f64; 4]) -> Result<(f64, f64, f64, f64)> {
    for (i, &v) in volts.iter().enumerate() {
        if !(0.0..=MAX_VOLTAGE).contains(&v) {
            return Err(Error::Domain(format!(
                "voltage V{} = {v} outside [0, {MAX_VOLTAGE}] V",
                i + 1
            )));
        }
    }
    let eval = |quad: &[[f64; 2]; 2], quartic: &[[f64; 2]; 2], c: [f64; 2], v: [f64; 2]| {
        let sq = [v[0] * v[0], v[1] * v[1]];
        let qu = [sq[0] * sq[0], sq[1] * sq[1]];
        [
            c[0] + quad[0][0] * sq[0] + quad[0][1] * sq[1] - quartic[0][0] * qu[0]
                - quartic[0][1] * qu[1],
            c[1] + quad[1][0] * sq[0] + quad[1][1] * sq[1] - quartic[1][0] * qu[0]
                - quartic[1][1] * qu[1],
        ]
    };
    let z = eval(&map.z_quad, &map.z_quartic, [0.0, 0.0], [volts[0], volts[1]]);
    let y = eval(&map.y_quad, &map.y_quartic, map.y_const, [volts[2], volts[3]]);
    Ok((z[0], z[1], y[0], y[1]))
}
