//! Contextual games and score computations.
//!
//! A game fixes an input distribution p(C) over contexts and a Boolean
//! scoring rule V(C, s) on joint outcomes; a behaviour e earns the expected
//! score S(e) = Σ_C Σ_s p(C) V(C,s) e_C(s). Two CHSH conventions ship:
//!
//! * [`chsh_game`] — win iff a ⊕ b = x·y. Diagonal outcomes win three of the
//!   four contexts; this is the textbook labelling.
//! * [`chsh_game_or`] — win iff a ⊕ b = x∨y. This is the same game under the
//!   local relabelling a ↦ a⊕x, b ↦ b⊕y, and it is the convention the
//!   interferometric model of [`crate::photonic`] is calibrated in: its
//!   tables win on the diagonal only at context (0,0).
//!
//! Every quantity that matters here (score bounds, consistency number,
//! contextual/signalling fractions) is invariant under such relabellings, so
//! the two games bound each other's behaviours interchangeably once tables
//! are labelled consistently.

use crate::scenario::{Behaviour, GlobalAssignment, MeasurementScenario};
use crate::{Error, Result};

/// Input distribution plus Boolean scoring rule over one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualGame {
    scenario: MeasurementScenario,
    input_dist: Vec<f64>,
    /// `scoring[c][idx]` is V(C, s) for the dense outcome index `idx`.
    scoring: Vec<Vec<bool>>,
}

impl ContextualGame {
    /// Build a game, checking that the input distribution is a distribution
    /// and the scoring table matches the scenario's table shapes.
    pub fn new(
        scenario: MeasurementScenario,
        input_dist: Vec<f64>,
        scoring: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if input_dist.len() != scenario.n_contexts() || scoring.len() != scenario.n_contexts() {
            return Err(Error::Schema(format!(
                "game over {} contexts got {} input weights and {} scoring rows",
                scenario.n_contexts(),
                input_dist.len(),
                scoring.len()
            )));
        }
        let total: f64 = input_dist.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("input distribution sums to {total}")));
        }
        if input_dist.iter().any(|&p| p < 0.0) {
            return Err(Error::Domain("negative input probability".into()));
        }
        for (c, row) in scoring.iter().enumerate() {
            if row.len() != scenario.table_len(c) {
                return Err(Error::Schema(format!(
                    "scoring row {c} has {} entries, expected {}",
                    row.len(),
                    scenario.table_len(c)
                )));
            }
        }
        Ok(Self { scenario, input_dist, scoring })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn input_dist(&self) -> &[f64] {
        &self.input_dist
    }

    /// Whether the outcome at dense index `idx` wins context `c`.
    pub fn wins(&self, c: usize, idx: usize) -> bool {
        self.scoring[c][idx]
    }

    /// True when every context is equally likely (within 1e-12).
    pub fn uniform_inputs(&self) -> bool {
        let u = 1.0 / self.input_dist.len() as f64;
        self.input_dist.iter().all(|&p| (p - u).abs() <= 1e-12)
    }
}

/// Score of a behaviour under a game, with CHSH-specific extras where they
/// are defined.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    /// Expected winning probability S(e).
    pub score: f64,
    /// ⟨A_x B_y⟩ per context, present for 2-party scenarios with binary
    /// outcomes and two inputs per party, in context order
    /// (0,0), (0,1), (1,0), (1,1).
    pub correlators: Option<[f64; 4]>,
    /// The CHSH combination I with signs matching the game's winning
    /// parities, present when the game is a uniform-input parity game on the
    /// 2×2 binary scenario. Satisfies S = (I+4)/8.
    pub chsh_value: Option<f64>,
}

impl std::fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S = {:.6}", self.score)?;
        if let Some(i) = self.chsh_value {
            write!(f, ", I = {i:.6}")?;
        }
        if let Some(c) = self.correlators {
            write!(
                f,
                ", ⟨AB⟩ = [{:+.4}, {:+.4}, {:+.4}, {:+.4}]",
                c[0], c[1], c[2], c[3]
            )?;
        }
        Ok(())
    }
}

/// Expected score S(e) = Σ p(C) V(C,s) e_C(s), with correlators and the
/// CHSH value filled in when the scenario/game supports them.
pub fn game_score(e: &Behaviour, g: &ContextualGame) -> Result<ScoreReport> {
    if e.scenario() != g.scenario() {
        return Err(Error::Domain("behaviour and game use different scenarios".into()));
    }
    let mut score = 0.0;
    for c in 0..g.scenario.n_contexts() {
        let mut won = 0.0;
        for idx in 0..g.scenario.table_len(c) {
            if g.scoring[c][idx] {
                won += e.prob(c, idx);
            }
        }
        score += g.input_dist[c] * won;
    }

    let correlators = chsh_correlators(e);
    let chsh_value = match (correlators, parity_signs(g)) {
        (Some(corr), Some(signs)) if g.uniform_inputs() => {
            Some(corr.iter().zip(signs).map(|(c, s)| c * s).sum())
        }
        _ => None,
    };
    Ok(ScoreReport { score, correlators, chsh_value })
}

/// ⟨A_x B_y⟩ = p(a⊕b=0|xy) − p(a⊕b=1|xy) per context, for the 2×2 binary
/// scenario.
fn chsh_correlators(e: &Behaviour) -> Option<[f64; 4]> {
    let s = e.scenario();
    if !s.is_bipartite_binary() || s.n_contexts() != 4 {
        return None;
    }
    let mut corr = [0.0; 4];
    for c in 0..4 {
        // dense order (a,b) = 00, 01, 10, 11
        let t = &e.tables()[c];
        corr[c] = t[0] - t[1] - t[2] + t[3];
    }
    Some(corr)
}

/// For a parity game on the 2×2 binary scenario, the per-context sign:
/// +1 when the context is won on a⊕b = 0, −1 when on a⊕b = 1.
fn parity_signs(g: &ContextualGame) -> Option<[f64; 4]> {
    let s = &g.scenario;
    if !s.is_bipartite_binary() || s.n_contexts() != 4 {
        return None;
    }
    let mut signs = [0.0; 4];
    for c in 0..4 {
        let row = &g.scoring[c];
        if row == &[true, false, false, true] {
            signs[c] = 1.0;
        } else if row == &[false, true, true, false] {
            signs[c] = -1.0;
        } else {
            return None;
        }
    }
    Some(signs)
}

fn chsh_parity_game(target: impl Fn(usize, usize) -> usize) -> ContextualGame {
    let scenario = MeasurementScenario::chsh();
    let mut scoring = Vec::with_capacity(4);
    for c in 0..4 {
        let (x, y) = (c >> 1, c & 1);
        let row = (0..4).map(|idx| ((idx >> 1) ^ (idx & 1)) == target(x, y)).collect();
        scoring.push(row);
    }
    ContextualGame::new(scenario, vec![0.25; 4], scoring).expect("CHSH game is valid")
}

/// The CHSH game: uniform inputs, win iff a ⊕ b = x·y.
pub fn chsh_game() -> ContextualGame {
    chsh_parity_game(|x, y| x & y)
}

/// The CHSH game in the OR convention: uniform inputs, win iff a ⊕ b = x∨y.
/// Equivalent to [`chsh_game`] under the relabelling a ↦ a⊕x, b ↦ b⊕y.
pub fn chsh_game_or() -> ContextualGame {
    chsh_parity_game(|x, y| x | y)
}

/// The largest number of contexts any single global assignment can win,
/// found by exhaustive enumeration (guarded at 2²⁴ assignments). The
/// classical score of the game is k/|M| for uniform inputs.
pub fn k_consistency(g: &ContextualGame) -> Result<usize> {
    let scenario = &g.scenario;
    let mut best = 0;
    for assignment in GlobalAssignment::enumerate(scenario)? {
        let wins = (0..scenario.n_contexts())
            .filter(|&c| g.scoring[c][scenario.restrict(&assignment, c)])
            .count();
        best = best.max(wins);
    }
    Ok(best)
}

/// Closed-form score cap for hidden-variable models allowed a signalling
/// budget ξ: (k + ξ(|M| − k)) / |M|, where k is the game's consistency
/// number. Only valid for uniform inputs; for anything else use the linear
/// program in [`crate::fractions::distinguished_context_score`].
pub fn relaxed_classical_bound(g: &ContextualGame, xi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Domain(format!("budget ξ = {xi} outside [0,1]")));
    }
    if !g.uniform_inputs() {
        return Err(Error::Unsupported(
            "the closed-form bound assumes uniform inputs; use \
             fractions::distinguished_context_score for general input distributions"
                .into(),
        ));
    }
    let m = g.scenario.n_contexts() as f64;
    let k = k_consistency(g)? as f64;
    Ok((k + xi * (m - k)) / m)
}

/// Upper bound on the per-round communication σ compatible with an observed
/// contextual fraction: (2ⁿ·cf − k)/(2ⁿ − k) for n parties and consistency
/// number k. A negative value means no signalling budget can be certified.
pub fn signalling_budget(cf: f64, n: u32, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&cf) {
        return Err(Error::Domain(format!("contextual fraction {cf} outside [0,1]")));
    }
    if n == 0 || n > 62 {
        return Err(Error::Domain(format!("party count {n} out of range")));
    }
    let contexts = (1u64 << n) as f64;
    if f64::from(k) >= contexts {
        return Err(Error::Domain(format!(
            "consistency number {k} must be below the context count {contexts}"
        )));
    }
    Ok((contexts * cf - f64::from(k)) / (contexts - f64::from(k)))
}
