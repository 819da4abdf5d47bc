//! Measurement scenarios, behaviours, and their algebra.
//!
//! A scenario fixes *what can be measured together*: a set of measurements,
//! a list of contexts (jointly measurable subsets), and an outcome alphabet
//! per measurement. A behaviour attaches to every context a probability
//! table over joint outcomes. Nothing here assumes the tables are
//! non-signalling — quantifying signalling is the job of [`crate::fractions`]
//! and [`crate::npa`].
//!
//! Tables are dense `f64` arrays ordered lexicographically by the context's
//! measurement order (first measurement most significant), which makes
//! lookups O(1) and serialization trivial. Party-structured scenarios (one
//! measurement chosen per party, as in CHSH) carry their party layout so
//! that games and the NPA machinery can recover inputs and parties.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default tolerance on per-context normalization.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Tolerance on mixture weights summing to one.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Guard on exhaustive global-assignment enumeration.
const ASSIGNMENT_BUDGET: u128 = 1 << 24;

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

/// Party layout of a scenario built with [`MeasurementScenario::party_scenario`]:
/// measurement j of party p is one of `inputs_per_party[p]` input choices and
/// has `outputs_per_party[p]` outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyStructure {
    pub inputs_per_party: Vec<usize>,
    pub outputs_per_party: Vec<usize>,
}

impl PartyStructure {
    pub fn n_parties(&self) -> usize {
        self.inputs_per_party.len()
    }
}

/// A measurement scenario: measurements, contexts, and outcome alphabets.
///
/// Invariants (enforced on construction): every context is a nonempty,
/// strictly increasing list of measurement indices; every measurement occurs
/// in at least one context; every measurement has at least one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementScenario {
    labels: Vec<String>,
    outcomes: Vec<usize>,
    contexts: Vec<Vec<usize>>,
    parties: Option<PartyStructure>,
}

impl MeasurementScenario {
    /// Build a general scenario from labels, per-measurement outcome counts,
    /// and contexts given as lists of measurement indices.
    pub fn new(labels: Vec<String>, outcomes: Vec<usize>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        if labels.len() != outcomes.len() {
            return Err(Error::Schema(format!(
                "{} labels but {} outcome counts",
                labels.len(),
                outcomes.len()
            )));
        }
        if let Some(k) = outcomes.iter().position(|&o| o == 0) {
            return Err(Error::Schema(format!("measurement {k} has an empty outcome alphabet")));
        }
        if contexts.is_empty() {
            return Err(Error::Schema("a scenario needs at least one context".into()));
        }
        let mut seen = vec![false; labels.len()];
        for (ci, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(Error::Schema(format!("context {ci} is empty")));
            }
            for w in ctx.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Schema(format!(
                        "context {ci} is not strictly increasing: {ctx:?}"
                    )));
                }
            }
            for &m in ctx {
                if m >= labels.len() {
                    return Err(Error::Schema(format!(
                        "context {ci} references measurement {m}, but only {} exist",
                        labels.len()
                    )));
                }
                seen[m] = true;
            }
        }
        if let Some(m) = seen.iter().position(|&s| !s) {
            return Err(Error::Schema(format!(
                "measurement {m} ({}) appears in no context",
                labels[m]
            )));
        }
        Ok(Self { labels, outcomes, contexts, parties: None })
    }

    /// Build the n-party scenario where each party p picks one of
    /// `inputs[p]` measurements with `outputs[p]` outcomes, and the contexts
    /// are all input combinations in lexicographic order.
    ///
    /// Measurements are laid out party-major and labelled `A0, A1, …, B0, …`.
    pub fn party_scenario(inputs: &[usize], outputs: &[usize]) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(Error::Schema(format!(
                "party scenario needs matching nonempty input/output lists, got {} and {}",
                inputs.len(),
                outputs.len()
            )));
        }
        if inputs.iter().any(|&i| i == 0) || outputs.iter().any(|&o| o == 0) {
            return Err(Error::Schema("every party needs ≥1 input and ≥1 outcome".into()));
        }
        let n_ctx: usize = inputs.iter().product();
        if n_ctx > 1 << 20 {
            return Err(Error::Resource(format!("{n_ctx} contexts exceeds the scenario guard")));
        }
        let mut labels = Vec::new();
        let mut outcomes = Vec::new();
        let mut offsets = Vec::with_capacity(inputs.len());
        for (p, (&ni, &no)) in inputs.iter().zip(outputs).enumerate() {
            offsets.push(labels.len());
            let letter = party_letter(p);
            for i in 0..ni {
                labels.push(format!("{letter}{i}"));
                outcomes.push(no);
            }
        }
        // All input tuples, lexicographic, first party most significant.
        let mut contexts = Vec::with_capacity(n_ctx);
        let mut tuple = vec![0usize; inputs.len()];
        loop {
            contexts.push(
                tuple
                    .iter()
                    .enumerate()
                    .map(|(p, &i)| offsets[p] + i)
                    .collect::<Vec<_>>(),
            );
            // increment
            let mut p = inputs.len();
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                tuple[p] += 1;
                if tuple[p] < inputs[p] {
                    break;
                }
                tuple[p] = 0;
                if p == 0 {
                    p = usize::MAX;
                    break;
                }
            }
            if p == usize::MAX {
                break;
            }
        }
        Ok(Self {
            labels,
            outcomes,
            contexts,
            parties: Some(PartyStructure {
                inputs_per_party: inputs.to_vec(),
                outputs_per_party: outputs.to_vec(),
            }),
        })
    }

    /// The 2-party, 2-input, 2-outcome scenario of the CHSH game.
    pub fn chsh() -> Self {
        Self::party_scenario(&[2, 2], &[2, 2]).expect("CHSH scenario is valid")
    }

    pub fn n_measurements(&self) -> usize {
        self.labels.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn label(&self, m: usize) -> &str {
        &self.labels[m]
    }

    /// Outcome count of measurement `m`.
    pub fn outcomes(&self, m: usize) -> usize {
        self.outcomes[m]
    }

    pub fn context(&self, c: usize) -> &[usize] {
        &self.contexts[c]
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn parties(&self) -> Option<&PartyStructure> {
        self.parties.as_ref()
    }

    /// Number of joint outcomes of context `c` (= dense table length).
    pub fn table_len(&self, c: usize) -> usize {
        self.contexts[c].iter().map(|&m| self.outcomes[m]).product()
    }

    /// Dense index of an outcome tuple within context `c` (lexicographic,
    /// first measurement of the context most significant).
    pub fn tuple_to_index(&self, c: usize, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.contexts[c].len());
        let mut idx = 0;
        for (&m, &o) in self.contexts[c].iter().zip(tuple) {
            debug_assert!(o < self.outcomes[m]);
            idx = idx * self.outcomes[m] + o;
        }
        idx
    }

    /// Outcome tuple of context `c` at dense index `idx`.
    pub fn index_to_tuple(&self, c: usize, idx: usize) -> Vec<usize> {
        let ctx = &self.contexts[c];
        let mut tuple = vec![0; ctx.len()];
        let mut rem = idx;
        for pos in (0..ctx.len()).rev() {
            let o = self.outcomes[ctx[pos]];
            tuple[pos] = rem % o;
            rem /= o;
        }
        debug_assert_eq!(rem, 0);
        tuple
    }

    /// Dense index of a global assignment restricted to context `c`.
    pub fn restrict(&self, g: &GlobalAssignment, c: usize) -> usize {
        let mut idx = 0;
        for &m in &self.contexts[c] {
            idx = idx * self.outcomes[m] + g.outcome(m);
        }
        idx
    }

    /// For a party scenario: the measurement index of party `p`, input `i`.
    pub fn party_measurement(&self, p: usize, i: usize) -> Option<usize> {
        let parties = self.parties.as_ref()?;
        if p >= parties.n_parties() || i >= parties.inputs_per_party[p] {
            return None;
        }
        let offset: usize = parties.inputs_per_party[..p].iter().sum();
        Some(offset + i)
    }

    /// For a party scenario: context index of an input tuple.
    pub fn context_of_inputs(&self, inputs: &[usize]) -> Option<usize> {
        let parties = self.parties.as_ref()?;
        if inputs.len() != parties.n_parties() {
            return None;
        }
        let mut idx = 0;
        for (p, &i) in inputs.iter().enumerate() {
            if i >= parties.inputs_per_party[p] {
                return None;
            }
            idx = idx * parties.inputs_per_party[p] + i;
        }
        Some(idx)
    }

    /// For a party scenario: the input tuple of context `c`.
    pub fn inputs_of_context(&self, c: usize) -> Option<Vec<usize>> {
        let parties = self.parties.as_ref()?;
        let mut inputs = Vec::with_capacity(parties.n_parties());
        let mut offset = 0;
        for (p, &m) in self.contexts[c].iter().enumerate() {
            inputs.push(m - offset);
            offset += parties.inputs_per_party[p];
        }
        Some(inputs)
    }

    /// True for two parties with binary outcomes everywhere (the family for
    /// which CHSH correlators are defined).
    pub fn is_bipartite_binary(&self) -> bool {
        match &self.parties {
            Some(p) => p.n_parties() == 2 && p.outputs_per_party.iter().all(|&o| o == 2),
            None => false,
        }
    }
}

fn party_letter(p: usize) -> String {
    let letters = [
        'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M',
    ];
    match letters.get(p) {
        Some(&c) => c.to_string(),
        None => format!("P{p}_"),
    }
}

// ---------------------------------------------------------------------------
// Global assignments
// ---------------------------------------------------------------------------

/// A total map from measurements to outcomes — one deterministic "answer
/// sheet" for the whole scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalAssignment {
    outcomes: Vec<usize>,
}

impl GlobalAssignment {
    /// Build an assignment, checking totality and outcome ranges.
    pub fn new(scenario: &MeasurementScenario, outcomes: Vec<usize>) -> Result<Self> {
        if outcomes.len() != scenario.n_measurements() {
            return Err(Error::Schema(format!(
                "assignment covers {} measurements, scenario has {}",
                outcomes.len(),
                scenario.n_measurements()
            )));
        }
        for (m, &o) in outcomes.iter().enumerate() {
            if o >= scenario.outcomes(m) {
                return Err(Error::Domain(format!(
                    "outcome {o} out of range for measurement {m} ({} outcomes)",
                    scenario.outcomes(m)
                )));
            }
        }
        Ok(Self { outcomes })
    }

    pub fn outcome(&self, m: usize) -> usize {
        self.outcomes[m]
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    /// Enumerate every global assignment of `scenario` in lexicographic
    /// order (measurement 0 most significant). Errors if the count exceeds
    /// the 2²⁴ enumeration budget.
    pub fn enumerate(scenario: &MeasurementScenario) -> Result<Vec<GlobalAssignment>> {
        let mut total: u128 = 1;
        for m in 0..scenario.n_measurements() {
            total = total.saturating_mul(scenario.outcomes(m) as u128);
            if total > ASSIGNMENT_BUDGET {
                return Err(Error::Resource(format!(
                    "global-assignment enumeration exceeds the budget of {ASSIGNMENT_BUDGET}"
                )));
            }
        }
        let n = scenario.n_measurements();
        let mut all = Vec::with_capacity(total as usize);
        let mut current = vec![0usize; n];
        loop {
            all.push(GlobalAssignment { outcomes: current.clone() });
            let mut m = n;
            loop {
                if m == 0 {
                    return Ok(all);
                }
                m -= 1;
                current[m] += 1;
                if current[m] < scenario.outcomes(m) {
                    break;
                }
                current[m] = 0;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Behaviours
// ---------------------------------------------------------------------------

/// A behaviour: one probability table per context. May be signalling.
#[derive(Debug, Clone, PartialEq)]
pub struct Behaviour {
    scenario: MeasurementScenario,
    tables: Vec<Vec<f64>>,
}

impl Behaviour {
    /// Wrap dense tables, checking only structure (one table per context,
    /// correct lengths). Use [`validate_behaviour`] for the numeric checks.
    pub fn from_tables(scenario: MeasurementScenario, tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.len() != scenario.n_contexts() {
            return Err(Error::Schema(format!(
                "{} tables for {} contexts",
                tables.len(),
                scenario.n_contexts()
            )));
        }
        for (c, t) in tables.iter().enumerate() {
            if t.len() != scenario.table_len(c) {
                return Err(Error::Schema(format!(
                    "context {c} table has {} entries, expected {}",
                    t.len(),
                    scenario.table_len(c)
                )));
            }
        }
        Ok(Self { scenario, tables })
    }

    /// The maximally mixed behaviour: every context uniform.
    pub fn uniform(scenario: MeasurementScenario) -> Self {
        let tables = (0..scenario.n_contexts())
            .map(|c| {
                let len = scenario.table_len(c);
                vec![1.0 / len as f64; len]
            })
            .collect();
        Self { scenario, tables }
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    /// Probability of the outcome tuple at dense index `idx` in context `c`.
    pub fn prob(&self, c: usize, idx: usize) -> f64 {
        self.tables[c][idx]
    }

    /// Sum of the table of context `c`.
    pub fn context_mass(&self, c: usize) -> f64 {
        self.tables[c].iter().sum()
    }
}

/// Same shape as [`Behaviour`] but each context carries the same mass
/// λ ∈ [0,1] instead of 1. Produced by the fraction solvers as the scaled
/// non-signalling (or NPA-member) part of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnormalizedBehaviour {
    scenario: MeasurementScenario,
    tables: Vec<Vec<f64>>,
    mass: f64,
}

impl SubnormalizedBehaviour {
    /// Wrap tables, checking nonnegativity (within `tol`) and that every
    /// context carries the same mass (within `tol`). Entries in [−tol, 0)
    /// are clamped to zero.
    pub fn from_tables(
        scenario: MeasurementScenario,
        mut tables: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self> {
        if tables.len() != scenario.n_contexts() {
            return Err(Error::Schema(format!(
                "{} tables for {} contexts",
                tables.len(),
                scenario.n_contexts()
            )));
        }
        let mut mass = None;
        for (c, t) in tables.iter_mut().enumerate() {
            if t.len() != scenario.table_len(c) {
                return Err(Error::Schema(format!(
                    "context {c} table has {} entries, expected {}",
                    t.len(),
                    scenario.table_len(c)
                )));
            }
            for v in t.iter_mut() {
                if *v < -tol {
                    return Err(Error::Domain(format!(
                        "negative entry {v} in context {c} of a subnormalized behaviour"
                    )));
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let sum: f64 = t.iter().sum();
            match mass {
                None => mass = Some(sum),
                Some(m) if (sum - m).abs() > tol => {
                    return Err(Error::Domain(format!(
                        "context {c} has mass {sum}, others have {m} (tol {tol})"
                    )));
                }
                _ => {}
            }
        }
        Ok(Self { scenario, tables, mass: mass.unwrap_or(0.0) })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    /// The common per-context mass λ.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Rescale to a normalized behaviour; errors when the mass is (near)
    /// zero.
    pub fn normalized(&self, tol: f64) -> Result<Behaviour> {
        if self.mass <= tol {
            return Err(Error::Domain(format!(
                "cannot normalize a part with mass {}",
                self.mass
            )));
        }
        let tables = self
            .tables
            .iter()
            .map(|t| t.iter().map(|v| v / self.mass).collect())
            .collect();
        Behaviour::from_tables(self.scenario.clone(), tables)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Outcome of [`validate_behaviour`]: per-context mass deviations and any
/// negative entries found.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// |sum − 1| per context.
    pub sum_deviations: Vec<f64>,
    /// (context, dense index, value) of entries below zero.
    pub negative_entries: Vec<(usize, usize, f64)>,
    /// Tolerance the report was evaluated against.
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.negative_entries.is_empty()
            && self.sum_deviations.iter().all(|&d| d <= self.tolerance)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passes() {
            let worst = self.sum_deviations.iter().cloned().fold(0.0, f64::max);
            return write!(f, "valid (worst normalization deviation {worst:.2e})");
        }
        writeln!(f, "invalid (tolerance {:.1e}):", self.tolerance)?;
        for (c, d) in self.sum_deviations.iter().enumerate() {
            if *d > self.tolerance {
                writeln!(f, "  context {c}: mass off by {d:.3e}")?;
            }
        }
        for (c, i, v) in &self.negative_entries {
            writeln!(f, "  context {c}, entry {i}: negative value {v:.3e}")?;
        }
        Ok(())
    }
}

/// Check normalization and positivity of every context table against `tol`.
pub fn validate_behaviour(e: &Behaviour, tol: f64) -> ValidationReport {
    let mut sum_deviations = Vec::with_capacity(e.scenario.n_contexts());
    let mut negative_entries = Vec::new();
    for (c, t) in e.tables.iter().enumerate() {
        let sum: f64 = t.iter().sum();
        sum_deviations.push((sum - 1.0).abs());
        for (i, &v) in t.iter().enumerate() {
            if v < 0.0 {
                negative_entries.push((c, i, v));
            }
        }
    }
    ValidationReport { sum_deviations, negative_entries, tolerance: tol }
}

/// Marginal of context `c` onto the measurements `subset` (given as
/// measurement indices, in the order they appear in the context). Sums the
/// table over the discarded measurements; the result sums to the context
/// mass.
pub fn marginalize(e: &Behaviour, c: usize, subset: &[usize]) -> Result<Vec<f64>> {
    let scenario = &e.scenario;
    if c >= scenario.n_contexts() {
        return Err(Error::Domain(format!("context {c} out of range")));
    }
    let ctx = scenario.context(c);
    if subset.is_empty() {
        return Err(Error::Domain("marginal onto an empty subset".into()));
    }
    // positions of the kept measurements within the context
    let mut positions = Vec::with_capacity(subset.len());
    for &m in subset {
        match ctx.iter().position(|&cm| cm == m) {
            Some(p) => positions.push(p),
            None => {
                return Err(Error::Domain(format!(
                    "measurement {m} is not part of context {c} ({ctx:?})"
                )))
            }
        }
    }
    let out_len: usize = subset.iter().map(|&m| scenario.outcomes(m)).product();
    let mut marginal = vec![0.0; out_len];
    for idx in 0..scenario.table_len(c) {
        let tuple = scenario.index_to_tuple(c, idx);
        let mut midx = 0;
        for (&pos, &m) in positions.iter().zip(subset) {
            midx = midx * scenario.outcomes(m) + tuple[pos];
        }
        marginal[midx] += e.tables[c][idx];
    }
    Ok(marginal)
}

/// The deterministic behaviour of a global assignment: every context table
/// is a point mass at the assignment's restriction. Non-signalling by
/// construction.
pub fn deterministic_behaviour(g: &GlobalAssignment, s: &MeasurementScenario) -> Result<Behaviour> {
    if g.outcomes().len() != s.n_measurements() {
        return Err(Error::Schema(format!(
            "assignment covers {} measurements, scenario has {}",
            g.outcomes().len(),
            s.n_measurements()
        )));
    }
    let tables = (0..s.n_contexts())
        .map(|c| {
            let mut t = vec![0.0; s.table_len(c)];
            t[s.restrict(g, c)] = 1.0;
            t
        })
        .collect();
    Behaviour::from_tables(s.clone(), tables)
}

/// Entrywise convex combination of behaviours over one shared scenario.
/// Weights must be nonnegative and sum to 1 within [`WEIGHT_TOL`].
pub fn mix(components: &[(f64, &Behaviour)]) -> Result<Behaviour> {
    let Some(((_, first), rest)) = components.split_first() else {
        return Err(Error::Domain("mix of zero behaviours".into()));
    };
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Domain(format!(
            "mixture weights sum to {total}, expected 1 within {WEIGHT_TOL:.0e}"
        )));
    }
    if let Some((w, _)) = components.iter().find(|(w, _)| *w < 0.0) {
        return Err(Error::Domain(format!("negative mixture weight {w}")));
    }
    for (_, e) in rest {
        if e.scenario != first.scenario {
            return Err(Error::Domain("mixture components live on different scenarios".into()));
        }
    }
    let tables = (0..first.scenario.n_contexts())
        .map(|c| {
            (0..first.scenario.table_len(c))
                .map(|i| components.iter().map(|(w, e)| w * e.tables[c][i]).sum())
                .collect()
        })
        .collect();
    Behaviour::from_tables(first.scenario.clone(), tables)
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

/// Scenario header of the behaviour JSON format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub parties: usize,
    pub inputs_per_party: Vec<usize>,
    pub outputs_per_party: Vec<usize>,
}

/// On-disk behaviour: a scenario header plus sparse tables keyed by
/// comma-joined input tuples ("x,y") and outcome tuples ("a,b"). Missing
/// outcome keys are read as probability 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviourFile {
    pub scenario: ScenarioSpec,
    pub tables: BTreeMap<String, BTreeMap<String, f64>>,
}

fn parse_key(key: &str, expect: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != expect {
        return Err(Error::Schema(format!(
            "key \"{key}\" has {} components, expected {expect}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Schema(format!("key \"{key}\" is not a tuple of integers")))
        })
        .collect()
}

fn format_key(tuple: &[usize]) -> String {
    tuple.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Decode a [`BehaviourFile`] into a dense [`Behaviour`], enforcing the
/// validation report at tolerance `tol`.
pub fn behaviour_from_file(file: &BehaviourFile, tol: f64) -> Result<Behaviour> {
    let spec = &file.scenario;
    if spec.parties == 0
        || spec.inputs_per_party.len() != spec.parties
        || spec.outputs_per_party.len() != spec.parties
    {
        return Err(Error::Schema(format!(
            "scenario header: {} parties with {} input and {} output entries",
            spec.parties,
            spec.inputs_per_party.len(),
            spec.outputs_per_party.len()
        )));
    }
    let scenario = MeasurementScenario::party_scenario(&spec.inputs_per_party, &spec.outputs_per_party)?;
    let mut tables: Vec<Vec<f64>> =
        (0..scenario.n_contexts()).map(|c| vec![0.0; scenario.table_len(c)]).collect();
    let mut filled = vec![false; scenario.n_contexts()];
    for (ctx_key, cells) in &file.tables {
        let inputs = parse_key(ctx_key, spec.parties)?;
        let c = scenario
            .context_of_inputs(&inputs)
            .ok_or_else(|| Error::Schema(format!("context key \"{ctx_key}\" out of range")))?;
        filled[c] = true;
        for (out_key, &p) in cells {
            let tuple = parse_key(out_key, spec.parties)?;
            for (party, &o) in tuple.iter().enumerate() {
                if o >= spec.outputs_per_party[party] {
                    return Err(Error::Schema(format!(
                        "outcome key \"{out_key}\" out of range in context \"{ctx_key}\""
                    )));
                }
            }
            tables[c][scenario.tuple_to_index(c, &tuple)] = p;
        }
    }
    if let Some(c) = filled.iter().position(|&f| !f) {
        let inputs = scenario.inputs_of_context(c).unwrap();
        return Err(Error::Schema(format!(
            "no table for context \"{}\"",
            format_key(&inputs)
        )));
    }
    let behaviour = Behaviour::from_tables(scenario, tables)?;
    let report = validate_behaviour(&behaviour, tol);
    if !report.passes() {
        return Err(Error::Schema(format!("behaviour fails validation: {report}")));
    }
    Ok(behaviour)
}

/// Encode a behaviour into the JSON interchange shape. Requires a party
/// scenario (the format has no encoding for general contexts).
pub fn behaviour_to_file(e: &Behaviour) -> Result<BehaviourFile> {
    let scenario = e.scenario();
    let parties = scenario
        .parties()
        .ok_or_else(|| Error::Unsupported("the JSON format covers party scenarios only".into()))?;
    let mut tables = BTreeMap::new();
    for c in 0..scenario.n_contexts() {
        let inputs = scenario.inputs_of_context(c).unwrap();
        let mut cells = BTreeMap::new();
        for idx in 0..scenario.table_len(c) {
            let tuple = scenario.index_to_tuple(c, idx);
            cells.insert(format_key(&tuple), e.prob(c, idx));
        }
        tables.insert(format_key(&inputs), cells);
    }
    Ok(BehaviourFile {
        scenario: ScenarioSpec {
            parties: parties.n_parties(),
            inputs_per_party: parties.inputs_per_party.clone(),
            outputs_per_party: parties.outputs_per_party.clone(),
        },
        tables,
    })
}

/// Read a behaviour from a JSON file at `path` with normalization tolerance
/// `tol`.
pub fn read_behaviour(path: &Path, tol: f64) -> Result<Behaviour> {
    let text = std::fs::read_to_string(path)?;
    let file: BehaviourFile = serde_json::from_str(&text)?;
    behaviour_from_file(&file, tol)
}

/// Write a behaviour as pretty-printed JSON to `path`.
pub fn write_behaviour(e: &Behaviour, path: &Path) -> Result<()> {
    let file = behaviour_to_file(e)?;
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
