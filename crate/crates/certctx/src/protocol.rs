//! The spot-checking certification protocol and its min-entropy bound.
//!
//! A run interleaves rare *test* rounds (chosen i.i.d. with probability q)
//! among *generation* rounds. Test rounds draw a uniformly random context
//! and score the device's answer with the parity predicate the chip is
//! aligned to (win iff a⊕b = x∨y); generation rounds always play the
//! distinguished context and their outcomes become the raw output bits.
//! After the run, the test statistic c/(qN) minus a signalling allowance is
//! compared against the threshold χ: clearing it certifies the output via
//! the bound
//!
//! ```text
//! h_min ≥ N·(π(χ) − Δ),   π(χ) = 2·log₂e·(χ − S_cl)² / (n|O| − 1)
//! ```
//!
//! with Δ the finite-size/smoothing correction of [`delta_correction`].
//! Everything here is deterministic given the seed: one named generator
//! (ChaCha12) feeds all randomness in a documented per-round order, so
//! transcripts are byte-identical across runs and across the two
//! mathematically equivalent sampling loops ([`run_protocol`],
//! [`run_protocol_geometric`]).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::extractor::BitString;
use crate::games::chsh_game_or;
use crate::photonic::{device_behaviour, DeviceModel};
use crate::scenario::{Behaviour, MeasurementScenario};
use crate::{Error, Result};

use std::f64::consts::LOG2_E;
use std::fmt;
use std::io::{Read as _, Write as _};
use std::path::Path;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// The bound parameter ε: a fixed value in (0,1], or `Auto` to minimize the
/// correction Δ by golden-section search over log ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonChoice {
    Fixed(f64),
    Auto,
}

/// Transcripts above this many rounds would need a streaming mode that is
/// deliberately not provided; the in-memory representation stops here.
pub const MAX_IN_MEMORY_ROUNDS: u64 = 1_000_000_000;

/// All knobs of one protocol run and its entropy accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Total rounds N.
    pub n_rounds: u64,
    /// Test probability q ∈ (0,1].
    pub test_probability: f64,
    /// Score threshold χ ∈ [S_cl, 1].
    pub threshold: f64,
    /// Hierarchy level ℓ at which the signalling fraction of the empirical
    /// behaviour is assessed.
    pub level: usize,
    /// Security/smoothing parameter δ ∈ (0,1).
    pub security: f64,
    /// Bound parameter ε.
    pub epsilon: EpsilonChoice,
    /// Number of parties n (each contributing one binary input per round).
    pub parties: usize,
    /// Outcome alphabet size |O| per party.
    pub outcomes: usize,
    /// Maximum number of simultaneously satisfiable winning clauses; fixes
    /// the classical score S_cl = k/2ⁿ (3 for the CHSH game).
    pub k_consistency: u64,
    /// PRNG seed; the run is a pure function of (seed, config, device).
    pub seed: u64,
    /// Input pair (x,y) played in every generation round.
    pub distinguished_context: (usize, usize),
    /// Abort rule variant: `false` (default) subtracts the signalling
    /// allowance sfl·(2ⁿ−k)/2ⁿ; `true` subtracts plain sfl.
    pub plain_sf_rule: bool,
}

impl ProtocolConfig {
    /// CHSH-shaped configuration with the usual defaults (level 2,
    /// δ = 1e-10, ε auto, generation context (0,0), weighted abort rule).
    pub fn chsh(n_rounds: u64, test_probability: f64, threshold: f64, seed: u64) -> Self {
        Self {
            n_rounds,
            test_probability,
            threshold,
            level: 2,
            security: 1e-10,
            epsilon: EpsilonChoice::Auto,
            parties: 2,
            outcomes: 2,
            k_consistency: 3,
            seed,
            distinguished_context: (0, 0),
            plain_sf_rule: false,
        }
    }

    /// The classical score S_cl = k/2ⁿ.
    pub fn classical_score(&self) -> f64 {
        self.k_consistency as f64 / (1u64 << self.parties) as f64
    }

    /// The weight (2ⁿ−k)/2ⁿ multiplying the signalling fraction in the
    /// abort decision (1 under the plain rule).
    pub fn signalling_weight(&self) -> f64 {
        if self.plain_sf_rule {
            1.0
        } else {
            let m = (1u64 << self.parties) as f64;
            (m - self.k_consistency as f64) / m
        }
    }

    /// Check every invariant; all public entry points call this first.
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::Domain("a protocol run needs at least one round".into()));
        }
        if !(self.test_probability > 0.0 && self.test_probability <= 1.0) {
            return Err(Error::Domain(format!(
                "test probability {} outside (0,1]",
                self.test_probability
            )));
        }
        if self.parties == 0 || self.parties > 62 {
            return Err(Error::Domain(format!("{} parties unsupported", self.parties)));
        }
        if self.outcomes < 2 {
            return Err(Error::Domain(format!(
                "outcome alphabet of size {} is degenerate",
                self.outcomes
            )));
        }
        if self.k_consistency == 0 || self.k_consistency > (1u64 << self.parties) {
            return Err(Error::Domain(format!(
                "k = {} outside [1, 2ⁿ = {}]",
                self.k_consistency,
                1u64 << self.parties
            )));
        }
        let s_cl = self.classical_score();
        if !(self.threshold >= s_cl && self.threshold <= 1.0) {
            return Err(Error::Domain(format!(
                "threshold χ = {} outside [S_cl = {s_cl}, 1]",
                self.threshold
            )));
        }
        if !(self.security > 0.0 && self.security < 1.0) {
            return Err(Error::Domain(format!(
                "security parameter δ = {} outside (0,1)",
                self.security
            )));
        }
        if let EpsilonChoice::Fixed(e) = self.epsilon {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::Domain(format!("ε = {e} outside (0,1]")));
            }
        }
        let (x, y) = self.distinguished_context;
        if x > 1 || y > 1 {
            return Err(Error::Domain(format!(
                "distinguished context ({x},{y}) is not a CHSH input pair"
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

/// One round as recorded: flag, inputs, outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: u64,
    pub is_test: bool,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
}

/// Everything a run produced: the per-round records plus the counters the
/// abort decision and the empirical behaviour are computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    records: Vec<RoundRecord>,
    /// Test-round wins under the protocol's test predicate (a⊕b = x∨y).
    c: u64,
    /// Test outcomes per context, per (a,b)-lexicographic cell.
    test_counts: [[u64; 4]; 4],
}

impl Transcript {
    /// Rebuild a transcript (and all counters) from raw records, e.g. after
    /// reading a CSV back in.
    pub fn from_records(records: Vec<RoundRecord>) -> Result<Self> {
        let game = chsh_game_or();
        let mut c = 0;
        let mut test_counts = [[0u64; 4]; 4];
        for r in &records {
            if r.x > 1 || r.y > 1 || r.a > 1 || r.b > 1 {
                return Err(Error::Schema(format!(
                    "record for round {} has out-of-range bits",
                    r.round
                )));
            }
            if r.is_test {
                let ctx = (r.x as usize) * 2 + r.y as usize;
                let idx = (r.a as usize) * 2 + r.b as usize;
                test_counts[ctx][idx] += 1;
                if game.wins(ctx, idx) {
                    c += 1;
                }
            }
        }
        Ok(Self { records, c, test_counts })
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn n_rounds(&self) -> u64 {
        self.records.len() as u64
    }

    /// Number of wins among test rounds.
    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn n_tests(&self) -> u64 {
        self.test_counts.iter().flatten().sum()
    }

    pub fn test_counts(&self) -> &[[u64; 4]; 4] {
        &self.test_counts
    }

    /// Fraction of test rounds won, c/T (the per-test empirical score;
    /// the abort decision uses c/(qN) instead).
    pub fn empirical_test_score(&self) -> Option<f64> {
        let t = self.n_tests();
        (t > 0).then(|| self.c as f64 / t as f64)
    }

    /// The empirical behaviour ê: per-context normalized test counts.
    /// Errors when some context received no test rounds.
    pub fn e_hat(&self) -> Result<Behaviour> {
        let mut tables = Vec::with_capacity(4);
        for (ctx, counts) in self.test_counts.iter().enumerate() {
            let total: u64 = counts.iter().sum();
            if total == 0 {
                return Err(Error::Domain(format!(
                    "context ({},{}) received no test rounds; ê is undefined",
                    ctx / 2,
                    ctx % 2
                )));
            }
            tables.push(counts.iter().map(|&n| n as f64 / total as f64).collect());
        }
        Behaviour::from_tables(MeasurementScenario::chsh(), tables)
    }

    /// The raw output: both outcome bits of every generation round, in
    /// round order (a before b).
    pub fn generation_bits(&self) -> BitString {
        let mut bits = BitString::with_capacity(2 * self.records.len());
        for r in &self.records {
            if !r.is_test {
                bits.push(r.a == 1);
                bits.push(r.b == 1);
            }
        }
        bits
    }
}

// ---------------------------------------------------------------------------
// Running the protocol
// ---------------------------------------------------------------------------

/// 53-bit uniform in [0,1): the standard (u64 >> 11)·2⁻⁵³ construction.
fn next_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sample a cell index from one context's table by a single-uniform CDF walk
/// in (a,b)-lexicographic order.
fn sample_cell<R: RngCore>(table: &[f64], rng: &mut R) -> usize {
    let w = next_f64(rng);
    let mut acc = 0.0;
    for (idx, p) in table.iter().enumerate() {
        acc += p;
        if w < acc {
            return idx;
        }
    }
    table.len() - 1
}

/// Execute a run. The device's behaviour is evaluated once at its current
/// (possibly drifted) phases and sampled for the whole run.
///
/// Randomness is drawn from ChaCha12 seeded with `cfg.seed`, in this exact
/// per-round order:
/// 1. one 53-bit uniform u; the round is a test round iff u < q;
/// 2. on test rounds, one u64 reduced mod 4 for the context (x = high bit,
///    y = low bit; 2⁶⁴ is divisible by 4, so this is exactly uniform);
/// 3. one 53-bit uniform walking the context's outcome CDF in
///    (a,b)-lexicographic order.
///
/// Generation rounds skip step 2 and sample step 3 from the distinguished
/// context.
pub fn run_protocol(device: &DeviceModel, cfg: &ProtocolConfig) -> Result<Transcript> {
    cfg.validate()?;
    guard_rounds(cfg.n_rounds)?;
    let e = device_behaviour(device);
    let game = chsh_game_or();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let gen_ctx = cfg.distinguished_context.0 * 2 + cfg.distinguished_context.1;

    let mut records = Vec::with_capacity(cfg.n_rounds as usize);
    let mut c = 0;
    let mut test_counts = [[0u64; 4]; 4];
    for round in 0..cfg.n_rounds {
        let is_test = next_f64(&mut rng) < cfg.test_probability;
        let ctx = if is_test { (rng.next_u64() % 4) as usize } else { gen_ctx };
        let idx = sample_cell(&e.tables()[ctx], &mut rng);
        if is_test {
            test_counts[ctx][idx] += 1;
            if game.wins(ctx, idx) {
                c += 1;
            }
        }
        records.push(RoundRecord {
            round,
            is_test,
            x: (ctx >> 1) as u8,
            y: (ctx & 1) as u8,
            a: (idx >> 1) as u8,
            b: (idx & 1) as u8,
        });
    }
    Ok(Transcript { records, c, test_counts })
}

/// The same run restructured around geometric skips: instead of asking
/// "test round?" once per iteration of a round loop, the outer loop scans
/// flag uniforms until one falls below q (a geometric skip length),
/// emitting the skipped generation rounds along the way. Randomness is
/// consumed in the identical order, so for any (seed, config, device) the
/// transcript is byte-identical to [`run_protocol`]'s.
pub fn run_protocol_geometric(device: &DeviceModel, cfg: &ProtocolConfig) -> Result<Transcript> {
    cfg.validate()?;
    guard_rounds(cfg.n_rounds)?;
    let e = device_behaviour(device);
    let game = chsh_game_or();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let gen_ctx = cfg.distinguished_context.0 * 2 + cfg.distinguished_context.1;

    let mut records = Vec::with_capacity(cfg.n_rounds as usize);
    let mut c = 0;
    let mut test_counts = [[0u64; 4]; 4];
    let mut round = 0;
    'outer: while round < cfg.n_rounds {
        // geometric skip: emit generation rounds until a flag comes up test
        loop {
            if next_f64(&mut rng) < cfg.test_probability {
                break;
            }
            let idx = sample_cell(&e.tables()[gen_ctx], &mut rng);
            records.push(RoundRecord {
                round,
                is_test: false,
                x: (gen_ctx >> 1) as u8,
                y: (gen_ctx & 1) as u8,
                a: (idx >> 1) as u8,
                b: (idx & 1) as u8,
            });
            round += 1;
            if round >= cfg.n_rounds {
                break 'outer;
            }
        }
        let ctx = (rng.next_u64() % 4) as usize;
        let idx = sample_cell(&e.tables()[ctx], &mut rng);
        test_counts[ctx][idx] += 1;
        if game.wins(ctx, idx) {
            c += 1;
        }
        records.push(RoundRecord {
            round,
            is_test: true,
            x: (ctx >> 1) as u8,
            y: (ctx & 1) as u8,
            a: (idx >> 1) as u8,
            b: (idx & 1) as u8,
        });
        round += 1;
    }
    Ok(Transcript { records, c, test_counts })
}

fn guard_rounds(n: u64) -> Result<()> {
    if n > MAX_IN_MEMORY_ROUNDS {
        return Err(Error::Resource(format!(
            "{n} rounds exceed the in-memory transcript limit {MAX_IN_MEMORY_ROUNDS}; \
             a streaming mode is not provided"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The abort decision
// ---------------------------------------------------------------------------

/// Outcome of the post-run check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// The adjusted test statistic cleared the threshold.
    Succeed,
    /// The adjusted test statistic fell below χ.
    Abort,
    /// No test rounds occurred; nothing was certified.
    AbortNoTests,
}

impl Decision {
    pub fn succeeded(&self) -> bool {
        matches!(self, Decision::Succeed)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Succeed => write!(f, "succeed"),
            Decision::Abort => write!(f, "abort"),
            Decision::AbortNoTests => write!(f, "abort (no test rounds)"),
        }
    }
}

/// The test statistic c/(qN): wins normalized by the *expected* number of
/// tests, which is what the threshold χ is calibrated against.
pub fn test_statistic(t: &Transcript, cfg: &ProtocolConfig) -> f64 {
    t.c() as f64 / (cfg.test_probability * cfg.n_rounds as f64)
}

/// The largest threshold this transcript would have cleared:
/// c/(qN) − sfl·(2ⁿ−k)/2ⁿ (or − sfl under the plain rule).
pub fn max_admissible_chi(t: &Transcript, cfg: &ProtocolConfig, sfl: f64) -> f64 {
    test_statistic(t, cfg) - sfl * cfg.signalling_weight()
}

/// Apply the abort rule: succeed iff c/(qN) − sfl·(2ⁿ−k)/2ⁿ ≥ χ, where
/// `sfl` is the hierarchy signalling fraction of the empirical behaviour
/// (computed by the caller). A transcript without test rounds aborts with
/// its own status.
pub fn decide(t: &Transcript, cfg: &ProtocolConfig, sfl: f64) -> Result<Decision> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&sfl) {
        return Err(Error::Domain(format!("signalling fraction {sfl} outside [0,1]")));
    }
    if t.n_tests() == 0 {
        return Ok(Decision::AbortNoTests);
    }
    if max_admissible_chi(t, cfg, sfl) < cfg.threshold {
        Ok(Decision::Abort)
    } else {
        Ok(Decision::Succeed)
    }
}

// ---------------------------------------------------------------------------
// Entropy accounting
// ---------------------------------------------------------------------------

/// Asymptotic entropy rate π(χ) = 2·log₂e·(χ−S_cl)²/(n|O|−1): the per-round
/// smooth min-entropy certified in the large-N limit at threshold χ.
pub fn pi_rate(chi: f64, cfg: &ProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    let s_cl = cfg.classical_score();
    if chi < s_cl {
        return Err(Error::Domain(format!("χ = {chi} below the classical score {s_cl}")));
    }
    let g = chi - s_cl;
    let d = (cfg.parties * cfg.outcomes - 1) as f64;
    Ok(2.0 * LOG2_E * g * g / d)
}

/// The finite-size correction Δ at a given χ and ε: two ε/q spot-checking
/// terms, the smoothing term log₂(2/δ²)/(Nε), and the test-round entropy
/// give-away 2n|O|q.
fn delta_at(cfg: &ProtocolConfig, chi: f64, eps: f64) -> f64 {
    let g = chi - cfg.classical_score();
    let d = (cfg.parties * cfg.outcomes - 1) as f64;
    let q = cfg.test_probability;
    let n = cfg.n_rounds as f64;
    let r = eps / q;
    let t1 = r * 8.0 * LOG2_E * g * g / (d * d);
    let t2 = r * r * (32.0 * LOG2_E * g * g * g / (3.0 * d * d * d))
        * (r * 4.0 * LOG2_E * g / d).exp2();
    let t3 = (1.0 - 2.0 * cfg.security.log2()) / (n * eps);
    let t4 = 2.0 * (cfg.parties * cfg.outcomes) as f64 * q;
    t1 + t2 + t3 + t4
}

/// Golden-section search bounds and tolerance for the automatic ε choice:
/// the correction Δ(ε) is unimodal in ε, so we minimize over log ε.
const EPSILON_LO: f64 = 1e-12;
const EPSILON_HI: f64 = 1.0;
const EPSILON_LOG_TOL: f64 = 1e-3;

/// The ε this configuration evaluates its bound at: the fixed value, or
/// the Δ-minimizer.
pub fn resolve_epsilon(cfg: &ProtocolConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.epsilon {
        EpsilonChoice::Fixed(e) => Ok(e),
        EpsilonChoice::Auto => {
            let f = |ln_eps: f64| delta_at(cfg, cfg.threshold, ln_eps.exp());
            let (mut a, mut b) = (EPSILON_LO.ln(), EPSILON_HI.ln());
            let phi = (5.0f64.sqrt() - 1.0) / 2.0;
            let mut x1 = b - phi * (b - a);
            let mut x2 = a + phi * (b - a);
            let (mut f1, mut f2) = (f(x1), f(x2));
            while b - a > EPSILON_LOG_TOL {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - phi * (b - a);
                    f1 = f(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b - a);
                    f2 = f(x2);
                }
            }
            Ok((0.5 * (a + b)).exp())
        }
    }
}

/// The full correction Δ of the entropy bound at this configuration's χ
/// (resolving ε first if it is automatic).
pub fn delta_correction(cfg: &ProtocolConfig) -> Result<f64> {
    let eps = resolve_epsilon(cfg)?;
    if cfg.threshold < cfg.classical_score() {
        return Err(Error::Domain(format!(
            "χ = {} below the classical score",
            cfg.threshold
        )));
    }
    Ok(delta_at(cfg, cfg.threshold, eps))
}

/// The certified bound and every number that went into it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyBound {
    /// Asymptotic rate π(χ).
    pub pi: f64,
    /// Finite-size correction Δ.
    pub delta: f64,
    /// Certified δ-smooth min-entropy: max(0, N(π−Δ)).
    pub h_min: f64,
    /// N(π−Δ) before clamping (negative when the correction swamps the
    /// rate — vacuous, not an error).
    pub raw_bound: f64,
    pub chi: f64,
    pub n_rounds: u64,
    pub test_probability: f64,
    pub security: f64,
    /// The ε actually evaluated (resolved when automatic).
    pub epsilon: f64,
    pub classical_score: f64,
    pub parties: usize,
    pub outcomes: usize,
}

/// Evaluate the min-entropy bound h_min = max(0, N(π(χ) − Δ)) at the
/// configuration's threshold.
pub fn min_entropy_bound(cfg: &ProtocolConfig) -> Result<EntropyBound> {
    let pi = pi_rate(cfg.threshold, cfg)?;
    let eps = resolve_epsilon(cfg)?;
    let delta = delta_at(cfg, cfg.threshold, eps);
    let raw = cfg.n_rounds as f64 * (pi - delta);
    Ok(EntropyBound {
        pi,
        delta,
        h_min: raw.max(0.0),
        raw_bound: raw,
        chi: cfg.threshold,
        n_rounds: cfg.n_rounds,
        test_probability: cfg.test_probability,
        security: cfg.security,
        epsilon: eps,
        classical_score: cfg.classical_score(),
        parties: cfg.parties,
        outcomes: cfg.outcomes,
    })
}

// ---------------------------------------------------------------------------
// Transcript files
// ---------------------------------------------------------------------------

/// CSV header of a transcript file.
pub const TRANSCRIPT_HEADER: &str = "round,is_test,x,y,a,b";

/// Write a transcript as CSV (`round,is_test,x,y,a,b`, with is_test as 1/0).
pub fn write_transcript_csv(t: &Transcript, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{TRANSCRIPT_HEADER}")?;
    for r in t.records() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.round,
            r.is_test as u8,
            r.x,
            r.y,
            r.a,
            r.b
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Read a transcript CSV back, rebuilding all counters.
pub fn read_transcript_csv(path: &Path) -> Result<Transcript> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRANSCRIPT_HEADER => {}
        other => {
            return Err(Error::Schema(format!(
                "expected transcript header `{TRANSCRIPT_HEADER}`, found {other:?}"
            )));
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Schema(format!(
                "transcript line {} has {} fields, expected 6",
                i + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<u64> {
            s.trim()
                .parse::<u64>()
                .map_err(|e| Error::Schema(format!("transcript line {}: {e}", i + 2)))
        };
        let bit = |s: &str| -> Result<u8> {
            match parse(s)? {
                v @ (0 | 1) => Ok(v as u8),
                v => Err(Error::Schema(format!(
                    "transcript line {}: {v} is not a bit",
                    i + 2
                ))),
            }
        };
        records.push(RoundRecord {
            round: parse(fields[0])?,
            is_test: bit(fields[1])? == 1,
            x: bit(fields[2])?,
            y: bit(fields[3])?,
            a: bit(fields[4])?,
            b: bit(fields[5])?,
        });
    }
    Transcript::from_records(records)
}
