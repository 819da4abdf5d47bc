//! The `certctx` command line: one subcommand per pipeline stage.
//!
//! | subcommand       | does |
//! |------------------|------|
//! | `analyze`        | score a behaviour file and compute CF, SF and SF_ℓ |
//! | `simulate`       | run the spot-checking protocol against the device model |
//! | `bound`          | evaluate the min-entropy bound for a parameter set |
//! | `extract`        | apply the Toeplitz extractor to a raw bit file |
//! | `sweep-chsh-hom` | tabulate the ideal CHSH value against HOM visibility |
//!
//! Exit codes: **0** success (including a protocol run that succeeds),
//! **2** protocol abort, **1** any error (bad flags, bad files, domain
//! violations). The protocol seed defaults to the `CERTCTX_SEED`
//! environment variable and is overridden by `--seed`; every subcommand is
//! deterministic given its flags and seed, byte for byte.
//!
//! File formats: behaviours are JSON (scenario header plus per-context
//! outcome tables, see [`crate::scenario::BehaviourFile`]); transcripts are
//! CSV with header `round,is_test,x,y,a,b`; summaries and bound reports are
//! JSON at full double precision; sweep output is CSV with 9 significant
//! digits; bit and seed files are the raw formats of [`crate::extractor`].

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::extractor::{
    extract, monobit_z, output_length, read_bits, read_seed, write_bits, write_seed, BitString,
    ToeplitzSeed,
};
use crate::fractions::{contextual_fraction, signalling_fraction};
use crate::games::{chsh_game, chsh_game_or, game_score, k_consistency, ContextualGame};
use crate::npa::sf_level;
use crate::photonic::{ichsh_from_vhom, DeviceConfig, DeviceModel};
use crate::protocol::{
    decide, max_admissible_chi, min_entropy_bound, run_protocol, test_statistic, write_transcript_csv,
    Decision, EntropyBound, EpsilonChoice, ProtocolConfig, Transcript,
};
use crate::scenario::{behaviour_from_file, behaviour_to_file, Behaviour, BehaviourFile};
use crate::{Error, Result};

use std::path::{Path, PathBuf};

/// Exit code for a clean run (including a succeeding protocol).
pub const EXIT_OK: i32 = 0;
/// Exit code for any error.
pub const EXIT_ERROR: i32 = 1;
/// Exit code for a protocol abort.
pub const EXIT_ABORT: i32 = 2;
/// Environment variable supplying the default protocol seed.
pub const SEED_ENV: &str = "CERTCTX_SEED";

// ---------------------------------------------------------------------------
// Argument shapes
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "certctx",
    version,
    about = "Contextuality analysis and certified randomness for CHSH-type scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a behaviour and quantify its contextuality and signalling.
    Analyze(AnalyzeArgs),
    /// Run the spot-checking protocol against the photonic device model.
    Simulate(SimulateArgs),
    /// Evaluate the min-entropy bound for a protocol parameter set.
    Bound(BoundArgs),
    /// Apply the Toeplitz extractor to a raw bit file.
    Extract(ExtractArgs),
    /// Tabulate the ideal CHSH value as a function of HOM visibility.
    #[command(name = "sweep-chsh-hom")]
    SweepChshHom(SweepArgs),
}

/// Which winning parity the score uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GameConvention {
    /// win iff a⊕b = x∨y (the convention the modeled device is aligned to)
    Or,
    /// win iff a⊕b = x·y
    And,
}

impl GameConvention {
    fn game(self) -> ContextualGame {
        match self {
            GameConvention::Or => chsh_game_or(),
            GameConvention::And => chsh_game(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            GameConvention::Or => "or",
            GameConvention::And => "and",
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Behaviour JSON, or a simulation summary JSON (detected by its
    /// `e_hat` field).
    input: PathBuf,
    /// Hierarchy level for the signalling fraction SF_ℓ.
    #[arg(long, default_value_t = 1)]
    level: usize,
    /// Winning parity convention for the score.
    #[arg(long, value_enum, default_value_t = GameConvention::Or)]
    game: GameConvention,
    /// Normalization tolerance when reading behaviour files (published
    /// tables rounded to few decimals need a loose one).
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Also write the JSON report here (it always prints to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// HOM visibility of the modeled device.
    #[arg(long, default_value_t = 0.93)]
    vhom: f64,
    /// Total rounds N (integers and scientific notation both parse).
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    rounds: u64,
    /// Test-round probability q.
    #[arg(long, default_value_t = 0.01)]
    q: f64,
    /// Score threshold χ of the abort rule.
    #[arg(long, default_value_t = 0.80)]
    chi: f64,
    /// Hierarchy level at which the empirical behaviour's signalling
    /// fraction enters the abort rule.
    #[arg(long, default_value_t = 1)]
    level: usize,
    /// Security parameter δ of the entropy bound.
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    /// Bound parameter ε: a number, or `auto` to minimize the correction.
    #[arg(long, value_parser = parse_epsilon, default_value = "auto")]
    eps: EpsilonChoice,
    /// PRNG seed (default: $CERTCTX_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Device model JSON (overrides --vhom; see the photonic module's
    /// DeviceConfig for the schema).
    #[arg(long)]
    device_config: Option<PathBuf>,
    /// Transcript CSV destination.
    #[arg(long, default_value = "transcript.csv")]
    transcript_out: PathBuf,
    /// Summary JSON destination.
    #[arg(long, default_value = "summary.json")]
    summary_out: PathBuf,
    /// Also write the raw generation-round bits here.
    #[arg(long)]
    bits_out: Option<PathBuf>,
    /// Subtract the full signalling fraction in the abort rule instead of
    /// the (2ⁿ−k)/2ⁿ-weighted allowance.
    #[arg(long)]
    plain_sf_rule: bool,
    /// Simulate this many consecutive seeds (output files get a `-<seed>`
    /// suffix when above 1).
    #[arg(long, default_value_t = 1)]
    batch: u64,
    /// Worker threads for batch simulation.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct BoundArgs {
    /// Total rounds N.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    rounds: u64,
    /// Test-round probability q.
    #[arg(long, default_value_t = 0.01)]
    q: f64,
    /// Score threshold χ.
    #[arg(long)]
    chi: f64,
    /// Security parameter δ.
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    /// Bound parameter ε: a number, or `auto`.
    #[arg(long, value_parser = parse_epsilon, default_value = "auto")]
    eps: EpsilonChoice,
    /// Number of parties n.
    #[arg(long, default_value_t = 2)]
    parties: usize,
    /// Outcome alphabet size |O| per party.
    #[arg(long, default_value_t = 2)]
    outcomes: usize,
    /// Maximum simultaneously satisfiable winning clauses k.
    #[arg(long, default_value_t = 3)]
    k: u64,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Raw input bit file.
    #[arg(long)]
    input: PathBuf,
    /// Toeplitz seed file (8-byte little-endian bit length + payload).
    #[arg(long, conflicts_with = "os_entropy")]
    seed_file: Option<PathBuf>,
    /// Draw the seed from the operating system and save it to --seed-out.
    /// The extractor never self-seeds without this explicit flag.
    #[arg(long)]
    os_entropy: bool,
    /// Where an OS-drawn seed is saved for audit.
    #[arg(long, default_value = "toeplitz.seed")]
    seed_out: PathBuf,
    /// Output length in bits.
    #[arg(long, conflicts_with = "h_min")]
    m: Option<u64>,
    /// Size the output from a min-entropy budget instead of --m.
    #[arg(long)]
    h_min: Option<f64>,
    /// Extractor error δ_ext used with --h-min.
    #[arg(long, default_value_t = 1e-10)]
    delta_ext: f64,
    /// Output bit file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid points on v ∈ [0,1] (the classical-threshold row is added).
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Flag parsing helpers
// ---------------------------------------------------------------------------

/// Round counts accept plain integers and scientific notation ("2.4e9").
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = t.parse().map_err(|_| format!("`{t}` is not a round count"))?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= (1u64 << 53) as f64) {
        return Err(format!("`{t}` is not an exactly representable whole count"));
    }
    Ok(v as u64)
}

fn parse_epsilon(s: &str) -> std::result::Result<EpsilonChoice, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("auto") {
        return Ok(EpsilonChoice::Auto);
    }
    t.parse::<f64>()
        .map(EpsilonChoice::Fixed)
        .map_err(|_| format!("`{t}` is neither a number nor `auto`"))
}

/// `--seed` wins, then `CERTCTX_SEED`, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text.trim().parse::<u64>().map_err(|_| {
            Error::Domain(format!("{SEED_ENV}=`{text}` is not an unsigned 64-bit seed"))
        }),
        Err(_) => Ok(0),
    }
}

/// `transcript.csv` + seed 7 → `transcript-7.csv` (batch output naming).
fn path_with_seed(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{seed}.{ext}"),
        None => format!("{stem}-{seed}"),
    };
    path.with_file_name(name)
}

fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Analysis reports
// ---------------------------------------------------------------------------

/// Everything `analyze` reports about one behaviour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Winning-parity convention the score uses ("or"/"and").
    pub game: String,
    /// Hierarchy level of `sf_level`.
    pub level: usize,
    /// Game score S.
    pub score: f64,
    /// CHSH combination I with S = (I+4)/8.
    pub chsh_value: Option<f64>,
    /// ⟨A_x B_y⟩ in context order (0,0), (0,1), (1,0), (1,1).
    pub correlators: Option<[f64; 4]>,
    pub contextual_fraction: f64,
    pub signalling_fraction: f64,
    /// Hierarchy signalling fraction SF_ℓ.
    pub sf_level: f64,
    /// Classical score k/|M| of the chosen game.
    pub classical_score: f64,
    /// Weight (|M|−k)/|M| of the signalling allowance in the abort rule.
    pub signalling_weight: f64,
    /// S − SF_ℓ·weight: the largest threshold χ a device with this
    /// behaviour clears in expectation.
    pub max_admissible_chi: f64,
}

fn analysis_report_for(e: &Behaviour, convention: GameConvention, level: usize) -> Result<AnalysisReport> {
    let game = convention.game();
    let report = game_score(e, &game)?;
    let cf = contextual_fraction(e)?;
    let sf = signalling_fraction(e)?;
    let sfl = sf_level(e, level)?;
    let k = k_consistency(&game)? as f64;
    let m = game.scenario().n_contexts() as f64;
    let weight = (m - k) / m;
    Ok(AnalysisReport {
        game: convention.name().to_string(),
        level,
        score: report.score,
        chsh_value: report.chsh_value,
        correlators: report.correlators,
        contextual_fraction: cf.value,
        signalling_fraction: sf.value,
        sf_level: sfl.value,
        classical_score: k / m,
        signalling_weight: weight,
        max_admissible_chi: report.score - sfl.value * weight,
    })
}

fn load_analysis_input(path: &Path, tol: f64) -> Result<Behaviour> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let file: BehaviourFile = match value.get("e_hat") {
        Some(serde_json::Value::Null) => {
            return Err(Error::Schema(
                "summary has no empirical behaviour (the run recorded too few test rounds)".into(),
            ));
        }
        Some(e_hat) => serde_json::from_value(e_hat.clone())?,
        None => serde_json::from_value(value)?,
    };
    behaviour_from_file(&file, tol)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32> {
    let e = load_analysis_input(&args.input, args.tol)?;
    let report = analysis_report_for(&e, args.game, args.level)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        write_json_file(&report, out)?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// The summary JSON a protocol run writes: the configuration echo, the
/// test-round statistics, the empirical behaviour with its score and
/// signalling fraction, the decision, and the entropy accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub v_hom: f64,
    pub n_rounds: u64,
    pub test_probability: f64,
    pub threshold: f64,
    pub level: usize,
    pub seed: u64,
    pub plain_sf_rule: bool,
    pub distinguished_context: (usize, usize),
    pub n_tests: u64,
    /// Test-round wins.
    pub c: u64,
    /// Test outcomes per context, per (a,b)-lexicographic cell.
    pub test_counts: [[u64; 4]; 4],
    /// c/T (None without test rounds).
    pub empirical_test_score: Option<f64>,
    /// c/(qN), the quantity the abort rule thresholds.
    pub test_statistic: f64,
    pub n_generation_bits: u64,
    /// Empirical behaviour ê (None when some context saw no tests).
    pub e_hat: Option<BehaviourFile>,
    /// Game score of ê under the test predicate.
    pub e_hat_score: Option<f64>,
    /// Hierarchy signalling fraction of ê at `level`.
    pub sf_level: Option<f64>,
    /// The largest threshold this transcript clears.
    pub max_admissible_chi: Option<f64>,
    pub decision: String,
    pub entropy: EntropyBound,
}

/// Fold a finished run into the summary: computes ê, its score and SF_ℓ,
/// applies the abort rule, and evaluates the entropy bound.
pub fn summarize_run(t: &Transcript, cfg: &ProtocolConfig, v_hom: f64) -> Result<ProtocolSummary> {
    let entropy = min_entropy_bound(cfg)?;
    let (e_hat, e_hat_score, sfl, max_chi, decision) = match t.e_hat() {
        Ok(e) => {
            let score = game_score(&e, &chsh_game_or())?.score;
            let sfl = sf_level(&e, cfg.level)?.value;
            let decision = decide(t, cfg, sfl)?;
            (
                Some(behaviour_to_file(&e)?),
                Some(score),
                Some(sfl),
                Some(max_admissible_chi(t, cfg, sfl)),
                decision,
            )
        }
        // an incomplete empirical table cannot be certified: abort, with
        // the no-tests case keeping its distinct status
        Err(_) if t.n_tests() == 0 => (None, None, None, None, Decision::AbortNoTests),
        Err(_) => (None, None, None, None, Decision::Abort),
    };
    Ok(ProtocolSummary {
        v_hom,
        n_rounds: cfg.n_rounds,
        test_probability: cfg.test_probability,
        threshold: cfg.threshold,
        level: cfg.level,
        seed: cfg.seed,
        plain_sf_rule: cfg.plain_sf_rule,
        distinguished_context: cfg.distinguished_context,
        n_tests: t.n_tests(),
        c: t.c(),
        test_counts: *t.test_counts(),
        empirical_test_score: t.empirical_test_score(),
        test_statistic: test_statistic(t, cfg),
        n_generation_bits: t.generation_bits().len() as u64,
        e_hat,
        e_hat_score,
        sf_level: sfl,
        max_admissible_chi: max_chi,
        decision: decision.to_string(),
        entropy,
    })
}

struct SeedOutcome {
    seed: u64,
    decision: String,
    line: String,
}

fn simulate_one(
    device: &DeviceModel,
    base: &ProtocolConfig,
    args: &SimulateArgs,
    seed: u64,
    suffixed: bool,
) -> Result<SeedOutcome> {
    let cfg = ProtocolConfig { seed, ..base.clone() };
    let t = run_protocol(device, &cfg)?;
    let summary = summarize_run(&t, &cfg, device.v_hom())?;

    let pick = |p: &Path| if suffixed { path_with_seed(p, seed) } else { p.to_path_buf() };
    write_transcript_csv(&t, &pick(&args.transcript_out))?;
    write_json_file(&summary, &pick(&args.summary_out))?;
    if let Some(bits_path) = &args.bits_out {
        write_bits(&pick(bits_path), &t.generation_bits())?;
    }

    let line = format!(
        "seed {seed}: {} — c/(qN) = {:.6}, tests = {}, h_min = {:.6e}",
        summary.decision, summary.test_statistic, summary.n_tests, summary.entropy.h_min
    );
    Ok(SeedOutcome { seed, decision: summary.decision.clone(), line })
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let device = match &args.device_config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let config: DeviceConfig = serde_json::from_str(&text)?;
            DeviceModel::from_config(&config)?
        }
        None => DeviceModel::new(args.vhom)?,
    };
    if args.batch == 0 {
        return Err(Error::Domain("a batch needs at least one seed".into()));
    }
    let first_seed = resolve_seed(args.seed)?;
    let base = ProtocolConfig {
        n_rounds: args.rounds,
        test_probability: args.q,
        threshold: args.chi,
        level: args.level,
        security: args.delta,
        epsilon: args.eps,
        seed: first_seed,
        plain_sf_rule: args.plain_sf_rule,
        ..ProtocolConfig::chsh(args.rounds, args.q, args.chi, first_seed)
    };
    base.validate()?;

    let seeds: Vec<u64> = (0..args.batch).map(|i| first_seed + i).collect();
    let suffixed = args.batch > 1;
    let jobs = args.jobs.clamp(1, seeds.len());

    let mut outcomes: Vec<Option<Result<SeedOutcome>>> = Vec::new();
    outcomes.resize_with(seeds.len(), || None);
    if jobs == 1 {
        for (slot, &seed) in outcomes.iter_mut().zip(&seeds) {
            *slot = Some(simulate_one(&device, &base, &args, seed, suffixed));
        }
    } else {
        let chunk = seeds.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            for (slots, seed_chunk) in outcomes.chunks_mut(chunk).zip(seeds.chunks(chunk)) {
                let (device, base, args) = (&device, &base, &args);
                scope.spawn(move || {
                    for (slot, &seed) in slots.iter_mut().zip(seed_chunk) {
                        *slot = Some(simulate_one(device, base, args, seed, suffixed));
                    }
                });
            }
        });
    }

    let mut any_abort = false;
    for outcome in outcomes.into_iter().flatten() {
        let o = outcome?;
        println!("{}", o.line);
        if o.decision != Decision::Succeed.to_string() {
            any_abort = true;
        }
        debug_assert!(seeds.contains(&o.seed));
    }
    Ok(if any_abort { EXIT_ABORT } else { EXIT_OK })
}

// ---------------------------------------------------------------------------
// Bound
// ---------------------------------------------------------------------------

fn cmd_bound(args: BoundArgs) -> Result<i32> {
    let cfg = ProtocolConfig {
        security: args.delta,
        epsilon: args.eps,
        parties: args.parties,
        outcomes: args.outcomes,
        k_consistency: args.k,
        ..ProtocolConfig::chsh(args.rounds, args.q, args.chi, 0)
    };
    let bound = min_entropy_bound(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&bound)?);
    if let Some(out) = &args.out {
        write_json_file(&bound, out)?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

/// What `extract` reports on stdout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractReport {
    pub input_bits: usize,
    pub output_bits: usize,
    /// Monobit z-score of the output (absent for empty output).
    pub monobit_z: Option<f64>,
}

fn cmd_extract(args: ExtractArgs) -> Result<i32> {
    let input = read_bits(&args.input)?;
    let m = match (args.m, args.h_min) {
        (Some(m), None) => m,
        (None, Some(h)) => output_length(h, args.delta_ext)?,
        (None, None) => {
            return Err(Error::Domain(
                "size the output with --m or with --h-min/--delta-ext".into(),
            ));
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --m with --h-min"),
    } as usize;

    let seed = match (&args.seed_file, args.os_entropy) {
        (Some(path), false) => read_seed(path)?,
        (None, true) => {
            let n_bits = ToeplitzSeed::required_len(input.len(), m);
            let mut bytes = vec![0u8; n_bits.div_ceil(8)];
            rand::rngs::OsRng.fill_bytes(&mut bytes);
            let seed = ToeplitzSeed::new(BitString::from_bytes(&bytes, n_bits)?);
            write_seed(&args.seed_out, &seed)?;
            eprintln!(
                "note: {n_bits}-bit seed drawn from the OS and saved to {}",
                args.seed_out.display()
            );
            seed
        }
        (Some(_), true) => unreachable!("clap rejects --seed-file with --os-entropy"),
        (None, false) => {
            return Err(Error::Domain(
                "the extractor never self-seeds silently; pass --seed-file or --os-entropy".into(),
            ));
        }
    };

    let out = extract(&input, &seed, m)?;
    write_bits(&args.out, &out)?;
    let report = ExtractReport {
        input_bits: input.len(),
        output_bits: out.len(),
        monobit_z: if out.is_empty() { None } else { Some(monobit_z(&out)?) },
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

/// The (v, I) rows of the visibility sweep: a uniform grid on [0,1] plus
/// the classical-threshold row at v = √2−1, sorted by v.
fn sweep_rows(points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(Error::Domain(format!("a sweep needs ≥ 2 points, got {points}")));
    }
    let mut vs: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    vs.push(std::f64::consts::SQRT_2 - 1.0);
    vs.sort_by(|a, b| a.total_cmp(b));
    vs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    vs.into_iter().map(|v| Ok((v, ichsh_from_vhom(v)?))).collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let rows = sweep_rows(args.points)?;
    let mut text = String::from("v_hom,i_chsh\n");
    for (v, i) in rows {
        text.push_str(&format!("{v:.8e},{i:.8e}\n"));
    }
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Extract(args) => cmd_extract(args),
        Command::SweepChshHom(args) => cmd_sweep(args),
    }
}

/// Parse `std::env::args`, run one subcommand, and return the process exit
/// code (0 ok/succeed, 2 protocol abort, 1 error).
pub fn run() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => match dispatch(cli.command) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        // --help/--version surface as clap "errors" that exit cleanly
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::MeasurementScenario;

    #[test]
    fn count_parser_accepts_scientific_notation() {
        assert_eq!(parse_count("1000").unwrap(), 1000);
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("2.4e9").unwrap(), 2_400_000_000);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("many").is_err());
        assert!(parse_count("1e300").is_err());
    }

    #[test]
    fn epsilon_parser_accepts_auto_and_numbers() {
        assert_eq!(parse_epsilon("auto").unwrap(), EpsilonChoice::Auto);
        assert_eq!(parse_epsilon("AUTO").unwrap(), EpsilonChoice::Auto);
        assert_eq!(parse_epsilon("6e-5").unwrap(), EpsilonChoice::Fixed(6e-5));
        assert!(parse_epsilon("sometimes").is_err());
    }

    #[test]
    fn seed_resolution_order() {
        std::env::remove_var(SEED_ENV);
        assert_eq!(resolve_seed(None).unwrap(), 0);
        std::env::set_var(SEED_ENV, "99");
        assert_eq!(resolve_seed(None).unwrap(), 99);
        assert_eq!(resolve_seed(Some(5)).unwrap(), 5);
        std::env::set_var(SEED_ENV, "not a seed");
        assert!(resolve_seed(None).is_err());
        std::env::remove_var(SEED_ENV);
    }

    #[test]
    fn batch_paths_keep_extensions() {
        assert_eq!(
            path_with_seed(Path::new("out/transcript.csv"), 7),
            PathBuf::from("out/transcript-7.csv")
        );
        assert_eq!(path_with_seed(Path::new("bits"), 3), PathBuf::from("bits-3"));
    }

    #[test]
    fn sweep_grid_contains_threshold_and_endpoints() {
        let rows = sweep_rows(5).unwrap();
        assert_eq!(rows.len(), 6);
        assert!((rows[0].0).abs() < 1e-12 && (rows[0].1 - std::f64::consts::SQRT_2).abs() < 1e-12);
        let last = rows.last().unwrap();
        assert!((last.0 - 1.0).abs() < 1e-12 && (last.1 - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        let threshold = rows
            .iter()
            .find(|(v, _)| (v - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-12)
            .expect("threshold row");
        assert!((threshold.1 - 2.0).abs() < 1e-12);
        for pair in rows.windows(2) {
            assert!(pair[0].0 < pair[1].0 && pair[0].1 < pair[1].1);
        }
        assert!(sweep_rows(1).is_err());
    }

    #[test]
    fn analysis_report_on_the_uniform_behaviour() {
        let e = Behaviour::uniform(MeasurementScenario::chsh());
        let r = analysis_report_for(&e, GameConvention::Or, 1).unwrap();
        assert!((r.score - 0.5).abs() < 1e-12);
        assert!(r.contextual_fraction.abs() < 1e-7);
        assert!(r.signalling_fraction.abs() < 1e-7);
        assert!(r.sf_level.abs() < 1e-5);
        assert_eq!(r.classical_score, 0.75);
        assert_eq!(r.signalling_weight, 0.25);
        assert!((r.max_admissible_chi - r.score + r.sf_level * 0.25).abs() < 1e-12);
        assert_eq!(r.chsh_value.map(|i| (i.abs() < 1e-12) as u8), Some(1));
    }

    #[test]
    fn flag_wiring_parses() {
        assert!(Cli::try_parse_from(["certctx", "analyze", "behaviour.json", "--level", "3"]).is_ok());
        assert!(Cli::try_parse_from([
            "certctx", "simulate", "--rounds", "1e6", "--q", "0.01", "--chi", "0.80", "--seed", "42",
        ])
        .is_ok());
        assert!(Cli::try_parse_from(["certctx", "bound", "--chi", "0.8306"]).is_ok());
        assert!(Cli::try_parse_from(["certctx", "sweep-chsh-hom", "--points", "50"]).is_ok());
        // exactly one subcommand, known flags only
        assert!(Cli::try_parse_from(["certctx"]).is_err());
        assert!(Cli::try_parse_from(["certctx", "analyze", "x.json", "--frobnicate"]).is_err());
        // the extractor's sizing flags are mutually exclusive
        assert!(Cli::try_parse_from([
            "certctx", "extract", "--input", "a", "--out", "b", "--m", "4", "--h-min", "9",
        ])
        .is_err());
    }

    #[test]
    fn summary_serialization_round_trips() {
        let device = DeviceModel::new(0.93).unwrap();
        let mut cfg = ProtocolConfig::chsh(400, 0.5, 0.8, 6);
        cfg.level = 1;
        let t = run_protocol(&device, &cfg).unwrap();
        let summary = summarize_run(&t, &cfg, 0.93).unwrap();
        let text = serde_json::to_string_pretty(&summary).unwrap();
        let back: ProtocolSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back.c, summary.c);
        assert_eq!(back.decision, summary.decision);
        assert_eq!(back.test_counts, summary.test_counts);
        assert_eq!(back.e_hat_score, summary.e_hat_score);
        assert_eq!(back.entropy.h_min, summary.entropy.h_min);
        // the embedded ê analyzes to the same score and fraction
        let e = behaviour_from_file(&summary.e_hat.clone().unwrap(), 1e-9).unwrap();
        let report = analysis_report_for(&e, GameConvention::Or, cfg.level).unwrap();
        assert!((report.score - summary.e_hat_score.unwrap()).abs() < 1e-9);
        assert!((report.sf_level - summary.sf_level.unwrap()).abs() < 1e-9);
    }
}
