//! Contextuality analysis and certified randomness for CHSH-type scenarios.
//!
//! The crate models measurement scenarios and behaviours (per-context outcome
//! distributions), scores them against contextual games, quantifies how far a
//! behaviour is from the noncontextual and non-signalling polytopes (linear
//! programs) and from the level-ℓ NPA relaxation of the quantum set
//! (semidefinite programs), simulates a spot-checking randomness-generation
//! protocol against an analytic photonic device model, evaluates the
//! min-entropy bound that holds under bounded signalling, and extracts
//! near-uniform bits with a Toeplitz hash.
//!
//! # Layout
//!
//! | module        | contents |
//! |---------------|----------|
//! | [`scenario`]  | measurement scenarios, behaviours, global assignments, mixing |
//! | [`games`]     | contextual games, CHSH score/correlators, consistency bounds |
//! | [`fractions`] | contextual & signalling fractions, budget-constrained scores (LP) |
//! | [`npa`]       | NPA moment matrices, SF_ℓ and relaxed game maxima (SDP) |
//! | [`photonic`]  | interferometer behaviour model, voltage→phase maps, drift |
//! | [`protocol`]  | spot-checking protocol runs, abort rule, min-entropy bound |
//! | [`extractor`] | Toeplitz hashing over GF(2), output sizing, monobit check |
//! | [`cli`]       | the `certctx` command-line surface binding everything |
//!
//! All core types are immutable values and all operations are pure functions,
//! so everything here is safe to call from concurrent contexts. The only
//! stateful object is the RNG stream inside a protocol run, which is owned by
//! that run.
//!
//! # Runnable examples
//!
//! Each major capability has a self-contained example under `examples/`:
//!
//! ```text
//! cargo run --example validate_and_score    # load/validate behaviours, score both CHSH conventions
//! cargo run --example contextual_fraction   # CF linear programs vs. the facet oracle
//! cargo run --example signalling_fraction   # SF LP, budget-constrained scores, Proposition-style sweep
//! cargo run --example npa_hierarchy         # monomial counts, SF_ℓ levels, relaxed CHSH maximum
//! cargo run --example photonic_device       # phases → behaviour, voltage maps, drift and recalibration
//! cargo run --example protocol_simulation   # seeded protocol run, abort rule, summary round-trip
//! cargo run --example entropy_bounds        # π/Δ decomposition, χ sweeps, ε optimization
//! cargo run --example toeplitz_extraction   # extractor on explicit matrices, linearity, monobit
//! cargo run --example chsh_hom_tradeoff     # I_CHSH as a function of HOM visibility
//! cargo run --example certified_pipeline    # simulate → bound → extract end to end
//! ```
//!
//! The same pipeline is scriptable through the `certctx` binary; see the
//! [`cli`] module for subcommands, file formats, and exit codes.

pub mod cli;
pub mod extractor;
pub mod fractions;
pub mod games;
pub mod npa;
pub mod photonic;
pub mod protocol;
pub mod scenario;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map one-to-one onto the failure classes the operations document:
/// structural/schema problems, domain violations (arguments outside their
/// contract), resource guards, unsupported parameter combinations, and
/// explicit solver statuses. Solvers never return a silent number on failure.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data does not match the expected structure (missing tables,
    /// dimension mismatches, malformed files).
    #[error("schema error: {0}")]
    Schema(String),

    /// An argument violates the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A guard against unreasonable resource usage fired.
    #[error("resource error: {0}")]
    Resource(String),

    /// The requested combination is valid but not handled by this operation;
    /// the message points at the supported alternative.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A linear program was detected to be infeasible.
    #[error("LP infeasible: {0}")]
    Infeasible(String),

    /// A linear program was detected to be unbounded.
    #[error("LP unbounded: {0}")]
    Unbounded(String),

    /// An iterative solver hit its iteration cap before reaching its
    /// residual tolerance. Carries the residuals at the point of failure.
    #[error("solver did not converge: {0}")]
    SolverFailure(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
