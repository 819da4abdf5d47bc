//! Moment-matrix relaxations of quantum membership (the NPA hierarchy).
//!
//! A bipartite binary behaviour is quantum iff some state and projectors
//! reproduce it; that set is intractable, but its level-ℓ outer relaxation
//! is a semidefinite program over a *moment matrix* Γ indexed by operator
//! words of length ≤ ℓ. This module builds those matrices and solves two
//! programs on them:
//!
//! * [`sf_level`] — the hierarchy analogue of the signalling fraction:
//!   the largest mass s of a part f ≤ e whose moments extend to a positive
//!   semidefinite Γ. `SF_ℓ = 1 − s*` is 0 exactly on level-ℓ members and
//!   grows as the hierarchy tightens.
//! * [`npa_max_score`] — the largest game score over the level-ℓ relaxation
//!   (a standard solver sanity check: CHSH at level 1 gives cos²(π/8)).
//!
//! The embedded solver is a self-contained first-order splitting method:
//! it alternates a cheap least-squares step in the word-moment variables
//! with projections onto the positive semidefinite cone (via a Jacobi
//! eigensolver) and onto the box constraints, with over-relaxation. No
//! external SDP dependency; the matrices here are at most ~90×90.

use crate::fractions::{FractionCertificate, FractionResult, SolverDiagnostics};
use crate::games::ContextualGame;
use crate::scenario::{Behaviour, MeasurementScenario, SubnormalizedBehaviour};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Operator words and monomial bases
// ---------------------------------------------------------------------------

/// A product of outcome-0 projectors, one word per party, each word reduced
/// (projector idempotence removes adjacent repeats; cross-party commutation
/// lets the A-word sit before the B-word).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub a_word: Vec<u8>,
    pub b_word: Vec<u8>,
}

impl Monomial {
    pub fn identity() -> Self {
        Self { a_word: Vec::new(), b_word: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.a_word.is_empty() && self.b_word.is_empty()
    }

    pub fn len(&self) -> usize {
        self.a_word.len() + self.b_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        for &x in &self.a_word {
            write!(f, "A{x}")?;
        }
        if !self.a_word.is_empty() && !self.b_word.is_empty() {
            write!(f, "·")?;
        }
        for &y in &self.b_word {
            write!(f, "B{y}")?;
        }
        Ok(())
    }
}

/// Collapse adjacent repeated letters (projector idempotence P² = P).
fn reduce_word(letters: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::new();
    for l in letters {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

/// All reduced words of exactly `len` letters over `alphabet` inputs,
/// lexicographically ordered.
fn words_of_length(alphabet: usize, len: usize) -> Vec<Vec<u8>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut words = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &words {
            for l in 0..alphabet as u8 {
                if w.last() != Some(&l) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        words = next;
    }
    words
}

/// The ordered monomial basis for a hierarchy level: all reduced products
/// with combined word length at most `level`. Index 0 is the identity;
/// after that, words are ordered by total length, then by A-word length
/// (longest first), then lexicographically.
#[derive(Debug, Clone)]
pub struct MonomialIndex {
    words: Vec<Monomial>,
    level: usize,
    inputs: usize,
}

impl MonomialIndex {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: usize) -> &Monomial {
        &self.words[i]
    }

    pub fn words(&self) -> &[Monomial] {
        &self.words
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Inputs per party in the generating scenario.
    pub fn inputs(&self) -> usize {
        self.inputs
    }
}

/// Hierarchy levels above this are rejected: the moment matrix dimension
/// and the dense solve cost grow too fast for the embedded solver.
pub const MAX_LEVEL: usize = 3;

/// Build the level-ℓ monomial basis for a bipartite binary scenario whose
/// contexts are the full input product (as produced by
/// [`MeasurementScenario::party_scenario`]).
pub fn build_monomials(scenario: &MeasurementScenario, level: usize) -> Result<MonomialIndex> {
    let inputs = bipartite_inputs(scenario)?;
    if level == 0 {
        return Err(Error::Domain(
            "level 0 is the plain no-signalling relaxation; use signalling_fraction".into(),
        ));
    }
    if level > MAX_LEVEL {
        return Err(Error::Resource(format!(
            "hierarchy level {level} exceeds the supported maximum {MAX_LEVEL}"
        )));
    }
    let mut words = Vec::new();
    for total in 0..=level {
        for a_len in (0..=total).rev() {
            let b_len = total - a_len;
            for a in words_of_length(inputs, a_len) {
                for b in words_of_length(inputs, b_len) {
                    words.push(Monomial { a_word: a.clone(), b_word: b });
                }
            }
        }
    }
    Ok(MonomialIndex { words, level, inputs })
}

/// Validate two parties, binary outcomes, full product context set; returns
/// the (common) number of inputs per party.
fn bipartite_inputs(scenario: &MeasurementScenario) -> Result<usize> {
    if !scenario.is_bipartite_binary() {
        return Err(Error::Unsupported(
            "moment-matrix relaxations need a two-party scenario with binary outcomes".into(),
        ));
    }
    let parties = scenario.parties().expect("bipartite scenario has party structure");
    let na = parties.inputs_per_party[0];
    let nb = parties.inputs_per_party[1];
    if na != nb {
        return Err(Error::Unsupported(format!(
            "parties have {na} and {nb} inputs; equal input counts are required here"
        )));
    }
    for x in 0..na {
        for y in 0..nb {
            if scenario.context_of_inputs(&[x, y]).is_none() {
                return Err(Error::Unsupported(format!(
                    "scenario is missing the ({x},{y}) input context"
                )));
            }
        }
    }
    Ok(na)
}

// ---------------------------------------------------------------------------
// Moment-matrix structure
// ---------------------------------------------------------------------------

/// The equality-class structure of a moment matrix: entry (i,j) holds the
/// moment of the reduced product wordᵢ† · wordⱼ, and all entries whose
/// products reduce to the same word (or its reverse — moments of Hermitian
/// words are real) share one class.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    basis: MonomialIndex,
    class_of: Vec<Vec<usize>>,
    representative: Vec<Monomial>,
    multiplicity: Vec<usize>,
}

impl MomentMatrix {
    /// Build the class structure over a monomial basis.
    pub fn new(basis: MonomialIndex) -> Self {
        let d = basis.len();
        let mut class_of = vec![vec![0usize; d]; d];
        let mut keys: std::collections::HashMap<Monomial, usize> = std::collections::HashMap::new();
        let mut representative = Vec::new();
        let mut multiplicity = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let key = product_key(basis.word(i), basis.word(j));
                let next = representative.len();
                let k = *keys.entry(key.clone()).or_insert_with(|| {
                    representative.push(key);
                    multiplicity.push(0);
                    next
                });
                class_of[i][j] = k;
                multiplicity[k] += 1;
            }
        }
        Self { basis, class_of, representative, multiplicity }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n_classes(&self) -> usize {
        self.representative.len()
    }

    pub fn basis(&self) -> &MonomialIndex {
        &self.basis
    }

    pub fn class_of(&self, i: usize, j: usize) -> usize {
        self.class_of[i][j]
    }

    /// Number of matrix positions carrying each class.
    pub fn multiplicity(&self, k: usize) -> usize {
        self.multiplicity[k]
    }

    /// Canonical reduced word of a class.
    pub fn class_word(&self, k: usize) -> &Monomial {
        &self.representative[k]
    }

    /// Class holding the moment of the given reduced word pair, if it
    /// occurs anywhere in the matrix.
    pub fn class_of_words(&self, a_word: &[u8], b_word: &[u8]) -> Option<usize> {
        let key = canonical_key(reduce_word(a_word.iter().copied()), reduce_word(b_word.iter().copied()));
        self.representative.iter().position(|m| *m == key)
    }

    /// Materialize the symmetric matrix for class values `gamma`.
    pub fn materialize(&self, gamma: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = gamma[self.class_of[i][j]];
            }
        }
        m
    }
}

/// Reduced word of wordᵢ† · wordⱼ, canonicalized under reversal.
fn product_key(row: &Monomial, col: &Monomial) -> Monomial {
    let a = reduce_word(row.a_word.iter().rev().chain(col.a_word.iter()).copied());
    let b = reduce_word(row.b_word.iter().rev().chain(col.b_word.iter()).copied());
    canonical_key(a, b)
}

/// A word and its reversal have equal (real) moments; keep the lexicographic
/// minimum of the two as the class key.
fn canonical_key(a: Vec<u8>, b: Vec<u8>) -> Monomial {
    let fwd = Monomial { a_word: a, b_word: b };
    let rev = Monomial {
        a_word: fwd.a_word.iter().rev().copied().collect(),
        b_word: fwd.b_word.iter().rev().copied().collect(),
    };
    fwd.min(rev)
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Off-diagonal Frobenius mass below which the Jacobi sweep stops.
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 50;

/// Eigen-decompose a symmetric matrix by cyclic Jacobi rotations. Returns
/// (eigenvalues, eigenvector columns); `a ≈ V diag(λ) Vᵀ`.
pub(crate) fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * m[p][q] * m[p][q])
            .sum();
        if off.sqrt() < JACOBI_TOL {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for j in 0..d {
                    let (mpj, mqj) = (m[p][j], m[q][j]);
                    m[p][j] = c * mpj - s * mqj;
                    m[q][j] = s * mpj + c * mqj;
                }
                for i in 0..d {
                    let (mip, miq) = (m[i][p], m[i][q]);
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for row in v.iter_mut() {
                    let (vip, viq) = (row[p], row[q]);
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    ((0..d).map(|i| m[i][i]).collect(), v)
}

/// Project a symmetric matrix onto the positive semidefinite cone (zero out
/// negative eigenvalues).
fn psd_project(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    let (lambda, v) = jacobi_eigen(a);
    let mut out = vec![vec![0.0; d]; d];
    for (k, &l) in lambda.iter().enumerate() {
        if l > 0.0 {
            for i in 0..d {
                let w = l * v[i][k];
                if w != 0.0 {
                    for j in 0..d {
                        out[i][j] += w * v[j][k];
                    }
                }
            }
        }
    }
    // exact symmetry guards against rounding drift across iterations
    for i in 0..d {
        for j in (i + 1)..d {
            let s = 0.5 * (out[i][j] + out[j][i]);
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The semidefinite program and its splitting solver
// ---------------------------------------------------------------------------

/// An interval constraint `lo ≤ coeffs·γ ≤ hi` on the class variables.
#[derive(Debug, Clone)]
pub struct BoxRow {
    pub coeffs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

/// Maximize `objective · γ` over class variables γ whose materialized
/// moment matrix is positive semidefinite and whose box rows hold.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub structure: MomentMatrix,
    pub objective: Vec<f64>,
    pub boxes: Vec<BoxRow>,
}

/// Converged solver output.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Class variable values.
    pub gamma: Vec<f64>,
    /// The positive semidefinite iterate (the moment matrix witness).
    pub matrix: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Max-norm of the worst constraint violation at exit.
    pub residual: f64,
}

/// Residual level at which the splitting iteration is declared converged.
/// One decade below the 1e-6 certificate tolerances quoted on results.
const SDP_TOL: f64 = 1e-7;
/// Iteration cap; hitting it is reported as a solver failure, never as a
/// silently wrong number.
const SDP_MAX_ITERS: usize = 200_000;
/// Over-relaxation factor (1.5–1.8 speeds up splitting methods).
const SDP_ALPHA: f64 = 1.6;
/// Penalty rebalancing: when one residual lags the other by this factor,
/// the penalty doubles or halves.
const RHO_BALANCE: f64 = 10.0;

/// Solve an [`SdpProblem`] with over-relaxed ADMM splitting: a diagonal-plus-
/// low-rank least-squares step in γ, a PSD projection, and a box clamp.
pub fn solve_sdp(p: &SdpProblem) -> Result<SdpSolution> {
    let mm = &p.structure;
    let d = mm.dim();
    let k = mm.n_classes();
    if p.objective.len() != k {
        return Err(Error::Schema(format!(
            "objective has {} entries for {k} classes",
            p.objective.len()
        )));
    }
    for row in &p.boxes {
        if row.coeffs.len() != k {
            return Err(Error::Schema("box row width does not match class count".into()));
        }
        if !(row.lo <= row.hi) {
            return Err(Error::Schema(format!("empty box [{}, {}]", row.lo, row.hi)));
        }
    }

    // Normal-matrix H = diag(multiplicity) + BᵀB, factored once.
    let mut h = vec![vec![0.0; k]; k];
    for i in 0..k {
        h[i][i] = mm.multiplicity(i) as f64;
    }
    for row in &p.boxes {
        for a in 0..k {
            if row.coeffs[a] != 0.0 {
                for b in 0..k {
                    h[a][b] += row.coeffs[a] * row.coeffs[b];
                }
            }
        }
    }
    let chol = cholesky(&h)?;

    let n_box = p.boxes.len();
    let mut x = vec![vec![0.0; d]; d];
    let mut u = vec![vec![0.0; d]; d];
    let mut t: Vec<f64> = p.boxes.iter().map(|r| 0.0f64.clamp(r.lo, r.hi)).collect();
    let mut v = vec![0.0; n_box];
    let mut rho = 1.0;
    let mut gamma = vec![0.0; k];

    for iter in 1..=SDP_MAX_ITERS {
        // γ-step: (MᵀM + BᵀB) γ = c/ρ + Mᵀ(X−U) + Bᵀ(t−v)
        let mut rhs: Vec<f64> = p.objective.iter().map(|c| c / rho).collect();
        for i in 0..d {
            for j in 0..d {
                rhs[mm.class_of(i, j)] += x[i][j] - u[i][j];
            }
        }
        for (r, row) in p.boxes.iter().enumerate() {
            let s = t[r] - v[r];
            if s != 0.0 {
                for a in 0..k {
                    if row.coeffs[a] != 0.0 {
                        rhs[a] += row.coeffs[a] * s;
                    }
                }
            }
        }
        gamma = chol_solve(&chol, &rhs);

        // X-step with over-relaxation, then the scaled dual update
        let g = mm.materialize(&gamma);
        let x_prev = x.clone();
        let mut arg = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                let relaxed = SDP_ALPHA * g[i][j] + (1.0 - SDP_ALPHA) * x_prev[i][j];
                arg[i][j] = relaxed + u[i][j];
            }
        }
        x = psd_project(&arg);
        for i in 0..d {
            for j in 0..d {
                u[i][j] = arg[i][j] - x[i][j];
            }
        }

        // t-step (box clamp) with the same over-relaxation
        let w: Vec<f64> = p
            .boxes
            .iter()
            .map(|row| row.coeffs.iter().zip(&gamma).map(|(c, g)| c * g).sum())
            .collect();
        let t_prev = t.clone();
        for r in 0..n_box {
            let relaxed = SDP_ALPHA * w[r] + (1.0 - SDP_ALPHA) * t_prev[r];
            let arg = relaxed + v[r];
            t[r] = arg.clamp(p.boxes[r].lo, p.boxes[r].hi);
            v[r] = arg - t[r];
        }

        // residuals: worst primal gap vs. worst dual step
        let mut primal: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                primal = primal.max((g[i][j] - x[i][j]).abs());
            }
        }
        for r in 0..n_box {
            primal = primal.max((w[r] - t[r]).abs());
        }
        let mut dual: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                dual = dual.max((x[i][j] - x_prev[i][j]).abs());
            }
        }
        for r in 0..n_box {
            dual = dual.max((t[r] - t_prev[r]).abs());
        }
        dual *= rho;

        if primal < SDP_TOL && dual < SDP_TOL {
            return Ok(SdpSolution { gamma, matrix: x, iterations: iter, residual: primal.max(dual) });
        }

        if iter % 100 == 0 {
            if primal > RHO_BALANCE * dual && rho < 1e4 {
                rho *= 2.0;
                for row in u.iter_mut() {
                    for e in row.iter_mut() {
                        *e *= 0.5;
                    }
                }
                for e in v.iter_mut() {
                    *e *= 0.5;
                }
            } else if dual > RHO_BALANCE * primal && rho > 1e-4 {
                rho *= 0.5;
                for row in u.iter_mut() {
                    for e in row.iter_mut() {
                        *e *= 2.0;
                    }
                }
                for e in v.iter_mut() {
                    *e *= 2.0;
                }
            }
        }
    }
    let _ = gamma;
    Err(Error::SolverFailure(format!(
        "splitting solver hit the {SDP_MAX_ITERS}-iteration cap before reaching residual {SDP_TOL:.0e}"
    )))
}

/// Dense Cholesky factorization of a symmetric positive definite matrix.
fn cholesky(h: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = h.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i][j];
            for p in 0..j {
                s -= l[i][p] * l[j][p];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::SolverFailure(
                        "normal matrix lost positive definiteness".into(),
                    ));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solve L Lᵀ x = b given the Cholesky factor L.
fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[i][j] * y[j];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= l[j][i] * x[j];
        }
        x[i] = s / l[i][i];
    }
    x
}

// ---------------------------------------------------------------------------
// Table read-off and the two front-end programs
// ---------------------------------------------------------------------------

/// The four class indices a context's table is read from.
struct ReadoffClasses {
    id: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    ab: Vec<Vec<usize>>,
}

fn readoff_classes(mm: &MomentMatrix, inputs: usize) -> ReadoffClasses {
    let id = mm.class_of_words(&[], &[]).expect("identity class exists");
    let a: Vec<usize> = (0..inputs)
        .map(|x| mm.class_of_words(&[x as u8], &[]).expect("single-A class exists"))
        .collect();
    let b: Vec<usize> = (0..inputs)
        .map(|y| mm.class_of_words(&[], &[y as u8]).expect("single-B class exists"))
        .collect();
    let ab: Vec<Vec<usize>> = (0..inputs)
        .map(|x| {
            (0..inputs)
                .map(|y| mm.class_of_words(&[x as u8], &[y as u8]).expect("A·B class exists"))
                .collect()
        })
        .collect();
    ReadoffClasses { id, a, b, ab }
}

/// Coefficients (over classes) of the table entry p(a,b|x,y) in terms of
/// projector moments: p(0,0) = ⟨AB⟩, p(0,1) = ⟨A⟩−⟨AB⟩, p(1,0) = ⟨B⟩−⟨AB⟩,
/// p(1,1) = ⟨1⟩−⟨A⟩−⟨B⟩+⟨AB⟩.
fn readoff_row(rc: &ReadoffClasses, k: usize, x: usize, y: usize, a: usize, b: usize) -> Vec<f64> {
    let mut row = vec![0.0; k];
    match (a, b) {
        (0, 0) => {
            row[rc.ab[x][y]] += 1.0;
        }
        (0, 1) => {
            row[rc.a[x]] += 1.0;
            row[rc.ab[x][y]] -= 1.0;
        }
        (1, 0) => {
            row[rc.b[y]] += 1.0;
            row[rc.ab[x][y]] -= 1.0;
        }
        (1, 1) => {
            row[rc.id] += 1.0;
            row[rc.a[x]] -= 1.0;
            row[rc.b[y]] -= 1.0;
            row[rc.ab[x][y]] += 1.0;
        }
        _ => unreachable!("outcomes are binary"),
    }
    row
}

/// Largest mass s of a part f ≤ e whose moments extend to a level-ℓ moment
/// matrix; the result value is `SF_ℓ = 1 − s*`. The certificate carries the
/// part, the matrix witness, and its smallest eigenvalue.
pub fn sf_level(e: &Behaviour, level: usize) -> Result<FractionResult> {
    let scenario = e.scenario();
    let inputs = bipartite_inputs(scenario)?;
    let mm = MomentMatrix::new(build_monomials(scenario, level)?);
    let k = mm.n_classes();
    let rc = readoff_classes(&mm, inputs);

    let mut boxes = Vec::new();
    for x in 0..inputs {
        for y in 0..inputs {
            let c = scenario.context_of_inputs(&[x, y]).expect("validated complete");
            for a in 0..2 {
                for b in 0..2 {
                    let idx = scenario.tuple_to_index(c, &[a, b]);
                    boxes.push(BoxRow {
                        coeffs: readoff_row(&rc, k, x, y, a, b),
                        lo: 0.0,
                        hi: e.prob(c, idx),
                    });
                }
            }
        }
    }
    let mut objective = vec![0.0; k];
    objective[rc.id] = 1.0;

    let solution = solve_sdp(&SdpProblem { structure: mm.clone(), objective, boxes })?;
    let s = solution.gamma[rc.id];

    let tables: Vec<Vec<f64>> = (0..scenario.n_contexts())
        .map(|c| {
            let xy = scenario.inputs_of_context(c).expect("party scenario");
            let mut t = vec![0.0; scenario.table_len(c)];
            for a in 0..2 {
                for b in 0..2 {
                    let row = readoff_row(&rc, k, xy[0], xy[1], a, b);
                    let idx = scenario.tuple_to_index(c, &[a, b]);
                    t[idx] = row.iter().zip(&solution.gamma).map(|(r, g)| r * g).sum();
                }
            }
            t
        })
        .collect();
    let part = SubnormalizedBehaviour::from_tables(scenario.clone(), tables, 1e-6)?;
    let (eigs, _) = jacobi_eigen(&solution.matrix);
    let min_eigenvalue = eigs.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(FractionResult {
        value: (1.0 - s).clamp(0.0, 1.0),
        certificate: FractionCertificate::NpaMember {
            part,
            moment_matrix: solution.matrix,
            min_eigenvalue,
        },
        diagnostics: SolverDiagnostics {
            iterations: solution.iterations,
            residual: solution.residual,
        },
    })
}

/// Largest game score over normalized level-ℓ moment-matrix behaviours.
/// This relaxes the quantum set from outside: at level 1 the CHSH game
/// already scores cos²(π/8), the true quantum optimum.
pub fn npa_max_score(g: &ContextualGame, level: usize) -> Result<f64> {
    let scenario = g.scenario();
    let inputs = bipartite_inputs(scenario)?;
    let mm = MomentMatrix::new(build_monomials(scenario, level)?);
    let k = mm.n_classes();
    let rc = readoff_classes(&mm, inputs);

    let mut boxes = Vec::new();
    let mut objective = vec![0.0; k];
    for x in 0..inputs {
        for y in 0..inputs {
            let c = scenario.context_of_inputs(&[x, y]).expect("validated complete");
            for a in 0..2 {
                for b in 0..2 {
                    let idx = scenario.tuple_to_index(c, &[a, b]);
                    let row = readoff_row(&rc, k, x, y, a, b);
                    if g.wins(c, idx) {
                        let p = g.input_dist()[c];
                        for (o, r) in objective.iter_mut().zip(&row) {
                            *o += p * r;
                        }
                    }
                    boxes.push(BoxRow { coeffs: row, lo: 0.0, hi: 1.0 });
                }
            }
        }
    }
    // normalized behaviour: the identity moment is exactly 1
    let mut pin = vec![0.0; k];
    pin[rc.id] = 1.0;
    boxes.push(BoxRow { coeffs: pin, lo: 1.0, hi: 1.0 });

    let solution = solve_sdp(&SdpProblem { structure: mm, objective: objective.clone(), boxes })?;
    let value: f64 = objective.iter().zip(&solution.gamma).map(|(c, g)| c * g).sum();
    Ok(value.clamp(0.0, 1.0))
}

/// Test oracle for [`sf_level`]: bisection on the mass s, deciding each
/// candidate with a zero-objective feasibility solve. Far slower than the
/// single-solve front end; kept public for cross-checks and diagnostics.
pub fn sf_level_bisection(e: &Behaviour, level: usize, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("bisection tolerance {tol} must be positive")));
    }
    let scenario = e.scenario();
    let inputs = bipartite_inputs(scenario)?;
    let mm = MomentMatrix::new(build_monomials(scenario, level)?);
    let k = mm.n_classes();
    let rc = readoff_classes(&mm, inputs);

    let feasible = |mass: f64| -> Result<bool> {
        let mut boxes = Vec::new();
        for x in 0..inputs {
            for y in 0..inputs {
                let c = scenario.context_of_inputs(&[x, y]).expect("validated complete");
                for a in 0..2 {
                    for b in 0..2 {
                        let idx = scenario.tuple_to_index(c, &[a, b]);
                        boxes.push(BoxRow {
                            coeffs: readoff_row(&rc, k, x, y, a, b),
                            lo: 0.0,
                            hi: e.prob(c, idx),
                        });
                    }
                }
            }
        }
        let mut pin = vec![0.0; k];
        pin[rc.id] = 1.0;
        boxes.push(BoxRow { coeffs: pin, lo: mass, hi: mass });
        match solve_sdp(&SdpProblem { structure: mm.clone(), objective: vec![0.0; k], boxes }) {
            Ok(_) => Ok(true),
            // the splitting iteration stalls exactly when no feasible point
            // exists; that is the oracle's "no"
            Err(Error::SolverFailure(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if feasible(hi)? {
        return Ok(0.0);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((1.0 - lo).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractions::signalling_fraction;
    use crate::games::{chsh_game, chsh_game_or, ContextualGame};
    use crate::scenario::MeasurementScenario;

    // -- monomials and classes ----------------------------------------------

    #[test]
    fn monomial_counts_match_exhaustive_enumeration() {
        let s = MeasurementScenario::chsh();
        assert_eq!(build_monomials(&s, 1).unwrap().len(), 5);
        assert_eq!(build_monomials(&s, 2).unwrap().len(), 13);
        assert_eq!(build_monomials(&s, 3).unwrap().len(), 25);

        // independent oracle: normal-form every string over the four letters
        // {A0,A1,B0,B1} of length ≤ ℓ (sort B after A, collapse repeats) and
        // count distinct results
        for level in 1..=3usize {
            let mut seen = std::collections::HashSet::new();
            let mut all: Vec<Vec<u8>> = vec![Vec::new()];
            let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
            for _ in 0..level {
                let mut next = Vec::new();
                for s in &frontier {
                    for l in 0..4u8 {
                        let mut v = s.clone();
                        v.push(l);
                        next.push(v);
                    }
                }
                all.extend(next.iter().cloned());
                frontier = next;
            }
            for s in all {
                let a = reduce_word(s.iter().copied().filter(|&l| l < 2));
                let b = reduce_word(s.iter().copied().filter(|&l| l >= 2).map(|l| l - 2));
                // commuting B past A may cancel fewer letters than the
                // original string had, pushing the split word above the
                // level: such strings are not level-ℓ monomials
                if a.len() + b.len() <= level {
                    seen.insert((a, b));
                }
            }
            assert_eq!(
                build_monomials(&s, level).unwrap().len(),
                seen.len(),
                "level {level}"
            );
        }
    }

    #[test]
    fn index_zero_is_identity_and_display_reads_naturally() {
        let s = MeasurementScenario::chsh();
        let idx = build_monomials(&s, 2).unwrap();
        assert!(idx.word(0).is_identity());
        assert_eq!(idx.word(0).to_string(), "1");
        let shown: Vec<String> = idx.words().iter().map(|m| m.to_string()).collect();
        assert!(shown.contains(&"A0".to_string()));
        assert!(shown.contains(&"A0·B1".to_string()));
        assert!(shown.contains(&"A0A1".to_string()));
    }

    #[test]
    fn level_guards() {
        let s = MeasurementScenario::chsh();
        assert!(matches!(build_monomials(&s, 0), Err(crate::Error::Domain(_))));
        assert!(matches!(build_monomials(&s, 4), Err(crate::Error::Resource(_))));
        let triangle = MeasurementScenario::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![2, 2, 2],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        assert!(matches!(
            build_monomials(&triangle, 1),
            Err(crate::Error::Unsupported(_))
        ));
    }

    #[test]
    fn class_map_is_symmetric_and_respects_idempotence() {
        let s = MeasurementScenario::chsh();
        let mm = MomentMatrix::new(build_monomials(&s, 2).unwrap());
        let d = mm.dim();
        for i in 0..d {
            for j in 0..d {
                assert_eq!(mm.class_of(i, j), mm.class_of(j, i));
            }
        }
        // ⟨m† m⟩ = ⟨m⟩ for single projectors: the diagonal entry of A_x is
        // in the same class as the first-row entry
        for i in 1..5 {
            assert_eq!(mm.class_of(i, i), mm.class_of(0, i));
        }
        // multiplicities cover the whole matrix
        let total: usize = (0..mm.n_classes()).map(|c| mm.multiplicity(c)).sum();
        assert_eq!(total, d * d);
    }

    // -- eigensolver ----------------------------------------------------------

    #[test]
    fn jacobi_reconstructs_random_symmetric_matrices() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [2usize, 5, 8] {
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..=i {
                    let v = next();
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
            let (lambda, v) = jacobi_eigen(&a);
            for i in 0..n {
                for j in 0..n {
                    let recon: f64 = (0..n).map(|k| v[i][k] * lambda[k] * v[j][k]).sum();
                    assert!((recon - a[i][j]).abs() < 1e-10);
                    let dot: f64 = (0..n).map(|k| v[k][i] * v[k][j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn psd_projection_zeroes_negative_modes() {
        let a = vec![vec![1.0, 0.0], vec![0.0, -1.0]];
        let p = psd_project(&a);
        assert!((p[0][0] - 1.0).abs() < 1e-12);
        assert!(p[1][1].abs() < 1e-12);
        assert!(p[0][1].abs() < 1e-12);
    }

    // -- behaviours used below -------------------------------------------------

    fn tsirelson_behaviour() -> Behaviour {
        let s = MeasurementScenario::chsh();
        let hi = 0.25 + std::f64::consts::SQRT_2 / 8.0;
        let lo = 0.25 - std::f64::consts::SQRT_2 / 8.0;
        Behaviour::from_tables(
            s,
            vec![
                vec![hi, lo, lo, hi],
                vec![hi, lo, lo, hi],
                vec![hi, lo, lo, hi],
                vec![lo, hi, hi, lo],
            ],
        )
        .unwrap()
    }

    fn pr_box() -> Behaviour {
        let s = MeasurementScenario::chsh();
        Behaviour::from_tables(
            s,
            vec![
                vec![0.5, 0.0, 0.0, 0.5],
                vec![0.5, 0.0, 0.0, 0.5],
                vec![0.5, 0.0, 0.0, 0.5],
                vec![0.0, 0.5, 0.5, 0.0],
            ],
        )
        .unwrap()
    }

    fn random_behaviour(seed: u64) -> Behaviour {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let s = MeasurementScenario::chsh();
        let tables = (0..4)
            .map(|_| {
                let mut t: Vec<f64> = (0..4).map(|_| next() + 1e-3).collect();
                let sum: f64 = t.iter().sum();
                for v in &mut t {
                    *v /= sum;
                }
                t
            })
            .collect();
        Behaviour::from_tables(s, tables).unwrap()
    }

    // -- sf_level ---------------------------------------------------------------

    #[test]
    fn quantum_behaviours_sit_inside_every_level() {
        let e = tsirelson_behaviour();
        for level in 1..=2 {
            let r = sf_level(&e, level).unwrap();
            assert!(r.value <= 1e-5, "level {level}: SF = {:.2e}", r.value);
        }
        let u = Behaviour::uniform(MeasurementScenario::chsh());
        let r = sf_level(&u, 1).unwrap();
        assert!(r.value <= 1e-6, "uniform: SF = {:.2e}", r.value);
    }

    #[test]
    fn pr_box_is_outside_level_one() {
        // every supported cell of the PR box is a winning cell, so any
        // positive-mass part would normalize to a perfect-scoring level-1
        // member — impossible, since level 1 caps the score at cos²(π/8).
        // The whole box is therefore signalling at this level: SF₁ = 1.
        let r = sf_level(&pr_box(), 1).unwrap();
        assert!(r.value > 1e-3, "SF₁(PR) = {:.3e}", r.value);
        assert!((r.value - 1.0).abs() < 1e-5, "SF₁(PR) = {}", r.value);
    }

    /// 90% PR box + 10% uniform noise: outside level 1 but with a sizeable
    /// member part, so the mass variable lands strictly inside (0,1).
    fn noisy_pr() -> Behaviour {
        let u = Behaviour::uniform(MeasurementScenario::chsh());
        crate::scenario::mix(&[(0.9, &pr_box()), (0.1, &u)]).unwrap()
    }

    #[test]
    fn bisection_oracle_agrees_with_the_direct_solve() {
        for e in [pr_box(), noisy_pr()] {
            let direct = sf_level(&e, 1).unwrap().value;
            let bisected = sf_level_bisection(&e, 1, 1e-3).unwrap();
            assert!(
                (direct - bisected).abs() < 3e-3,
                "direct {direct} vs bisection {bisected}"
            );
        }
    }

    #[test]
    fn noisy_pr_box_interpolates_strictly() {
        // closed form: parts s·(t·PR + (1−t)·uniform) are level-1 members up
        // to t = 1/√2 (correlator √2/2 saturates the quantum boundary), and
        // the losing cells cap the mass at s = (1−0.9)/(1−1/√2), so
        // SF₁ = 1 − 0.1/(1 − 1/√2) ≈ 0.65858
        let expect = 1.0 - 0.1 / (1.0 - std::f64::consts::FRAC_1_SQRT_2);
        let r = sf_level(&noisy_pr(), 1).unwrap();
        assert!((r.value - expect).abs() < 1e-4, "SF₁ = {} vs {expect}", r.value);
    }

    #[test]
    fn hierarchy_is_monotone_and_dominates_the_lp_fraction() {
        for seed in [3u64, 17, 4242] {
            let e = random_behaviour(seed);
            let lp = signalling_fraction(&e).unwrap().value;
            let l1 = sf_level(&e, 1).unwrap().value;
            let l2 = sf_level(&e, 2).unwrap().value;
            assert!(l1 >= lp - 1e-6, "seed {seed}: SF₁ {l1} < LP {lp}");
            assert!(l2 >= l1 - 1e-6, "seed {seed}: SF₂ {l2} < SF₁ {l1}");
        }
    }

    #[test]
    fn maximally_signalling_behaviour_has_unit_fraction() {
        let s = MeasurementScenario::chsh();
        let tables = (0..4)
            .map(|c| {
                let (x, y) = (c >> 1, c & 1);
                let mut t = vec![0.0; 4];
                t[(y << 1) | x] = 1.0;
                t
            })
            .collect();
        let e = Behaviour::from_tables(s, tables).unwrap();
        let r = sf_level(&e, 1).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5, "SF₁ = {}", r.value);
    }

    #[test]
    fn certificates_verify_arithmetically() {
        let e = noisy_pr();
        let r = sf_level(&e, 1).unwrap();
        let FractionCertificate::NpaMember { part, moment_matrix, min_eigenvalue } =
            &r.certificate
        else {
            panic!("wrong certificate kind");
        };
        assert!(*min_eigenvalue >= -1e-7);
        let s = part.mass();
        assert!((s - (1.0 - r.value)).abs() < 1e-5);
        for c in 0..4 {
            for idx in 0..4 {
                assert!(part.tables()[c][idx] <= e.prob(c, idx) + 1e-7);
            }
            let mass: f64 = part.tables()[c].iter().sum();
            assert!((mass - s).abs() < 1e-6);
        }
        let d = moment_matrix.len();
        for i in 0..d {
            for j in 0..d {
                assert!((moment_matrix[i][j] - moment_matrix[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let e = pr_box();
        let a = sf_level(&e, 1).unwrap();
        let b = sf_level(&e, 1).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.diagnostics.iterations, b.diagnostics.iterations);
    }

    // -- npa_max_score -----------------------------------------------------------

    #[test]
    fn chsh_level_one_recovers_the_quantum_optimum() {
        let expect = (std::f64::consts::PI / 8.0).cos().powi(2);
        for game in [chsh_game(), chsh_game_or()] {
            let v = npa_max_score(&game, 1).unwrap();
            assert!((v - expect).abs() < 1e-4, "score {v} vs cos²(π/8) = {expect}");
        }
    }

    #[test]
    fn trivial_games_score_their_extremes() {
        let s = MeasurementScenario::chsh();
        let all_win = ContextualGame::new(
            s.clone(),
            vec![0.25; 4],
            (0..4).map(|c| vec![true; s.table_len(c)]).collect(),
        )
        .unwrap();
        assert!((npa_max_score(&all_win, 1).unwrap() - 1.0).abs() < 1e-6);
        let all_lose = ContextualGame::new(
            s.clone(),
            vec![0.25; 4],
            (0..4).map(|c| vec![false; s.table_len(c)]).collect(),
        )
        .unwrap();
        assert!(npa_max_score(&all_lose, 1).unwrap() < 1e-6);
    }

    #[test]
    fn relaxed_score_sits_between_classical_and_algebraic_bounds() {
        let v = npa_max_score(&chsh_game(), 2).unwrap();
        assert!(v >= 0.75 - 1e-6);
        assert!(v <= 1.0);
        // level 2 can only tighten level 1
        let v1 = npa_max_score(&chsh_game(), 1).unwrap();
        assert!(v <= v1 + 1e-5, "level 2 score {v} above level 1 {v1}");
    }
}
