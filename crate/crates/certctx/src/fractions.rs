//! Linear programs for contextuality and signalling measures.
//!
//! Three solvers live here, all built on one embedded dense two-phase
//! simplex with Bland's anti-cycling rule (the problems are tiny — tens of
//! variables — and determinism matters more than speed):
//!
//! * [`contextual_fraction`] — the largest weight of a convex combination of
//!   deterministic global assignments that fits under a behaviour; CF is one
//!   minus that weight.
//! * [`signalling_fraction`] — the largest mass λ of a non-signalling part
//!   f ≤ e; SF is 1 − λ.
//! * [`distinguished_context_score`] — the best score a behaviour can earn
//!   when it must answer one distinguished context deterministically and its
//!   signalling fraction is capped by a budget σ.
//!
//! The solvers return certificates (the optimal decomposition) so callers
//! can re-verify every claimed value by direct arithmetic.

use crate::games::ContextualGame;
use crate::scenario::{
    marginalize, Behaviour, GlobalAssignment, MeasurementScenario, SubnormalizedBehaviour,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Linear programs
// ---------------------------------------------------------------------------

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// One linear constraint: `coeffs · x  (≤|=|≥)  rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A dense LP in the form: maximize `objective · x` subject to the
/// constraints, with every variable bounded below by 0.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, objective: vec![0.0; n_vars], constraints: Vec::new() }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }
}

/// Optimal value and point of a solved LP.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const ITERATION_FACTOR: usize = 200;

/// Solve a (caller-guaranteed bounded, possibly infeasible) LP with a dense
/// two-phase simplex under Bland's rule. Deterministic: identical input
/// yields an identical solution, including on degenerate optima.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.n_vars;
    let m = lp.constraints.len();
    for c in &lp.constraints {
        if c.coeffs.len() != n {
            return Err(Error::Schema(format!(
                "constraint has {} coefficients, LP has {n} variables",
                c.coeffs.len()
            )));
        }
    }
    if lp.objective.len() != n {
        return Err(Error::Schema("objective length does not match variable count".into()));
    }

    // Normalize to rhs ≥ 0, then append slack/surplus and artificial columns.
    let mut senses = Vec::with_capacity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let (mut coeffs, mut sense, mut b) = (c.coeffs.clone(), c.sense, c.rhs);
        if b < 0.0 {
            for v in &mut coeffs {
                *v = -*v;
            }
            b = -b;
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Eq => Sense::Eq,
                Sense::Ge => Sense::Le,
            };
        }
        senses.push(sense);
        rows.push(coeffs);
        rhs.push(b);
    }

    let n_slack = senses.iter().filter(|s| !matches!(s, Sense::Eq)).count();
    let n_art = senses.iter().filter(|s| !matches!(s, Sense::Le)).count();
    let total = n + n_slack + n_art;
    let mut basis = vec![0usize; m];
    {
        let mut slack_col = n;
        let mut art_col = n + n_slack;
        for (i, sense) in senses.iter().enumerate() {
            for row in rows.iter_mut() {
                row.resize(total, 0.0);
            }
            match sense {
                Sense::Le => {
                    rows[i][slack_col] = 1.0;
                    basis[i] = slack_col;
                    slack_col += 1;
                }
                Sense::Ge => {
                    rows[i][slack_col] = -1.0;
                    slack_col += 1;
                    rows[i][art_col] = 1.0;
                    basis[i] = art_col;
                    art_col += 1;
                }
                Sense::Eq => {
                    rows[i][art_col] = 1.0;
                    basis[i] = art_col;
                    art_col += 1;
                }
            }
        }
        for row in rows.iter_mut() {
            row.resize(total, 0.0);
        }
    }

    let mut iterations = 0;

    // Phase 1: maximize −Σ artificials; feasible iff the optimum is 0.
    if n_art > 0 {
        let mut costs = vec![0.0; total];
        for c in costs.iter_mut().skip(n + n_slack) {
            *c = -1.0;
        }
        let value = run_simplex(&mut rows, &mut rhs, &mut basis, &costs, &mut iterations)?;
        if value < -FEAS_TOL {
            return Err(Error::Infeasible(format!(
                "phase-1 artificial mass {:.3e} remains",
                -value
            )));
        }
        // Drive leftover artificial basics out; drop rows that turn out to
        // be redundant (all-zero over real and slack columns).
        let mut i = 0;
        while i < rows.len() {
            if basis[i] >= n + n_slack {
                let pivot_col = (0..n + n_slack).find(|&j| rows[i][j].abs() > PIVOT_TOL);
                match pivot_col {
                    Some(j) => {
                        pivot(&mut rows, &mut rhs, &mut basis, i, j);
                        i += 1;
                    }
                    None => {
                        rows.remove(i);
                        rhs.remove(i);
                        basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in rows.iter_mut() {
            row.truncate(n + n_slack);
        }
    }

    // Phase 2: the real objective.
    let mut costs = lp.objective.clone();
    costs.resize(n + n_slack, 0.0);
    run_simplex(&mut rows, &mut rhs, &mut basis, &costs, &mut iterations)?;

    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i];
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { value, x, iterations })
}

/// Run simplex pivots to optimality for `costs`, in place. Returns the
/// objective value reached.
fn run_simplex(
    rows: &mut Vec<Vec<f64>>,
    rhs: &mut Vec<f64>,
    basis: &mut Vec<usize>,
    costs: &[f64],
    iterations: &mut usize,
) -> Result<f64> {
    let total = costs.len();
    let cap = ITERATION_FACTOR * (rows.len() + total + 1);
    loop {
        // reduced costs for the current basis
        let mut reduced = costs.to_vec();
        let mut value = 0.0;
        for (i, &b) in basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                value += cb * rhs[i];
                for j in 0..total {
                    reduced[j] -= cb * rows[i][j];
                }
            }
        }
        // Bland: entering = smallest index with positive reduced cost
        let Some(entering) = (0..total).find(|&j| reduced[j] > PIVOT_TOL) else {
            return Ok(value);
        };
        // ratio test; ties broken by smallest basis variable index (Bland)
        let mut leaving: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows.len() {
            let a = rows[i][entering];
            if a > PIVOT_TOL {
                let ratio = rhs[i] / a;
                let better = match leaving {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-12
                            || (ratio < best + 1e-12 && basis[i] < basis[l])
                    }
                };
                if better {
                    leaving = Some(i);
                    best = ratio;
                }
            }
        }
        let Some(leaving) = leaving else {
            return Err(Error::Unbounded(format!(
                "column {entering} improves without bound"
            )));
        };
        pivot(rows, rhs, basis, leaving, entering);
        *iterations += 1;
        if *iterations > cap {
            return Err(Error::SolverFailure(format!(
                "simplex exceeded {cap} pivots"
            )));
        }
    }
}

fn pivot(rows: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], r: usize, c: usize) {
    let p = rows[r][c];
    debug_assert!(p.abs() > 0.0);
    for v in rows[r].iter_mut() {
        *v /= p;
    }
    rhs[r] /= p;
    for i in 0..rows.len() {
        if i == r {
            continue;
        }
        let factor = rows[i][c];
        if factor != 0.0 {
            for j in 0..rows[i].len() {
                rows[i][j] -= factor * rows[r][j];
            }
            rhs[i] -= factor * rhs[r];
            if rhs[i] < 0.0 && rhs[i] > -1e-12 {
                rhs[i] = 0.0;
            }
        }
    }
    basis[r] = c;
}

// ---------------------------------------------------------------------------
// Fraction results
// ---------------------------------------------------------------------------

/// Solver bookkeeping attached to every fraction result.
#[derive(Debug, Clone)]
pub struct SolverDiagnostics {
    /// Simplex pivots or SDP iterations spent.
    pub iterations: usize,
    /// Worst constraint violation of the returned certificate.
    pub residual: f64,
}

/// The optimal decomposition backing a fraction value.
#[derive(Debug, Clone)]
pub enum FractionCertificate {
    /// Weights over deterministic global assignments (contextual fraction).
    Noncontextual { weights: Vec<(GlobalAssignment, f64)> },
    /// The scaled non-signalling part f with mass 1 − SF.
    NonSignalling { part: SubnormalizedBehaviour },
    /// The scaled NPA-member part plus its positive-semidefinite witness.
    NpaMember {
        part: SubnormalizedBehaviour,
        moment_matrix: Vec<Vec<f64>>,
        min_eigenvalue: f64,
    },
}

/// A fraction in [0,1] together with its certificate and diagnostics.
#[derive(Debug, Clone)]
pub struct FractionResult {
    pub value: f64,
    pub certificate: FractionCertificate,
    pub diagnostics: SolverDiagnostics,
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Contextual fraction
// ---------------------------------------------------------------------------

/// Contextual fraction: 1 minus the largest total weight of deterministic
/// assignments fitting under `e`. 0 for noncontextual behaviours, 1 for
/// maximally contextual ones (e.g. a perfect CHSH box).
pub fn contextual_fraction(e: &Behaviour) -> Result<FractionResult> {
    let scenario = e.scenario();
    let assignments = GlobalAssignment::enumerate(scenario)?;
    let n = assignments.len();

    // restriction index of every assignment in every context, precomputed
    let mut lp = LinearProgram::new(n);
    lp.objective = vec![1.0; n];
    for c in 0..scenario.n_contexts() {
        let len = scenario.table_len(c);
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); len];
        for (gi, g) in assignments.iter().enumerate() {
            groups[scenario.restrict(g, c)].push(gi);
        }
        for (idx, group) in groups.into_iter().enumerate() {
            let mut coeffs = vec![0.0; n];
            for gi in group {
                coeffs[gi] = 1.0;
            }
            lp.constrain(coeffs, Sense::Le, e.prob(c, idx));
        }
    }

    let solution = solve_lp(&lp)?;
    let weights: Vec<(GlobalAssignment, f64)> = assignments
        .into_iter()
        .zip(&solution.x)
        .filter(|(_, &w)| w > 1e-12)
        .map(|(g, &w)| (g, w))
        .collect();

    // certificate self-check: the reconstructed noncontextual part must sit
    // below e entrywise
    let mut residual: f64 = 0.0;
    for c in 0..scenario.n_contexts() {
        let mut part = vec![0.0; scenario.table_len(c)];
        for (g, w) in &weights {
            part[scenario.restrict(g, c)] += w;
        }
        for (idx, &p) in part.iter().enumerate() {
            residual = residual.max(p - e.prob(c, idx));
        }
    }

    Ok(FractionResult {
        value: clamp_unit(1.0 - solution.value),
        certificate: FractionCertificate::Noncontextual { weights },
        diagnostics: SolverDiagnostics { iterations: solution.iterations, residual },
    })
}

// ---------------------------------------------------------------------------
// Signalling fraction
// ---------------------------------------------------------------------------

/// All no-signalling equalities of a scenario, as sparse rows over
/// (context, dense index) pairs with ±1 coefficients: for every measurement,
/// every outcome, and every pair of contexts sharing the measurement, the
/// two marginals agree. Redundant rows are deliberately kept — the simplex
/// drops them in phase 1.
fn ns_equalities(scenario: &MeasurementScenario) -> Vec<Vec<(usize, usize, f64)>> {
    let mut rows = Vec::new();
    for m in 0..scenario.n_measurements() {
        let holders: Vec<usize> = (0..scenario.n_contexts())
            .filter(|&c| scenario.context(c).contains(&m))
            .collect();
        for o in 0..scenario.outcomes(m) {
            for pair in holders.windows(2) {
                let (c1, c2) = (pair[0], pair[1]);
                let mut row = Vec::new();
                for idx in 0..scenario.table_len(c1) {
                    let pos = scenario.context(c1).iter().position(|&x| x == m).unwrap();
                    if scenario.index_to_tuple(c1, idx)[pos] == o {
                        row.push((c1, idx, 1.0));
                    }
                }
                for idx in 0..scenario.table_len(c2) {
                    let pos = scenario.context(c2).iter().position(|&x| x == m).unwrap();
                    if scenario.index_to_tuple(c2, idx)[pos] == o {
                        row.push((c2, idx, -1.0));
                    }
                }
                rows.push(row);
            }
        }
    }
    rows
}

/// Largest marginal mismatch of `e` across all no-signalling equalities.
/// Zero (within solver noise) iff the behaviour is non-signalling. Computed
/// directly from [`marginalize`], independently of any LP.
pub fn max_signalling_violation(e: &Behaviour) -> f64 {
    let scenario = e.scenario();
    let mut worst: f64 = 0.0;
    for m in 0..scenario.n_measurements() {
        let holders: Vec<usize> = (0..scenario.n_contexts())
            .filter(|&c| scenario.context(c).contains(&m))
            .collect();
        let marginals: Vec<Vec<f64>> = holders
            .iter()
            .map(|&c| marginalize(e, c, &[m]).expect("measurement is in context"))
            .collect();
        for pair in marginals.windows(2) {
            for (a, b) in pair[0].iter().zip(&pair[1]) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

/// Offsets of each context's block in the flattened table-variable layout.
fn table_offsets(scenario: &MeasurementScenario) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(scenario.n_contexts());
    let mut total = 0;
    for c in 0..scenario.n_contexts() {
        offsets.push(total);
        total += scenario.table_len(c);
    }
    (offsets, total)
}

/// Signalling fraction: 1 minus the largest mass λ of a non-signalling
/// part f with 0 ≤ f ≤ e. The certificate is the optimal part f itself.
pub fn signalling_fraction(e: &Behaviour) -> Result<FractionResult> {
    let scenario = e.scenario();
    let (offsets, n_table) = table_offsets(scenario);
    let lambda = n_table; // λ is the last variable
    let mut lp = LinearProgram::new(n_table + 1);
    lp.objective[lambda] = 1.0;

    for c in 0..scenario.n_contexts() {
        for idx in 0..scenario.table_len(c) {
            let mut coeffs = vec![0.0; lp.n_vars];
            coeffs[offsets[c] + idx] = 1.0;
            lp.constrain(coeffs, Sense::Le, e.prob(c, idx));
        }
        // context mass pinned to λ
        let mut coeffs = vec![0.0; lp.n_vars];
        for idx in 0..scenario.table_len(c) {
            coeffs[offsets[c] + idx] = 1.0;
        }
        coeffs[lambda] = -1.0;
        lp.constrain(coeffs, Sense::Eq, 0.0);
    }
    for row in ns_equalities(scenario) {
        let mut coeffs = vec![0.0; lp.n_vars];
        for (c, idx, v) in row {
            coeffs[offsets[c] + idx] = v;
        }
        lp.constrain(coeffs, Sense::Eq, 0.0);
    }

    let solution = solve_lp(&lp)?;
    let tables: Vec<Vec<f64>> = (0..scenario.n_contexts())
        .map(|c| solution.x[offsets[c]..offsets[c] + scenario.table_len(c)].to_vec())
        .collect();
    let part = SubnormalizedBehaviour::from_tables(scenario.clone(), tables, 1e-6)?;

    // certificate self-check: f ≤ e and f non-signalling once normalized
    let mut residual: f64 = 0.0;
    for c in 0..scenario.n_contexts() {
        for idx in 0..scenario.table_len(c) {
            residual = residual.max(part.tables()[c][idx] - e.prob(c, idx));
        }
    }
    if part.mass() > 1e-6 {
        let normalized = part.normalized(1e-9)?;
        residual = residual.max(max_signalling_violation(&normalized) * part.mass());
    }

    Ok(FractionResult {
        value: clamp_unit(1.0 - solution.value),
        certificate: FractionCertificate::NonSignalling { part },
        diagnostics: SolverDiagnostics { iterations: solution.iterations, residual },
    })
}

// ---------------------------------------------------------------------------
// Distinguished-context score under a signalling budget
// ---------------------------------------------------------------------------

/// Best score of any behaviour that (a) answers the distinguished context
/// deterministically and (b) has signalling fraction at most σ. The
/// deterministic answer is swept exhaustively; each case is one LP over the
/// behaviour e, its non-signalling part f, and the part's mass λ ≥ 1 − σ.
pub fn distinguished_context_score(
    g: &ContextualGame,
    context: usize,
    sigma: f64,
) -> Result<f64> {
    let scenario = g.scenario();
    if context >= scenario.n_contexts() {
        return Err(Error::Domain(format!("context {context} out of range")));
    }
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Domain(format!("budget σ = {sigma} outside [0,1]")));
    }
    let (offsets, n_table) = table_offsets(scenario);
    let f_base = n_table; // f block mirrors the e block
    let lambda = 2 * n_table;
    let ns_rows = ns_equalities(scenario);

    let mut best = f64::NEG_INFINITY;
    for fixed in 0..scenario.table_len(context) {
        let mut lp = LinearProgram::new(2 * n_table + 1);
        for c in 0..scenario.n_contexts() {
            for idx in 0..scenario.table_len(c) {
                if g.wins(c, idx) {
                    lp.objective[offsets[c] + idx] = g.input_dist()[c];
                }
            }
        }
        // e is a behaviour…
        for c in 0..scenario.n_contexts() {
            let mut coeffs = vec![0.0; lp.n_vars];
            for idx in 0..scenario.table_len(c) {
                coeffs[offsets[c] + idx] = 1.0;
            }
            lp.constrain(coeffs, Sense::Eq, 1.0);
        }
        // …deterministic at the distinguished context…
        let mut coeffs = vec![0.0; lp.n_vars];
        coeffs[offsets[context] + fixed] = 1.0;
        lp.constrain(coeffs, Sense::Eq, 1.0);
        // …with a non-signalling part f ≤ e of mass λ ≥ 1 − σ.
        for c in 0..scenario.n_contexts() {
            for idx in 0..scenario.table_len(c) {
                let mut coeffs = vec![0.0; lp.n_vars];
                coeffs[f_base + offsets[c] + idx] = 1.0;
                coeffs[offsets[c] + idx] = -1.0;
                lp.constrain(coeffs, Sense::Le, 0.0);
            }
            let mut coeffs = vec![0.0; lp.n_vars];
            for idx in 0..scenario.table_len(c) {
                coeffs[f_base + offsets[c] + idx] = 1.0;
            }
            coeffs[lambda] = -1.0;
            lp.constrain(coeffs, Sense::Eq, 0.0);
        }
        for row in &ns_rows {
            let mut coeffs = vec![0.0; lp.n_vars];
            for &(c, idx, v) in row {
                coeffs[f_base + offsets[c] + idx] = v;
            }
            lp.constrain(coeffs, Sense::Eq, 0.0);
        }
        let mut coeffs = vec![0.0; lp.n_vars];
        coeffs[lambda] = 1.0;
        lp.constrain(coeffs, Sense::Ge, 1.0 - sigma);

        best = best.max(solve_lp(&lp)?.value);
    }
    Ok(best)
}
