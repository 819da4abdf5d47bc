//! Helpers shared by the integration tests: fixture loading, random
//! behaviour generators, and an independent facet-based oracle for the
//! contextual fraction of bipartite binary behaviours.

#![allow(dead_code)] // each test binary uses a different subset

use certctx::games::{chsh_game_or, game_score};
use certctx::scenario::{read_behaviour, Behaviour, MeasurementScenario};
use rand::Rng;
use std::path::PathBuf;

/// Absolute path of a fixture file shipped with the crate.
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")).join(name)
}

/// Load and validate a fixture behaviour.
pub fn load_fixture(name: &str) -> Behaviour {
    read_behaviour(&fixture(name), 1e-9).expect("fixture behaviour")
}

// ---------------------------------------------------------------------------
// Independent contextual-fraction oracle
// ---------------------------------------------------------------------------

/// Contextual fraction of a bipartite binary behaviour computed without any
/// linear programming: the largest violation of the eight correlator facets,
/// max(0, (max_i I_i − 2) / 2), where the I_i are ±E₀₀ ± E₀₁ ± E₁₀ ± E₁₁
/// with an odd number of minus signs.
pub fn facet_oracle(e: &Behaviour) -> f64 {
    let corr = game_score(e, &chsh_game_or())
        .expect("correlators of a bipartite binary behaviour")
        .correlators
        .expect("four correlators");
    let mut best = f64::NEG_INFINITY;
    for signs in 0..16u32 {
        if signs.count_ones() % 2 == 1 {
            let i: f64 = (0..4)
                .map(|k| if signs >> k & 1 == 1 { -corr[k] } else { corr[k] })
                .sum();
            best = best.max(i);
        }
    }
    ((best - 2.0) / 2.0).max(0.0)
}

// ---------------------------------------------------------------------------
// Random behaviours
// ---------------------------------------------------------------------------

/// The 24 vertices of the bipartite binary non-signalling polytope: 16
/// deterministic boxes a = αx ⊕ β, b = γy ⊕ δ and 8 PR-type boxes
/// a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ.
pub fn ns_vertices() -> Vec<Behaviour> {
    let scenario = MeasurementScenario::chsh();
    let mut vertices = Vec::with_capacity(24);
    for bits in 0..16usize {
        let (alpha, beta, gamma, delta) = (bits & 1, bits >> 1 & 1, bits >> 2 & 1, bits >> 3 & 1);
        let mut tables = vec![vec![0.0; 4]; 4];
        for c in 0..4 {
            let (x, y) = (c >> 1, c & 1);
            let a = (alpha * x) ^ beta;
            let b = (gamma * y) ^ delta;
            tables[c][(a << 1) | b] = 1.0;
        }
        vertices.push(Behaviour::from_tables(scenario.clone(), tables).unwrap());
    }
    for bits in 0..8usize {
        let (alpha, beta, gamma) = (bits & 1, bits >> 1 & 1, bits >> 2 & 1);
        let mut tables = vec![vec![0.0; 4]; 4];
        for c in 0..4 {
            let (x, y) = (c >> 1, c & 1);
            let parity = (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma;
            for a in 0..2usize {
                let b = a ^ parity;
                tables[c][(a << 1) | b] = 0.5;
            }
        }
        vertices.push(Behaviour::from_tables(scenario.clone(), tables).unwrap());
    }
    vertices
}

/// A random point of the non-signalling polytope: a mixture of [`ns_vertices`]
/// with exponentially distributed (then normalized) weights.
pub fn random_ns_behaviour<R: Rng>(vertices: &[Behaviour], rng: &mut R) -> Behaviour {
    let mut weights: Vec<f64> = (0..vertices.len())
        .map(|_| -rng.gen_range(1e-12..1.0f64).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let scenario = vertices[0].scenario().clone();
    let mut tables = vec![vec![0.0; 4]; 4];
    for (w, v) in weights.iter().zip(vertices) {
        for c in 0..4 {
            for idx in 0..4 {
                tables[c][idx] += w * v.prob(c, idx);
            }
        }
    }
    Behaviour::from_tables(scenario, tables).unwrap()
}

/// A random behaviour with no non-signalling structure at all: every context
/// table drawn independently from a flat Dirichlet.
pub fn random_unconstrained_behaviour<R: Rng>(rng: &mut R) -> Behaviour {
    let scenario = MeasurementScenario::chsh();
    let tables = (0..4)
        .map(|_| {
            let mut t: Vec<f64> = (0..4).map(|_| -rng.gen_range(1e-12..1.0f64).ln()).collect();
            let total: f64 = t.iter().sum();
            for v in &mut t {
                *v /= total;
            }
            t
        })
        .collect();
    Behaviour::from_tables(scenario, tables).unwrap()
}

/// Entrywise convex combination of two behaviours over the same scenario.
pub fn mix_two(lambda: f64, e1: &Behaviour, e2: &Behaviour) -> Behaviour {
    certctx::scenario::mix(&[(lambda, e1), (1.0 - lambda, e2)]).expect("mixable behaviours")
}
