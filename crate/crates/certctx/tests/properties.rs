//! Structural properties of the scoring and decomposition machinery,
//! checked on randomly generated behaviours: convexity of the contextual
//! fraction, agreement with the facet oracle, the budgeted
//! distinguished-context score law, affinity of game scores, and the
//! equivalence of "zero signalling fraction" and "consistent marginals".

mod common;

use certctx::fractions::{
    contextual_fraction, distinguished_context_score, max_signalling_violation,
    signalling_fraction,
};
use certctx::games::{chsh_game, chsh_game_or, game_score};
use certctx::photonic::{device_behaviour, DeviceModel};
use certctx::scenario::{mix, Behaviour, MeasurementScenario};
use common::{facet_oracle, mix_two, ns_vertices, random_ns_behaviour};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// LP solver noise allowance for equalities between two solved programs.
const LP_TOL: f64 = 1e-7;
/// Tolerance for identities that hold exactly in real arithmetic.
const EXACT_TOL: f64 = 1e-12;

/// Turn 24 raw positive weights into a point of the non-signalling polytope.
fn behaviour_from_weights(raw: &[f64]) -> Behaviour {
    let vertices = ns_vertices();
    let total: f64 = raw.iter().sum();
    let scenario = vertices[0].scenario().clone();
    let mut tables = vec![vec![0.0; 4]; 4];
    for (w, v) in raw.iter().zip(&vertices) {
        for c in 0..4 {
            for idx in 0..4 {
                tables[c][idx] += w / total * v.prob(c, idx);
            }
        }
    }
    Behaviour::from_tables(scenario, tables).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn contextual_fraction_is_convex_under_mixing(
        w1 in proptest::collection::vec(1e-6..1.0f64, 24),
        w2 in proptest::collection::vec(1e-6..1.0f64, 24),
        lambda in 0.0..1.0f64,
    ) {
        let e1 = behaviour_from_weights(&w1);
        let e2 = behaviour_from_weights(&w2);
        let mixed = mix_two(lambda, &e1, &e2);
        let cf1 = contextual_fraction(&e1).unwrap().value;
        let cf2 = contextual_fraction(&e2).unwrap().value;
        let cf_mix = contextual_fraction(&mixed).unwrap().value;
        prop_assert!(
            cf_mix <= lambda * cf1 + (1.0 - lambda) * cf2 + LP_TOL,
            "CF({lambda}·e1 + …) = {cf_mix} exceeds the chord {}",
            lambda * cf1 + (1.0 - lambda) * cf2
        );
    }

    #[test]
    fn game_scores_are_affine_under_mixing(
        w1 in proptest::collection::vec(1e-6..1.0f64, 24),
        w2 in proptest::collection::vec(1e-6..1.0f64, 24),
        lambda in 0.0..1.0f64,
    ) {
        let e1 = behaviour_from_weights(&w1);
        let e2 = behaviour_from_weights(&w2);
        let mixed = mix_two(lambda, &e1, &e2);
        for c in 0..4 {
            prop_assert!((mixed.context_mass(c) - 1.0).abs() < 1e-9);
        }
        for game in [chsh_game_or(), chsh_game()] {
            let s1 = game_score(&e1, &game).unwrap().score;
            let s2 = game_score(&e2, &game).unwrap().score;
            let s_mix = game_score(&mixed, &game).unwrap().score;
            prop_assert!((s_mix - (lambda * s1 + (1.0 - lambda) * s2)).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn score_is_the_shifted_chsh_value(
        w in proptest::collection::vec(1e-6..1.0f64, 24),
    ) {
        let e = behaviour_from_weights(&w);
        for game in [chsh_game_or(), chsh_game()] {
            let report = game_score(&e, &game).unwrap();
            let i = report.chsh_value.unwrap();
            prop_assert!((report.score - (i + 4.0) / 8.0).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn visibility_mixing_is_exactly_affine(
        v1 in 0.0..1.0f64,
        v2 in 0.0..1.0f64,
        lambda in 0.0..1.0f64,
    ) {
        let e1 = device_behaviour(&DeviceModel::new(v1).unwrap());
        let e2 = device_behaviour(&DeviceModel::new(v2).unwrap());
        let direct =
            device_behaviour(&DeviceModel::new(lambda * v1 + (1.0 - lambda) * v2).unwrap());
        let mixed = mix(&[(lambda, &e1), (1.0 - lambda, &e2)]).unwrap();
        for c in 0..4 {
            for idx in 0..4 {
                prop_assert!((mixed.prob(c, idx) - direct.prob(c, idx)).abs() < EXACT_TOL);
            }
        }
    }
}

#[test]
fn facet_oracle_matches_the_lp_on_the_polytope() {
    let vertices = ns_vertices();
    let mut rng = ChaCha12Rng::seed_from_u64(41);
    for _ in 0..100 {
        let e = random_ns_behaviour(&vertices, &mut rng);
        let lp = contextual_fraction(&e).unwrap().value;
        let oracle = facet_oracle(&e);
        assert!(
            (lp - oracle).abs() < 1e-6,
            "LP contextual fraction {lp} vs facet oracle {oracle}"
        );
    }
}

#[test]
fn distinguished_context_scores_respect_the_budget_law() {
    // With signalling budget σ the best score of a behaviour that answers
    // the distinguished context deterministically is exactly (3+σ)/4, for
    // every choice of distinguished context.
    let game = chsh_game_or();
    for step in 0..21 {
        let sigma = step as f64 * 0.05;
        let bound = (3.0 + sigma) / 4.0;
        for context in 0..4 {
            let value = distinguished_context_score(&game, context, sigma).unwrap();
            assert!(
                value <= bound + 1e-6,
                "σ = {sigma}, context {context}: score {value} exceeds {bound}"
            );
            assert!(
                value >= bound - 1e-6,
                "σ = {sigma}, context {context}: score {value} does not attain {bound}"
            );
        }
    }
}

#[test]
fn zero_signalling_fraction_means_consistent_marginals() {
    let vertices = ns_vertices();
    let scenario = MeasurementScenario::chsh();
    let mut rng = ChaCha12Rng::seed_from_u64(43);
    let uniform = Behaviour::uniform(scenario.clone());
    for _ in 0..20 {
        let e = random_ns_behaviour(&vertices, &mut rng);
        assert!(max_signalling_violation(&e) < 1e-12);
        assert!(signalling_fraction(&e).unwrap().value <= LP_TOL);

        // shift mass between outcomes of one context: the B-marginal seen
        // from x = 0 now disagrees with the one seen from x = 1
        let padded = mix_two(0.9, &e, &uniform);
        let mut tables: Vec<Vec<f64>> = padded.tables().to_vec();
        tables[0][0] -= 0.01; // (a,b) = (0,0) in context (0,0)
        tables[0][1] += 0.01; // (a,b) = (0,1)
        let perturbed = Behaviour::from_tables(scenario.clone(), tables).unwrap();
        let violation = max_signalling_violation(&perturbed);
        assert!(violation > 5e-3, "expected a visible marginal mismatch, got {violation}");
        let sf = signalling_fraction(&perturbed).unwrap().value;
        assert!(sf > 1e-6, "marginal mismatch {violation} but signalling fraction {sf}");
    }
}
