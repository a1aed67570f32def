//! Numerical routines checked against brute-force references.

mod common;

use common::suites;

fn run(outcome: suites::Outcome) {
    if let Err(e) = outcome {
        panic!("{e}");
    }
}

#[test]
fn centralities_match_brute_force() {
    run(suites::centrality_oracle(2000));
}

#[test]
fn auc_matches_pair_counting() {
    run(suites::auc_oracle(100));
}

#[test]
fn ari_matches_pair_counting() {
    run(suites::ari_oracle(30));
}

#[test]
fn candidates_match_level_expansion() {
    run(suites::candidates_oracle(100));
}

#[test]
fn seed_distances_match_all_pairs() {
    run(suites::seed_distance_oracle(100));
}

#[test]
fn booster_loss_and_derivatives() {
    run(suites::booster_checks());
}
