//! Acceptance suite: one test per verified guarantee, each printing a
//! pass/fail line. Every check is certified against the exact enumeration
//! oracle; run with `cargo test --test acceptance -- --nocapture` to see the
//! summary lines.

use occ::dense::check_constants;
use occ::mixed::{guaranteed_mix_ratio, recommended_dense_probability};
use occ::suites::{self, SuiteOutcome};

const RANDOM_COUNT: usize = 300;
const RANDOM_N_MAX: usize = 9;
const SEED: u64 = 2024;

fn report(label: &str, outcome: &SuiteOutcome) {
    println!(
        "acceptance: {label}: {} ({} checks)",
        if outcome.passed() { "PASS" } else { "FAIL" },
        outcome.checked
    );
    for note in &outcome.notes {
        println!("    note: {note}");
    }
    for v in outcome.violations.iter().take(3) {
        println!("    violation: {}", v.description);
    }
    assert!(outcome.passed(), "{label} failed");
}

#[test]
fn criterion_1_greedy_half_bound() {
    let outcome = suites::greedy_half(RANDOM_COUNT, RANDOM_N_MAX, SEED);
    report("greedy half-bound (profit >= OPT/2, both policies)", &outcome);
    // 300 random instances plus the generator corpus, two policies each.
    assert!(outcome.checked >= 2 * (RANDOM_COUNT + 50));
}

#[test]
fn criterion_2_greedy_cost_bound() {
    let outcome = suites::greedy_cost_bound(RANDOM_COUNT, RANDOM_N_MAX, SEED);
    report("greedy cost bound (cost <= (2n+1) OPT, both policies)", &outcome);
}

#[test]
fn criterion_3_two_clique_lower_bound() {
    let outcome = suites::two_clique_lower_bound();
    report("two-clique lower bound (cost >= n-1-OPT)", &outcome);
    assert_eq!(outcome.checked, 10); // five (m, k) pairs, two policies
}

#[test]
fn criterion_4_dense_equals_forest() {
    let outcome = suites::dense_forest(SEED);
    report("dense output equals forest reconstruction", &outcome);
    assert_eq!(outcome.checked, 50); // 25 streams x 2 tau values
}

#[test]
fn criterion_5_pruned_budget_and_schedule_sparsity() {
    let budget = suites::pruned_budget(SEED);
    report("pruned-chain non-singleton budget", &budget);
    assert!(budget.checked > 0, "no updates fired; suite is vacuous");
    let sparsity = suites::schedule_sparsity(SEED);
    report("update-schedule sparsity (one update per window)", &sparsity);
    assert!(sparsity.checked > 0);
}

#[test]
fn criterion_6_merge_only_contract() {
    let outcome = suites::merge_only(RANDOM_COUNT, RANDOM_N_MAX, SEED);
    report("merge-only contract across all traces", &outcome);
}

#[test]
fn criterion_7_constant_arithmetic() {
    let published_ok = check_constants(1e-12, 1.0946, 0.0555).unwrap();
    let p = recommended_dense_probability(1e-12, 0.0555).unwrap();
    let p_ok = (p / 4.5e-13 - 1.0).abs() <= 1e-3;
    let ratio = guaranteed_mix_ratio(1e-12, 0.0555).unwrap();
    let ratio_ok = ratio >= 0.5 + 2e-14;
    let ok = published_ok && p_ok && ratio_ok;
    println!(
        "acceptance: constant arithmetic (inequality, p = {p:.4e}, ratio - 1/2 = {:.3e}): {}",
        ratio - 0.5,
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(published_ok, "published constants fail the inequality");
    assert!(p_ok, "recommended probability {p} is not within 1e-3 of 4.5e-13");
    assert!(ratio_ok, "guaranteed ratio {ratio} below 1/2 + 2e-14");
}

#[test]
fn criterion_8_oracle_soundness() {
    let outcome = suites::oracle_soundness(RANDOM_COUNT, RANDOM_N_MAX, SEED);
    report("oracle soundness (Bell counts, local search <= exact)", &outcome);
    // Independent recurrence sanity: the published anchor values.
    let bell = suites::bell_numbers(10);
    assert_eq!(bell[5], 52);
    assert_eq!(bell[10], 115_975);
}

#[test]
fn criterion_9_mixed_branch_statistics() {
    let outcome = suites::mixed_statistics(1000);
    report("mixed branch statistics (4-sigma binomial, mixture identity)", &outcome);
}
