//! Property tests: incremental bookkeeping against from-scratch recounts,
//! format round-trips, and the small-instance oracle cross-checks.

use proptest::prelude::*;

use occ::clustering::Clustering;
use occ::greedy::{greedy_run, GreedyPolicy};
use occ::instance::{self, EdgeSign, LabeledInstance};
use occ::oracle::{exact_optimum, local_search_optimum};

fn instance_strategy(max_n: usize) -> impl Strategy<Value = LabeledInstance> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::ANY, n * (n - 1) / 2).prop_map(move |bits| {
            let mut it = bits.into_iter();
            LabeledInstance::from_fn(n, |_, _| {
                if it.next().unwrap() {
                    EdgeSign::Positive
                } else {
                    EdgeSign::Negative
                }
            })
        })
    })
}

/// An instance plus a script of merge decisions: after each arrival, a few
/// (picked, other) index pairs into the live cluster list.
fn merge_script_strategy() -> impl Strategy<Value = (LabeledInstance, Vec<Vec<(usize, usize)>>)> {
    instance_strategy(20).prop_flat_map(|inst| {
        let n = inst.n();
        let scripts = prop::collection::vec(
            prop::collection::vec((0usize..64, 0usize..64), 0..3),
            n,
        );
        (Just(inst), scripts)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn occ_round_trip((inst,) in (instance_strategy(30),)) {
        let text = inst.to_occ();
        let back = LabeledInstance::parse_occ(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_occ(), text);
    }

    #[test]
    fn incremental_profit_matches_scratch((inst, script) in merge_script_strategy()) {
        let mut c = Clustering::new();
        let mut previous: Option<Clustering> = None;
        for merges in &script {
            c.arrive(&inst).unwrap();
            for &(a, b) in merges {
                let ids: Vec<usize> = c.cluster_ids().collect();
                if ids.len() < 2 {
                    break;
                }
                let x = ids[a % ids.len()];
                let y = ids[b % ids.len()];
                if x == y {
                    continue;
                }
                // The gain always predicts the profit delta exactly.
                let gain = c.gain(x, y).unwrap();
                let before = c.profit() as i64;
                c.merge(x, y).unwrap();
                prop_assert_eq!(c.profit() as i64, before + gain);
            }
            let scratch = c.score(&inst);
            let tracked = c.score_tracked();
            prop_assert_eq!(scratch, tracked);
            prop_assert_eq!(
                tracked.profit + tracked.cost,
                LabeledInstance::edges_at(c.horizon())
            );
            c.check_consistency(&inst);
            if let Some(prev) = &previous {
                prop_assert!(c.coarsens(prev));
            }
            previous = Some(c.clone());
        }
    }

    #[test]
    fn greedy_traces_stay_merge_only_and_locally_stable(inst in instance_strategy(12)) {
        for policy in [GreedyPolicy::max_gain(), GreedyPolicy::first_found()] {
            let trace = greedy_run(&inst, policy);
            for pair in trace.windows(2) {
                prop_assert!(pair[1].coarsens(&pair[0]));
            }
            let last = trace.last().unwrap();
            let ids: Vec<usize> = last.cluster_ids().collect();
            for (i, &x) in ids.iter().enumerate() {
                for &y in &ids[i + 1..] {
                    prop_assert!(last.gain(x, y).unwrap() <= 0);
                }
            }
        }
    }

    #[test]
    fn local_search_never_beats_exact(inst in instance_strategy(7), seed in any::<u64>()) {
        let exact = exact_optimum(&inst, inst.n(), 12).unwrap();
        let heur = local_search_optimum(&inst, inst.n(), 3, seed).unwrap();
        prop_assert!(heur.profit <= exact.profit);
    }

    #[test]
    fn exact_profit_is_permutation_invariant(
        inst in instance_strategy(7),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<usize> = (0..inst.n()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let permuted = inst.with_arrival_order(&order).unwrap();
        let a = exact_optimum(&inst, inst.n(), 12).unwrap();
        let b = exact_optimum(&permuted, permuted.n(), 12).unwrap();
        prop_assert_eq!(a.profit, b.profit);
    }
}

#[test]
fn round_trip_on_seeded_corpus() {
    // 100 seeded instances up to 30 vertices, bit-exact round trips.
    for inst in occ::corpus::random_corpus(100, 30, 2024) {
        let text = inst.to_occ();
        let back = LabeledInstance::parse_occ(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_occ(), text);
    }
}

#[test]
fn noiseless_planted_has_zero_cost_partition() {
    for (clusters, size, seed) in [(2usize, 3usize, 1u64), (2, 6, 2), (3, 4, 3), (4, 3, 4)] {
        let inst = instance::planted(clusters, size, 0.0, seed).unwrap();
        // Positive components recover the planted partition when noiseless.
        let n = inst.n();
        let mut component = (0..n).collect::<Vec<usize>>();
        for i in 1..n {
            for j in 0..i {
                if inst.label(i, j).is_positive() {
                    let (a, b) = (component[i], component[j]);
                    if a != b {
                        for c in component.iter_mut() {
                            if *c == a {
                                *c = b;
                            }
                        }
                    }
                }
            }
        }
        let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (v, &c) in component.iter().enumerate() {
            blocks.entry(c).or_default().push(v);
        }
        let blocks: Vec<Vec<usize>> = blocks.into_values().collect();
        assert_eq!(blocks.len(), clusters);
        let clustering = Clustering::from_partition(&inst, &blocks).unwrap();
        assert_eq!(clustering.score(&inst).cost, 0);
    }
}

#[test]
fn incremental_scores_match_on_seeded_merge_corpus() {
    // 200 seeded random instances with random merge orders, exact equality of
    // the tracked and from-scratch scores at every step.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for inst in occ::corpus::random_corpus(200, 20, 31) {
        let mut c = Clustering::new();
        for _ in 0..inst.n() {
            c.arrive(&inst).unwrap();
            while c.cluster_count() > 1 && rng.random_bool(0.3) {
                let ids: Vec<usize> = c.cluster_ids().collect();
                let x = ids[rng.random_range(0..ids.len())];
                let y = ids[rng.random_range(0..ids.len())];
                if x != y {
                    c.merge(x, y).unwrap();
                }
            }
            assert_eq!(c.score(&inst), c.score_tracked());
        }
    }
}
