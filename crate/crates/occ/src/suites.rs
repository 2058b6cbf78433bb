//! Verification suites: each runs a named property over a seeded corpus and
//! reports every violation with a reproducible `.occ` counterexample. Shared
//! by the acceptance tests and the command-line `verify` command.

use rayon::prelude::*;

use crate::clustering::Clustering;
use crate::corpus;
use crate::dense::{dense_run, forest_clustering, DenseConfig, DenseRun};
use crate::greedy::{greedy_run, GreedyPolicy};
use crate::instance::LabeledInstance;
use crate::mixed::{mixed_run, Branch, MixedConfig};
use crate::oracle::{exact_optimum, local_search_optimum, OracleConfig, OraclePolicy};

#[derive(Debug, Clone)]
pub struct Violation {
    pub description: String,
    /// The offending instance in `.occ` form, for replay.
    pub occ: String,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Free-form measurements worth reporting alongside pass/fail.
    pub notes: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "suite {}: {} checks, {} violations -> {}",
            self.name,
            self.checked,
            self.violations.len(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Corpus shared by the greedy suites: seeded random instances plus every
/// generator instance up to twelve vertices. All sizes stay within the exact
/// oracle cap.
fn greedy_corpus(random_count: usize, random_n_max: usize, seed: u64) -> Vec<(String, LabeledInstance)> {
    let mut corpus: Vec<(String, LabeledInstance)> = corpus::random_corpus(random_count, random_n_max, seed)
        .into_iter()
        .enumerate()
        .map(|(i, inst)| (format!("random #{i} seed={seed}"), inst))
        .collect();
    corpus.extend(corpus::generator_corpus(12));
    corpus
}

fn both_policies() -> [GreedyPolicy; 2] {
    [GreedyPolicy::max_gain(), GreedyPolicy::first_found()]
}

/// Greedy profit is at least half the exact optimum profit on every corpus
/// instance, under both merge policies. Exact integer comparison.
pub fn greedy_half(random_count: usize, random_n_max: usize, seed: u64) -> SuiteOutcome {
    let corpus = greedy_corpus(random_count, random_n_max, seed);
    let results: Vec<Option<Violation>> = corpus
        .par_iter()
        .flat_map(|(name, inst)| {
            let opt = exact_optimum(inst, inst.n(), 12).expect("corpus fits the cap");
            both_policies()
                .into_par_iter()
                .map(move |policy| {
                    let trace = greedy_run(inst, policy);
                    let profit = trace.last().unwrap().profit();
                    if 2 * profit >= opt.profit {
                        None
                    } else {
                        Some(Violation {
                            description: format!(
                                "{name} policy={policy:?}: greedy profit {profit} < half of optimum {}",
                                opt.profit
                            ),
                            occ: inst.to_occ(),
                        })
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let checked = results.len();
    SuiteOutcome {
        name: "greedy-half".into(),
        checked,
        violations: results.into_iter().flatten().collect(),
        notes: Vec::new(),
    }
}

/// Greedy cost is at most (2n + 1) times the exact optimum cost, and exactly
/// zero whenever the optimum cost is zero.
pub fn greedy_cost_bound(random_count: usize, random_n_max: usize, seed: u64) -> SuiteOutcome {
    let corpus = greedy_corpus(random_count, random_n_max, seed);
    let results: Vec<Option<Violation>> = corpus
        .par_iter()
        .flat_map(|(name, inst)| {
            let opt = exact_optimum(inst, inst.n(), 12).expect("corpus fits the cap");
            let opt_cost = opt.clustering.score(inst).cost;
            let n = inst.n() as u64;
            both_policies()
                .into_par_iter()
                .map(move |policy| {
                    let trace = greedy_run(inst, policy);
                    let cost = trace.last().unwrap().score_tracked().cost;
                    let violation = if opt_cost == 0 {
                        cost != 0
                    } else {
                        cost > (2 * n + 1) * opt_cost
                    };
                    if violation {
                        Some(Violation {
                            description: format!(
                                "{name} policy={policy:?}: greedy cost {cost} vs optimum cost {opt_cost} (n={n})"
                            ),
                            occ: inst.to_occ(),
                        })
                    } else {
                        None
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let checked = results.len();
    SuiteOutcome {
        name: "greedy-2n1".into(),
        checked,
        violations: results.into_iter().flatten().collect(),
        notes: Vec::new(),
    }
}

/// On the two-clique family the greedy cost is at least n - 1 - opt_cost.
/// The (3, 1) member is pinned exactly: greedy cost 4 against optimum cost 1.
pub fn two_clique_lower_bound() -> SuiteOutcome {
    let params = [(3usize, 1usize), (4, 1), (4, 2), (5, 1), (6, 1)];
    let mut checked = 0;
    let mut violations = Vec::new();
    for (m, k) in params {
        let inst = crate::instance::two_clique(m, k).unwrap();
        let opt = exact_optimum(&inst, inst.n(), 12).unwrap();
        let opt_cost = opt.clustering.score(&inst).cost;
        for policy in both_policies() {
            checked += 1;
            let trace = greedy_run(&inst, policy);
            let cost = trace.last().unwrap().score_tracked().cost;
            let bound = (2 * m as u64) - 1 - opt_cost;
            if cost < bound {
                violations.push(Violation {
                    description: format!(
                        "two-clique m={m} k={k} policy={policy:?}: cost {cost} below bound {bound}"
                    ),
                    occ: inst.to_occ(),
                });
            }
            if (m, k) == (3, 1) && (cost != 4 || opt_cost != 1) {
                violations.push(Violation {
                    description: format!(
                        "two-clique (3,1) expected greedy cost 4 and optimum cost 1, got {cost} and {opt_cost}"
                    ),
                    occ: inst.to_occ(),
                });
            }
        }
    }
    SuiteOutcome {
        name: "two-clique-bound".into(),
        checked,
        violations,
        notes: Vec::new(),
    }
}

/// Configurations for the dense suites: the relaxed constant regime under the
/// exact-only oracle, at both spacing values.
pub fn dense_suite_configs() -> Vec<DenseConfig> {
    [1.1, 1.5]
        .into_iter()
        .map(|tau| DenseConfig {
            alpha: 0.01,
            tau,
            t_min: 4,
            eta: Some(0.0555),
            oracle: OracleConfig {
                policy: OraclePolicy::ExactOnly,
                ..OracleConfig::default()
            },
        })
        .collect()
}

fn dense_runs(seed: u64) -> Vec<(String, LabeledInstance, DenseConfig, DenseRun)> {
    let streams = corpus::dense_stream_corpus(seed);
    dense_suite_configs()
        .into_iter()
        .flat_map(|config| {
            streams
                .par_iter()
                .map(|(name, inst)| {
                    let run = dense_run(inst, &config).expect("dense run on corpus stream");
                    (
                        format!("{name} tau={}", config.tau),
                        inst.clone(),
                        config.clone(),
                        run,
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// The online output equals the offline forest reconstruction exactly, on
/// every stream and configuration.
pub fn dense_forest(seed: u64) -> SuiteOutcome {
    let runs = dense_runs(seed);
    let results: Vec<Option<Violation>> = runs
        .par_iter()
        .map(|(name, inst, config, run)| {
            let forest = forest_clustering(inst, config, inst.n()).expect("forest replay");
            if forest.same_partition(run.final_clustering()) {
                None
            } else {
                Some(Violation {
                    description: format!(
                        "{name}: online clustering differs from the forest reconstruction\nonline:\n{}forest:\n{}",
                        run.final_clustering().to_lines(),
                        forest.to_lines()
                    ),
                    occ: inst.to_occ(),
                })
            }
        })
        .collect();
    let checked = results.len();
    let updates: usize = runs.iter().map(|(_, _, _, r)| r.state.chain.entries.len()).sum();
    SuiteOutcome {
        name: "dense-forest".into(),
        checked,
        violations: results.into_iter().flatten().collect(),
        notes: vec![format!("{updates} updates fired across {checked} runs")],
    }
}

/// Every pruned clustering carries at most `keep_budget` non-singleton
/// clusters, each of which is a cluster of the oracle clustering it prunes.
pub fn pruned_budget(seed: u64) -> SuiteOutcome {
    let runs = dense_runs(seed);
    let mut checked = 0;
    let mut violations = Vec::new();
    for (name, inst, config, run) in &runs {
        for entry in &run.state.chain.entries {
            checked += 1;
            let non_singleton = entry.pruned.non_singleton_count();
            if non_singleton > config.keep_budget() {
                violations.push(Violation {
                    description: format!(
                        "{name} t={}: {non_singleton} non-singleton clusters exceed budget {}",
                        entry.time,
                        config.keep_budget()
                    ),
                    occ: inst.to_occ(),
                });
            }
            for (id, members) in entry.pruned.clusters() {
                if members.len() > 1 && entry.opt.clustering.members(id) != Some(members) {
                    violations.push(Violation {
                        description: format!(
                            "{name} t={}: pruned cluster {id} is not a cluster of the oracle clustering",
                            entry.time
                        ),
                        occ: inst.to_occ(),
                    });
                }
            }
        }
    }
    SuiteOutcome {
        name: "opt-hat-budget".into(),
        checked,
        violations,
        notes: Vec::new(),
    }
}

/// At most one update time falls in any checkpoint window
/// [ceil(tau^j), ceil(tau^(j+1))).
pub fn schedule_sparsity(seed: u64) -> SuiteOutcome {
    let runs = dense_runs(seed);
    let mut checked = 0;
    let mut violations = Vec::new();
    for (name, inst, config, run) in &runs {
        let times: Vec<usize> = run.state.chain.entries.iter().map(|e| e.time).collect();
        if times.is_empty() {
            continue;
        }
        checked += 1;
        // Window of t = index of the largest checkpoint <= t; t below the
        // first checkpoint sits in window 0 together with it.
        let window = |t: usize| {
            let mut j = 0usize;
            let mut x = config.tau;
            loop {
                let next = x.ceil() as usize;
                if next > t {
                    return j;
                }
                j += 1;
                x *= config.tau;
            }
        };
        let windows: Vec<usize> = times.iter().map(|&t| window(t)).collect();
        for pair in windows.windows(2) {
            if pair[0] >= pair[1] {
                violations.push(Violation {
                    description: format!(
                        "{name}: update times {times:?} share a checkpoint window ({windows:?})"
                    ),
                    occ: inst.to_occ(),
                });
                break;
            }
        }
    }
    SuiteOutcome {
        name: "schedule-sparsity".into(),
        checked,
        violations,
        notes: Vec::new(),
    }
}

fn check_trace(name: &str, inst: &LabeledInstance, trace: &[Clustering]) -> Option<Violation> {
    for (t, pair) in trace.windows(2).enumerate() {
        if !pair[1].coarsens(&pair[0]) {
            return Some(Violation {
                description: format!("{name}: state at time {} splits an earlier cluster", t + 2),
                occ: inst.to_occ(),
            });
        }
    }
    None
}

/// Consecutive states of every emitted trace are merge-only coarsenings, for
/// greedy under both policies, dense over the stream corpus, and the mixed
/// algorithm on both branches.
pub fn merge_only(random_count: usize, random_n_max: usize, seed: u64) -> SuiteOutcome {
    let mut violations = Vec::new();
    let mut checked = 0;

    let greedy_instances = greedy_corpus(random_count, random_n_max, seed);
    let greedy_violations: Vec<Option<Violation>> = greedy_instances
        .par_iter()
        .flat_map(|(name, inst)| {
            both_policies()
                .into_par_iter()
                .map(move |policy| {
                    let trace = greedy_run(inst, policy);
                    check_trace(&format!("greedy {name} {policy:?}"), inst, &trace)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    checked += greedy_violations.len();
    violations.extend(greedy_violations.into_iter().flatten());

    for (name, inst, _, run) in dense_runs(seed) {
        checked += 1;
        violations.extend(check_trace(&format!("dense {name}"), &inst, &run.trace));
    }

    let mix_inst = crate::instance::planted(2, 4, 0.1, seed).unwrap();
    for p in [0.0, 1.0] {
        checked += 1;
        let config = MixedConfig {
            p,
            dense: dense_suite_configs().remove(0),
            greedy: GreedyPolicy::default(),
            seed,
        };
        let (branch, trace) = mixed_run(&mix_inst, &config).expect("mixed run");
        violations.extend(check_trace(
            &format!("mixed p={p} branch={branch}"),
            &mix_inst,
            &trace,
        ));
    }

    SuiteOutcome {
        name: "merge-only".into(),
        checked,
        violations,
        notes: Vec::new(),
    }
}

/// Independent Bell-number recurrence (Bell triangle).
pub fn bell_numbers(up_to: usize) -> Vec<u64> {
    let mut bell = vec![1u64]; // B(0)
    let mut row = vec![1u64]; // triangle row for n = 1
    for _ in 1..=up_to {
        bell.push(*row.last().unwrap());
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    bell
}

/// Oracle soundness: the enumerator visits exactly Bell(t) partitions for
/// t <= 10, and the local search never exceeds the exact optimum on the
/// random corpus (reporting how often it matches it).
pub fn oracle_soundness(random_count: usize, random_n_max: usize, seed: u64) -> SuiteOutcome {
    let mut violations = Vec::new();
    let mut checked = 0;

    let bell = bell_numbers(10);
    let probe = corpus::random_corpus(1, 10, seed.wrapping_add(77))
        .pop()
        .unwrap();
    for (t, &expected) in bell.iter().enumerate().take(probe.n().min(10) + 1).skip(1) {
        checked += 1;
        let res = exact_optimum(&probe, t, 12).unwrap();
        if res.partitions != Some(expected) {
            violations.push(Violation {
                description: format!(
                    "enumerator visited {:?} partitions at t={t}, Bell says {expected}",
                    res.partitions
                ),
                occ: probe.to_occ(),
            });
        }
    }

    let corpus = corpus::random_corpus(random_count, random_n_max, seed);
    let results: Vec<(bool, Option<Violation>)> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let exact = exact_optimum(inst, inst.n(), 12).expect("corpus fits the cap");
            let heur = local_search_optimum(inst, inst.n(), 8, seed.wrapping_add(i as u64))
                .expect("restarts >= 1");
            let violation = if heur.profit > exact.profit {
                Some(Violation {
                    description: format!(
                        "random #{i}: local search profit {} exceeds exact optimum {}",
                        heur.profit, exact.profit
                    ),
                    occ: inst.to_occ(),
                })
            } else {
                None
            };
            (heur.profit == exact.profit, violation)
        })
        .collect();
    checked += results.len();
    let matches = results.iter().filter(|(eq, _)| *eq).count();
    let rate = matches as f64 / results.len().max(1) as f64;
    violations.extend(results.into_iter().filter_map(|(_, v)| v));
    if rate < 0.95 {
        violations.push(Violation {
            description: format!(
                "local search matched the exact optimum on only {:.1}% of the corpus",
                rate * 100.0
            ),
            occ: String::new(),
        });
    }

    SuiteOutcome {
        name: "oracle-bell".into(),
        checked,
        violations,
        notes: vec![format!(
            "local search matched the exact optimum on {:.1}% of {random_count} instances",
            rate * 100.0
        )],
    }
}

/// Mixed-algorithm statistics on one fixed instance: over `seeds` runs at
/// p = 1/2 the dense-branch count stays within four binomial standard
/// deviations of the mean, and the seed-averaged profit matches the analytic
/// mixture within 3/sqrt(seeds) of the edge count.
pub fn mixed_statistics(seeds: u64) -> SuiteOutcome {
    let inst = crate::instance::planted(2, 4, 0.1, 3).unwrap();
    let dense_config = dense_suite_configs().remove(0);
    let greedy_policy = GreedyPolicy::default();

    let greedy_profit = greedy_run(&inst, greedy_policy)
        .last()
        .unwrap()
        .profit() as f64;
    let dense_profit = dense_run(&inst, &dense_config)
        .expect("dense run")
        .final_clustering()
        .profit() as f64;

    let p = 0.5f64;
    let branches: Vec<(bool, f64)> = (1..=seeds)
        .into_par_iter()
        .map(|seed| {
            let config = MixedConfig {
                p,
                dense: dense_config.clone(),
                greedy: greedy_policy,
                seed,
            };
            let (branch, trace) = mixed_run(&inst, &config).expect("mixed run");
            (branch == Branch::Dense, trace.last().unwrap().profit() as f64)
        })
        .collect();

    let mut violations = Vec::new();
    let dense_count = branches.iter().filter(|(d, _)| *d).count() as f64;
    let mean = seeds as f64 * p;
    let sigma = (seeds as f64 * p * (1.0 - p)).sqrt();
    if (dense_count - mean).abs() > 4.0 * sigma {
        violations.push(Violation {
            description: format!(
                "dense branch count {dense_count} outside {mean} +/- 4 * {sigma:.2}"
            ),
            occ: inst.to_occ(),
        });
    }

    let edges = LabeledInstance::edges_at(inst.n()) as f64;
    let mean_profit = branches.iter().map(|(_, pr)| pr).sum::<f64>() / seeds as f64;
    let mixture = (1.0 - p) * greedy_profit + p * dense_profit;
    let tolerance = 3.0 / (seeds as f64).sqrt() * edges;
    if (mean_profit - mixture).abs() > tolerance {
        violations.push(Violation {
            description: format!(
                "seed-averaged profit {mean_profit:.4} differs from mixture {mixture:.4} by more than {tolerance:.4}"
            ),
            occ: inst.to_occ(),
        });
    }

    SuiteOutcome {
        name: "mixed-statistics".into(),
        checked: seeds as usize,
        violations,
        notes: vec![format!(
            "dense branch {dense_count} of {seeds}, mean profit {mean_profit:.4} vs mixture {mixture:.4}"
        )],
    }
}

/// Names accepted by the command-line `verify` subcommand.
pub const SUITE_NAMES: &[&str] = &[
    "greedy-half",
    "greedy-2n1",
    "dense-forest",
    "opt-hat-budget",
    "schedule-sparsity",
    "merge-only",
    "oracle-bell",
];

/// Runs the named suite with the given corpus parameters.
pub fn run_suite(
    name: &str,
    random_count: usize,
    random_n_max: usize,
    seed: u64,
) -> Option<SuiteOutcome> {
    match name {
        "greedy-half" => Some(greedy_half(random_count, random_n_max, seed)),
        "greedy-2n1" => Some(greedy_cost_bound(random_count, random_n_max, seed)),
        "dense-forest" => Some(dense_forest(seed)),
        "opt-hat-budget" => Some(pruned_budget(seed)),
        "schedule-sparsity" => Some(schedule_sparsity(seed)),
        "merge-only" => Some(merge_only(random_count, random_n_max, seed)),
        "oracle-bell" => Some(oracle_soundness(random_count, random_n_max, seed)),
        _ => None,
    }
}
