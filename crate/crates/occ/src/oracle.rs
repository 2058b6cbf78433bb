//! Offline clusterings: an exact optimum by exhaustive set-partition
//! enumeration (restricted-growth order, incremental scoring) and a restarted
//! local-search heuristic for prefixes past the enumeration cap.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clustering::{Clustering, Vertex};
use crate::instance::LabeledInstance;

/// Largest prefix the exact enumerator accepts by default. Bell(12) is about
/// 4.2e6 partitions, which stays sub-second with incremental scoring.
pub const DEFAULT_EXACT_CAP: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("exact enumeration refused: prefix {t} exceeds cap {cap}")]
    OverCap { t: usize, cap: usize },
    #[error("prefix length {t} exceeds instance size {n}")]
    BadPrefix { t: usize, n: usize },
    #[error("local search needs at least one restart")]
    NoRestarts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OraclePolicy {
    ExactOnly,
    ExactThenHeuristic,
    HeuristicOnly,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub policy: OraclePolicy,
    pub exact_cap: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            policy: OraclePolicy::ExactThenHeuristic,
            exact_cap: DEFAULT_EXACT_CAP,
            restarts: 8,
            seed: 0,
        }
    }
}

/// An offline clustering with its profit and provenance. `exact` records
/// whether the enumeration path produced it; `partitions` is the number of set
/// partitions visited, present only on that path.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub clustering: Clustering,
    pub profit: u64,
    pub exact: bool,
    pub elapsed: Duration,
    pub partitions: Option<u64>,
}

/// Exhausts all set partitions of the first `t` vertices and returns a profit
/// maximizer. Partitions are visited in restricted-growth (lexicographic)
/// order and ties keep the first maximizer, so the winner is the partition
/// with the lexicographically smallest restricted-growth string.
pub fn exact_optimum(
    inst: &LabeledInstance,
    t: usize,
    exact_cap: usize,
) -> Result<OracleResult, OracleError> {
    if t > inst.n() {
        return Err(OracleError::BadPrefix { t, n: inst.n() });
    }
    if t > exact_cap {
        return Err(OracleError::OverCap { t, cap: exact_cap });
    }
    let start = Instant::now();

    // negatives[i] = number of negative edges from i to earlier vertices;
    // lets the per-vertex profit delta be 2*pos(i, block) - |block| + negatives[i].
    let negatives: Vec<i64> = (0..t)
        .map(|i| (0..i).filter(|&j| !inst.label(i, j).is_positive()).count() as i64)
        .collect();

    struct Search<'a> {
        inst: &'a LabeledInstance,
        negatives: Vec<i64>,
        t: usize,
        blocks: Vec<Vec<Vertex>>,
        assignment: Vec<usize>,
        best_profit: i64,
        best_assignment: Vec<usize>,
        visited: u64,
    }

    impl Search<'_> {
        fn descend(&mut self, i: usize, profit: i64) {
            if i == self.t {
                self.visited += 1;
                if profit > self.best_profit {
                    self.best_profit = profit;
                    self.best_assignment = self.assignment.clone();
                }
                return;
            }
            for b in 0..=self.blocks.len() {
                let delta = if b < self.blocks.len() {
                    let pos = self.blocks[b]
                        .iter()
                        .filter(|&&u| self.inst.label(i, u).is_positive())
                        .count() as i64;
                    2 * pos - self.blocks[b].len() as i64 + self.negatives[i]
                } else {
                    self.negatives[i]
                };
                if b == self.blocks.len() {
                    self.blocks.push(Vec::new());
                }
                self.blocks[b].push(i);
                self.assignment.push(b);
                self.descend(i + 1, profit + delta);
                self.assignment.pop();
                self.blocks[b].pop();
                if self.blocks[b].is_empty() {
                    self.blocks.pop();
                }
            }
        }
    }

    let mut search = Search {
        inst,
        negatives,
        t,
        blocks: Vec::new(),
        assignment: Vec::new(),
        best_profit: -1,
        best_assignment: Vec::new(),
        visited: 0,
    };
    if t == 0 {
        search.visited = 1;
        search.best_profit = 0;
    } else {
        search.descend(0, 0);
    }

    let block_count = search.best_assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks: Vec<Vec<Vertex>> = vec![Vec::new(); block_count];
    for (v, &b) in search.best_assignment.iter().enumerate() {
        blocks[b].push(v);
    }
    let clustering = Clustering::from_partition(inst, &blocks).expect("enumerated partition");
    debug_assert_eq!(clustering.profit() as i64, search.best_profit.max(0));

    Ok(OracleResult {
        profit: clustering.profit(),
        clustering,
        exact: true,
        elapsed: start.elapsed(),
        partitions: Some(search.visited),
    })
}

/// One candidate move of the local search. Relocations are preferred over
/// merges on equal profit change; remaining ties go to the smallest vertex /
/// cluster-id key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Relocate { v: Vertex, to: Option<usize> },
    Merge { a: usize, b: usize },
}

struct SearchState<'a> {
    inst: &'a LabeledInstance,
    blocks: Vec<Vec<Vertex>>,
    assignment: Vec<usize>,
    profit: i64,
}

impl<'a> SearchState<'a> {
    fn from_blocks(inst: &'a LabeledInstance, blocks: Vec<Vec<Vertex>>) -> Self {
        let t: usize = blocks.iter().map(|b| b.len()).sum();
        let mut assignment = vec![0usize; t];
        for (b, block) in blocks.iter().enumerate() {
            for &v in block {
                assignment[v] = b;
            }
        }
        let mut profit = 0i64;
        for i in 1..t {
            for j in 0..i {
                let together = assignment[i] == assignment[j];
                if together == inst.label(i, j).is_positive() {
                    profit += 1;
                }
            }
        }
        let mut state = SearchState {
            inst,
            blocks,
            assignment,
            profit,
        };
        state.normalize();
        state
    }

    /// Blocks sorted by minimum vertex; drops empties. Keeps move tie-breaking
    /// stable across iterations.
    fn normalize(&mut self) {
        self.blocks.retain(|b| !b.is_empty());
        for b in &mut self.blocks {
            b.sort_unstable();
        }
        self.blocks.sort_by_key(|b| b[0]);
        for (idx, block) in self.blocks.iter().enumerate() {
            for &v in block {
                self.assignment[v] = idx;
            }
        }
    }

    fn positive_to(&self, v: Vertex, block: &[Vertex]) -> i64 {
        block
            .iter()
            .filter(|&&u| u != v && self.inst.label(v, u).is_positive())
            .count() as i64
    }

    fn relocation_delta(&self, v: Vertex, to: Option<usize>) -> i64 {
        let from = self.assignment[v];
        let leave = 2 * self.positive_to(v, &self.blocks[from]) - (self.blocks[from].len() as i64 - 1);
        let enter = match to {
            Some(b) => 2 * self.positive_to(v, &self.blocks[b]) - self.blocks[b].len() as i64,
            None => 0,
        };
        enter - leave
    }

    fn merge_delta(&self, a: usize, b: usize) -> i64 {
        let pos: i64 = self.blocks[a]
            .iter()
            .map(|&u| self.positive_to(u, &self.blocks[b]))
            .sum();
        2 * pos - (self.blocks[a].len() * self.blocks[b].len()) as i64
    }

    /// Best strictly improving move, ties broken by (relocation before merge,
    /// smallest vertex, smallest target/pair cluster id).
    fn best_move(&self) -> Option<(i64, Move)> {
        let mut best: Option<(i64, (u8, usize, usize), Move)> = None;
        let mut consider = |delta: i64, key: (u8, usize, usize), mv: Move| {
            if delta <= 0 {
                return;
            }
            let better = match &best {
                None => true,
                Some((d, k, _)) => delta > *d || (delta == *d && key < *k),
            };
            if better {
                best = Some((delta, key, mv));
            }
        };

        for v in 0..self.assignment.len() {
            let from = self.assignment[v];
            for b in 0..self.blocks.len() {
                if b == from {
                    continue;
                }
                consider(
                    self.relocation_delta(v, Some(b)),
                    (0, v, self.blocks[b][0]),
                    Move::Relocate { v, to: Some(b) },
                );
            }
            if self.blocks[from].len() > 1 {
                consider(
                    self.relocation_delta(v, None),
                    (0, v, v),
                    Move::Relocate { v, to: None },
                );
            }
        }
        for a in 0..self.blocks.len() {
            for b in a + 1..self.blocks.len() {
                consider(
                    self.merge_delta(a, b),
                    (1, self.blocks[a][0], self.blocks[b][0]),
                    Move::Merge { a, b },
                );
            }
        }
        best.map(|(delta, _, mv)| (delta, mv))
    }

    fn apply(&mut self, delta: i64, mv: Move) {
        match mv {
            Move::Relocate { v, to } => {
                let from = self.assignment[v];
                self.blocks[from].retain(|&u| u != v);
                match to {
                    Some(b) => self.blocks[b].push(v),
                    None => self.blocks.push(vec![v]),
                }
            }
            Move::Merge { a, b } => {
                let absorbed = std::mem::take(&mut self.blocks[b]);
                self.blocks[a].extend(absorbed);
            }
        }
        self.profit += delta;
        self.normalize();
    }

    fn run_to_local_optimum(&mut self) {
        while let Some((delta, mv)) = self.best_move() {
            self.apply(delta, mv);
        }
    }
}

/// Start from all singletons and repeatedly apply the best strictly positive
/// gain merge. Arrival-order independent, unlike the online greedy.
fn agglomerative_blocks(inst: &LabeledInstance, t: usize) -> Vec<Vec<Vertex>> {
    let mut c = Clustering::new();
    for _ in 0..t {
        c.arrive(inst).expect("t <= n checked by caller");
    }
    loop {
        let ids: Vec<usize> = c.cluster_ids().collect();
        let mut best: Option<(i64, (usize, usize))> = None;
        for (i, &x) in ids.iter().enumerate() {
            for &y in &ids[i + 1..] {
                let g = c.gain(x, y).expect("live ids");
                if g > 0 && best.is_none_or(|(bg, _)| g > bg) {
                    best = Some((g, (x, y)));
                }
            }
        }
        match best {
            Some((_, (x, y))) => {
                c.merge(x, y).expect("live ids");
            }
            None => break,
        }
    }
    c.blocks()
}

fn random_blocks(t: usize, seed: u64) -> Vec<Vec<Vertex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=t);
    let mut blocks: Vec<Vec<Vertex>> = vec![Vec::new(); k];
    for v in 0..t {
        blocks[rng.random_range(0..k)].push(v);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

/// Best of `restarts` local-search runs. The first run starts from the
/// agglomerative solution, the rest from seeded random partitions; each run
/// applies the best single-vertex relocation or pairwise cluster merge while
/// the profit strictly improves. Deterministic given the seed.
pub fn local_search_optimum(
    inst: &LabeledInstance,
    t: usize,
    restarts: usize,
    seed: u64,
) -> Result<OracleResult, OracleError> {
    if restarts == 0 {
        return Err(OracleError::NoRestarts);
    }
    if t > inst.n() {
        return Err(OracleError::BadPrefix { t, n: inst.n() });
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run_seeds: Vec<u64> = (0..restarts).map(|_| rng.random()).collect();

    let mut best: Option<(u64, Vec<Vec<Vertex>>)> = None;
    for (run, &run_seed) in run_seeds.iter().enumerate() {
        let blocks = if run == 0 {
            agglomerative_blocks(inst, t)
        } else {
            random_blocks(t, run_seed)
        };
        if t == 0 {
            best = Some((0, Vec::new()));
            break;
        }
        let mut state = SearchState::from_blocks(inst, blocks);
        state.run_to_local_optimum();
        let profit = state.profit as u64;
        if best.as_ref().is_none_or(|(p, _)| profit > *p) {
            best = Some((profit, state.blocks));
        }
    }

    let (profit, blocks) = best.expect("at least one restart");
    let clustering = Clustering::from_partition(inst, &blocks).expect("search partition");
    debug_assert_eq!(clustering.profit(), profit);
    Ok(OracleResult {
        profit,
        clustering,
        exact: false,
        elapsed: start.elapsed(),
        partitions: None,
    })
}

/// Dispatches to the exact or heuristic path per the configured policy.
pub fn oracle(
    inst: &LabeledInstance,
    t: usize,
    config: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    match config.policy {
        OraclePolicy::ExactOnly => exact_optimum(inst, t, config.exact_cap),
        OraclePolicy::ExactThenHeuristic => {
            if t <= config.exact_cap {
                exact_optimum(inst, t, config.exact_cap)
            } else {
                local_search_optimum(inst, t, config.restarts, config.seed)
            }
        }
        OraclePolicy::HeuristicOnly => {
            local_search_optimum(inst, t, config.restarts, config.seed)
        }
    }
}

/// Per-prefix seed derivation, shared by every caller that queries the oracle
/// at several prefix lengths of the same stream.
pub fn seed_for_prefix(seed: u64, t: usize) -> u64 {
    (seed ^ (t as u64)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
