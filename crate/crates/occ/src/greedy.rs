//! The online greedy merger: each arrival opens a singleton, then merges of
//! strictly positive gain cascade until none remains.

use crate::clustering::{Clustering, ClusterId, ClusteringError};
use crate::instance::LabeledInstance;

/// How the merge cascade picks among pairs with positive gain. The choice is
/// deliberately explicit because maximal merge orders are not unique; both
/// policies must satisfy the same guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeOrder {
    /// Merge a maximum-gain pair, ties to the smallest (surviving, other) id
    /// pair.
    #[default]
    MaxGain,
    /// Scan pairs in id order and merge the first with positive gain.
    FirstFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GreedyPolicy {
    pub order: MergeOrder,
}

impl GreedyPolicy {
    pub fn max_gain() -> Self {
        GreedyPolicy {
            order: MergeOrder::MaxGain,
        }
    }

    pub fn first_found() -> Self {
        GreedyPolicy {
            order: MergeOrder::FirstFound,
        }
    }
}

/// The pair the policy would merge next, or `None` when every pairwise gain
/// is at most zero. Gains of exactly zero never trigger a merge.
pub fn next_merge(c: &Clustering, policy: GreedyPolicy) -> Option<(ClusterId, ClusterId)> {
    let ids: Vec<ClusterId> = c.cluster_ids().collect();
    let mut best: Option<(i64, (ClusterId, ClusterId))> = None;
    for (i, &x) in ids.iter().enumerate() {
        for &y in &ids[i + 1..] {
            let gain = c.gain(x, y).expect("live ids");
            if gain <= 0 {
                continue;
            }
            match policy.order {
                MergeOrder::FirstFound => return Some((x, y)),
                MergeOrder::MaxGain => {
                    // Scanning in id order, strict improvement keeps the
                    // smallest pair among equal gains.
                    if best.is_none_or(|(g, _)| gain > g) {
                        best = Some((gain, (x, y)));
                    }
                }
            }
        }
    }
    best.map(|(_, pair)| pair)
}

/// One online step: admit the next vertex, then run the merge cascade to
/// exhaustion. The returned state has no pair of positive gain.
pub fn greedy_step(
    c: &mut Clustering,
    inst: &LabeledInstance,
    policy: GreedyPolicy,
) -> Result<(), ClusteringError> {
    c.arrive(inst)?;
    while let Some((x, y)) = next_merge(c, policy) {
        c.merge(x, y)?;
    }
    Ok(())
}

/// Runs the greedy algorithm over the whole stream and returns the clustering
/// after each arrival's cascade.
pub fn greedy_run(inst: &LabeledInstance, policy: GreedyPolicy) -> Vec<Clustering> {
    let mut c = Clustering::new();
    let mut trace = Vec::with_capacity(inst.n());
    for _ in 0..inst.n() {
        greedy_step(&mut c, inst, policy).expect("stream stays within the instance");
        trace.push(c.clone());
    }
    trace
}
