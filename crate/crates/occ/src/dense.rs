//! The density-gated online algorithm.
//!
//! While the stream's offline optimum stays within an `alpha` fraction of
//! perfect, the algorithm periodically re-plans: at geometrically spaced
//! update times it queries the offline oracle, prunes the oracle clustering to
//! a bounded number of non-singleton clusters, and realizes the pruned
//! clustering by merges, carrying each maintained online cluster forward
//! through a half-containment tracking map. The same chain of pruned
//! clusterings also defines an offline containment forest whose induced
//! clustering must equal the online output exactly; [`forest_clustering`]
//! rebuilds it independently and serves as the strongest correctness oracle in
//! the repository.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::clustering::{ClusterId, Clustering, Vertex};
use crate::instance::LabeledInstance;
use crate::oracle::{oracle, seed_for_prefix, OracleConfig, OracleError, OracleResult};

#[derive(Debug, Error)]
pub enum DenseError {
    #[error("invalid constant: {0}")]
    BadConstant(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("update time {t} is not the current arrival (horizon {horizon})")]
    BadUpdateTime { t: usize, horizon: usize },
    #[error("merge-only contract violated at update time {time}: {msg}")]
    MergeOnly { time: usize, msg: String },
}

/// Constants of the density-gated algorithm. `eta` is only consulted by
/// [`check_constants`]; the algorithm itself depends on `alpha` and `tau`
/// solely through the density test and the update schedule.
#[derive(Debug, Clone)]
pub struct DenseConfig {
    /// Density slack in (0, 1): a prefix passes the gate when the oracle
    /// profit reaches (1 - alpha) of the edge count.
    pub alpha: f64,
    /// Geometric spacing of update checkpoints, > 1.
    pub tau: f64,
    /// Earliest admissible first update time.
    pub t_min: usize,
    /// Competitive-margin constant used by the constant-arithmetic checks.
    pub eta: Option<f64>,
    pub oracle: OracleConfig,
}

impl Default for DenseConfig {
    /// The published constant regime. Far too conservative to ever fire at
    /// desk scale; see [`DenseConfig::relaxed`] for experiments.
    fn default() -> Self {
        DenseConfig {
            alpha: 1e-12,
            tau: 1.0946,
            t_min: 100,
            eta: Some(0.0555),
            oracle: OracleConfig::default(),
        }
    }
}

impl DenseConfig {
    /// Desk-scale constants: updates start firing on streams of a dozen
    /// vertices while keeping the pruning machinery non-trivial.
    pub fn relaxed() -> Self {
        DenseConfig {
            alpha: 0.01,
            tau: 1.5,
            t_min: 4,
            eta: Some(0.0555),
            oracle: OracleConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), DenseError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(DenseError::BadConstant(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        let tau_ok = self.tau.is_finite() && self.tau > 1.0;
        if !tau_ok {
            return Err(DenseError::BadConstant(format!(
                "tau must exceed 1, got {}",
                self.tau
            )));
        }
        if self.t_min == 0 {
            return Err(DenseError::BadConstant("t_min must be at least 1".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 0.5) {
                return Err(DenseError::BadConstant(format!(
                    "eta must lie in (0, 0.5), got {eta}"
                )));
            }
        }
        Ok(())
    }

    /// Pruning scale: eps = alpha^(1/4), in (0, 1).
    pub fn eps(&self) -> f64 {
        self.alpha.powf(0.25)
    }

    /// Number of top clusters that are always marked at an update:
    /// floor(1/eps). Computed as the largest k with k^4 * alpha <= 1 so the
    /// fourth-root rounding cannot shift the floor.
    pub fn auto_mark_count(&self) -> usize {
        largest_k(self.alpha, 4)
    }

    /// Cap on non-singleton clusters in any pruned clustering:
    /// floor(1/eps^2), computed as the largest k with k^2 * alpha <= 1.
    pub fn keep_budget(&self) -> usize {
        largest_k(self.alpha, 2)
    }
}

/// Largest k >= 1 with k^power * alpha <= 1.
fn largest_k(alpha: f64, power: i32) -> usize {
    let ok = |k: u64| (k as f64).powi(power) * alpha <= 1.0;
    let est = (1.0 / alpha).powf(1.0 / power as f64).floor();
    let mut k = est.clamp(1.0, 1e15) as u64;
    while k > 1 && !ok(k) {
        k -= 1;
    }
    while ok(k + 1) {
        k += 1;
    }
    k as usize
}

/// Density gate: does `profit` reach (1 - alpha) of the edge count among the
/// first `t` vertices? Compares 2 * profit against (1 - alpha) * t * (t - 1)
/// so no intermediate rounding of the half can flip the verdict.
pub fn profit_is_dense(profit: u64, t: usize, alpha: f64) -> bool {
    2.0 * profit as f64 >= (1.0 - alpha) * (t as f64) * (t as f64 - 1.0)
}

/// Strict majority containment: |a ∩ b| > |a| / 2. Slices must be sorted.
pub fn half_contained(a: &[Vertex], b: &[Vertex]) -> bool {
    if a.is_empty() {
        return false;
    }
    let mut common = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    2 * common > a.len()
}

/// Smallest integer checkpoint ceil(tau^j), j >= 1, strictly greater than `t`.
pub fn first_checkpoint_after(tau: f64, t: usize) -> usize {
    debug_assert!(tau > 1.0);
    let mut x = tau;
    loop {
        let c = x.ceil() as usize;
        if c > t {
            return c;
        }
        x *= tau;
    }
}

/// Cluster ids sorted by size descending, ties to the smallest minimum vertex
/// id (which is the id itself).
fn ids_by_size(c: &Clustering) -> Vec<ClusterId> {
    let mut ids: Vec<ClusterId> = c.cluster_ids().collect();
    ids.sort_by_key(|&id| (std::cmp::Reverse(c.members(id).map_or(0, |m| m.len())), id));
    ids
}

fn keep_and_split(
    inst: &LabeledInstance,
    source: &Clustering,
    kept: &[ClusterId],
) -> Clustering {
    let mut blocks: Vec<Vec<Vertex>> = Vec::new();
    for (id, members) in source.clusters() {
        if kept.contains(&id) {
            blocks.push(members.to_vec());
        } else {
            for &v in members {
                blocks.push(vec![v]);
            }
        }
    }
    Clustering::from_partition(inst, &blocks).expect("kept/split blocks partition the prefix")
}

/// First pruned clustering: keep the `keep_budget` largest clusters of the
/// oracle clustering, split everything else into singletons. Returns the
/// pruned clustering and the ids of the kept clusters.
pub fn prune_initial(
    inst: &LabeledInstance,
    opt: &Clustering,
    keep_budget: usize,
) -> (Clustering, Vec<ClusterId>) {
    let mut kept: Vec<ClusterId> = ids_by_size(opt).into_iter().take(keep_budget).collect();
    kept.sort_unstable();
    (keep_and_split(inst, opt, &kept), kept)
}

/// Subsequent pruned clustering. A cluster D of the new oracle clustering is
/// marked iff one of the `keep_budget - auto_mark_count` largest non-singleton
/// clusters of the previous pruned clustering is half-contained in D, or D is
/// among the `auto_mark_count` largest clusters of the oracle clustering.
/// Marked clusters survive; every other vertex becomes a singleton.
pub fn prune_next(
    inst: &LabeledInstance,
    prev_pruned: &Clustering,
    opt: &Clustering,
    auto_mark_count: usize,
    keep_budget: usize,
) -> (Clustering, Vec<ClusterId>) {
    let carried: Vec<&[Vertex]> = ids_by_size(prev_pruned)
        .into_iter()
        .filter(|&id| prev_pruned.members(id).map_or(0, |m| m.len()) > 1)
        .take(keep_budget.saturating_sub(auto_mark_count))
        .map(|id| prev_pruned.members(id).expect("ranked id"))
        .collect();
    let top: Vec<ClusterId> = ids_by_size(opt).into_iter().take(auto_mark_count).collect();

    let mut marked: Vec<ClusterId> = Vec::new();
    for (id, members) in opt.clusters() {
        if top.contains(&id) || carried.iter().any(|a| half_contained(a, members)) {
            marked.push(id);
        }
    }
    (keep_and_split(inst, opt, &marked), marked)
}

/// One link of the pruned-optimum chain.
#[derive(Debug, Clone)]
pub struct ChainEntry {
    pub time: usize,
    /// The oracle clustering and score at this update time.
    pub opt: OracleResult,
    /// The pruned clustering the online algorithm realizes.
    pub pruned: Clustering,
    /// Ids of the marked (first entry: kept) clusters of `opt`.
    pub marked: Vec<ClusterId>,
}

#[derive(Debug, Clone, Default)]
pub struct OptimumChain {
    pub entries: Vec<ChainEntry>,
}

impl OptimumChain {
    pub fn last_time(&self) -> Option<usize> {
        self.entries.last().map(|e| e.time)
    }
}

/// Tracking map from live online cluster ids to the pruned-clustering cluster
/// they currently follow. Clusters absent from the map are frozen: their
/// vertices never move again.
pub type TrackingMap = BTreeMap<ClusterId, ClusterId>;

#[derive(Debug, Clone)]
pub struct DenseState {
    pub clustering: Clustering,
    pub chain: OptimumChain,
    pub tracking: TrackingMap,
    pub config: DenseConfig,
}

impl DenseState {
    pub fn new(config: DenseConfig) -> Self {
        DenseState {
            clustering: Clustering::new(),
            chain: OptimumChain::default(),
            tracking: TrackingMap::new(),
            config,
        }
    }
}

fn oracle_at(
    inst: &LabeledInstance,
    t: usize,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    let per_prefix = OracleConfig {
        seed: seed_for_prefix(cfg.seed, t),
        ..cfg.clone()
    };
    oracle(inst, t, &per_prefix)
}

/// Earliest admissible update time after the chain's last entry, scanning the
/// stream up to `horizon`: the first time at or past `t_min` (first update) or
/// at or past the next checkpoint (later updates) whose oracle profit passes
/// the density gate. `None` if no such time exists up to `horizon`.
pub fn next_update_time(
    chain: &OptimumChain,
    inst: &LabeledInstance,
    config: &DenseConfig,
    horizon: usize,
) -> Result<Option<usize>, DenseError> {
    config.validate()?;
    let start = match chain.last_time() {
        None => config.t_min,
        Some(t) => first_checkpoint_after(config.tau, t),
    };
    for t in start..=horizon.min(inst.n()) {
        let opt = oracle_at(inst, t, &config.oracle)?;
        if profit_is_dense(opt.profit, t, config.alpha) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn build_pruned(
    state: &DenseState,
    inst: &LabeledInstance,
    opt: &Clustering,
) -> (Clustering, Vec<ClusterId>) {
    let budget = state.config.keep_budget();
    match state.chain.entries.last() {
        None => prune_initial(inst, opt, budget),
        Some(prev) => prune_next(
            inst,
            &prev.pruned,
            opt,
            state.config.auto_mark_count(),
            budget,
        ),
    }
}

/// Applies the update for time `t` given the oracle result at `t`. For every
/// cluster D of the new pruned clustering, the realized online cluster is the
/// union of D's vertices that arrived since the previous update (all still
/// singletons) with every maintained online cluster whose tracked cluster is
/// half-contained in D; those parts are merged and the result tracks D.
/// Online clusters absorbed nowhere lose their tracking entry and freeze.
fn apply_update(
    state: &mut DenseState,
    inst: &LabeledInstance,
    t: usize,
    opt: OracleResult,
) -> Result<(), DenseError> {
    if t != state.clustering.horizon() {
        return Err(DenseError::BadUpdateTime {
            t,
            horizon: state.clustering.horizon(),
        });
    }
    let prev_time = state.chain.last_time().unwrap_or(0);
    if t <= prev_time {
        return Err(DenseError::BadUpdateTime {
            t,
            horizon: state.clustering.horizon(),
        });
    }

    let (pruned, marked) = build_pruned(state, inst, &opt.clustering);

    // Plan first: each entry is (parts to merge, tracked target). The parts
    // are whole live clusters, so realizing the plan is merge-only.
    let mut plan: Vec<(Vec<ClusterId>, ClusterId)> = Vec::new();
    let prev_pruned = state.chain.entries.last().map(|e| &e.pruned);
    for (d_id, d_members) in pruned.clusters() {
        let mut parts: Vec<ClusterId> = Vec::new();
        for &v in d_members.iter().filter(|&&v| v >= prev_time) {
            let cid = state
                .clustering
                .cluster_of(v)
                .expect("arrived vertex has a cluster");
            if cid != v || state.clustering.members(cid).map_or(0, |m| m.len()) != 1 {
                return Err(DenseError::MergeOnly {
                    time: t,
                    msg: format!("vertex {} is no longer a singleton", v + 1),
                });
            }
            parts.push(v);
        }
        if let Some(prev) = prev_pruned {
            for (&online_id, &tracked_id) in &state.tracking {
                let tracked = prev.members(tracked_id).expect("tracked cluster exists");
                if half_contained(tracked, d_members) {
                    parts.push(online_id);
                }
            }
        }
        if !parts.is_empty() {
            plan.push((parts, d_id));
        }
    }

    // A cluster can be claimed by at most one target because half-containment
    // targets are unique; double claims would force a split.
    let mut claimed: Vec<ClusterId> = plan.iter().flat_map(|(p, _)| p.iter().copied()).collect();
    claimed.sort_unstable();
    if claimed.windows(2).any(|w| w[0] == w[1]) {
        return Err(DenseError::MergeOnly {
            time: t,
            msg: "an online cluster was claimed by two pruned clusters".into(),
        });
    }

    let mut tracking = TrackingMap::new();
    for (parts, d_id) in plan {
        let mut acc = parts[0];
        for &p in &parts[1..] {
            acc = state
                .clustering
                .merge(acc, p)
                .map_err(|e| DenseError::MergeOnly {
                    time: t,
                    msg: e.to_string(),
                })?;
        }
        tracking.insert(acc, d_id);
    }
    state.tracking = tracking;
    state.chain.entries.push(ChainEntry {
        time: t,
        opt,
        pruned,
        marked,
    });
    Ok(())
}

/// Public single-update entry point: queries the oracle at `t` and applies the
/// update. `t` must be the current arrival and lie past the last update.
pub fn dense_update(
    state: &mut DenseState,
    inst: &LabeledInstance,
    t: usize,
) -> Result<(), DenseError> {
    let opt = oracle_at(inst, t, &state.config.oracle)?;
    apply_update(state, inst, t, opt)
}

#[derive(Debug, Clone)]
pub struct DenseRun {
    /// Clustering after each arrival (and its update, if one fired).
    pub trace: Vec<Clustering>,
    pub state: DenseState,
}

impl DenseRun {
    pub fn final_clustering(&self) -> &Clustering {
        self.trace.last().expect("non-empty stream")
    }
}

/// Runs the density-gated algorithm over the whole stream. Arrivals become
/// singletons; whenever the schedule fires, the pruned-chain update merges
/// them into the maintained clusters; after the last update time arrivals stay
/// singletons.
pub fn dense_run(inst: &LabeledInstance, config: &DenseConfig) -> Result<DenseRun, DenseError> {
    config.validate()?;
    let mut state = DenseState::new(config.clone());
    let mut trace = Vec::with_capacity(inst.n());
    let mut search_from = config.t_min;
    for t in 1..=inst.n() {
        state
            .clustering
            .arrive(inst)
            .expect("stream stays within the instance");
        if t >= search_from {
            let opt = oracle_at(inst, t, &config.oracle)?;
            if profit_is_dense(opt.profit, t, config.alpha) {
                apply_update(&mut state, inst, t, opt)?;
                search_from = first_checkpoint_after(config.tau, t);
            }
        }
        trace.push(state.clustering.clone());
    }
    Ok(DenseRun { trace, state })
}

/// Offline reconstruction of the clustering the online algorithm maintains.
///
/// Replays the update schedule up to time `t`, then builds a forest with one
/// node per (update, pruned cluster): a cluster A of one update is the child
/// of a cluster B of the next update iff A is half-contained in B. Every tree
/// contributes one output cluster, the union over its nodes A (at update i) of
/// A's vertices that arrived in the window (t_{i-1}, t_i]; vertices after the
/// last update stay singletons.
pub fn forest_clustering(
    inst: &LabeledInstance,
    config: &DenseConfig,
    t: usize,
) -> Result<Clustering, DenseError> {
    config.validate()?;
    if t > inst.n() {
        return Err(OracleError::BadPrefix { t, n: inst.n() }.into());
    }

    // Replay the schedule and pruning chain, independent of the online state.
    let mut entries: Vec<(usize, Clustering)> = Vec::new();
    let mut search_from = config.t_min;
    for time in 1..=t {
        if time < search_from {
            continue;
        }
        let opt = oracle_at(inst, time, &config.oracle)?;
        if !profit_is_dense(opt.profit, time, config.alpha) {
            continue;
        }
        let pruned = match entries.last() {
            None => prune_initial(inst, &opt.clustering, config.keep_budget()).0,
            Some((_, prev)) => {
                prune_next(
                    inst,
                    prev,
                    &opt.clustering,
                    config.auto_mark_count(),
                    config.keep_budget(),
                )
                .0
            }
        };
        entries.push((time, pruned));
        search_from = first_checkpoint_after(config.tau, time);
    }

    // Forest nodes are (level, cluster id); each has at most one parent at
    // the next level, found by half-containment.
    let mut nodes: Vec<(usize, ClusterId)> = Vec::new();
    let mut index: BTreeMap<(usize, ClusterId), usize> = BTreeMap::new();
    for (level, (_, pruned)) in entries.iter().enumerate() {
        for (id, _) in pruned.clusters() {
            index.insert((level, id), nodes.len());
            nodes.push((level, id));
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; nodes.len()];
    for level in 1..entries.len() {
        let (_, prev) = &entries[level - 1];
        let (_, next) = &entries[level];
        for (a_id, a_members) in prev.clusters() {
            for (b_id, b_members) in next.clusters() {
                if half_contained(a_members, b_members) {
                    parent[index[&(level - 1, a_id)]] = Some(index[&(level, b_id)]);
                    break;
                }
            }
        }
    }
    let root = |mut i: usize| {
        while let Some(p) = parent[i] {
            i = p;
        }
        i
    };

    // Window slice of each node, accumulated per tree.
    let mut tree_blocks: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    for (node_idx, &(level, id)) in nodes.iter().enumerate() {
        let (time, pruned) = &entries[level];
        let prev_time = if level == 0 { 0 } else { entries[level - 1].0 };
        let slice: Vec<Vertex> = pruned
            .members(id)
            .expect("indexed cluster")
            .iter()
            .copied()
            .filter(|&v| v >= prev_time && v < *time)
            .collect();
        if !slice.is_empty() {
            tree_blocks.entry(root(node_idx)).or_default().extend(slice);
        }
    }

    let mut blocks: Vec<Vec<Vertex>> = tree_blocks.into_values().collect();
    let last_update = entries.last().map_or(0, |(time, _)| *time);
    for v in last_update..t {
        blocks.push(vec![v]);
    }
    Ok(Clustering::from_partition(inst, &blocks).expect("forest blocks partition the prefix"))
}

/// Evaluates the constants inequality gating the competitive guarantee:
/// eta <= 1.5 - tau² - ((2√3 + 9/2)·eps + eps/(1-eps) + alpha/2) · 2(2tau-1)/(tau-1)
/// with eps = alpha^(1/4).
pub fn check_constants(alpha: f64, tau: f64, eta: f64) -> Result<bool, DenseError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DenseError::BadConstant(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let tau_ok = tau.is_finite() && tau > 1.0;
    if !tau_ok {
        return Err(DenseError::BadConstant(format!(
            "tau must exceed 1, got {tau}"
        )));
    }
    if !(eta > 0.0 && eta < 0.5) {
        return Err(DenseError::BadConstant(format!(
            "eta must lie in (0, 0.5), got {eta}"
        )));
    }
    let eps = alpha.powf(0.25);
    let drift = (2.0 * 3f64.sqrt() + 4.5) * eps + eps / (1.0 - eps) + alpha / 2.0;
    let rhs = 1.5 - tau * tau - drift * 2.0 * (2.0 * tau - 1.0) / (tau - 1.0);
    Ok(eta <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{self, EdgeSign};
    use crate::oracle::OraclePolicy;

    fn exact_config(alpha: f64, tau: f64, t_min: usize) -> DenseConfig {
        DenseConfig {
            alpha,
            tau,
            t_min,
            eta: Some(0.0555),
            oracle: OracleConfig {
                policy: OraclePolicy::ExactOnly,
                ..OracleConfig::default()
            },
        }
    }

    #[test]
    fn density_gate_examples() {
        assert!(profit_is_dense(6, 4, 0.3)); // perfect profit always passes
        assert!(!profit_is_dense(0, 2, 0.5)); // 0 < 0.5 * 1
        assert!(profit_is_dense(41, 10, 0.1)); // 41 >= 40.5
        assert!(!profit_is_dense(40, 10, 0.1));
    }

    #[test]
    fn derived_counts_avoid_root_rounding() {
        let cfg = exact_config(0.01, 1.5, 4);
        assert_eq!(cfg.keep_budget(), 10); // 1/eps^2 = 10 exactly
        assert_eq!(cfg.auto_mark_count(), 3); // floor(10^(1/2)) ... floor(3.162)
        let paper = DenseConfig::default();
        assert_eq!(paper.keep_budget(), 1_000_000);
        assert_eq!(paper.auto_mark_count(), 1_000);
        let coarse = exact_config(0.4, 1.9, 4);
        assert_eq!(coarse.keep_budget(), 1);
        assert_eq!(coarse.auto_mark_count(), 1);
    }

    #[test]
    fn half_containment_examples() {
        assert!(half_contained(&[1, 2], &[0, 1, 2, 3])); // subset
        assert!(!half_contained(&[1, 2], &[2, 3])); // exactly half is not enough
        assert!(half_contained(&[1, 2, 3], &[2, 3, 9]));
        assert!(!half_contained(&[], &[1]));
    }

    #[test]
    fn checkpoint_sequence_tau_15() {
        // ceil(1.5^j): 2, 3, 4, 6, 8, 12, 18, ...
        assert_eq!(first_checkpoint_after(1.5, 1), 2);
        assert_eq!(first_checkpoint_after(1.5, 2), 3);
        assert_eq!(first_checkpoint_after(1.5, 3), 4);
        assert_eq!(first_checkpoint_after(1.5, 4), 6);
        assert_eq!(first_checkpoint_after(1.5, 6), 8);
        assert_eq!(first_checkpoint_after(1.5, 8), 12);
        assert_eq!(first_checkpoint_after(1.5, 12), 18);
    }

    #[test]
    fn update_times_on_all_positive_stream() {
        let inst = instance::all_positive(6).unwrap(); // n = 12
        let config = exact_config(0.01, 1.5, 4);
        let chain = OptimumChain::default();
        assert_eq!(next_update_time(&chain, &inst, &config, 12).unwrap(), Some(4));

        let run = dense_run(&inst, &config).unwrap();
        let times: Vec<usize> = run.state.chain.entries.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![4, 6, 8, 12]);
        let last = run.final_clustering();
        assert_eq!(last.cluster_count(), 1);
        assert_eq!(last.profit(), 66);
    }

    #[test]
    fn no_update_before_t_min() {
        let inst = instance::all_positive(3).unwrap(); // n = 6
        let config = exact_config(0.01, 1.5, 5);
        let run = dense_run(&inst, &config).unwrap();
        let times: Vec<usize> = run.state.chain.entries.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![5, 6]);
    }

    #[test]
    fn never_dense_stream_stays_singletons() {
        // Balanced random labels: the optimum is far from perfect at alpha = 0.01.
        let inst = instance::planted(2, 4, 0.5, 40).unwrap();
        let config = exact_config(0.01, 1.5, 4);
        let run = dense_run(&inst, &config).unwrap();
        assert!(run.state.chain.entries.is_empty());
        assert_eq!(run.final_clustering().cluster_count(), inst.n());
        let chain = OptimumChain::default();
        assert_eq!(next_update_time(&chain, &inst, &config, inst.n()).unwrap(), None);
    }

    #[test]
    fn all_negative_stream_keeps_singletons_at_full_profit() {
        let inst = LabeledInstance::from_fn(8, |_, _| EdgeSign::Negative);
        let config = exact_config(0.01, 1.5, 4);
        let run = dense_run(&inst, &config).unwrap();
        // All-singleton clusterings are perfect here, so updates do fire but
        // every pruned cluster is a singleton.
        assert!(!run.state.chain.entries.is_empty());
        let last = run.final_clustering();
        assert_eq!(last.cluster_count(), 8);
        assert_eq!(last.profit(), 28);
    }

    #[test]
    fn prune_initial_examples() {
        let inst = instance::all_positive(3).unwrap();
        let one_cluster = Clustering::from_partition(&inst, &[vec![0, 1, 2, 3, 4, 5]]).unwrap();
        let (pruned, kept) = prune_initial(&inst, &one_cluster, 10);
        assert!(pruned.same_partition(&one_cluster));
        assert_eq!(kept, vec![0]);

        // Five clusters, budget 3: the two smallest split into singletons.
        let inst = instance::planted(1, 9, 0.0, 1).unwrap();
        let five = Clustering::from_partition(
            &inst,
            &[vec![0, 1, 2], vec![3, 4], vec![5, 6], vec![7], vec![8]],
        )
        .unwrap();
        let (pruned, kept) = prune_initial(&inst, &five, 3);
        assert_eq!(kept, vec![0, 3, 5]);
        assert_eq!(
            pruned.blocks(),
            vec![vec![0, 1, 2], vec![3, 4], vec![5, 6], vec![7], vec![8]]
        );

        let (pruned, kept) = prune_initial(&inst, &five, 2);
        assert_eq!(kept, vec![0, 3]);
        assert_eq!(
            pruned.blocks(),
            vec![
                vec![0, 1, 2],
                vec![3, 4],
                vec![5],
                vec![6],
                vec![7],
                vec![8]
            ]
        );
    }

    #[test]
    fn prune_initial_split_cost_is_bounded() {
        // Splitting small clusters costs at most (largest split size) * t1.
        let inst = instance::planted(3, 4, 0.15, 6).unwrap();
        let opt = crate::oracle::exact_optimum(&inst, 12, 12).unwrap();
        let (pruned, kept) = prune_initial(&inst, &opt.clustering, 2);
        let largest_split = opt
            .clustering
            .clusters()
            .filter(|(id, _)| !kept.contains(id))
            .map(|(_, m)| m.len() as u64)
            .max()
            .unwrap_or(0);
        let before = opt.clustering.score(&inst).cost;
        let after = pruned.score(&inst).cost;
        assert!(after >= before);
        assert!(after - before <= largest_split * 12);
    }

    #[test]
    fn prune_next_marks_by_containment_and_rank() {
        let inst = instance::planted(1, 8, 0.0, 2).unwrap();
        // Previous pruned clustering: one big cluster {0..4} plus singletons.
        let prev = Clustering::from_partition(
            &inst,
            &[vec![0, 1, 2, 3, 4], vec![5], vec![6], vec![7]],
        )
        .unwrap();
        // New oracle clustering: {0..5} and {6, 7}.
        let opt = Clustering::from_partition(&inst, &[vec![0, 1, 2, 3, 4, 5], vec![6, 7]]).unwrap();

        // Budget 5, auto-mark 1: {0..5} marked both ways, {6,7} only by rank
        // if it makes the top-1, which it does not.
        let (pruned, marked) = prune_next(&inst, &prev, &opt, 1, 5);
        assert_eq!(marked, vec![0]);
        assert_eq!(
            pruned.blocks(),
            vec![vec![0, 1, 2, 3, 4, 5], vec![6], vec![7]]
        );

        // Auto-mark 2: both clusters marked.
        let (pruned, marked) = prune_next(&inst, &prev, &opt, 2, 5);
        assert_eq!(marked, vec![0, 6]);
        assert_eq!(pruned.blocks(), vec![vec![0, 1, 2, 3, 4, 5], vec![6, 7]]);

        // All-singleton previous state can only mark by rank.
        let singles = Clustering::from_partition(
            &inst,
            &(0..8).map(|v| vec![v]).collect::<Vec<_>>(),
        )
        .unwrap();
        let (_, marked) = prune_next(&inst, &singles, &opt, 1, 5);
        assert_eq!(marked, vec![0]);
    }

    #[test]
    fn planted_stream_tracks_both_clusters() {
        // Cluster-by-cluster arrivals: vertices 0..4 then 5..9, noiseless.
        let inst = LabeledInstance::from_fn(10, |i, j| {
            if (i < 5) == (j < 5) {
                EdgeSign::Positive
            } else {
                EdgeSign::Negative
            }
        });
        let config = exact_config(0.01, 1.5, 4);
        let run = dense_run(&inst, &config).unwrap();
        let times: Vec<usize> = run.state.chain.entries.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![4, 6, 8]);

        // After t=6 the second planted cluster exists; the online clustering
        // follows the planted structure restricted to each update horizon.
        let at_6 = &run.trace[5];
        assert_eq!(at_6.blocks(), vec![vec![0, 1, 2, 3, 4], vec![5]]);
        let at_8 = &run.trace[7];
        assert_eq!(at_8.blocks(), vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7]]);
        // Tracking stays on the two planted clusters across updates.
        let final_tracking = &run.state.tracking;
        assert_eq!(final_tracking.len(), 2);
        assert!(final_tracking.contains_key(&0));
        assert!(final_tracking.contains_key(&5));
        // Vertices 8, 9 arrive after the last update and stay singletons.
        assert_eq!(
            run.final_clustering().blocks(),
            vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7], vec![8], vec![9]]
        );
    }

    #[test]
    fn vanished_tracked_cluster_freezes() {
        // Eight vertices. 0..4 form a positive clique; 4, 5, 6 love {0, 1}
        // and each other but hate {2, 3}; 7 hates everyone. At alpha = 0.4 and
        // tau = 1.9 the updates land at t = 4 and t = 7, and the t = 7 optimum
        // {0,1,4,5,6} | {2,3} contains at most half of the tracked {0,1,2,3},
        // so that online cluster freezes and never moves again.
        let pos: &[(usize, usize)] = &[
            (1, 0),
            (2, 0),
            (2, 1),
            (3, 0),
            (3, 1),
            (3, 2),
            (4, 0),
            (4, 1),
            (5, 0),
            (5, 1),
            (5, 4),
            (6, 0),
            (6, 1),
            (6, 4),
            (6, 5),
        ];
        let inst = LabeledInstance::from_fn(8, |i, j| {
            if pos.contains(&(i, j)) {
                EdgeSign::Positive
            } else {
                EdgeSign::Negative
            }
        });
        let config = exact_config(0.4, 1.9, 4);
        let run = dense_run(&inst, &config).unwrap();
        let times: Vec<usize> = run.state.chain.entries.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![4, 7]);

        let second = &run.state.chain.entries[1];
        assert_eq!(
            second.opt.clustering.blocks(),
            vec![vec![0, 1, 4, 5, 6], vec![2, 3]]
        );
        // {0,1,2,3} is tracked after t=4 but half-contained in nothing at t=7.
        assert_eq!(
            run.final_clustering().blocks(),
            vec![vec![0, 1, 2, 3], vec![4, 5, 6], vec![7]]
        );
        // The frozen cluster has no tracking entry; the new one tracks the
        // large pruned cluster.
        assert_eq!(run.state.tracking.len(), 1);
        assert_eq!(run.state.tracking.get(&4), Some(&0));
        // Forest reconstruction agrees.
        let forest = forest_clustering(&inst, &config, 8).unwrap();
        assert!(forest.same_partition(run.final_clustering()));
    }

    #[test]
    fn two_tracked_clusters_merge_into_one_node() {
        // Vertices 0-1 and 2-3 form two positive pairs with negative cross
        // edges; 4, 5, 6 are positive to everyone. At alpha = 0.2 the budget
        // keeps both pairs at t = 4, and at t = 7 the optimum is one cluster,
        // so both tracked clusters are half-contained in the same target: a
        // forest node with two children, merged into a single output cluster.
        let pos_pairs: &[(usize, usize)] = &[(1, 0), (3, 2)];
        let inst = LabeledInstance::from_fn(7, |i, j| {
            if i >= 4 || pos_pairs.contains(&(i, j)) {
                EdgeSign::Positive
            } else {
                EdgeSign::Negative
            }
        });
        let config = exact_config(0.2, 1.9, 4);
        assert_eq!(config.keep_budget(), 2);
        assert_eq!(config.auto_mark_count(), 1);

        let run = dense_run(&inst, &config).unwrap();
        let times: Vec<usize> = run.state.chain.entries.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![4, 7]);
        assert_eq!(
            run.state.chain.entries[0].pruned.blocks(),
            vec![vec![0, 1], vec![2, 3]]
        );
        assert_eq!(
            run.final_clustering().blocks(),
            vec![vec![0, 1, 2, 3, 4, 5, 6]]
        );
        let forest = forest_clustering(&inst, &config, 7).unwrap();
        assert!(forest.same_partition(run.final_clustering()));
    }

    #[test]
    fn dense_beats_half_on_qualifying_streams() {
        // Streams whose final optimum is within alpha/2 of perfect (noiseless
        // planted instances) must end with more than half the optimum profit
        // under the relaxed constants.
        for (clusters, size, seed) in [(2usize, 5usize, 1u64), (2, 6, 2), (3, 4, 3), (1, 12, 4)] {
            let inst = instance::planted(clusters, size, 0.0, seed).unwrap();
            let n = inst.n();
            let opt = crate::oracle::exact_optimum(&inst, n, 12).unwrap();
            assert_eq!(opt.profit, LabeledInstance::edges_at(n));
            for tau in [1.1, 1.5] {
                let run = dense_run(&inst, &exact_config(0.01, tau, 4)).unwrap();
                let profit = run.final_clustering().profit();
                assert!(
                    2 * profit > opt.profit,
                    "planted({clusters},{size}) seed {seed} tau {tau}: {profit} vs {}",
                    opt.profit
                );
            }
        }
    }

    #[test]
    fn forest_matches_dense_on_shuffled_planted_streams() {
        for seed in 0..6u64 {
            let inst = instance::planted(2, 5, 0.0, seed).unwrap();
            for tau in [1.1, 1.5] {
                let config = exact_config(0.01, tau, 4);
                let run = dense_run(&inst, &config).unwrap();
                let forest = forest_clustering(&inst, &config, inst.n()).unwrap();
                assert!(
                    forest.same_partition(run.final_clustering()),
                    "seed {seed} tau {tau}"
                );
            }
        }
    }

    #[test]
    fn forest_with_single_update_is_pruned_plus_singletons() {
        let inst = instance::all_positive(3).unwrap(); // n = 6
        let config = exact_config(0.01, 10.0, 4);
        // tau = 10: first checkpoint after 4 is 10 > 6, so exactly one update.
        let run = dense_run(&inst, &config).unwrap();
        assert_eq!(run.state.chain.entries.len(), 1);
        let forest = forest_clustering(&inst, &config, 6).unwrap();
        assert!(forest.same_partition(run.final_clustering()));
        assert_eq!(
            forest.blocks(),
            vec![vec![0, 1, 2, 3], vec![4], vec![5]]
        );
    }

    #[test]
    fn pruned_chain_respects_budget() {
        for seed in [3u64, 14, 25] {
            let inst = instance::planted(3, 4, 0.05, seed).unwrap();
            let config = exact_config(0.01, 1.5, 4);
            let run = dense_run(&inst, &config).unwrap();
            for entry in &run.state.chain.entries {
                assert!(entry.pruned.non_singleton_count() <= config.keep_budget());
                for (id, members) in entry.pruned.clusters() {
                    if members.len() > 1 {
                        assert_eq!(entry.opt.clustering.members(id), Some(members));
                    }
                }
            }
        }
    }

    #[test]
    fn dense_update_rejects_stale_time() {
        let inst = instance::all_positive(3).unwrap();
        let mut state = DenseState::new(exact_config(0.01, 1.5, 4));
        for _ in 0..4 {
            state.clustering.arrive(&inst).unwrap();
        }
        assert!(matches!(
            dense_update(&mut state, &inst, 3),
            Err(DenseError::BadUpdateTime { .. })
        ));
        dense_update(&mut state, &inst, 4).unwrap();
        assert_eq!(state.chain.last_time(), Some(4));
    }

    #[test]
    fn config_validation() {
        let mut cfg = DenseConfig::relaxed();
        cfg.alpha = 0.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());
        cfg = DenseConfig::relaxed();
        cfg.tau = 1.0;
        assert!(cfg.validate().is_err());
        cfg = DenseConfig::relaxed();
        cfg.t_min = 0;
        assert!(cfg.validate().is_err());
        cfg = DenseConfig::relaxed();
        cfg.eta = Some(0.5);
        assert!(cfg.validate().is_err());
        assert!(DenseConfig::relaxed().validate().is_ok());
        assert!(DenseConfig::default().validate().is_ok());
    }

    #[test]
    fn constants_inequality() {
        // The published regime satisfies the inequality.
        assert!(check_constants(1e-12, 1.0946, 0.0555).unwrap());
        // tau^2 >= 1.5 makes the right side negative.
        assert!(!check_constants(1e-12, 1.23, 0.0555).unwrap());
        assert!(!check_constants(1e-6, 1.5, 0.1).unwrap());
        // Relaxed desk constants do not satisfy it.
        assert!(!check_constants(0.01, 1.1, 0.0555).unwrap());
        // Domain violations are rejected.
        assert!(check_constants(0.0, 1.1, 0.1).is_err());
        assert!(check_constants(0.5, 1.0, 0.1).is_err());
        assert!(check_constants(0.5, 1.1, 0.5).is_err());
    }

    #[test]
    fn merge_only_along_dense_traces() {
        let inst = instance::planted(2, 6, 0.0, 33).unwrap();
        let config = exact_config(0.01, 1.5, 4);
        let run = dense_run(&inst, &config).unwrap();
        for pair in run.trace.windows(2) {
            assert!(pair[1].coarsens(&pair[0]));
        }
    }
}
