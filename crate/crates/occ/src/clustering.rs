//! Merge-only clusterings of an arrival prefix, with incremental agreement
//! accounting.
//!
//! A [`Clustering`] partitions the first `horizon` vertices of a
//! [`LabeledInstance`]. It supports two mutations, [`Clustering::arrive`] and
//! [`Clustering::merge`], so every reachable state coarsens its predecessors.
//! Profit (the agreement count) is maintained incrementally through the cached
//! positive-edge counts between cluster pairs; [`Clustering::score`] recounts
//! it from scratch and serves as the oracle for the incremental path in tests.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::instance::LabeledInstance;

/// Vertex index; equals the vertex's 0-based arrival position.
pub type Vertex = usize;

/// Cluster id. An id equals the smallest vertex in the cluster, so the
/// surviving id of a merge is the smaller one and ids are stable over time.
pub type ClusterId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusteringError {
    #[error("cannot arrive: all {n} vertices of the instance already arrived")]
    ArrivePastEnd { n: usize },
    #[error("unknown cluster id {0}")]
    UnknownCluster(ClusterId),
    #[error("cannot merge cluster {0} with itself")]
    MergeSelf(ClusterId),
    #[error("blocks do not partition the prefix: {0}")]
    NotAPartition(String),
}

/// Agreements (`profit`) and disagreements (`cost`) of a clustering against
/// the labels among the arrived vertices. An edge agrees when it is positive
/// inside a cluster or negative across clusters; `profit + cost` always equals
/// the edge count of the prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub profit: u64,
    pub cost: u64,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    horizon: usize,
    assignment: Vec<ClusterId>,
    /// Members kept sorted ascending; BTreeMap order is min-vertex order.
    clusters: BTreeMap<ClusterId, Vec<Vertex>>,
    /// Cached |Γ⁺(C, C')| per unordered cluster pair, keyed (lo, hi).
    /// Missing entries mean zero.
    inter_pos: HashMap<(ClusterId, ClusterId), u64>,
    profit: u64,
}

impl Default for Clustering {
    fn default() -> Self {
        Self::new()
    }
}

fn pair_key(x: ClusterId, y: ClusterId) -> (ClusterId, ClusterId) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

impl Clustering {
    pub fn new() -> Self {
        Clustering {
            horizon: 0,
            assignment: Vec::new(),
            clusters: BTreeMap::new(),
            inter_pos: HashMap::new(),
            profit: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Incrementally tracked profit.
    pub fn profit(&self) -> u64 {
        self.profit
    }

    /// Score derived from the incremental counter.
    pub fn score_tracked(&self) -> Score {
        let edges = LabeledInstance::edges_at(self.horizon);
        Score {
            profit: self.profit,
            cost: edges - self.profit,
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn non_singleton_count(&self) -> usize {
        self.clusters.values().filter(|m| m.len() > 1).count()
    }

    pub fn cluster_ids(&self) -> impl Iterator<Item = ClusterId> + '_ {
        self.clusters.keys().copied()
    }

    /// Clusters in ascending id (= minimum vertex) order.
    pub fn clusters(&self) -> impl Iterator<Item = (ClusterId, &[Vertex])> + '_ {
        self.clusters.iter().map(|(&id, m)| (id, m.as_slice()))
    }

    pub fn members(&self, id: ClusterId) -> Option<&[Vertex]> {
        self.clusters.get(&id).map(|m| m.as_slice())
    }

    pub fn cluster_of(&self, v: Vertex) -> Option<ClusterId> {
        self.assignment.get(v).copied()
    }

    /// Cached count of positive edges between two live clusters.
    pub fn inter_positive(&self, x: ClusterId, y: ClusterId) -> u64 {
        self.inter_pos.get(&pair_key(x, y)).copied().unwrap_or(0)
    }

    /// Admits the next vertex as a fresh singleton cluster and extends the
    /// positive-edge cache from the instance labels.
    pub fn arrive(&mut self, inst: &LabeledInstance) -> Result<ClusterId, ClusteringError> {
        if self.horizon >= inst.n() {
            return Err(ClusteringError::ArrivePastEnd { n: inst.n() });
        }
        let v = self.horizon;
        let mut positive_total = 0u64;
        for (&id, members) in &self.clusters {
            let pos = members
                .iter()
                .filter(|&&u| inst.label(v, u).is_positive())
                .count() as u64;
            if pos > 0 {
                self.inter_pos.insert(pair_key(id, v), pos);
                positive_total += pos;
            }
        }
        // Every edge of the new vertex is cut, so the negative ones agree.
        self.profit += v as u64 - positive_total;
        self.assignment.push(v);
        self.clusters.insert(v, vec![v]);
        self.horizon += 1;
        Ok(v)
    }

    fn ensure_live(&self, id: ClusterId) -> Result<(), ClusteringError> {
        if self.clusters.contains_key(&id) {
            Ok(())
        } else {
            Err(ClusteringError::UnknownCluster(id))
        }
    }

    /// Profit change from merging clusters `x` and `y`: `2|Γ⁺(x,y)| - |x||y|`.
    pub fn gain(&self, x: ClusterId, y: ClusterId) -> Result<i64, ClusteringError> {
        if x == y {
            return Err(ClusteringError::MergeSelf(x));
        }
        self.ensure_live(x)?;
        self.ensure_live(y)?;
        let size_product = (self.clusters[&x].len() * self.clusters[&y].len()) as i64;
        Ok(2 * self.inter_positive(x, y) as i64 - size_product)
    }

    /// Merges two clusters; the smaller id survives. Profit changes by exactly
    /// [`Clustering::gain`] of the pair.
    pub fn merge(&mut self, x: ClusterId, y: ClusterId) -> Result<ClusterId, ClusteringError> {
        let gain = self.gain(x, y)?;
        let (lo, hi) = pair_key(x, y);
        let absorbed = self.clusters.remove(&hi).expect("checked live");
        for &v in &absorbed {
            self.assignment[v] = lo;
        }
        let merged = self.clusters.get_mut(&lo).expect("checked live");
        merged.extend(absorbed);
        merged.sort_unstable();

        // Fold the absorbed cluster's cached rows into the survivor's.
        self.inter_pos.remove(&pair_key(lo, hi));
        let other_ids: Vec<ClusterId> = self
            .clusters
            .keys()
            .copied()
            .filter(|&z| z != lo)
            .collect();
        for z in other_ids {
            if let Some(count) = self.inter_pos.remove(&pair_key(hi, z)) {
                *self.inter_pos.entry(pair_key(lo, z)).or_insert(0) += count;
            }
        }

        self.profit = (self.profit as i64 + gain) as u64;
        Ok(lo)
    }

    /// Recounts agreements from scratch in O(horizon²). Kept independent of
    /// the incremental bookkeeping.
    pub fn score(&self, inst: &LabeledInstance) -> Score {
        debug_assert!(self.horizon <= inst.n());
        let mut profit = 0u64;
        for i in 1..self.horizon {
            for j in 0..i {
                let together = self.assignment[i] == self.assignment[j];
                if together == inst.label(i, j).is_positive() {
                    profit += 1;
                }
            }
        }
        Score {
            profit,
            cost: LabeledInstance::edges_at(self.horizon) - profit,
        }
    }

    /// True iff every cluster of `earlier` lies inside a single cluster of
    /// `self`, i.e. no earlier cluster was split.
    pub fn coarsens(&self, earlier: &Clustering) -> bool {
        if earlier.horizon > self.horizon {
            return false;
        }
        earlier.clusters.values().all(|members| {
            let target = self.assignment[members[0]];
            members.iter().all(|&v| self.assignment[v] == target)
        })
    }

    /// Builds a clustering over the first `t` vertices from explicit blocks,
    /// where `t` is the total number of vertices covered. The blocks must
    /// partition `0..t` and be non-empty.
    pub fn from_partition(
        inst: &LabeledInstance,
        blocks: &[Vec<Vertex>],
    ) -> Result<Self, ClusteringError> {
        let t: usize = blocks.iter().map(|b| b.len()).sum();
        let mut seen = vec![false; t];
        for block in blocks {
            if block.is_empty() {
                return Err(ClusteringError::NotAPartition("empty block".into()));
            }
            for &v in block {
                if v >= t {
                    return Err(ClusteringError::NotAPartition(format!(
                        "vertex {v} out of range for {t} covered vertices"
                    )));
                }
                if seen[v] {
                    return Err(ClusteringError::NotAPartition(format!(
                        "vertex {v} appears twice"
                    )));
                }
                seen[v] = true;
            }
        }
        if t > inst.n() {
            return Err(ClusteringError::NotAPartition(format!(
                "{t} vertices covered but the instance has only {}",
                inst.n()
            )));
        }

        let mut c = Clustering::new();
        for _ in 0..t {
            c.arrive(inst)?;
        }
        for block in blocks {
            let mut sorted = block.clone();
            sorted.sort_unstable();
            let mut acc = sorted[0];
            for &v in &sorted[1..] {
                acc = c.merge(acc, v)?;
            }
        }
        Ok(c)
    }

    /// Canonical block list: members ascending, blocks by minimum vertex.
    pub fn blocks(&self) -> Vec<Vec<Vertex>> {
        self.clusters.values().cloned().collect()
    }

    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.horizon == other.horizon && self.clusters == other.clusters
    }

    /// Report serialization: one line per cluster with 1-based sorted vertex
    /// ids, clusters ordered by minimum vertex id.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for members in self.clusters.values() {
            let line: Vec<String> = members.iter().map(|v| (v + 1).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Panics if any internal invariant fails; used by property tests.
    pub fn check_consistency(&self, inst: &LabeledInstance) {
        let mut covered = vec![false; self.horizon];
        for (&id, members) in &self.clusters {
            assert!(!members.is_empty(), "empty cluster {id}");
            assert_eq!(id, members[0], "cluster id must be its minimum vertex");
            assert!(members.windows(2).all(|w| w[0] < w[1]), "members unsorted");
            for &v in members {
                assert!(!covered[v], "vertex {v} in two clusters");
                covered[v] = true;
                assert_eq!(self.assignment[v], id, "assignment out of sync");
            }
        }
        assert!(covered.iter().all(|&c| c), "partition does not cover prefix");

        let scratch = self.score(inst);
        assert_eq!(scratch.profit, self.profit, "tracked profit diverged");

        let ids: Vec<ClusterId> = self.clusters.keys().copied().collect();
        for (i, &x) in ids.iter().enumerate() {
            for &y in &ids[i + 1..] {
                let recount = self.clusters[&x]
                    .iter()
                    .map(|&u| {
                        self.clusters[&y]
                            .iter()
                            .filter(|&&w| inst.label(u, w).is_positive())
                            .count() as u64
                    })
                    .sum::<u64>();
                assert_eq!(
                    recount,
                    self.inter_positive(x, y),
                    "inter_positive cache diverged for ({x}, {y})"
                );
            }
        }
    }
}
