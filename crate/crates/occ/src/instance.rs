//! Labeled complete graphs in arrival order: instance generators and the
//! `.occ` text format.
//!
//! Vertices are indexed by arrival position, 0-based: vertex `t` is the
//! `(t+1)`-th arrival, so the arrival order is part of the instance itself.
//! Other arrival orders are obtained through [`LabeledInstance::with_arrival_order`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use thiserror::Error;

/// Sign of an edge: positive means "similar", negative means "dissimilar".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeSign {
    Positive,
    Negative,
}

impl EdgeSign {
    pub fn is_positive(self) -> bool {
        matches!(self, EdgeSign::Positive)
    }

    pub fn flipped(self) -> Self {
        match self {
            EdgeSign::Positive => EdgeSign::Negative,
            EdgeSign::Negative => EdgeSign::Positive,
        }
    }

    fn as_char(self) -> char {
        match self {
            EdgeSign::Positive => '+',
            EdgeSign::Negative => '-',
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A complete graph on `n` vertices with `±` edge labels, immutable after
/// construction.
///
/// Labels live in a flat lower-triangular array: the edge between vertices
/// `i` and `j` with `j < i` sits at offset `i*(i-1)/2 + j`, giving O(1) access
/// and a cache-friendly layout for the O(n²) algorithms downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInstance {
    n: usize,
    labels: Vec<EdgeSign>,
}

impl LabeledInstance {
    /// Builds an instance from a labeling function. `f(i, j)` is called once
    /// per pair with `j < i`, in the fixed order `i = 1..n`, `j = 0..i`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> EdgeSign) -> Self {
        let mut labels = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 1..n {
            for j in 0..i {
                labels.push(f(i, j));
            }
        }
        LabeledInstance { n, labels }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges among the first `t` vertices.
    pub fn edges_at(t: usize) -> u64 {
        (t as u64) * (t as u64).saturating_sub(1) / 2
    }

    pub fn edge_count(&self) -> u64 {
        Self::edges_at(self.n)
    }

    /// Label of the edge between two distinct vertices, in either order.
    pub fn label(&self, a: usize, b: usize) -> EdgeSign {
        debug_assert!(a != b && a < self.n && b < self.n);
        let (i, j) = if a > b { (a, b) } else { (b, a) };
        self.labels[i * (i - 1) / 2 + j]
    }

    pub fn positive_count(&self) -> u64 {
        self.labels.iter().filter(|s| s.is_positive()).count() as u64
    }

    pub fn negative_count(&self) -> u64 {
        self.edge_count() - self.positive_count()
    }

    /// Re-indexes the instance so that the k-th arrival of the result is the
    /// vertex `order[k]` of `self`. `order` must be a permutation of `0..n`.
    pub fn with_arrival_order(&self, order: &[usize]) -> Result<Self, InstanceError> {
        if order.len() != self.n {
            return Err(InstanceError::InvalidParam(format!(
                "order has length {}, instance has {} vertices",
                order.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &v in order {
            if v >= self.n || seen[v] {
                return Err(InstanceError::InvalidParam(
                    "order is not a permutation of the vertices".into(),
                ));
            }
            seen[v] = true;
        }
        Ok(Self::from_fn(self.n, |i, j| self.label(order[i], order[j])))
    }

    /// Serializes to the `.occ` format: line 1 is the vertex count, then one
    /// line per vertex `i >= 2` (1-based) holding `i-1` characters from
    /// `{+, -}`, character `j` giving the sign of the edge to the j-th arrival.
    pub fn to_occ(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.n).unwrap();
        for i in 1..self.n {
            for j in 0..i {
                out.push(self.labels[i * (i - 1) / 2 + j].as_char());
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `.occ` format. Errors name the offending 1-based line.
    pub fn parse_occ(text: &str) -> Result<Self, InstanceError> {
        if !text.ends_with('\n') {
            return Err(InstanceError::Parse {
                line: text.lines().count().max(1),
                msg: "missing trailing newline".into(),
            });
        }
        let mut rows: Vec<&str> = text.split('\n').collect();
        // `split` leaves one empty tail after the final newline.
        let tail = rows.pop();
        debug_assert_eq!(tail, Some(""));

        let first = *rows.first().ok_or(InstanceError::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let n: usize = first.parse().map_err(|_| InstanceError::Parse {
            line: 1,
            msg: format!("invalid vertex count {first:?}"),
        })?;
        if n == 0 {
            return Err(InstanceError::Parse {
                line: 1,
                msg: "vertex count must be positive".into(),
            });
        }
        if rows.len() != n {
            let line = if rows.len() < n { rows.len() + 1 } else { n + 1 };
            return Err(InstanceError::Parse {
                line,
                msg: format!(
                    "expected {} label lines after the count, found {}",
                    n - 1,
                    rows.len() - 1
                ),
            });
        }

        let mut labels = Vec::with_capacity(n * (n - 1) / 2);
        for (i, row) in rows.iter().enumerate().skip(1) {
            let line = i + 1;
            let mut count = 0usize;
            for ch in row.chars() {
                match ch {
                    '+' => labels.push(EdgeSign::Positive),
                    '-' => labels.push(EdgeSign::Negative),
                    other => {
                        return Err(InstanceError::Parse {
                            line,
                            msg: format!("illegal character {other:?}"),
                        })
                    }
                }
                count += 1;
            }
            if count != i {
                return Err(InstanceError::Parse {
                    line,
                    msg: format!("expected {} characters, found {}", i, count),
                });
            }
        }
        Ok(LabeledInstance { n, labels })
    }
}

/// A clique of `2m` vertices, every edge positive.
pub fn all_positive(m: usize) -> Result<LabeledInstance, InstanceError> {
    if m == 0 {
        return Err(InstanceError::InvalidParam("m must be at least 1".into()));
    }
    Ok(LabeledInstance::from_fn(2 * m, |_, _| EdgeSign::Positive))
}

/// Three groups of `2m` vertices each (total `6m`), all intra-group edges
/// positive. Within each group the first `m` vertices are "left" and the last
/// `m` are "right". Left-left edges across groups are positive, left-right
/// edges across groups are negative, and right-right edges across groups carry
/// `right_right`. The first group arrives first, so the length-`2m` prefix is
/// indistinguishable from [`all_positive`]`(m)`.
pub fn three_group_gadget(
    m: usize,
    right_right: EdgeSign,
) -> Result<LabeledInstance, InstanceError> {
    if m == 0 {
        return Err(InstanceError::InvalidParam("m must be at least 1".into()));
    }
    let group = |v: usize| v / (2 * m);
    let is_left = |v: usize| v % (2 * m) < m;
    Ok(LabeledInstance::from_fn(6 * m, |i, j| {
        if group(i) == group(j) || (is_left(i) && is_left(j)) {
            EdgeSign::Positive
        } else if is_left(i) != is_left(j) {
            EdgeSign::Negative
        } else {
            right_right
        }
    }))
}

/// Two positive cliques `A` and `B` of size `m` each. One distinguished vertex
/// `a` of `A` has positive edges to the first `k` vertices of `B`; all other
/// cross edges are negative. Arrival order: `a`, then `b_1..b_k`, then the
/// rest of `A`, then the rest of `B`.
pub fn two_clique(m: usize, k: usize) -> Result<LabeledInstance, InstanceError> {
    if m == 0 {
        return Err(InstanceError::InvalidParam("m must be at least 1".into()));
    }
    if k == 0 {
        return Err(InstanceError::InvalidParam("k must be at least 1".into()));
    }
    if k >= m {
        return Err(InstanceError::InvalidParam(format!(
            "k must be smaller than m (got k={k}, m={m})"
        )));
    }
    // Arrival index -> side. a = 0; b_1..b_k = 1..=k; a_2..a_m = k+1..=k+m-1;
    // b_{k+1}..b_m = k+m..2m-1.
    let in_a = move |v: usize| v == 0 || (v > k && v < k + m);
    Ok(LabeledInstance::from_fn(2 * m, move |i, j| {
        if in_a(i) == in_a(j) {
            EdgeSign::Positive
        } else if j == 0 && i <= k {
            // a--b_i for i <= k
            EdgeSign::Positive
        } else {
            EdgeSign::Negative
        }
    }))
}

/// Planted ground truth: `clusters` clusters of `size` vertices each,
/// intra-cluster edges positive and inter-cluster edges negative, each label
/// independently flipped with probability `flip_prob`. Arrival order is a
/// seeded uniform shuffle of the planted vertices.
pub fn planted(
    clusters: usize,
    size: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<LabeledInstance, InstanceError> {
    if clusters == 0 || size == 0 {
        return Err(InstanceError::InvalidParam(
            "clusters and size must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(InstanceError::InvalidParam(format!(
            "flip_prob must lie in [0, 1] (got {flip_prob})"
        )));
    }
    let n = clusters * size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted_id: Vec<usize> = (0..n).collect();
    planted_id.shuffle(&mut rng);
    Ok(LabeledInstance::from_fn(n, |i, j| {
        let same = planted_id[i] / size == planted_id[j] / size;
        let base = if same {
            EdgeSign::Positive
        } else {
            EdgeSign::Negative
        };
        if rng.random_bool(flip_prob) {
            base.flipped()
        } else {
            base
        }
    }))
}
