//! Online correlation clustering.
//!
//! The input is a complete graph whose edges are labeled positive or negative,
//! revealed one vertex at a time. An online algorithm may open a singleton for
//! each arrival and merge existing clusters, never split them; its quality is
//! measured against the offline optimum, either by agreements kept (profit) or
//! disagreements incurred (cost).
//!
//! The crate provides:
//! - [`instance`]: labeled instances, generators (positive cliques, the
//!   three-group gadget, the two-clique family, planted noise), and the `.occ`
//!   text format;
//! - [`clustering`]: merge-only clusterings with incremental scoring;
//! - [`oracle`]: the exact offline optimum by set-partition enumeration and a
//!   restarted local-search surrogate;
//! - [`greedy`]: the online greedy merger;
//! - [`dense`]: the density-gated algorithm with its pruned-optimum chain and
//!   the offline forest reconstruction used to cross-check it;
//! - [`mixed`]: the seeded random mix of the two algorithms;
//! - [`suites`]: the property suites wired into the acceptance tests and the
//!   `occ verify` command.

pub mod clustering;
pub mod config;
pub mod corpus;
pub mod dense;
pub mod greedy;
pub mod instance;
pub mod mixed;
pub mod oracle;
pub mod suites;

pub use clustering::{Clustering, Score};
pub use instance::{EdgeSign, LabeledInstance};
pub use oracle::{OracleConfig, OraclePolicy, OracleResult};
