//! Key-value config blocks: the text format shared by the command-line
//! harness and echoed verbatim into reports.
//!
//! One `key = value` pair per line; blank lines and `#` comments are ignored.
//! Recognized keys: `alpha`, `tau`, `t_min`, `eta`, `oracle_policy`,
//! `exact_cap`, `restarts`, `seed`, `p`, `greedy_policy`.

use thiserror::Error;

use crate::dense::DenseConfig;
use crate::greedy::{GreedyPolicy, MergeOrder};
use crate::mixed::recommended_dense_probability;
use crate::oracle::OraclePolicy;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {got:?}")]
    Malformed { line: usize, got: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for {key}: {msg}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        msg: String,
    },
}

/// Parsed harness configuration plus the verbatim source block.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dense: DenseConfig,
    pub greedy: GreedyPolicy,
    /// Probability of the dense branch in the mixed algorithm. Defaults to
    /// the recommended value derived from `alpha` and `eta` when the block
    /// does not set `p` explicitly.
    pub p: f64,
    pub seed: u64,
    pub raw: String,
}

impl Default for RunConfig {
    /// Desk-scale defaults; the paper-faithful constant regime never fires on
    /// streams small enough for the exact oracle.
    fn default() -> Self {
        let dense = DenseConfig::relaxed();
        let p = recommended_dense_probability(dense.alpha, dense.eta.unwrap_or(0.0555))
            .expect("relaxed constants are in domain");
        RunConfig {
            dense,
            greedy: GreedyPolicy::default(),
            p,
            seed: 0,
            raw: String::new(),
        }
    }
}

pub fn parse_config_block(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig {
        raw: text.to_string(),
        ..RunConfig::default()
    };
    let mut explicit_p = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line,
            got: trimmed.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |msg: &str| ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
            msg: msg.to_string(),
        };

        match key {
            "alpha" => config.dense.alpha = value.parse().map_err(|_| bad("not a number"))?,
            "tau" => config.dense.tau = value.parse().map_err(|_| bad("not a number"))?,
            "t_min" => config.dense.t_min = value.parse().map_err(|_| bad("not an integer"))?,
            "eta" => {
                config.dense.eta = Some(value.parse().map_err(|_| bad("not a number"))?);
            }
            "oracle_policy" => {
                config.dense.oracle.policy = match value {
                    "exact_only" => OraclePolicy::ExactOnly,
                    "exact_then_heuristic" => OraclePolicy::ExactThenHeuristic,
                    "heuristic_only" => OraclePolicy::HeuristicOnly,
                    _ => {
                        return Err(bad(
                            "expected exact_only, exact_then_heuristic or heuristic_only",
                        ))
                    }
                };
            }
            "exact_cap" => {
                config.dense.oracle.exact_cap =
                    value.parse().map_err(|_| bad("not an integer"))?;
            }
            "restarts" => {
                config.dense.oracle.restarts = value.parse().map_err(|_| bad("not an integer"))?;
            }
            "seed" => {
                let seed = value.parse().map_err(|_| bad("not an integer"))?;
                config.seed = seed;
                config.dense.oracle.seed = seed;
            }
            "p" => {
                config.p = value.parse().map_err(|_| bad("not a number"))?;
                explicit_p = true;
            }
            "greedy_policy" => {
                config.greedy.order = match value {
                    "max_gain" => MergeOrder::MaxGain,
                    "first_found" => MergeOrder::FirstFound,
                    _ => return Err(bad("expected max_gain or first_found")),
                };
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }

    if !explicit_p {
        if let Ok(p) = recommended_dense_probability(
            config.dense.alpha,
            config.dense.eta.unwrap_or(0.0555),
        ) {
            config.p = p;
        }
    }
    Ok(config)
}

impl RunConfig {
    /// Canonical block listing every recognized key; used when echoing a
    /// default configuration into reports.
    pub fn to_block(&self) -> String {
        let policy = match self.dense.oracle.policy {
            OraclePolicy::ExactOnly => "exact_only",
            OraclePolicy::ExactThenHeuristic => "exact_then_heuristic",
            OraclePolicy::HeuristicOnly => "heuristic_only",
        };
        let greedy = match self.greedy.order {
            MergeOrder::MaxGain => "max_gain",
            MergeOrder::FirstFound => "first_found",
        };
        let mut out = String::new();
        out.push_str(&format!("alpha = {}\n", self.dense.alpha));
        out.push_str(&format!("tau = {}\n", self.dense.tau));
        out.push_str(&format!("t_min = {}\n", self.dense.t_min));
        if let Some(eta) = self.dense.eta {
            out.push_str(&format!("eta = {eta}\n"));
        }
        out.push_str(&format!("oracle_policy = {policy}\n"));
        out.push_str(&format!("exact_cap = {}\n", self.dense.oracle.exact_cap));
        out.push_str(&format!("restarts = {}\n", self.dense.oracle.restarts));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("p = {}\n", self.p));
        out.push_str(&format!("greedy_policy = {greedy}\n"));
        out
    }
}
