//! The randomized mix: one seeded coin before the first arrival picks either
//! the greedy merger or the density-gated algorithm for the whole stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::Clustering;
use crate::dense::{dense_run, DenseConfig, DenseError};
use crate::greedy::{greedy_run, GreedyPolicy};
use crate::instance::LabeledInstance;

#[derive(Debug, Clone)]
pub struct MixedConfig {
    /// Probability of running the density-gated branch.
    pub p: f64,
    pub dense: DenseConfig,
    pub greedy: GreedyPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Greedy,
    Dense,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Greedy => write!(f, "greedy"),
            Branch::Dense => write!(f, "dense"),
        }
    }
}

/// Probability recommended for the mix: alpha / (2 + 2 eta (2 - alpha)).
pub fn recommended_dense_probability(alpha: f64, eta: f64) -> Result<f64, DenseError> {
    check_domain(alpha, eta)?;
    Ok(alpha / (2.0 + 2.0 * eta * (2.0 - alpha)))
}

/// Competitive ratio the mix guarantees when the constants inequality holds:
/// 1/2 + (alpha eta / 2) / (1 + 2 eta (1 - alpha / 2)).
pub fn guaranteed_mix_ratio(alpha: f64, eta: f64) -> Result<f64, DenseError> {
    check_domain(alpha, eta)?;
    Ok(0.5 + (alpha * eta / 2.0) / (1.0 + 2.0 * eta * (1.0 - alpha / 2.0)))
}

fn check_domain(alpha: f64, eta: f64) -> Result<(), DenseError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DenseError::BadConstant(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(eta > 0.0 && eta < 0.5) {
        return Err(DenseError::BadConstant(format!(
            "eta must lie in (0, 0.5), got {eta}"
        )));
    }
    Ok(())
}

/// Flips one seeded coin, then runs the chosen algorithm over the stream.
/// Identical (instance, config, seed) always reproduce the same branch and
/// trace.
pub fn mixed_run(
    inst: &LabeledInstance,
    config: &MixedConfig,
) -> Result<(Branch, Vec<Clustering>), DenseError> {
    if !(0.0..=1.0).contains(&config.p) {
        return Err(DenseError::BadConstant(format!(
            "p must lie in [0, 1], got {}",
            config.p
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    if rng.random_bool(config.p) {
        Ok((Branch::Dense, dense_run(inst, &config.dense)?.trace))
    } else {
        Ok((Branch::Greedy, greedy_run(inst, config.greedy)))
    }
}
