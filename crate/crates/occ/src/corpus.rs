//! Seeded instance corpora for the verification suites. Everything here is a
//! pure function of its arguments so suites reproduce bit-identical inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{self, EdgeSign, LabeledInstance};

/// `count` instances with uniform random labels and sizes in `2..=n_max`.
pub fn random_corpus(count: usize, n_max: usize, seed: u64) -> Vec<LabeledInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=n_max);
            LabeledInstance::from_fn(n, |_, _| {
                if rng.random_bool(0.5) {
                    EdgeSign::Positive
                } else {
                    EdgeSign::Negative
                }
            })
        })
        .collect()
}

/// Every named generator instance with at most `n_max` vertices: positive
/// cliques, the three-group gadget under both right-right signs, the
/// two-clique family, and a grid of planted instances.
pub fn generator_corpus(n_max: usize) -> Vec<(String, LabeledInstance)> {
    let mut out: Vec<(String, LabeledInstance)> = Vec::new();

    for m in 1.. {
        if 2 * m > n_max {
            break;
        }
        out.push((
            format!("all-positive m={m}"),
            instance::all_positive(m).unwrap(),
        ));
    }

    for m in 1.. {
        if 6 * m > n_max {
            break;
        }
        for (name, sign) in [("negative", EdgeSign::Negative), ("positive", EdgeSign::Positive)] {
            out.push((
                format!("three-group m={m} right-right={name}"),
                instance::three_group_gadget(m, sign).unwrap(),
            ));
        }
    }

    for m in 2.. {
        if 2 * m > n_max {
            break;
        }
        for k in 1..m {
            out.push((
                format!("two-clique m={m} k={k}"),
                instance::two_clique(m, k).unwrap(),
            ));
        }
    }

    let shapes: &[(usize, usize)] = &[
        (1, 4),
        (2, 2),
        (2, 3),
        (2, 4),
        (2, 5),
        (2, 6),
        (3, 3),
        (3, 4),
        (4, 3),
        (6, 2),
    ];
    for &(clusters, size) in shapes {
        if clusters * size > n_max {
            continue;
        }
        for flip in [0.0, 0.1, 0.3] {
            for seed in [1u64, 2] {
                out.push((
                    format!("planted c={clusters} s={size} flip={flip} seed={seed}"),
                    instance::planted(clusters, size, flip, seed).unwrap(),
                ));
            }
        }
    }
    out
}

/// Streams exercising the density-gated algorithm: mostly noiseless planted
/// instances where the gate fires, a few lightly noisy ones, and a few
/// uniform random streams where it usually never does. 25 streams, n <= 12.
pub fn dense_stream_corpus(seed: u64) -> Vec<(String, LabeledInstance)> {
    let mut out: Vec<(String, LabeledInstance)> = Vec::new();
    let noiseless: &[(usize, usize)] = &[
        (1, 8),
        (1, 12),
        (2, 3),
        (2, 4),
        (2, 5),
        (2, 6),
        (3, 3),
        (3, 4),
        (4, 3),
        (6, 2),
    ];
    for (i, &(clusters, size)) in noiseless.iter().enumerate() {
        out.push((
            format!("planted c={clusters} s={size} noiseless #{i}"),
            instance::planted(clusters, size, 0.0, seed.wrapping_add(i as u64)).unwrap(),
        ));
    }
    for (i, &(clusters, size)) in noiseless[..5].iter().enumerate() {
        out.push((
            format!("planted c={clusters} s={size} noiseless #{}", i + 10),
            instance::planted(clusters, size, 0.0, seed.wrapping_add(100 + i as u64)).unwrap(),
        ));
    }
    for (i, &flip) in [0.05, 0.05, 0.1, 0.1, 0.15].iter().enumerate() {
        out.push((
            format!("planted c=2 s=6 flip={flip} #{i}"),
            instance::planted(2, 6, flip, seed.wrapping_add(200 + i as u64)).unwrap(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(300));
    for i in 0..5 {
        let n = rng.random_range(8..=12);
        out.push((
            format!("random n={n} #{i}"),
            LabeledInstance::from_fn(n, |_, _| {
                if rng.random_bool(0.5) {
                    EdgeSign::Positive
                } else {
                    EdgeSign::Negative
                }
            }),
        ));
    }
    debug_assert_eq!(out.len(), 25);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_corpus_is_deterministic_and_sized() {
        let a = random_corpus(20, 9, 7);
        let b = random_corpus(20, 9, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|i| (2..=9).contains(&i.n())));
        let c = random_corpus(20, 9, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn generator_corpus_respects_size_bound() {
        let corpus = generator_corpus(12);
        assert!(!corpus.is_empty());
        assert!(corpus.iter().all(|(_, i)| i.n() <= 12));
        // The two-clique family at n_max = 12 runs through m = 6.
        assert!(corpus.iter().any(|(name, _)| name == "two-clique m=6 k=1"));
        assert!(corpus.iter().any(|(name, _)| name == "three-group m=2 right-right=negative"));
    }

    #[test]
    fn dense_corpus_has_25_streams() {
        let corpus = dense_stream_corpus(1);
        assert_eq!(corpus.len(), 25);
        assert!(corpus.iter().all(|(_, i)| i.n() <= 12));
    }
}
