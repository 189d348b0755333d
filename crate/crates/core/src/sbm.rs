//! Seeded sampling of `SBM(n, α1, α2, β)`.
//!
//! Each sample owns one `ChaCha8Rng` seeded from `SampleConfig::seed`. The
//! labeling (when randomized) is drawn first, then one uniform per vertex
//! pair in row-major order `(0,1), (0,2), …, (n-2,n-1)`. Experiments derive
//! per-trial seeds as `base_seed + trial_index` (see [`trial_seed`]), so a
//! trial's graph never depends on scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Labeling, LabeledGraph, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Assignment {
    /// `C1 = {0..n/2}`.
    #[default]
    FirstHalf,
    /// Uniformly random balanced labeling.
    RandomPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub params: ModelParams,
    pub seed: u64,
    pub assignment: Assignment,
}

impl SampleConfig {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Self {
            params,
            seed,
            assignment: Assignment::FirstHalf,
        }
    }
}

/// Seed of trial `index` in an experiment with base seed `base`.
pub fn trial_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

pub fn sample(cfg: &SampleConfig) -> Result<LabeledGraph> {
    let p = &cfg.params;
    // Re-validate: the struct has public fields.
    let p = ModelParams::new(p.n, p.alpha1, p.alpha2, p.beta)?;
    let n = p.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let truth = match cfg.assignment {
        Assignment::FirstHalf => Labeling::first_half(n),
        Assignment::RandomPermutation => {
            let mut sigma = Labeling::first_half(n).as_slice().to_vec();
            sigma.shuffle(&mut rng);
            Labeling::new(sigma)?
        }
    };

    let mut adj = vec![0u8; n * n];
    for u in 0..n {
        let su = truth.sign(u);
        for v in u + 1..n {
            let prob = p.edge_probability(su, truth.sign(v));
            if rng.gen::<f64>() < prob {
                adj[u * n + v] = 1;
                adj[v * n + u] = 1;
            }
        }
    }
    LabeledGraph::from_adjacency(adj, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degree_profile, edge_counts, Community};

    #[test]
    fn same_seed_same_graph() {
        let p = ModelParams::new(60, 8.0, 5.0, 2.0).unwrap();
        let a = sample(&SampleConfig::new(p, 42)).unwrap();
        let b = sample(&SampleConfig::new(p, 42)).unwrap();
        let c = sample(&SampleConfig::new(p, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_beta_has_no_cross_edges() {
        let p = ModelParams::new(80, 10.0, 6.0, 0.0).unwrap();
        for seed in 0..5 {
            let g = sample(&SampleConfig::new(p, seed)).unwrap();
            assert_eq!(edge_counts(&g).e12, 0);
        }
    }

    #[test]
    fn random_permutation_is_balanced_and_seeded() {
        let p = ModelParams::new(40, 6.0, 6.0, 1.0).unwrap();
        let cfg = SampleConfig {
            params: p,
            seed: 9,
            assignment: Assignment::RandomPermutation,
        };
        let g = sample(&cfg).unwrap();
        assert_eq!(g.truth().members(Community::One).len(), 20);
        assert_ne!(g.truth(), &Labeling::first_half(40));
        assert_eq!(g, sample(&cfg).unwrap());
    }

    #[test]
    fn uniform_rates_give_uniform_density() {
        let (n, a) = (200usize, 6.0);
        let p = ModelParams::new(n, a, a, a - 1e-6).unwrap();
        let pairs = (n * (n - 1) / 2) as f64;
        let mean: f64 = (0..100)
            .map(|s| sample(&SampleConfig::new(p, s)).unwrap().edge_count() as f64 / pairs)
            .sum::<f64>()
            / 100.0;
        let want = a * (n as f64).ln() / n as f64;
        assert!(((mean - want) / want).abs() < 0.05, "density {mean} vs {want}");
    }

    #[test]
    fn block_counts_match_binomial_means() {
        let p = ModelParams::new(100, 9.0, 5.0, 2.0).unwrap();
        let trials = 120;
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        let mut counts = None;
        for s in 0..trials {
            let e = edge_counts(&sample(&SampleConfig::new(p, 1000 + s)).unwrap());
            s1 += e.e1 as f64;
            s2 += e.e2 as f64;
            s12 += e.e12 as f64;
            counts = Some(e);
        }
        let e = counts.unwrap();
        let t = trials as f64;
        for (sum, m, prob) in [(s1, e.h, p.p1), (s2, e.h, p.p2), (s12, e.r, p.q)] {
            let m = m as f64;
            let sd_of_mean = (m * prob * (1.0 - prob) / t).sqrt();
            assert!((sum / t - m * prob).abs() <= 4.0 * sd_of_mean);
        }
    }

    #[test]
    fn mean_degree_profile_near_poisson_means() {
        let p = ModelParams::new(400, 12.0, 7.0, 3.0).unwrap();
        let (mut x, mut y, mut k) = (0.0, 0.0, 0.0);
        for s in 0..20 {
            let g = sample(&SampleConfig::new(p, s)).unwrap();
            for u in g.truth().members(Community::One) {
                let d = degree_profile(&g, u).unwrap();
                x += d.d1;
                y += d.d2;
                k += 1.0;
            }
        }
        // Exact finite-n means: (n/2 - 1) p1 / log n and (n/2) q / log n.
        let ln = p.log_n();
        let want_x = 199.0 * p.p1 / ln;
        let want_y = 200.0 * p.q / ln;
        assert!((x / k - want_x).abs() < 0.05 * want_x);
        assert!((y / k - want_y).abs() < 0.05 * want_y);
        assert!((want_x - p.alpha1 / 2.0).abs() < 0.05 && (want_y - p.beta / 2.0).abs() < 1e-12);
    }
}
