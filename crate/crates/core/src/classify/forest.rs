//! Random forest of bootstrapped CART trees with per-split column sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax_first, DecisionTree, GrowParams};

/// The random stream a tree was grown from: ChaCha8 seeded with `seed`,
/// stream number `stream`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSeed {
    pub seed: u64,
    pub stream: u64,
}

impl TreeSeed {
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub seeds: Vec<TreeSeed>,
    pub bootstrap: bool,
    pub n_classes: usize,
}

impl RandomForest {
    pub(crate) fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        n_trees: usize,
        seed: u64,
        bootstrap: bool,
        params: GrowParams,
    ) -> RandomForest {
        let n = x.len();
        let seeds: Vec<TreeSeed> = (0..n_trees as u64).map(|stream| TreeSeed { seed, stream }).collect();
        // Each tree owns its stream, so parallel and sequential training agree.
        let trees = seeds
            .par_iter()
            .map(|s| {
                let mut rng = s.rng();
                let idx: Vec<usize> = if bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::grow(x, y, n_classes, idx, params, Some(&mut rng))
            })
            .collect();
        RandomForest {
            trees,
            seeds,
            bootstrap,
            n_classes,
        }
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1.0;
        }
        argmax_first(&votes)
    }
}
