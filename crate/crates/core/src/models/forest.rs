use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::ColumnMatrix;
use super::tree::{DecisionTree, TreeParams};
use super::{Classifier, ModelError};
use crate::features::FeatureVector;
use crate::sampling::LabeledDataset;

/// Candidate features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `floor(sqrt(p))`, at least 1.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (p as f64).sqrt().floor() as usize,
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k.min(p),
        };
        k.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    pub trees: Vec<DecisionTree>,
}

/// RNG for tree `index`: the master seed selects the key, the index the stream.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Bagged Gini trees. Each tree draws its bootstrap sample and candidate
/// features from its own stream, so results do not depend on the thread pool.
pub fn train_forest(
    train: &LabeledDataset<FeatureVector>,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, ModelError> {
    if train.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    if params.n_trees == 0
        || params.min_samples_leaf == 0
        || params.max_features == MaxFeatures::Count(0)
    {
        return Err(ModelError::Config(format!(
            "invalid forest params {params:?}"
        )));
    }
    let x = ColumnMatrix::from_dataset(train)?;
    let y: Vec<u8> = train.labels().iter().map(|l| l.index() as u8).collect();
    let n = x.n_rows;
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features.resolve(x.columns.len()),
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let rows: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();
            DecisionTree::grow(&x, &y, rows, tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        params: *params,
        seed,
        trees,
    })
}

/// Share of trees voting Member.
pub fn predict_forest(model: &ForestModel, x: &[f64]) -> f64 {
    let votes = model.trees.iter().filter(|t| t.votes_member(x)).count();
    votes as f64 / model.trees.len() as f64
}

/// Mean per-tree weighted impurity decrease, normalised to sum to 1.
/// A forest made only of leaves has no splits and reports all zeros.
pub fn feature_importance(model: &ForestModel) -> Vec<f64> {
    let p = model.n_features();
    let mut total = vec![0.0; p];
    for tree in &model.trees {
        for (acc, v) in total.iter_mut().zip(tree.raw_importance()) {
            *acc += v;
        }
    }
    let n = model.trees.len() as f64;
    total.iter_mut().for_each(|v| *v /= n);
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        total.iter_mut().for_each(|v| *v /= sum);
    }
    total
}

impl Classifier for ForestModel {
    fn n_features(&self) -> usize {
        self.trees.first().map_or(0, DecisionTree::n_features)
    }

    fn predict_proba(&self, x: &[f64]) -> f64 {
        predict_forest(self, x)
    }
}
