use serde::{Deserialize, Serialize};

use super::{predict_all, ForestParams, MaxFeatures, ModelConfig, ModelError};
use crate::eval::{confusion, metrics};
use crate::features::FeatureVector;
use crate::sampling::{split, LabeledDataset};

/// Share of the training set kept for fitting; the rest scores each config.
pub const SEARCH_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub config: ModelConfig,
    pub validation_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_index: usize,
    pub best: ModelConfig,
    pub scores: Vec<ConfigScore>,
    pub fit_count: usize,
    pub validation_count: usize,
}

/// Trees {100, 200} x depth {8, 16, unlimited} x min leaf {1, 5}.
pub fn default_forest_grid() -> Vec<ModelConfig> {
    let mut grid = Vec::new();
    for n_trees in [100, 200] {
        for max_depth in [Some(8), Some(16), None] {
            for min_samples_leaf in [1, 5] {
                grid.push(ModelConfig::Forest(ForestParams {
                    n_trees,
                    max_depth,
                    min_samples_leaf,
                    max_features: MaxFeatures::Sqrt,
                }));
            }
        }
    }
    grid
}

/// Fits every config on 80% of `train` and keeps the one with the best
/// macro F1 on the remaining 20%. Ties go to the earlier config.
pub fn grid_search(
    train: &LabeledDataset<FeatureVector>,
    grid: &[ModelConfig],
    seed: u64,
) -> Result<SearchResult, ModelError> {
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    let (fit, validation) = split(train, SEARCH_TRAIN_FRACTION, seed)?;
    let mut scores: Vec<ConfigScore> = Vec::with_capacity(grid.len());
    let mut best_index = 0;
    for (i, config) in grid.iter().enumerate() {
        let model = config.train(&fit, seed)?;
        let predicted = predict_all(&model, validation.records());
        let cm = confusion(&predicted, validation.labels()).expect("aligned by construction");
        let score = metrics(&cm).macro_f1();
        if i > 0 && score > scores[best_index].validation_macro_f1 {
            best_index = i;
        }
        let entry = ConfigScore {
            config: config.clone(),
            validation_macro_f1: score,
        };
        scores.push(entry);
    }
    Ok(SearchResult {
        best_index,
        best: grid[best_index].clone(),
        scores,
        fit_count: fit.len(),
        validation_count: validation.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trip::UserType;

    fn xor(n: usize) -> LabeledDataset<FeatureVector> {
        let rows = (0..n)
            .map(|i| FeatureVector(vec![(i % 2) as f64, (i / 2 % 2) as f64]))
            .collect();
        let labels = (0..n)
            .map(|i| UserType::from_index((i % 2) ^ (i / 2 % 2)))
            .collect();
        LabeledDataset::new(rows, labels).unwrap()
    }

    fn depth(d: usize) -> ModelConfig {
        ModelConfig::Forest(ForestParams {
            n_trees: 20,
            max_depth: Some(d),
            max_features: MaxFeatures::All,
            ..ForestParams::default()
        })
    }

    #[test]
    fn default_grid_has_twelve_configs() {
        assert_eq!(default_forest_grid().len(), 12);
    }

    #[test]
    fn single_config_is_selected() {
        let r = grid_search(&xor(40), &[depth(2)], 1).unwrap();
        assert_eq!(r.best_index, 0);
        assert_eq!(r.scores.len(), 1);
        assert_eq!((r.fit_count, r.validation_count), (32, 8));
    }

    #[test]
    fn deeper_trees_win_on_xor() {
        let r = grid_search(&xor(200), &[depth(1), depth(8)], 5).unwrap();
        assert_eq!(r.best, depth(8));
        assert!(r.scores[1].validation_macro_f1 > r.scores[0].validation_macro_f1);
        assert_eq!(r.scores[1].validation_macro_f1, 1.0);
        assert_eq!(grid_search(&xor(200), &[depth(1), depth(8)], 5).unwrap(), r);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(
            grid_search(&xor(10), &[], 0),
            Err(ModelError::EmptyGrid)
        ));
    }
}
