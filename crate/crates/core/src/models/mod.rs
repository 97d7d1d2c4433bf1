//! Logistic regression, random forest, hyperparameter search and model files.

mod data;
pub mod forest;
pub mod logistic;
pub mod search;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureSchema, FeatureVector};
use crate::sampling::{LabeledDataset, SamplingError};
use crate::trip::UserType;

pub use forest::{
    feature_importance, predict_forest, train_forest, ForestModel, ForestParams, MaxFeatures,
};
pub use logistic::{
    predict_logistic, top_coefficients, train_logistic, LogisticConfig, LogisticModel,
    LogisticObjective, TopCoefficients,
};
pub use search::{default_forest_grid, grid_search, ConfigScore, SearchResult};
pub use tree::{DecisionTree, Node};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training set has no {0} trips")]
    MissingClass(UserType),
    #[error("training set is empty")]
    EmptyTraining,
    #[error("feature vectors differ in length: expected {expected}, got {got}")]
    RaggedRows { expected: usize, got: usize },
    #[error("loss became non-finite at learning rate {learning_rate}; retry with a smaller learning rate")]
    Diverged { learning_rate: f64 },
    #[error("{0}")]
    Config(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("model expects {expected} features but the schema has {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("unsupported model document version {0}")]
    Version(u32),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("model document: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn require_both_classes(
    train: &LabeledDataset<FeatureVector>,
) -> Result<(), ModelError> {
    if train.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    let counts = train.counts();
    for class in UserType::ALL {
        if counts.get(class) == 0 {
            return Err(ModelError::MissingClass(class));
        }
    }
    Ok(())
}

pub trait Classifier {
    fn n_features(&self) -> usize;

    /// Probability of Member.
    fn predict_proba(&self, x: &[f64]) -> f64;

    /// Member iff the probability is at least 0.5.
    fn predict(&self, x: &[f64]) -> UserType {
        logistic::class_of(self.predict_proba(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Logistic(LogisticConfig),
    Forest(ForestParams),
}

impl ModelConfig {
    pub fn train(
        &self,
        train: &LabeledDataset<FeatureVector>,
        seed: u64,
    ) -> Result<Model, ModelError> {
        Ok(match self {
            ModelConfig::Logistic(c) => Model::Logistic(train_logistic(train, c, seed)?),
            ModelConfig::Forest(p) => Model::Forest(train_forest(train, p, seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Logistic(LogisticModel),
    Forest(ForestModel),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Logistic(_) => "logistic",
            Model::Forest(_) => "forest",
        }
    }
}

impl Classifier for Model {
    fn n_features(&self) -> usize {
        match self {
            Model::Logistic(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
        }
    }

    fn predict_proba(&self, x: &[f64]) -> f64 {
        match self {
            Model::Logistic(m) => m.predict_proba(x),
            Model::Forest(m) => m.predict_proba(x),
        }
    }
}

pub const MODEL_DOCUMENT_VERSION: u32 = 1;

/// A trained model with the feature schema it was fitted against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub schema: FeatureSchema,
    pub model: Model,
}

impl ModelDocument {
    pub fn new(schema: FeatureSchema, model: Model) -> Result<Self, ModelError> {
        let doc = Self {
            version: MODEL_DOCUMENT_VERSION,
            schema,
            model,
        };
        doc.validate()?;
        Ok(doc)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.version != MODEL_DOCUMENT_VERSION {
            return Err(ModelError::Version(self.version));
        }
        let expected = self.model.n_features();
        if expected != self.schema.len() {
            return Err(ModelError::SchemaMismatch {
                expected,
                got: self.schema.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }
}

/// Predicted class for each vector, in parallel.
pub fn predict_all<C: Classifier + Sync>(model: &C, vectors: &[FeatureVector]) -> Vec<UserType> {
    use rayon::prelude::*;
    vectors
        .par_iter()
        .map(|v| model.predict(v.values()))
        .collect()
}
