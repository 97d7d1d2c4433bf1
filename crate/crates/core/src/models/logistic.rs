use serde::{Deserialize, Serialize};

use super::data::SparseRows;
use super::{require_both_classes, Classifier, ModelError};
use crate::features::FeatureVector;
use crate::sampling::LabeledDataset;
use crate::trip::UserType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    /// L2 strength; the intercept is not penalised.
    pub l2: f64,
    pub max_epochs: usize,
    /// Training stops once an accepted step improves the loss by less than this.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            l2: 1e-4,
            max_epochs: 500,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub config: LogisticConfig,
    pub seed: u64,
    /// Loss after every accepted epoch, starting with the initial loss.
    pub loss_history: Vec<f64>,
    /// Step size in force when training stopped (halved on every rejected step).
    pub final_learning_rate: f64,
    pub converged: bool,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus `l2/2 * |w|^2` over a fixed dataset.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    rows: SparseRows,
    targets: Vec<f64>,
    l2: f64,
}

impl LogisticObjective {
    pub fn new(train: &LabeledDataset<FeatureVector>, l2: f64) -> Result<Self, ModelError> {
        Ok(Self {
            rows: SparseRows::from_dataset(train)?,
            targets: train.labels().iter().map(|&l| l.index() as f64).collect(),
            l2,
        })
    }

    pub fn n_features(&self) -> usize {
        self.rows.n_features
    }

    fn margin(&self, i: usize, w: &[f64], b: f64) -> f64 {
        self.rows.row(i).fold(b, |acc, (j, v)| acc + w[j] * v)
    }

    fn penalty(&self, w: &[f64]) -> f64 {
        0.5 * self.l2 * w.iter().map(|x| x * x).sum::<f64>()
    }

    /// Data term only: (mean NLL, its gradient w.r.t. weights, w.r.t. intercept).
    fn data_term(&self, w: &[f64], b: f64) -> (f64, Vec<f64>, f64) {
        let n = self.rows.len() as f64;
        let mut loss = 0.0;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for (i, &y) in self.targets.iter().enumerate() {
            let z = self.margin(i, w, b);
            loss += softplus(z) - y * z;
            let r = sigmoid(z) - y;
            gb += r;
            for (j, v) in self.rows.row(i) {
                gw[j] += r * v;
            }
        }
        gw.iter_mut().for_each(|g| *g /= n);
        (loss / n, gw, gb / n)
    }

    pub fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.rows.len() as f64;
        let nll: f64 = self
            .targets
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let z = self.margin(i, w, b);
                softplus(z) - y * z
            })
            .sum();
        nll / n + self.penalty(w)
    }

    /// Regularised loss with its analytic gradient (weights, intercept).
    pub fn loss_and_gradient(&self, w: &[f64], b: f64) -> (f64, Vec<f64>, f64) {
        let (loss, mut gw, gb) = self.data_term(w, b);
        for (g, x) in gw.iter_mut().zip(w) {
            *g += self.l2 * x;
        }
        (loss + self.penalty(w), gw, gb)
    }
}

/// Full-batch gradient descent from zero weights.
///
/// Each step moves along the data gradient and applies the L2 shrinkage
/// in closed form, `w <- (w - lr * g) / (1 + lr * l2)`, which stays stable
/// for any penalty strength. A step that raises the loss is rejected and the
/// learning rate halved, so accepted losses never increase. Every evaluated
/// step counts toward `max_epochs`.
pub fn train_logistic(
    train: &LabeledDataset<FeatureVector>,
    config: &LogisticConfig,
    seed: u64,
) -> Result<LogisticModel, ModelError> {
    require_both_classes(train)?;
    let valid = config.learning_rate.is_finite()
        && config.learning_rate > 0.0
        && config.l2.is_finite()
        && config.l2 >= 0.0
        && config.tolerance >= 0.0;
    if !valid {
        return Err(ModelError::Config(format!(
            "invalid logistic config {config:?}"
        )));
    }
    let objective = LogisticObjective::new(train, config.l2)?;
    let p = objective.n_features();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut lr = config.learning_rate;

    let (data_loss, mut gw, mut gb) = objective.data_term(&w, b);
    let mut loss = data_loss + objective.penalty(&w);
    let mut history = vec![loss];
    let mut converged = false;

    for _ in 0..config.max_epochs {
        let shrink = 1.0 / (1.0 + lr * config.l2);
        let w_next: Vec<f64> = w
            .iter()
            .zip(&gw)
            .map(|(x, g)| (x - lr * g) * shrink)
            .collect();
        let b_next = b - lr * gb;
        let (data_next, gw_next, gb_next) = objective.data_term(&w_next, b_next);
        let loss_next = data_next + objective.penalty(&w_next);
        if !loss_next.is_finite() {
            return Err(ModelError::Diverged { learning_rate: lr });
        }
        if loss_next > loss {
            lr /= 2.0;
            continue;
        }
        let improvement = loss - loss_next;
        w = w_next;
        b = b_next;
        gw = gw_next;
        gb = gb_next;
        loss = loss_next;
        history.push(loss);
        if improvement < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(LogisticModel {
        weights: w,
        intercept: b,
        config: *config,
        seed,
        loss_history: history,
        final_learning_rate: lr,
        converged,
    })
}

impl LogisticModel {
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.weights)
            .filter(|(v, _)| **v != 0.0)
            .fold(self.intercept, |acc, (v, w)| acc + w * v)
    }
}

/// Probability of Member: `sigmoid(w . x + b)`.
pub fn predict_logistic(model: &LogisticModel, x: &[f64]) -> f64 {
    sigmoid(model.decision_value(x))
}

impl Classifier for LogisticModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn predict_proba(&self, x: &[f64]) -> f64 {
        predict_logistic(self, x)
    }
}

/// The `k` most positive and `k` most negative weights with their names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopCoefficients {
    /// Descending by weight.
    pub positive: Vec<(String, f64)>,
    /// Ascending by weight.
    pub negative: Vec<(String, f64)>,
}

/// Ranks weights by sign. Ties keep feature order.
pub fn top_coefficients(model: &LogisticModel, names: &[String], k: usize) -> TopCoefficients {
    let mut order: Vec<usize> = (0..model.weights.len()).collect();
    order.sort_by(|&a, &b| model.weights[b].total_cmp(&model.weights[a]));
    let named = |i: usize| {
        let name = names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
        (name, model.weights[i])
    };
    let positive = order.iter().take(k).map(|&i| named(i)).collect();
    order.sort_by(|&a, &b| model.weights[a].total_cmp(&model.weights[b]));
    let negative = order.iter().take(k).map(|&i| named(i)).collect();
    TopCoefficients { positive, negative }
}

/// Class from a probability: Member iff `p >= 0.5`.
pub fn class_of(p: f64) -> UserType {
    if p >= 0.5 {
        UserType::Member
    } else {
        UserType::Casual
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: Vec<Vec<f64>>, labels: Vec<UserType>) -> LabeledDataset<FeatureVector> {
        LabeledDataset::new(rows.into_iter().map(FeatureVector).collect(), labels).unwrap()
    }

    fn model(weights: Vec<f64>, intercept: f64) -> LogisticModel {
        LogisticModel {
            weights,
            intercept,
            config: LogisticConfig::default(),
            seed: 0,
            loss_history: vec![],
            final_learning_rate: 0.1,
            converged: true,
        }
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(
            predict_logistic(&model(vec![0.0, 0.0], 0.0), &[1.0, 1.0]),
            0.5
        );
        let p = predict_logistic(&model(vec![1.0], 0.0), &[1.0]);
        assert!((p - 0.731_058_578_630_004_9).abs() < 1e-15);
        let q = predict_logistic(&model(vec![-1.0], 0.0), &[1.0]);
        assert!((p + q - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn separable_feature_gets_positive_weight() {
        let rows = (0..40).map(|i| vec![f64::from(i % 2)]).collect();
        let labels = (0..40).map(|i| UserType::from_index(i % 2)).collect();
        let m = train_logistic(&ds(rows, labels), &LogisticConfig::default(), 1).unwrap();
        assert!(m.weights[0] > 0.0);
        assert!(m.loss_history.last().unwrap() < &m.loss_history[0]);
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn constant_feature_weight_vanishes() {
        // Feature 0 informative, feature 1 constant 1 (an unpenalised
        // intercept absorbs its effect at the optimum).
        let rows = (0..200)
            .map(|i| vec![f64::from(u8::from(i % 4 != 0)), 1.0])
            .collect();
        let labels = (0..200)
            .map(|i| {
                if i % 4 != 0 && i % 8 != 1 {
                    UserType::Member
                } else {
                    UserType::Casual
                }
            })
            .collect();
        let cfg = LogisticConfig {
            l2: 1e-2,
            max_epochs: 100_000,
            tolerance: 1e-15,
            learning_rate: 0.5,
        };
        let m = train_logistic(&ds(rows, labels), &cfg, 0).unwrap();
        assert!(m.weights[1].abs() < 1e-3, "{}", m.weights[1]);
    }

    #[test]
    fn huge_penalty_gives_intercept_only_model() {
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|i| vec![f64::from(i % 3), f64::from(i % 2)])
            .collect();
        let labels: Vec<UserType> = (0..300)
            .map(|i| {
                if i % 3 == 0 {
                    UserType::Casual
                } else {
                    UserType::Member
                }
            })
            .collect();
        let cfg = LogisticConfig {
            l2: 1e6,
            max_epochs: 5_000,
            tolerance: 1e-14,
            ..LogisticConfig::default()
        };
        let m = train_logistic(&ds(rows, labels), &cfg, 0).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-5), "{:?}", m.weights);
        let expected = (200.0f64 / 100.0).ln();
        assert!(
            (m.intercept - expected).abs() < 1e-3,
            "{} vs {expected}",
            m.intercept
        );
    }

    #[test]
    fn missing_class_is_an_error() {
        let d = ds(
            vec![vec![1.0], vec![0.0]],
            vec![UserType::Member, UserType::Member],
        );
        assert!(matches!(
            train_logistic(&d, &LogisticConfig::default(), 0),
            Err(ModelError::MissingClass(UserType::Casual))
        ));
    }

    #[test]
    fn diverging_step_is_reported() {
        let d = ds(
            vec![vec![1e300], vec![-1e300]],
            vec![UserType::Member, UserType::Casual],
        );
        let err = train_logistic(&d, &LogisticConfig::default(), 0).unwrap_err();
        assert!(matches!(err, ModelError::Diverged { .. }));
        assert!(err.to_string().contains("smaller learning rate"));
    }

    #[test]
    fn top_coefficients_by_sign() {
        let m = model(vec![2.0, -3.0, 0.1], 0.0);
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let top = top_coefficients(&m, &names, 1);
        assert_eq!(top.positive, vec![("a".to_string(), 2.0)]);
        assert_eq!(top.negative, vec![("b".to_string(), -3.0)]);
        let all = top_coefficients(&m, &names, 10);
        assert_eq!(
            all.positive
                .iter()
                .map(|p| p.0.as_str())
                .collect::<Vec<_>>(),
            ["a", "c", "b"]
        );
        assert_eq!(
            all.negative
                .iter()
                .map(|p| p.0.as_str())
                .collect::<Vec<_>>(),
            ["b", "c", "a"]
        );
    }
}
