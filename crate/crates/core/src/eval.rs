//! Confusion matrices, precision/recall/F1 and cohort share reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{encode_all, FeatureError, FeatureSchema};
use crate::geo::VoronoiPartition;
use crate::models::{predict_all, Classifier};
use crate::trip::{CleanTrip, UserType};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("cohort {0:?} has no trips")]
    EmptyCohort(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// `counts[actual][predicted]`, indexed by `UserType::index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    /// Rows are actual casual then actual member.
    pub fn from_rows(casual: [u64; 2], member: [u64; 2]) -> Self {
        Self {
            counts: [casual, member],
        }
    }

    pub fn get(&self, actual: UserType, predicted: UserType) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn support(&self, class: UserType) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn confusion(
    predictions: &[UserType],
    labels: &[UserType],
) -> Result<ConfusionMatrix, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (p, a) in predictions.iter().zip(labels) {
        cm.counts[a.index()][p.index()] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when any of the three hit 0/0 and was reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<ClassMetrics>,
    /// Support-weighted means.
    pub average: ClassMetrics,
}

impl MetricsReport {
    pub fn class(&self, class: UserType) -> &ClassMetrics {
        &self.classes[class.index()]
    }

    /// Unweighted mean F1 over the two classes.
    pub fn macro_f1(&self) -> f64 {
        self.classes.iter().map(|c| c.f1).sum::<f64>() / self.classes.len() as f64
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let classes: Vec<ClassMetrics> = UserType::ALL
        .iter()
        .map(|&c| {
            let other = UserType::from_index(1 - c.index());
            let tp = cm.get(c, c);
            let fp = cm.get(other, c);
            let fn_ = cm.get(c, other);
            let (precision, dp) = ratio(tp, tp + fp);
            let (recall, dr) = ratio(tp, tp + fn_);
            let (f1, df) = if precision + recall == 0.0 {
                (0.0, true)
            } else {
                (2.0 * precision * recall / (precision + recall), false)
            };
            ClassMetrics {
                class: c.as_str().to_string(),
                support: cm.support(c),
                precision,
                recall,
                f1,
                degenerate: dp || dr || df,
            }
        })
        .collect();
    let total: u64 = classes.iter().map(|c| c.support).sum();
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        if total == 0 {
            0.0
        } else {
            classes.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64
        }
    };
    let average = ClassMetrics {
        class: "average".to_string(),
        support: total,
        precision: weighted(|c| c.precision),
        recall: weighted(|c| c.recall),
        f1: weighted(|c| c.f1),
        degenerate: total == 0 || classes.iter().any(|c| c.degenerate),
    };
    MetricsReport { classes, average }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortShareReport {
    pub cohort: String,
    pub total: u64,
    pub casual: u64,
    pub member: u64,
    /// Percent of trips predicted Member.
    pub member_share_pct: f64,
}

impl CohortShareReport {
    pub fn from_counts(cohort: &str, casual: u64, member: u64) -> Result<Self, EvalError> {
        let total = casual + member;
        if total == 0 {
            return Err(EvalError::EmptyCohort(cohort.to_string()));
        }
        Ok(Self {
            cohort: cohort.to_string(),
            total,
            casual,
            member,
            member_share_pct: 100.0 * member as f64 / total as f64,
        })
    }
}

/// Encodes and classifies unlabeled trips, then tallies the predictions.
pub fn classify_cohort<C: Classifier + Sync>(
    model: &C,
    trips: &[CleanTrip],
    partition: &VoronoiPartition,
    schema: &FeatureSchema,
    cohort: &str,
) -> Result<CohortShareReport, EvalError> {
    if trips.is_empty() {
        return Err(EvalError::EmptyCohort(cohort.to_string()));
    }
    let vectors = encode_all(trips, partition, schema)?;
    let predicted = predict_all(model, &vectors);
    let member = predicted.iter().filter(|&&p| p == UserType::Member).count() as u64;
    CohortShareReport::from_counts(cohort, trips.len() as u64 - member, member)
}

fn title(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

/// Rows are actual classes, columns predicted ones.
pub fn confusion_table(name: &str, cm: &ConfusionMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{name}");
    let _ = writeln!(
        out,
        "{:<16}{:>12}{:>12}",
        "actual \\ pred", "Casual", "Member"
    );
    for a in UserType::ALL {
        let _ = writeln!(
            out,
            "{:<16}{:>12}{:>12}",
            title(a.as_str()),
            cm.get(a, UserType::Casual),
            cm.get(a, UserType::Member)
        );
    }
    out
}

pub fn metrics_table(name: &str, report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{name}");
    let _ = writeln!(
        out,
        "{:<16}{:>10}{:>10}{:>10}{:>10}",
        "", "Precision", "Recall", "F1", "Support"
    );
    for m in report
        .classes
        .iter()
        .chain(std::iter::once(&report.average))
    {
        let label = if m.class == "average" {
            "Average/total".to_string()
        } else {
            title(&m.class)
        };
        let _ = writeln!(
            out,
            "{:<16}{:>10.2}{:>10.2}{:>10.2}{:>10}",
            label, m.precision, m.recall, m.f1, m.support
        );
    }
    out
}

pub fn cohort_table(reports: &[CohortShareReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20}{:>10}{:>10}{:>10}{:>10}",
        "Cohort", "Total", "Casual", "Member", "Member %"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<20}{:>10}{:>10}{:>10}{:>10.1}",
            r.cohort, r.total, r.casual, r.member, r.member_share_pct
        );
    }
    out
}
