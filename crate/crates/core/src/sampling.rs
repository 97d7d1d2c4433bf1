//! Class balancing, train/test splitting and the sample-vs-population check.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::stats;
use crate::trip::{CleanTrip, UserType};

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("class {0} has no records")]
    MissingClass(UserType),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("{records} records but {labels} labels")]
    LengthMismatch { records: usize, labels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub casual: usize,
    pub member: usize,
}

impl ClassCounts {
    pub fn of(labels: &[UserType]) -> Self {
        let member = labels.iter().filter(|&&l| l == UserType::Member).count();
        Self {
            casual: labels.len() - member,
            member,
        }
    }

    pub fn get(&self, class: UserType) -> usize {
        match class {
            UserType::Casual => self.casual,
            UserType::Member => self.member,
        }
    }

    pub fn total(&self) -> usize {
        self.casual + self.member
    }
}

/// Records paired with their class. Member is label 1, casual label 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset<T = FeatureVector> {
    records: Vec<T>,
    labels: Vec<UserType>,
}

impl<T> LabeledDataset<T> {
    pub fn new(records: Vec<T>, labels: Vec<UserType>) -> Result<Self, SamplingError> {
        if records.len() != labels.len() {
            return Err(SamplingError::LengthMismatch {
                records: records.len(),
                labels: labels.len(),
            });
        }
        Ok(Self { records, labels })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[T] {
        &self.records
    }

    pub fn labels(&self) -> &[UserType] {
        &self.labels
    }

    pub fn counts(&self) -> ClassCounts {
        ClassCounts::of(&self.labels)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, UserType)> {
        self.records.iter().zip(self.labels.iter().copied())
    }

    /// Transforms every record, keeping labels.
    pub fn try_map<U, E>(&self, f: impl Fn(&T) -> Result<U, E>) -> Result<LabeledDataset<U>, E> {
        let records = self.records.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(LabeledDataset {
            records,
            labels: self.labels.clone(),
        })
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<UserType>) {
        (self.records, self.labels)
    }
}

impl<T: Clone> LabeledDataset<T> {
    /// Records at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

impl LabeledDataset<CleanTrip> {
    /// Labeled trips only; unlabeled ones are dropped.
    pub fn from_trips(trips: Vec<CleanTrip>) -> Self {
        let (records, labels) = trips
            .into_iter()
            .filter_map(|t| t.label.map(|l| (t, l)))
            .unzip();
        Self { records, labels }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Indices kept when shrinking the majority class to the minority size,
/// ascending. The minority class is kept whole.
pub fn downsample_indices(labels: &[UserType], seed: u64) -> Result<Vec<usize>, SamplingError> {
    let counts = ClassCounts::of(labels);
    for class in UserType::ALL {
        if counts.get(class) == 0 {
            return Err(SamplingError::MissingClass(class));
        }
    }
    if counts.casual == counts.member {
        return Ok((0..labels.len()).collect());
    }
    let majority = if counts.member > counts.casual {
        UserType::Member
    } else {
        UserType::Casual
    };
    let keep = counts.casual.min(counts.member);
    let majority_idx: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == majority)
        .collect();
    let mut chosen = vec![false; labels.len()];
    for k in index::sample(&mut rng(seed), majority_idx.len(), keep) {
        chosen[majority_idx[k]] = true;
    }
    Ok((0..labels.len())
        .filter(|&i| labels[i] != majority || chosen[i])
        .collect())
}

/// Shrinks the majority class at random (without replacement) to the minority size.
pub fn downsample<T: Clone>(
    ds: &LabeledDataset<T>,
    seed: u64,
) -> Result<LabeledDataset<T>, SamplingError> {
    Ok(ds.select(&downsample_indices(&ds.labels, seed)?))
}

/// `floor(fraction * n)`, robust to products that land a rounding error
/// below an integer.
pub fn train_size(n: usize, fraction: f64) -> usize {
    let t = fraction * n as f64;
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        t.floor() as usize
    }
}

/// Random (train, test) index sets, each ascending.
pub fn split_indices(
    n: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), SamplingError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SamplingError::BadFraction(fraction));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng(seed));
    let cut = train_size(n, fraction);
    let mut train = perm[..cut].to_vec();
    let mut test = perm[cut..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Simple random split; the train part holds `floor(fraction * n)` records.
pub fn split<T: Clone>(
    ds: &LabeledDataset<T>,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>), SamplingError> {
    let (train, test) = split_indices(ds.len(), fraction, seed)?;
    Ok((ds.select(&train), ds.select(&test)))
}

/// One compared statistic. Scalars are stored as one-element vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatComparison {
    pub statistic: String,
    pub sample: Vec<f64>,
    pub population: Vec<f64>,
    /// `|s - p| / |p|` for scalars; `sum |s_i - p_i| / sum |p_i|` for vectors.
    pub relative_diff: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSimilarity {
    pub class: String,
    pub sample_count: usize,
    pub population_count: usize,
    pub stats: Vec<StatComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub tolerance: f64,
    pub classes: Vec<ClassSimilarity>,
    pub flag_count: usize,
}

impl SimilarityReport {
    pub fn is_similar(&self) -> bool {
        self.flag_count == 0
    }
}

pub const DEFAULT_SIMILARITY_TOLERANCE: f64 = 0.05;

fn relative_diff(sample: &[f64], population: &[f64]) -> f64 {
    let num: f64 = sample
        .iter()
        .zip(population)
        .map(|(s, p)| (s - p).abs())
        .sum();
    let den: f64 = population.iter().map(|p| p.abs()).sum();
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

struct Summary {
    count: usize,
    scalars: [(&'static str, f64); 4],
    day_shares: Vec<f64>,
}

fn summarize(trips: &[&CleanTrip]) -> Option<Summary> {
    let durations: Vec<f64> = trips.iter().map(|t| f64::from(t.duration_s)).collect();
    let q = stats::quantiles(&durations, &[0.25, 0.5, 0.75])?;
    let mut days = [0u64; 7];
    for t in trips {
        days[t.day_of_week()] += 1;
    }
    Some(Summary {
        count: trips.len(),
        scalars: [
            ("duration_mean_s", stats::mean(&durations)?),
            ("duration_p25_s", q[0]),
            ("duration_p50_s", q[1]),
            ("duration_p75_s", q[2]),
        ],
        day_shares: stats::shares(&days),
    })
}

/// Compares a sample with its population class by class: duration mean and
/// quartiles plus the day-of-week share vector. Statistics whose relative
/// difference exceeds `tolerance` are flagged; a class present in the
/// population but absent from the sample is flagged once.
pub fn distribution_check(
    sample: &[CleanTrip],
    population: &[CleanTrip],
    tolerance: f64,
) -> SimilarityReport {
    let groups: [(Option<UserType>, &str); 3] = [
        (Some(UserType::Casual), "casual"),
        (Some(UserType::Member), "member"),
        (None, "unlabeled"),
    ];
    let mut classes = Vec::new();
    let mut flag_count = 0;
    for (label, name) in groups {
        let s: Vec<&CleanTrip> = sample.iter().filter(|t| t.label == label).collect();
        let p: Vec<&CleanTrip> = population.iter().filter(|t| t.label == label).collect();
        let Some(pop) = summarize(&p) else { continue };
        let mut entry = ClassSimilarity {
            class: name.to_string(),
            sample_count: s.len(),
            population_count: pop.count,
            stats: Vec::new(),
        };
        match summarize(&s) {
            None => {
                entry.stats.push(StatComparison {
                    statistic: "count".into(),
                    sample: vec![0.0],
                    population: vec![pop.count as f64],
                    relative_diff: 1.0,
                    flagged: true,
                });
                flag_count += 1;
            }
            Some(smp) => {
                let mut push = |statistic: &str, sv: Vec<f64>, pv: Vec<f64>| {
                    let rd = relative_diff(&sv, &pv);
                    let flagged = rd > tolerance;
                    flag_count += usize::from(flagged);
                    entry.stats.push(StatComparison {
                        statistic: statistic.into(),
                        sample: sv,
                        population: pv,
                        relative_diff: rd,
                        flagged,
                    });
                };
                for ((name, sv), (_, pv)) in smp.scalars.iter().zip(pop.scalars.iter()) {
                    push(name, vec![*sv], vec![*pv]);
                }
                push("day_of_week_shares", smp.day_shares, pop.day_shares);
            }
        }
        classes.push(entry);
    }
    SimilarityReport {
        tolerance,
        classes,
        flag_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trip::{Location, VehicleClass};
    use chrono::NaiveDate;

    fn labels(member: usize, casual: usize) -> Vec<UserType> {
        let mut v = vec![UserType::Member; member];
        v.extend(vec![UserType::Casual; casual]);
        v
    }

    fn ds(member: usize, casual: usize) -> LabeledDataset<usize> {
        let l = labels(member, casual);
        LabeledDataset::new((0..l.len()).collect(), l).unwrap()
    }

    #[test]
    fn downsample_balances() {
        let out = downsample(&ds(100, 50), 7).unwrap();
        assert_eq!(
            out.counts(),
            ClassCounts {
                casual: 50,
                member: 50
            }
        );
        // Minority untouched, output a subset in input order.
        assert!(out.records().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(out.records().iter().filter(|&&i| i >= 100).count(), 50);
    }

    #[test]
    fn downsample_balanced_is_identity() {
        let d = ds(30, 30);
        assert_eq!(downsample(&d, 1).unwrap(), d);
    }

    #[test]
    fn downsample_needs_both_classes() {
        assert_eq!(
            downsample(&ds(10, 0), 1).unwrap_err(),
            SamplingError::MissingClass(UserType::Casual)
        );
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split(&ds(60, 40), 0.8, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        assert_eq!(train_size(435_014, 0.8), 348_011);
        assert_eq!(435_014 - train_size(435_014, 0.8), 87_003);
        assert_eq!(train_size(100, 0.29), 29);
        assert_eq!(train_size(10, 0.55), 5);
    }

    #[test]
    fn split_is_a_partition_and_deterministic() {
        let (a, b) = split_indices(1000, 0.8, 11).unwrap();
        let (a2, b2) = split_indices(1000, 0.8, 11).unwrap();
        assert_eq!((&a, &b), (&a2, &b2));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        let (c, _) = split_indices(1000, 0.8, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_fraction() {
        assert!(split_indices(10, 1.0, 0).is_err());
        assert!(split_indices(10, 0.0, 0).is_err());
        assert!(split_indices(10, f64::NAN, 0).is_err());
    }

    fn trips(n: usize, scale: u32) -> Vec<CleanTrip> {
        (0..n)
            .map(|i| CleanTrip {
                start_instant: NaiveDate::from_ymd_opt(2018, 3, 5 + (i % 7) as u32)
                    .unwrap()
                    .and_hms_opt(8, 0, 0)
                    .unwrap(),
                duration_s: scale * (300 + (i as u32 * 37) % 900),
                start_loc: Location::Station("a".into()),
                end_loc: Location::Station("b".into()),
                label: Some(if i % 3 == 0 {
                    UserType::Casual
                } else {
                    UserType::Member
                }),
                vehicle_class: VehicleClass::DockedBike,
            })
            .collect()
    }

    #[test]
    fn identical_sample_has_no_flags() {
        let pop = trips(500, 1);
        let r = distribution_check(&pop, &pop, 0.05);
        assert!(r.is_similar());
        assert_eq!(r.classes.len(), 2);
        assert!(r
            .classes
            .iter()
            .flat_map(|c| &c.stats)
            .all(|s| s.relative_diff == 0.0));
    }

    #[test]
    fn doubled_durations_are_flagged() {
        let pop = trips(500, 1);
        let doubled = trips(500, 2);
        let r = distribution_check(&doubled, &pop, 0.05);
        for class in &r.classes {
            for s in &class.stats {
                assert_eq!(
                    s.flagged,
                    s.statistic.starts_with("duration"),
                    "{}",
                    s.statistic
                );
            }
        }
        assert_eq!(r.flag_count, 8);
    }

    #[test]
    fn missing_class_in_sample_is_flagged() {
        let pop = trips(30, 1);
        let members: Vec<CleanTrip> = pop
            .iter()
            .filter(|t| t.label == Some(UserType::Member))
            .cloned()
            .collect();
        let r = distribution_check(&members, &pop, 0.05);
        assert_eq!(r.flag_count, 1);
    }
}
