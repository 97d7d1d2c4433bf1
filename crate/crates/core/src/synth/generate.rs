use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;
use rayon::prelude::*;

use super::constants::{JITTER_RADIUS_M, SPAN_WEEKS, START_DATE};
use super::{CohortProfile, SynthError};
use crate::geo::{LatLon, VoronoiPartition, EARTH_RADIUS_M};
use crate::ingest::CleaningRules;
use crate::trip::{CleanTrip, Location, VehicleClass, MAX_DURATION_S, MIN_DURATION_S};

/// Short trips between matching endpoints are redrawn below this length,
/// so every generated trip passes the cleaner.
const SHORT_TRIP_S: u32 = 120;

struct CellSampler {
    locations: Vec<(String, LatLon)>,
    index: WeightedIndex<f64>,
}

impl CellSampler {
    fn new(
        weights: &std::collections::BTreeMap<String, f64>,
        partition: &VoronoiPartition,
    ) -> Result<Self, SynthError> {
        let locations = weights
            .keys()
            .map(|id| {
                let s = partition.station(id).expect("validated");
                (s.id.clone(), s.location)
            })
            .collect();
        let index = WeightedIndex::new(weights.values().copied())
            .map_err(|e| SynthError::Profile(format!("cell weights: {e}")))?;
        Ok(Self { locations, index })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &(String, LatLon) {
        &self.locations[self.index.sample(rng)]
    }
}

struct Sampler<'a> {
    profile: &'a CohortProfile,
    days: WeightedIndex<f64>,
    hours: [WeightedIndex<f64>; 2],
    duration: LogNormal<f64>,
    /// `[am, pm]` x `[start, end]`.
    cells: [[CellSampler; 2]; 2],
    first_day: NaiveDate,
}

impl<'a> Sampler<'a> {
    fn new(profile: &'a CohortProfile, partition: &VoronoiPartition) -> Result<Self, SynthError> {
        profile.validate(partition)?;
        let weighted = |w: &[f64]| {
            WeightedIndex::new(w.iter().copied())
                .map_err(|e| SynthError::Profile(format!("{}: {e}", profile.name)))
        };
        let mu = (profile.duration.median_min * 60.0).ln();
        let duration = LogNormal::new(mu, profile.duration.sigma)
            .map_err(|e| SynthError::Profile(format!("{}: {e}", profile.name)))?;
        let cells = |c: &super::CellWeights| -> Result<[CellSampler; 2], SynthError> {
            Ok([
                CellSampler::new(&c.start, partition)?,
                CellSampler::new(&c.end, partition)?,
            ])
        };
        let (y, m, d) = START_DATE;
        Ok(Self {
            profile,
            days: weighted(&profile.day_weights)?,
            hours: [
                weighted(&profile.weekday_hour_weights)?,
                weighted(&profile.weekend_hour_weights)?,
            ],
            duration,
            cells: [cells(&profile.am_cells)?, cells(&profile.pm_cells)?],
            first_day: NaiveDate::from_ymd_opt(y, m, d).expect("valid start date"),
        })
    }

    fn duration_s<R: Rng>(&self, rng: &mut R) -> u32 {
        loop {
            let s = self.duration.sample(rng).round();
            if (f64::from(MIN_DURATION_S)..=f64::from(MAX_DURATION_S)).contains(&s) {
                return s as u32;
            }
        }
    }

    fn trip(&self, rng: &mut ChaCha8Rng) -> CleanTrip {
        let day = self.days.sample(rng);
        let week = rng.random_range(0..SPAN_WEEKS);
        let hour = self.hours[usize::from(day >= 5)].sample(rng);
        let minute = rng.random_range(0..60);
        let second = rng.random_range(0..60);
        let date = self.first_day + Duration::days(i64::from(week) * 7 + day as i64);
        let time = NaiveTime::from_hms_opt(hour as u32, minute, second).expect("valid time");
        let [start_cells, end_cells] = &self.cells[usize::from(hour >= 12)];
        let (from_id, from) = start_cells.sample(rng).clone();
        let (to_id, to) = end_cells.sample(rng).clone();
        let (start_loc, end_loc) = match self.profile.vehicle_class {
            VehicleClass::DockedBike => (Location::Station(from_id), Location::Station(to_id)),
            VehicleClass::DocklessBike | VehicleClass::Scooter => (
                Location::Point(jitter(from, rng)),
                Location::Point(jitter(to, rng)),
            ),
        };
        let same_place = match (&start_loc, &end_loc) {
            (Location::Station(a), Location::Station(b)) => a == b,
            (Location::Point(a), Location::Point(b)) => {
                a.haversine_m(b) < CleaningRules::DEFAULT_RADIUS_M
            }
            _ => false,
        };
        let mut duration_s = self.duration_s(rng);
        while same_place && duration_s < SHORT_TRIP_S {
            duration_s = self.duration_s(rng);
        }
        CleanTrip {
            start_instant: NaiveDateTime::new(date, time),
            duration_s,
            start_loc,
            end_loc,
            label: self.profile.label,
            vehicle_class: self.profile.vehicle_class,
        }
    }
}

/// Uniform point within `JITTER_RADIUS_M` of `center`.
fn jitter<R: Rng>(center: LatLon, rng: &mut R) -> LatLon {
    let r = JITTER_RADIUS_M * rng.random::<f64>().sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let dlat = (r * theta.cos() / EARTH_RADIUS_M).to_degrees();
    let dlon = (r * theta.sin() / (EARTH_RADIUS_M * center.lat.to_radians().cos())).to_degrees();
    LatLon {
        lat: center.lat + dlat,
        lon: center.lon + dlon,
    }
}

/// RNG for trip `index`: one ChaCha stream per trip under the same key.
fn trip_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `n` independent trips from `profile`. Each trip draws its day, then the
/// hour for that day type, then a uniform minute and second; the date is a
/// uniformly chosen week of the generated span. Cells follow the AM or PM
/// weights by start hour. Durations are log-normal, truncated to the
/// cleaner's bounds.
pub fn generate(
    profile: &CohortProfile,
    partition: &VoronoiPartition,
    n: usize,
    seed: u64,
) -> Result<Vec<CleanTrip>, SynthError> {
    let sampler = Sampler::new(profile, partition)?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| sampler.trip(&mut trip_rng(seed, i)))
        .collect())
}
