use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::constants::*;
use super::SynthError;
use crate::geo::{LatLon, VoronoiPartition};
use crate::trip::{UserType, VehicleClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalDuration {
    pub median_min: f64,
    pub sigma: f64,
}

/// Start and end cell weights keyed by station id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellWeights {
    pub start: BTreeMap<String, f64>,
    pub end: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortProfile {
    pub name: String,
    pub label: Option<UserType>,
    pub vehicle_class: VehicleClass,
    /// Monday first.
    pub day_weights: Vec<f64>,
    pub weekday_hour_weights: Vec<f64>,
    pub weekend_hour_weights: Vec<f64>,
    pub duration: LogNormalDuration,
    /// Used for start hours before noon.
    pub am_cells: CellWeights,
    pub pm_cells: CellWeights,
}

const SUM_TOLERANCE: f64 = 1e-9;

fn check_weights(what: &str, w: &[f64], len: Option<usize>) -> Result<(), SynthError> {
    if let Some(len) = len {
        if w.len() != len {
            return Err(SynthError::Profile(format!(
                "{what}: expected {len} weights, got {}",
                w.len()
            )));
        }
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(SynthError::Profile(format!(
            "{what}: weights must be finite and non-negative"
        )));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(SynthError::Profile(format!(
            "{what}: weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

impl CohortProfile {
    /// Checks weight shapes and normalisation, the duration model, and that
    /// every weighted cell exists in `partition`.
    pub fn validate(&self, partition: &VoronoiPartition) -> Result<(), SynthError> {
        check_weights(
            &format!("{} day weights", self.name),
            &self.day_weights,
            Some(7),
        )?;
        check_weights(
            &format!("{} weekday hours", self.name),
            &self.weekday_hour_weights,
            Some(24),
        )?;
        check_weights(
            &format!("{} weekend hours", self.name),
            &self.weekend_hour_weights,
            Some(24),
        )?;
        let d = self.duration;
        if !(d.median_min.is_finite() && d.median_min > 1.0 && d.sigma.is_finite() && d.sigma > 0.0)
        {
            return Err(SynthError::Profile(format!(
                "{}: duration needs median > 1 min and sigma > 0",
                self.name
            )));
        }
        for (part, cells) in [("am", &self.am_cells), ("pm", &self.pm_cells)] {
            for (side, map) in [("start", &cells.start), ("end", &cells.end)] {
                let what = format!("{} {part} {side} cells", self.name);
                if let Some(id) = map.keys().find(|id| partition.station(id).is_none()) {
                    return Err(SynthError::Profile(format!(
                        "{what}: unknown station {id:?}"
                    )));
                }
                check_weights(&what, &map.values().copied().collect::<Vec<_>>(), None)?;
            }
        }
        if self.label.is_some() != (self.vehicle_class == VehicleClass::DockedBike) {
            return Err(SynthError::Profile(format!(
                "{}: only docked profiles carry a label",
                self.name
            )));
        }
        Ok(())
    }
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| x / sum).collect()
}

/// Cell groups derived from distance to the station centroid.
struct Districts {
    ids: Vec<String>,
    downtown: Vec<usize>,
    mixed: Vec<usize>,
    residential: Vec<usize>,
    hotspots: Vec<usize>,
}

impl Districts {
    fn of(partition: &VoronoiPartition) -> Self {
        let stations = partition.stations();
        let n = stations.len() as f64;
        let centroid = LatLon {
            lat: stations.iter().map(|s| s.location.lat).sum::<f64>() / n,
            lon: stations.iter().map(|s| s.location.lon).sum::<f64>() / n,
        };
        let mut ranked: Vec<usize> = (0..stations.len()).collect();
        let dist: Vec<f64> = stations
            .iter()
            .map(|s| s.location.haversine_m(&centroid))
            .collect();
        ranked.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let len = ranked.len();
        let n_down = ((len as f64 * DOWNTOWN_SHARE).round() as usize).clamp(1, len);
        let n_res = ((len as f64 * RESIDENTIAL_SHARE).round() as usize).min(len - n_down);
        let downtown = ranked[..n_down].to_vec();
        let mixed = ranked[n_down..len - n_res].to_vec();
        let residential = ranked[len - n_res..].to_vec();
        let inner = &ranked[..len - n_res];
        let k = HOTSPOT_CELLS.min(inner.len()).max(1);
        let hotspots = (0..k).map(|i| inner[i * inner.len() / k]).collect();
        let or_all = |v: Vec<usize>| if v.is_empty() { ranked.clone() } else { v };
        Self {
            ids: stations.iter().map(|s| s.id.clone()).collect(),
            downtown,
            mixed: or_all(mixed),
            residential: or_all(residential),
            hotspots,
        }
    }

    /// `FOCUS_WEIGHT` spread over `focus`, the rest over every cell.
    fn weights(&self, focus: &[usize]) -> BTreeMap<String, f64> {
        let n = self.ids.len() as f64;
        let mut w = vec![(1.0 - FOCUS_WEIGHT) / n; self.ids.len()];
        for &i in focus {
            w[i] += FOCUS_WEIGHT / focus.len() as f64;
        }
        let w = normalized(&w);
        self.ids.iter().cloned().zip(w).collect()
    }

    fn cells(&self, start: &[usize], end: &[usize]) -> CellWeights {
        CellWeights {
            start: self.weights(start),
            end: self.weights(end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultProfiles {
    pub commuter: CohortProfile,
    pub recreational: CohortProfile,
    pub dockless_bike: CohortProfile,
    pub scooter: CohortProfile,
}

impl DefaultProfiles {
    pub fn all(&self) -> [&CohortProfile; 4] {
        [
            &self.commuter,
            &self.recreational,
            &self.dockless_bike,
            &self.scooter,
        ]
    }
}

/// Commuter (member) and recreational (casual) docked profiles plus the two
/// unlabeled dockless profiles, with cell weights laid out over `partition`.
pub fn default_profiles(partition: &VoronoiPartition) -> DefaultProfiles {
    let d = Districts::of(partition);
    let profile = |name: &str,
                   label: Option<UserType>,
                   vehicle_class: VehicleClass,
                   days: &[f64],
                   weekday: &[f64],
                   weekend: &[f64],
                   (median_min, sigma): (f64, f64),
                   am_cells: CellWeights,
                   pm_cells: CellWeights| CohortProfile {
        name: name.to_string(),
        label,
        vehicle_class,
        day_weights: normalized(days),
        weekday_hour_weights: normalized(weekday),
        weekend_hour_weights: normalized(weekend),
        duration: LogNormalDuration { median_min, sigma },
        am_cells,
        pm_cells,
    };
    DefaultProfiles {
        commuter: profile(
            "commuter",
            Some(UserType::Member),
            VehicleClass::DockedBike,
            &COMMUTER_DAYS,
            &COMMUTER_WEEKDAY_HOURS,
            &COMMUTER_WEEKEND_HOURS,
            (COMMUTER_MEDIAN_MIN, COMMUTER_SIGMA),
            d.cells(&d.residential, &d.downtown),
            d.cells(&d.downtown, &d.residential),
        ),
        recreational: profile(
            "recreational",
            Some(UserType::Casual),
            VehicleClass::DockedBike,
            &RECREATIONAL_DAYS,
            &RECREATIONAL_WEEKDAY_HOURS,
            &RECREATIONAL_WEEKEND_HOURS,
            (RECREATIONAL_MEDIAN_MIN, RECREATIONAL_SIGMA),
            d.cells(&d.hotspots, &d.hotspots),
            d.cells(&d.hotspots, &d.hotspots),
        ),
        dockless_bike: profile(
            "dockless_bike",
            None,
            VehicleClass::DocklessBike,
            &DOCKLESS_BIKE_DAYS,
            &DOCKLESS_BIKE_WEEKDAY_HOURS,
            &DOCKLESS_BIKE_WEEKEND_HOURS,
            (DOCKLESS_BIKE_MEDIAN_MIN, DOCKLESS_BIKE_SIGMA),
            d.cells(&d.downtown, &d.downtown),
            d.cells(&d.downtown, &d.mixed),
        ),
        scooter: profile(
            "scooter",
            None,
            VehicleClass::Scooter,
            &SCOOTER_DAYS,
            &SCOOTER_WEEKDAY_HOURS,
            &SCOOTER_WEEKEND_HOURS,
            (SCOOTER_MEDIAN_MIN, SCOOTER_SIGMA),
            d.cells(&d.mixed, &d.downtown),
            d.cells(&d.downtown, &d.mixed),
        ),
    }
}
