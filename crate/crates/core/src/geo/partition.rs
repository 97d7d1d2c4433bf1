use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{haversine_m, GeoError, LatLon, Station};

/// Nearest-station partition of the plane.
///
/// Cells are indexed by the stations sorted by id, so cell order (and every
/// feature layout derived from it) does not depend on input order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "Vec<Station>", try_from = "Vec<Station>")]
pub struct VoronoiPartition {
    stations: Vec<Station>,
    /// Unit vectors on the sphere, used to shortlist candidates by chord length.
    unit: Vec<[f64; 3]>,
}

// Chord length is a monotone function of great-circle distance, so the
// shortlist below always contains the haversine minimiser. The slack absorbs
// rounding in both formulas.
const CHORD_SLACK_ABS: f64 = 1e-12;
const CHORD_SLACK_REL: f64 = 1e-9;

fn unit_vector(p: LatLon) -> [f64; 3] {
    let (lat, lon) = (p.lat.to_radians(), p.lon.to_radians());
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

fn chord(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

impl VoronoiPartition {
    pub fn build(stations: Vec<Station>) -> Result<Self, GeoError> {
        if stations.is_empty() {
            return Err(GeoError::NoStations);
        }
        let mut stations = stations;
        for s in &stations {
            if !s.location.is_valid() {
                return Err(GeoError::InvalidCoordinates {
                    what: format!("station {:?}", s.id),
                    lat: s.location.lat,
                    lon: s.location.lon,
                });
            }
        }
        stations.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = stations.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(GeoError::DuplicateId(w[0].id.clone()));
        }

        let mut by_coord: BTreeMap<(u64, u64), Vec<String>> = BTreeMap::new();
        for s in &stations {
            // +0.0 normalises negative zero so that -0.0 and 0.0 collide.
            let key = (
                (s.location.lat + 0.0).to_bits(),
                (s.location.lon + 0.0).to_bits(),
            );
            by_coord.entry(key).or_default().push(s.id.clone());
        }
        let colliding: Vec<String> = by_coord
            .into_values()
            .filter(|ids| ids.len() > 1)
            .flatten()
            .collect();
        if !colliding.is_empty() {
            return Err(GeoError::DuplicateCoordinates(colliding));
        }

        let unit = stations.iter().map(|s| unit_vector(s.location)).collect();
        Ok(Self { stations, unit })
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    /// Stations in cell order.
    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn station_ids(&self) -> impl Iterator<Item = &str> {
        self.stations.iter().map(|s| s.id.as_str())
    }

    pub fn cell_index_of(&self, station_id: &str) -> Option<usize> {
        self.stations
            .binary_search_by(|s| s.id.as_str().cmp(station_id))
            .ok()
    }

    pub fn station(&self, station_id: &str) -> Option<&Station> {
        self.cell_index_of(station_id).map(|i| &self.stations[i])
    }

    /// Index of the cell containing `point`: minimum haversine distance,
    /// exact ties resolved to the lexicographically smallest station id.
    pub fn assign_cell_index(&self, point: LatLon) -> usize {
        let u = unit_vector(point);
        let chords: Vec<f64> = self.unit.iter().map(|s| chord(s, &u)).collect();
        let min_chord = chords.iter().copied().fold(f64::INFINITY, f64::min);
        let limit = min_chord + CHORD_SLACK_ABS + min_chord * CHORD_SLACK_REL;

        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (i, &c) in chords.iter().enumerate() {
            if c > limit {
                continue;
            }
            let d = haversine_m(point, self.stations[i].location);
            // Strict comparison keeps the earliest (smallest id) on ties.
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Station id owning the cell containing `point`.
    pub fn assign_cell(&self, point: LatLon) -> &str {
        &self.stations[self.assign_cell_index(point)].id
    }
}

impl From<VoronoiPartition> for Vec<Station> {
    fn from(p: VoronoiPartition) -> Self {
        p.stations
    }
}

impl TryFrom<Vec<Station>> for VoronoiPartition {
    type Error = GeoError;

    fn try_from(stations: Vec<Station>) -> Result<Self, Self::Error> {
        VoronoiPartition::build(stations)
    }
}
