use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::constants::*;
use crate::geo::{BBox, LatLon, Polygon, Station, VoronoiPartition, Zone, ZoneSet, EARTH_RADIUS_M};

/// `n` stations scattered uniformly over a box around the fixture centre,
/// ids `31000`, `31001`, ... and coordinates rounded to 6 decimals.
pub fn synthetic_stations(n: usize, seed: u64) -> Vec<Station> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lat0, lon0) = FIXTURE_CENTER;
    let (dlat, dlon) = FIXTURE_HALF_SPAN_DEG;
    let mut seen = std::collections::HashSet::new();
    let mut stations = Vec::with_capacity(n);
    while stations.len() < n {
        let lat = round6(lat0 + rng.random_range(-dlat..dlat));
        let lon = round6(lon0 + rng.random_range(-dlon..dlon));
        if seen.insert((lat.to_bits(), lon.to_bits())) {
            let id = 31000 + stations.len();
            stations.push(Station::new(
                id.to_string(),
                format!("Station {id}"),
                lat,
                lon,
            ));
        }
    }
    stations
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// The default fixture network.
pub fn fixture_partition() -> VoronoiPartition {
    VoronoiPartition::build(synthetic_stations(FIXTURE_STATIONS, 0)).expect("distinct stations")
}

/// Box around every station grown by `FIXTURE_BOUNDARY_MARGIN_M`.
pub fn fixture_bbox(partition: &VoronoiPartition) -> BBox {
    let b =
        BBox::around(partition.stations().iter().map(|s| s.location)).expect("non-empty partition");
    let dlat = (FIXTURE_BOUNDARY_MARGIN_M / EARTH_RADIUS_M).to_degrees();
    let max_abs_lat = b.min_lat.abs().max(b.max_lat.abs()).min(89.0);
    let dlon = dlat / max_abs_lat.to_radians().cos();
    BBox {
        min_lat: b.min_lat - dlat,
        min_lon: b.min_lon - dlon,
        max_lat: b.max_lat + dlat,
        max_lon: b.max_lon + dlon,
    }
}

pub fn fixture_boundary(partition: &VoronoiPartition) -> Polygon {
    let b = fixture_bbox(partition);
    Polygon::rectangle(b.min_lat, b.min_lon, b.max_lat, b.max_lon).expect("non-degenerate box")
}

/// A grid of rectangular zones tiling the boundary box, ids `Z01`, `Z02`, ...
/// row by row from the south-west corner.
pub fn fixture_zones(partition: &VoronoiPartition) -> ZoneSet {
    let b = fixture_bbox(partition);
    let (rows, cols) = FIXTURE_ZONE_GRID;
    let h = (b.max_lat - b.min_lat) / rows as f64;
    let w = (b.max_lon - b.min_lon) / cols as f64;
    let mut zones = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let lat = b.min_lat + r as f64 * h;
            let lon = b.min_lon + c as f64 * w;
            let polygon =
                Polygon::rectangle(lat, lon, lat + h, lon + w).expect("non-degenerate zone");
            zones.push(Zone {
                id: format!("Z{:02}", zones.len() + 1),
                polygon,
            });
        }
    }
    ZoneSet::new(zones).expect("unique zone ids")
}

/// Uniform random point inside `bbox`.
pub fn random_point<R: Rng>(bbox: &BBox, rng: &mut R) -> LatLon {
    LatLon {
        lat: rng.random_range(bbox.min_lat..bbox.max_lat),
        lon: rng.random_range(bbox.min_lon..bbox.max_lon),
    }
}
