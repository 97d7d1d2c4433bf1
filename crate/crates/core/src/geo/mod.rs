//! Geometry: stations, the nearest-station partition, polygons and zones.

mod export;
mod geojson;
mod partition;
mod polygon;

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export_cells, BBox, CellExport, CellPolygon, Projection};
pub use geojson::{cells_to_geojson, parse_boundary, parse_zones, polygon_to_geojson};
pub use partition::VoronoiPartition;
pub use polygon::{Polygon, Zone, ZoneSet};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("partition needs at least one station")]
    NoStations,
    #[error("stations share identical coordinates: {}", .0.join(", "))]
    DuplicateCoordinates(Vec<String>),
    #[error("duplicate station id {0:?}")]
    DuplicateId(String),
    #[error("invalid coordinates for {what}: ({lat}, {lon})")]
    InvalidCoordinates { what: String, lat: f64, lon: f64 },
    #[error("malformed polygon: {0}")]
    MalformedPolygon(String),
    #[error("duplicate zone id {0:?}")]
    DuplicateZone(String),
    #[error("station {0:?} lies outside the export bounding box")]
    StationOutsideBbox(String),
    #[error("invalid bounding box: {0}")]
    InvalidBbox(String),
    #[error("GeoJSON: {0}")]
    GeoJson(String),
    #[error("stations file, line {line}: {message}")]
    StationRow { line: u64, message: String },
    #[error("stations file is missing column {0:?}")]
    MissingColumn(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// WGS84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }

    /// Great-circle distance in meters.
    pub fn haversine_m(&self, other: &LatLon) -> f64 {
        haversine_m(*self, *other)
    }
}

/// Great-circle distance in meters between two WGS84 points.
pub fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = p2 - p1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.clamp(0.0, 1.0).sqrt().asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: String,
    pub name: String,
    pub location: LatLon,
}

impl Station {
    pub fn new(id: impl Into<String>, name: impl Into<String>, lat: f64, lon: f64) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            location: LatLon::new(lat, lon),
        }
    }
}

/// Reads a stations file with header columns `id,name,lat,lon`.
pub fn read_stations<R: Read>(source: R) -> Result<Vec<Station>, GeoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| GeoError::MissingColumn(name.to_string()))
    };
    let (id, name, lat, lon) = (col("id")?, col("name")?, col("lat")?, col("lon")?);

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse = |i: usize, what: &str| {
            field(i).parse::<f64>().map_err(|_| GeoError::StationRow {
                line,
                message: format!("cannot parse {what} {:?}", field(i)),
            })
        };
        let station = Station::new(
            field(id),
            field(name),
            parse(lat, "lat")?,
            parse(lon, "lon")?,
        );
        if station.id.is_empty() {
            return Err(GeoError::StationRow {
                line,
                message: "empty station id".into(),
            });
        }
        if !station.location.is_valid() {
            return Err(GeoError::StationRow {
                line,
                message: format!(
                    "coordinates out of range ({}, {})",
                    station.location.lat, station.location.lon
                ),
            });
        }
        out.push(station);
    }
    Ok(out)
}
