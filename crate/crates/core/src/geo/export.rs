use serde::{Deserialize, Serialize};

use super::{GeoError, LatLon, VoronoiPartition, EARTH_RADIUS_M};

/// Geographic rectangle used to clip exported cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, GeoError> {
        let b = Self {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        };
        let ok = [min_lat, min_lon, max_lat, max_lon]
            .iter()
            .all(|v| v.is_finite())
            && min_lat < max_lat
            && min_lon < max_lon;
        if ok {
            Ok(b)
        } else {
            Err(GeoError::InvalidBbox(format!("{b:?}")))
        }
    }

    pub fn contains(&self, p: LatLon) -> bool {
        (self.min_lat..=self.max_lat).contains(&p.lat)
            && (self.min_lon..=self.max_lon).contains(&p.lon)
    }

    /// Grows the box by `margin_deg` on every side.
    pub fn expanded(&self, margin_deg: f64) -> Self {
        Self {
            min_lat: self.min_lat - margin_deg,
            min_lon: self.min_lon - margin_deg,
            max_lat: self.max_lat + margin_deg,
            max_lon: self.max_lon + margin_deg,
        }
    }

    /// Smallest box around the given points.
    pub fn around(points: impl IntoIterator<Item = LatLon>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self {
            min_lat: first.lat,
            min_lon: first.lon,
            max_lat: first.lat,
            max_lon: first.lon,
        };
        for p in it {
            b.min_lat = b.min_lat.min(p.lat);
            b.min_lon = b.min_lon.min(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
        }
        Some(b)
    }
}

/// Equirectangular projection to meters about a fixed origin.
///
/// Approximate: distances are exact along the origin's parallel and
/// meridian and drift with distance from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub origin: LatLon,
    cos_lat0: f64,
}

impl Projection {
    pub fn new(origin: LatLon) -> Self {
        Self {
            origin,
            cos_lat0: origin.lat.to_radians().cos(),
        }
    }

    pub fn project(&self, p: LatLon) -> (f64, f64) {
        (
            EARTH_RADIUS_M * (p.lon - self.origin.lon).to_radians() * self.cos_lat0,
            EARTH_RADIUS_M * (p.lat - self.origin.lat).to_radians(),
        )
    }

    pub fn unproject(&self, (x, y): (f64, f64)) -> LatLon {
        LatLon::new(
            self.origin.lat + (y / EARTH_RADIUS_M).to_degrees(),
            self.origin.lon + (x / (EARTH_RADIUS_M * self.cos_lat0)).to_degrees(),
        )
    }
}

/// One exported cell: a convex polygon in projected meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPolygon {
    pub station_id: String,
    pub station_name: String,
    /// Counter-clockwise open ring in projected meters.
    pub ring_xy: Vec<(f64, f64)>,
}

impl CellPolygon {
    pub fn area_m2(&self) -> f64 {
        shoelace(&self.ring_xy).abs()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellExport {
    pub projection: Projection,
    pub bbox: BBox,
    pub cells: Vec<CellPolygon>,
}

impl CellExport {
    /// Area of the projected bounding box in square meters.
    pub fn bbox_area_m2(&self) -> f64 {
        let (x0, y0) = self
            .projection
            .project(LatLon::new(self.bbox.min_lat, self.bbox.min_lon));
        let (x1, y1) = self
            .projection
            .project(LatLon::new(self.bbox.max_lat, self.bbox.max_lon));
        (x1 - x0) * (y1 - y0)
    }

    pub fn ring_latlon(&self, cell: &CellPolygon) -> Vec<LatLon> {
        cell.ring_xy
            .iter()
            .map(|&p| self.projection.unproject(p))
            .collect()
    }
}

fn shoelace(ring: &[(f64, f64)]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

/// Keeps the part of a convex polygon where `a*x + b*y <= c`.
fn clip_half_plane(poly: &[(f64, f64)], a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = a * p.0 + b * p.1 - c;
        let fq = a * q.0 + b * q.1 - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Planar Voronoi polygons of the partition on the equirectangular projection
/// about the station centroid, clipped to `bbox`.
pub fn export_cells(partition: &VoronoiPartition, bbox: BBox) -> Result<CellExport, GeoError> {
    let stations = partition.stations();
    if let Some(s) = stations.iter().find(|s| !bbox.contains(s.location)) {
        return Err(GeoError::StationOutsideBbox(s.id.clone()));
    }
    let n = stations.len() as f64;
    let origin = LatLon::new(
        stations.iter().map(|s| s.location.lat).sum::<f64>() / n,
        stations.iter().map(|s| s.location.lon).sum::<f64>() / n,
    );
    let projection = Projection::new(origin);
    let sites: Vec<(f64, f64)> = stations
        .iter()
        .map(|s| projection.project(s.location))
        .collect();

    let (x0, y0) = projection.project(LatLon::new(bbox.min_lat, bbox.min_lon));
    let (x1, y1) = projection.project(LatLon::new(bbox.max_lat, bbox.max_lon));
    let rect = vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)];

    let cells = stations
        .iter()
        .zip(&sites)
        .enumerate()
        .map(|(i, (station, &s))| {
            let mut ring = rect.clone();
            let mut order: Vec<usize> = (0..sites.len()).filter(|&j| j != i).collect();
            // Nearest neighbours first shrink the cell fastest.
            order.sort_by(|&a, &b| {
                dist2(s, sites[a])
                    .total_cmp(&dist2(s, sites[b]))
                    .then(a.cmp(&b))
            });
            for j in order {
                if ring.is_empty() {
                    break;
                }
                let t = sites[j];
                // |p-s|^2 <= |p-t|^2  <=>  2 p.(t-s) <= |t|^2 - |s|^2
                let (a, b) = (2.0 * (t.0 - s.0), 2.0 * (t.1 - s.1));
                let c = (t.0 * t.0 + t.1 * t.1) - (s.0 * s.0 + s.1 * s.1);
                ring = clip_half_plane(&ring, a, b, c);
            }
            CellPolygon {
                station_id: station.id.clone(),
                station_name: station.name.clone(),
                ring_xy: ring,
            }
        })
        .collect();

    Ok(CellExport {
        projection,
        bbox,
        cells,
    })
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}
