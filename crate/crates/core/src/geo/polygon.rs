use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{GeoError, LatLon};

/// Distance (degrees) under which a point counts as lying on an edge.
const EDGE_EPS: f64 = 1e-12;

/// Simple polygon given by its exterior ring (no holes).
///
/// Containment treats longitude as x and latitude as y; points on the
/// boundary are inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LatLon>", into = "Vec<LatLon>")]
pub struct Polygon {
    ring: Vec<LatLon>,
    min: LatLon,
    max: LatLon,
}

impl Polygon {
    /// Builds a polygon from an open or closed ring and checks that it is simple.
    pub fn new(ring: Vec<LatLon>) -> Result<Self, GeoError> {
        let mut ring = ring;
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeoError::MalformedPolygon(format!(
                "ring needs at least 3 distinct vertices, got {}",
                ring.len()
            )));
        }
        if let Some(p) = ring
            .iter()
            .find(|p| !p.lat.is_finite() || !p.lon.is_finite())
        {
            return Err(GeoError::MalformedPolygon(format!(
                "non-finite vertex ({}, {})",
                p.lat, p.lon
            )));
        }
        for i in 0..ring.len() {
            if ring[i] == ring[(i + 1) % ring.len()] {
                return Err(GeoError::MalformedPolygon(format!(
                    "repeated consecutive vertex at index {i}"
                )));
            }
        }
        if signed_area(&ring) == 0.0 {
            return Err(GeoError::MalformedPolygon("ring has zero area".into()));
        }
        if let Some((i, j)) = find_self_intersection(&ring) {
            return Err(GeoError::MalformedPolygon(format!(
                "edges {i} and {j} intersect"
            )));
        }
        let min = LatLon::new(
            ring.iter().map(|p| p.lat).fold(f64::INFINITY, f64::min),
            ring.iter().map(|p| p.lon).fold(f64::INFINITY, f64::min),
        );
        let max = LatLon::new(
            ring.iter().map(|p| p.lat).fold(f64::NEG_INFINITY, f64::max),
            ring.iter().map(|p| p.lon).fold(f64::NEG_INFINITY, f64::max),
        );
        Ok(Self { ring, min, max })
    }

    /// Axis-aligned rectangle `[min_lat, max_lat] x [min_lon, max_lon]`.
    pub fn rectangle(
        min_lat: f64,
        min_lon: f64,
        max_lat: f64,
        max_lon: f64,
    ) -> Result<Self, GeoError> {
        Self::new(vec![
            LatLon::new(min_lat, min_lon),
            LatLon::new(min_lat, max_lon),
            LatLon::new(max_lat, max_lon),
            LatLon::new(max_lat, min_lon),
        ])
    }

    /// Open ring (first vertex not repeated).
    pub fn ring(&self) -> &[LatLon] {
        &self.ring
    }

    /// (south-west, north-east) corners of the bounding box.
    pub fn bounds(&self) -> (LatLon, LatLon) {
        (self.min, self.max)
    }

    /// Ray-casting containment; boundary points count as inside.
    pub fn contains(&self, p: LatLon) -> bool {
        if p.lat < self.min.lat - EDGE_EPS
            || p.lat > self.max.lat + EDGE_EPS
            || p.lon < self.min.lon - EDGE_EPS
            || p.lon > self.max.lon + EDGE_EPS
        {
            return false;
        }
        let (px, py) = (p.lon, p.lat);
        let n = self.ring.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = (self.ring[i].lon, self.ring[i].lat);
            let (xj, yj) = (self.ring[j].lon, self.ring[j].lat);
            if on_segment(px, py, xj, yj, xi, yi) {
                return true;
            }
            if (yi > py) != (yj > py) {
                let x_cross = (xj - xi) * (py - yi) / (yj - yi) + xi;
                if px < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Planar shoelace area in squared degrees (always positive).
    pub fn area_deg2(&self) -> f64 {
        signed_area(&self.ring).abs()
    }
}

impl TryFrom<Vec<LatLon>> for Polygon {
    type Error = GeoError;

    fn try_from(ring: Vec<LatLon>) -> Result<Self, Self::Error> {
        Polygon::new(ring)
    }
}

impl From<Polygon> for Vec<LatLon> {
    fn from(p: Polygon) -> Self {
        p.ring
    }
}

fn signed_area(ring: &[LatLon]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        acc += a.lon * b.lat - b.lon * a.lat;
    }
    acc / 2.0
}

fn on_segment(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    let (dx, dy) = (bx - ax, by - ay);
    let len = (dx * dx + dy * dy).sqrt();
    let cross = dx * (py - ay) - dy * (px - ax);
    if cross.abs() > EDGE_EPS * len.max(1.0) {
        return false;
    }
    let dot = (px - ax) * dx + (py - ay) * dy;
    dot >= -EDGE_EPS && dot <= len * len + EDGE_EPS
}

fn orient(ax: f64, ay: f64, bx: f64, by: f64, cx: f64, cy: f64) -> f64 {
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

fn segments_intersect(a: LatLon, b: LatLon, c: LatLon, d: LatLon) -> bool {
    let d1 = orient(c.lon, c.lat, d.lon, d.lat, a.lon, a.lat);
    let d2 = orient(c.lon, c.lat, d.lon, d.lat, b.lon, b.lat);
    let d3 = orient(a.lon, a.lat, b.lon, b.lat, c.lon, c.lat);
    let d4 = orient(a.lon, a.lat, b.lon, b.lat, d.lon, d.lat);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let within = |p: LatLon, q: LatLon, r: LatLon| {
        r.lon >= p.lon.min(q.lon)
            && r.lon <= p.lon.max(q.lon)
            && r.lat >= p.lat.min(q.lat)
            && r.lat <= p.lat.max(q.lat)
    };
    (d1 == 0.0 && within(c, d, a))
        || (d2 == 0.0 && within(c, d, b))
        || (d3 == 0.0 && within(a, b, c))
        || (d4 == 0.0 && within(a, b, d))
}

fn find_self_intersection(ring: &[LatLon]) -> Option<(usize, usize)> {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            // Adjacent edges share a vertex by construction.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    pub polygon: Polygon,
}

/// Ordered aggregation zones. Lookups return the first match in file order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZoneSet {
    zones: Vec<Zone>,
}

impl ZoneSet {
    pub fn new(zones: Vec<Zone>) -> Result<Self, GeoError> {
        let mut seen = HashSet::new();
        for z in &zones {
            if !seen.insert(z.id.as_str()) {
                return Err(GeoError::DuplicateZone(z.id.clone()));
            }
        }
        Ok(Self { zones })
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn assign_zone_index(&self, p: LatLon) -> Option<usize> {
        self.zones.iter().position(|z| z.polygon.contains(p))
    }

    pub fn assign_zone(&self, p: LatLon) -> Option<&str> {
        self.assign_zone_index(p).map(|i| self.zones[i].id.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn square_containment() {
        let sq = unit_square();
        assert!(sq.contains(LatLon::new(0.5, 0.5)));
        assert!(!sq.contains(LatLon::new(2.0, 2.0)));
        assert!(!sq.contains(LatLon::new(0.5, 1.5)));
    }

    #[test]
    fn boundary_points_are_inside() {
        let sq = unit_square();
        for v in sq.ring() {
            assert!(sq.contains(*v));
        }
        assert!(sq.contains(LatLon::new(0.0, 0.5)));
        assert!(sq.contains(LatLon::new(0.5, 1.0)));
        assert!(sq.contains(LatLon::new(1.0, 0.25)));
    }

    #[test]
    fn concave_polygon() {
        // U shape opening north.
        let u = Polygon::new(vec![
            LatLon::new(0.0, 0.0),
            LatLon::new(0.0, 3.0),
            LatLon::new(3.0, 3.0),
            LatLon::new(3.0, 2.0),
            LatLon::new(1.0, 2.0),
            LatLon::new(1.0, 1.0),
            LatLon::new(3.0, 1.0),
            LatLon::new(3.0, 0.0),
        ])
        .unwrap();
        assert!(u.contains(LatLon::new(0.5, 1.5)));
        assert!(!u.contains(LatLon::new(2.0, 1.5)));
        assert!(u.contains(LatLon::new(2.0, 0.5)));
        assert!(u.contains(LatLon::new(2.0, 2.5)));
    }

    #[test]
    fn closed_ring_is_accepted() {
        let p = Polygon::new(vec![
            LatLon::new(0.0, 0.0),
            LatLon::new(0.0, 1.0),
            LatLon::new(1.0, 1.0),
            LatLon::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(p.ring().len(), 3);
    }

    #[test]
    fn malformed_polygons_rejected() {
        assert!(Polygon::new(vec![LatLon::new(0.0, 0.0), LatLon::new(1.0, 1.0)]).is_err());
        // Bow tie.
        let bow = Polygon::new(vec![
            LatLon::new(0.0, 0.0),
            LatLon::new(1.0, 1.0),
            LatLon::new(0.0, 1.0),
            LatLon::new(1.0, 0.0),
        ]);
        assert!(matches!(bow, Err(GeoError::MalformedPolygon(_))));
        // Collinear.
        let flat = Polygon::new(vec![
            LatLon::new(0.0, 0.0),
            LatLon::new(0.0, 1.0),
            LatLon::new(0.0, 2.0),
        ]);
        assert!(flat.is_err());
    }

    #[test]
    fn zone_lookup_prefers_file_order() {
        let zones = ZoneSet::new(vec![
            Zone {
                id: "west".into(),
                polygon: Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap(),
            },
            Zone {
                id: "east".into(),
                polygon: Polygon::rectangle(0.0, 1.0, 1.0, 2.0).unwrap(),
            },
        ])
        .unwrap();
        assert_eq!(zones.assign_zone(LatLon::new(0.5, 0.5)), Some("west"));
        assert_eq!(zones.assign_zone(LatLon::new(0.5, 1.5)), Some("east"));
        assert_eq!(zones.assign_zone(LatLon::new(0.5, 1.0)), Some("west"));
        assert_eq!(zones.assign_zone(LatLon::new(5.0, 5.0)), None);
    }

    #[test]
    fn duplicate_zone_ids_rejected() {
        let z = Zone {
            id: "a".into(),
            polygon: unit_square(),
        };
        assert!(matches!(
            ZoneSet::new(vec![z.clone(), z]),
            Err(GeoError::DuplicateZone(_))
        ));
    }
}
