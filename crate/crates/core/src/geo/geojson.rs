//! Minimal GeoJSON reading and writing for Polygon features.

use serde_json::{json, Map, Value};

use super::{CellExport, GeoError, LatLon, Polygon, Zone, ZoneSet};

fn err(msg: impl Into<String>) -> GeoError {
    GeoError::GeoJson(msg.into())
}

fn ring_from_value(v: &Value) -> Result<Vec<LatLon>, GeoError> {
    let coords = v.as_array().ok_or_else(|| err("ring is not an array"))?;
    coords
        .iter()
        .map(|pos| {
            let pos = pos
                .as_array()
                .ok_or_else(|| err("position is not an array"))?;
            match (
                pos.first().and_then(Value::as_f64),
                pos.get(1).and_then(Value::as_f64),
            ) {
                (Some(lon), Some(lat)) => Ok(LatLon::new(lat, lon)),
                _ => Err(err("position needs numeric [lon, lat]")),
            }
        })
        .collect()
}

fn polygon_from_geometry(geometry: &Value) -> Result<Polygon, GeoError> {
    let kind = geometry.get("type").and_then(Value::as_str).unwrap_or("");
    if kind != "Polygon" {
        return Err(err(format!("expected Polygon geometry, found {kind:?}")));
    }
    let rings = geometry
        .get("coordinates")
        .and_then(Value::as_array)
        .ok_or_else(|| err("Polygon without coordinates"))?;
    match rings.len() {
        0 => Err(err("Polygon with no rings")),
        1 => Polygon::new(ring_from_value(&rings[0])?),
        _ => Err(err("polygons with holes are not supported")),
    }
}

/// Features of a FeatureCollection, a single Feature, or a bare geometry
/// wrapped as a feature without properties.
/// Properties and geometry of one feature.
type FeatureParts<'a> = (Option<&'a Map<String, Value>>, &'a Value);

fn features(doc: &Value) -> Result<Vec<FeatureParts<'_>>, GeoError> {
    match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| err("FeatureCollection without features"))?
            .iter()
            .map(|f| {
                let geom = f
                    .get("geometry")
                    .ok_or_else(|| err("feature without geometry"))?;
                Ok((f.get("properties").and_then(Value::as_object), geom))
            })
            .collect(),
        Some("Feature") => {
            let geom = doc
                .get("geometry")
                .ok_or_else(|| err("feature without geometry"))?;
            Ok(vec![(
                doc.get("properties").and_then(Value::as_object),
                geom,
            )])
        }
        Some(_) => Ok(vec![(None, doc)]),
        None => Err(err("document has no \"type\"")),
    }
}

/// Reads a service boundary: the first Polygon feature of the document.
pub fn parse_boundary(text: &str) -> Result<Polygon, GeoError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let feats = features(&doc)?;
    let (_, geom) = feats.first().ok_or_else(|| err("no boundary feature"))?;
    polygon_from_geometry(geom)
}

/// Reads zones from a FeatureCollection of Polygons carrying a `zone_id` property.
pub fn parse_zones(text: &str) -> Result<ZoneSet, GeoError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let zones = features(&doc)?
        .into_iter()
        .enumerate()
        .map(|(i, (props, geom))| {
            let id = match props.and_then(|p| p.get("zone_id")) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(err(format!("feature {i} has no zone_id property"))),
            };
            Ok(Zone {
                id,
                polygon: polygon_from_geometry(geom)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    ZoneSet::new(zones)
}

fn closed_ring(ring: impl IntoIterator<Item = LatLon>) -> Value {
    let mut coords: Vec<Value> = ring.into_iter().map(|p| json!([p.lon, p.lat])).collect();
    if let Some(first) = coords.first().cloned() {
        coords.push(first);
    }
    Value::Array(coords)
}

pub fn polygon_to_geojson(polygon: &Polygon, properties: Value) -> Value {
    json!({
        "type": "Feature",
        "properties": properties,
        "geometry": {
            "type": "Polygon",
            "coordinates": [closed_ring(polygon.ring().iter().copied())],
        }
    })
}

/// FeatureCollection with one Polygon per cell; empty cells are skipped.
pub fn cells_to_geojson(export: &CellExport) -> Value {
    let features: Vec<Value> = export
        .cells
        .iter()
        .filter(|c| c.ring_xy.len() >= 3)
        .map(|cell| {
            json!({
                "type": "Feature",
                "properties": {
                    "station_id": cell.station_id,
                    "name": cell.station_name,
                    "area_m2": cell.area_m2(),
                },
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [closed_ring(export.ring_latlon(cell))],
                }
            })
        })
        .collect();
    json!({
        "type": "FeatureCollection",
        "features": features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZONES: &str = r#"{
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature", "properties": {"zone_id": "1A01"},
         "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
        {"type": "Feature", "properties": {"zone_id": 7},
         "geometry": {"type": "Polygon", "coordinates": [[[1,0],[2,0],[2,1],[1,1],[1,0]]]}}
      ]
    }"#;

    #[test]
    fn parses_zones() {
        let zones = parse_zones(ZONES).unwrap();
        assert_eq!(zones.len(), 2);
        assert_eq!(zones.assign_zone(LatLon::new(0.5, 0.5)), Some("1A01"));
        assert_eq!(zones.assign_zone(LatLon::new(0.5, 1.5)), Some("7"));
    }

    #[test]
    fn boundary_from_bare_geometry() {
        let b =
            parse_boundary(r#"{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]]]}"#)
                .unwrap();
        assert!(b.contains(LatLon::new(2.0, 2.0)));
    }

    #[test]
    fn holes_and_multipolygons_rejected() {
        let holes = r#"{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[2,1],[2,2],[1,1]]]}"#;
        assert!(parse_boundary(holes).is_err());
        let multi = r#"{"type":"MultiPolygon","coordinates":[]}"#;
        assert!(parse_boundary(multi).is_err());
    }

    #[test]
    fn missing_zone_id_is_an_error() {
        let doc = r#"{"type":"FeatureCollection","features":[{"type":"Feature","properties":{},
          "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]}"#;
        assert!(parse_zones(doc).is_err());
    }

    #[test]
    fn polygon_geojson_round_trip() {
        let p = Polygon::rectangle(38.8, -77.1, 39.0, -76.9).unwrap();
        let text = polygon_to_geojson(&p, json!({})).to_string();
        assert_eq!(parse_boundary(&text).unwrap(), p);
    }
}
