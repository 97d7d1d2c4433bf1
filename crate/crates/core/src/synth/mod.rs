//! Synthetic labeled trips drawn from parametric cohort profiles, plus a
//! synthetic station network to lay them out on.

pub mod constants;
mod fixtures;
mod generate;
mod profile;

use thiserror::Error;

pub use fixtures::{
    fixture_bbox, fixture_boundary, fixture_partition, fixture_zones, random_point,
    synthetic_stations,
};
pub use generate::generate;
pub use profile::{
    default_profiles, CellWeights, CohortProfile, DefaultProfiles, LogNormalDuration,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("profile file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parses a JSON list of profiles, bare or as the `data` of a written
/// `profiles.json`.
pub fn profiles_from_json(text: &str) -> Result<Vec<CohortProfile>, SynthError> {
    let mut doc: serde_json::Value = serde_json::from_str(text)?;
    if let Some(data) = doc.get_mut("data") {
        doc = data.take();
    }
    Ok(serde_json::from_value(doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::haversine_m;
    use crate::ingest::{clean, CleaningRules};
    use crate::stats;
    use crate::trip::{Location, UserType, VehicleClass};

    fn median_min(trips: &[crate::trip::CleanTrip]) -> f64 {
        let d: Vec<f64> = trips.iter().map(|t| f64::from(t.duration_s)).collect();
        stats::quantiles(&d, &[0.5]).unwrap()[0] / 60.0
    }

    #[test]
    fn default_profiles_are_valid() {
        let p = fixture_partition();
        let d = default_profiles(&p);
        for profile in d.all() {
            profile.validate(&p).unwrap();
        }
        let weekend: f64 = d.commuter.day_weights[5..].iter().sum();
        assert!(weekend < 2.0 / 7.0);
        assert!((20.0..=27.0).contains(&d.recreational.duration.median_min));
        assert_eq!(d.commuter.label, Some(UserType::Member));
        assert_eq!(d.scooter.vehicle_class, VehicleClass::Scooter);
    }

    #[test]
    fn zero_trips_and_determinism() {
        let p = fixture_partition();
        let d = default_profiles(&p);
        assert!(generate(&d.commuter, &p, 0, 1).unwrap().is_empty());
        let a = generate(&d.scooter, &p, 200, 7).unwrap();
        assert_eq!(a, generate(&d.scooter, &p, 200, 7).unwrap());
        assert_ne!(a, generate(&d.scooter, &p, 200, 8).unwrap());
    }

    #[test]
    fn commuter_sample_matches_profile_and_cleans() {
        let p = fixture_partition();
        let d = default_profiles(&p);
        let trips = generate(&d.commuter, &p, 10_000, 3).unwrap();
        let m = median_min(&trips);
        assert!((9.0..=11.0).contains(&m), "median {m}");
        let rules = CleaningRules::new(fixture_boundary(&p));
        let (kept, report) = clean(&trips, &rules, &p).unwrap();
        assert_eq!(report.kept_count, trips.len());
        assert_eq!(kept, trips);
    }

    #[test]
    fn dockless_points_stay_near_stations_and_inside_boundary() {
        let p = fixture_partition();
        let d = default_profiles(&p);
        let trips = generate(&d.dockless_bike, &p, 2_000, 5).unwrap();
        let boundary = fixture_boundary(&p);
        for t in &trips {
            for loc in [&t.start_loc, &t.end_loc] {
                let Location::Point(pt) = loc else {
                    panic!("dockless trip with a station")
                };
                assert!(boundary.contains(*pt));
                let nearest = p
                    .stations()
                    .iter()
                    .map(|s| haversine_m(s.location, *pt))
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest <= constants::JITTER_RADIUS_M * (1.0 + 1e-6));
            }
        }
        let rules = CleaningRules::new(boundary);
        assert_eq!(clean(&trips, &rules, &p).unwrap().1.kept_count, trips.len());
    }

    #[test]
    fn bad_profiles_are_rejected() {
        let p = fixture_partition();
        let mut prof = default_profiles(&p).commuter;
        prof.day_weights[0] += 0.1;
        assert!(prof.validate(&p).is_err());
        let mut prof = default_profiles(&p).commuter;
        prof.am_cells.start.insert("nope".into(), 0.0);
        assert!(generate(&prof, &p, 1, 0).is_err());
        let json = serde_json::to_string(&vec![default_profiles(&p).recreational]).unwrap();
        assert_eq!(
            profiles_from_json(&json).unwrap()[0],
            default_profiles(&p).recreational
        );
        let wrapped = format!(r#"{{"schema_version": 1, "data": {json}}}"#);
        assert_eq!(profiles_from_json(&wrapped).unwrap().len(), 1);
        assert!(profiles_from_json("{}").is_err());
    }
}
