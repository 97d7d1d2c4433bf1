use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IngestError, RawDockedTrip, RawDocklessTrip, RawTrip};
use crate::geo::{haversine_m, LatLon, Polygon, VoronoiPartition};
use crate::trip::{CleanTrip, Location, VehicleClass, MAX_DURATION_S, MIN_DURATION_S};

/// Exclusion rules, in the order they are tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleaningRule {
    Cancelled,
    Under60s,
    Under120sSameLoc,
    Over24h,
    OutsideBoundary,
}

impl CleaningRule {
    pub const ORDER: [CleaningRule; 5] = [
        CleaningRule::Cancelled,
        CleaningRule::Under60s,
        CleaningRule::Under120sSameLoc,
        CleaningRule::Over24h,
        CleaningRule::OutsideBoundary,
    ];
}

/// Removal counts; each trip is charged to the first rule it violates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedByRule {
    pub cancelled: usize,
    pub under_60s: usize,
    pub under_120s_same_loc: usize,
    pub over_24h: usize,
    pub outside_boundary: usize,
}

impl RemovedByRule {
    pub fn get(&self, rule: CleaningRule) -> usize {
        match rule {
            CleaningRule::Cancelled => self.cancelled,
            CleaningRule::Under60s => self.under_60s,
            CleaningRule::Under120sSameLoc => self.under_120s_same_loc,
            CleaningRule::Over24h => self.over_24h,
            CleaningRule::OutsideBoundary => self.outside_boundary,
        }
    }

    fn bump(&mut self, rule: CleaningRule) {
        match rule {
            CleaningRule::Cancelled => self.cancelled += 1,
            CleaningRule::Under60s => self.under_60s += 1,
            CleaningRule::Under120sSameLoc => self.under_120s_same_loc += 1,
            CleaningRule::Over24h => self.over_24h += 1,
            CleaningRule::OutsideBoundary => self.outside_boundary += 1,
        }
    }

    pub fn total(&self) -> usize {
        CleaningRule::ORDER.iter().map(|&r| self.get(r)).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub input_count: usize,
    pub kept_count: usize,
    pub removed_by_rule: RemovedByRule,
}

impl CleaningReport {
    /// Counts of two reports added together.
    pub fn merged(&self, other: &Self) -> Self {
        let (a, b) = (&self.removed_by_rule, &other.removed_by_rule);
        Self {
            input_count: self.input_count + other.input_count,
            kept_count: self.kept_count + other.kept_count,
            removed_by_rule: RemovedByRule {
                cancelled: a.cancelled + b.cancelled,
                under_60s: a.under_60s + b.under_60s,
                under_120s_same_loc: a.under_120s_same_loc + b.under_120s_same_loc,
                over_24h: a.over_24h + b.over_24h,
                outside_boundary: a.outside_boundary + b.outside_boundary,
            },
        }
    }
}

/// Boundary and tolerance used by [`clean`].
#[derive(Debug, Clone)]
pub struct CleaningRules {
    pub boundary: Polygon,
    /// Two GPS fixes closer than this count as the same location.
    pub same_location_radius_m: f64,
}

impl CleaningRules {
    pub const DEFAULT_RADIUS_M: f64 = 10.0;

    pub fn new(boundary: Polygon) -> Self {
        Self {
            boundary,
            same_location_radius_m: Self::DEFAULT_RADIUS_M,
        }
    }
}

/// Resolves docked station ids to coordinates for the boundary rule.
pub trait StationLocator {
    fn locate(&self, station_id: &str) -> Option<LatLon>;
}

impl StationLocator for VoronoiPartition {
    fn locate(&self, station_id: &str) -> Option<LatLon> {
        self.station(station_id).map(|s| s.location)
    }
}

impl StationLocator for HashMap<String, LatLon> {
    fn locate(&self, station_id: &str) -> Option<LatLon> {
        self.get(station_id).copied()
    }
}

/// One end of a trip, borrowed from the record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint<'a> {
    Station(&'a str),
    Point(LatLon),
}

impl<'a> From<&'a Location> for Endpoint<'a> {
    fn from(loc: &'a Location) -> Self {
        match loc {
            Location::Station(id) => Endpoint::Station(id),
            Location::Point(p) => Endpoint::Point(*p),
        }
    }
}

/// Anything the exclusion rules can be applied to.
pub trait Cleanable {
    fn cancelled(&self) -> bool;
    fn duration_s(&self) -> i64;
    fn endpoints(&self) -> (Endpoint<'_>, Endpoint<'_>);
    /// Converts a record that passed every rule.
    fn to_clean(&self) -> CleanTrip;
}

impl Cleanable for RawDockedTrip {
    fn cancelled(&self) -> bool {
        false
    }

    fn duration_s(&self) -> i64 {
        self.duration_s
    }

    fn endpoints(&self) -> (Endpoint<'_>, Endpoint<'_>) {
        (
            Endpoint::Station(&self.start_station_id),
            Endpoint::Station(&self.end_station_id),
        )
    }

    fn to_clean(&self) -> CleanTrip {
        CleanTrip {
            start_instant: self.start_time,
            duration_s: self.duration_s as u32,
            start_loc: Location::Station(self.start_station_id.clone()),
            end_loc: Location::Station(self.end_station_id.clone()),
            label: Some(self.user_type),
            vehicle_class: VehicleClass::DockedBike,
        }
    }
}

impl Cleanable for RawDocklessTrip {
    fn cancelled(&self) -> bool {
        self.cancelled
    }

    fn duration_s(&self) -> i64 {
        self.duration_s
    }

    fn endpoints(&self) -> (Endpoint<'_>, Endpoint<'_>) {
        (
            Endpoint::Point(self.start_point),
            Endpoint::Point(self.end_point),
        )
    }

    fn to_clean(&self) -> CleanTrip {
        CleanTrip {
            start_instant: self.start_time,
            duration_s: self.duration_s as u32,
            start_loc: Location::Point(self.start_point),
            end_loc: Location::Point(self.end_point),
            label: None,
            vehicle_class: self.vehicle_class.into(),
        }
    }
}

impl Cleanable for RawTrip {
    fn cancelled(&self) -> bool {
        match self {
            RawTrip::Docked(t) => t.cancelled(),
            RawTrip::Dockless(t) => t.cancelled(),
        }
    }

    fn duration_s(&self) -> i64 {
        match self {
            RawTrip::Docked(t) => t.duration_s,
            RawTrip::Dockless(t) => t.duration_s,
        }
    }

    fn endpoints(&self) -> (Endpoint<'_>, Endpoint<'_>) {
        match self {
            RawTrip::Docked(t) => t.endpoints(),
            RawTrip::Dockless(t) => t.endpoints(),
        }
    }

    fn to_clean(&self) -> CleanTrip {
        match self {
            RawTrip::Docked(t) => t.to_clean(),
            RawTrip::Dockless(t) => t.to_clean(),
        }
    }
}

impl Cleanable for CleanTrip {
    fn cancelled(&self) -> bool {
        false
    }

    fn duration_s(&self) -> i64 {
        i64::from(self.duration_s)
    }

    fn endpoints(&self) -> (Endpoint<'_>, Endpoint<'_>) {
        ((&self.start_loc).into(), (&self.end_loc).into())
    }

    fn to_clean(&self) -> CleanTrip {
        self.clone()
    }
}

fn resolve(ep: Endpoint<'_>, stations: &dyn StationLocator) -> Option<LatLon> {
    match ep {
        Endpoint::Station(id) => stations.locate(id),
        Endpoint::Point(p) => Some(p),
    }
}

fn same_location(
    a: Endpoint<'_>,
    b: Endpoint<'_>,
    radius_m: f64,
    stations: &dyn StationLocator,
) -> bool {
    match (a, b) {
        (Endpoint::Station(x), Endpoint::Station(y)) => x == y,
        (Endpoint::Point(p), Endpoint::Point(q)) => haversine_m(p, q) < radius_m,
        _ => match (resolve(a, stations), resolve(b, stations)) {
            (Some(p), Some(q)) => haversine_m(p, q) < radius_m,
            _ => false,
        },
    }
}

/// First rule the trip violates, if any.
pub(crate) fn first_violation<T: Cleanable + ?Sized>(
    trip: &T,
    rules: &CleaningRules,
    stations: &dyn StationLocator,
) -> Option<CleaningRule> {
    let d = trip.duration_s();
    let (start, end) = trip.endpoints();
    if trip.cancelled() {
        return Some(CleaningRule::Cancelled);
    }
    if d < i64::from(MIN_DURATION_S) {
        return Some(CleaningRule::Under60s);
    }
    if d < 120 && same_location(start, end, rules.same_location_radius_m, stations) {
        return Some(CleaningRule::Under120sSameLoc);
    }
    if d > i64::from(MAX_DURATION_S) {
        return Some(CleaningRule::Over24h);
    }
    let inside = |ep| resolve(ep, stations).is_some_and(|p| rules.boundary.contains(p));
    if !inside(start) || !inside(end) {
        return Some(CleaningRule::OutsideBoundary);
    }
    None
}

/// Applies the exclusion rules in order and reports what each one removed.
///
/// Docked endpoints are located through `stations`; a station that cannot be
/// located counts as outside the boundary. Output order follows input order.
pub fn clean<T: Cleanable + Sync>(
    trips: &[T],
    rules: &CleaningRules,
    stations: &(dyn StationLocator + Sync),
) -> Result<(Vec<CleanTrip>, CleaningReport), IngestError> {
    let r = rules.same_location_radius_m;
    if !(r.is_finite() && r >= 0.0) {
        return Err(IngestError::Config(format!(
            "same-location radius must be a finite non-negative distance, got {r}"
        )));
    }
    let verdicts: Vec<Option<CleaningRule>> = trips
        .par_iter()
        .map(|t| first_violation(t, rules, stations))
        .collect();

    let mut report = CleaningReport {
        input_count: trips.len(),
        ..CleaningReport::default()
    };
    let mut kept = Vec::with_capacity(trips.len());
    for (trip, verdict) in trips.iter().zip(verdicts) {
        match verdict {
            Some(rule) => report.removed_by_rule.bump(rule),
            None => kept.push(trip.to_clean()),
        }
    }
    report.kept_count = kept.len();
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_timestamp;
    use crate::trip::{DocklessKind, UserType};

    fn rules() -> CleaningRules {
        CleaningRules::new(Polygon::rectangle(38.8, -77.12, 39.0, -76.9).unwrap())
    }

    fn stations() -> HashMap<String, LatLon> {
        [
            ("A", LatLon::new(38.90, -77.03)),
            ("B", LatLon::new(38.91, -77.01)),
            ("OUT", LatLon::new(39.20, -77.03)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn docked(duration_s: i64, from: &str, to: &str) -> RawDockedTrip {
        let start = parse_timestamp("2018-03-06 08:00:00", None).unwrap();
        RawDockedTrip {
            start_time: start,
            end_time: start + chrono::Duration::seconds(duration_s),
            duration_s,
            start_station_id: from.into(),
            end_station_id: to.into(),
            user_type: UserType::Member,
            vehicle_id: String::new(),
        }
    }

    fn dockless(duration_s: i64, a: LatLon, b: LatLon, cancelled: bool) -> RawDocklessTrip {
        let start = parse_timestamp("2018-03-06 08:00:00", None).unwrap();
        RawDocklessTrip {
            start_time: start,
            end_time: start + chrono::Duration::seconds(duration_s),
            duration_s,
            start_point: a,
            end_point: b,
            operator: "op".into(),
            vehicle_class: DocklessKind::Bike,
            cancelled,
        }
    }

    fn verdict(t: &RawTrip) -> Option<CleaningRule> {
        first_violation(t, &rules(), &stations())
    }

    #[test]
    fn short_trip_rule() {
        assert_eq!(
            verdict(&RawTrip::Docked(docked(45, "A", "B"))),
            Some(CleaningRule::Under60s)
        );
    }

    #[test]
    fn same_station_under_two_minutes() {
        assert_eq!(
            verdict(&RawTrip::Docked(docked(90, "A", "A"))),
            Some(CleaningRule::Under120sSameLoc)
        );
        assert_eq!(verdict(&RawTrip::Docked(docked(90, "A", "B"))), None);
        assert_eq!(verdict(&RawTrip::Docked(docked(120, "A", "A"))), None);
    }

    #[test]
    fn dockless_same_location_uses_radius() {
        let a = LatLon::new(38.9, -77.03);
        let near = LatLon::new(38.90005, -77.03); // ~5.6 m north
        let far = LatLon::new(38.9002, -77.03); // ~22 m north
        let t = |b| RawTrip::Dockless(dockless(100, a, b, false));
        assert_eq!(verdict(&t(near)), Some(CleaningRule::Under120sSameLoc));
        assert_eq!(verdict(&t(far)), None);
    }

    #[test]
    fn first_match_wins() {
        // Over 24h and outside: charged to the duration rule only.
        assert_eq!(
            verdict(&RawTrip::Docked(docked(90_000, "A", "OUT"))),
            Some(CleaningRule::Over24h)
        );
        // Cancelled and too short: charged to cancelled.
        let a = LatLon::new(38.9, -77.03);
        assert_eq!(
            verdict(&RawTrip::Dockless(dockless(10, a, a, true))),
            Some(CleaningRule::Cancelled)
        );
    }

    #[test]
    fn unknown_station_is_outside() {
        assert_eq!(
            verdict(&RawTrip::Docked(docked(600, "A", "nowhere"))),
            Some(CleaningRule::OutsideBoundary)
        );
    }

    #[test]
    fn seven_trip_fixture() {
        let a = LatLon::new(38.9, -77.03);
        let b = LatLon::new(38.92, -77.0);
        let trips = vec![
            RawTrip::Dockless(dockless(600, a, b, true)),
            RawTrip::Docked(docked(45, "A", "B")),
            RawTrip::Docked(docked(90, "A", "A")),
            RawTrip::Docked(docked(90_000, "A", "OUT")),
            RawTrip::Docked(docked(600, "A", "OUT")),
            RawTrip::Docked(docked(600, "A", "B")),
            RawTrip::Dockless(dockless(300, a, b, false)),
        ];
        let (kept, report) = clean(&trips, &rules(), &stations()).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(report.kept_count, 2);
        assert_eq!(report.input_count, 7);
        for rule in CleaningRule::ORDER {
            assert_eq!(report.removed_by_rule.get(rule), 1, "{rule:?}");
        }

        let (again, report2) = clean(&kept, &rules(), &stations()).unwrap();
        assert_eq!(again, kept);
        assert_eq!(report2.removed_by_rule.total(), 0);
    }

    #[test]
    fn negative_radius_is_config_error() {
        let mut r = rules();
        r.same_location_radius_m = -1.0;
        let trips: Vec<RawTrip> = Vec::new();
        assert!(matches!(
            clean(&trips, &r, &stations()),
            Err(IngestError::Config(_))
        ));
    }

    #[test]
    fn report_serialises_rule_names() {
        let report = CleaningReport::default();
        let v = serde_json::to_value(report).unwrap();
        let keys: Vec<&String> = v["removed_by_rule"].as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "cancelled",
                "outside_boundary",
                "over_24h",
                "under_120s_same_loc",
                "under_60s"
            ]
        );
    }
}
