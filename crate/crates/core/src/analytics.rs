//! Descriptive series: day-of-week and hourly shares, duration bands by
//! start hour, and zone shares of trip starts inside a time window.

use std::io::Write;

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};

use crate::geo::{LatLon, ZoneSet};
use crate::ingest::StationLocator;
use crate::stats;
use crate::trip::{CleanTrip, Location, DAY_NAMES};

/// Keyed values for one cohort. Share series sum to 1 unless `empty`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSeries {
    pub cohort: String,
    pub statistic: String,
    pub count: u64,
    pub empty: bool,
    pub values: Vec<(String, f64)>,
}

impl CohortSeries {
    fn from_counts(
        cohort: &str,
        statistic: &str,
        keys: impl Iterator<Item = String>,
        counts: &[u64],
    ) -> Self {
        let count = counts.iter().sum();
        Self {
            cohort: cohort.to_string(),
            statistic: statistic.to_string(),
            count,
            empty: count == 0,
            values: keys.zip(stats::shares(counts)).collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn shares(&self) -> Vec<f64> {
        self.values.iter().map(|(_, v)| *v).collect()
    }
}

pub fn day_of_week_distribution(cohort: &str, trips: &[CleanTrip]) -> CohortSeries {
    let mut counts = [0u64; 7];
    for t in trips {
        counts[t.day_of_week()] += 1;
    }
    CohortSeries::from_counts(
        cohort,
        "day_of_week_share",
        DAY_NAMES.iter().map(|d| d.to_string()),
        &counts,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyDistribution {
    pub weekday: CohortSeries,
    /// Saturday and Sunday.
    pub weekend: CohortSeries,
}

fn hour_keys() -> impl Iterator<Item = String> {
    (0..24).map(|h| format!("{h:02}"))
}

pub fn hourly_distribution(cohort: &str, trips: &[CleanTrip]) -> HourlyDistribution {
    let mut counts = [[0u64; 24]; 2];
    for t in trips {
        counts[usize::from(t.is_weekend())][t.start_hour()] += 1;
    }
    HourlyDistribution {
        weekday: CohortSeries::from_counts(cohort, "weekday_hour_share", hour_keys(), &counts[0]),
        weekend: CohortSeries::from_counts(cohort, "weekend_hour_share", hour_keys(), &counts[1]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourBand {
    pub hour: u32,
    pub count: u64,
    pub p25_s: f64,
    pub p50_s: f64,
    pub p75_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileBands {
    pub cohort: String,
    /// Ascending hour; hours without trips are omitted.
    pub bands: Vec<HourBand>,
}

/// Quartiles of duration (seconds) per start hour, interpolated at
/// rank `(n - 1) * q`.
pub fn duration_percentile_bands(cohort: &str, trips: &[CleanTrip]) -> PercentileBands {
    let mut by_hour: Vec<Vec<f64>> = vec![Vec::new(); 24];
    for t in trips {
        by_hour[t.start_hour()].push(f64::from(t.duration_s));
    }
    let bands = by_hour
        .into_iter()
        .enumerate()
        .filter(|(_, d)| !d.is_empty())
        .map(|(hour, durations)| {
            let q = stats::quantiles(&durations, &[0.25, 0.5, 0.75]).expect("non-empty");
            HourBand {
                hour: hour as u32,
                count: durations.len() as u64,
                p25_s: q[0],
                p50_s: q[1],
                p75_s: q[2],
            }
        })
        .collect();
    PercentileBands {
        cohort: cohort.to_string(),
        bands,
    }
}

/// Half-open `[start, end)` time-of-day window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: NaiveTime,
    pub end: NaiveTime,
}

impl TimeWindow {
    pub fn hours(start: u32, end: u32) -> Option<Self> {
        Some(Self {
            start: NaiveTime::from_hms_opt(start, 0, 0)?,
            end: NaiveTime::from_hms_opt(end, 0, 0)?,
        })
    }

    pub fn morning_peak() -> Self {
        Self::hours(7, 9).expect("valid hours")
    }

    /// A window whose end precedes its start wraps past midnight.
    pub fn contains(&self, t: NaiveTime) -> bool {
        if self.start <= self.end {
            self.start <= t && t < self.end
        } else {
            t >= self.start || t < self.end
        }
    }
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self::morning_peak()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneShares {
    pub cohort: String,
    pub window: TimeWindow,
    pub trips_in_window: u64,
    pub empty_window: bool,
    /// Percent of window trips per zone, in zone-file order.
    pub zones: Vec<(String, f64)>,
    /// Percent of window trips starting outside every zone.
    pub unassigned_pct: f64,
}

fn start_point(trip: &CleanTrip, stations: &dyn StationLocator) -> Option<LatLon> {
    match &trip.start_loc {
        Location::Point(p) => Some(*p),
        Location::Station(id) => stations.locate(id),
    }
}

/// Shares of trips starting in each zone during `window`. Docked trips start
/// at their station's coordinates; unknown stations count as unassigned.
pub fn zone_start_shares(
    cohort: &str,
    trips: &[CleanTrip],
    zones: &ZoneSet,
    window: TimeWindow,
    stations: &dyn StationLocator,
) -> ZoneShares {
    let mut counts = vec![0u64; zones.len() + 1];
    for t in trips
        .iter()
        .filter(|t| window.contains(t.start_instant.time()))
    {
        let slot = start_point(t, stations)
            .and_then(|p| zones.assign_zone_index(p))
            .unwrap_or(zones.len());
        counts[slot] += 1;
    }
    let total: u64 = counts.iter().sum();
    let pct: Vec<f64> = stats::shares(&counts)
        .into_iter()
        .map(|s| 100.0 * s)
        .collect();
    ZoneShares {
        cohort: cohort.to_string(),
        window,
        trips_in_window: total,
        empty_window: total == 0,
        zones: zones
            .zones()
            .iter()
            .map(|z| z.id.clone())
            .zip(pct.iter().copied())
            .collect(),
        unassigned_pct: pct[zones.len()],
    }
}

/// One line of the plot-ready export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub cohort: String,
    pub series: String,
    pub key: String,
    pub value: f64,
}

/// Every series for a set of cohorts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub day_of_week: Vec<CohortSeries>,
    pub hourly: Vec<HourlyDistribution>,
    pub duration_bands: Vec<PercentileBands>,
    pub zone_starts: Vec<ZoneShares>,
}

impl AnalyticsReport {
    /// Computes all series per cohort; zone shares only when `zones` is given.
    pub fn build(
        cohorts: &[(String, Vec<CleanTrip>)],
        zones: Option<&ZoneSet>,
        window: TimeWindow,
        stations: &dyn StationLocator,
    ) -> Self {
        let mut report = Self::default();
        for (name, trips) in cohorts {
            report
                .day_of_week
                .push(day_of_week_distribution(name, trips));
            report.hourly.push(hourly_distribution(name, trips));
            report
                .duration_bands
                .push(duration_percentile_bands(name, trips));
            if let Some(z) = zones {
                report
                    .zone_starts
                    .push(zone_start_shares(name, trips, z, window, stations));
            }
        }
        report
    }

    pub fn tidy_rows(&self) -> Vec<TidyRow> {
        let row = |cohort: &str, series: &str, key: &str, value: f64| TidyRow {
            cohort: cohort.to_string(),
            series: series.to_string(),
            key: key.to_string(),
            value,
        };
        let mut rows = Vec::new();
        let series_rows = |s: &CohortSeries, rows: &mut Vec<TidyRow>| {
            rows.extend(
                s.values
                    .iter()
                    .map(|(k, v)| row(&s.cohort, &s.statistic, k, *v)),
            );
        };
        for s in &self.day_of_week {
            series_rows(s, &mut rows);
        }
        for h in &self.hourly {
            series_rows(&h.weekday, &mut rows);
            series_rows(&h.weekend, &mut rows);
        }
        for b in &self.duration_bands {
            for band in &b.bands {
                let key = format!("{:02}", band.hour);
                rows.push(row(&b.cohort, "duration_p25_s", &key, band.p25_s));
                rows.push(row(&b.cohort, "duration_p50_s", &key, band.p50_s));
                rows.push(row(&b.cohort, "duration_p75_s", &key, band.p75_s));
            }
        }
        for z in &self.zone_starts {
            rows.extend(
                z.zones
                    .iter()
                    .map(|(id, v)| row(&z.cohort, "zone_start_pct", id, *v)),
            );
            rows.push(row(
                &z.cohort,
                "zone_start_pct",
                "unassigned",
                z.unassigned_pct,
            ));
        }
        rows
    }
}

/// Writes `cohort,series,key,value` rows with a header.
pub fn write_tidy_csv<W: Write>(rows: &[TidyRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Polygon, Zone};
    use crate::trip::{UserType, VehicleClass};
    use chrono::NaiveDateTime;
    use std::collections::HashMap;

    fn trip(start: &str, duration_s: u32, lat: f64) -> CleanTrip {
        let p = Location::Point(LatLon { lat, lon: 0.5 });
        CleanTrip {
            start_instant: NaiveDateTime::parse_from_str(start, "%Y-%m-%d %H:%M:%S").unwrap(),
            duration_s,
            start_loc: p.clone(),
            end_loc: p,
            label: Some(UserType::Member),
            vehicle_class: VehicleClass::DocklessBike,
        }
    }

    fn no_stations() -> HashMap<String, LatLon> {
        HashMap::new()
    }

    #[test]
    fn one_trip_per_day() {
        // 2018-03-05 is a Monday.
        let trips: Vec<CleanTrip> = (5..12)
            .map(|d| trip(&format!("2018-03-{d:02} 10:00:00"), 600, 0.5))
            .collect();
        let s = day_of_week_distribution("x", &trips);
        assert!(s.shares().iter().all(|&v| (v - 1.0 / 7.0).abs() < 1e-15));
        let sat = day_of_week_distribution("x", &[trip("2018-03-10 10:00:00", 600, 0.5)]);
        assert_eq!(sat.get("Sat"), Some(1.0));
        assert_eq!(sat.shares().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn tuesday_morning_hours() {
        let trips = vec![
            trip("2018-03-06 08:10:00", 600, 0.5),
            trip("2018-03-13 08:50:00", 60, 0.5),
        ];
        let h = hourly_distribution("x", &trips);
        assert_eq!(h.weekday.get("08"), Some(1.0));
        assert!(h.weekend.empty);
        assert!(h.weekend.shares().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quartile_bands() {
        let trips: Vec<CleanTrip> = [4, 8, 12, 16]
            .iter()
            .map(|m| trip("2018-03-06 13:05:00", m * 60, 0.5))
            .collect();
        let b = duration_percentile_bands("x", &trips);
        assert_eq!(b.bands.len(), 1);
        let band = b.bands[0];
        assert_eq!(
            (band.hour, band.p25_s, band.p50_s, band.p75_s),
            (13, 420.0, 600.0, 780.0)
        );
        let flat: Vec<CleanTrip> = (0..30)
            .map(|i| trip(&format!("2018-03-06 {:02}:00:00", i % 24), 600, 0.5))
            .collect();
        let b = duration_percentile_bands("x", &flat);
        assert_eq!(b.bands.len(), 24);
        assert!(b
            .bands
            .iter()
            .all(|h| h.p25_s == 600.0 && h.p50_s == 600.0 && h.p75_s == 600.0));
    }

    #[test]
    fn zone_window_shares() {
        let zones = ZoneSet::new(vec![
            Zone {
                id: "A".into(),
                polygon: Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap(),
            },
            Zone {
                id: "B".into(),
                polygon: Polygon::rectangle(2.0, 0.0, 3.0, 1.0).unwrap(),
            },
        ])
        .unwrap();
        let mut trips: Vec<CleanTrip> = (0..4)
            .map(|_| trip("2018-03-06 07:30:00", 600, 0.5))
            .collect();
        trips.extend((0..3).map(|_| trip("2018-03-06 08:59:59", 600, 2.5)));
        trips.extend((0..3).map(|_| trip("2018-03-06 07:00:00", 600, 5.0)));
        trips.push(trip("2018-03-06 09:00:00", 600, 0.5));
        let z = zone_start_shares(
            "x",
            &trips,
            &zones,
            TimeWindow::morning_peak(),
            &no_stations(),
        );
        assert_eq!(z.trips_in_window, 10);
        assert_eq!(z.zones[0], ("A".to_string(), 40.0));
        assert_eq!(z.unassigned_pct, 30.0);
        let evening = TimeWindow::hours(18, 20).unwrap();
        assert!(zone_start_shares("x", &trips, &zones, evening, &no_stations()).empty_window);
    }

    #[test]
    fn tidy_export() {
        let trips = vec![trip("2018-03-06 08:10:00", 600, 0.5)];
        let report = AnalyticsReport::build(
            &[("c".to_string(), trips)],
            None,
            TimeWindow::default(),
            &no_stations(),
        );
        let rows = report.tidy_rows();
        assert_eq!(rows.len(), 7 + 48 + 3);
        let mut buf = Vec::new();
        write_tidy_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cohort,series,key,value\nc,day_of_week_share,Mon,0"));
    }
}
