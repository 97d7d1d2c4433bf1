//! Calibration of the default cohort profiles.
//!
//! Weights are relative and normalised when a profile is built. The shapes
//! encode the qualitative patterns observed for Washington, D.C. trips in
//! spring 2018:
//!
//! * members ride on weekdays, peaking on Thursday, with sharp hour peaks at
//!   8, 12 and 17 that together carry close to 30% of weekday trips, and keep
//!   most trips under 15 minutes;
//! * casual riders favour weekends, have no morning peak, build up to a 17:00
//!   maximum and ride a median of 20 to 27 minutes with only a quarter of
//!   trips under 15 minutes;
//! * dockless bikes peak on Saturday and over 8-10 and 17-19; scooters peak
//!   on Thursday and run a long 12-17 plateau topping out at 15:00; both have
//!   median trips near 10 minutes.
//!
//! Log-normal shape checks: with median m and spread s, the 75th percentile
//! is `m * exp(0.674 s)`. Members: 10 min and s = 0.55 give 14.5 min.
//! Casual: 23 min and s = 0.65 put the 25th percentile at 14.8 min.

/// Monday..Sunday.
pub const COMMUTER_DAYS: [f64; 7] = [0.16, 0.165, 0.17, 0.175, 0.16, 0.09, 0.08];
pub const RECREATIONAL_DAYS: [f64; 7] = [0.11, 0.10, 0.10, 0.11, 0.13, 0.24, 0.21];
pub const DOCKLESS_BIKE_DAYS: [f64; 7] = [0.12, 0.13, 0.14, 0.15, 0.15, 0.16, 0.15];
pub const SCOOTER_DAYS: [f64; 7] = [0.14, 0.145, 0.15, 0.16, 0.15, 0.13, 0.125];

/// Hours 0..23.
pub const COMMUTER_WEEKDAY_HOURS: [f64; 24] = [
    0.3, 0.15, 0.1, 0.05, 0.1, 0.6, 2.0, 5.5, 12.0, 6.0, 3.0, 3.5, //
    6.0, 4.0, 3.5, 4.5, 7.5, 12.0, 8.0, 4.5, 3.0, 2.3, 1.6, 0.9,
];
pub const COMMUTER_WEEKEND_HOURS: [f64; 24] = [
    0.8, 0.5, 0.3, 0.1, 0.1, 0.2, 0.5, 1.2, 2.5, 4.0, 6.0, 7.5, //
    9.0, 8.5, 8.0, 7.5, 7.0, 6.5, 5.5, 4.0, 3.0, 2.2, 1.6, 1.2,
];
pub const RECREATIONAL_WEEKDAY_HOURS: [f64; 24] = [
    0.5, 0.3, 0.2, 0.1, 0.1, 0.2, 0.5, 1.0, 1.5, 2.5, 4.0, 5.0, //
    6.0, 6.5, 7.0, 7.5, 8.5, 9.5, 6.0, 4.0, 3.0, 2.0, 1.5, 1.0,
];
pub const RECREATIONAL_WEEKEND_HOURS: [f64; 24] = [
    0.6, 0.4, 0.3, 0.1, 0.1, 0.1, 0.3, 0.8, 1.5, 3.0, 5.0, 7.0, //
    8.0, 8.5, 9.0, 9.5, 8.5, 7.5, 5.5, 3.5, 2.5, 1.8, 1.2, 0.8,
];
pub const DOCKLESS_BIKE_WEEKDAY_HOURS: [f64; 24] = [
    0.5, 0.3, 0.2, 0.1, 0.1, 0.4, 1.5, 4.0, 8.5, 8.0, 5.0, 4.0, //
    6.0, 5.0, 4.5, 5.0, 6.0, 8.5, 8.0, 5.0, 3.5, 2.5, 1.5, 1.0,
];
pub const DOCKLESS_BIKE_WEEKEND_HOURS: [f64; 24] = [
    0.8, 0.5, 0.3, 0.1, 0.1, 0.1, 0.3, 0.8, 1.6, 3.0, 5.0, 6.5, //
    7.5, 8.0, 8.5, 9.0, 8.0, 7.0, 5.0, 3.5, 2.5, 1.8, 1.2, 0.9,
];
pub const SCOOTER_WEEKDAY_HOURS: [f64; 24] = [
    0.2, 0.1, 0.05, 0.05, 0.05, 0.2, 1.0, 3.5, 7.5, 5.5, 4.5, 5.0, //
    7.0, 7.0, 7.5, 8.5, 7.5, 7.0, 5.5, 3.5, 2.0, 1.0, 0.5, 0.3,
];
pub const SCOOTER_WEEKEND_HOURS: [f64; 24] = [
    0.3, 0.2, 0.1, 0.05, 0.05, 0.1, 0.3, 0.8, 1.8, 3.5, 5.5, 7.5, //
    8.5, 9.0, 8.5, 8.0, 7.0, 6.0, 4.5, 3.0, 2.0, 1.2, 0.7, 0.4,
];

/// Duration medians (minutes) and log-normal spreads.
pub const COMMUTER_MEDIAN_MIN: f64 = 10.0;
pub const COMMUTER_SIGMA: f64 = 0.55;
pub const RECREATIONAL_MEDIAN_MIN: f64 = 23.0;
pub const RECREATIONAL_SIGMA: f64 = 0.65;
pub const DOCKLESS_BIKE_MEDIAN_MIN: f64 = 10.5;
pub const DOCKLESS_BIKE_SIGMA: f64 = 0.6;
pub const SCOOTER_MEDIAN_MIN: f64 = 10.0;
pub const SCOOTER_SIGMA: f64 = 0.6;

/// Cells ranked by distance from the station centroid: the nearest share is
/// downtown, the farthest share residential, the rest mixed-use.
pub const DOWNTOWN_SHARE: f64 = 0.15;
pub const RESIDENTIAL_SHARE: f64 = 0.5;
/// Number of recreational hotspot cells.
pub const HOTSPOT_CELLS: usize = 8;
/// Mass placed on a profile's focus cells; the rest spreads over all cells.
pub const FOCUS_WEIGHT: f64 = 0.8;

/// Dockless endpoints land uniformly within this distance of the station.
pub const JITTER_RADIUS_M: f64 = 200.0;
/// Generated start dates fall on this many consecutive weeks.
pub const SPAN_WEEKS: u32 = 13;
/// First generated day (a Monday).
pub const START_DATE: (i32, u32, u32) = (2018, 3, 5);

/// Synthetic station network.
pub const FIXTURE_STATIONS: usize = 269;
pub const FIXTURE_CENTER: (f64, f64) = (38.9, -77.03);
pub const FIXTURE_HALF_SPAN_DEG: (f64, f64) = (0.06, 0.08);
/// Boundary margin around the outermost stations.
pub const FIXTURE_BOUNDARY_MARGIN_M: f64 = 500.0;
/// Zone grid rows and columns.
pub const FIXTURE_ZONE_GRID: (usize, usize) = (4, 4);
