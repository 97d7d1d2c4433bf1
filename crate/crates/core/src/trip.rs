//! Trip-level domain types shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::geo::LatLon;

/// Shortest trip that survives cleaning, in seconds.
pub const MIN_DURATION_S: u32 = 60;
/// Longest trip that survives cleaning, in seconds.
pub const MAX_DURATION_S: u32 = 86_400;

/// Rider class. Member is the positive class (label 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserType {
    Casual,
    Member,
}

impl UserType {
    pub const ALL: [UserType; 2] = [UserType::Casual, UserType::Member];

    /// 0 for casual, 1 for member.
    pub fn index(self) -> usize {
        match self {
            UserType::Casual => 0,
            UserType::Member => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            UserType::Casual
        } else {
            UserType::Member
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UserType::Casual => "casual",
            UserType::Member => "member",
        }
    }
}

impl fmt::Display for UserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UserType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "member" | "registered" | "subscriber" | "1" => Ok(UserType::Member),
            "casual" | "customer" | "0" => Ok(UserType::Casual),
            other => Err(format!("unknown user type {other:?}")),
        }
    }
}

/// Vehicle class of a raw dockless record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocklessKind {
    Bike,
    Scooter,
}

impl FromStr for DocklessKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bike" | "bicycle" | "ebike" | "e-bike" => Ok(DocklessKind::Bike),
            "scooter" | "escooter" | "e-scooter" => Ok(DocklessKind::Scooter),
            other => Err(format!("unknown vehicle class {other:?}")),
        }
    }
}

impl fmt::Display for DocklessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocklessKind::Bike => "bike",
            DocklessKind::Scooter => "scooter",
        })
    }
}

/// Vehicle class of a cleaned trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    DockedBike,
    DocklessBike,
    Scooter,
}

impl From<DocklessKind> for VehicleClass {
    fn from(kind: DocklessKind) -> Self {
        match kind {
            DocklessKind::Bike => VehicleClass::DocklessBike,
            DocklessKind::Scooter => VehicleClass::Scooter,
        }
    }
}

/// Where a trip started or ended: a dock or a GPS fix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Station(String),
    Point(LatLon),
}

/// A trip that passed every cleaning rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanTrip {
    /// Local civil time; no time-zone or DST handling.
    pub start_instant: NaiveDateTime,
    pub duration_s: u32,
    pub start_loc: Location,
    pub end_loc: Location,
    pub label: Option<UserType>,
    pub vehicle_class: VehicleClass,
}

impl CleanTrip {
    /// Monday = 0 .. Sunday = 6.
    pub fn day_of_week(&self) -> usize {
        self.start_instant.weekday().num_days_from_monday() as usize
    }

    pub fn start_hour(&self) -> usize {
        self.start_instant.hour() as usize
    }

    pub fn is_weekend(&self) -> bool {
        self.day_of_week() >= 5
    }

    pub fn end_instant(&self) -> NaiveDateTime {
        self.start_instant + Duration::seconds(i64::from(self.duration_s))
    }
}

/// Short names Mon..Sun, indexed by [`CleanTrip::day_of_week`].
pub const DAY_NAMES: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
