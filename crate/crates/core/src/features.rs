//! Trip feature encoding.
//!
//! Layout of every vector, in order:
//!
//! | block        | width | meaning                                   |
//! |--------------|-------|-------------------------------------------|
//! | day of week  | 7     | one-hot, Monday first                     |
//! | time bin     | 48    | one-hot 30-minute start bin, `[h:00,h:30)`|
//! | start cell   | C     | one-hot nearest-station cell of the start |
//! | end cell     | C     | one-hot nearest-station cell of the end   |
//! | duration     | 1     | min-max scaled to `[0, 1]`, clamped       |
//!
//! `C` is the partition's cell count and cells follow partition order.

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::VoronoiPartition;
use crate::trip::{CleanTrip, Location, DAY_NAMES};

pub const DAYS: usize = 7;
pub const TIME_BINS: usize = 48;
pub const DAY_OFFSET: usize = 0;
pub const BIN_OFFSET: usize = DAYS;
pub const CELL_OFFSET: usize = DAYS + TIME_BINS;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("duration scaling is degenerate: all training durations equal {0} s")]
    DegenerateScaling(f64),
    #[error("cannot fit a schema on an empty training set")]
    EmptyTraining,
    #[error("station {0:?} is not a cell of the partition")]
    UnknownStation(String),
    #[error("schema was fitted for {schema} cells but the partition has {partition}")]
    PartitionMismatch { schema: usize, partition: usize },
    #[error("vector has {got} entries, schema expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// 30-minute start bin: `2 * hour + (minute >= 30)`.
pub fn time_bin(start: NaiveDateTime) -> usize {
    2 * start.hour() as usize + usize::from(start.minute() >= 30)
}

/// Label of a bin such as `"04:30"`.
pub fn bin_label(bin: usize) -> String {
    format!("{:02}:{:02}", bin / 2, if bin % 2 == 1 { 30 } else { 0 })
}

/// Ordered feature names and the duration scaling learned from training trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    /// Station ids in cell order.
    pub cell_ids: Vec<String>,
    pub duration_min_s: f64,
    pub duration_max_s: f64,
}

impl FeatureSchema {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn start_cell_offset(&self) -> usize {
        CELL_OFFSET
    }

    pub fn end_cell_offset(&self) -> usize {
        CELL_OFFSET + self.cells()
    }

    pub fn duration_index(&self) -> usize {
        CELL_OFFSET + 2 * self.cells()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Min-max scaled duration, clamped to `[0, 1]`.
    pub fn scale_duration(&self, duration_s: f64) -> f64 {
        let span = self.duration_max_s - self.duration_min_s;
        ((duration_s - self.duration_min_s) / span).clamp(0.0, 1.0)
    }

    /// Checks that `partition` has exactly the cells this schema was fitted on.
    pub fn check_partition(&self, partition: &VoronoiPartition) -> Result<(), FeatureError> {
        let same = partition.len() == self.cells()
            && partition
                .station_ids()
                .zip(&self.cell_ids)
                .all(|(a, b)| a == b);
        if same {
            Ok(())
        } else {
            Err(FeatureError::PartitionMismatch {
                schema: self.cells(),
                partition: partition.len(),
            })
        }
    }
}

fn layout_names(cell_ids: &[String]) -> Vec<String> {
    let mut names = Vec::with_capacity(CELL_OFFSET + 2 * cell_ids.len() + 1);
    names.extend(DAY_NAMES.iter().map(|d| format!("day_{d}")));
    names.extend((0..TIME_BINS).map(|b| format!("time_{}", bin_label(b))));
    names.extend(cell_ids.iter().map(|id| format!("start_{id}")));
    names.extend(cell_ids.iter().map(|id| format!("end_{id}")));
    names.push("duration".into());
    names
}

/// Builds the schema; duration bounds come from `training` only.
pub fn fit_schema(
    training: &[CleanTrip],
    partition: &VoronoiPartition,
) -> Result<FeatureSchema, FeatureError> {
    let mut durations = training.iter().map(|t| f64::from(t.duration_s));
    let first = durations.next().ok_or(FeatureError::EmptyTraining)?;
    let (lo, hi) = durations.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if lo == hi {
        return Err(FeatureError::DegenerateScaling(lo));
    }
    let cell_ids: Vec<String> = partition.station_ids().map(str::to_string).collect();
    Ok(FeatureSchema {
        names: layout_names(&cell_ids),
        cell_ids,
        duration_min_s: lo,
        duration_max_s: hi,
    })
}

/// Dense encoded trip, aligned with a [`FeatureSchema`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn cell_of(loc: &Location, partition: &VoronoiPartition) -> Result<usize, FeatureError> {
    match loc {
        Location::Station(id) => partition
            .cell_index_of(id)
            .ok_or_else(|| FeatureError::UnknownStation(id.clone())),
        Location::Point(p) => Ok(partition.assign_cell_index(*p)),
    }
}

/// Encodes one cleaned trip. Docked endpoints map to their own station's cell.
pub fn encode(
    trip: &CleanTrip,
    partition: &VoronoiPartition,
    schema: &FeatureSchema,
) -> Result<FeatureVector, FeatureError> {
    if partition.len() != schema.cells() {
        return Err(FeatureError::PartitionMismatch {
            schema: schema.cells(),
            partition: partition.len(),
        });
    }
    let mut v = vec![0.0; schema.len()];
    v[DAY_OFFSET + trip.day_of_week()] = 1.0;
    v[BIN_OFFSET + time_bin(trip.start_instant)] = 1.0;
    v[schema.start_cell_offset() + cell_of(&trip.start_loc, partition)?] = 1.0;
    v[schema.end_cell_offset() + cell_of(&trip.end_loc, partition)?] = 1.0;
    v[schema.duration_index()] = schema.scale_duration(f64::from(trip.duration_s));
    Ok(FeatureVector(v))
}

/// Encodes a batch after checking the partition once.
pub fn encode_all(
    trips: &[CleanTrip],
    partition: &VoronoiPartition,
    schema: &FeatureSchema,
) -> Result<Vec<FeatureVector>, FeatureError> {
    use rayon::prelude::*;
    schema.check_partition(partition)?;
    trips
        .par_iter()
        .map(|t| encode(t, partition, schema))
        .collect()
}

/// The categorical parts of an encoded trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    pub day: usize,
    pub bin: usize,
    pub start_cell: usize,
    pub end_cell: usize,
    pub scaled_duration: f64,
}

/// Recovers the one-hot groups; `None` unless each group has exactly one 1.
pub fn decode(v: &FeatureVector, schema: &FeatureSchema) -> Option<Decoded> {
    if v.len() != schema.len() {
        return None;
    }
    let one = |from: usize, width: usize| {
        let block = &v.0[from..from + width];
        let mut hot = block.iter().enumerate().filter(|(_, &x)| x == 1.0);
        let first = hot.next()?.0;
        let rest_zero = block.iter().filter(|&&x| x != 0.0).count() == 1;
        (hot.next().is_none() && rest_zero).then_some(first)
    };
    Some(Decoded {
        day: one(DAY_OFFSET, DAYS)?,
        bin: one(BIN_OFFSET, TIME_BINS)?,
        start_cell: one(schema.start_cell_offset(), schema.cells())?,
        end_cell: one(schema.end_cell_offset(), schema.cells())?,
        scaled_duration: v.0[schema.duration_index()],
    })
}
