use std::io::Read;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::{IngestError, RowError};
use crate::geo::LatLon;
use crate::trip::{DocklessKind, UserType};

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
];

/// Parses a local civil timestamp, trying `format` first when given.
pub fn parse_timestamp(text: &str, format: Option<&str>) -> Result<NaiveDateTime, String> {
    let text = text.trim();
    if let Some(fmt) = format {
        return NaiveDateTime::parse_from_str(text, fmt)
            .map_err(|e| format!("timestamp {text:?} does not match {fmt:?}: {e}"));
    }
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(text, fmt).ok())
        .ok_or_else(|| format!("unparseable timestamp {text:?}"))
}

/// Header names for docked trip files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DockedColumns {
    pub start_time: String,
    /// At least one of `end_time` and `duration` must be configured.
    pub end_time: Option<String>,
    /// Duration in seconds; wins over `end_time - start_time` when present.
    pub duration: Option<String>,
    pub start_station: String,
    pub end_station: String,
    pub user_type: String,
    pub vehicle_id: Option<String>,
    pub timestamp_format: Option<String>,
}

impl Default for DockedColumns {
    fn default() -> Self {
        Self {
            start_time: "start_time".into(),
            end_time: Some("end_time".into()),
            duration: None,
            start_station: "start_station_id".into(),
            end_station: "end_station_id".into(),
            user_type: "user_type".into(),
            vehicle_id: None,
            timestamp_format: None,
        }
    }
}

impl DockedColumns {
    /// Every column written by this crate's own exporters.
    pub fn standard() -> Self {
        Self {
            vehicle_id: Some("vehicle_id".into()),
            ..Self::default()
        }
    }
}

/// Header names for dockless trip files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DocklessColumns {
    pub start_time: String,
    pub end_time: Option<String>,
    pub duration: Option<String>,
    pub start_lat: String,
    pub start_lon: String,
    pub end_lat: String,
    pub end_lon: String,
    pub vehicle_class: String,
    pub operator: Option<String>,
    /// When unset every record is treated as not cancelled.
    pub cancelled: Option<String>,
    pub timestamp_format: Option<String>,
}

impl Default for DocklessColumns {
    fn default() -> Self {
        Self {
            start_time: "start_time".into(),
            end_time: Some("end_time".into()),
            duration: None,
            start_lat: "start_lat".into(),
            start_lon: "start_lon".into(),
            end_lat: "end_lat".into(),
            end_lon: "end_lon".into(),
            vehicle_class: "vehicle_class".into(),
            operator: None,
            cancelled: None,
            timestamp_format: None,
        }
    }
}

impl DocklessColumns {
    pub fn standard() -> Self {
        Self {
            operator: Some("operator".into()),
            cancelled: Some("cancelled".into()),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDockedTrip {
    pub start_time: NaiveDateTime,
    pub end_time: NaiveDateTime,
    /// Seconds; never negative.
    pub duration_s: i64,
    pub start_station_id: String,
    pub end_station_id: String,
    pub user_type: UserType,
    pub vehicle_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocklessTrip {
    pub start_time: NaiveDateTime,
    pub end_time: NaiveDateTime,
    pub duration_s: i64,
    pub start_point: LatLon,
    pub end_point: LatLon,
    pub operator: String,
    pub vehicle_class: DocklessKind,
    pub cancelled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RawTrip {
    Docked(RawDockedTrip),
    Dockless(RawDocklessTrip),
}

/// Records parsed from one file plus the rows that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
}

struct Header(csv::StringRecord);

impl Header {
    fn required(&self, name: &str) -> Result<usize, IngestError> {
        self.0
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    }

    fn optional(&self, name: Option<&String>) -> Result<Option<usize>, IngestError> {
        name.map(|n| self.required(n)).transpose()
    }
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(source)
}

struct TimeColumns {
    start: usize,
    end: Option<usize>,
    duration: Option<usize>,
    format: Option<String>,
}

impl TimeColumns {
    fn resolve(
        header: &Header,
        start: &str,
        end: Option<&String>,
        duration: Option<&String>,
        format: Option<String>,
    ) -> Result<Self, IngestError> {
        if end.is_none() && duration.is_none() {
            return Err(IngestError::Config(
                "configure an end_time or a duration column".into(),
            ));
        }
        Ok(Self {
            start: header.required(start)?,
            end: header.optional(end)?,
            duration: header.optional(duration)?,
            format,
        })
    }

    fn read(&self, row: &Row<'_>) -> Result<(NaiveDateTime, NaiveDateTime, i64), String> {
        let fmt = self.format.as_deref();
        let start = parse_timestamp(row.get(self.start), fmt)?;
        let end = self
            .end
            .map(|i| parse_timestamp(row.get(i), fmt))
            .transpose()?;
        let duration = match self.duration {
            Some(i) => {
                let v: f64 = row
                    .get(i)
                    .parse()
                    .map_err(|_| format!("unparseable duration {:?}", row.get(i)))?;
                if !v.is_finite() {
                    return Err(format!("non-finite duration {v}"));
                }
                v.round() as i64
            }
            None => end.map_or(0, |e| (e - start).num_seconds()),
        };
        if duration < 0 {
            return Err(format!("negative duration ({duration} s)"));
        }
        let end = end.unwrap_or(start + chrono::Duration::seconds(duration));
        Ok((start, end, duration))
    }
}

struct Row<'a>(&'a csv::StringRecord);

impl Row<'_> {
    fn get(&self, i: usize) -> &str {
        self.0.get(i).unwrap_or("")
    }

    fn non_empty(&self, i: usize, what: &str) -> Result<String, String> {
        let v = self.get(i);
        if v.is_empty() {
            Err(format!("empty {what}"))
        } else {
            Ok(v.to_string())
        }
    }

    fn coord(&self, i: usize, what: &str, limit: f64) -> Result<f64, String> {
        let v: f64 = self
            .get(i)
            .parse()
            .map_err(|_| format!("unparseable {what} {:?}", self.get(i)))?;
        if !v.is_finite() || v.abs() > limit {
            return Err(format!("{what} {v} out of range [-{limit}, {limit}]"));
        }
        Ok(v)
    }
}

fn parse_flag(text: &str) -> Result<bool, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "f" | "no" | "n" => Ok(false),
        "1" | "true" | "t" | "yes" | "y" => Ok(true),
        other => Err(format!("unparseable cancelled flag {other:?}")),
    }
}

fn collect<T>(
    mut rdr: csv::Reader<impl Read>,
    mut row_fn: impl FnMut(&Row<'_>) -> Result<T, String>,
) -> Result<Parsed<T>, IngestError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for result in rdr.records() {
        match result {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line());
                match row_fn(&Row(&rec)) {
                    Ok(r) => records.push(r),
                    Err(message) => errors.push(RowError { line, message }),
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(e.into());
                }
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(Parsed { records, errors })
}

/// Parses a docked trip file. Bad rows are skipped and reported.
pub fn parse_docked<R: Read>(
    source: R,
    columns: &DockedColumns,
) -> Result<Parsed<RawDockedTrip>, IngestError> {
    let mut rdr = reader(source);
    let header = Header(rdr.headers()?.clone());
    let time = TimeColumns::resolve(
        &header,
        &columns.start_time,
        columns.end_time.as_ref(),
        columns.duration.as_ref(),
        columns.timestamp_format.clone(),
    )?;
    let start_station = header.required(&columns.start_station)?;
    let end_station = header.required(&columns.end_station)?;
    let user_type = header.required(&columns.user_type)?;
    let vehicle_id = header.optional(columns.vehicle_id.as_ref())?;

    collect(rdr, |row| {
        let (start_time, end_time, duration_s) = time.read(row)?;
        Ok(RawDockedTrip {
            start_time,
            end_time,
            duration_s,
            start_station_id: row.non_empty(start_station, "start station id")?,
            end_station_id: row.non_empty(end_station, "end station id")?,
            user_type: row.get(user_type).parse()?,
            vehicle_id: vehicle_id
                .map(|i| row.get(i).to_string())
                .unwrap_or_default(),
        })
    })
}

/// Parses a dockless trip file. Bad rows are skipped and reported.
pub fn parse_dockless<R: Read>(
    source: R,
    columns: &DocklessColumns,
) -> Result<Parsed<RawDocklessTrip>, IngestError> {
    let mut rdr = reader(source);
    let header = Header(rdr.headers()?.clone());
    let time = TimeColumns::resolve(
        &header,
        &columns.start_time,
        columns.end_time.as_ref(),
        columns.duration.as_ref(),
        columns.timestamp_format.clone(),
    )?;
    let start_lat = header.required(&columns.start_lat)?;
    let start_lon = header.required(&columns.start_lon)?;
    let end_lat = header.required(&columns.end_lat)?;
    let end_lon = header.required(&columns.end_lon)?;
    let vehicle_class = header.required(&columns.vehicle_class)?;
    let operator = header.optional(columns.operator.as_ref())?;
    let cancelled = header.optional(columns.cancelled.as_ref())?;

    collect(rdr, |row| {
        let (start_time, end_time, duration_s) = time.read(row)?;
        let start_point = LatLon::new(
            row.coord(start_lat, "start latitude", 90.0)?,
            row.coord(start_lon, "start longitude", 180.0)?,
        );
        let end_point = LatLon::new(
            row.coord(end_lat, "end latitude", 90.0)?,
            row.coord(end_lon, "end longitude", 180.0)?,
        );
        Ok(RawDocklessTrip {
            start_time,
            end_time,
            duration_s,
            start_point,
            end_point,
            operator: operator.map(|i| row.get(i).to_string()).unwrap_or_default(),
            vehicle_class: row.get(vehicle_class).parse()?,
            cancelled: cancelled
                .map(|i| parse_flag(row.get(i)))
                .transpose()?
                .unwrap_or(false),
        })
    })
}
