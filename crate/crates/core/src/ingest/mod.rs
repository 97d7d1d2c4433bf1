//! Raw trip parsing and the exclusion rules that turn raw records into
//! [`CleanTrip`](crate::trip::CleanTrip)s.

mod clean;
mod parse;
mod write;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clean::{
    clean, Cleanable, CleaningReport, CleaningRule, CleaningRules, Endpoint, RemovedByRule,
    StationLocator,
};
pub use parse::{
    parse_docked, parse_dockless, parse_timestamp, DockedColumns, DocklessColumns, Parsed,
    RawDockedTrip, RawDocklessTrip, RawTrip,
};
pub use write::{write_docked, write_dockless};

#[derive(Debug, Error)]
pub enum IngestError {
    /// The header lacks a configured column.
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("column configuration: {0}")]
    Config(String),
    #[error("export: {0}")]
    Export(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A data row that could not be turned into a record. The row is skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based line number in the source, header included.
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}
