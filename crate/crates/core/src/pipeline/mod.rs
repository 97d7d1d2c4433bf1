//! Config-driven orchestration behind the command-line tool.
//!
//! Every JSON artifact is wrapped in an [`Envelope`] carrying the schema
//! version, the artifact kind, the config hash and the seeds. Delimited and
//! text outputs start with a `#` line holding the same provenance. Nothing
//! time- or host-dependent is written, so equal configs give equal bytes.

mod config;
mod stages;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use config::{Inputs, RunConfig, Seeds, SynthSettings, OUTPUT_DIR_ENV};
pub use stages::{Cleaned, Run, Trained};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Bad configuration, missing inputs or malformed schemas.
    Config,
    /// Inputs that parse but cannot be processed.
    Data,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError {
    pub kind: ErrorKind,
    /// The file, row or stage the error concerns.
    pub context: String,
    pub message: String,
}

impl PipelineError {
    pub fn new(kind: ErrorKind, context: impl fmt::Display, message: impl fmt::Display) -> Self {
        Self {
            kind,
            context: context.to_string(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.context, self.message)
    }
}

impl std::error::Error for PipelineError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Seeds,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        Self {
            config_hash: config.hash(),
            seeds: config.seeds,
        }
    }

    /// One-line form used as the first line of CSV and text outputs.
    pub fn comment_line(&self) -> String {
        let s = &self.seeds;
        format!(
            "# schema_version={SCHEMA_VERSION} config_hash={} seeds=downsample:{},split:{},search:{},logistic:{},forest:{},synth:{}\n",
            self.config_hash, s.downsample, s.split, s.search, s.logistic, s.forest, s.synth
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub kind: String,
    pub provenance: Provenance,
    pub data: T,
}
