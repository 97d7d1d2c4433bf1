use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ErrorKind, PipelineError};
use crate::analytics::TimeWindow;
use crate::ingest::{CleaningRules, DockedColumns, DocklessColumns};
use crate::models::{default_forest_grid, ForestParams, LogisticConfig, ModelConfig};
use crate::sampling::DEFAULT_SIMILARITY_TOLERANCE;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "SHARED_MOBILITY_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub docked: Option<PathBuf>,
    pub dockless: Option<PathBuf>,
    pub stations: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub zones: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub downsample: u64,
    pub split: u64,
    pub search: u64,
    pub logistic: u64,
    pub forest: u64,
    pub synth: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            downsample: 11,
            split: 12,
            search: 13,
            logistic: 14,
            forest: 15,
            synth: 16,
        }
    }
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Self {
            downsample: seed,
            split: seed,
            search: seed,
            logistic: seed,
            forest: seed,
            synth: seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    /// Trips per docked cohort (commuter and recreational).
    pub docked_trips_per_cohort: usize,
    /// Trips per dockless cohort (bike and scooter).
    pub dockless_trips_per_cohort: usize,
    /// Profile list to generate from instead of the built-in four. Docked
    /// profiles feed `docked.csv`, the rest `dockless.csv`.
    pub profiles: Option<PathBuf>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            docked_trips_per_cohort: 10_000,
            dockless_trips_per_cohort: 5_000,
            profiles: None,
        }
    }
}

/// Everything a run depends on. Relative input paths resolve against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub docked_columns: DockedColumns,
    pub dockless_columns: DocklessColumns,
    pub same_location_radius_m: f64,
    pub train_fraction: f64,
    pub similarity_tolerance: f64,
    pub logistic: LogisticConfig,
    /// Random forest configurations tried by the hyperparameter search.
    pub forest_grid: Vec<ForestParams>,
    pub peak_window: TimeWindow,
    /// Coefficients reported per sign.
    pub top_k: usize,
    pub seeds: Seeds,
    pub synth: SynthSettings,
    /// Not part of the config hash.
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let forest_grid = default_forest_grid()
            .into_iter()
            .filter_map(|c| match c {
                ModelConfig::Forest(p) => Some(p),
                ModelConfig::Logistic(_) => None,
            })
            .collect();
        Self {
            inputs: Inputs::default(),
            docked_columns: DockedColumns::default(),
            dockless_columns: DocklessColumns::default(),
            same_location_radius_m: CleaningRules::DEFAULT_RADIUS_M,
            train_fraction: 0.8,
            similarity_tolerance: DEFAULT_SIMILARITY_TOLERANCE,
            logistic: LogisticConfig::default(),
            forest_grid,
            peak_window: TimeWindow::morning_peak(),
            top_k: 10,
            seeds: Seeds::default(),
            synth: SynthSettings::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, PipelineError> {
        serde_json::from_str(text)
            .map_err(|e| PipelineError::new(ErrorKind::Config, origin.display(), e))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::new(ErrorKind::Config, path.display(), e))?;
        let mut config = Self::from_json(&text, path)?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        Ok(config)
    }

    /// Makes relative input and output paths relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        let i = &mut self.inputs;
        for p in [
            &mut i.docked,
            &mut i.dockless,
            &mut i.stations,
            &mut i.boundary,
            &mut i.zones,
            &mut self.output_dir,
            &mut self.synth.profiles,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::new(ErrorKind::Config, "config", msg));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if !(self.same_location_radius_m.is_finite() && self.same_location_radius_m >= 0.0) {
            return bad(format!(
                "same_location_radius_m must be >= 0, got {}",
                self.same_location_radius_m
            ));
        }
        if self.forest_grid.is_empty() {
            return bad("forest_grid is empty".into());
        }
        if self.similarity_tolerance.is_nan() || self.similarity_tolerance < 0.0 {
            return bad(format!(
                "similarity_tolerance must be >= 0, got {}",
                self.similarity_tolerance
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let json = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_hash_ignores_output_dir() {
        let c = RunConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&json, Path::new("x")).unwrap(), c);
        let mut d = c.clone();
        d.output_dir = Some("elsewhere".into());
        assert_eq!(c.hash(), d.hash());
        d.seeds.split += 1;
        assert_ne!(c.hash(), d.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn partial_files_fill_defaults_and_unknown_keys_fail() {
        let c =
            RunConfig::from_json(r#"{"seeds": {"split": 3}, "top_k": 5}"#, Path::new("x")).unwrap();
        assert_eq!(c.seeds.split, 3);
        assert_eq!(c.seeds.forest, Seeds::default().forest);
        assert_eq!(c.forest_grid.len(), 12);
        let err = RunConfig::from_json(r#"{"sedes": {}}"#, Path::new("run.json")).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Config);
        assert!(err.to_string().starts_with("run.json"));
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let mut c = RunConfig::default();
        c.inputs.stations = Some("stations.csv".into());
        c.inputs.zones = Some("/abs/zones.geojson".into());
        c.resolve_paths(Path::new("/data"));
        assert_eq!(c.inputs.stations.unwrap(), Path::new("/data/stations.csv"));
        assert_eq!(c.inputs.zones.unwrap(), Path::new("/abs/zones.geojson"));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.train_fraction = 1.0;
        assert!(c.validate().is_err());
    }
}
