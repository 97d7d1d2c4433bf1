use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Envelope, ErrorKind, PipelineError, Provenance, RunConfig, SCHEMA_VERSION};
use crate::analytics::{write_tidy_csv, AnalyticsReport};
use crate::eval::{
    classify_cohort, cohort_table, confusion, confusion_table, metrics, metrics_table,
    CohortShareReport, ConfusionMatrix, MetricsReport,
};
use crate::features::{encode, fit_schema, FeatureSchema, FeatureVector};
use crate::geo::{
    cells_to_geojson, export_cells, parse_boundary, parse_zones, polygon_to_geojson, read_stations,
    BBox, GeoError, LatLon, Polygon, VoronoiPartition, ZoneSet,
};
use crate::ingest::{
    clean, parse_docked, parse_dockless, write_docked, write_dockless, CleaningReport,
    CleaningRules, DockedColumns, DocklessColumns, IngestError, RowError,
};
use crate::models::{
    feature_importance, grid_search, predict_all, top_coefficients, train_forest, train_logistic,
    Model, ModelConfig, ModelDocument, SearchResult, TopCoefficients,
};
use crate::sampling::{
    distribution_check, downsample, split, ClassCounts, LabeledDataset, SimilarityReport,
};
use crate::synth::{
    default_profiles, fixture_boundary, fixture_partition, fixture_zones, generate,
    profiles_from_json, CohortProfile,
};
use crate::trip::{CleanTrip, UserType, VehicleClass};

type Result<T> = std::result::Result<T, PipelineError>;

fn config_err(context: impl Display, e: impl Display) -> PipelineError {
    PipelineError::new(ErrorKind::Config, context, e)
}

fn data_err(context: impl Display, e: impl Display) -> PipelineError {
    PipelineError::new(ErrorKind::Data, context, e)
}

fn ingest_err(path: &Path, e: IngestError) -> PipelineError {
    match e {
        IngestError::MissingColumn(_) | IngestError::Config(_) => config_err(path.display(), e),
        IngestError::Export(_) | IngestError::Csv(_) => data_err(path.display(), e),
    }
}

fn geo_err(path: &Path, e: GeoError) -> PipelineError {
    match e {
        GeoError::MissingColumn(_)
        | GeoError::GeoJson(_)
        | GeoError::MalformedPolygon(_)
        | GeoError::DuplicateZone(_) => config_err(path.display(), e),
        _ => data_err(path.display(), e),
    }
}

/// Row errors of one input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRowErrors {
    pub file: String,
    pub errors: Vec<RowError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningSummary {
    pub docked: Option<CleaningReport>,
    pub dockless: Option<CleaningReport>,
    pub combined: CleaningReport,
    pub row_errors: Vec<FileRowErrors>,
}

/// Cleaned trips of both inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Cleaned {
    pub docked: Vec<CleanTrip>,
    pub dockless: Vec<CleanTrip>,
    pub summary: CleaningSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub labeled: ClassCounts,
    pub balanced: ClassCounts,
    pub train_count: usize,
    pub test_count: usize,
    pub similarity: SimilarityReport,
}

/// Balanced, split trips ready for encoding.
pub struct Prepared {
    pub train: LabeledDataset<CleanTrip>,
    pub test: LabeledDataset<CleanTrip>,
    pub summary: SamplingSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Introspection {
    pub logistic: TopCoefficients,
    /// Forest importances, largest first, ties in feature order.
    pub forest_importance: Vec<(String, f64)>,
}

pub struct Trained {
    pub logistic: ModelDocument,
    pub forest: ModelDocument,
    pub search: SearchResult,
    pub introspection: Introspection,
    pub prepared: Prepared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEvaluation {
    pub model: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCohorts {
    pub model: String,
    pub cohorts: Vec<CohortShareReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub models: Vec<ModelCohorts>,
    /// Member share of the labeled docked trips, for comparison.
    pub docked_labeled: Option<CohortShareReport>,
}

pub const LOGISTIC_FILE: &str = "model_logistic.json";
pub const FOREST_FILE: &str = "model_forest.json";

/// A configured run writing into one output directory.
pub struct Run {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    provenance: Provenance,
}

impl Run {
    pub fn new(config: RunConfig, out_dir: PathBuf) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            provenance: Provenance::of(&config),
            config,
            out_dir,
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn input<'a>(&self, name: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| config_err("config", format!("inputs.{name} is not set")))
    }

    fn read_text(path: &Path) -> Result<String> {
        fs::read_to_string(path).map_err(|e| config_err(path.display(), e))
    }

    fn open(path: &Path) -> Result<fs::File> {
        fs::File::open(path).map_err(|e| config_err(path.display(), e))
    }

    fn out_path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir).map_err(|e| config_err(self.out_dir.display(), e))?;
        Ok(self.out_dir.join(name))
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_path(name)?;
        fs::write(&path, bytes).map_err(|e| config_err(path.display(), e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, kind: &str, data: T) -> Result<PathBuf> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            provenance: self.provenance.clone(),
            data,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| data_err(name, e))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes `body` after the provenance comment line.
    pub fn write_text(&self, name: &str, body: &[u8]) -> Result<PathBuf> {
        let mut bytes = self.provenance.comment_line().into_bytes();
        bytes.extend_from_slice(body);
        self.write_bytes(name, &bytes)
    }

    fn write_geojson(&self, name: &str, mut value: serde_json::Value) -> Result<PathBuf> {
        value["provenance"] = serde_json::to_value(&self.provenance).expect("plain data");
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| data_err(name, e))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Reads the `data` of an envelope written by an earlier run.
    pub fn read_artifact<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let path = self.out_dir.join(name);
        let text = Self::read_text(&path)?;
        let env: Envelope<T> =
            serde_json::from_str(&text).map_err(|e| config_err(path.display(), e))?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(config_err(
                path.display(),
                format!("unsupported schema version {}", env.schema_version),
            ));
        }
        Ok(env.data)
    }

    pub fn partition(&self) -> Result<VoronoiPartition> {
        let path = self.input("stations", &self.config.inputs.stations)?;
        let stations = read_stations(Self::open(path)?).map_err(|e| geo_err(path, e))?;
        VoronoiPartition::build(stations).map_err(|e| geo_err(path, e))
    }

    pub fn boundary(&self) -> Result<Polygon> {
        let path = self.input("boundary", &self.config.inputs.boundary)?;
        parse_boundary(&Self::read_text(path)?).map_err(|e| geo_err(path, e))
    }

    pub fn zones(&self) -> Result<Option<ZoneSet>> {
        match &self.config.inputs.zones {
            None => Ok(None),
            Some(path) => parse_zones(&Self::read_text(path)?)
                .map(Some)
                .map_err(|e| geo_err(path, e)),
        }
    }

    /// Parses and cleans whichever trip files are configured.
    pub fn clean(&self, partition: &VoronoiPartition) -> Result<Cleaned> {
        let inputs = &self.config.inputs;
        if inputs.docked.is_none() && inputs.dockless.is_none() {
            return Err(config_err(
                "config",
                "neither inputs.docked nor inputs.dockless is set",
            ));
        }
        let mut rules = CleaningRules::new(self.boundary()?);
        rules.same_location_radius_m = self.config.same_location_radius_m;
        let mut row_errors = Vec::new();
        let mut note = |path: &Path, errors: Vec<RowError>| {
            for e in &errors {
                eprintln!("warning: {}: {e}", path.display());
            }
            if !errors.is_empty() {
                row_errors.push(FileRowErrors {
                    file: path.display().to_string(),
                    errors,
                });
            }
        };

        let mut docked = (Vec::new(), None);
        if let Some(path) = &inputs.docked {
            let parsed = parse_docked(Self::open(path)?, &self.config.docked_columns)
                .map_err(|e| ingest_err(path, e))?;
            note(path, parsed.errors);
            let (trips, report) =
                clean(&parsed.records, &rules, partition).map_err(|e| ingest_err(path, e))?;
            docked = (trips, Some(report));
        }
        let mut dockless = (Vec::new(), None);
        if let Some(path) = &inputs.dockless {
            let parsed = parse_dockless(Self::open(path)?, &self.config.dockless_columns)
                .map_err(|e| ingest_err(path, e))?;
            note(path, parsed.errors);
            let (trips, report) =
                clean(&parsed.records, &rules, partition).map_err(|e| ingest_err(path, e))?;
            dockless = (trips, Some(report));
        }
        let combined = [docked.1, dockless.1]
            .iter()
            .flatten()
            .fold(CleaningReport::default(), |acc, r| acc.merged(r));
        Ok(Cleaned {
            docked: docked.0,
            dockless: dockless.0,
            summary: CleaningSummary {
                docked: docked.1,
                dockless: dockless.1,
                combined,
                row_errors,
            },
        })
    }

    pub fn write_cleaned(&self, cleaned: &Cleaned) -> Result<()> {
        if self.config.inputs.docked.is_some() {
            let mut buf = Vec::new();
            write_docked(&cleaned.docked, &mut buf).map_err(|e| data_err("clean_docked.csv", e))?;
            self.write_text("clean_docked.csv", &buf)?;
        }
        if self.config.inputs.dockless.is_some() {
            let mut buf = Vec::new();
            write_dockless(&cleaned.dockless, &mut buf)
                .map_err(|e| data_err("clean_dockless.csv", e))?;
            self.write_text("clean_dockless.csv", &buf)?;
        }
        self.write_json("cleaning_report.json", "cleaning_report", &cleaned.summary)?;
        Ok(())
    }

    /// Cell polygons clipped to a box around the stations and boundary.
    pub fn write_partition(&self, partition: &VoronoiPartition) -> Result<()> {
        let mut points: Vec<LatLon> = partition.stations().iter().map(|s| s.location).collect();
        if self.config.inputs.boundary.is_some() {
            points.extend(self.boundary()?.ring().iter().copied());
        }
        let bbox = BBox::around(points)
            .expect("partition has stations")
            .expanded(0.001);
        let cells = export_cells(partition, bbox).map_err(|e| data_err("partition", e))?;
        self.write_geojson("cells.geojson", cells_to_geojson(&cells))?;
        Ok(())
    }

    /// Balances the labeled docked trips, checks the sample against the
    /// population and splits it.
    pub fn prepare(&self, cleaned: &Cleaned) -> Result<Prepared> {
        let labeled = LabeledDataset::from_trips(cleaned.docked.clone());
        let balanced = downsample(&labeled, self.config.seeds.downsample)
            .map_err(|e| data_err("downsample", e))?;
        let similarity = distribution_check(
            balanced.records(),
            labeled.records(),
            self.config.similarity_tolerance,
        );
        let (train, test) = split(
            &balanced,
            self.config.train_fraction,
            self.config.seeds.split,
        )
        .map_err(|e| data_err("split", e))?;
        let summary = SamplingSummary {
            labeled: labeled.counts(),
            balanced: balanced.counts(),
            train_count: train.len(),
            test_count: test.len(),
            similarity,
        };
        Ok(Prepared {
            train,
            test,
            summary,
        })
    }

    fn encode(
        &self,
        trips: &LabeledDataset<CleanTrip>,
        partition: &VoronoiPartition,
        schema: &FeatureSchema,
    ) -> Result<LabeledDataset<FeatureVector>> {
        schema
            .check_partition(partition)
            .map_err(|e| data_err("features", e))?;
        trips
            .try_map(|t| encode(t, partition, schema))
            .map_err(|e| data_err("features", e))
    }

    pub fn train(&self, cleaned: &Cleaned, partition: &VoronoiPartition) -> Result<Trained> {
        let prepared = self.prepare(cleaned)?;
        let schema =
            fit_schema(prepared.train.records(), partition).map_err(|e| data_err("features", e))?;
        let train = self.encode(&prepared.train, partition, &schema)?;
        let seeds = &self.config.seeds;
        let logistic = train_logistic(&train, &self.config.logistic, seeds.logistic)
            .map_err(|e| data_err("train logistic", e))?;
        let grid: Vec<ModelConfig> = self
            .config
            .forest_grid
            .iter()
            .copied()
            .map(ModelConfig::Forest)
            .collect();
        let search =
            grid_search(&train, &grid, seeds.search).map_err(|e| data_err("grid search", e))?;
        let ModelConfig::Forest(best) = search.best else {
            unreachable!("forest-only grid")
        };
        let forest =
            train_forest(&train, &best, seeds.forest).map_err(|e| data_err("train forest", e))?;

        let mut importance: Vec<(String, f64)> = schema
            .names
            .iter()
            .cloned()
            .zip(feature_importance(&forest))
            .collect();
        importance.sort_by(|a, b| b.1.total_cmp(&a.1));
        let introspection = Introspection {
            logistic: top_coefficients(&logistic, &schema.names, self.config.top_k),
            forest_importance: importance,
        };
        let doc =
            |m| ModelDocument::new(schema.clone(), m).map_err(|e| data_err("model document", e));
        Ok(Trained {
            logistic: doc(Model::Logistic(logistic))?,
            forest: doc(Model::Forest(forest))?,
            search,
            introspection,
            prepared,
        })
    }

    pub fn write_trained(&self, trained: &Trained) -> Result<()> {
        self.write_json("sampling.json", "sampling", &trained.prepared.summary)?;
        self.write_json("search_log.json", "search_log", &trained.search)?;
        self.write_json(LOGISTIC_FILE, "model", &trained.logistic)?;
        self.write_json(FOREST_FILE, "model", &trained.forest)?;
        self.write_json(
            "introspection.json",
            "introspection",
            &trained.introspection,
        )?;
        Ok(())
    }

    /// Both model documents from the output directory.
    pub fn load_models(&self) -> Result<Vec<ModelDocument>> {
        [LOGISTIC_FILE, FOREST_FILE]
            .iter()
            .map(|name| {
                let doc: ModelDocument = self.read_artifact(name)?;
                ModelDocument::from_json(&doc.to_json().expect("serialisable"))
                    .map_err(|e| config_err(name, e))
            })
            .collect()
    }

    pub fn evaluate(
        &self,
        test: &LabeledDataset<CleanTrip>,
        partition: &VoronoiPartition,
        models: &[&ModelDocument],
    ) -> Result<Vec<ModelEvaluation>> {
        models
            .iter()
            .map(|doc| {
                let encoded = self.encode(test, partition, &doc.schema)?;
                let predicted = predict_all(&doc.model, encoded.records());
                let cm =
                    confusion(&predicted, encoded.labels()).map_err(|e| data_err("evaluate", e))?;
                Ok(ModelEvaluation {
                    model: doc.model.name().to_string(),
                    confusion: cm,
                    metrics: metrics(&cm),
                })
            })
            .collect()
    }

    pub fn write_evaluation(&self, evaluations: &[ModelEvaluation]) -> Result<()> {
        self.write_json("evaluation.json", "evaluation", evaluations)?;
        let mut text = String::new();
        for e in evaluations {
            text.push_str(&confusion_table(
                &format!("Confusion matrix ({})", e.model),
                &e.confusion,
            ));
            text.push('\n');
            text.push_str(&metrics_table(
                &format!("Metrics ({})", e.model),
                &e.metrics,
            ));
            text.push('\n');
        }
        self.write_text("evaluation.txt", text.as_bytes())?;
        Ok(())
    }

    /// Metrics straight from a JSON object of named confusion matrices.
    pub fn evaluate_matrices(&self, path: &Path) -> Result<Vec<ModelEvaluation>> {
        let text = Self::read_text(path)?;
        let matrices: BTreeMap<String, ConfusionMatrix> =
            serde_json::from_str(&text).map_err(|e| config_err(path.display(), e))?;
        Ok(matrices
            .into_iter()
            .map(|(model, cm)| ModelEvaluation {
                model,
                confusion: cm,
                metrics: metrics(&cm),
            })
            .collect())
    }

    pub fn classify(
        &self,
        cleaned: &Cleaned,
        partition: &VoronoiPartition,
        models: &[&ModelDocument],
    ) -> Result<ClassifyReport> {
        self.input("dockless", &self.config.inputs.dockless)?;
        let cohorts = dockless_cohorts(&cleaned.dockless);
        let mut out = Vec::new();
        for doc in models {
            let mut reports = Vec::new();
            for (name, trips) in &cohorts {
                if trips.is_empty() {
                    continue;
                }
                let r = classify_cohort(&doc.model, trips, partition, &doc.schema, name)
                    .map_err(|e| data_err(format!("classify {name}"), e))?;
                reports.push(r);
            }
            out.push(ModelCohorts {
                model: doc.model.name().to_string(),
                cohorts: reports,
            });
        }
        let counts = LabeledDataset::from_trips(cleaned.docked.clone()).counts();
        let docked_labeled = CohortShareReport::from_counts(
            "docked_labeled",
            counts.casual as u64,
            counts.member as u64,
        )
        .ok();
        Ok(ClassifyReport {
            models: out,
            docked_labeled,
        })
    }

    pub fn write_classify(&self, report: &ClassifyReport) -> Result<()> {
        self.write_json("cohorts.json", "cohort_shares", report)?;
        let mut text = String::new();
        for m in &report.models {
            text.push_str(&format!("Predicted cohort shares ({})\n", m.model));
            text.push_str(&cohort_table(&m.cohorts));
            text.push('\n');
        }
        if let Some(d) = &report.docked_labeled {
            text.push_str("Labeled docked trips\n");
            text.push_str(&cohort_table(std::slice::from_ref(d)));
        }
        self.write_text("cohorts.txt", text.as_bytes())?;
        Ok(())
    }

    pub fn analyze(
        &self,
        cleaned: &Cleaned,
        partition: &VoronoiPartition,
    ) -> Result<AnalyticsReport> {
        let zones = self.zones()?;
        let mut cohorts: Vec<(String, Vec<CleanTrip>)> = Vec::new();
        for (name, label) in [
            ("member", Some(UserType::Member)),
            ("casual", Some(UserType::Casual)),
            ("docked_unlabeled", None),
        ] {
            let trips: Vec<CleanTrip> = cleaned
                .docked
                .iter()
                .filter(|t| t.label == label)
                .cloned()
                .collect();
            if !trips.is_empty() {
                cohorts.push((name.to_string(), trips));
            }
        }
        cohorts.extend(
            dockless_cohorts(&cleaned.dockless)
                .into_iter()
                .filter(|(_, t)| !t.is_empty())
                .map(|(n, t)| (n.to_string(), t)),
        );
        Ok(AnalyticsReport::build(
            &cohorts,
            zones.as_ref(),
            self.config.peak_window,
            partition,
        ))
    }

    pub fn write_analytics(&self, report: &AnalyticsReport) -> Result<()> {
        self.write_json("analytics.json", "analytics", report)?;
        let mut buf = Vec::new();
        write_tidy_csv(&report.tidy_rows(), &mut buf).map_err(|e| data_err("analytics.csv", e))?;
        self.write_text("analytics.csv", &buf)?;
        Ok(())
    }

    /// Writes the synthetic network, boundary, zones, profiles, trip files and
    /// a `run.json` pointing at them.
    pub fn synth(&self) -> Result<()> {
        let partition = fixture_partition();
        let profiles: Vec<CohortProfile> = match &self.config.synth.profiles {
            None => default_profiles(&partition)
                .all()
                .into_iter()
                .cloned()
                .collect(),
            Some(path) => {
                let list = profiles_from_json(&Self::read_text(path)?)
                    .map_err(|e| config_err(path.display(), e))?;
                for p in &list {
                    p.validate(&partition)
                        .map_err(|e| config_err(path.display(), e))?;
                }
                list
            }
        };
        let seed = self.config.seeds.synth;
        let n = &self.config.synth;
        let (mut docked, mut dockless) = (Vec::new(), Vec::new());
        for (k, p) in profiles.iter().enumerate() {
            let (count, sink) = if p.vehicle_class == VehicleClass::DockedBike {
                (n.docked_trips_per_cohort, &mut docked)
            } else {
                (n.dockless_trips_per_cohort, &mut dockless)
            };
            sink.extend(
                generate(p, &partition, count, seed.wrapping_add(k as u64))
                    .map_err(|e| data_err("synth", e))?,
            );
        }

        let mut stations = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut stations);
            let err = |e: csv::Error| data_err("stations.csv", e);
            w.write_record(["id", "name", "lat", "lon"]).map_err(err)?;
            for s in partition.stations() {
                w.write_record([
                    s.id.clone(),
                    s.name.clone(),
                    s.location.lat.to_string(),
                    s.location.lon.to_string(),
                ])
                .map_err(err)?;
            }
            w.flush().map_err(|e| data_err("stations.csv", e))?;
        }
        self.write_text("stations.csv", &stations)?;
        let boundary = polygon_to_geojson(
            &fixture_boundary(&partition),
            json!({ "name": "service_area" }),
        );
        self.write_geojson(
            "boundary.geojson",
            json!({ "type": "FeatureCollection", "features": [boundary] }),
        )?;
        let zones: Vec<serde_json::Value> = fixture_zones(&partition)
            .zones()
            .iter()
            .map(|z| polygon_to_geojson(&z.polygon, json!({ "zone_id": z.id })))
            .collect();
        self.write_geojson(
            "zones.geojson",
            json!({ "type": "FeatureCollection", "features": zones }),
        )?;
        self.write_json("profiles.json", "profiles", &profiles)?;
        let mut buf = Vec::new();
        write_docked(&docked, &mut buf).map_err(|e| data_err("docked.csv", e))?;
        self.write_text("docked.csv", &buf)?;
        let mut buf = Vec::new();
        write_dockless(&dockless, &mut buf).map_err(|e| data_err("dockless.csv", e))?;
        self.write_text("dockless.csv", &buf)?;

        let mut run = self.config.clone();
        run.inputs = super::Inputs {
            docked: Some("docked.csv".into()),
            dockless: Some("dockless.csv".into()),
            stations: Some("stations.csv".into()),
            boundary: Some("boundary.geojson".into()),
            zones: Some("zones.geojson".into()),
        };
        run.docked_columns = DockedColumns::standard();
        run.dockless_columns = DocklessColumns::standard();
        run.output_dir = None;
        run.synth.profiles = None;
        let mut text = serde_json::to_string_pretty(&run).map_err(|e| data_err("run.json", e))?;
        text.push('\n');
        self.write_bytes("run.json", text.as_bytes())?;
        Ok(())
    }

    /// clean, partition, train, evaluate, classify (with dockless input) and
    /// analyze, in that order.
    pub fn pipeline(&self) -> Result<()> {
        let partition = self.partition()?;
        let cleaned = self.clean(&partition)?;
        self.write_cleaned(&cleaned)?;
        self.write_partition(&partition)?;
        let trained = self.train(&cleaned, &partition)?;
        self.write_trained(&trained)?;
        let models = [&trained.logistic, &trained.forest];
        let evaluations = self.evaluate(&trained.prepared.test, &partition, &models)?;
        self.write_evaluation(&evaluations)?;
        if self.config.inputs.dockless.is_some() {
            let report = self.classify(&cleaned, &partition, &models)?;
            self.write_classify(&report)?;
        }
        let analytics = self.analyze(&cleaned, &partition)?;
        self.write_analytics(&analytics)?;
        Ok(())
    }
}

fn dockless_cohorts(trips: &[CleanTrip]) -> [(&'static str, Vec<CleanTrip>); 2] {
    let of = |class| {
        trips
            .iter()
            .filter(|t| t.vehicle_class == class)
            .cloned()
            .collect()
    };
    [
        ("dockless_bike", of(VehicleClass::DocklessBike)),
        ("scooter", of(VehicleClass::Scooter)),
    ]
}
