//! Shared-mobility trip analytics: cleaning, Voronoi encoding, member-vs-casual
//! classification, evaluation and descriptive statistics.

pub mod analytics;
pub mod eval;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod sampling;
pub mod stats;
pub mod synth;
pub mod trip;
