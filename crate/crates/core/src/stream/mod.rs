//! Instances, schemas, and instance sources (synthetic generators and CSV).

mod csv_stream;
mod generators;
mod schema;

pub use csv_stream::{open_csv_stream, write_csv, CsvStream};
pub use generators::GeneratorConfig;
pub use schema::{Feature, FeatureKind, InstanceError, Schema, SchemaError};

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

/// One feature slot: a category index for nominal features, a real number
/// for numeric ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Nominal(usize),
    Numeric(f64),
}

/// A labeled example: feature values aligned with the schema's feature
/// order, plus a class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
    pub label: usize,
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },
    #[error("line {line}: feature '{feature}': unknown category '{value}'")]
    UnknownCategory {
        line: u64,
        feature: String,
        value: String,
    },
    #[error("line {line}: unknown class '{value}'")]
    UnknownClass { line: u64, value: String },
    #[error("line {line}: feature '{feature}': {msg}")]
    BadValue {
        line: u64,
        feature: String,
        msg: String,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("invalid stream configuration: {0}")]
    Config(String),
}

/// A single-consumer source of instances. Generators never fail;
/// file-backed streams can fail mid-iteration, so items are wrapped in
/// `Result`.
pub trait InstanceStream {
    fn schema(&self) -> &Arc<Schema>;
    fn next_instance(&mut self) -> Option<Result<Instance, StreamError>>;
}
