//! CSV-backed instance streams.
//!
//! Files are UTF-8, comma-separated, one header row. Columns are the schema's
//! features in order; the final column is the class label. The schema comes
//! either from the caller or from a sidecar file at `<csv path>.schema` in
//! the text form documented in [`super::schema`]. Rows are decoded one at a
//! time; memory use is independent of file size.

use std::fs::File;
use std::io::{Read, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{FeatureKind, Instance, InstanceStream, Schema, StreamError, Value};

pub struct CsvStream<R: Read> {
    schema: Arc<Schema>,
    records: csv::StringRecordsIntoIter<R>,
}

/// Opens `path` for streaming. With no explicit schema, reads the sidecar
/// file `<path>.schema`.
pub fn open_csv_stream(
    path: impl AsRef<Path>,
    schema: Option<Arc<Schema>>,
) -> Result<CsvStream<File>, StreamError> {
    let path = path.as_ref();
    let schema = match schema {
        Some(s) => s,
        None => {
            let sidecar = sidecar_path(path);
            let text = std::fs::read_to_string(&sidecar).map_err(|source| StreamError::Io {
                path: sidecar,
                source,
            })?;
            Arc::new(Schema::parse(&text)?)
        }
    };
    let file = File::open(path).map_err(|source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    CsvStream::from_reader(file, schema)
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut p = csv_path.as_os_str().to_owned();
    p.push(".schema");
    PathBuf::from(p)
}

impl<R: Read> CsvStream<R> {
    /// Wraps any reader producing CSV text in the documented layout.
    pub fn from_reader(reader: R, schema: Arc<Schema>) -> Result<CsvStream<R>, StreamError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = csv_reader.headers()?.clone();
        let expected = schema.n_features() + 1;
        if headers.len() != expected {
            return Err(StreamError::Malformed {
                line: 1,
                msg: format!(
                    "header has {} columns, schema implies {expected} (features plus label)",
                    headers.len()
                ),
            });
        }
        for (i, feature) in schema.features().iter().enumerate() {
            if headers.get(i) != Some(feature.name.as_str()) {
                return Err(StreamError::Malformed {
                    line: 1,
                    msg: format!(
                        "header column {} is '{}', schema expects feature '{}'",
                        i + 1,
                        headers.get(i).unwrap_or(""),
                        feature.name
                    ),
                });
            }
        }
        Ok(CsvStream {
            schema,
            records: csv_reader.into_records(),
        })
    }

    fn decode(&self, record: &csv::StringRecord) -> Result<Instance, StreamError> {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != self.schema.n_features() + 1 {
            return Err(StreamError::Malformed {
                line,
                msg: format!(
                    "row has {} fields, expected {}",
                    record.len(),
                    self.schema.n_features() + 1
                ),
            });
        }
        let mut values = Vec::with_capacity(self.schema.n_features());
        for (feature, field) in self.schema.features().iter().zip(record.iter()) {
            match &feature.kind {
                FeatureKind::Numeric => {
                    let x: f64 = field.parse().map_err(|_| StreamError::BadValue {
                        line,
                        feature: feature.name.clone(),
                        msg: format!("'{field}' is not a number"),
                    })?;
                    if !x.is_finite() {
                        return Err(StreamError::BadValue {
                            line,
                            feature: feature.name.clone(),
                            msg: format!("'{field}' is not finite"),
                        });
                    }
                    values.push(Value::Numeric(x));
                }
                FeatureKind::Nominal { categories } => {
                    let idx = categories.iter().position(|c| c == field).ok_or_else(|| {
                        StreamError::UnknownCategory {
                            line,
                            feature: feature.name.clone(),
                            value: field.to_string(),
                        }
                    })?;
                    values.push(Value::Nominal(idx));
                }
            }
        }
        let label_field = record.get(record.len() - 1).unwrap_or("");
        let label =
            self.schema
                .class_index(label_field)
                .ok_or_else(|| StreamError::UnknownClass {
                    line,
                    value: label_field.to_string(),
                })?;
        Ok(Instance { values, label })
    }
}

impl<R: Read> InstanceStream for CsvStream<R> {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Option<Result<Instance, StreamError>> {
        let record = match self.records.next()? {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Some(Err(StreamError::Malformed {
                    line,
                    msg: e.to_string(),
                }));
            }
        };
        Some(self.decode(&record))
    }
}

/// Drains `stream` into a CSV file plus its sidecar schema file, so the
/// pair can be re-read with [`open_csv_stream`]. Returns the row count.
/// Numeric values use shortest round-trip formatting and re-read exactly.
pub fn write_csv(
    stream: &mut dyn InstanceStream,
    path: impl AsRef<Path>,
) -> Result<u64, StreamError> {
    let path = path.as_ref();
    let schema = Arc::clone(stream.schema());
    let io_err = |source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    };

    let sidecar = sidecar_path(path);
    let mut sidecar_file = File::create(&sidecar).map_err(|source| StreamError::Io {
        path: sidecar.clone(),
        source,
    })?;
    sidecar_file
        .write_all(schema.to_text().as_bytes())
        .map_err(|source| StreamError::Io {
            path: sidecar,
            source,
        })?;

    let mut writer = csv::Writer::from_path(path).map_err(StreamError::Csv)?;
    let mut header: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
    header.push("class");
    writer.write_record(&header)?;

    let mut rows = 0u64;
    while let Some(item) = stream.next_instance() {
        let inst = item?;
        let mut record = Vec::with_capacity(schema.n_features() + 1);
        for (feature, value) in schema.features().iter().zip(&inst.values) {
            match (&feature.kind, value) {
                (FeatureKind::Numeric, Value::Numeric(x)) => record.push(x.to_string()),
                (FeatureKind::Nominal { categories }, Value::Nominal(i)) => {
                    record.push(categories[*i].clone())
                }
                _ => {
                    return Err(StreamError::Malformed {
                        line: rows + 2,
                        msg: format!("value kind mismatch for feature '{}'", feature.name),
                    })
                }
            }
        }
        record.push(schema.classes()[inst.label].clone());
        writer.write_record(&record)?;
        rows += 1;
    }
    writer.flush().map_err(io_err)?;
    Ok(rows)
}
