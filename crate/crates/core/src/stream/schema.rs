//! Stream schemas: feature declarations and the class list.
//!
//! Schemas have a plain-text form used for CSV sidecar files:
//!
//! ```text
//! # anything after '#' is a comment
//! feature sepal_len numeric
//! feature color nominal red,green,blue
//! classes yes,no
//! ```
//!
//! One `feature` line per feature, in column order; exactly one `classes`
//! line. Names are single whitespace-free tokens; category and class names
//! may not contain commas.

use thiserror::Error;

use super::{Instance, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    Nominal { categories: Vec<String> },
    Numeric,
}

impl FeatureKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureKind::Numeric)
    }

    /// Number of categories for nominal features, 0 for numeric.
    pub fn arity(&self) -> usize {
        match self {
            FeatureKind::Nominal { categories } => categories.len(),
            FeatureKind::Numeric => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn numeric(name: impl Into<String>) -> Feature {
        Feature {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn nominal<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Feature {
        Feature {
            name: name.into(),
            kind: FeatureKind::Nominal {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("feature '{0}': nominal features need at least two categories")]
    TooFewCategories(String),
    #[error("duplicate feature name '{0}'")]
    DuplicateFeature(String),
    #[error("duplicate class name '{0}'")]
    DuplicateClass(String),
    #[error("feature '{feature}': duplicate category '{category}'")]
    DuplicateCategory { feature: String, category: String },
    #[error("empty name not allowed")]
    EmptyName,
    #[error("name '{0}' may not contain commas or whitespace")]
    BadName(String),
    #[error("schema text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Mismatch between an instance and the schema it claims to follow.
#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("expected {expected} feature values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("feature '{feature}': expected a {expected} value")]
    KindMismatch {
        feature: String,
        expected: &'static str,
    },
    #[error("feature '{feature}': category index {index} out of range for arity {arity}")]
    CategoryOutOfRange {
        feature: String,
        index: usize,
        arity: usize,
    },
    #[error("feature '{feature}': value must be finite")]
    NonFinite { feature: String },
}

/// Ordered feature declarations plus the class list. Immutable once built;
/// shared by a stream and every model trained on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    features: Vec<Feature>,
    classes: Vec<String>,
}

impl Schema {
    pub fn new(
        features: Vec<Feature>,
        classes: Vec<impl Into<String>>,
    ) -> Result<Schema, SchemaError> {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        if classes.len() < 2 {
            return Err(SchemaError::TooFewClasses(classes.len()));
        }
        for name in &classes {
            check_name(name)?;
            if classes.iter().filter(|c| *c == name).count() > 1 {
                return Err(SchemaError::DuplicateClass(name.clone()));
            }
        }
        for (i, f) in features.iter().enumerate() {
            check_name(&f.name)?;
            if features[..i].iter().any(|g| g.name == f.name) {
                return Err(SchemaError::DuplicateFeature(f.name.clone()));
            }
            if let FeatureKind::Nominal { categories } = &f.kind {
                if categories.len() < 2 {
                    return Err(SchemaError::TooFewCategories(f.name.clone()));
                }
                for (j, c) in categories.iter().enumerate() {
                    check_name(c)?;
                    if categories[..j].contains(c) {
                        return Err(SchemaError::DuplicateCategory {
                            feature: f.name.clone(),
                            category: c.clone(),
                        });
                    }
                }
            }
        }
        Ok(Schema { features, classes })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Checks that an instance is aligned with this schema: right length,
    /// label and category indices in range, numeric values finite.
    pub fn validate_instance(&self, inst: &Instance) -> Result<(), InstanceError> {
        if inst.values.len() != self.features.len() {
            return Err(InstanceError::WrongLength {
                expected: self.features.len(),
                got: inst.values.len(),
            });
        }
        if inst.label >= self.classes.len() {
            return Err(InstanceError::LabelOutOfRange {
                label: inst.label,
                classes: self.classes.len(),
            });
        }
        for (f, v) in self.features.iter().zip(&inst.values) {
            match (&f.kind, v) {
                (FeatureKind::Nominal { categories }, Value::Nominal(i)) => {
                    if *i >= categories.len() {
                        return Err(InstanceError::CategoryOutOfRange {
                            feature: f.name.clone(),
                            index: *i,
                            arity: categories.len(),
                        });
                    }
                }
                (FeatureKind::Numeric, Value::Numeric(x)) => {
                    if !x.is_finite() {
                        return Err(InstanceError::NonFinite {
                            feature: f.name.clone(),
                        });
                    }
                }
                (FeatureKind::Nominal { .. }, Value::Numeric(_)) => {
                    return Err(InstanceError::KindMismatch {
                        feature: f.name.clone(),
                        expected: "nominal",
                    });
                }
                (FeatureKind::Numeric, Value::Nominal(_)) => {
                    return Err(InstanceError::KindMismatch {
                        feature: f.name.clone(),
                        expected: "numeric",
                    });
                }
            }
        }
        Ok(())
    }

    /// Parses the sidecar text form documented at the top of this module.
    pub fn parse(text: &str) -> Result<Schema, SchemaError> {
        let mut features = Vec::new();
        let mut classes: Option<Vec<String>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            match tokens.next() {
                Some("feature") => {
                    let name = tokens
                        .next()
                        .ok_or_else(|| parse_err(line, "feature line needs a name"))?;
                    match tokens.next() {
                        Some("numeric") => {
                            if tokens.next().is_some() {
                                return Err(parse_err(line, "trailing tokens after 'numeric'"));
                            }
                            features.push(Feature::numeric(name));
                        }
                        Some("nominal") => {
                            let cats: String = tokens.collect::<Vec<_>>().join(" ");
                            if cats.is_empty() {
                                return Err(parse_err(line, "nominal feature needs categories"));
                            }
                            features.push(Feature::nominal(name, split_names(&cats)));
                        }
                        Some(other) => {
                            return Err(parse_err(
                                line,
                                format!(
                                    "unknown feature kind '{other}' (expected numeric or nominal)"
                                ),
                            ));
                        }
                        None => return Err(parse_err(line, "feature line needs a kind")),
                    }
                }
                Some("classes") => {
                    if classes.is_some() {
                        return Err(parse_err(line, "duplicate classes line"));
                    }
                    let rest: String = tokens.collect::<Vec<_>>().join(" ");
                    if rest.is_empty() {
                        return Err(parse_err(line, "classes line needs names"));
                    }
                    classes = Some(split_names(&rest));
                }
                Some(other) => {
                    return Err(parse_err(line, format!("unknown directive '{other}'")));
                }
                None => unreachable!("blank lines are skipped"),
            }
        }
        let classes = classes.ok_or_else(|| parse_err(0, "missing classes line"))?;
        Schema::new(features, classes)
    }

    /// Renders the sidecar text form; `parse` reads it back exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.features {
            match &f.kind {
                FeatureKind::Numeric => out.push_str(&format!("feature {} numeric\n", f.name)),
                FeatureKind::Nominal { categories } => out.push_str(&format!(
                    "feature {} nominal {}\n",
                    f.name,
                    categories.join(",")
                )),
            }
        }
        out.push_str(&format!("classes {}\n", self.classes.join(",")));
        out
    }
}

fn check_name(name: &str) -> Result<(), SchemaError> {
    if name.is_empty() {
        return Err(SchemaError::EmptyName);
    }
    if name.contains(',') || name.chars().any(char::is_whitespace) {
        return Err(SchemaError::BadName(name.to_string()));
    }
    Ok(())
}

fn split_names(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_string()).collect()
}

fn parse_err(line: usize, msg: impl Into<String>) -> SchemaError {
    SchemaError::Parse {
        line,
        msg: msg.into(),
    }
}
