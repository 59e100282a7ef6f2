//! Seeded synthetic stream generators: SEA, Agrawal, Hyperplane, RBF, LED.
//!
//! Each family follows its standard benchmark definition. A config fully
//! determines the emitted sequence: equal configs give identical instances,
//! bit for bit, on every platform.

use std::sync::Arc;

use crate::rng::Rng;

use super::{Feature, Instance, InstanceStream, Schema, StreamError, Value};

/// Configuration for one synthetic stream. Parse from / render to the
/// compact `family:key=value,...` text form via [`GeneratorConfig::parse`]
/// and [`GeneratorConfig::canonical`].
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorConfig {
    /// Three numeric features in [0, 10); label is whether f0 + f1 stays
    /// at or below a threshold chosen by `function` (1..=4). `noise` flips
    /// labels with the given probability.
    Sea {
        seed: u64,
        length: u64,
        function: u8,
        noise: f64,
    },
    /// Nine demographic/loan features with ten standard classification
    /// functions (1..=10) assigning group A or B.
    Agrawal {
        seed: u64,
        length: u64,
        function: u8,
        noise: f64,
    },
    /// Rotating hyperplane in [0,1]^d: label is which side of the
    /// hyperplane the point falls on. `drift` shifts `drift_features` of
    /// the weights by ±magnitude per instance; `sigma` is the probability
    /// each drifting weight's direction flips.
    Hyperplane {
        seed: u64,
        length: u64,
        n_features: usize,
        drift: f64,
        drift_features: usize,
        sigma: f64,
        noise: f64,
    },
    /// Fixed random centroids in [0,1]^d, each with a class, weight, and
    /// spread; instances are Gaussian offsets from a weight-sampled
    /// centroid.
    Rbf {
        seed: u64,
        length: u64,
        n_features: usize,
        n_classes: usize,
        n_centroids: usize,
    },
    /// 7-segment digit display plus 17 irrelevant binary attributes;
    /// `noise` independently flips each relevant segment.
    Led { seed: u64, length: u64, noise: f64 },
}

impl GeneratorConfig {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorConfig::Sea { .. } => "sea",
            GeneratorConfig::Agrawal { .. } => "agrawal",
            GeneratorConfig::Hyperplane { .. } => "hyperplane",
            GeneratorConfig::Rbf { .. } => "rbf",
            GeneratorConfig::Led { .. } => "led",
        }
    }

    pub fn length(&self) -> u64 {
        match *self {
            GeneratorConfig::Sea { length, .. }
            | GeneratorConfig::Agrawal { length, .. }
            | GeneratorConfig::Hyperplane { length, .. }
            | GeneratorConfig::Rbf { length, .. }
            | GeneratorConfig::Led { length, .. } => length,
        }
    }

    /// Parses `family:key=value,...`. Omitted keys take family defaults;
    /// unknown keys and malformed values are errors.
    pub fn parse(spec: &str) -> Result<GeneratorConfig, StreamError> {
        let (family, rest) = match spec.split_once(':') {
            Some((f, r)) => (f, r),
            None => (spec, ""),
        };
        let mut params = ParamList::parse(rest)?;
        let config = match family {
            "sea" => GeneratorConfig::Sea {
                seed: params.take_u64("seed", 1)?,
                length: params.take_u64("length", 100_000)?,
                function: params.take_u64("function", 1)? as u8,
                noise: params.take_f64("noise", 0.0)?,
            },
            "agrawal" => GeneratorConfig::Agrawal {
                seed: params.take_u64("seed", 1)?,
                length: params.take_u64("length", 100_000)?,
                function: params.take_u64("function", 1)? as u8,
                noise: params.take_f64("noise", 0.0)?,
            },
            "hyperplane" => GeneratorConfig::Hyperplane {
                seed: params.take_u64("seed", 1)?,
                length: params.take_u64("length", 100_000)?,
                n_features: params.take_u64("features", 10)? as usize,
                drift: params.take_f64("drift", 0.0)?,
                drift_features: params.take_u64("drift_features", 2)? as usize,
                sigma: params.take_f64("sigma", 0.1)?,
                noise: params.take_f64("noise", 0.0)?,
            },
            "rbf" => GeneratorConfig::Rbf {
                seed: params.take_u64("seed", 1)?,
                length: params.take_u64("length", 100_000)?,
                n_features: params.take_u64("features", 10)? as usize,
                n_classes: params.take_u64("classes", 2)? as usize,
                n_centroids: params.take_u64("centroids", 50)? as usize,
            },
            "led" => GeneratorConfig::Led {
                seed: params.take_u64("seed", 1)?,
                length: params.take_u64("length", 100_000)?,
                noise: params.take_f64("noise", 0.0)?,
            },
            other => {
                return Err(StreamError::Config(format!(
                    "unknown generator family '{other}'"
                )))
            }
        };
        params.finish()?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical text form: every parameter spelled out, keys in a fixed
    /// order. Two configs are equal iff their canonical forms are equal.
    pub fn canonical(&self) -> String {
        match self {
            GeneratorConfig::Sea {
                seed,
                length,
                function,
                noise,
            } => format!("sea:function={function},length={length},noise={noise},seed={seed}"),
            GeneratorConfig::Agrawal {
                seed,
                length,
                function,
                noise,
            } => format!("agrawal:function={function},length={length},noise={noise},seed={seed}"),
            GeneratorConfig::Hyperplane {
                seed,
                length,
                n_features,
                drift,
                drift_features,
                sigma,
                noise,
            } => format!(
                "hyperplane:drift={drift},drift_features={drift_features},features={n_features},length={length},noise={noise},seed={seed},sigma={sigma}"
            ),
            GeneratorConfig::Rbf {
                seed,
                length,
                n_features,
                n_classes,
                n_centroids,
            } => format!(
                "rbf:centroids={n_centroids},classes={n_classes},features={n_features},length={length},seed={seed}"
            ),
            GeneratorConfig::Led {
                seed,
                length,
                noise,
            } => format!("led:length={length},noise={noise},seed={seed}"),
        }
    }

    fn validate(&self) -> Result<(), StreamError> {
        let bad = |msg: String| Err(StreamError::Config(msg));
        match *self {
            GeneratorConfig::Sea {
                function, noise, ..
            } => {
                if !(1..=4).contains(&function) {
                    return bad(format!("sea function must be 1..=4, got {function}"));
                }
                check_fraction("noise", noise)?;
            }
            GeneratorConfig::Agrawal {
                function, noise, ..
            } => {
                if !(1..=10).contains(&function) {
                    return bad(format!("agrawal function must be 1..=10, got {function}"));
                }
                check_fraction("noise", noise)?;
            }
            GeneratorConfig::Hyperplane {
                n_features,
                drift,
                drift_features,
                sigma,
                noise,
                ..
            } => {
                if n_features < 2 {
                    return bad("hyperplane needs at least 2 features".into());
                }
                if drift_features > n_features {
                    return bad(format!(
                        "drift_features {drift_features} exceeds features {n_features}"
                    ));
                }
                if !drift.is_finite() || drift < 0.0 {
                    return bad("drift must be a non-negative number".into());
                }
                check_fraction("sigma", sigma)?;
                check_fraction("noise", noise)?;
            }
            GeneratorConfig::Rbf {
                n_features,
                n_classes,
                n_centroids,
                ..
            } => {
                if n_features < 1 {
                    return bad("rbf needs at least 1 feature".into());
                }
                if n_classes < 2 {
                    return bad("rbf needs at least 2 classes".into());
                }
                if n_centroids < n_classes {
                    return bad(format!(
                        "rbf needs at least as many centroids ({n_centroids}) as classes ({n_classes})"
                    ));
                }
            }
            GeneratorConfig::Led { noise, .. } => check_fraction("noise", noise)?,
        }
        Ok(())
    }

    pub fn schema(&self) -> Schema {
        match self {
            GeneratorConfig::Sea { .. } => Schema::new(
                vec![
                    Feature::numeric("f0"),
                    Feature::numeric("f1"),
                    Feature::numeric("f2"),
                ],
                vec!["below", "above"],
            )
            .expect("fixed schema"),
            GeneratorConfig::Agrawal { .. } => Schema::new(
                vec![
                    Feature::numeric("salary"),
                    Feature::numeric("commission"),
                    Feature::numeric("age"),
                    Feature::nominal("elevel", ["e0", "e1", "e2", "e3", "e4"]),
                    Feature::nominal("car", (1..=20).map(|i| format!("c{i}"))),
                    Feature::nominal("zipcode", (0..9).map(|i| format!("z{i}"))),
                    Feature::numeric("hvalue"),
                    Feature::numeric("hyears"),
                    Feature::numeric("loan"),
                ],
                vec!["groupA", "groupB"],
            )
            .expect("fixed schema"),
            GeneratorConfig::Hyperplane { n_features, .. } => Schema::new(
                (0..*n_features)
                    .map(|i| Feature::numeric(format!("f{i}")))
                    .collect(),
                vec!["below", "above"],
            )
            .expect("fixed schema"),
            GeneratorConfig::Rbf {
                n_features,
                n_classes,
                ..
            } => Schema::new(
                (0..*n_features)
                    .map(|i| Feature::numeric(format!("f{i}")))
                    .collect(),
                (0..*n_classes).map(|i| format!("c{i}")).collect(),
            )
            .expect("fixed schema"),
            GeneratorConfig::Led { .. } => Schema::new(
                (0..24)
                    .map(|i| Feature::nominal(format!("a{i}"), ["0", "1"]))
                    .collect(),
                (0..10).map(|i| i.to_string()).collect(),
            )
            .expect("fixed schema"),
        }
    }

    /// Builds the stream this config describes.
    pub fn open(&self) -> GeneratorStream {
        GeneratorStream::new(self.clone())
    }
}

fn check_fraction(name: &str, x: f64) -> Result<(), StreamError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(StreamError::Config(format!(
            "{name} must be in [0, 1], got {x}"
        )));
    }
    Ok(())
}

/// Key=value list parser shared by the generator spec forms.
struct ParamList {
    entries: Vec<(String, String)>,
}

impl ParamList {
    fn parse(text: &str) -> Result<ParamList, StreamError> {
        let mut entries = Vec::new();
        for part in text.split(',') {
            if part.is_empty() {
                continue;
            }
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| StreamError::Config(format!("expected key=value, got '{part}'")))?;
            if entries.iter().any(|(ek, _)| ek == k) {
                return Err(StreamError::Config(format!("duplicate parameter '{k}'")));
            }
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(ParamList { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let pos = self.entries.iter().position(|(k, _)| k == key)?;
        Some(self.entries.remove(pos).1)
    }

    fn take_u64(&mut self, key: &str, default: u64) -> Result<u64, StreamError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| StreamError::Config(format!("{key}: expected an integer, got '{v}'"))),
        }
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, StreamError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => {
                let x: f64 = v.parse().map_err(|_| {
                    StreamError::Config(format!("{key}: expected a number, got '{v}'"))
                })?;
                if !x.is_finite() {
                    return Err(StreamError::Config(format!("{key}: must be finite")));
                }
                Ok(x)
            }
        }
    }

    fn finish(self) -> Result<(), StreamError> {
        if let Some((k, _)) = self.entries.first() {
            return Err(StreamError::Config(format!("unknown parameter '{k}'")));
        }
        Ok(())
    }
}

/// A running generator; yields exactly `config.length()` instances.
pub struct GeneratorStream {
    schema: Arc<Schema>,
    emitted: u64,
    length: u64,
    state: FamilyState,
}

enum FamilyState {
    Sea {
        rng: Rng,
        threshold: f64,
        noise: f64,
    },
    Agrawal {
        rng: Rng,
        function: u8,
        noise: f64,
    },
    Hyperplane {
        rng: Rng,
        weights: Vec<f64>,
        directions: Vec<f64>,
        drift: f64,
        drift_features: usize,
        sigma: f64,
        noise: f64,
    },
    Rbf {
        rng: Rng,
        centroids: Vec<Centroid>,
        cumulative_weights: Vec<f64>,
    },
    Led {
        rng: Rng,
        noise: f64,
    },
}

struct Centroid {
    center: Vec<f64>,
    class: usize,
    std_dev: f64,
}

const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

/// Segment patterns (a..g) for digits 0..9 on a 7-segment display.
const LED_SEGMENTS: [[u8; 7]; 10] = [
    [1, 1, 1, 1, 1, 1, 0],
    [0, 1, 1, 0, 0, 0, 0],
    [1, 1, 0, 1, 1, 0, 1],
    [1, 1, 1, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [1, 0, 1, 1, 0, 1, 1],
    [1, 0, 1, 1, 1, 1, 1],
    [1, 1, 1, 0, 0, 0, 0],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 0, 1, 1],
];

impl GeneratorStream {
    fn new(config: GeneratorConfig) -> GeneratorStream {
        let schema = Arc::new(config.schema());
        let length = config.length();
        // Stream 0 seeds one-off model structure, stream 1 the per-instance
        // draws, so changing the model never shifts the instance sequence.
        let state = match config {
            GeneratorConfig::Sea {
                seed,
                function,
                noise,
                ..
            } => FamilyState::Sea {
                rng: Rng::new_stream(seed, 1),
                threshold: SEA_THRESHOLDS[(function - 1) as usize],
                noise,
            },
            GeneratorConfig::Agrawal {
                seed,
                function,
                noise,
                ..
            } => FamilyState::Agrawal {
                rng: Rng::new_stream(seed, 1),
                function,
                noise,
            },
            GeneratorConfig::Hyperplane {
                seed,
                n_features,
                drift,
                drift_features,
                sigma,
                noise,
                ..
            } => {
                let mut model_rng = Rng::new_stream(seed, 0);
                let weights = (0..n_features).map(|_| model_rng.next_f64()).collect();
                FamilyState::Hyperplane {
                    rng: Rng::new_stream(seed, 1),
                    weights,
                    directions: vec![1.0; n_features],
                    drift,
                    drift_features,
                    sigma,
                    noise,
                }
            }
            GeneratorConfig::Rbf {
                seed,
                n_features,
                n_classes,
                n_centroids,
                ..
            } => {
                let mut model_rng = Rng::new_stream(seed, 0);
                let mut centroids = Vec::with_capacity(n_centroids);
                let mut cumulative_weights = Vec::with_capacity(n_centroids);
                let mut total = 0.0;
                for i in 0..n_centroids {
                    let center = (0..n_features).map(|_| model_rng.next_f64()).collect();
                    // Cycle the first C centroids through all classes so every
                    // class exists regardless of the seed.
                    let class = if i < n_classes {
                        i
                    } else {
                        model_rng.next_below(n_classes as u64) as usize
                    };
                    let weight = model_rng.next_f64();
                    let std_dev = model_rng.next_f64();
                    total += weight;
                    cumulative_weights.push(total);
                    centroids.push(Centroid {
                        center,
                        class,
                        std_dev,
                    });
                }
                FamilyState::Rbf {
                    rng: Rng::new_stream(seed, 1),
                    centroids,
                    cumulative_weights,
                }
            }
            GeneratorConfig::Led { seed, noise, .. } => FamilyState::Led {
                rng: Rng::new_stream(seed, 1),
                noise,
            },
        };
        GeneratorStream {
            schema,
            emitted: 0,
            length,
            state,
        }
    }

    fn generate(&mut self) -> Instance {
        match &mut self.state {
            FamilyState::Sea {
                rng,
                threshold,
                noise,
            } => {
                let f0 = rng.next_range(0.0, 10.0);
                let f1 = rng.next_range(0.0, 10.0);
                let f2 = rng.next_range(0.0, 10.0);
                let mut label = usize::from(f0 + f1 > *threshold);
                if *noise > 0.0 && rng.next_f64() < *noise {
                    label = 1 - label;
                }
                Instance {
                    values: vec![Value::Numeric(f0), Value::Numeric(f1), Value::Numeric(f2)],
                    label,
                }
            }
            FamilyState::Agrawal {
                rng,
                function,
                noise,
            } => agrawal_instance(rng, *function, *noise),
            FamilyState::Hyperplane {
                rng,
                weights,
                directions,
                drift,
                drift_features,
                sigma,
                noise,
            } => {
                let point: Vec<f64> = (0..weights.len()).map(|_| rng.next_f64()).collect();
                let dot: f64 = weights.iter().zip(&point).map(|(w, x)| w * x).sum();
                let half_mass: f64 = weights.iter().sum::<f64>() * 0.5;
                let mut label = usize::from(dot >= half_mass);
                if *noise > 0.0 && rng.next_f64() < *noise {
                    label = 1 - label;
                }
                if *drift > 0.0 {
                    for k in 0..*drift_features {
                        weights[k] += directions[k] * *drift;
                        if *sigma > 0.0 && rng.next_f64() < *sigma {
                            directions[k] = -directions[k];
                        }
                    }
                }
                Instance {
                    values: point.into_iter().map(Value::Numeric).collect(),
                    label,
                }
            }
            FamilyState::Rbf {
                rng,
                centroids,
                cumulative_weights,
            } => {
                let total = *cumulative_weights.last().expect("validated non-empty");
                let pick = rng.next_f64() * total;
                let idx = cumulative_weights
                    .iter()
                    .position(|&c| pick < c)
                    .unwrap_or(centroids.len() - 1);
                let centroid = &centroids[idx];
                let dims = centroid.center.len();
                let mut offset: Vec<f64> = (0..dims).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let norm = offset.iter().map(|x| x * x).sum::<f64>().sqrt();
                let distance = rng.next_gaussian() * centroid.std_dev;
                let values = centroid
                    .center
                    .iter()
                    .zip(&mut offset)
                    .map(|(c, o)| {
                        let shift = if norm > 0.0 {
                            *o / norm * distance
                        } else {
                            0.0
                        };
                        Value::Numeric(c + shift)
                    })
                    .collect();
                Instance {
                    values,
                    label: centroid.class,
                }
            }
            FamilyState::Led { rng, noise } => {
                let digit = rng.next_below(10) as usize;
                let mut values = Vec::with_capacity(24);
                for seg in LED_SEGMENTS[digit] {
                    let mut bit = seg as usize;
                    if *noise > 0.0 && rng.next_f64() < *noise {
                        bit = 1 - bit;
                    }
                    values.push(Value::Nominal(bit));
                }
                for _ in 7..24 {
                    values.push(Value::Nominal(rng.next_below(2) as usize));
                }
                Instance {
                    values,
                    label: digit,
                }
            }
        }
    }
}

impl InstanceStream for GeneratorStream {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Option<Result<Instance, StreamError>> {
        if self.emitted >= self.length {
            return None;
        }
        self.emitted += 1;
        Some(Ok(self.generate()))
    }
}

fn agrawal_instance(rng: &mut Rng, function: u8, noise: f64) -> Instance {
    let salary = rng.next_range(20_000.0, 150_000.0);
    let commission = if salary >= 75_000.0 {
        0.0
    } else {
        rng.next_range(10_000.0, 75_000.0)
    };
    let age = 20.0 + (rng.next_below(61) as f64);
    let elevel = rng.next_below(5) as usize;
    let car = rng.next_below(20) as usize;
    let zipcode = rng.next_below(9) as usize;
    let k = (zipcode + 1) as f64;
    let hvalue = rng.next_range(0.5 * k * 100_000.0, 1.5 * k * 100_000.0);
    let hyears = 1.0 + (rng.next_below(30) as f64);
    let loan = rng.next_range(0.0, 500_000.0);

    let group_a = agrawal_group_a(
        function, salary, commission, age, elevel, hvalue, hyears, loan,
    );
    let mut label = usize::from(!group_a);
    if noise > 0.0 && rng.next_f64() < noise {
        label = 1 - label;
    }
    Instance {
        values: vec![
            Value::Numeric(salary),
            Value::Numeric(commission),
            Value::Numeric(age),
            Value::Nominal(elevel),
            Value::Nominal(car),
            Value::Nominal(zipcode),
            Value::Numeric(hvalue),
            Value::Numeric(hyears),
            Value::Numeric(loan),
        ],
        label,
    }
}

#[allow(clippy::too_many_arguments)]
fn agrawal_group_a(
    function: u8,
    salary: f64,
    commission: f64,
    age: f64,
    elevel: usize,
    hvalue: f64,
    hyears: f64,
    loan: f64,
) -> bool {
    let between = |x: f64, lo: f64, hi: f64| lo <= x && x <= hi;
    match function {
        1 => !(40.0..60.0).contains(&age),
        2 => {
            if age < 40.0 {
                between(salary, 50_000.0, 100_000.0)
            } else if age < 60.0 {
                between(salary, 75_000.0, 125_000.0)
            } else {
                between(salary, 25_000.0, 75_000.0)
            }
        }
        3 => {
            if age < 40.0 {
                elevel <= 1
            } else if age < 60.0 {
                (1..=3).contains(&elevel)
            } else {
                (2..=4).contains(&elevel)
            }
        }
        4 => {
            if age < 40.0 {
                if elevel <= 1 {
                    between(salary, 25_000.0, 75_000.0)
                } else {
                    between(salary, 50_000.0, 100_000.0)
                }
            } else if age < 60.0 {
                if (1..=3).contains(&elevel) {
                    between(salary, 50_000.0, 100_000.0)
                } else {
                    between(salary, 75_000.0, 125_000.0)
                }
            } else if (2..=4).contains(&elevel) {
                between(salary, 50_000.0, 100_000.0)
            } else {
                between(salary, 25_000.0, 75_000.0)
            }
        }
        5 => {
            if age < 40.0 {
                if between(salary, 50_000.0, 100_000.0) {
                    between(loan, 100_000.0, 300_000.0)
                } else {
                    between(loan, 200_000.0, 400_000.0)
                }
            } else if age < 60.0 {
                if between(salary, 75_000.0, 125_000.0) {
                    between(loan, 200_000.0, 400_000.0)
                } else {
                    between(loan, 300_000.0, 500_000.0)
                }
            } else if between(salary, 25_000.0, 75_000.0) {
                between(loan, 300_000.0, 500_000.0)
            } else {
                between(loan, 100_000.0, 300_000.0)
            }
        }
        6 => {
            let total = salary + commission;
            if age < 40.0 {
                between(total, 50_000.0, 100_000.0)
            } else if age < 60.0 {
                between(total, 75_000.0, 125_000.0)
            } else {
                between(total, 25_000.0, 75_000.0)
            }
        }
        7 => 2.0 * (salary + commission) / 3.0 - loan / 5.0 - 20_000.0 > 0.0,
        8 => 2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel as f64 - 20_000.0 > 0.0,
        9 => {
            2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel as f64 - loan / 5.0 - 10_000.0
                > 0.0
        }
        10 => {
            let equity = if hyears >= 20.0 {
                hvalue * (hyears - 20.0) / 10.0
            } else {
                0.0
            };
            2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel as f64 + equity / 5.0 - 10_000.0
                > 0.0
        }
        _ => unreachable!("function validated to 1..=10"),
    }
}
