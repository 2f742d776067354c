//! Trial datasets for the dual conditioned-inhibition experiment.
//!
//! Four binary cues: PR predicts delivery of the positive reinforcer P, OP
//! predicts its omission, NR predicts the negative reinforcer N, ON predicts
//! its omission. Outcomes are deterministic: P = PR AND NOT OP,
//! N = NR AND NOT ON, and the reward value is the signed readout P - N.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FEATURE_NAMES: [&str; 4] = ["PR", "OP", "NR", "ON"];
pub const REINFORCER_IDS: [&str; 2] = ["P", "N"];
/// Table rows excluded from the partial variant (1-based row numbers).
pub const PARTIAL_EXCLUDED_ROWS: [usize; 6] = [2, 5, 7, 8, 10, 14];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}, column {column}: value {value} is not binary")]
    NonBinaryValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: RV = {found} but declared reinforcer weights give {expected}")]
    InconsistentRewardValue {
        row: usize,
        found: f64,
        expected: f64,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    WrongFieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Unparseable {
        row: usize,
        column: String,
        value: String,
    },
    #[error("bad header: expected {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("copies must be at least 1")]
    ZeroCopies,
    #[error("record has {found} features, dataset declares {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// One trial: binary cue vector, per-reinforcer outcome saliences, and the
/// signed reward value implied by the reinforcer weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub features: Vec<u8>,
    /// Outcome saliences, parallel to `Dataset::reinforcer_ids`.
    pub outcomes: Vec<u8>,
    pub reward_value: f64,
}

impl TrialRecord {
    pub fn outcome_map<'a>(&self, ids: &'a [String]) -> BTreeMap<&'a str, u8> {
        ids.iter()
            .map(String::as_str)
            .zip(self.outcomes.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Full,
    Partial,
    Custom,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Full => write!(f, "full"),
            Variant::Partial => write!(f, "partial"),
            Variant::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub reinforcer_ids: Vec<String>,
    /// Agent-defined value of each reinforcer (here +1 for P, -1 for N).
    pub reinforcer_weights: Vec<f64>,
    pub records: Vec<TrialRecord>,
    pub variant: Variant,
}

impl Dataset {
    /// Builds a dataset, checking that every value is binary and that each
    /// record's reward value equals the weighted sum of its outcomes.
    pub fn new(
        feature_names: Vec<String>,
        reinforcer_ids: Vec<String>,
        reinforcer_weights: Vec<f64>,
        records: Vec<TrialRecord>,
        variant: Variant,
    ) -> Result<Self, DatasetError> {
        let dim = feature_names.len();
        for (i, rec) in records.iter().enumerate() {
            let row = i + 1;
            if rec.features.len() != dim {
                return Err(DatasetError::DimensionMismatch {
                    expected: dim,
                    found: rec.features.len(),
                });
            }
            for (j, &v) in rec.features.iter().enumerate() {
                if v > 1 {
                    return Err(DatasetError::NonBinaryValue {
                        row,
                        column: feature_names[j].clone(),
                        value: v.to_string(),
                    });
                }
            }
            for (k, &v) in rec.outcomes.iter().enumerate() {
                if v > 1 {
                    return Err(DatasetError::NonBinaryValue {
                        row,
                        column: reinforcer_ids[k].clone(),
                        value: v.to_string(),
                    });
                }
            }
            let expected: f64 = reinforcer_weights
                .iter()
                .zip(rec.outcomes.iter())
                .map(|(w, &o)| w * f64::from(o))
                .sum();
            if (rec.reward_value - expected).abs() > 1e-12 {
                return Err(DatasetError::InconsistentRewardValue {
                    row,
                    found: rec.reward_value,
                    expected,
                });
            }
        }
        Ok(Dataset {
            feature_names,
            reinforcer_ids,
            reinforcer_weights,
            records,
            variant,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Feature vectors as f64 rows, ready for the regressors.
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .map(|r| r.features.iter().map(|&v| f64::from(v)).collect())
            .collect()
    }

    pub fn reward_targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.reward_value).collect()
    }

    /// Outcome column for one reinforcer, by id.
    pub fn reinforcer_targets(&self, id: &str) -> Option<Vec<f64>> {
        let k = self.reinforcer_ids.iter().position(|r| r == id)?;
        Some(
            self.records
                .iter()
                .map(|r| f64::from(r.outcomes[k]))
                .collect(),
        )
    }
}

/// Generates the 16-row (full) or 10-row (partial) conditioned-inhibition
/// dataset, rows ordered by the binary count of (PR, OP, NR, ON).
pub fn generate_conditioned_inhibition(variant: Variant) -> Dataset {
    assert!(
        variant != Variant::Custom,
        "only Full and Partial are generated"
    );
    let mut records = Vec::with_capacity(16);
    for row in 0..16usize {
        if variant == Variant::Partial && PARTIAL_EXCLUDED_ROWS.contains(&(row + 1)) {
            continue;
        }
        let pr = (row >> 3 & 1) as u8;
        let op = (row >> 2 & 1) as u8;
        let nr = (row >> 1 & 1) as u8;
        let on = (row & 1) as u8;
        let p = pr & (1 - op);
        let n = nr & (1 - on);
        records.push(TrialRecord {
            features: vec![pr, op, nr, on],
            outcomes: vec![p, n],
            reward_value: f64::from(p) - f64::from(n),
        });
    }
    Dataset::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        REINFORCER_IDS.iter().map(|s| s.to_string()).collect(),
        vec![1.0, -1.0],
        records,
        variant,
    )
    .expect("generated dataset satisfies its own invariants")
}

/// `copies` concatenations of the dataset, permuted by a seeded shuffle.
pub fn replicate_and_shuffle(
    data: &Dataset,
    copies: usize,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    if copies == 0 {
        return Err(DatasetError::ZeroCopies);
    }
    let mut records = Vec::with_capacity(data.records.len() * copies);
    for _ in 0..copies {
        records.extend(data.records.iter().cloned());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
    Ok(Dataset {
        feature_names: data.feature_names.clone(),
        reinforcer_ids: data.reinforcer_ids.clone(),
        reinforcer_weights: data.reinforcer_weights.clone(),
        records,
        variant: Variant::Custom,
    })
}

fn expected_header(data: &Dataset) -> Vec<String> {
    data.feature_names
        .iter()
        .cloned()
        .chain(data.reinforcer_ids.iter().cloned())
        .chain(std::iter::once("RV".to_string()))
        .collect()
}

/// Writes the CSV form: header `PR,OP,NR,ON,P,N,RV`, one row per trial.
pub fn save_dataset(data: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut out = String::new();
    out.push_str(&expected_header(data).join(","));
    out.push('\n');
    for rec in &data.records {
        let mut fields: Vec<String> = rec.features.iter().map(|v| v.to_string()).collect();
        fields.extend(rec.outcomes.iter().map(|v| v.to_string()));
        let rv = rec.reward_value;
        fields.push(if rv == rv.trunc() {
            format!("{}", rv as i64)
        } else {
            format!("{rv}")
        });
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a CSV written by [`save_dataset`] (or by hand), validating every
/// cell and the RV consistency of every row. The variant tag is recovered
/// from the row multiset: exactly the 16 full rows -> Full, exactly the 10
/// partial rows -> Partial, anything else -> Custom.
pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());

    let feature_names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let reinforcer_ids: Vec<String> = REINFORCER_IDS.iter().map(|s| s.to_string()).collect();
    let want_header: Vec<String> = feature_names
        .iter()
        .cloned()
        .chain(reinforcer_ids.iter().cloned())
        .chain(std::iter::once("RV".to_string()))
        .collect();
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header != want_header {
        return Err(DatasetError::BadHeader {
            expected: want_header.join(","),
            found: header.join(","),
        });
    }

    let n_feat = feature_names.len();
    let n_rein = reinforcer_ids.len();
    let n_cols = n_feat + n_rein + 1;
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != n_cols {
            return Err(DatasetError::WrongFieldCount {
                row,
                expected: n_cols,
                found: rec.len(),
            });
        }
        let column = |j: usize| want_header[j].clone();
        let parse_bit = |j: usize| -> Result<u8, DatasetError> {
            let raw = rec[j].trim();
            let v: i64 = raw.parse().map_err(|_| DatasetError::Unparseable {
                row,
                column: column(j),
                value: raw.to_string(),
            })?;
            if v == 0 || v == 1 {
                Ok(v as u8)
            } else {
                Err(DatasetError::NonBinaryValue {
                    row,
                    column: column(j),
                    value: raw.to_string(),
                })
            }
        };
        let features: Vec<u8> = (0..n_feat).map(parse_bit).collect::<Result<_, _>>()?;
        let outcomes: Vec<u8> = (n_feat..n_feat + n_rein)
            .map(parse_bit)
            .collect::<Result<_, _>>()?;
        let raw_rv = rec[n_cols - 1].trim();
        let reward_value: f64 = raw_rv.parse().map_err(|_| DatasetError::Unparseable {
            row,
            column: "RV".to_string(),
            value: raw_rv.to_string(),
        })?;
        records.push(TrialRecord {
            features,
            outcomes,
            reward_value,
        });
    }

    let mut ds = Dataset::new(
        feature_names,
        reinforcer_ids,
        vec![1.0, -1.0],
        records,
        Variant::Custom,
    )?;
    let full = generate_conditioned_inhibition(Variant::Full);
    let partial = generate_conditioned_inhibition(Variant::Partial);
    if ds.records == full.records {
        ds.variant = Variant::Full;
    } else if ds.records == partial.records {
        ds.variant = Variant::Partial;
    }
    Ok(ds)
}
