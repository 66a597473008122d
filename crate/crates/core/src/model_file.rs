//! JSON model files.
//!
//! ```json
//! {
//!   "n_sites": 3,
//!   "n_states": 3,
//!   "mode": "exact-weights",
//!   "couplings": [[1, 2, "3/2"], [2, 3, "5/1"]],
//!   "fields": ["1/1", "2/1", "1/1"]
//! }
//! ```
//!
//! In `exact-weights` mode every value is a weight `t = e^J` written as a
//! `p/q` string. In `physical` mode values are plain numbers giving `J` and
//! `B` directly.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{GhsError, Result};
use crate::model::{parse_rational, GhostWeightVector, ModelSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel {
    Exact(GhostWeightVector),
    Physical(ModelSpec),
}

impl LoadedModel {
    pub fn n_sites(&self) -> usize {
        match self {
            LoadedModel::Exact(w) => w.n_sites(),
            LoadedModel::Physical(m) => m.n_sites(),
        }
    }

    pub fn n_states(&self) -> u32 {
        match self {
            LoadedModel::Exact(w) => w.n_states(),
            LoadedModel::Physical(m) => m.n_states(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_sites: usize,
    n_states: u32,
    mode: String,
    #[serde(default)]
    couplings: Vec<(usize, usize, Value)>,
    fields: Vec<Value>,
}

fn exact_value(v: &Value, what: &str) -> Result<num_rational::BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        other => Err(GhsError::Parse(format!(
            "{what}: exact-weights mode needs a \"p/q\" string, got {other}"
        ))),
    }
}

fn physical_value(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| GhsError::Parse(format!("{what}: physical mode needs a number, got {v}")))
}

pub fn parse_model(text: &str) -> Result<LoadedModel> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| GhsError::Parse(e.to_string()))?;
    if raw.fields.len() != raw.n_sites {
        return Err(GhsError::LengthMismatch {
            expected: raw.n_sites,
            found: raw.fields.len(),
        });
    }
    for &(i, j, _) in &raw.couplings {
        if i == 0 || i >= j || j > raw.n_sites {
            return Err(GhsError::InvalidModel(format!(
                "coupling ({i}, {j}) needs 1 <= i < j <= {}",
                raw.n_sites
            )));
        }
    }
    match raw.mode.as_str() {
        "exact-weights" => {
            let mut entries = Vec::new();
            for (i, v) in raw.fields.iter().enumerate() {
                entries.push(((0, i + 1), exact_value(v, &format!("field {}", i + 1))?));
            }
            for (i, j, v) in &raw.couplings {
                entries.push(((*i, *j), exact_value(v, &format!("coupling ({i}, {j})"))?));
            }
            Ok(LoadedModel::Exact(GhostWeightVector::from_pairs(
                raw.n_sites,
                raw.n_states,
                entries,
            )?))
        }
        "physical" => {
            let fields = raw
                .fields
                .iter()
                .enumerate()
                .map(|(i, v)| physical_value(v, &format!("field {}", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            let couplings = raw
                .couplings
                .iter()
                .map(|(i, j, v)| Ok(((*i, *j), physical_value(v, &format!("coupling ({i}, {j})"))?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(LoadedModel::Physical(ModelSpec::new(
                raw.n_sites,
                raw.n_states,
                couplings,
                fields,
            )?))
        }
        other => Err(GhsError::Parse(format!(
            "unknown mode \"{other}\" (expected \"exact-weights\" or \"physical\")"
        ))),
    }
}

pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GhsError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn exact_file() {
        let m = parse_model(
            r#"{"n_sites": 3, "n_states": 3, "mode": "exact-weights",
                "couplings": [[1, 2, "3/2"], [2, 3, "5/1"]],
                "fields": ["1/1", "2/1", "1/1"]}"#,
        )
        .unwrap();
        let LoadedModel::Exact(w) = m else { panic!("expected exact") };
        assert_eq!(w.weight_of(1, 2), Some(&BigRational::new(3.into(), 2.into())));
        assert_eq!(w.weight_of(0, 2), Some(&BigRational::from_integer(2.into())));
        assert_eq!(w.weight_of(1, 3), Some(&BigRational::from_integer(1.into())));
    }

    #[test]
    fn physical_file() {
        let m = parse_model(r#"{"n_sites": 2, "n_states": 2, "mode": "physical", "couplings": [[1, 2, 0.5]], "fields": [0.1, 0]}"#)
            .unwrap();
        let LoadedModel::Physical(spec) = m else { panic!("expected physical") };
        assert_eq!(spec.coupling(1, 2), 0.5);
        assert_eq!(spec.field(1), 0.1);
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            // float in exact mode
            r#"{"n_sites": 1, "n_states": 2, "mode": "exact-weights", "fields": [1.5]}"#,
            // decimal string in exact mode
            r#"{"n_sites": 1, "n_states": 2, "mode": "exact-weights", "fields": ["1.5"]}"#,
            r#"{"n_sites": 1, "n_states": 2, "mode": "exact-weights", "fields": ["3/0"]}"#,
            // weight below one
            r#"{"n_sites": 1, "n_states": 2, "mode": "exact-weights", "fields": ["1/2"]}"#,
            r#"{"n_sites": 2, "n_states": 2, "mode": "physical", "fields": [0]}"#,
            r#"{"n_sites": 2, "n_states": 2, "mode": "physical", "couplings": [[2, 1, 1.0]], "fields": [0, 0]}"#,
            r#"{"n_sites": 2, "n_states": 2, "mode": "physical", "couplings": [[1, 2, -1.0]], "fields": [0, 0]}"#,
            r#"{"n_sites": 1, "n_states": 2, "mode": "magic", "fields": [0]}"#,
            r#"{"n_sites": 1, "n_states": 2, "mode": "physical", "fields": [0], "extra": 1}"#,
            "not json",
        ];
        for text in cases {
            assert!(parse_model(text).is_err(), "accepted {text}");
        }
    }
}
