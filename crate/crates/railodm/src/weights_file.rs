//! Weight table documents: `{ "<State>": { "T": 135, ..., "PI": 0 }, ... }`.
//!
//! Validation walks the whole document and reports each bad field by its
//! dotted path (`Cruise.SL`), so the service can hand them back verbatim.

use std::path::Path;

use railodm_core::classifier::{WeightColumn, WeightTable};
use railodm_core::odm::OperationalState;
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hashing::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

struct Row<'a>(&'a WeightTable, OperationalState);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(Some(WeightColumn::ALL.len()))?;
        for c in WeightColumn::ALL {
            m.serialize_entry(c.name(), &self.0.get(self.1, c))?;
        }
        m.end()
    }
}

/// Serialises a table with states and columns in canonical order.
pub struct WeightsDocument<'a>(pub &'a WeightTable);

impl Serialize for WeightsDocument<'_> {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(Some(OperationalState::ALL.len()))?;
        for s in OperationalState::ALL {
            m.serialize_entry(s.name(), &Row(self.0, s))?;
        }
        m.end()
    }
}

pub fn weights_to_value(table: &WeightTable) -> Value {
    serde_json::to_value(WeightsDocument(table)).expect("weights serialize")
}

pub fn weights_to_json(table: &WeightTable) -> String {
    serde_json::to_string_pretty(&WeightsDocument(table)).expect("weights serialize") + "\n"
}

/// Hash of the compact canonical form; independent of file whitespace.
pub fn weights_hash(table: &WeightTable) -> String {
    sha256_hex(
        serde_json::to_string(&WeightsDocument(table))
            .expect("weights serialize")
            .as_bytes(),
    )
}

pub fn weights_from_value(doc: &Value) -> Result<WeightTable, Vec<FieldError>> {
    let Some(obj) = doc.as_object() else {
        return Err(vec![FieldError::new(
            "",
            "weight table must be a JSON object keyed by state",
        )]);
    };
    let mut errors = Vec::new();
    for key in obj.keys() {
        if OperationalState::from_name(key).is_none() {
            errors.push(FieldError::new(key.as_str(), "unknown state"));
        }
    }
    let mut values = [[0i64; 7]; 5];
    for state in OperationalState::ALL {
        let sname = state.name();
        let Some(row) = obj.get(sname) else {
            errors.push(FieldError::new(sname, "state missing"));
            continue;
        };
        let Some(row) = row.as_object() else {
            errors.push(FieldError::new(
                sname,
                "must be an object keyed by observation",
            ));
            continue;
        };
        for key in row.keys() {
            if WeightColumn::from_name(key).is_none() {
                errors.push(FieldError::new(
                    format!("{sname}.{key}"),
                    "unknown observation",
                ));
            }
        }
        for col in WeightColumn::ALL {
            let field = format!("{sname}.{}", col.name());
            match row.get(col.name()) {
                None => errors.push(FieldError::new(field, "weight missing")),
                Some(v) => match v.as_i64() {
                    Some(n) if n < 0 => {
                        errors.push(FieldError::new(field, format!("must be >= 0 (got {n})")))
                    }
                    Some(n) if n > WeightTable::MAX_WEIGHT as i64 => errors.push(FieldError::new(
                        field,
                        format!("must be <= {} (got {n})", WeightTable::MAX_WEIGHT),
                    )),
                    Some(n) => values[state.index()][col as usize] = n,
                    None if v.as_u64().is_some() => errors.push(FieldError::new(
                        field,
                        format!("must be <= {} (got {v})", WeightTable::MAX_WEIGHT),
                    )),
                    None => errors.push(FieldError::new(
                        field,
                        format!("must be an integer (got {v})"),
                    )),
                },
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let table = WeightTable::from_lookup(|s, c| Some(values[s.index()][c as usize]))
        .expect("values were range-checked above");
    Ok(table)
}

pub fn parse_weights(text: &str) -> Result<WeightTable, Vec<FieldError>> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| vec![FieldError::new("", format!("invalid JSON: {e}"))])?;
    weights_from_value(&doc)
}

pub fn load_weights(path: &Path) -> Result<WeightTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_weights(&text).map_err(|errs| Error::Schema {
        what: "weight table",
        problems: errs.iter().map(ToString::to_string).collect(),
    })
}

pub fn save_weights(table: &WeightTable, path: &Path) -> Result<()> {
    std::fs::write(path, weights_to_json(table)).map_err(|e| Error::io(path, e))
}
