//! Diagram JSON schema and exact-number serialization helpers.
//!
//! Integers are written as JSON numbers when they fit in an `i64` and as
//! decimal strings otherwise; rationals are always strings (`"-1/2"`).

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cone::ToricDiagram;
use crate::cy::CalabiYauData;
use crate::lattice::{parse_rational, IntMatrix, Rational};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
}

pub fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    bigint_to_f64(x.numer()) / bigint_to_f64(x.denom())
}

fn bigint_value(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

pub fn ser_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    bigint_value(x).serialize(s)
}

pub fn ser_bigint_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&bigint_value(x))?;
    }
    seq.end()
}

pub fn ser_bigint_rows<S: Serializer>(rows: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Value>> = rows
        .iter()
        .map(|r| r.iter().map(bigint_value).collect())
        .collect();
    rows.serialize(s)
}

pub fn ser_matrix<S: Serializer>(m: &IntMatrix, s: S) -> Result<S::Ok, S::Error> {
    ser_bigint_rows(&m.to_rows(), s)
}

pub fn ser_rational_vec<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let strings: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    strings.serialize(s)
}

fn parse_int(v: &Value, what: &str) -> Result<BigInt, JsonError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(JsonError::Schema(format!(
                    "{what}: {n} is not an integer (write large integers as strings)"
                )))
            }
        }
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| JsonError::Schema(format!("{what}: {s:?} is not an integer"))),
        other => Err(JsonError::Schema(format!("{what}: expected integer, got {other}"))),
    }
}

#[derive(Deserialize)]
struct RawDiagramFile {
    rank: usize,
    normals: Vec<Vec<Value>>,
    #[serde(default)]
    gamma: Option<Vec<Value>>,
    #[serde(default)]
    height: Option<Value>,
}

/// Contents of a diagram file: `{"rank": 3, "normals": [[1,0,0], …]}` with
/// optional `"gamma"` (rational strings) and `"height"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramFile {
    pub rank: usize,
    #[serde(serialize_with = "ser_bigint_rows")]
    pub normals: Vec<Vec<BigInt>>,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_rational_vec"
    )]
    pub gamma: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_bigint")]
    pub height: Option<BigInt>,
}

fn ser_opt_rational_vec<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_rational_vec(v, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_bigint<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_bigint(v, s),
        None => s.serialize_none(),
    }
}

impl DiagramFile {
    pub fn from_json_str(text: &str) -> Result<Self, JsonError> {
        let raw: RawDiagramFile = serde_json::from_str(text)?;
        if raw.normals.is_empty() {
            return Err(JsonError::Schema("\"normals\" is empty".into()));
        }
        let mut normals = Vec::with_capacity(raw.normals.len());
        for (i, row) in raw.normals.iter().enumerate() {
            if row.len() != raw.rank {
                return Err(JsonError::Schema(format!(
                    "normal {i} has {} entries but rank is {}",
                    row.len(),
                    raw.rank
                )));
            }
            normals.push(
                row.iter()
                    .map(|v| parse_int(v, &format!("normals[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        let gamma = match raw.gamma {
            None => None,
            Some(g) => {
                if g.len() != raw.rank {
                    return Err(JsonError::Schema("\"gamma\" length differs from rank".into()));
                }
                let parsed = g
                    .iter()
                    .map(|v| {
                        let text = match v {
                            Value::String(s) => s.clone(),
                            Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                            other => {
                                return Err(JsonError::Schema(format!(
                                    "gamma entries must be rational strings, got {other}"
                                )))
                            }
                        };
                        parse_rational(&text).ok_or_else(|| {
                            JsonError::Schema(format!("gamma entry {text:?} is not a rational"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(parsed)
            }
        };
        let height = raw.height.as_ref().map(|h| parse_int(h, "height")).transpose()?;
        Ok(Self {
            rank: raw.rank,
            normals,
            gamma,
            height,
        })
    }

    pub fn from_diagram(diagram: &ToricDiagram, cy: Option<&CalabiYauData>) -> Self {
        Self {
            rank: diagram.rank(),
            normals: diagram.normals().to_vec(),
            gamma: cy.map(|c| c.gamma.clone()),
            height: cy.map(|c| c.height.clone()),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram serializes")
    }
}
