//! JSON run reports. Floats are rounded to [`FLOAT_PRECISION`] significant
//! digits before serialization so identical runs give identical bytes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use sasakit::cone::{ExtremeRay, GoodnessVerdict};
use sasakit::cy::KernelLattice;
use sasakit::json::{ser_bigint, ser_bigint_rows, ser_matrix, ser_rational_vec};
use sasakit::{IntMatrix, Rational, TopologyReport};

pub const FLOAT_PRECISION: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", FLOAT_PRECISION - 1, x)
        .parse()
        .expect("formatted float parses")
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn ser_f64_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    v.iter().map(|x| round_sig(*x)).collect::<Vec<_>>().serialize(s)
}

fn ser_opt_rational_vec<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_rational_vec(v, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_matrix<S: Serializer>(m: &Option<IntMatrix>, s: S) -> Result<S::Ok, S::Error> {
    match m {
        Some(m) => ser_matrix(m, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_rows<S: Serializer>(m: &Option<Vec<Vec<BigInt>>>, s: S) -> Result<S::Ok, S::Error> {
    match m {
        Some(m) => ser_bigint_rows(m, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_bigint<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_bigint(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Serialize)]
pub struct InputEcho {
    pub path: String,
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

#[derive(Debug, Serialize)]
pub struct ValidationStage {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rays: Vec<ExtremeRay>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic_order: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct CyStage {
    pub present: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_rational_vec"
    )]
    pub gamma: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_bigint")]
    pub height: Option<BigInt>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_matrix")]
    pub normalizer: Option<IntMatrix>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_rows")]
    pub normalized_normals: Option<Vec<Vec<BigInt>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelLattice>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StartResult {
    pub index: usize,
    #[serde(serialize_with = "ser_f64_vec")]
    pub start: Vec<f64>,
    #[serde(serialize_with = "ser_f64_vec")]
    pub xi: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub volume: f64,
    pub iterations: usize,
}

#[derive(Debug, Serialize)]
pub struct CrossCheck {
    pub method: &'static str,
    #[serde(serialize_with = "ser_f64_vec")]
    pub xi: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub volume: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_component_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct ReebStage {
    #[serde(serialize_with = "ser_f64_vec")]
    pub xi: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub volume: f64,
    #[serde(serialize_with = "ser_f64")]
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Small-denominator rational matching each component, if any.
    pub rational_components: Vec<Option<String>>,
    pub quasi_regular: bool,
    pub cross_check: CrossCheck,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<StartResult>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_f64")]
    pub start_spread: Option<f64>,
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Serialize)]
pub struct GridStage {
    pub path: String,
    pub rows: usize,
    pub potential: &'static str,
    #[serde(serialize_with = "ser_f64")]
    pub max_roundtrip_residual: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_hessian_inverse_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_f64")]
    pub max_identity_residual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RayStage {
    pub path: String,
    pub rays: usize,
    pub samples_per_ray: usize,
}

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub float_precision: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goodness: Option<GoodnessVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cy: Option<CyStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reeb: Option<ReebStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential_grid: Option<GridStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_rays: Option<RayStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<&'static str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Serialize)]
pub struct ErrorInfo {
    pub exit_code: i32,
    pub message: String,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: "sasakit",
            version: env!("CARGO_PKG_VERSION"),
            command,
            float_precision: FLOAT_PRECISION,
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Continued-fraction search for `p/q` with `q <= max_den` and
/// `|x - p/q| <= tol`.
pub fn small_rational(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i64;
        let h = a.checked_mul(h1)?.checked_add(h0)?;
        let k = a.checked_mul(k1)?.checked_add(k0)?;
        if k > max_den {
            return None;
        }
        if (x - h as f64 / k as f64).abs() <= tol {
            return Some((h, k));
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}
