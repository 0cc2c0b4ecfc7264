//! Run configuration and result documents.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::ensembles::EnsembleId;
use crate::error::{PfrmtError, Result};
use crate::kernels::{Diagnostics, Regime};
use crate::scalar::Precision;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pfaffian,
    OracleQuadrature,
    OracleMc,
    All,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pfaffian => "pfaffian",
            Method::OracleQuadrature => "oracle-quadrature",
            Method::OracleMc => "oracle-mc",
            Method::All => "all",
        }
    }

    fn parse(s: &str) -> Option<Method> {
        Some(match s {
            "pfaffian" => Method::Pfaffian,
            "oracle-quadrature" => Method::OracleQuadrature,
            "oracle-mc" => Method::OracleMc,
            "all" => Method::All,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub ensemble: EnsembleId,
    /// Matrix dimension for β=1, quaternion dimension for β=4.
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    pub kappa1: Vec<Complex64>,
    pub kappa2: Vec<Complex64>,
    pub method: Method,
    pub precision: Precision,
    pub seed: u64,
    pub quadrature_nodes: usize,
    pub mc_samples: u64,
    pub normalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ensemble: EnsembleId::GaussBeta1,
            n: 1,
            nu: None,
            kappa1: vec![],
            kappa2: vec![],
            method: Method::Pfaffian,
            precision: Precision::Double,
            seed: 0,
            quadrature_nodes: 128,
            mc_samples: 100_000,
            normalize: true,
            output: None,
        }
    }
}

fn bad(field: impl Into<String>, message: impl Into<String>) -> PfrmtError {
    PfrmtError::Config { field: field.into(), message: message.into() }
}

fn uint(v: &Value, field: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| bad(field, "expected a non-negative integer"))
}

fn kappas(v: &Value, field: &str) -> Result<Vec<Complex64>> {
    let arr = v.as_array().ok_or_else(|| bad(field, "expected an array of [re, im] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(i, z)| {
            let path = format!("{field}[{i}]");
            let pair = z.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad(&path, "expected [re, im]"))?;
            let mut parts = [0.0; 2];
            for (j, x) in pair.iter().enumerate() {
                parts[j] = x
                    .as_f64()
                    .filter(|f| f.is_finite())
                    .ok_or_else(|| bad(format!("{path}[{j}]"), "expected a finite number"))?;
            }
            Ok(Complex64::new(parts[0], parts[1]))
        })
        .collect()
}

impl RunConfig {
    /// Parses and validates a JSON document; errors name the failing field path.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let v: Value = serde_json::from_str(text).map_err(|e| bad("$", format!("invalid JSON: {e}")))?;
        let obj = v.as_object().ok_or_else(|| bad("$", "expected an object"))?;
        Self::from_object(obj)
    }

    fn from_object(obj: &Map<String, Value>) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        for (key, v) in obj {
            match key.as_str() {
                "ensemble" => {
                    let s = v.as_str().ok_or_else(|| bad("ensemble", "expected a string"))?;
                    c.ensemble = s.parse().map_err(|_| bad("ensemble", format!("unknown ensemble {s:?}")))?;
                }
                "N" => c.n = uint(v, "N")? as usize,
                "nu" => {
                    if !v.is_null() {
                        c.nu = Some(u32::try_from(uint(v, "nu")?).map_err(|_| bad("nu", "too large"))?);
                    }
                }
                "kappa1" => c.kappa1 = kappas(v, "kappa1")?,
                "kappa2" => c.kappa2 = kappas(v, "kappa2")?,
                "method" => {
                    let s = v.as_str().ok_or_else(|| bad("method", "expected a string"))?;
                    c.method = Method::parse(s)
                        .ok_or_else(|| bad("method", "expected pfaffian, oracle-quadrature, oracle-mc or all"))?;
                }
                "precision" => {
                    c.precision = match v.as_str() {
                        Some("double") => Precision::Double,
                        Some("extended") => Precision::Extended,
                        _ => return Err(bad("precision", "expected \"double\" or \"extended\"")),
                    }
                }
                "seed" => c.seed = uint(v, "seed")?,
                "quadrature_nodes" => c.quadrature_nodes = uint(v, "quadrature_nodes")? as usize,
                "mc_samples" => c.mc_samples = uint(v, "mc_samples")?,
                "normalize" => c.normalize = v.as_bool().ok_or_else(|| bad("normalize", "expected a boolean"))?,
                "output" => {
                    if !v.is_null() {
                        c.output = Some(PathBuf::from(v.as_str().ok_or_else(|| bad("output", "expected a path string"))?));
                    }
                }
                other => return Err(bad(other, "unknown field")),
            }
        }
        for required in ["ensemble", "N"] {
            if !obj.contains_key(required) {
                return Err(bad(required, "missing required field"));
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(bad("N", "must be positive"));
        }
        if !self.ensemble.is_gauss() && self.nu.is_none() {
            return Err(bad("nu", "required for laguerre ensembles"));
        }
        for (i, k) in self.kappa1.iter().enumerate() {
            if k.im == 0.0 {
                return Err(bad(format!("kappa1[{i}]"), "denominator shifts need a nonzero imaginary part"));
            }
            if self.kappa1[..i].contains(k) {
                return Err(bad(format!("kappa1[{i}]"), "repeats an earlier entry"));
            }
        }
        for (i, k) in self.kappa2.iter().enumerate() {
            if self.kappa2[..i].contains(k) {
                return Err(bad(format!("kappa2[{i}]"), "repeats an earlier entry"));
            }
            if self.kappa1.contains(k) {
                return Err(bad(format!("kappa2[{i}]"), "coincides with a kappa1 entry"));
            }
        }
        if self.quadrature_nodes < 2 {
            return Err(bad("quadrature_nodes", "need at least 2"));
        }
        if self.mc_samples < 2 {
            return Err(bad("mc_samples", "need at least 2"));
        }
        Ok(())
    }
}

/// One method's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    /// Normalized value when `normalize` is set, raw value otherwise
    /// (Monte Carlo always reports the normalized average).
    pub value: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Complex64>,
    pub normalized: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<i64>,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub a: Method,
    pub b: Method,
    /// Relative deviation of the normalized values.
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: String,
    pub library_version: String,
    pub config: RunConfig,
    pub results: Vec<MethodResult>,
    pub deviations: Vec<Deviation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

impl RunResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result is serializable")
    }

    /// Parses a result document, rejecting unknown major schema versions.
    pub fn from_json(text: &str) -> Result<RunResult> {
        let v: Value = serde_json::from_str(text).map_err(|e| bad("$", format!("invalid JSON: {e}")))?;
        let ver = v.get("schema_version").and_then(Value::as_str).ok_or_else(|| bad("schema_version", "missing"))?;
        let major = ver.split('.').next().unwrap_or("");
        if major != SCHEMA_VERSION.split('.').next().unwrap_or("") {
            return Err(bad("schema_version", format!("unsupported major version {ver}")));
        }
        serde_json::from_value(v).map_err(|e| bad("$", e.to_string()))
    }
}
