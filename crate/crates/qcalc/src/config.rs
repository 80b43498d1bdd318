//! Config-file schemas for the CLI: coefficient bundles, charts, metrics,
//! curves, Clifford connections and geodesic problems, all given as tables
//! of index keys ("k,l,m", 1-based) to polynomial strings. Files may be
//! TOML or JSON; the format is inferred from the extension, with both
//! attempted for unknown extensions.

use crate::clifford::curvature::CliffordConnection;
use crate::clifford::CliffordElement;
use crate::covariant::{Chart, ConnectionBundle, CovariantError, GeodesicCoefficients, Tensor3, Tensor4};
use crate::dim1::{CurveExpr, Dim1Error};
use crate::symfun::PolyFun;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::collections::BTreeMap;

const N3: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: String },
    #[error("bad index key '{key}': expected {arity} comma-separated indices in 1..={n}")]
    BadKey { key: String, arity: usize, n: usize },
    #[error("bad entry at '{key}': {err}")]
    BadEntry { key: String, err: String },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Covariant(#[from] CovariantError),
    #[error(transparent)]
    Dim1(#[from] Dim1Error),
}

fn parse_key(key: &str, arity: usize, n: usize) -> Result<Vec<usize>, ConfigError> {
    let bad = || ConfigError::BadKey { key: key.to_string(), arity, n };
    let parts: Vec<usize> = key
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if parts.len() != arity || parts.iter().any(|&i| i == 0 || i > n) {
        return Err(bad());
    }
    Ok(parts.iter().map(|&i| i - 1).collect())
}

fn parse_poly(key: &str, n: usize, s: &str) -> Result<PolyFun, ConfigError> {
    PolyFun::parse(N3, n, s)
        .map_err(|e| ConfigError::BadEntry { key: key.to_string(), err: e.to_string() })
}

fn tensor3(table: &BTreeMap<String, String>, n: usize) -> Result<Tensor3, ConfigError> {
    let mut t = Tensor3::zero(n);
    for (key, s) in table {
        let idx = parse_key(key, 3, n)?;
        t.set(idx[0], idx[1], idx[2], parse_poly(key, n, s)?);
    }
    Ok(t)
}

fn tensor4(table: &BTreeMap<String, String>, n: usize) -> Result<Tensor4, ConfigError> {
    let mut t = Tensor4::zero(n);
    for (key, s) in table {
        let idx = parse_key(key, 4, n)?;
        t.set(idx[0], idx[1], idx[2], idx[3], parse_poly(key, n, s)?);
    }
    Ok(t)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub forward: Vec<String>,
    pub inverse: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub n: usize,
    #[serde(default)]
    pub gamma: BTreeMap<String, String>,
    #[serde(default)]
    pub bcoef: BTreeMap<String, String>,
    #[serde(default)]
    pub ccoef: BTreeMap<String, String>,
    pub chart: Option<ChartConfig>,
}

impl BundleConfig {
    pub fn bundle(&self) -> Result<ConnectionBundle, ConfigError> {
        Ok(ConnectionBundle::new(
            tensor3(&self.gamma, self.n)?,
            tensor3(&self.bcoef, self.n)?,
            tensor4(&self.ccoef, self.n)?,
        ))
    }

    pub fn chart(&self) -> Result<Option<Chart>, ConfigError> {
        let Some(cfg) = &self.chart else { return Ok(None) };
        let parse_all = |label: &str, v: &[String]| -> Result<Vec<PolyFun>, ConfigError> {
            v.iter()
                .enumerate()
                .map(|(i, s)| parse_poly(&format!("chart.{label}[{i}]"), self.n, s))
                .collect()
        };
        let forward = parse_all("forward", &cfg.forward)?;
        let inverse = parse_all("inverse", &cfg.inverse)?;
        Ok(Some(Chart::new(forward, inverse)?))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub n: usize,
    #[serde(default)]
    pub ef: BTreeMap<String, String>,
    #[serde(default)]
    pub g3: BTreeMap<String, String>,
    #[serde(default)]
    pub gamma: BTreeMap<String, String>,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub a0: Vec<f64>,
    pub lambda: [f64; 2],
    pub step: f64,
}

impl GeodesicConfig {
    pub fn coefficients(&self) -> Result<GeodesicCoefficients, ConfigError> {
        Ok(GeodesicCoefficients::new(
            tensor3(&self.ef, self.n)?,
            tensor4(&self.g3, self.n)?,
            tensor3(&self.gamma, self.n)?,
        ))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthConfig {
    pub metric: Vec<Vec<String>>,
    pub curve: Vec<String>,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl LengthConfig {
    pub fn metric_polys(&self) -> Result<Vec<Vec<PolyFun>>, ConfigError> {
        let n = self.curve.len();
        if self.metric.len() != n || self.metric.iter().any(|r| r.len() != n) {
            return Err(ConfigError::Shape(format!(
                "metric must be {n}x{n} to match the curve dimension"
            )));
        }
        self.metric
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| parse_poly(&format!("metric[{i}][{j}]"), n, s))
                    .collect()
            })
            .collect()
    }

    pub fn curve_exprs(&self) -> Result<Vec<CurveExpr>, ConfigError> {
        self.curve.iter().map(|s| Ok(CurveExpr::parse(s)?)).collect()
    }
}

/// One normal-ordered term of a Clifford element: generator exponents and a
/// scalar written in the polynomial grammar with no variables (constants,
/// fractions and q-powers).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordTermConfig {
    pub word: Vec<u8>,
    pub coeff: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordConnectionConfig {
    pub p: usize,
    #[serde(rename = "N")]
    pub n_order: u32,
    pub components: Vec<Vec<CliffordTermConfig>>,
}

impl CliffordConnectionConfig {
    pub fn connection(&self) -> Result<CliffordConnection, ConfigError> {
        if self.components.len() != self.p {
            return Err(ConfigError::Shape(format!(
                "{} component lists for p = {}",
                self.components.len(),
                self.p
            )));
        }
        let mut comps = Vec::with_capacity(self.p);
        for (k, terms) in self.components.iter().enumerate() {
            let mut el = CliffordElement::zero(self.p, self.n_order);
            for (j, term) in terms.iter().enumerate() {
                let key = format!("components[{k}][{j}]");
                if term.word.len() != self.p {
                    return Err(ConfigError::BadEntry {
                        key,
                        err: format!("word must list {} exponents", self.p),
                    });
                }
                let c = PolyFun::parse(self.n_order, 0, &term.coeff)
                    .map_err(|e| ConfigError::BadEntry { key: key.clone(), err: e.to_string() })?
                    .constant_part();
                let mono =
                    CliffordElement::monomial(self.p, self.n_order, term.word.clone());
                el = el.add(&mono.scale(&c));
            }
            comps.push(el);
        }
        CliffordConnection::new(comps)
            .map_err(|e| ConfigError::Shape(e.to_string()))
    }
}

pub fn from_str<T: DeserializeOwned>(text: &str, path_hint: &str) -> Result<T, ConfigError> {
    let ext = path_hint.rsplit('.').next().unwrap_or("");
    match ext {
        "toml" => toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string())),
        "json" => serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string())),
        _ => toml::from_str(text).or_else(|te| {
            serde_json::from_str(text).map_err(|je| {
                ConfigError::Parse(format!("not TOML ({te}) and not JSON ({je})"))
            })
        }),
    }
}

pub fn from_path<T: DeserializeOwned>(path: &str) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.to_string(), err: e.to_string() })?;
    from_str(&text, path)
}
