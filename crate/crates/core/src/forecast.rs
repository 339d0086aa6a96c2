//! Forecast and observation data model.
//!
//! A [`Forecast`] is one of four representations: a categorical probability vector, a
//! (weighted) ensemble of points, a parametric family, or a log-density oracle known up
//! to an additive constant. Records are exchanged as JSON objects, one per line:
//!
//! ```text
//! {"type":"categorical","probs":[0.2,0.8]}
//! {"type":"ensemble","members":[0.1,0.4,2.0],"weights":[0.5,0.25,0.25]}
//! {"type":"normal","mu":0,"sigma":1}
//! {"type":"mvnormal","mean":[0,0],"cov":[[1,0],[0,1]]}
//! ```
//!
//! Observations are a number, an array of numbers, or `{"class":k}`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_finite, invalid, Error, Result};
use crate::linalg::Cholesky;

/// Tolerance on `|Σp − 1|` for probability and weight vectors. Violations are rejected,
/// never renormalised.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Deterministic generator used for all sampling: ChaCha20 keyed by `seed`
/// (via `seed_from_u64`) on stream `stream`.
///
/// The generator and its seeding are fixed for a release; changing either changes
/// every seeded output of the crate.
pub fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// A realised outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Scalar(f64),
    Vector(Vec<f64>),
    Class(usize),
}

impl Observation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Observation::Scalar(x) => check_finite(&[*x], "observation"),
            Observation::Vector(v) => {
                if v.is_empty() {
                    return Err(Error::Schema("observation vector is empty".into()));
                }
                check_finite(v, "observation")
            }
            Observation::Class(_) => Ok(()),
        }
    }

    /// The outcome as a point of ℝᵈ. Classes map to their index.
    pub fn as_point(&self) -> Vec<f64> {
        match self {
            Observation::Scalar(x) => vec![*x],
            Observation::Vector(v) => v.clone(),
            Observation::Class(k) => vec![*k as f64],
        }
    }

    pub fn as_scalar(&self) -> Result<f64> {
        match self {
            Observation::Scalar(x) => Ok(*x),
            Observation::Vector(v) if v.len() == 1 => Ok(v[0]),
            Observation::Class(k) => Ok(*k as f64),
            Observation::Vector(v) => Err(Error::DimensionMismatch {
                expected: 1,
                found: v.len(),
            }),
        }
    }

    /// Category index. Non-negative integral scalars are accepted as classes.
    pub fn as_class(&self) -> Result<usize> {
        match self {
            Observation::Class(k) => Ok(*k),
            Observation::Scalar(x) if *x >= 0.0 && x.fract() == 0.0 => Ok(*x as usize),
            _ => Err(Error::Schema(format!(
                "expected a category index, got {self:?}"
            ))),
        }
    }
}

/// Probability vector over categories `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_simplex(&probs, "probs")?;
        Ok(Categorical { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    /// Probability of class `k`; errors if `k` is outside the declared cardinality.
    pub fn prob(&self, k: usize) -> Result<f64> {
        self.probs
            .get(k)
            .copied()
            .ok_or_else(|| Error::Schema(format!("class {k} outside 0..{}", self.probs.len())))
    }
}

fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Simplex(format!("{what} is empty")));
    }
    if p.iter().any(|v| v.is_nan()) {
        return Err(Error::NaN("probability vector"));
    }
    if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Simplex(format!("{what} entry {v} outside [0,1]")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Simplex(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// Finite collection of points in ℝᵈ with optional probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

impl Ensemble {
    pub fn new(members: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EnsembleTooSmall {
                required: 1,
                found: 0,
            });
        }
        let d = members[0].len();
        if d == 0 {
            return Err(Error::Schema(
                "ensemble members must have dimension > 0".into(),
            ));
        }
        for m in &members {
            if m.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.len(),
                });
            }
            check_finite(m, "ensemble member")?;
        }
        if let Some(w) = &weights {
            if w.len() != members.len() {
                return Err(Error::DimensionMismatch {
                    expected: members.len(),
                    found: w.len(),
                });
            }
            check_simplex(w, "weights")?;
        }
        Ok(Ensemble { members, weights })
    }

    /// Uniformly weighted ensemble of scalars.
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| vec![*v]).collect(), None)
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].len()
    }

    /// Explicit weights, if any were given.
    pub fn explicit_weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.is_none()
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.members.len() as f64,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Member values when `dim() == 1`.
    pub fn scalars(&self) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim(),
            });
        }
        Ok(self.members.iter().map(|m| m[0]).collect())
    }
}

/// Multivariate normal with validated covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MvNormal {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    chol: Cholesky,
}

impl MvNormal {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::Schema("mvnormal mean is empty".into()));
        }
        check_finite(&mean, "mvnormal mean")?;
        if cov.len() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: cov.len(),
            });
        }
        let chol = Cholesky::new(&cov)?;
        Ok(MvNormal { mean, cov, chol })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &[Vec<f64>] {
        &self.cov
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Log density at `y`.
    pub fn log_pdf(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        let r: Vec<f64> = y.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let d = self.dim() as f64;
        Ok(-0.5
            * (d * (2.0 * std::f64::consts::PI).ln()
                + self.chol.log_det()
                + self.chol.quad_form(&r)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parametric {
    Normal { mu: f64, sigma: f64 },
    MvNormal(MvNormal),
}

impl Parametric {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        check_finite(&[mu], "normal mean")?;
        if sigma.is_nan() {
            return Err(Error::NaN("normal sigma"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveScale(sigma));
        }
        Ok(Parametric::Normal { mu, sigma })
    }

    pub fn dim(&self) -> usize {
        match self {
            Parametric::Normal { .. } => 1,
            Parametric::MvNormal(m) => m.dim(),
        }
    }
}

type LogDensityFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Log density known up to an additive constant, with optional analytic derivatives.
///
/// Oracles must be pure functions: they are shared across threads.
#[derive(Clone)]
pub struct DensityOracle {
    dim: usize,
    log_density: Arc<LogDensityFn>,
    gradient: Option<Arc<GradientFn>>,
    laplacian: Option<Arc<LogDensityFn>>,
    normalized: bool,
}

impl DensityOracle {
    /// Unnormalised oracle from a log density.
    pub fn new(dim: usize, log_density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        DensityOracle {
            dim,
            log_density: Arc::new(log_density),
            gradient: None,
            laplacian: None,
            normalized: false,
        }
    }

    /// Attaches ∇ log p and Δ log p.
    pub fn with_derivatives(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        laplacian: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self.laplacian = Some(Arc::new(laplacian));
        self
    }

    /// Declares that `log_density` integrates to one.
    pub fn normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    /// Returns a copy whose log density is shifted by `c`. Derivatives are unchanged.
    pub fn shifted(&self, c: f64) -> Self {
        let base = self.log_density.clone();
        DensityOracle {
            dim: self.dim,
            log_density: Arc::new(move |y: &[f64]| base(y) + c),
            gradient: self.gradient.clone(),
            laplacian: self.laplacian.clone(),
            normalized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn log_density(&self, y: &[f64]) -> f64 {
        (self.log_density)(y)
    }

    pub fn gradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(y))
    }

    pub fn laplacian(&self, y: &[f64]) -> Option<f64> {
        self.laplacian.as_ref().map(|l| l(y))
    }

    /// Normal N(μ, σ²) in one dimension, with analytic derivatives.
    pub fn normal(mu: f64, sigma: f64) -> Self {
        let s2 = sigma * sigma;
        let c = -0.5 * (2.0 * std::f64::consts::PI * s2).ln();
        DensityOracle::new(1, move |y| c - (y[0] - mu).powi(2) / (2.0 * s2))
            .with_derivatives(move |y| vec![-(y[0] - mu) / s2], move |_| -1.0 / s2)
            .normalized()
    }

    /// Two-component normal mixture `w N(μ₁,σ₁²) + (1−w) N(μ₂,σ₂²)` with analytic
    /// derivatives.
    pub fn normal_mixture(w: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Self {
        let comp = move |y: f64| {
            let a = w * gauss_pdf(y, mu1, sigma1);
            let b = (1.0 - w) * gauss_pdf(y, mu2, sigma2);
            // p, p', p''
            let da = -a * (y - mu1) / (sigma1 * sigma1);
            let db = -b * (y - mu2) / (sigma2 * sigma2);
            let dda = a * (((y - mu1) / (sigma1 * sigma1)).powi(2) - 1.0 / (sigma1 * sigma1));
            let ddb = b * (((y - mu2) / (sigma2 * sigma2)).powi(2) - 1.0 / (sigma2 * sigma2));
            (a + b, da + db, dda + ddb)
        };
        DensityOracle::new(1, move |y| comp(y[0]).0.ln())
            .with_derivatives(
                move |y| {
                    let (p, dp, _) = comp(y[0]);
                    vec![dp / p]
                },
                move |y| {
                    let (p, dp, ddp) = comp(y[0]);
                    ddp / p - (dp / p).powi(2)
                },
            )
            .normalized()
    }
}

fn gauss_pdf(y: f64, mu: f64, sigma: f64) -> f64 {
    let z = (y - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

impl fmt::Debug for DensityOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityOracle")
            .field("dim", &self.dim)
            .field("gradient", &self.gradient.is_some())
            .field("laplacian", &self.laplacian.is_some())
            .field("normalized", &self.normalized)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Forecast {
    Categorical(Categorical),
    Ensemble(Ensemble),
    Parametric(Parametric),
    Density(DensityOracle),
}

impl PartialEq for Forecast {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Forecast::Categorical(a), Forecast::Categorical(b)) => a == b,
            (Forecast::Ensemble(a), Forecast::Ensemble(b)) => a == b,
            (Forecast::Parametric(a), Forecast::Parametric(b)) => a == b,
            _ => false,
        }
    }
}

impl Forecast {
    pub fn categorical(probs: Vec<f64>) -> Result<Self> {
        Categorical::new(probs).map(Forecast::Categorical)
    }

    pub fn ensemble(values: &[f64]) -> Result<Self> {
        Ensemble::univariate(values).map(Forecast::Ensemble)
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Parametric::normal(mu, sigma).map(Forecast::Parametric)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Forecast::Categorical(_) => "categorical",
            Forecast::Ensemble(_) => "ensemble",
            Forecast::Parametric(Parametric::Normal { .. }) => "normal",
            Forecast::Parametric(Parametric::MvNormal(_)) => "mvnormal",
            Forecast::Density(_) => "density",
        }
    }

    /// Dimension of the outcome space. Categorical forecasts count as one-dimensional.
    pub fn dim(&self) -> usize {
        match self {
            Forecast::Categorical(_) => 1,
            Forecast::Ensemble(e) => e.dim(),
            Forecast::Parametric(p) => p.dim(),
            Forecast::Density(d) => d.dim(),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON records

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PointRecord {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ForecastRecord {
    Categorical {
        probs: Vec<f64>,
    },
    Ensemble {
        members: Vec<PointRecord>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Normal {
        mu: f64,
        sigma: f64,
    },
    Mvnormal {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
}

/// Parses and validates one forecast record.
pub fn parse_forecast(record: &str) -> Result<Forecast> {
    let rec: ForecastRecord =
        serde_json::from_str(record).map_err(|e| Error::Schema(e.to_string()))?;
    match rec {
        ForecastRecord::Categorical { probs } => Forecast::categorical(probs),
        ForecastRecord::Ensemble { members, weights } => {
            let members = members
                .into_iter()
                .map(|m| match m {
                    PointRecord::Scalar(x) => vec![x],
                    PointRecord::Vector(v) => v,
                })
                .collect();
            Ensemble::new(members, weights).map(Forecast::Ensemble)
        }
        ForecastRecord::Normal { mu, sigma } => Forecast::normal(mu, sigma),
        ForecastRecord::Mvnormal { mean, cov } => {
            MvNormal::new(mean, cov).map(|m| Forecast::Parametric(Parametric::MvNormal(m)))
        }
    }
}

/// Serialises a forecast as a single-line record. Density oracles have no record form.
pub fn serialize_forecast(f: &Forecast) -> Result<String> {
    let rec = match f {
        Forecast::Categorical(c) => ForecastRecord::Categorical {
            probs: c.probs.clone(),
        },
        Forecast::Ensemble(e) => ForecastRecord::Ensemble {
            members: e
                .members
                .iter()
                .map(|m| {
                    if m.len() == 1 {
                        PointRecord::Scalar(m[0])
                    } else {
                        PointRecord::Vector(m.clone())
                    }
                })
                .collect(),
            weights: e.weights.clone(),
        },
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => ForecastRecord::Normal {
            mu: *mu,
            sigma: *sigma,
        },
        Forecast::Parametric(Parametric::MvNormal(m)) => ForecastRecord::Mvnormal {
            mean: m.mean.clone(),
            cov: m.cov.clone(),
        },
        Forecast::Density(_) => {
            return Err(Error::Unsupported(
                "density oracles cannot be serialised".into(),
            ))
        }
    };
    serde_json::to_string(&rec).map_err(|e| Error::Schema(e.to_string()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ObservationRecord {
    Scalar(f64),
    Vector(Vec<f64>),
    Class { class: usize },
}

pub fn parse_observation(record: &str) -> Result<Observation> {
    let rec: ObservationRecord = serde_json::from_str(record)
        .map_err(|_| Error::Schema(format!("invalid observation record {record:?}")))?;
    let obs = match rec {
        ObservationRecord::Scalar(x) => Observation::Scalar(x),
        ObservationRecord::Vector(v) => Observation::Vector(v),
        ObservationRecord::Class { class } => Observation::Class(class),
    };
    obs.validate()?;
    Ok(obs)
}

pub fn serialize_observation(y: &Observation) -> String {
    match y {
        Observation::Scalar(x) => serde_json::json!(x).to_string(),
        Observation::Vector(v) => serde_json::json!(v).to_string(),
        Observation::Class(k) => serde_json::json!({ "class": k }).to_string(),
    }
}

// ---------------------------------------------------------------------------
// CDF and sampling

/// Cumulative distribution function of a univariate forecast at `x`.
///
/// Categories are placed at their integer index.
pub fn forecast_cdf(f: &Forecast, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::NaN("cdf argument"));
    }
    match f {
        Forecast::Categorical(c) => Ok(c
            .probs
            .iter()
            .enumerate()
            .take_while(|(k, _)| (*k as f64) <= x)
            .map(|(_, p)| p)
            .sum::<f64>()
            .min(1.0)),
        Forecast::Ensemble(e) => {
            let xs = e.scalars()?;
            Ok(xs
                .iter()
                .enumerate()
                .filter(|(_, v)| **v <= x)
                .map(|(i, _)| e.weight(i))
                .sum::<f64>()
                .min(1.0))
        }
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
            Ok(std_normal().cdf((x - mu) / sigma))
        }
        Forecast::Parametric(Parametric::MvNormal(m)) if m.dim() == 1 => {
            Ok(std_normal().cdf((x - m.mean[0]) / m.cov[0][0].sqrt()))
        }
        Forecast::Parametric(Parametric::MvNormal(m)) => Err(Error::DimensionMismatch {
            expected: 1,
            found: m.dim(),
        }),
        Forecast::Density(_) => Err(Error::Unsupported(
            "density oracles do not provide a CDF".into(),
        )),
    }
}

pub(crate) fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Draws `m` points from `f`, deterministically in `seed`.
///
/// Ensembles are resampled with replacement according to their weights.
pub fn forecast_sample(f: &Forecast, m: usize, seed: u64) -> Result<Vec<Observation>> {
    if m == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let mut r = rng(seed, 0);
    match f {
        Forecast::Categorical(c) => Ok((0..m)
            .map(|_| Observation::Class(draw_index(&mut r, &c.probs)))
            .collect()),
        Forecast::Ensemble(e) => {
            let pick = |r: &mut ChaCha20Rng| match &e.weights {
                None => r.random_range(0..e.len()),
                Some(w) => draw_index(r, w),
            };
            Ok((0..m)
                .map(|_| {
                    let p = &e.members[pick(&mut r)];
                    if p.len() == 1 {
                        Observation::Scalar(p[0])
                    } else {
                        Observation::Vector(p.clone())
                    }
                })
                .collect())
        }
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => Ok((0..m)
            .map(|_| {
                let z: f64 = r.sample(StandardNormal);
                Observation::Scalar(mu + sigma * z)
            })
            .collect()),
        Forecast::Parametric(Parametric::MvNormal(mv)) => Ok((0..m)
            .map(|_| {
                let z: Vec<f64> = (0..mv.dim()).map(|_| r.sample(StandardNormal)).collect();
                let lz = mv.chol.mul_lower(&z);
                Observation::Vector(lz.iter().zip(&mv.mean).map(|(a, b)| a + b).collect())
            })
            .collect()),
        Forecast::Density(_) => Err(Error::Unsupported(
            "density oracles cannot be sampled".into(),
        )),
    }
}

/// Inverse-CDF draw from a probability vector. Zero-mass entries are never returned.
fn draw_index<R: Rng>(r: &mut R, probs: &[f64]) -> usize {
    let u: f64 = r.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        last = k;
        acc += p;
        if u < acc {
            return k;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_normal_record() {
        let f = parse_forecast(r#"{"type":"normal","mu":0,"sigma":1}"#).unwrap();
        assert_eq!(f, Forecast::normal(0.0, 1.0).unwrap());
    }

    #[test]
    fn parse_rejects_bad_simplex() {
        let e = parse_forecast(r#"{"type":"categorical","probs":[0.7,0.4]}"#).unwrap_err();
        assert!(matches!(e, Error::Simplex(_)));
        let e = parse_forecast(r#"{"type":"categorical","probs":[1.2,-0.2]}"#).unwrap_err();
        assert!(matches!(e, Error::Simplex(_)));
    }

    #[test]
    fn parse_ensemble_defaults_to_uniform() {
        let f = parse_forecast(r#"{"type":"ensemble","members":[0,1]}"#).unwrap();
        let Forecast::Ensemble(e) = f else { panic!() };
        assert!(e.is_uniform());
        assert_eq!(e.weights(), vec![0.5, 0.5]);
        assert_eq!(e.scalars().unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_forecast(r#"{"type":"normal","mu":0,"sigma":0}"#),
            Err(Error::NonPositiveScale(_))
        ));
        assert!(matches!(
            parse_forecast(r#"{"type":"ensemble","members":[]}"#),
            Err(Error::EnsembleTooSmall { .. })
        ));
        assert!(matches!(parse_forecast("{not json"), Err(Error::Schema(_))));
        assert!(matches!(
            parse_forecast(r#"{"type":"gamma","shape":1}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            parse_forecast(r#"{"type":"ensemble","members":[0,1],"weights":[0.6,0.6]}"#),
            Err(Error::Simplex(_))
        ));
        assert!(matches!(
            parse_forecast(r#"{"type":"mvnormal","mean":[0,0],"cov":[[1,1],[1,1]]}"#),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn observation_records() {
        assert_eq!(parse_observation("1.5").unwrap(), Observation::Scalar(1.5));
        assert_eq!(
            parse_observation("[1,2]").unwrap(),
            Observation::Vector(vec![1.0, 2.0])
        );
        assert_eq!(
            parse_observation(r#"{"class":2}"#).unwrap(),
            Observation::Class(2)
        );
        assert!(parse_observation("[]").is_err());
        assert!(parse_observation(r#""x""#).is_err());
        assert!(Observation::Scalar(1.5).as_class().is_err());
        assert_eq!(Observation::Scalar(2.0).as_class().unwrap(), 2);
    }

    #[test]
    fn categorical_class_out_of_range() {
        let c = Categorical::new(vec![0.5, 0.5]).unwrap();
        assert!(c.prob(2).is_err());
    }

    #[test]
    fn cdf_examples() {
        let e = Forecast::ensemble(&[0.0, 1.0]).unwrap();
        assert_eq!(forecast_cdf(&e, 0.5).unwrap(), 0.5);
        assert_eq!(forecast_cdf(&e, -1.0).unwrap(), 0.0);
        assert_eq!(forecast_cdf(&e, 1.0).unwrap(), 1.0);
        let n = Forecast::normal(0.0, 1.0).unwrap();
        assert!((forecast_cdf(&n, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let c = Forecast::categorical(vec![0.2, 0.3, 0.5]).unwrap();
        assert!((forecast_cdf(&c, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(forecast_cdf(&c, -0.5).unwrap(), 0.0);
        let d = Forecast::Density(DensityOracle::normal(0.0, 1.0));
        assert!(matches!(forecast_cdf(&d, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sample_point_mass_and_errors() {
        let c = Forecast::categorical(vec![1.0, 0.0]).unwrap();
        let s = forecast_sample(&c, 5, 42).unwrap();
        assert_eq!(s, vec![Observation::Class(0); 5]);
        assert!(forecast_sample(&c, 0, 1).is_err());
        let d = Forecast::Density(DensityOracle::normal(0.0, 1.0));
        assert!(forecast_sample(&d, 3, 1).is_err());
    }

    #[test]
    fn sample_normal_mean_and_determinism() {
        let f = Forecast::normal(0.0, 1.0).unwrap();
        let a = forecast_sample(&f, 10_000, 1).unwrap();
        let b = forecast_sample(&f, 10_000, 1).unwrap();
        assert_eq!(a, b);
        let mean = a.iter().map(|o| o.as_scalar().unwrap()).sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.05, "mean {mean}");
        let c = forecast_sample(&f, 10, 2).unwrap();
        assert_ne!(&a[..10], &c[..]);
    }

    #[test]
    fn mvnormal_sample_support_and_log_pdf() {
        let mv = MvNormal::new(vec![1.0, -1.0], vec![vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let f = Forecast::Parametric(Parametric::MvNormal(mv.clone()));
        let s = forecast_sample(&f, 4000, 3).unwrap();
        let m0 = s.iter().map(|o| o.as_point()[0]).sum::<f64>() / 4000.0;
        assert!((m0 - 1.0).abs() < 0.1);
        // 1-d check of log_pdf against the scalar formula
        let one = MvNormal::new(vec![0.5], vec![vec![4.0]]).unwrap();
        let expect = -0.5 * (2.0 * std::f64::consts::PI * 4.0).ln() - (1.5f64 - 0.5).powi(2) / 8.0;
        assert!((one.log_pdf(&[1.5]).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn weighted_bootstrap_respects_zero_weights() {
        let e = Ensemble::new(vec![vec![0.0], vec![5.0]], Some(vec![0.0, 1.0])).unwrap();
        let s = forecast_sample(&Forecast::Ensemble(e), 100, 9).unwrap();
        assert!(s.iter().all(|o| *o == Observation::Scalar(5.0)));
    }
}
