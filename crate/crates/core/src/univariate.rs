//! Scoring rules for real-valued and categorical outcomes.
//!
//! All scores are negatively oriented: smaller is better.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::error::{check_finite, invalid, Error, Result};
use crate::forecast::{forecast_cdf, std_normal, Categorical, Forecast, Observation, Parametric};
use crate::quadrature::simpson_halving;
use crate::value::{Method, ScoreFlag, ScoreValue};

/// Ensemble estimator for kernel scores.
///
/// `Fair` drops the diagonal of the pairwise term and is unbiased for the score of the
/// distribution the members were drawn from. `Empirical` is the exact score of the
/// ensemble viewed as a discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleVariant {
    #[default]
    Fair,
    Empirical,
}

impl EnsembleVariant {
    pub(crate) fn flag(self) -> ScoreFlag {
        match self {
            EnsembleVariant::Fair => ScoreFlag::Fair,
            EnsembleVariant::Empirical => ScoreFlag::Empirical,
        }
    }

    pub(crate) fn min_members(self) -> usize {
        match self {
            EnsembleVariant::Fair => 2,
            EnsembleVariant::Empirical => 1,
        }
    }
}

impl std::str::FromStr for EnsembleVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fair" => Ok(EnsembleVariant::Fair),
            "empirical" => Ok(EnsembleVariant::Empirical),
            other => Err(invalid(format!("unknown ensemble variant {other:?}"))),
        }
    }
}

fn check_ensemble(members: &[f64], y: f64, variant: EnsembleVariant) -> Result<()> {
    if members.iter().any(|v| v.is_nan()) || y.is_nan() {
        return Err(Error::NaN("ensemble"));
    }
    check_finite(members, "ensemble member")?;
    check_finite(&[y], "observation")?;
    if members.len() < variant.min_members() {
        return Err(Error::EnsembleTooSmall {
            required: variant.min_members(),
            found: members.len(),
        });
    }
    Ok(())
}

/// CRPS of an ensemble forecast.
///
/// Uniformly weighted ensembles use an O(n log n) sorted-sum formula; weighted ensembles
/// fall back to the O(n²) kernel form.
pub fn crps_ensemble(
    members: &[f64],
    weights: Option<&[f64]>,
    y: f64,
    variant: EnsembleVariant,
) -> Result<ScoreValue> {
    check_ensemble(members, y, variant)?;
    let value = match weights {
        None => {
            let mut xs = members.to_vec();
            xs.sort_by(f64::total_cmp);
            match variant {
                EnsembleVariant::Fair => crps_sorted_fair(&xs, y),
                EnsembleVariant::Empirical => crps_sorted_empirical(&xs, y),
            }
        }
        Some(w) => {
            if w.len() != members.len() {
                return Err(Error::DimensionMismatch {
                    expected: members.len(),
                    found: w.len(),
                });
            }
            return crps_weighted(members, w, y, variant);
        }
    };
    Ok(ScoreValue::exact(value, Method::FastExact)?.with_flag(variant.flag()))
}

/// 2/(n(n−1)) Σⱼ (x₍ⱼ₎ − y)((n−1)·1{y < x₍ⱼ₎} − j + 1), with 1-based ranks j.
fn crps_sorted_fair(xs: &[f64], y: f64) -> f64 {
    let n = xs.len() as f64;
    let s: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let above = if y < x { n - 1.0 } else { 0.0 };
            (x - y) * (above - i as f64)
        })
        .sum();
    2.0 * s / (n * (n - 1.0))
}

/// mean |x − y| − (1/n²) Σⱼ x₍ⱼ₎ (2j − n − 1).
fn crps_sorted_empirical(xs: &[f64], y: f64) -> f64 {
    let n = xs.len() as f64;
    let abs: f64 = xs.iter().map(|x| (x - y).abs()).sum::<f64>() / n;
    let spread: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| x * (2.0 * (i + 1) as f64 - n - 1.0))
        .sum();
    abs - spread / (n * n)
}

fn crps_weighted(
    members: &[f64],
    w: &[f64],
    y: f64,
    variant: EnsembleVariant,
) -> Result<ScoreValue> {
    let abs: f64 = members
        .iter()
        .zip(w)
        .map(|(x, wi)| wi * (x - y).abs())
        .sum();
    let mut cross = 0.0;
    for (i, (xi, wi)) in members.iter().zip(w).enumerate() {
        for (xj, wj) in members[i + 1..].iter().zip(&w[i + 1..]) {
            cross += 2.0 * wi * wj * (xi - xj).abs();
        }
    }
    let value = match variant {
        EnsembleVariant::Empirical => abs - 0.5 * cross,
        EnsembleVariant::Fair => {
            let norm = 1.0 - w.iter().map(|v| v * v).sum::<f64>();
            if norm <= 0.0 {
                return Err(invalid(
                    "fair estimator needs at least two weighted members",
                ));
            }
            abs - 0.5 * cross / norm
        }
    };
    Ok(ScoreValue::exact(value, Method::NaiveExact)?.with_flag(variant.flag()))
}

/// O(n²) CRPS from the kernel form, for uniformly weighted ensembles.
pub fn crps_ensemble_naive(
    members: &[f64],
    y: f64,
    variant: EnsembleVariant,
) -> Result<ScoreValue> {
    check_ensemble(members, y, variant)?;
    let n = members.len() as f64;
    let abs: f64 = members.iter().map(|x| (x - y).abs()).sum::<f64>() / n;
    let mut cross = 0.0;
    for (i, xi) in members.iter().enumerate() {
        for xj in &members[i + 1..] {
            cross += 2.0 * (xi - xj).abs();
        }
    }
    let denom = match variant {
        EnsembleVariant::Fair => 2.0 * n * (n - 1.0),
        EnsembleVariant::Empirical => 2.0 * n * n,
    };
    Ok(ScoreValue::exact(abs - cross / denom, Method::NaiveExact)?.with_flag(variant.flag()))
}

/// Closed-form CRPS of N(μ, σ²): σ [z(2Φ(z) − 1) + 2φ(z) − 1/√π], z = (y − μ)/σ.
pub fn crps_normal(mu: f64, sigma: f64, y: f64) -> Result<ScoreValue> {
    check_finite(&[mu, y], "normal parameters")?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::NonPositiveScale(sigma));
    }
    ScoreValue::exact(crps_normal_raw(mu, sigma, y), Method::ClosedForm)
}

pub(crate) fn crps_normal_raw(mu: f64, sigma: f64, y: f64) -> f64 {
    let z = (y - mu) / sigma;
    let n = std_normal();
    sigma * (z * (2.0 * n.cdf(z) - 1.0) + 2.0 * n.pdf(z) - 1.0 / PI.sqrt())
}

/// CRPS as ∫ (F(x) − 1{y ≤ x})² dx by composite Simpson quadrature.
///
/// The integral is split at the observation and, for ensembles and categorical
/// forecasts, at every jump of the CDF, so each piece has a smooth integrand. Tails are
/// truncated where F < 1e-9 or 1 − F < 1e-9.
pub fn crps_numeric(f: &Forecast, y: f64, tol: f64) -> Result<ScoreValue> {
    check_finite(&[y], "observation")?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mut breaks: Vec<f64> = match f {
        Forecast::Ensemble(e) => e.scalars()?,
        Forecast::Categorical(c) => (0..c.n()).map(|k| k as f64).collect(),
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
            let q = std_normal().inverse_cdf(1e-9);
            vec![mu + sigma * q, mu - sigma * q]
        }
        Forecast::Parametric(Parametric::MvNormal(m)) if m.dim() == 1 => {
            let q = std_normal().inverse_cdf(1e-9);
            let s = m.cov()[0][0].sqrt();
            vec![m.mean()[0] + s * q, m.mean()[0] - s * q]
        }
        _ => {
            // surfaces the right error for unsupported variants
            forecast_cdf(f, y)?;
            return Err(Error::Unsupported(
                "CRPS quadrature needs a univariate CDF".into(),
            ));
        }
    };
    breaks.push(y);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integrand = |x: f64| {
        let fx = forecast_cdf(f, x).unwrap_or(f64::NAN);
        let ind = if y <= x { 1.0 } else { 0.0 };
        (fx - ind) * (fx - ind)
    };
    let pieces = (breaks.len() - 1).max(1);
    let mut total = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        // the right end of each piece is evaluated as a left limit, so a jump of the
        // CDF or of the indicator at b does not leak into the piece
        let piece = |t: f64| {
            let x = if t >= 1.0 {
                b - (b - a) * 1e-9
            } else {
                a + (b - a) * t
            };
            integrand(x)
        };
        let r = simpson_halving(piece, 0.0, 1.0, tol / (pieces as f64 * (b - a)), 24)?;
        total += r.value * (b - a);
        err += r.error * (b - a);
    }
    if err > tol {
        return Err(Error::Numeric(format!(
            "CRPS quadrature error {err:e} above {tol:e}"
        )));
    }
    ScoreValue::exact(total, Method::NumericQuadrature)
}

/// Logarithmic score −log p(y). Zero mass or density gives +∞.
pub fn log_score(f: &Forecast, y: &Observation) -> Result<ScoreValue> {
    let logp = match f {
        Forecast::Categorical(c) => c.prob(y.as_class()?)?.ln(),
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
            let z = (y.as_scalar()? - mu) / sigma;
            -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
        }
        Forecast::Parametric(Parametric::MvNormal(m)) => m.log_pdf(&y.as_point())?,
        Forecast::Density(d) => {
            if !d.is_normalized() {
                return Err(Error::Unsupported(
                    "log score requires a normalised density".into(),
                ));
            }
            let p = y.as_point();
            if p.len() != d.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d.dim(),
                    found: p.len(),
                });
            }
            d.log_density(&p)
        }
        Forecast::Ensemble(_) => {
            return Err(Error::Unsupported("log score of an ensemble".into()));
        }
    };
    ScoreValue::exact(-logp, Method::ClosedForm)
}

/// Quadratic score −2p(y) + ∫p² dμ.
pub fn quadratic_score(f: &Forecast, y: &Observation) -> Result<ScoreValue> {
    let v = match f {
        Forecast::Categorical(c) => quadratic_categorical(c.probs(), y.as_class()?)?,
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
            let z = (y.as_scalar()? - mu) / sigma;
            let p = std_normal().pdf(z) / sigma;
            -2.0 * p + 1.0 / (2.0 * sigma * PI.sqrt())
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "quadratic score of a {} forecast",
                f.kind()
            )))
        }
    };
    ScoreValue::exact(v, Method::ClosedForm)
}

pub(crate) fn quadratic_categorical(p: &[f64], y: usize) -> Result<f64> {
    let py = *p
        .get(y)
        .ok_or_else(|| Error::Schema(format!("class {y} outside 0..{}", p.len())))?;
    Ok(-2.0 * py + p.iter().map(|v| v * v).sum::<f64>())
}

/// Binary Brier score (p − y)², with `p` the forecast probability of `y = 1`.
pub fn brier_binary(p: f64, y: usize) -> Result<ScoreValue> {
    if p.is_nan() {
        return Err(Error::NaN("probability"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Simplex(format!("probability {p} outside [0,1]")));
    }
    if y > 1 {
        return Err(Error::Schema(format!(
            "binary outcome must be 0 or 1, got {y}"
        )));
    }
    ScoreValue::exact((p - y as f64).powi(2), Method::ClosedForm)
}

/// Brier score on `n` categories, Σᵢ (pᵢ − 1{i = y})². Two categories reduce to the
/// binary form applied to p₁.
pub fn brier_score(c: &Categorical, y: usize) -> Result<ScoreValue> {
    if c.n() == 2 {
        return brier_binary(c.probs()[1], y);
    }
    c.prob(y)?;
    let v = c
        .probs()
        .iter()
        .enumerate()
        .map(|(i, p)| (p - if i == y { 1.0 } else { 0.0 }).powi(2))
        .sum();
    ScoreValue::exact(v, Method::ClosedForm)
}

/// Pseudospherical score −p(y)^{α−1} / (Σ p^α)^{1−1/α}.
pub fn pseudospherical_score(c: &Categorical, y: usize, alpha: f64) -> Result<ScoreValue> {
    ScoreValue::exact(
        pseudospherical_raw(c.probs(), y, alpha)?,
        Method::ClosedForm,
    )
}

/// Spherical score, the pseudospherical score with α = 2.
pub fn spherical_score(c: &Categorical, y: usize) -> Result<ScoreValue> {
    pseudospherical_score(c, y, 2.0)
}

pub(crate) fn pseudospherical_raw(p: &[f64], y: usize, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(invalid(format!(
            "pseudospherical alpha must exceed 1, got {alpha}"
        )));
    }
    let py = *p
        .get(y)
        .ok_or_else(|| Error::Schema(format!("class {y} outside 0..{}", p.len())))?;
    let norm: f64 = p.iter().map(|v| v.powf(alpha)).sum();
    if !(norm > 0.0) {
        return Err(invalid("Σ p^α must be positive"));
    }
    Ok(-py.powf(alpha - 1.0) / norm.powf(1.0 - 1.0 / alpha))
}

/// Threshold-weighted CRPS: the CRPS after chaining members and outcome through
/// v(x) = max(x, t).
pub fn tw_crps(members: &[f64], y: f64, t: f64, variant: EnsembleVariant) -> Result<ScoreValue> {
    if t.is_nan() {
        return Err(Error::NaN("threshold"));
    }
    let chained: Vec<f64> = members.iter().map(|x| x.max(t)).collect();
    crps_ensemble(&chained, None, y.max(t), variant)
}
