//! Local scoring rules that depend on the forecast density only through its value and
//! derivatives at the outcome.
//!
//! Both rules here are of order two and are unchanged when log p is shifted by a
//! constant, so they apply to unnormalised densities. The tail condition
//! ‖∇ log p(x)‖ → 0 as ‖x‖ → ∞ is assumed and not checked.

use crate::error::{check_finite, invalid, Error, Result};
use crate::forecast::DensityOracle;
use crate::value::{Method, ScoreFlag, ScoreValue};

/// First and second derivatives of log p at the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityDerivatives {
    /// ∇ log p(y).
    pub gradient: Vec<f64>,
    /// Δ log p(y).
    pub laplacian: f64,
}

impl DensityDerivatives {
    fn validate(&self, dim: usize) -> Result<()> {
        if self.gradient.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.gradient.len(),
            });
        }
        check_finite(&self.gradient, "log-density gradient")?;
        check_finite(&[self.laplacian], "log-density Laplacian")
    }

    fn hyvarinen(&self) -> f64 {
        self.laplacian + 0.5 * self.gradient.iter().map(|g| g * g).sum::<f64>()
    }
}

/// Analytic derivatives from the oracle.
pub fn analytic_derivatives(f: &DensityOracle, y: &[f64]) -> Result<DensityDerivatives> {
    let (Some(gradient), Some(laplacian)) = (f.gradient(y), f.laplacian(y)) else {
        return Err(Error::Unsupported(
            "density oracle has no analytic gradient/Laplacian".into(),
        ));
    };
    let d = DensityDerivatives {
        gradient,
        laplacian,
    };
    d.validate(f.dim())?;
    Ok(d)
}

/// Default finite-difference step, ε^{1/3} max(1, |y|).
pub fn default_step(y: &[f64]) -> f64 {
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    f64::EPSILON.cbrt() * scale
}

/// Central-difference derivatives of log p on a (2d + 1)-point stencil.
pub fn finite_difference_derivatives(
    f: &DensityOracle,
    y: &[f64],
    h: f64,
) -> Result<DensityDerivatives> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    if y.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: y.len(),
        });
    }
    let f0 = f.log_density(y);
    if !f0.is_finite() {
        return Err(Error::Numeric(format!("log density not finite at {y:?}")));
    }
    let mut gradient = Vec::with_capacity(y.len());
    let mut laplacian = 0.0;
    let mut probe = y.to_vec();
    for i in 0..y.len() {
        probe[i] = y[i] + h;
        let fp = f.log_density(&probe);
        probe[i] = y[i] - h;
        let fm = f.log_density(&probe);
        probe[i] = y[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Numeric(
                "log density not finite on the stencil".into(),
            ));
        }
        gradient.push((fp - fm) / (2.0 * h));
        laplacian += ((fp - f0) + (fm - f0)) / (h * h);
    }
    Ok(DensityDerivatives {
        gradient,
        laplacian,
    })
}

/// Hyvärinen score Δ log p(y) + ½ ‖∇ log p(y)‖² from analytic derivatives.
pub fn hyvarinen_score(f: &DensityOracle, y: &[f64]) -> Result<ScoreValue> {
    check_finite(y, "observation")?;
    let d = analytic_derivatives(f, y)?;
    ScoreValue::exact(d.hyvarinen(), Method::ClosedForm)
}

/// Hyvärinen score with finite-difference derivatives of the log density.
/// `h = None` uses [`default_step`].
pub fn hyvarinen_score_fd(f: &DensityOracle, y: &[f64], h: Option<f64>) -> Result<ScoreValue> {
    check_finite(y, "observation")?;
    let h = h.unwrap_or_else(|| default_step(y));
    let d = finite_difference_derivatives(f, y, h)?;
    ScoreValue::exact(d.hyvarinen(), Method::NumericQuadrature)
}

/// log cosh z computed as |z| + log(1 + e^{−2|z|}) − log 2.
fn log_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Log-cosh score −log cosh z₁ + z₁ tanh z₁ + z₂ (1 − tanh² z₁), with
/// z₁ = (log p)'(y) and z₂ = (log p)''(y).
///
/// The caller asserts the regularity conditions under which this rule is proper.
pub fn logcosh_score(z1: f64, z2: f64) -> Result<ScoreValue> {
    if z1.is_nan() || z2.is_nan() {
        return Err(Error::NaN("log-cosh arguments"));
    }
    check_finite(&[z1, z2], "log-cosh arguments")?;
    let t = z1.tanh();
    let v = -log_cosh(z1) + z1 * t + z2 * (1.0 - t * t);
    Ok(ScoreValue::exact(v, Method::ClosedForm)?.with_flag(ScoreFlag::UserAssertsRegularity))
}

/// Log-cosh score of a univariate density oracle at `y`, using analytic derivatives.
pub fn logcosh_score_density(f: &DensityOracle, y: f64) -> Result<ScoreValue> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    let d = analytic_derivatives(f, &[y])?;
    logcosh_score(d.gradient[0], d.laplacian)
}
