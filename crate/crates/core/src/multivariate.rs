//! Scores for vector-valued outcomes.

use crate::error::{check_finite, invalid, Error, Result};
use crate::forecast::Ensemble;
use crate::kernel::{check_variogram_weights, kernel_score_exact, variogram_weight, Kernel};
use crate::linalg::Cholesky;
use crate::univariate::EnsembleVariant;
use crate::value::{Method, ScoreValue};

/// Energy score of an ensemble: the kernel score of ‖x − y‖^β.
///
/// `norm_alpha` selects an ℓ_α norm in place of the Euclidean one; α < 1 gives a
/// quasi-norm and the result is flagged accordingly.
pub fn energy_score(
    members: &Ensemble,
    y: &[f64],
    beta: f64,
    variant: EnsembleVariant,
    norm_alpha: Option<f64>,
) -> Result<ScoreValue> {
    check_finite(y, "observation")?;
    let h = Kernel::energy_with_norm(beta, norm_alpha.unwrap_or(2.0))?;
    kernel_score_exact(&h, members, y, variant)
}

/// Variogram score of order `p`:
/// Σᵢⱼ wᵢⱼ (|yᵢ − yⱼ|^p − E|Xᵢ − Xⱼ|^p)².
///
/// Without explicit weights, wᵢⱼ = 1 for i ≠ j and 0 on the diagonal.
pub fn variogram_score(
    members: &Ensemble,
    y: &[f64],
    p: f64,
    weights: Option<&[Vec<f64>]>,
) -> Result<ScoreValue> {
    check_finite(y, "observation")?;
    let d = y.len();
    if members.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: members.dim(),
            found: d,
        });
    }
    if d < 2 {
        return Err(invalid("variogram score needs dimension at least 2"));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid(format!(
            "variogram order must be positive, got {p}"
        )));
    }
    if let Some(w) = weights {
        check_variogram_weights(w, d)?;
    }
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            let w = variogram_weight(weights, i, j);
            if w == 0.0 {
                continue;
            }
            let expected: f64 = members
                .members()
                .iter()
                .enumerate()
                .map(|(k, x)| members.weight(k) * (x[i] - x[j]).abs().powf(p))
                .sum();
            let diff = (y[i] - y[j]).abs().powf(p) - expected;
            total += w * diff * diff;
        }
    }
    ScoreValue::exact(total, Method::NaiveExact)
}

/// Dawid–Sebastiani score log det Σ + (y − m)ᵀ Σ⁻¹ (y − m).
pub fn dawid_sebastiani(mean: &[f64], cov: &[Vec<f64>], y: &[f64]) -> Result<ScoreValue> {
    check_finite(mean, "mean")?;
    check_finite(y, "observation")?;
    if mean.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            found: y.len(),
        });
    }
    if cov.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            found: cov.len(),
        });
    }
    let chol = Cholesky::new(cov)?;
    let r: Vec<f64> = y.iter().zip(mean).map(|(a, b)| a - b).collect();
    ScoreValue::exact(chol.log_det() + chol.quad_form(&r), Method::ClosedForm)
}

/// Dawid–Sebastiani score with the ensemble mean and unbiased sample covariance.
/// Member weights are ignored; the moments are plain sample moments.
pub fn dawid_sebastiani_from_ensemble(members: &Ensemble, y: &[f64]) -> Result<ScoreValue> {
    let (mean, cov) = sample_moments(members)?;
    dawid_sebastiani(&mean, &cov, y)
}

pub(crate) fn sample_moments(members: &Ensemble) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = members.len();
    let d = members.dim();
    if n <= d {
        return Err(Error::EnsembleTooSmall {
            required: d + 1,
            found: n,
        });
    }
    let nf = n as f64;
    let mean: Vec<f64> = (0..d)
        .map(|i| members.members().iter().map(|x| x[i]).sum::<f64>() / nf)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for x in members.members() {
        for i in 0..d {
            for j in 0..=i {
                cov[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            cov[i][j] /= nf - 1.0;
            cov[j][i] = cov[i][j];
        }
    }
    Ok((mean, cov))
}
