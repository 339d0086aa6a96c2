//! Forecast comparison by mean realised score, the MCB − DSC + UNC decomposition, and
//! scores induced by elicitable functionals.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{check_finite, invalid, Error, Result};
use crate::forecast::{std_normal, Categorical, Forecast, Observation, Parametric};
use crate::rule::{score, ScoringRuleSpec};
use crate::value::{ExtReal, Method, ScoreValue};
use statrs::distribution::ContinuousCDF;

fn check_aligned(forecasts: usize, obs: usize) -> Result<()> {
    if forecasts != obs {
        return Err(Error::DimensionMismatch {
            expected: forecasts,
            found: obs,
        });
    }
    if forecasts == 0 {
        return Err(invalid("no forecast/observation pairs"));
    }
    Ok(())
}

/// Scores every pair in order.
pub fn instance_scores(
    rule: &ScoringRuleSpec,
    forecasts: &[Forecast],
    obs: &[Observation],
) -> Result<Vec<f64>> {
    check_aligned(forecasts.len(), obs.len())?;
    forecasts
        .iter()
        .zip(obs)
        .map(|(f, y)| score(rule, f, y).map(|s| s.get()))
        .collect()
}

/// Arithmetic mean of the realised scores, summed left to right. +∞ propagates.
pub fn mean_score(
    rule: &ScoringRuleSpec,
    forecasts: &[Forecast],
    obs: &[Observation],
) -> Result<f64> {
    Ok(mean(&instance_scores(rule, forecasts, obs)?))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Paired comparison of two forecasters on the same outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub mean_a: ExtReal,
    pub mean_b: ExtReal,
    /// `mean_a − mean_b`; negative favours forecaster a.
    pub diff: ExtReal,
    pub n: usize,
    /// Sample standard deviation of the per-instance differences over √n. Reported
    /// as 0 with `degenerate` set when n = 1.
    pub naive_se_diff: ExtReal,
    pub degenerate: bool,
}

pub fn compare(
    rule: &ScoringRuleSpec,
    forecasts_a: &[Forecast],
    forecasts_b: &[Forecast],
    obs: &[Observation],
) -> Result<ComparisonReport> {
    check_aligned(forecasts_a.len(), obs.len())?;
    check_aligned(forecasts_b.len(), obs.len())?;
    let a = instance_scores(rule, forecasts_a, obs)?;
    let b = instance_scores(rule, forecasts_b, obs)?;
    let (mean_a, mean_b) = (mean(&a), mean(&b));
    let diff = mean_a - mean_b;
    if diff.is_nan() {
        return Err(Error::Numeric(
            "both forecasters have infinite mean score".into(),
        ));
    }
    let n = obs.len();
    let se = if n == 1 {
        0.0
    } else {
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        if d.iter().all(|v| v.is_finite()) {
            let m = mean(&d);
            let var = d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        }
    };
    Ok(ComparisonReport {
        mean_a: ExtReal::new(mean_a)?,
        mean_b: ExtReal::new(mean_b)?,
        diff: ExtReal::new(diff)?,
        n,
        naive_se_diff: ExtReal::new(se)?,
        degenerate: n == 1,
    })
}

/// Rules for which the decomposition is available. Both are Bregman-type, so the
/// expected score splits as S(P, Q) = d(P, Q) + H(Q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompRule {
    /// (p₁ − y)² on two classes; d = (p₁ − q₁)², H(q) = q₁(1 − q₁).
    BrierBinary,
    /// −2p(y) + Σp²; d = Σ(p − q)², H(q) = −Σq².
    Quadratic,
}

impl DecompRule {
    fn divergence(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            DecompRule::BrierBinary => (p[1] - q[1]).powi(2),
            DecompRule::Quadratic => p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum(),
        }
    }

    fn entropy(self, q: &[f64]) -> f64 {
        match self {
            DecompRule::BrierBinary => q[1] * (1.0 - q[1]),
            DecompRule::Quadratic => -q.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    fn score(self, p: &[f64], y: usize) -> f64 {
        match self {
            DecompRule::BrierBinary => (p[1] - y as f64).powi(2),
            DecompRule::Quadratic => -2.0 * p[y] + p.iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

impl std::str::FromStr for DecompRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brier" | "brier_binary" | "brier-binary" => Ok(DecompRule::BrierBinary),
            "quadratic" => Ok(DecompRule::Quadratic),
            other => Err(invalid(format!(
                "decomposition supports brier and quadratic, got {other:?}"
            ))),
        }
    }
}

/// How forecasts are grouped before conditional outcome frequencies are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Identical probability vectors form a group.
    Exact,
    /// Each probability is cut into `k` equal-width bins; a group's forecast is
    /// replaced by the mean forecast of its members.
    Bins(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub mcb: f64,
    pub dsc: f64,
    pub unc: f64,
    /// Mean score of the (possibly binned) forecasts.
    pub mean_score: f64,
    pub groups: usize,
}

/// Splits the mean score into miscalibration, discrimination and uncertainty.
///
/// With exact grouping the identity mean = MCB − DSC + UNC holds up to rounding. With
/// bins it holds for the binned forecasts, which is what `mean_score` then reports.
pub fn corp_decompose(
    rule: DecompRule,
    forecasts: &[Categorical],
    obs: &[usize],
    grouping: Grouping,
) -> Result<DecompositionReport> {
    check_aligned(forecasts.len(), obs.len())?;
    let n_cls = forecasts[0].n();
    if rule == DecompRule::BrierBinary && n_cls != 2 {
        return Err(invalid(format!(
            "binary Brier needs two classes, got {n_cls}"
        )));
    }
    for (f, &y) in forecasts.iter().zip(obs) {
        if f.n() != n_cls {
            return Err(Error::DimensionMismatch {
                expected: n_cls,
                found: f.n(),
            });
        }
        f.prob(y)?;
    }
    if let Grouping::Bins(0) = grouping {
        return Err(invalid("number of bins must be positive"));
    }

    struct Group {
        forecast_sum: Vec<f64>,
        counts: Vec<f64>,
        size: f64,
        first: Vec<f64>,
    }
    let mut groups: BTreeMap<Vec<u64>, Group> = BTreeMap::new();
    for (f, &y) in forecasts.iter().zip(obs) {
        let key: Vec<u64> = match grouping {
            // +0.0 keys so that −0.0 and 0.0 coincide
            Grouping::Exact => f.probs().iter().map(|p| (p + 0.0).to_bits()).collect(),
            Grouping::Bins(k) => f
                .probs()
                .iter()
                .map(|p| ((p * k as f64).floor() as u64).min(k as u64 - 1))
                .collect(),
        };
        let g = groups.entry(key).or_insert_with(|| Group {
            forecast_sum: vec![0.0; n_cls],
            counts: vec![0.0; n_cls],
            size: 0.0,
            first: f.probs().to_vec(),
        });
        for (s, p) in g.forecast_sum.iter_mut().zip(f.probs()) {
            *s += p;
        }
        g.counts[y] += 1.0;
        g.size += 1.0;
    }

    let n = obs.len() as f64;
    let mut marginal = vec![0.0; n_cls];
    for &y in obs {
        marginal[y] += 1.0;
    }
    for m in &mut marginal {
        *m /= n;
    }

    let (mut mcb, mut dsc, mut total) = (0.0, 0.0, 0.0);
    for g in groups.values() {
        let rep: Vec<f64> = match grouping {
            Grouping::Exact => g.first.clone(),
            Grouping::Bins(_) => g.forecast_sum.iter().map(|s| s / g.size).collect(),
        };
        let cond: Vec<f64> = g.counts.iter().map(|c| c / g.size).collect();
        mcb += g.size * rule.divergence(&rep, &cond);
        dsc += g.size * rule.divergence(&marginal, &cond);
        total += g
            .counts
            .iter()
            .enumerate()
            .map(|(y, c)| c * rule.score(&rep, y))
            .sum::<f64>();
    }
    Ok(DecompositionReport {
        mcb: mcb / n,
        dsc: dsc / n,
        unc: rule.entropy(&marginal),
        mean_score: total / n,
        groups: groups.len(),
    })
}

/// A statistical functional with a consistent scoring function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// Scored by squared error.
    Mean,
    /// Scored by the pinball loss at level τ ∈ (0, 1).
    Quantile(f64),
}

impl Functional {
    pub fn quantile(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(invalid(format!(
                "quantile level must lie in (0,1), got {tau}"
            )));
        }
        Ok(Functional::Quantile(tau))
    }

    /// The functional of a univariate forecast.
    pub fn of(self, f: &Forecast) -> Result<f64> {
        match self {
            Functional::Mean => forecast_mean(f),
            Functional::Quantile(tau) => forecast_quantile(f, tau),
        }
    }
}

fn forecast_mean(f: &Forecast) -> Result<f64> {
    match f {
        Forecast::Categorical(c) => Ok(c
            .probs()
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()),
        Forecast::Ensemble(e) => {
            let xs = e.scalars()?;
            Ok(xs.iter().enumerate().map(|(i, x)| e.weight(i) * x).sum())
        }
        Forecast::Parametric(Parametric::Normal { mu, .. }) => Ok(*mu),
        Forecast::Parametric(Parametric::MvNormal(m)) if m.dim() == 1 => Ok(m.mean()[0]),
        _ => Err(Error::Unsupported(format!(
            "mean of a {} forecast",
            f.kind()
        ))),
    }
}

/// Lower quantile inf{x : F(x) ≥ τ}, except that when F equals τ exactly on a flat
/// stretch between two atoms, the midpoint of the stretch is returned. The median of
/// {0, 1} is therefore 0.5.
fn forecast_quantile(f: &Forecast, tau: f64) -> Result<f64> {
    let atoms: Vec<(f64, f64)> = match f {
        Forecast::Ensemble(e) => {
            let xs = e.scalars()?;
            let mut a: Vec<(f64, f64)> = xs
                .iter()
                .enumerate()
                .map(|(i, x)| (*x, e.weight(i)))
                .collect();
            a.sort_by(|p, q| p.0.total_cmp(&q.0));
            a
        }
        Forecast::Categorical(c) => c
            .probs()
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64, *p))
            .collect(),
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
            return Ok(mu + sigma * std_normal().inverse_cdf(tau));
        }
        Forecast::Parametric(Parametric::MvNormal(m)) if m.dim() == 1 => {
            return Ok(m.mean()[0] + m.cov()[0][0].sqrt() * std_normal().inverse_cdf(tau));
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "quantile of a {} forecast",
                f.kind()
            )))
        }
    };
    let mut cum = 0.0;
    for (i, &(x, w)) in atoms.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cum += w;
        if (cum - tau).abs() <= 1e-12 {
            if let Some(&(next, _)) = atoms[i + 1..].iter().find(|(v, w)| *w > 0.0 && *v > x) {
                return Ok(0.5 * (x + next));
            }
            return Ok(x);
        }
        if cum > tau {
            return Ok(x);
        }
    }
    // τ above the accumulated mass only through rounding
    Ok(atoms
        .iter()
        .rev()
        .find(|(_, w)| *w > 0.0)
        .map_or(f64::NAN, |a| a.0))
}

/// Score induced by a functional: squared error for the mean, pinball loss
/// τ(y − q)⁺ + (1 − τ)(q − y)⁺ for a quantile. Proper but not strictly proper.
pub fn functional_score(functional: Functional, f: &Forecast, y: f64) -> Result<ScoreValue> {
    check_finite(&[y], "observation")?;
    let t = functional.of(f)?;
    let v = match functional {
        Functional::Mean => (t - y).powi(2),
        Functional::Quantile(tau) => {
            if y >= t {
                tau * (y - t)
            } else {
                (1.0 - tau) * (t - y)
            }
        }
    };
    ScoreValue::exact(v, Method::ClosedForm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn crps() -> ScoringRuleSpec {
        ScoringRuleSpec::parse("crps:fair").unwrap()
    }

    #[test]
    fn mean_score_examples() {
        let f = vec![
            Forecast::ensemble(&[0.0, 1.0]).unwrap(),
            Forecast::ensemble(&[0.0, 1.0]).unwrap(),
        ];
        let y = vec![Observation::Scalar(0.5), Observation::Scalar(2.0)];
        assert_eq!(mean_score(&crps(), &f[..1], &y[..1]).unwrap(), 0.0);
        assert_eq!(mean_score(&crps(), &f, &y).unwrap(), 0.5);
        assert!(mean_score(&crps(), &f, &y[..1]).is_err());
        assert!(mean_score(&crps(), &[], &[]).is_err());
        let log = ScoringRuleSpec::Log;
        let c = vec![Forecast::categorical(vec![1.0, 0.0]).unwrap(); 2];
        let o = vec![Observation::Class(0), Observation::Class(1)];
        assert_eq!(mean_score(&log, &c, &o).unwrap(), f64::INFINITY);
    }

    #[test]
    fn compare_examples() {
        let f = vec![Forecast::normal(0.0, 1.0).unwrap(); 3];
        let y: Vec<_> = [0.1, -0.4, 2.0]
            .iter()
            .map(|v| Observation::Scalar(*v))
            .collect();
        let r = compare(&crps(), &f, &f, &y).unwrap();
        assert_eq!(
            (r.diff.get(), r.naive_se_diff.get(), r.degenerate),
            (0.0, 0.0, false)
        );
        let g = vec![Forecast::normal(1.0, 2.0).unwrap(); 3];
        let ab = compare(&crps(), &f, &g, &y).unwrap();
        let ba = compare(&crps(), &g, &f, &y).unwrap();
        assert_eq!(ab.diff.get(), -ba.diff.get());
        assert_eq!(ab.diff.get(), ab.mean_a.get() - ab.mean_b.get());
        let one = compare(&crps(), &f[..1], &g[..1], &y[..1]).unwrap();
        assert!(one.degenerate);
        assert_eq!(one.naive_se_diff.get(), 0.0);
        assert!(compare(&crps(), &f, &g[..2], &y).is_err());
    }

    #[test]
    fn decomposition_two_valued_oracle() {
        // 0.8 on four outcomes with three ones, 0.2 on four with one
        let mut f = Vec::new();
        let mut y = Vec::new();
        for (p, ys) in [(0.8, [1, 1, 1, 0]), (0.2, [1, 0, 0, 0])] {
            for v in ys {
                f.push(Categorical::new(vec![1.0 - p, p]).unwrap());
                y.push(v);
            }
        }
        let r = corp_decompose(DecompRule::BrierBinary, &f, &y, Grouping::Exact).unwrap();
        // brute force: both groups have conditional frequency equal to their forecast
        // up to 0.75 vs 0.8 and 0.25 vs 0.2
        assert_abs_diff_eq!(r.mcb, 0.05f64.powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(r.dsc, 0.25f64.powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(r.unc, 0.25, epsilon = 1e-15);
        let direct: f64 = f
            .iter()
            .zip(&y)
            .map(|(c, &v)| (c.probs()[1] - v as f64).powi(2))
            .sum::<f64>()
            / 8.0;
        assert_abs_diff_eq!(r.mean_score, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(r.mcb - r.dsc + r.unc, r.mean_score, epsilon = 1e-12);
        assert_eq!(r.groups, 2);
    }

    #[test]
    fn decomposition_climatology_and_calibration() {
        let y = [0, 1, 1, 0, 1, 0, 0, 0, 2, 2];
        let clim = Categorical::new(vec![0.5, 0.3, 0.2]).unwrap();
        let f = vec![clim; y.len()];
        let r = corp_decompose(DecompRule::Quadratic, &f, &y, Grouping::Exact).unwrap();
        assert_eq!((r.mcb, r.dsc), (0.0, 0.0));
        assert_abs_diff_eq!(r.mean_score, r.unc, epsilon = 1e-15);

        let f: Vec<_> = [0.25, 0.25, 0.25, 0.25, 0.5, 0.5]
            .iter()
            .map(|p| Categorical::new(vec![1.0 - p, *p]).unwrap())
            .collect();
        let y = [1, 0, 0, 0, 1, 0];
        let r = corp_decompose(DecompRule::BrierBinary, &f, &y, Grouping::Exact).unwrap();
        assert_eq!(r.mcb, 0.0);
        assert!(corp_decompose(DecompRule::BrierBinary, &f, &y[..2], Grouping::Exact).is_err());
        assert!(corp_decompose(DecompRule::BrierBinary, &[], &[], Grouping::Exact).is_err());
    }

    #[test]
    fn decomposition_bins() {
        let ps = [0.12, 0.18, 0.11, 0.83, 0.87, 0.55];
        let y = [0, 1, 0, 1, 1, 0];
        let f: Vec<_> = ps
            .iter()
            .map(|p| Categorical::new(vec![1.0 - p, *p]).unwrap())
            .collect();
        let r = corp_decompose(DecompRule::BrierBinary, &f, &y, Grouping::Bins(10)).unwrap();
        assert_eq!(r.groups, 3);
        assert_abs_diff_eq!(r.mcb - r.dsc + r.unc, r.mean_score, epsilon = 1e-12);
        assert!(r.mcb >= 0.0 && r.dsc >= 0.0);
    }

    #[test]
    fn functional_examples() {
        let n = Forecast::normal(1.5, 2.0).unwrap();
        assert_eq!(
            functional_score(Functional::Mean, &n, 0.5).unwrap().get(),
            1.0
        );
        let m = Forecast::normal(1.5, 0.1).unwrap();
        assert_eq!(
            functional_score(Functional::Mean, &n, 0.2).unwrap().get(),
            functional_score(Functional::Mean, &m, 0.2).unwrap().get()
        );
        let e = Forecast::ensemble(&[0.0, 1.0]).unwrap();
        let q = Functional::quantile(0.5).unwrap();
        assert_eq!(q.of(&e).unwrap(), 0.5);
        assert_eq!(functional_score(q, &e, 1.0).unwrap().get(), 0.25);
        assert_eq!(
            Functional::quantile(0.25)
                .unwrap()
                .of(&Forecast::ensemble(&[3.0, 1.0, 2.0, 4.0]).unwrap())
                .unwrap(),
            1.5
        );
        assert_eq!(
            Functional::quantile(0.3)
                .unwrap()
                .of(&Forecast::ensemble(&[3.0, 1.0, 2.0]).unwrap())
                .unwrap(),
            1.0
        );
        assert_abs_diff_eq!(q.of(&n).unwrap(), 1.5, epsilon = 1e-12);
        assert!(Functional::quantile(1.0).is_err());
        let d = Forecast::Density(crate::forecast::DensityOracle::normal(0.0, 1.0));
        assert!(matches!(
            functional_score(q, &d, 0.0),
            Err(Error::Unsupported(_))
        ));
    }
}
