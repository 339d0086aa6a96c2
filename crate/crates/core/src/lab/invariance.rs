use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::forecast::{rng, Ensemble, Forecast, MvNormal, Observation, Parametric};
use crate::rule::{score, ScoringRuleSpec};

/// Relative tolerance of the invariance comparisons.
pub const INVARIANCE_TOL: f64 = 1e-10;

/// Transformation applied jointly to forecast and outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// x ↦ x + h; a single entry is broadcast over all coordinates.
    Translate(Vec<f64>),
    /// x ↦ c·x, with the score expected to scale by c^degree.
    Scale { c: f64, degree: f64 },
    /// x ↦ Ux for an orthogonal matrix U.
    Rotate(Vec<Vec<f64>>),
}

impl Transform {
    fn expected_ratio(&self) -> f64 {
        match self {
            Transform::Scale { c, degree } => c.powf(*degree),
            _ => 1.0,
        }
    }

    fn name(&self) -> String {
        match self {
            Transform::Translate(h) => format!("translate({h:?})"),
            Transform::Scale { c, degree } => format!("scale(c={c},degree={degree})"),
            Transform::Rotate(u) => format!("rotate(d={})", u.len()),
        }
    }

    fn point(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Transform::Translate(h) if h.len() == 1 => Ok(x.iter().map(|v| v + h[0]).collect()),
            Transform::Translate(h) if h.len() == x.len() => {
                Ok(x.iter().zip(h).map(|(v, t)| v + t).collect())
            }
            Transform::Translate(h) => Err(Error::DimensionMismatch {
                expected: x.len(),
                found: h.len(),
            }),
            Transform::Scale { c, .. } => Ok(x.iter().map(|v| c * v).collect()),
            Transform::Rotate(u) if u.len() == x.len() => Ok(matvec(u, x)),
            Transform::Rotate(u) => Err(Error::DimensionMismatch {
                expected: x.len(),
                found: u.len(),
            }),
        }
    }
}

fn matvec(u: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    u.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Applies `t` to a forecast and an outcome.
pub fn apply_transform(
    t: &Transform,
    f: &Forecast,
    y: &Observation,
) -> Result<(Forecast, Observation)> {
    let f2 = match f {
        Forecast::Ensemble(e) => {
            let members = e
                .members()
                .iter()
                .map(|x| t.point(x))
                .collect::<Result<Vec<_>>>()?;
            Forecast::Ensemble(Ensemble::new(
                members,
                e.explicit_weights().map(<[f64]>::to_vec),
            )?)
        }
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => match t {
            Transform::Translate(_) => Forecast::normal(t.point(&[*mu])?[0], *sigma)?,
            Transform::Scale { c, .. } if *c > 0.0 => Forecast::normal(c * mu, c * sigma)?,
            Transform::Rotate(u) if u.len() == 1 => {
                Forecast::normal(u[0][0] * mu, u[0][0].abs() * sigma)?
            }
            _ => {
                return Err(invalid(format!(
                    "{} does not apply to a normal forecast",
                    t.name()
                )))
            }
        },
        Forecast::Parametric(Parametric::MvNormal(m)) => {
            let mean = t.point(m.mean())?;
            let cov = match t {
                Transform::Translate(_) => m.cov().to_vec(),
                Transform::Scale { c, .. } => m
                    .cov()
                    .iter()
                    .map(|r| r.iter().map(|v| c * c * v).collect())
                    .collect(),
                Transform::Rotate(u) => {
                    // U Σ Uᵀ
                    let us: Vec<Vec<f64>> = u
                        .iter()
                        .map(|row| {
                            (0..row.len())
                                .map(|j| (0..row.len()).map(|k| row[k] * m.cov()[k][j]).sum())
                                .collect()
                        })
                        .collect();
                    us.iter()
                        .map(|row| {
                            u.iter()
                                .map(|r2| row.iter().zip(r2).map(|(a, b)| a * b).sum())
                                .collect()
                        })
                        .collect()
                }
            };
            Forecast::Parametric(Parametric::MvNormal(MvNormal::new(mean, cov)?))
        }
        other => {
            return Err(Error::Unsupported(format!(
                "{} does not apply to a {} forecast",
                t.name(),
                other.kind()
            )))
        }
    };
    let y2 = match y {
        Observation::Scalar(v) => Observation::Scalar(t.point(&[*v])?[0]),
        Observation::Vector(v) => Observation::Vector(t.point(v)?),
        Observation::Class(_) => {
            return Err(Error::Unsupported("transforms of class outcomes".into()))
        }
    };
    Ok((f2, y2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub rule: String,
    pub transform: String,
    pub expected_ratio: f64,
    pub instances: usize,
    /// Instances where S(T P, T y) differs from ratio · S(P, y) beyond tolerance.
    pub failures: usize,
    /// Largest |S(T P, T y) − ratio · S(P, y)| relative to the larger of the two.
    pub worst_rel_error: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares each score after the transform with the prediction from its declared
/// invariance or homogeneity degree.
pub fn invariance_check(
    rule: &ScoringRuleSpec,
    t: &Transform,
    instances: &[(Forecast, Observation)],
) -> Result<InvarianceReport> {
    if let Transform::Scale { c, degree } = t {
        if !(*c > 0.0) || !c.is_finite() || !degree.is_finite() {
            return Err(invalid("scale factor must be positive and degree finite"));
        }
    }
    let ratio = t.expected_ratio();
    let mut report = InvarianceReport {
        rule: rule.name(),
        transform: t.name(),
        expected_ratio: ratio,
        instances: instances.len(),
        failures: 0,
        worst_rel_error: 0.0,
    };
    for (f, y) in instances {
        let before = score(rule, f, y)?.get();
        let (f2, y2) = apply_transform(t, f, y)?;
        let after = score(rule, &f2, &y2)?.get();
        let predicted = ratio * before;
        let scale = predicted.abs().max(after.abs());
        let err = (after - predicted).abs();
        let rel = if scale > 0.0 { err / scale } else { 0.0 };
        if err > INVARIANCE_TOL * scale + 1e-14 {
            report.failures += 1;
        }
        report.worst_rel_error = report.worst_rel_error.max(rel);
    }
    Ok(report)
}

/// Random orthogonal d×d matrix by Gram–Schmidt on Gaussian columns.
pub fn random_rotation(d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed, 0x707);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::random_ensemble;

    fn instances(d: usize, n: usize, count: usize, seed: u64) -> Vec<(Forecast, Observation)> {
        (0..count as u64)
            .map(|k| {
                let e = random_ensemble(n, d, seed + k);
                let y = random_ensemble(1, d, seed + 1000 + k).members()[0].clone();
                let y = if d == 1 {
                    Observation::Scalar(y[0])
                } else {
                    Observation::Vector(y)
                };
                (Forecast::Ensemble(e), y)
            })
            .collect()
    }

    #[test]
    fn crps_is_one_homogeneous_and_translation_invariant() {
        let rule = ScoringRuleSpec::parse("crps").unwrap();
        let inst = instances(1, 7, 30, 3);
        assert!(invariance_check(
            &rule,
            &Transform::Scale {
                c: 2.0,
                degree: 1.0
            },
            &inst
        )
        .unwrap()
        .passed());
        assert!(
            invariance_check(&rule, &Transform::Translate(vec![-3.25]), &inst)
                .unwrap()
                .passed()
        );
        let norm = vec![(
            Forecast::normal(0.3, 1.2).unwrap(),
            Observation::Scalar(-0.4),
        )];
        assert!(invariance_check(
            &rule,
            &Transform::Scale {
                c: 2.0,
                degree: 1.0
            },
            &norm
        )
        .unwrap()
        .passed());
    }

    #[test]
    fn energy_homogeneity_and_rotation() {
        let rule = ScoringRuleSpec::parse("energy:beta=0.5").unwrap();
        let inst = instances(3, 6, 20, 5);
        let r = invariance_check(
            &rule,
            &Transform::Scale {
                c: 3.0,
                degree: 0.5,
            },
            &inst,
        )
        .unwrap();
        assert!(r.passed(), "{r:?}");
        let u = random_rotation(3, 9);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| u[i][k] * u[j][k]).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(invariance_check(&rule, &Transform::Rotate(u), &inst)
            .unwrap()
            .passed());
    }

    #[test]
    fn gaussian_kernel_is_not_homogeneous() {
        let rule = ScoringRuleSpec::parse("gaussian:lambda=1.0").unwrap();
        let inst = instances(1, 5, 10, 7);
        for degree in [0.0, 1.0, 2.0] {
            let r = invariance_check(&rule, &Transform::Scale { c: 2.0, degree }, &inst).unwrap();
            assert!(!r.passed());
        }
        assert!(
            invariance_check(&rule, &Transform::Translate(vec![1.0]), &inst)
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn categorical_is_rejected() {
        let rule = ScoringRuleSpec::Brier;
        let inst = vec![(
            Forecast::categorical(vec![0.5, 0.5]).unwrap(),
            Observation::Class(0),
        )];
        assert!(invariance_check(&rule, &Transform::Translate(vec![1.0]), &inst).is_err());
    }
}
