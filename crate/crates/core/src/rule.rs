//! Scoring-rule specifications and dispatch over forecast representations.
//!
//! Rules are written as compact strings, `name[:arg,...]`, where each argument is
//! `key=value` or one of the bare words `fair` / `empirical`:
//!
//! | spec | rule |
//! |------|------|
//! | `crps`, `crps:empirical` | continuous ranked probability score |
//! | `log` | logarithmic score |
//! | `quadratic` | quadratic score |
//! | `brier` | Brier score |
//! | `spherical`, `pseudospherical:alpha=3` | (pseudo)spherical score |
//! | `linear` | improper linear score −p(y), a negative control |
//! | `energy:beta=1.0[,alpha=2]` | energy score |
//! | `gaussian:lambda=1.0`, `laplacian:lambda=1.0` | kernel scores |
//! | `tw:base=energy:beta=1.0,t=0.5` | threshold-weighted kernel score |
//! | `variogram:p=0.5` | variogram score |
//! | `ds` | Dawid–Sebastiani score |
//! | `hyvarinen`, `logcosh` | local scores |
//! | `mean`, `quantile:tau=0.9` | functional-induced scores |

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::evaluation::{functional_score, Functional};
use crate::forecast::{forecast_sample, DensityOracle, Forecast, Observation, Parametric};
use crate::kernel::{kernel_registry, kernel_score_exact, kernel_score_mc, parse_num, Kernel};
use crate::local::{hyvarinen_score, hyvarinen_score_fd, logcosh_score, logcosh_score_density};
use crate::multivariate::{
    dawid_sebastiani, dawid_sebastiani_from_ensemble, energy_score, variogram_score,
};
use crate::univariate::{
    brier_score, crps_ensemble, crps_normal, crps_numeric, log_score, pseudospherical_raw,
    quadratic_categorical, quadratic_score, EnsembleVariant,
};
use crate::value::{Method, ScoreValue};

/// Sample size and seed used when a kernel score is estimated by sampling a
/// parametric forecast.
pub const MC_SAMPLES: usize = 2000;

/// A scoring rule with validated hyperparameters.
#[derive(Debug, Clone)]
pub enum ScoringRuleSpec {
    Crps {
        variant: EnsembleVariant,
    },
    Log,
    Quadratic,
    Brier,
    Pseudospherical {
        alpha: f64,
    },
    /// −p(y); improper.
    Linear,
    Energy {
        beta: f64,
        norm_alpha: Option<f64>,
        variant: EnsembleVariant,
    },
    Kernel {
        kernel: Kernel,
        variant: EnsembleVariant,
    },
    Variogram {
        p: f64,
        weights: Option<Vec<Vec<f64>>>,
    },
    DawidSebastiani,
    Hyvarinen,
    LogCosh,
    Functional(Functional),
}

impl ScoringRuleSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        if matches!(name, "gaussian" | "laplacian" | "tw") {
            let (rest, variant) = take_variant(rest);
            let kernel = kernel_registry(&join_spec(name, &rest))?;
            return Ok(ScoringRuleSpec::Kernel { kernel, variant });
        }
        let (rest, variant) = take_variant(rest);
        let params = parse_kv(&rest)?;
        let get = |k: &str| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
        let allow = |keys: &[&str]| -> Result<()> {
            match params.iter().find(|(n, _)| !keys.contains(&n.as_str())) {
                Some((n, _)) => Err(invalid(format!("unknown parameter {n:?} for rule {name}"))),
                None => Ok(()),
            }
        };
        let plain = |rule: ScoringRuleSpec| allow(&[]).map(|_| rule);
        let rule = match name {
            "crps" => {
                allow(&[])?;
                ScoringRuleSpec::Crps { variant }
            }
            "log" | "logarithmic" | "ignorance" => plain(ScoringRuleSpec::Log)?,
            "quadratic" => plain(ScoringRuleSpec::Quadratic)?,
            "brier" => plain(ScoringRuleSpec::Brier)?,
            "spherical" => plain(ScoringRuleSpec::Pseudospherical { alpha: 2.0 })?,
            "pseudospherical" => {
                allow(&["alpha"])?;
                let alpha =
                    get("alpha").ok_or_else(|| invalid("pseudospherical needs alpha=..."))?;
                if !(alpha > 1.0) || !alpha.is_finite() {
                    return Err(invalid(format!(
                        "pseudospherical alpha must exceed 1, got {alpha}"
                    )));
                }
                ScoringRuleSpec::Pseudospherical { alpha }
            }
            "linear" => plain(ScoringRuleSpec::Linear)?,
            "energy" => {
                allow(&["beta", "alpha"])?;
                let beta = get("beta").unwrap_or(1.0);
                // validates β and α
                Kernel::energy_with_norm(beta, get("alpha").unwrap_or(2.0))?;
                ScoringRuleSpec::Energy {
                    beta,
                    norm_alpha: get("alpha"),
                    variant,
                }
            }
            "variogram" => {
                allow(&["p"])?;
                let p = get("p").unwrap_or(0.5);
                Kernel::variogram(p, None)?;
                ScoringRuleSpec::Variogram { p, weights: None }
            }
            "ds" | "dawid-sebastiani" => plain(ScoringRuleSpec::DawidSebastiani)?,
            "hyvarinen" => plain(ScoringRuleSpec::Hyvarinen)?,
            "logcosh" | "log-cosh" => plain(ScoringRuleSpec::LogCosh)?,
            "mean" => plain(ScoringRuleSpec::Functional(Functional::Mean))?,
            "quantile" => {
                allow(&["tau"])?;
                let tau = get("tau").ok_or_else(|| invalid("quantile needs tau=..."))?;
                ScoringRuleSpec::Functional(Functional::quantile(tau)?)
            }
            other => return Err(invalid(format!("unknown scoring rule {other:?}"))),
        };
        if !matches!(name, "crps" | "energy") && rest.len() < count_tokens(spec) {
            return Err(invalid(format!(
                "rule {name} takes no fair/empirical variant"
            )));
        }
        Ok(rule)
    }

    /// Name used in reports.
    pub fn name(&self) -> String {
        match self {
            ScoringRuleSpec::Crps { variant } => format!("crps:{}", variant_str(*variant)),
            ScoringRuleSpec::Log => "log".into(),
            ScoringRuleSpec::Quadratic => "quadratic".into(),
            ScoringRuleSpec::Brier => "brier".into(),
            ScoringRuleSpec::Pseudospherical { alpha } if *alpha == 2.0 => "spherical".into(),
            ScoringRuleSpec::Pseudospherical { alpha } => format!("pseudospherical:alpha={alpha}"),
            ScoringRuleSpec::Linear => "linear".into(),
            ScoringRuleSpec::Energy {
                beta,
                norm_alpha,
                variant,
            } => match norm_alpha {
                Some(a) => format!("energy:beta={beta},alpha={a},{}", variant_str(*variant)),
                None => format!("energy:beta={beta},{}", variant_str(*variant)),
            },
            ScoringRuleSpec::Kernel { kernel, variant } => {
                format!("{},{}", kernel.id(), variant_str(*variant))
            }
            ScoringRuleSpec::Variogram { p, .. } => format!("variogram:p={p}"),
            ScoringRuleSpec::DawidSebastiani => "ds".into(),
            ScoringRuleSpec::Hyvarinen => "hyvarinen".into(),
            ScoringRuleSpec::LogCosh => "logcosh".into(),
            ScoringRuleSpec::Functional(Functional::Mean) => "mean".into(),
            ScoringRuleSpec::Functional(Functional::Quantile(t)) => format!("quantile:tau={t}"),
        }
    }

    /// The kernel behind a kernel score, if this is one.
    pub fn kernel(&self) -> Option<Kernel> {
        match self {
            ScoringRuleSpec::Crps { .. } => Kernel::energy(1.0).ok(),
            ScoringRuleSpec::Energy {
                beta, norm_alpha, ..
            } => Kernel::energy_with_norm(*beta, norm_alpha.unwrap_or(2.0)).ok(),
            ScoringRuleSpec::Kernel { kernel, .. } => Some(kernel.clone()),
            ScoringRuleSpec::Variogram { p, weights } => {
                Kernel::variogram(*p, weights.clone()).ok()
            }
            _ => None,
        }
    }

    /// Score of a categorical forecast given as a raw probability vector. The vector is
    /// trusted to lie on the simplex.
    pub fn categorical(&self, p: &[f64], y: usize) -> Result<f64> {
        let py = *p
            .get(y)
            .ok_or_else(|| Error::Schema(format!("class {y} outside 0..{}", p.len())))?;
        match self {
            ScoringRuleSpec::Log => Ok(-py.ln()),
            ScoringRuleSpec::Quadratic => quadratic_categorical(p, y),
            ScoringRuleSpec::Brier => {
                if p.len() == 2 {
                    Ok((p[1] - y as f64).powi(2))
                } else {
                    Ok(p.iter()
                        .enumerate()
                        .map(|(i, v)| (v - if i == y { 1.0 } else { 0.0 }).powi(2))
                        .sum())
                }
            }
            ScoringRuleSpec::Pseudospherical { alpha } => pseudospherical_raw(p, y, *alpha),
            ScoringRuleSpec::Linear => Ok(-py),
            other => Err(Error::Unsupported(format!(
                "{} is not a categorical rule",
                other.name()
            ))),
        }
    }
}

impl fmt::Display for ScoringRuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for ScoringRuleSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScoringRuleSpec::parse(s)
    }
}

fn variant_str(v: EnsembleVariant) -> &'static str {
    match v {
        EnsembleVariant::Fair => "fair",
        EnsembleVariant::Empirical => "empirical",
    }
}

fn count_tokens(spec: &str) -> usize {
    spec.split_once(':').map_or(0, |(_, r)| r.len())
}

/// Removes a bare `fair`/`empirical` token, returning the remaining argument string.
fn take_variant(rest: &str) -> (String, EnsembleVariant) {
    let mut variant = EnsembleVariant::Fair;
    let kept: Vec<&str> = rest
        .split(',')
        .filter(|tok| match *tok {
            "fair" => false,
            "empirical" => {
                variant = EnsembleVariant::Empirical;
                false
            }
            _ => true,
        })
        .collect();
    (kept.join(","), variant)
}

fn join_spec(name: &str, rest: &str) -> String {
    if rest.is_empty() {
        name.to_string()
    } else {
        format!("{name}:{rest}")
    }
}

fn parse_kv(rest: &str) -> Result<Vec<(String, f64)>> {
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',')
        .map(|tok| {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got {tok:?}")))?;
            Ok((k.trim().to_string(), parse_num(v, k)?))
        })
        .collect()
}

fn unsupported(rule: &ScoringRuleSpec, f: &Forecast) -> Error {
    Error::Unsupported(format!("rule {} on a {} forecast", rule.name(), f.kind()))
}

/// Scores one forecast against one observation.
pub fn score(rule: &ScoringRuleSpec, f: &Forecast, y: &Observation) -> Result<ScoreValue> {
    y.validate()?;
    match rule {
        ScoringRuleSpec::Crps { variant } => match f {
            Forecast::Ensemble(e) => {
                let xs = e.scalars()?;
                crps_ensemble(&xs, e.explicit_weights(), y.as_scalar()?, *variant)
            }
            Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
                crps_normal(*mu, *sigma, y.as_scalar()?)
            }
            Forecast::Categorical(_) => crps_numeric(f, y.as_scalar()?, 1e-10),
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::Log => log_score(f, y),
        ScoringRuleSpec::Quadratic => quadratic_score(f, y),
        ScoringRuleSpec::Brier => match f {
            Forecast::Categorical(c) => brier_score(c, y.as_class()?),
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::Pseudospherical { .. } | ScoringRuleSpec::Linear => match f {
            Forecast::Categorical(c) => {
                let k = y.as_class()?;
                c.prob(k)?;
                ScoreValue::exact(rule.categorical(c.probs(), k)?, Method::ClosedForm)
            }
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::Energy {
            beta,
            norm_alpha,
            variant,
        } => match f {
            Forecast::Ensemble(e) => energy_score(e, &y.as_point(), *beta, *variant, *norm_alpha),
            Forecast::Parametric(_) => kernel_mc(rule, f, y),
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::Kernel { kernel, variant } => match f {
            Forecast::Ensemble(e) => kernel_score_exact(kernel, e, &y.as_point(), *variant),
            Forecast::Parametric(_) => kernel_mc(rule, f, y),
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::Variogram { p, weights } => match f {
            Forecast::Ensemble(e) => variogram_score(e, &y.as_point(), *p, weights.as_deref()),
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::DawidSebastiani => match f {
            Forecast::Ensemble(e) => dawid_sebastiani_from_ensemble(e, &y.as_point()),
            Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
                dawid_sebastiani(&[*mu], &[vec![sigma * sigma]], &[y.as_scalar()?])
            }
            Forecast::Parametric(Parametric::MvNormal(m)) => {
                dawid_sebastiani(m.mean(), m.cov(), &y.as_point())
            }
            _ => Err(unsupported(rule, f)),
        },
        ScoringRuleSpec::Hyvarinen => {
            let oracle = density_oracle(f).ok_or_else(|| unsupported(rule, f))?;
            let pt = y.as_point();
            match hyvarinen_score(&oracle, &pt) {
                Err(Error::Unsupported(_)) => hyvarinen_score_fd(&oracle, &pt, None),
                other => other,
            }
        }
        ScoringRuleSpec::LogCosh => {
            let oracle = density_oracle(f).ok_or_else(|| unsupported(rule, f))?;
            if oracle.dim() != 1 {
                return Err(unsupported(rule, f));
            }
            let pt = y.as_scalar()?;
            match logcosh_score_density(&oracle, pt) {
                Err(Error::Unsupported(_)) => {
                    let d = crate::local::finite_difference_derivatives(
                        &oracle,
                        &[pt],
                        crate::local::default_step(&[pt]),
                    )?;
                    logcosh_score(d.gradient[0], d.laplacian)
                }
                other => other,
            }
        }
        ScoringRuleSpec::Functional(func) => functional_score(*func, f, y.as_scalar()?),
    }
}

fn kernel_mc(rule: &ScoringRuleSpec, f: &Forecast, y: &Observation) -> Result<ScoreValue> {
    let h = rule.kernel().ok_or_else(|| unsupported(rule, f))?;
    let sampler = |m: usize, seed: u64| -> Result<Vec<Vec<f64>>> {
        Ok(forecast_sample(f, m, seed)?
            .iter()
            .map(|o| o.as_point())
            .collect())
    };
    kernel_score_mc(&h, sampler, &y.as_point(), MC_SAMPLES, 0)
}

/// Density oracle for forecasts with a known smooth density.
fn density_oracle(f: &Forecast) -> Option<DensityOracle> {
    match f {
        Forecast::Density(d) => Some(d.clone()),
        Forecast::Parametric(Parametric::Normal { mu, sigma }) => {
            Some(DensityOracle::normal(*mu, *sigma))
        }
        Forecast::Parametric(Parametric::MvNormal(m)) => {
            let m = m.clone();
            let chol = m.cholesky().clone();
            let d = m.dim();
            // tr Σ⁻¹ = Σᵢ ‖L⁻¹ eᵢ‖²
            let trace: f64 = (0..d)
                .map(|i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    chol.quad_form(&e)
                })
                .sum();
            let mm = m.clone();
            Some(
                DensityOracle::new(d, move |y| mm.log_pdf(y).unwrap_or(f64::NAN))
                    .with_derivatives(
                        move |y| {
                            // −Σ⁻¹ (y − μ) via L⁻ᵀ L⁻¹
                            let r: Vec<f64> = y.iter().zip(m.mean()).map(|(a, b)| a - b).collect();
                            let z = chol.solve_lower(&r);
                            let l = chol.factor();
                            let mut x = vec![0.0; d];
                            for i in (0..d).rev() {
                                let mut s = z[i];
                                for k in (i + 1)..d {
                                    s -= l[k][i] * x[k];
                                }
                                x[i] = s / l[i][i];
                            }
                            x.iter().map(|v| -v).collect()
                        },
                        move |_| -trace,
                    )
                    .normalized(),
            )
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_documented_specs() {
        for s in [
            "crps",
            "crps:fair",
            "crps:empirical",
            "log",
            "quadratic",
            "brier",
            "spherical",
            "pseudospherical:alpha=2",
            "linear",
            "energy:beta=1.0",
            "energy:beta=0.5,empirical",
            "gaussian:lambda=1.0",
            "laplacian:lambda=1.0",
            "tw:base=energy:beta=1.0,t=0.5",
            "variogram:p=0.5",
            "ds",
            "hyvarinen",
            "logcosh",
            "mean",
            "quantile:tau=0.5",
        ] {
            ScoringRuleSpec::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
        for s in [
            "pseudospherical:alpha=1",
            "energy:beta=2",
            "gaussian:lambda=0",
            "variogram:p=-1",
            "quantile:tau=1.5",
            "nope",
            "crps:beta=1",
            "log:empirical",
            "energy:beta=x",
            "brier:alpha=2",
            "spherical:alpha=3",
            "mean:tau=0.5",
        ] {
            assert!(ScoringRuleSpec::parse(s).is_err(), "{s} should fail");
        }
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let rule = ScoringRuleSpec::parse("crps:fair").unwrap();
        let f = Forecast::ensemble(&[0.0, 1.0]).unwrap();
        assert_eq!(
            score(&rule, &f, &Observation::Scalar(2.0)).unwrap().get(),
            1.0
        );
        let n = Forecast::normal(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            score(&rule, &n, &Observation::Scalar(0.0)).unwrap().get(),
            0.233_694_977_255_109,
            epsilon = 1e-12
        );
        let tw = ScoringRuleSpec::parse("tw:base=energy:beta=1.0,t=0.5").unwrap();
        assert_abs_diff_eq!(
            score(&tw, &f, &Observation::Scalar(2.0)).unwrap().get(),
            1.0,
            epsilon = 1e-15
        );
        let c = Forecast::categorical(vec![0.6, 0.4]).unwrap();
        let sph = ScoringRuleSpec::parse("spherical").unwrap();
        assert_abs_diff_eq!(
            score(&sph, &c, &Observation::Class(0)).unwrap().get(),
            -0.6 / 0.52f64.sqrt(),
            epsilon = 1e-15
        );
        let brier = ScoringRuleSpec::parse("brier").unwrap();
        assert_abs_diff_eq!(
            score(&brier, &c, &Observation::Class(1)).unwrap().get(),
            0.36,
            epsilon = 1e-15
        );
        assert!(score(&brier, &n, &Observation::Scalar(0.0)).is_err());
    }

    #[test]
    fn hyvarinen_dispatch_for_parametric() {
        let rule = ScoringRuleSpec::Hyvarinen;
        let n = Forecast::normal(1.0, 2.0).unwrap();
        // −1/σ² + (y − μ)²/(2σ⁴)
        assert_abs_diff_eq!(
            score(&rule, &n, &Observation::Scalar(3.0)).unwrap().get(),
            -0.25 + 4.0 / 32.0,
            epsilon = 1e-15
        );
        let mv =
            crate::forecast::MvNormal::new(vec![0.0, 1.0], vec![vec![2.0, 0.5], vec![0.5, 1.0]])
                .unwrap();
        let f = Forecast::Parametric(Parametric::MvNormal(mv.clone()));
        let y = Observation::Vector(vec![0.5, -0.2]);
        let analytic = score(&rule, &f, &y).unwrap().get();
        let fd = crate::local::hyvarinen_score_fd(
            &DensityOracle::new(2, move |p| mv.log_pdf(p).unwrap()),
            &[0.5, -0.2],
            Some(1e-3),
        )
        .unwrap()
        .get();
        assert_abs_diff_eq!(analytic, fd, epsilon = 1e-6);
    }

    #[test]
    fn ds_normal_is_twice_negative_log_likelihood() {
        let rule = ScoringRuleSpec::DawidSebastiani;
        let f = Forecast::normal(0.5, 1.5).unwrap();
        let y = Observation::Scalar(-0.7);
        let ds = score(&rule, &f, &y).unwrap().get();
        let ll = -log_score(&f, &y).unwrap().get();
        assert_abs_diff_eq!(
            ds,
            -2.0 * ll - (2.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn kernel_rules_on_parametric_use_sampling() {
        let rule = ScoringRuleSpec::parse("energy:beta=1.0").unwrap();
        let n = Forecast::normal(0.0, 1.0).unwrap();
        let s = score(&rule, &n, &Observation::Scalar(0.0)).unwrap();
        assert_eq!(s.method, Method::MonteCarlo);
        assert!((s.get() - 0.233_694_977).abs() < 4.0 * s.se.unwrap() + 1e-3);
    }
}
