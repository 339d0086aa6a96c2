//! Minimum-score estimation: parameters chosen to minimise the mean realised score
//! over a sample, with a derivative-free optimiser so that any rule can be plugged in.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Continuous, Normal};

use crate::error::{check_finite, invalid, Error, Result};
use crate::forecast::rng;
use crate::rule::ScoringRuleSpec;
use crate::univariate::crps_normal_raw;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Objective at `params`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once every vertex lies within `tol` (max-norm) of the best one.
    pub tol: f64,
    /// Iteration budget per run.
    pub max_iter: usize,
    /// Initial simplex edge per coordinate.
    pub step: Vec<f64>,
    /// Extra runs started from the incumbent with a randomly oriented simplex.
    pub restarts: usize,
    pub seed: u64,
}

impl NelderMeadOptions {
    pub fn new(dim: usize) -> Self {
        NelderMeadOptions {
            tol: 1e-10,
            max_iter: 5000,
            step: vec![0.5; dim],
            restarts: 3,
            seed: 0,
        }
    }
}

/// Minimises `objective` from `x0`. Non-finite objective values count as +∞.
pub fn nelder_mead<F>(objective: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<FitResult>
where
    F: Fn(&[f64]) -> f64,
{
    check_finite(x0, "starting point")?;
    if x0.is_empty() {
        return Err(invalid("starting point is empty"));
    }
    if opts.step.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            found: opts.step.len(),
        });
    }
    if !(opts.tol >= 0.0) || opts.step.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(invalid("tolerance must be nonnegative and steps positive"));
    }
    let f = |x: &[f64]| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(invalid(format!(
            "objective is not finite at the start point ({f0})"
        )));
    }
    if opts.max_iter == 0 {
        return Ok(FitResult {
            params: x0.to_vec(),
            objective: f0,
            iterations: 0,
            converged: false,
        });
    }

    let axis: Vec<Vec<f64>> = (0..x0.len())
        .map(|i| {
            let mut e = vec![0.0; x0.len()];
            e[i] = opts.step[i];
            e
        })
        .collect();
    let mut best = run(&f, x0, &axis, opts);
    let mut r = rng(opts.seed, 0x4e4d);
    for _ in 0..opts.restarts {
        let dirs: Vec<Vec<f64>> = (0..x0.len())
            .map(|i| {
                (0..x0.len())
                    .map(|j| {
                        let base = if i == j { opts.step[j] } else { 0.0 };
                        base + opts.step[j] * (r.random::<f64>() - 0.5)
                    })
                    .collect()
            })
            .collect();
        let next = run(&f, &best.params, &dirs, opts);
        let iterations = best.iterations + next.iterations;
        if next.objective <= best.objective {
            best = FitResult { iterations, ..next };
        } else {
            best.iterations = iterations;
            best.converged = next.converged;
        }
    }
    Ok(best)
}

fn run<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    dirs: &[Vec<f64>],
    opts: &NelderMeadOptions,
) -> FitResult {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = std::iter::once(x0.to_vec())
        .chain(
            dirs.iter()
                .map(|d| x0.iter().zip(d).map(|(a, b)| a + b).collect()),
        )
        .map(|x| {
            let v = f(&x);
            (x, v)
        })
        .collect();
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };
    let mut it = 0;
    let mut converged = false;
    while it < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter <= opts.tol {
            converged = true;
            break;
        }
        it += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let (worst, f_worst) = simplex[n].clone();
        let (f_best, f_second) = (simplex[0].1, simplex[n - 1].1);

        let xr = point(&centroid, &worst, -1.0);
        let fr = f(&xr);
        if fr < f_best {
            let xe = point(&centroid, &worst, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        // outside contraction when the reflection helped at all, inside otherwise
        let xc = point(&centroid, &worst, if fr < f_worst { -0.5 } else { 0.5 });
        let fc = f(&xc);
        if fc < f_worst.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex[1..].iter_mut() {
            let x = point(&best, &v.0, 0.5);
            let fx = f(&x);
            *v = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (params, objective) = simplex.swap_remove(0);
    FitResult {
        params,
        objective,
        iterations: it,
        converged,
    }
}

/// Parametric families available for fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FitRule {
    Log,
    Crps,
}

impl FitRule {
    fn from_spec(rule: &ScoringRuleSpec) -> Result<Self> {
        match rule {
            ScoringRuleSpec::Log => Ok(FitRule::Log),
            ScoringRuleSpec::Crps { .. } => Ok(FitRule::Crps),
            other => Err(Error::Unsupported(format!(
                "fitting supports the log and crps rules, got {}",
                other.name()
            ))),
        }
    }

    fn score(self, mu: f64, sigma: f64, y: f64) -> f64 {
        match self {
            FitRule::Log => {
                let z = (y - mu) / sigma;
                0.5 * z * z + sigma.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            FitRule::Crps => crps_normal_raw(mu, sigma, y),
        }
    }
}

/// Mean score of N(μ, σ²) over `data`.
pub fn normal_objective(rule: &ScoringRuleSpec, data: &[f64], mu: f64, sigma: f64) -> Result<f64> {
    let r = FitRule::from_spec(rule)?;
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveScale(sigma));
    }
    Ok(data.iter().map(|y| r.score(mu, sigma, *y)).sum::<f64>() / data.len() as f64)
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// Fits a family by minimising the mean score over `data`.
///
/// Returns `params = [μ, σ]`. The optimiser works on (μ, log σ) and starts from the
/// median and scaled median absolute deviation, so a log-score fit reaches the
/// closed-form MLE through optimisation rather than by construction.
pub fn fit_min_score(family: Family, rule: &ScoringRuleSpec, data: &[f64]) -> Result<FitResult> {
    let Family::Normal = family;
    let r = FitRule::from_spec(rule)?;
    check_finite(data, "data")?;
    if data.len() < 2 {
        return Err(invalid(format!(
            "fitting needs at least 2 observations, got {}",
            data.len()
        )));
    }
    let (_, sd) = mean_sd(data);
    if sd == 0.0 || data.iter().all(|v| *v == data[0]) {
        return Err(Error::Degenerate("all observations are equal".into()));
    }
    let med = median(data);
    let dev: Vec<f64> = data.iter().map(|v| (v - med).abs()).collect();
    let mad = 1.4826 * median(&dev);
    let s0 = if mad > 0.0 { mad } else { sd };
    let n = data.len() as f64;
    let objective = |p: &[f64]| {
        let sigma = p[1].exp();
        data.iter().map(|y| r.score(p[0], sigma, *y)).sum::<f64>() / n
    };
    let mut opts = NelderMeadOptions::new(2);
    opts.step = vec![0.5 * s0, 0.5];
    let mut fit = nelder_mead(objective, &[med, s0.ln()], &opts)?;
    fit.params[1] = fit.params[1].exp();
    finish(fit)
}

/// Relative floor on σ in conditional fits, as a fraction of the outcome scale.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// Fits μ(x) = a + b·x with constant σ by minimising the mean score of
/// N(a + b·xⱼ, σ²) at yⱼ. Returns `params = [a, b, σ]`.
///
/// σ is clamped below at [`SIGMA_FLOOR`] times the outcome scale, so noiseless data
/// end with σ on the clamp rather than driving the log score to −∞.
pub fn fit_conditional_min_score(
    rule: &ScoringRuleSpec,
    pairs: &[(f64, f64)],
) -> Result<FitResult> {
    let r = FitRule::from_spec(rule)?;
    if pairs.len() < 3 {
        return Err(invalid(format!(
            "conditional fit needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    check_finite(&xs, "covariates")?;
    check_finite(&ys, "outcomes")?;
    if xs.iter().all(|x| *x == xs[0]) {
        return Err(Error::Degenerate("all covariate values are equal".into()));
    }
    let (my, sy) = mean_sd(&ys);
    let (_, sx) = mean_sd(&xs);
    let scale = if sy > 0.0 { sy } else { my.abs().max(1.0) };
    let floor = SIGMA_FLOOR * scale;
    let n = pairs.len() as f64;
    let sigma_of = |s: f64| s.exp().max(floor);
    let objective = |p: &[f64]| {
        let sigma = sigma_of(p[2]);
        pairs
            .iter()
            .map(|(x, y)| r.score(p[0] + p[1] * x, sigma, *y))
            .sum::<f64>()
            / n
    };
    let mut opts = NelderMeadOptions::new(3);
    opts.step = vec![0.5 * scale, 0.5 * scale / sx, 0.5];
    let mut fit = nelder_mead(objective, &[my, 0.0, scale.ln()], &opts)?;
    fit.params[2] = sigma_of(fit.params[2]);
    finish(fit)
}

fn finish(fit: FitResult) -> Result<FitResult> {
    if !fit.objective.is_finite() {
        return Err(Error::Numeric(format!(
            "fit ended at a non-finite objective {}",
            fit.objective
        )));
    }
    Ok(fit)
}

/// Closed-form Gaussian MLE (mean, biased standard deviation).
pub fn normal_mle(data: &[f64]) -> (f64, f64) {
    mean_sd(data)
}

/// Mean log density of N(μ, σ²) over `data`; used to cross-check the log objective.
pub fn normal_log_likelihood(data: &[f64], mu: f64, sigma: f64) -> f64 {
    let n = Normal::new(mu, sigma).expect("valid normal");
    data.iter().map(|y| n.ln_pdf(*y)).sum::<f64>() / data.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::StandardNormal;

    fn normal_draws(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
        let mut r = rng(seed, 1);
        (0..n)
            .map(|_| mu + sigma * r.sample::<f64, _>(StandardNormal))
            .collect()
    }

    #[test]
    fn quadratic_bowl() {
        let a = [1.5, -2.0, 0.25];
        let f = |x: &[f64]| x.iter().zip(&a).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
        let r = nelder_mead(f, &[0.0; 3], &NelderMeadOptions::new(3)).unwrap();
        assert!(r.converged);
        for (p, v) in r.params.iter().zip(&a) {
            assert_abs_diff_eq!(p, v, epsilon = 1e-8);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &NelderMeadOptions::new(2)).unwrap();
        assert_abs_diff_eq!(r.params[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(r.params[1], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn zero_budget_and_bad_start() {
        let mut o = NelderMeadOptions::new(1);
        o.max_iter = 0;
        let r = nelder_mead(|x| x[0] * x[0], &[3.0], &o).unwrap();
        assert_eq!((r.params, r.converged, r.iterations), (vec![3.0], false, 0));
        assert!(nelder_mead(|_| f64::NAN, &[0.0], &NelderMeadOptions::new(1)).is_err());
        // non-finite values away from the start are treated as +∞
        let r = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[0.2],
            &NelderMeadOptions::new(1),
        )
        .unwrap();
        assert_abs_diff_eq!(r.params[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn log_fit_is_the_mle() {
        let data = normal_draws(10_000, 2.0, 3.0, 11);
        let fit = fit_min_score(Family::Normal, &ScoringRuleSpec::Log, &data).unwrap();
        let (m, s) = normal_mle(&data);
        assert_abs_diff_eq!(fit.params[0], m, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.params[1], s, epsilon = 1e-6);
        assert_abs_diff_eq!(
            fit.objective,
            -normal_log_likelihood(&data, m, s),
            epsilon = 1e-12
        );
    }

    #[test]
    fn crps_fit_recovers_generator_and_dominates() {
        let data = normal_draws(10_000, 2.0, 3.0, 12);
        let rule = ScoringRuleSpec::parse("crps").unwrap();
        let fit = fit_min_score(Family::Normal, &rule, &data).unwrap();
        assert!((fit.params[0] - 2.0).abs() < 0.1 && (fit.params[1] - 3.0).abs() < 0.1);
        assert!(fit.objective <= normal_objective(&rule, &data, 2.0, 3.0).unwrap() + 1e-9);
        let log = fit_min_score(Family::Normal, &ScoringRuleSpec::Log, &data).unwrap();
        assert!(
            log.objective
                <= normal_objective(&ScoringRuleSpec::Log, &data, 2.0, 3.0).unwrap() + 1e-9
        );
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_min_score(Family::Normal, &ScoringRuleSpec::Log, &[1.0; 5]),
            Err(Error::Degenerate(_))
        ));
        assert!(fit_min_score(Family::Normal, &ScoringRuleSpec::Log, &[1.0]).is_err());
        assert!(matches!(
            fit_min_score(Family::Normal, &ScoringRuleSpec::Brier, &[1.0, 2.0]),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            fit_conditional_min_score(&ScoringRuleSpec::Log, &[(1.0, 0.0), (1.0, 1.0), (1.0, 3.0)]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn conditional_fit() {
        let noise = normal_draws(10_000, 0.0, 1.0, 13);
        let mut r = rng(13, 2);
        let pairs: Vec<(f64, f64)> = noise
            .iter()
            .map(|e| {
                let x: f64 = r.random_range(-2.0..2.0);
                (x, 1.0 + 2.0 * x + e)
            })
            .collect();
        for rule in [
            ScoringRuleSpec::Log,
            ScoringRuleSpec::parse("crps").unwrap(),
        ] {
            let fit = fit_conditional_min_score(&rule, &pairs).unwrap();
            assert!(
                (fit.params[0] - 1.0).abs() < 0.05,
                "{rule}: {:?}",
                fit.params
            );
            assert!(
                (fit.params[1] - 2.0).abs() < 0.05,
                "{rule}: {:?}",
                fit.params
            );
        }
    }

    #[test]
    fn conditional_fit_noiseless_hits_clamp() {
        let pairs: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 / 4.0, i as f64 / 4.0)).collect();
        let fit = fit_conditional_min_score(&ScoringRuleSpec::Log, &pairs).unwrap();
        assert_abs_diff_eq!(fit.params[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.params[1], 1.0, epsilon = 1e-6);
        let (_, sy) = mean_sd(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        assert_eq!(fit.params[2], SIGMA_FLOOR * sy);
    }
}
