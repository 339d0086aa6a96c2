use propscore::estimation::{fit_conditional_min_score, fit_min_score, Family};
use propscore::evaluation::{compare, corp_decompose, instance_scores, DecompRule, Grouping};
use propscore::forecast::{forecast_sample, serialize_observation};
use propscore::lab::{
    concavity_scan, crps_representation_check, entropy_of, invariance_check, propriety_scan,
    random_ensemble, random_rotation, spectral_proportionality_check, symmetry_metric_check,
    Transform,
};
use propscore::{Categorical, ExtReal, Forecast, Observation, ScoringRuleSpec};
use serde_json::{json, Value};

use crate::input::{read_csv, read_forecasts, read_observations, CliError, CliResult};
use crate::Command;

pub fn run(cmd: Command) -> CliResult<Value> {
    match cmd {
        Command::Score {
            rule,
            forecasts,
            obs,
        } => score(&rule, &forecasts, &obs),
        Command::Compare {
            rule,
            forecasts_a,
            forecasts_b,
            obs,
        } => {
            let rule = ScoringRuleSpec::parse(&rule)?;
            let a = read_forecasts(&forecasts_a)?;
            let b = read_forecasts(&forecasts_b)?;
            let y = read_observations(&obs)?;
            let report = compare(&rule, &a, &b, &y)?;
            Ok(json!({ "rule": rule.name(), "report": report }))
        }
        Command::Decompose {
            rule,
            forecasts,
            obs,
            bins,
        } => decompose(&rule, &forecasts, &obs, bins),
        Command::Fit {
            family,
            rule,
            data,
            seed,
        } => fit(&family, &rule, &data, seed),
        Command::Verify {
            rule,
            check,
            grid_step,
            classes,
            trials,
            transform,
            seed,
        } => verify(
            &rule,
            &check,
            grid_step,
            classes,
            trials,
            transform.as_deref(),
            seed,
        ),
        Command::Sample { forecasts, n, seed } => {
            let fs = read_forecasts(&forecasts)?;
            let samples = fs
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let draws = forecast_sample(f, n, seed.wrapping_add(i as u64))?;
                    Ok(Value::Array(draws.iter().map(observation_json).collect()))
                })
                .collect::<CliResult<Vec<Value>>>()?;
            Ok(json!({ "n": n, "seed": seed, "samples": samples }))
        }
    }
}

fn observation_json(y: &Observation) -> Value {
    serde_json::from_str(&serialize_observation(y)).expect("observation JSON")
}

fn ext(v: f64) -> CliResult<ExtReal> {
    Ok(ExtReal::new(v)?)
}

fn aligned(forecasts: usize, obs: usize) -> CliResult<()> {
    if forecasts != obs {
        return Err(CliError::Usage(format!(
            "forecast file has {forecasts} records but observation file has {obs}"
        )));
    }
    Ok(())
}

fn score(rule: &str, forecasts: &str, obs: &str) -> CliResult<Value> {
    let rule = ScoringRuleSpec::parse(rule)?;
    let fs = read_forecasts(forecasts)?;
    let ys = read_observations(obs)?;
    aligned(fs.len(), ys.len())?;
    let scores = instance_scores(&rule, &fs, &ys)?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let scores = scores.into_iter().map(ext).collect::<CliResult<Vec<_>>>()?;
    Ok(json!({
        "rule": rule.name(),
        "n": scores.len(),
        "scores": scores,
        "mean": ext(mean)?,
    }))
}

fn decompose(rule: &str, forecasts: &str, obs: &str, bins: Option<usize>) -> CliResult<Value> {
    let rule: DecompRule = rule.parse()?;
    let fs = read_forecasts(forecasts)?;
    let ys = read_observations(obs)?;
    aligned(fs.len(), ys.len())?;
    let cats = fs
        .into_iter()
        .map(|f| match f {
            Forecast::Categorical(c) => Ok(c),
            other => Err(CliError::Usage(format!(
                "decomposition needs categorical forecasts, got {}",
                other.kind()
            ))),
        })
        .collect::<CliResult<Vec<Categorical>>>()?;
    let classes = ys
        .iter()
        .map(|y| y.as_class())
        .collect::<propscore::Result<Vec<_>>>()?;
    let grouping = bins.map_or(Grouping::Exact, Grouping::Bins);
    let report = corp_decompose(rule, &cats, &classes, grouping)?;
    Ok(json!({
        "rule": rule,
        "grouping": bins.map_or_else(|| "exact".to_string(), |k| format!("bins({k})")),
        "report": report,
    }))
}

fn fit(family: &str, rule: &str, data: &str, seed: u64) -> CliResult<Value> {
    let spec = ScoringRuleSpec::parse(rule)?;
    match family {
        "normal" => {
            let rows = read_csv(data, 1)?;
            let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let r = fit_min_score(Family::Normal, &spec, &xs)?;
            Ok(json!({
                "family": family,
                "rule": spec.name(),
                "seed": seed,
                "n": xs.len(),
                "params": { "mu": r.params[0], "sigma": r.params[1] },
                "objective": r.objective,
                "iterations": r.iterations,
                "converged": r.converged,
            }))
        }
        "normal-linear" => {
            let rows = read_csv(data, 2)?;
            let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
            let r = fit_conditional_min_score(&spec, &pairs)?;
            Ok(json!({
                "family": family,
                "rule": spec.name(),
                "seed": seed,
                "n": pairs.len(),
                "params": { "a": r.params[0], "b": r.params[1], "sigma": r.params[2] },
                "objective": r.objective,
                "iterations": r.iterations,
                "converged": r.converged,
            }))
        }
        other => Err(CliError::Usage(format!(
            "unknown family {other:?}; expected normal or normal-linear"
        ))),
    }
}

fn parse_transform(spec: &str) -> CliResult<(Transform, usize)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut kv = Vec::new();
    for tok in rest.split(',').filter(|t| !t.is_empty()) {
        let (k, v) = tok.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("expected key=value in transform, got {tok:?}"))
        })?;
        let v: f64 = v.parse().map_err(|_| {
            CliError::Usage(format!("transform parameter {k} is not a number: {v:?}"))
        })?;
        kv.push((k.to_string(), v));
    }
    let get = |k: &str| kv.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
    let unknown = |allowed: &[&str]| {
        kv.iter()
            .find(|(n, _)| !allowed.contains(&n.as_str()))
            .map(|(n, _)| n.clone())
    };
    let check = |allowed: &[&str]| match unknown(allowed) {
        Some(n) => Err(CliError::Usage(format!(
            "unknown transform parameter {n:?}"
        ))),
        None => Ok(()),
    };
    match name {
        "translate" => {
            check(&["h"])?;
            Ok((Transform::Translate(vec![get("h").unwrap_or(1.0)]), 1))
        }
        "scale" => {
            check(&["c", "degree"])?;
            Ok((
                Transform::Scale {
                    c: get("c").unwrap_or(2.0),
                    degree: get("degree").unwrap_or(1.0),
                },
                1,
            ))
        }
        "rotate" => {
            check(&["d"])?;
            let d = get("d").unwrap_or(3.0);
            if d < 1.0 || d.fract() != 0.0 {
                return Err(CliError::Usage(format!(
                    "rotation dimension must be a positive integer, got {d}"
                )));
            }
            Ok((Transform::Rotate(Vec::new()), d as usize))
        }
        other => Err(CliError::Usage(format!("unknown transform {other:?}"))),
    }
}

fn verify(
    rule: &str,
    check: &str,
    grid_step: Option<f64>,
    classes: Option<usize>,
    trials: Option<usize>,
    transform: Option<&str>,
    seed: u64,
) -> CliResult<Value> {
    let spec = ScoringRuleSpec::parse(rule)?;
    let cat = |p: &[f64], y: usize| spec.categorical(p, y);
    let report = match check {
        "propriety" => {
            let n = classes.unwrap_or(2);
            let step = grid_step.unwrap_or(if n == 2 { 0.05 } else { 0.1 });
            serde_json::to_value(propriety_scan(cat, n, step)?)
        }
        "concavity" => {
            let n = classes.unwrap_or(3);
            let r = concavity_scan(|p: &[f64]| entropy_of(&cat, p), n, trials.unwrap_or(1000), seed)?;
            serde_json::to_value(r)
        }
        "invariance" => {
            let (mut t, d) = parse_transform(transform.unwrap_or("scale:c=2,degree=1"))?;
            if let Transform::Rotate(u) = &mut t {
                *u = random_rotation(d, seed);
            }
            let count = trials.unwrap_or(50);
            let instances: Vec<(Forecast, Observation)> = (0..count as u64)
                .map(|k| {
                    let base = seed.wrapping_mul(7919).wrapping_add(2 * k);
                    let e = random_ensemble(8, d, base);
                    let y = random_ensemble(1, d, base + 1).members()[0].clone();
                    let y = if d == 1 { Observation::Scalar(y[0]) } else { Observation::Vector(y) };
                    (Forecast::Ensemble(e), y)
                })
                .collect();
            serde_json::to_value(invariance_check(&spec, &t, &instances)?)
        }
        "symmetry" => {
            let h = spec
                .kernel()
                .ok_or_else(|| CliError::Usage(format!("{} is not a kernel score", spec.name())))?;
            serde_json::to_value(symmetry_metric_check(&h, trials.unwrap_or(1000), 6, 1, seed)?)
        }
        "crps-rep" => {
            if !matches!(spec, ScoringRuleSpec::Crps { .. }) {
                return Err(CliError::Usage("crps-rep applies to the crps rule".into()));
            }
            let instances: Vec<(Vec<f64>, f64)> = (0..trials.unwrap_or(100) as u64)
                .map(|k| {
                    let base = seed.wrapping_mul(7919).wrapping_add(2 * k);
                    let members = random_ensemble(1 + (k as usize % 12), 1, base);
                    let y = random_ensemble(1, 1, base + 1).members()[0][0];
                    (members.members().iter().map(|x| x[0]).collect(), y)
                })
                .collect();
            serde_json::to_value(crps_representation_check(&instances)?)
        }
        "spectral" => {
            let k = spec.kernel().and_then(|h| h.as_spectral()).ok_or_else(|| {
                CliError::Usage(format!(
                    "spectral check supports crps, energy:beta=1 and gaussian kernels, got {}",
                    spec.name()
                ))
            })?;
            serde_json::to_value(spectral_proportionality_check(k, trials.unwrap_or(20), seed)?)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown check {other:?}; expected propriety, concavity, invariance, symmetry, crps-rep or spectral"
            )))
        }
    }
    .expect("reports serialise");
    Ok(json!({ "rule": spec.name(), "check": check, "seed": seed, "report": report }))
}
