//! Hand-computed reference values through the public API.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use propscore::forecast::{forecast_cdf, forecast_sample, parse_forecast};
use propscore::kernel::{
    generalized_kernel_score, kernel_divergence, kernel_entropy, GFunction, Kernel,
};
use propscore::local::{hyvarinen_score, hyvarinen_score_fd, logcosh_score};
use propscore::multivariate::{dawid_sebastiani, variogram_score};
use propscore::univariate::{crps_normal, crps_numeric, tw_crps};
use propscore::{
    score, DensityOracle, Ensemble, EnsembleVariant, Error, Forecast, MvNormal, Observation,
    Parametric, ScoringRuleSpec,
};

fn s(rule: &str, f: &Forecast, y: Observation) -> f64 {
    score(&ScoringRuleSpec::parse(rule).unwrap(), f, &y)
        .unwrap()
        .get()
}

fn ens(xs: &[f64]) -> Forecast {
    Forecast::ensemble(xs).unwrap()
}

fn mv(members: &[[f64; 2]]) -> Ensemble {
    Ensemble::new(members.iter().map(|m| m.to_vec()).collect(), None).unwrap()
}

#[test]
fn records_and_cdf() {
    let f = parse_forecast(r#"{"type":"normal","mu":0,"sigma":1}"#).unwrap();
    assert_eq!(f, Forecast::normal(0.0, 1.0).unwrap());
    assert!(matches!(
        parse_forecast(r#"{"type":"categorical","probs":[0.7,0.4]}"#),
        Err(Error::Simplex(_))
    ));
    let e = ens(&[0.0, 1.0]);
    assert_eq!(forecast_cdf(&e, 0.5).unwrap(), 0.5);
    assert_eq!(forecast_cdf(&e, -1.0).unwrap(), 0.0);
    assert_eq!(forecast_cdf(&f, 0.0).unwrap(), 0.5);
}

#[test]
fn sampling_is_seeded() {
    let point = Forecast::categorical(vec![1.0, 0.0]).unwrap();
    assert!(forecast_sample(&point, 5, 9)
        .unwrap()
        .iter()
        .all(|o| *o == Observation::Class(0)));
    let n = Forecast::normal(0.0, 1.0).unwrap();
    let a = forecast_sample(&n, 10_000, 1).unwrap();
    assert_eq!(a, forecast_sample(&n, 10_000, 1).unwrap());
    let mean = a.iter().map(|o| o.as_scalar().unwrap()).sum::<f64>() / 1e4;
    assert!(mean.abs() < 0.05);
}

#[test]
fn crps_values() {
    let y = Observation::Scalar;
    assert_eq!(s("crps:fair", &ens(&[0.0, 1.0]), y(0.5)), 0.0);
    assert_eq!(s("crps:fair", &ens(&[0.0, 1.0]), y(2.0)), 1.0);
    assert_eq!(s("crps:empirical", &ens(&[0.0, 1.0]), y(0.5)), 0.25);
    assert_eq!(s("crps:empirical", &ens(&[1.5]), y(-2.0)), 3.5);
    // (√2 − 1)/√π and 10 − 1/√π up to terms below 1e-20
    assert_abs_diff_eq!(
        crps_normal(0.0, 1.0, 0.0).unwrap().get(),
        (2f64.sqrt() - 1.0) / PI.sqrt(),
        epsilon = 1e-14
    );
    assert_abs_diff_eq!(
        crps_normal(0.0, 1.0, 10.0).unwrap().get(),
        10.0 - 1.0 / PI.sqrt(),
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(
        crps_normal(0.0, 3.0, 0.0).unwrap().get(),
        3.0 * crps_normal(0.0, 1.0, 0.0).unwrap().get(),
        epsilon = 1e-14
    );
    let quad = crps_numeric(&Forecast::normal(0.0, 1.0).unwrap(), 0.0, 1e-10)
        .unwrap()
        .get();
    assert_abs_diff_eq!(quad, 0.23370, epsilon = 1e-5);
    assert_abs_diff_eq!(
        crps_numeric(&ens(&[0.0, 1.0]), 0.5, 1e-10).unwrap().get(),
        0.25,
        epsilon = 1e-12
    );
    assert_eq!(
        tw_crps(&[0.0, 1.0], 2.0, 0.5, EnsembleVariant::Fair)
            .unwrap()
            .get(),
        1.0
    );
    assert_eq!(
        tw_crps(&[-1.0, 0.2], 0.1, 0.5, EnsembleVariant::Fair)
            .unwrap()
            .get(),
        0.0
    );
}

#[test]
fn categorical_values() {
    let c = |p: &[f64]| Forecast::categorical(p.to_vec()).unwrap();
    let k = Observation::Class;
    assert_eq!(s("log", &c(&[1.0, 0.0]), k(0)), 0.0);
    assert_eq!(s("log", &c(&[1.0, 0.0]), k(1)), f64::INFINITY);
    assert_abs_diff_eq!(
        s(
            "log",
            &Forecast::normal(0.0, 1.0).unwrap(),
            Observation::Scalar(0.0)
        ),
        0.5 * (2.0 * PI).ln(),
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        s("quadratic", &c(&[0.7, 0.3]), k(0)),
        -0.82,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(s("quadratic", &c(&[0.25; 4]), k(2)), -0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(s("brier", &c(&[0.3, 0.7]), k(1)), 0.09, epsilon = 1e-15);
    assert_abs_diff_eq!(
        2.0 * 0.09 - 1.0,
        s("quadratic", &c(&[0.3, 0.7]), k(1)),
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        s("spherical", &c(&[0.6, 0.4]), k(0)),
        -0.6 / 0.52f64.sqrt(),
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        s("pseudospherical:alpha=3", &c(&[0.5, 0.5]), k(0)),
        -(0.25f64.cbrt()),
        epsilon = 1e-15
    );
}

#[test]
fn multivariate_values() {
    let p = Forecast::Ensemble(mv(&[[0.0, 0.0], [1.0, 0.0]]));
    let y = || Observation::Vector(vec![0.0, 0.0]);
    assert_eq!(s("energy:beta=1,fair", &p, y()), 0.0);
    assert_eq!(s("energy:beta=1,empirical", &p, y()), 0.25);
    assert_eq!(
        variogram_score(&mv(&[[0.0, 0.0]]), &[0.0, 1.0], 1.0, None)
            .unwrap()
            .get(),
        2.0
    );
    let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
    assert_eq!(
        variogram_score(&mv(&[[3.0, -1.0]]), &[0.5, 2.0], 1.0, Some(&zero))
            .unwrap()
            .get(),
        0.0
    );
    let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    assert_eq!(
        dawid_sebastiani(&[0.0, 0.0], &eye, &[0.0, 0.0])
            .unwrap()
            .get(),
        0.0
    );
    assert_eq!(
        dawid_sebastiani(&[0.0], &[vec![1.0]], &[2.0])
            .unwrap()
            .get(),
        4.0
    );
    assert!(dawid_sebastiani(&[0.0, 0.0], &[vec![1.0, 1.0], vec![1.0, 1.0]], &[0.0, 0.0]).is_err());
    let mvn = Forecast::Parametric(Parametric::MvNormal(
        MvNormal::new(vec![0.0, 0.0], eye).unwrap(),
    ));
    assert_eq!(s("ds", &mvn, y()), 0.0);
}

#[test]
fn kernel_values() {
    let e1 = Kernel::energy(1.0).unwrap();
    assert_eq!(e1.eval(&[0.0], &[1.0]), 1.0);
    assert_eq!(Kernel::gaussian(1.0).unwrap().eval(&[0.3], &[0.3]), 0.0);
    assert!(Kernel::energy(2.5).is_err());
    let d0 = Ensemble::univariate(&[0.0]).unwrap();
    let d1 = Ensemble::univariate(&[1.0]).unwrap();
    assert_eq!(kernel_divergence(&e1, &d0, &d1).unwrap(), 1.0);
    assert_eq!(kernel_divergence(&e1, &d0, &d0).unwrap(), 0.0);
    assert_eq!(
        kernel_entropy(&e1, &Ensemble::univariate(&[0.0, 1.0]).unwrap()).unwrap(),
        0.25
    );
    let g = generalized_kernel_score(
        &e1,
        GFunction::Log1p,
        &Ensemble::univariate(&[0.4]).unwrap(),
        &[0.4],
    )
    .unwrap();
    assert_eq!(g.get(), 0.0);
}

#[test]
fn local_values() {
    let n = DensityOracle::normal(0.0, 1.0);
    assert_eq!(hyvarinen_score(&n, &[0.0]).unwrap().get(), -1.0);
    assert_eq!(hyvarinen_score(&n, &[2.0]).unwrap().get(), 1.0);
    assert_eq!(
        hyvarinen_score(&n.shifted(17.0), &[2.0]).unwrap().get(),
        1.0
    );
    let raw = DensityOracle::new(1, |y| -0.5 * y[0] * y[0]);
    assert_abs_diff_eq!(
        hyvarinen_score_fd(&raw, &[0.0], Some(1e-4)).unwrap().get(),
        -1.0,
        epsilon = 1e-6
    );
    assert_abs_diff_eq!(
        hyvarinen_score_fd(&raw, &[2.0], Some(1e-4)).unwrap().get(),
        1.0,
        epsilon = 1e-6
    );
    assert!(hyvarinen_score_fd(&raw, &[0.0], Some(0.0)).is_err());
    assert_eq!(logcosh_score(0.0, 0.0).unwrap().get(), 0.0);
    assert_eq!(logcosh_score(0.0, -1.0).unwrap().get(), -1.0);
    assert_abs_diff_eq!(
        logcosh_score(50.0, 0.0).unwrap().get(),
        2f64.ln(),
        epsilon = 1e-12
    );
}
