use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::ContinuousCDF;

use crate::error::{invalid, Error, Result};
use crate::forecast::{rng, std_normal};
use crate::quadrature::adaptive_simpson;

/// Translation-invariant kernels with a known spectral measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralKernel {
    /// |x − y|, spectral weight ∝ u⁻².
    Crps,
    /// 2 − 2exp(−(x − y)²/λ). Its spectral weight is exp(−λu²/4), the listed
    /// exp(−λ′u²) form with λ′ = λ/4.
    Gaussian { lambda: f64 },
}

impl SpectralKernel {
    pub fn name(&self) -> String {
        match self {
            SpectralKernel::Crps => "crps".into(),
            SpectralKernel::Gaussian { lambda } => format!("gaussian:lambda={lambda}"),
        }
    }

    fn weight(&self, u: f64) -> f64 {
        match self {
            SpectralKernel::Crps => 1.0 / (u * u),
            SpectralKernel::Gaussian { lambda } => (-lambda * u * u / 4.0).exp(),
        }
    }
}

fn abs_moment(m: f64, s: f64) -> f64 {
    // E|Z| for Z ~ N(m, s²)
    s * (2.0 / PI).sqrt() * (-m * m / (2.0 * s * s)).exp()
        + m * (1.0 - 2.0 * std_normal().cdf(-m / s))
}

fn gauss_moment(m: f64, s: f64, lambda: f64) -> f64 {
    // E exp(−Z²/λ) for Z ~ N(m, s²)
    (1.0 + 2.0 * s * s / lambda).powf(-0.5) * (-m * m / (lambda + 2.0 * s * s)).exp()
}

/// Closed-form kernel divergence between N(m₁, s₁²) and N(m₂, s₂²).
pub fn normal_pair_divergence(k: SpectralKernel, p: (f64, f64), q: (f64, f64)) -> f64 {
    let (dm, spq) = (p.0 - q.0, (p.1 * p.1 + q.1 * q.1).sqrt());
    let (spp, sqq) = (p.1 * 2f64.sqrt(), q.1 * 2f64.sqrt());
    match k {
        SpectralKernel::Crps => {
            abs_moment(dm, spq) - 0.5 * abs_moment(0.0, spp) - 0.5 * abs_moment(0.0, sqq)
        }
        SpectralKernel::Gaussian { lambda } => {
            gauss_moment(0.0, spp, lambda) + gauss_moment(0.0, sqq, lambda)
                - 2.0 * gauss_moment(dm, spq, lambda)
        }
    }
}

/// |φ_P(u) − φ_Q(u)|² for two normal characteristic functions, written as
/// (A − B)² + 4AB sin²(Δm u / 2) with moduli A, B so that nothing cancels near u = 0.
fn cf_gap(p: (f64, f64), q: (f64, f64), u: f64) -> f64 {
    let (a, b) = (p.1 * p.1 * u * u / 2.0, q.1 * q.1 * u * u / 2.0);
    let (ma, mb) = ((-a).exp(), (-b).exp());
    let diff = -ma * (a - b).exp_m1();
    let s = ((p.0 - q.0) * u / 2.0).sin();
    diff * diff + 4.0 * ma * mb * s * s
}

/// Lower limit of the spectral integral; the integrand is bounded near zero.
const U_MIN: f64 = 1e-6;

fn spectral_integral(k: SpectralKernel, p: (f64, f64), q: (f64, f64)) -> Result<f64> {
    // every term of the gap carries a factor exp(−s²u²/2) with s ≥ min(s₁, s₂); at
    // U = √60 / s it is below e⁻³⁰ and the tail is far under 1e-10
    let s = p.1.min(q.1);
    let upper = 60f64.sqrt() / s;
    let f = |u: f64| cf_gap(p, q, u) * k.weight(u);
    let r = adaptive_simpson(f, U_MIN, upper, 1e-12, 60)?;
    Ok(r.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub kernel: String,
    pub pairs: usize,
    pub seed: u64,
    /// d(P, Q) / ∫|φ_P − φ_Q|² m(u) du on the first pair.
    pub constant: f64,
    /// max |ratio / constant − 1| over all pairs.
    pub max_rel_deviation: f64,
    pub passed: bool,
}

/// Checks that the kernel divergence between random normal pairs is a constant
/// multiple of the weighted characteristic-function distance, within 2%.
pub fn spectral_proportionality_check(
    k: SpectralKernel,
    pairs: usize,
    seed: u64,
) -> Result<SpectralReport> {
    if let SpectralKernel::Gaussian { lambda } = k {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid(format!(
                "kernel lambda must be positive, got {lambda}"
            )));
        }
    }
    if pairs == 0 {
        return Err(invalid("spectral check needs at least one pair"));
    }
    let mut r = rng(seed, 0x5bec);
    let mut draw = || -> (f64, f64) { (r.random_range(-2.0..2.0), r.random_range(0.5..2.0)) };
    let mut ratios = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (p, q) = (draw(), draw());
        let d = normal_pair_divergence(k, p, q);
        let i = spectral_integral(k, p, q)?;
        if !(i > 0.0) {
            return Err(Error::Numeric(format!(
                "spectral integral {i} for {p:?} vs {q:?}"
            )));
        }
        ratios.push(d / i);
    }
    let constant = ratios[0];
    let max_rel_deviation = ratios
        .iter()
        .map(|v| (v / constant - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(SpectralReport {
        kernel: k.name(),
        pairs,
        seed,
        constant,
        max_rel_deviation,
        passed: max_rel_deviation <= 0.02,
    })
}
