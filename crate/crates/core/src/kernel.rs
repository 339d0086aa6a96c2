//! Kernel scores built from conditionally negative definite kernels.
//!
//! For a kernel `h ≥ 0` the score of a forecast `P` at outcome `y` is
//!
//! ```text
//! S(P, y) = ∫ h(x, y) dP(x) − ½ ∬ h(x, x') dP(x) dP(x')
//! ```
//!
//! with entropy `H(P) = ½ ∬ h dP dP` and divergence `d(P, Q) = −½ ∬ h d(P−Q) d(P−Q)`.
//! Positive definite kernels `k` enter through `h(x, y) = k(x,x) + k(y,y) − 2k(x,y)`,
//! which keeps `h ≥ 0` and `h(x, x) = 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::forecast::Ensemble;
use crate::linalg::dist_sq;
use crate::univariate::EnsembleVariant;
use crate::value::{ScoreFlag, ScoreValue};

type ChainFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type WeightFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Chaining map `v` for threshold weighting: `h'(x, y) = h(v(x), v(y))`.
#[derive(Clone)]
pub enum Chain {
    Identity,
    /// Componentwise `max(x, t)`.
    Threshold(f64),
    Custom(Arc<ChainFn>),
}

impl Chain {
    pub fn custom(v: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Chain::Custom(Arc::new(v))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Chain::Identity => x.to_vec(),
            Chain::Threshold(t) => x.iter().map(|v| v.max(*t)).collect(),
            Chain::Custom(v) => v(x),
        }
    }
}

/// Weight `w` for vertical rescaling: `h'(x, y) = h(x, y) w(x) w(y)`.
#[derive(Clone)]
pub enum Weight {
    Constant(f64),
    Custom(Arc<WeightFn>),
}

impl Weight {
    pub fn custom(w: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Weight::Custom(Arc::new(w))
    }

    /// Weight at `x`; negative or NaN weights evaluate to NaN, which every scoring
    /// routine rejects.
    pub fn at(&self, x: &[f64]) -> f64 {
        let w = match self {
            Weight::Constant(c) => *c,
            Weight::Custom(f) => f(x),
        };
        if w >= 0.0 {
            w
        } else {
            f64::NAN
        }
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chain::Identity => f.write_str("Identity"),
            Chain::Threshold(t) => write!(f, "Threshold({t})"),
            Chain::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant(c) => write!(f, "Constant({c})"),
            Weight::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// ‖x − y‖_α^β, Euclidean when α = 2.
    Energy {
        beta: f64,
        norm_alpha: f64,
    },
    Gaussian {
        lambda: f64,
    },
    Laplacian {
        lambda: f64,
    },
    Variogram {
        p: f64,
        weights: Option<Vec<Vec<f64>>>,
    },
    Chained {
        base: Box<Kernel>,
        chain: Chain,
    },
    Rescaled {
        base: Box<Kernel>,
        weight: Weight,
    },
}

/// Structural properties of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMeta {
    pub translation_invariant: bool,
    /// Degree α with h(cx, cy) = c^α h(x, y), when the kernel is homogeneous.
    pub homogeneity_degree: Option<f64>,
}

/// A symmetric, nonnegative, conditionally negative definite kernel.
#[derive(Debug, Clone)]
pub struct Kernel {
    kind: Kind,
}

/// How a kernel is reweighted by [`weight_transform`].
#[derive(Debug, Clone)]
pub enum WeightMode {
    Chaining(Chain),
    Rescaling(Weight),
}

impl Kernel {
    /// Energy kernel ‖x − y‖^β, β ∈ (0, 2).
    pub fn energy(beta: f64) -> Result<Self> {
        Self::energy_with_norm(beta, 2.0)
    }

    /// Energy kernel with the ℓ_α (quasi-)norm, α ∈ (0, 2] and β ≤ α.
    pub fn energy_with_norm(beta: f64, norm_alpha: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(invalid(format!(
                "energy beta must lie in (0,2), got {beta}"
            )));
        }
        if !(norm_alpha > 0.0 && norm_alpha <= 2.0) {
            return Err(invalid(format!(
                "norm alpha must lie in (0,2], got {norm_alpha}"
            )));
        }
        if beta > norm_alpha {
            return Err(invalid(format!(
                "beta {beta} exceeds norm alpha {norm_alpha}"
            )));
        }
        Ok(Kernel {
            kind: Kind::Energy { beta, norm_alpha },
        })
    }

    /// h = 2 − 2 exp(−‖x − y‖² / λ).
    pub fn gaussian(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Kernel {
            kind: Kind::Gaussian { lambda },
        })
    }

    /// h = 2 − 2 exp(−‖x − y‖ / λ).
    pub fn laplacian(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Kernel {
            kind: Kind::Laplacian { lambda },
        })
    }

    /// h(x, y) = Σᵢⱼ wᵢⱼ (|xᵢ − xⱼ|^p − |yᵢ − yⱼ|^p)². Without explicit weights,
    /// wᵢⱼ = 1 off the diagonal and 0 on it.
    pub fn variogram(p: f64, weights: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(invalid(format!(
                "variogram order must be positive, got {p}"
            )));
        }
        if let Some(w) = &weights {
            check_variogram_weights(w, w.len())?;
        }
        Ok(Kernel {
            kind: Kind::Variogram { p, weights },
        })
    }

    /// Stable identifier in the CLI kernel grammar.
    pub fn id(&self) -> String {
        match &self.kind {
            Kind::Energy { beta, norm_alpha } if *norm_alpha == 2.0 => {
                format!("energy:beta={beta}")
            }
            Kind::Energy { beta, norm_alpha } => format!("energy:beta={beta},alpha={norm_alpha}"),
            Kind::Gaussian { lambda } => format!("gaussian:lambda={lambda}"),
            Kind::Laplacian { lambda } => format!("laplacian:lambda={lambda}"),
            Kind::Variogram { p, .. } => format!("variogram:p={p}"),
            Kind::Chained { base, chain } => match chain {
                Chain::Threshold(t) => format!("tw:base={},t={t}", base.id()),
                _ => format!("chained({})", base.id()),
            },
            Kind::Rescaled { base, .. } => format!("rescaled({})", base.id()),
        }
    }

    pub fn meta(&self) -> KernelMeta {
        match &self.kind {
            Kind::Energy { beta, .. } => KernelMeta {
                translation_invariant: true,
                homogeneity_degree: Some(*beta),
            },
            Kind::Gaussian { .. } | Kind::Laplacian { .. } => KernelMeta {
                translation_invariant: true,
                homogeneity_degree: None,
            },
            Kind::Variogram { p, .. } => KernelMeta {
                translation_invariant: false,
                homogeneity_degree: Some(2.0 * p),
            },
            Kind::Chained { .. } | Kind::Rescaled { .. } => KernelMeta {
                translation_invariant: false,
                homogeneity_degree: None,
            },
        }
    }

    /// The kernel as one with a closed-form spectral check, if it is one.
    pub fn as_spectral(&self) -> Option<crate::lab::SpectralKernel> {
        match &self.kind {
            Kind::Energy { beta, norm_alpha } if *beta == 1.0 && *norm_alpha == 2.0 => {
                Some(crate::lab::SpectralKernel::Crps)
            }
            Kind::Gaussian { lambda } => {
                Some(crate::lab::SpectralKernel::Gaussian { lambda: *lambda })
            }
            _ => None,
        }
    }

    /// True for energy kernels whose norm exponent is below one.
    pub fn uses_quasi_norm(&self) -> bool {
        match &self.kind {
            Kind::Energy { norm_alpha, .. } => *norm_alpha < 1.0,
            Kind::Chained { base, .. } | Kind::Rescaled { base, .. } => base.uses_quasi_norm(),
            _ => false,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            Kind::Energy { beta, norm_alpha } => {
                if *norm_alpha == 2.0 {
                    dist_sq(x, y).powf(beta / 2.0)
                } else {
                    let s: f64 = x
                        .iter()
                        .zip(y)
                        .map(|(a, b)| (a - b).abs().powf(*norm_alpha))
                        .sum();
                    s.powf(beta / norm_alpha)
                }
            }
            Kind::Gaussian { lambda } => 2.0 - 2.0 * (-dist_sq(x, y) / lambda).exp(),
            Kind::Laplacian { lambda } => 2.0 - 2.0 * (-dist_sq(x, y).sqrt() / lambda).exp(),
            Kind::Variogram { p, weights } => variogram_kernel(x, y, *p, weights.as_deref()),
            Kind::Chained { base, chain } => base.eval(&chain.apply(x), &chain.apply(y)),
            Kind::Rescaled { base, weight } => base.eval(x, y) * weight.at(x) * weight.at(y),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!(
            "kernel lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

pub(crate) fn check_variogram_weights(w: &[Vec<f64>], d: usize) -> Result<()> {
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: w.len(),
        });
    }
    for row in w {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if row
            .iter()
            .any(|v| v.is_nan() || *v < 0.0 || v.is_infinite())
        {
            return Err(invalid("variogram weights must be finite and nonnegative"));
        }
    }
    Ok(())
}

pub(crate) fn variogram_weight(weights: Option<&[Vec<f64>]>, i: usize, j: usize) -> f64 {
    match weights {
        Some(w) => w[i][j],
        None => {
            if i == j {
                0.0
            } else {
                1.0
            }
        }
    }
}

fn variogram_kernel(x: &[f64], y: &[f64], p: f64, weights: Option<&[Vec<f64>]>) -> f64 {
    let d = x.len();
    if weights.is_some_and(|w| w.len() != d) {
        return f64::NAN;
    }
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let w = variogram_weight(weights, i, j);
            if w == 0.0 {
                continue;
            }
            let diff = (x[i] - x[j]).abs().powf(p) - (y[i] - y[j]).abs().powf(p);
            s += w * diff * diff;
        }
    }
    s
}

/// Builds a kernel from a specification string such as `energy:beta=1.0`,
/// `gaussian:lambda=1.0`, `laplacian:lambda=0.5`, `variogram:p=0.5` or
/// `tw:base=energy:beta=1.0,t=0.5`.
pub fn kernel_registry(spec: &str) -> Result<Kernel> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    if name == "tw" {
        let mut base = Vec::new();
        let mut t = None;
        for tok in rest.split(',') {
            if let Some(v) = tok.strip_prefix("t=") {
                t = Some(parse_num(v, "t")?);
            } else {
                base.push(tok);
            }
        }
        let base = base.join(",");
        let base = base
            .strip_prefix("base=")
            .ok_or_else(|| invalid(format!("tw kernel needs base=..., got {spec:?}")))?;
        let t = t.ok_or_else(|| invalid("tw kernel needs a threshold t=..."))?;
        return Ok(kernel_registry(base)?.chained(Chain::Threshold(t)));
    }
    let params = parse_params(rest)?;
    let get = |k: &str| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
    let allow = |keys: &[&str]| -> Result<()> {
        match params.iter().find(|(n, _)| !keys.contains(&n.as_str())) {
            Some((n, _)) => Err(invalid(format!(
                "unknown parameter {n:?} for kernel {name}"
            ))),
            None => Ok(()),
        }
    };
    match name {
        "energy" | "euclidean_beta" | "crps" => {
            allow(&["beta", "alpha"])?;
            Kernel::energy_with_norm(get("beta").unwrap_or(1.0), get("alpha").unwrap_or(2.0))
        }
        "gaussian" => {
            allow(&["lambda"])?;
            Kernel::gaussian(get("lambda").unwrap_or(1.0))
        }
        "laplacian" => {
            allow(&["lambda"])?;
            Kernel::laplacian(get("lambda").unwrap_or(1.0))
        }
        "variogram" => {
            allow(&["p"])?;
            Kernel::variogram(get("p").unwrap_or(0.5), None)
        }
        other => Err(invalid(format!("unknown kernel {other:?}"))),
    }
}

pub(crate) fn parse_num(v: &str, name: &str) -> Result<f64> {
    let x: f64 = match v.trim() {
        "-inf" => f64::NEG_INFINITY,
        "inf" | "+inf" => f64::INFINITY,
        s => s
            .parse()
            .map_err(|_| invalid(format!("parameter {name}: cannot parse {v:?}")))?,
    };
    if x.is_nan() {
        return Err(Error::NaN("parameter"));
    }
    Ok(x)
}

pub(crate) fn parse_params(rest: &str) -> Result<Vec<(String, f64)>> {
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

impl Kernel {
    pub fn chained(self, chain: Chain) -> Kernel {
        Kernel {
            kind: Kind::Chained {
                base: Box::new(self),
                chain,
            },
        }
    }

    pub fn rescaled(self, weight: Weight) -> Kernel {
        Kernel {
            kind: Kind::Rescaled {
                base: Box::new(self),
                weight,
            },
        }
    }
}

/// Threshold-weighting (chaining) or vertical rescaling of a kernel.
pub fn weight_transform(h: &Kernel, mode: WeightMode) -> Result<Kernel> {
    match mode {
        WeightMode::Chaining(chain) => {
            if let Chain::Threshold(t) = chain {
                if t.is_nan() {
                    return Err(Error::NaN("threshold"));
                }
            }
            Ok(h.clone().chained(chain))
        }
        WeightMode::Rescaling(weight) => {
            if let Weight::Constant(c) = weight {
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(invalid(format!(
                        "rescaling weight must be nonnegative, got {c}"
                    )));
                }
            }
            Ok(h.clone().rescaled(weight))
        }
    }
}

fn check_dims(p: &Ensemble, y: &[f64]) -> Result<()> {
    if p.dim() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: y.len(),
        });
    }
    Ok(())
}

fn kernel_output(v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(invalid(
            "kernel evaluated to NaN (negative rescaling weight or mismatched dimensions)",
        ))
    } else {
        Ok(v)
    }
}

/// Σᵢ wᵢ h(xᵢ, y).
fn mean_to(h: &Kernel, p: &Ensemble, y: &[f64]) -> f64 {
    p.members()
        .iter()
        .enumerate()
        .map(|(i, x)| p.weight(i) * h.eval(x, y))
        .sum()
}

/// Σ_{i≠j} wᵢ vⱼ h(xᵢ, zⱼ) for two ensembles (or one, with the diagonal skipped).
fn cross_sum(h: &Kernel, p: &Ensemble, q: &Ensemble, skip_diagonal: bool) -> f64 {
    let mut s = 0.0;
    for (i, x) in p.members().iter().enumerate() {
        let wi = p.weight(i);
        let mut row = 0.0;
        for (j, z) in q.members().iter().enumerate() {
            if skip_diagonal && i == j {
                continue;
            }
            row += q.weight(j) * h.eval(x, z);
        }
        s += wi * row;
    }
    s
}

/// Σᵢ wᵢ² h(xᵢ, xᵢ), nonzero only for kernels such as rescaled ones.
fn diagonal(h: &Kernel, p: &Ensemble) -> f64 {
    p.members()
        .iter()
        .enumerate()
        .map(|(i, x)| p.weight(i).powi(2) * h.eval(x, x))
        .sum()
}

/// Exact kernel score of an ensemble forecast by double summation.
///
/// The fair variant normalises the off-diagonal pairwise sum by `1 − Σ wᵢ²`, which is
/// `1 − 1/n` for uniform weights.
pub fn kernel_score_exact(
    h: &Kernel,
    p: &Ensemble,
    y: &[f64],
    variant: EnsembleVariant,
) -> Result<ScoreValue> {
    check_dims(p, y)?;
    if p.len() < variant.min_members() {
        return Err(Error::EnsembleTooSmall {
            required: variant.min_members(),
            found: p.len(),
        });
    }
    let first = mean_to(h, p, y);
    let pair = cross_sum(h, p, p, true);
    let value = match variant {
        EnsembleVariant::Empirical => first - 0.5 * (pair + diagonal(h, p)),
        EnsembleVariant::Fair => {
            let norm = 1.0 - p.weights().iter().map(|w| w * w).sum::<f64>();
            if norm <= 0.0 {
                return Err(invalid(
                    "fair estimator needs two members with positive weight",
                ));
            }
            first - 0.5 * pair / norm
        }
    };
    let mut out = ScoreValue::exact(kernel_output(value)?, crate::value::Method::NaiveExact)?
        .with_flag(variant.flag());
    if h.uses_quasi_norm() {
        out = out.with_flag(ScoreFlag::QuasiNorm);
    }
    Ok(out)
}

/// Unbiased sampling estimate of a kernel score with a jackknife standard error.
///
/// `sampler(m, seed)` must return `m` points; it is called once. For `m = 2` the
/// leave-one-out estimates are undefined and the standard error is reported as +∞.
pub fn kernel_score_mc<F>(
    h: &Kernel,
    mut sampler: F,
    y: &[f64],
    m: usize,
    seed: u64,
) -> Result<ScoreValue>
where
    F: FnMut(usize, u64) -> Result<Vec<Vec<f64>>>,
{
    if m < 2 {
        return Err(invalid(
            "Monte-Carlo kernel score needs at least two samples",
        ));
    }
    let xs = sampler(m, seed)?;
    if xs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: xs.len(),
        });
    }
    if let Some(x) = xs.iter().find(|x| x.len() != y.len()) {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.len(),
        });
    }
    let a: Vec<f64> = xs.iter().map(|x| h.eval(x, y)).collect();
    let mut rows = vec![0.0; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = h.eval(&xs[i], &xs[j]);
            rows[i] += v;
            rows[j] += v;
        }
    }
    let mf = m as f64;
    let a_sum: f64 = a.iter().sum();
    let t: f64 = rows.iter().sum();
    let est = kernel_output(a_sum / mf - t / (2.0 * mf * (mf - 1.0)))?;
    let se = if m == 2 {
        f64::INFINITY
    } else {
        let loo: Vec<f64> = (0..m)
            .map(|i| {
                (a_sum - a[i]) / (mf - 1.0) - (t - 2.0 * rows[i]) / (2.0 * (mf - 1.0) * (mf - 2.0))
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / mf;
        ((mf - 1.0) / mf * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
    };
    ScoreValue::monte_carlo(est, se)
}

/// Kernel divergence d(P, Q) = E h(X, Y) − ½ E h(X, X') − ½ E h(Y, Y').
///
/// Rounding noise below 1e-12 of the kernel scale is clamped to zero; a clearly negative
/// value means the kernel is not conditionally negative definite and is an error.
pub fn kernel_divergence(h: &Kernel, p: &Ensemble, q: &Ensemble) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    // a canonical argument order makes d(P, Q) and d(Q, P) bitwise equal
    let pq = if canonical_order(p, q) {
        cross_sum(h, p, q, false)
    } else {
        cross_sum(h, q, p, false)
    };
    let pp = cross_sum(h, p, p, false);
    let qq = cross_sum(h, q, q, false);
    let d = kernel_output(pq - 0.5 * (pp + qq))?;
    let scale = pq.abs().max(pp.abs()).max(qq.abs()).max(f64::MIN_POSITIVE);
    if d < 0.0 {
        if d >= -1e-12 * scale {
            return Ok(0.0);
        }
        return Err(Error::Numeric(format!(
            "negative divergence {d:e}: kernel is not conditionally negative definite"
        )));
    }
    Ok(d)
}

fn canonical_order(p: &Ensemble, q: &Ensemble) -> bool {
    let key = |e: &Ensemble| -> Vec<f64> {
        e.members()
            .iter()
            .flatten()
            .copied()
            .chain(e.weights())
            .collect()
    };
    let (a, b) = (key(p), key(q));
    let ord = a
        .iter()
        .zip(&b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()));
    ord.is_le()
}

/// Kernel entropy H(P) = ½ ∬ h dP dP.
pub fn kernel_entropy(h: &Kernel, p: &Ensemble) -> Result<f64> {
    kernel_output(0.5 * cross_sum(h, p, p, false))
}

/// Concave nondecreasing transform of a kernel entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GFunction {
    Identity,
    Log1p,
    /// √(u + ε) − √ε with ε = 1e-9, which keeps g'(0) finite.
    SqrtEps,
}

pub const SQRT_EPS: f64 = 1e-9;

impl GFunction {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            GFunction::Identity => u,
            GFunction::Log1p => u.ln_1p(),
            GFunction::SqrtEps => (u + SQRT_EPS).sqrt() - SQRT_EPS.sqrt(),
        }
    }

    pub fn derivative(self, u: f64) -> f64 {
        match self {
            GFunction::Identity => 1.0,
            GFunction::Log1p => 1.0 / (1.0 + u),
            GFunction::SqrtEps => 0.5 / (u + SQRT_EPS).sqrt(),
        }
    }
}

impl std::str::FromStr for GFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(GFunction::Identity),
            "log1p" => Ok(GFunction::Log1p),
            "sqrt" | "sqrt_eps" => Ok(GFunction::SqrtEps),
            other => Err(invalid(format!("unknown g function {other:?}"))),
        }
    }
}

/// Generalised kernel score with entropy g(H(P)):
///
/// ```text
/// S(P, y) = g'(H) ∫ h(x, y) dP(x) + g(H) − 2 g'(H) H,   H = ½ ∬ h dP dP
/// ```
///
/// This is the supergradient construction applied to g∘H. With g the identity it
/// is the plain kernel score (empirical variant).
pub fn generalized_kernel_score(
    h: &Kernel,
    g: GFunction,
    p: &Ensemble,
    y: &[f64],
) -> Result<ScoreValue> {
    check_dims(p, y)?;
    let ent = kernel_entropy(h, p)?;
    let gp = g.derivative(ent);
    if !gp.is_finite() {
        return Err(Error::Numeric(format!("g'({ent}) is not finite")));
    }
    let value = gp * mean_to(h, p, y) + g.eval(ent) - 2.0 * gp * ent;
    ScoreValue::exact(kernel_output(value)?, crate::value::Method::NaiveExact)
}
