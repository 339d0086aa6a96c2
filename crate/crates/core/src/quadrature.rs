//! One-dimensional quadrature.

use crate::error::{Error, Result};

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Composite Simpson rule on `[a, b]`, halving the panel width until two successive
/// estimates differ by at most `tol` (Richardson-scaled), or `max_halvings` is hit.
pub fn simpson_halving<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_halvings: u32,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut n: usize = 2;
    let h0 = (b - a) / n as f64;
    // endpoints, odd-indexed and even-interior sums are kept so each halving only
    // evaluates the new midpoints
    let ends = f(a) + f(b);
    let mut odd = f(a + h0);
    let mut even = 0.0;
    let mut prev = (ends + 4.0 * odd + 2.0 * even) * h0 / 3.0;
    for _ in 0..max_halvings {
        n *= 2;
        let h = (b - a) / n as f64;
        even += odd;
        odd = (0..n / 2).map(|k| f(a + (2 * k + 1) as f64 * h)).sum();
        let cur = (ends + 4.0 * odd + 2.0 * even) * h / 3.0;
        if !cur.is_finite() {
            return Err(Error::Numeric("non-finite integrand".into()));
        }
        let err = (cur - prev).abs() / 15.0;
        if err <= tol && n >= 16 {
            return Ok(Integral {
                value: cur,
                error: err,
            });
        }
        prev = cur;
    }
    Err(Error::Numeric(format!(
        "Simpson rule on [{a}, {b}] did not reach tolerance {tol} in {max_halvings} halvings"
    )))
}

/// Recursive adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<Integral> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let v = recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut err)?;
    Ok(Integral {
        value: v,
        error: err,
    })
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Numeric(format!("non-finite integrand near {m}")));
    }
    if delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "adaptive Simpson exceeded depth on [{a}, {b}]"
        )));
    }
    Ok(
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, err)?
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, err)?,
    )
}
