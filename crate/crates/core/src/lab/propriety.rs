use serde::Serialize;

use super::random_simplex;
use crate::error::{invalid, Error, Result};
use crate::forecast::rng;

/// Expected scores are compared with this slack; strictness needs a margin above it.
pub const PROPRIETY_TOL: f64 = 1e-9;
/// Slack in the midpoint concavity inequality.
pub const CONCAVITY_TOL: f64 = 1e-12;

/// A pair (P, Q) with S(P, Q) < S(Q, Q).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProprietyWitness {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Σ_y q_y S(P, y).
    pub expected_p: f64,
    /// Σ_y q_y S(Q, y).
    pub expected_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProprietyReport {
    pub classes: usize,
    pub grid_step: f64,
    pub pairs_checked: usize,
    /// Pairs with S(P, Q) < S(Q, Q) − tolerance.
    pub violations: usize,
    /// Pairs at least half a grid step apart whose margin is not clearly positive.
    pub strict_failures: usize,
    /// Smallest S(P, Q) − S(Q, Q) over pairs with P ≠ Q.
    pub worst_margin: f64,
    pub witness: Option<ProprietyWitness>,
}

/// All points of the simplex on `classes` categories whose coordinates are
/// multiples of `step`. `1/step` must be an integer.
pub fn simplex_grid(classes: usize, step: f64) -> Result<Vec<Vec<f64>>> {
    if classes < 2 {
        return Err(invalid("simplex grid needs at least two classes"));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(invalid(format!("grid step must lie in (0, 1], got {step}")));
    }
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() > 1e-9 {
        return Err(invalid(format!(
            "1/grid_step must be an integer, got step {step}"
        )));
    }
    let m = m as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; classes];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<f64>>) {
        if k + 1 == cur.len() {
            cur[k] = left;
            out.push(cur.iter().map(|c| *c as f64 / m as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[k] = c;
            rec(k + 1, left - c, cur, m, out);
        }
    }
    rec(0, m, &mut cur, m, &mut out);
    Ok(out)
}

/// Σ_y q_y S(P, y); outcomes with q_y = 0 do not contribute even if S(P, y) = +∞.
pub(crate) fn expected<F>(rule: &F, p: &[f64], q: &[f64]) -> Result<f64>
where
    F: Fn(&[f64], usize) -> Result<f64>,
{
    let mut s = 0.0;
    for (y, qy) in q.iter().enumerate() {
        if *qy == 0.0 {
            continue;
        }
        let v = rule(p, y)?;
        if v.is_nan() {
            return Err(Error::NaN("score"));
        }
        s += qy * v;
    }
    Ok(s)
}

/// Entropy H(P) = Σ_y p_y S(P, y) of a categorical rule.
pub fn entropy_of<F>(rule: &F, p: &[f64]) -> Result<f64>
where
    F: Fn(&[f64], usize) -> Result<f64>,
{
    expected(rule, p, p)
}

/// Checks S(Q, Q) ≤ S(P, Q) over every pair of simplex-grid points.
///
/// The rule may be +∞ on the boundary but must be finite on interior grid points.
pub fn propriety_scan<F>(rule: F, classes: usize, grid_step: f64) -> Result<ProprietyReport>
where
    F: Fn(&[f64], usize) -> Result<f64>,
{
    let grid = simplex_grid(classes, grid_step)?;
    for p in grid.iter().filter(|p| p.iter().all(|v| *v > 0.0)) {
        for y in 0..classes {
            let v = rule(p, y)?;
            if !v.is_finite() {
                return Err(Error::Numeric(format!("score {v} at interior point {p:?}")));
            }
        }
    }
    let entropies: Vec<f64> = grid
        .iter()
        .map(|q| entropy_of(&rule, q))
        .collect::<Result<_>>()?;
    let mut report = ProprietyReport {
        classes,
        grid_step,
        pairs_checked: 0,
        violations: 0,
        strict_failures: 0,
        worst_margin: f64::INFINITY,
        witness: None,
    };
    for (qi, q) in grid.iter().enumerate() {
        for (pi, p) in grid.iter().enumerate() {
            if pi == qi {
                continue;
            }
            report.pairs_checked += 1;
            let sp = expected(&rule, p, q)?;
            let margin = sp - entropies[qi];
            let far = p
                .iter()
                .zip(q)
                .any(|(a, b)| (a - b).abs() > grid_step / 2.0);
            if margin < -PROPRIETY_TOL {
                report.violations += 1;
            }
            if far && !(margin > PROPRIETY_TOL) {
                report.strict_failures += 1;
            }
            if margin < report.worst_margin {
                report.worst_margin = margin;
                if margin < -PROPRIETY_TOL {
                    report.witness = Some(ProprietyWitness {
                        p: p.clone(),
                        q: q.clone(),
                        expected_p: sp,
                        expected_q: entropies[qi],
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Re-evaluates a witness; true when it still shows S(P, Q) < S(Q, Q).
pub fn replay_witness<F>(rule: F, w: &ProprietyWitness) -> Result<bool>
where
    F: Fn(&[f64], usize) -> Result<f64>,
{
    Ok(expected(&rule, &w.p, &w.q)? < entropy_of(&rule, &w.q)? - PROPRIETY_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityWitness {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub classes: usize,
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest H(λP + (1 − λ)Q) − λH(P) − (1 − λ)H(Q).
    pub worst_gap: f64,
    pub witness: Option<ConcavityWitness>,
}

/// Tests H(λP + (1 − λ)Q) ≥ λH(P) + (1 − λ)H(Q) on random triples (P, Q, λ) with
/// P, Q uniform on the simplex and λ uniform on (0, 1).
pub fn concavity_scan<H>(
    entropy: H,
    classes: usize,
    trials: usize,
    seed: u64,
) -> Result<ConcavityReport>
where
    H: Fn(&[f64]) -> Result<f64>,
{
    if classes < 2 {
        return Err(invalid("concavity scan needs at least two classes"));
    }
    let mut r = rng(seed, 0xc0c);
    let mut report = ConcavityReport {
        classes,
        trials,
        seed,
        violations: 0,
        worst_gap: f64::INFINITY,
        witness: None,
    };
    for _ in 0..trials {
        let p = random_simplex(&mut r, classes);
        let q = random_simplex(&mut r, classes);
        let lambda: f64 = rand::Rng::random(&mut r);
        let mid: Vec<f64> = p
            .iter()
            .zip(&q)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let (hp, hq, hm) = (entropy(&p)?, entropy(&q)?, entropy(&mid)?);
        if !(hp.is_finite() && hq.is_finite() && hm.is_finite()) {
            return Err(Error::Numeric("entropy is not finite".into()));
        }
        let gap = hm - lambda * hp - (1.0 - lambda) * hq;
        if gap < -CONCAVITY_TOL {
            report.violations += 1;
            if report.witness.is_none() {
                report.witness = Some(ConcavityWitness {
                    p: p.clone(),
                    q: q.clone(),
                    lambda,
                });
            }
        }
        report.worst_gap = report.worst_gap.min(gap);
    }
    Ok(report)
}
