use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::propriety::{entropy_of, expected};
use crate::error::{invalid, Result};
use crate::forecast::{rng, Ensemble, Forecast};
use crate::kernel::{kernel_divergence, kernel_score_exact, Kernel};
use crate::univariate::{crps_numeric, EnsembleVariant};

/// Random ensemble of `n` points in ℝ^d with a random location and spread.
pub fn random_ensemble(n: usize, d: usize, seed: u64) -> Ensemble {
    let mut r = rng(seed, 0xe5);
    let loc: f64 = r.random_range(-1.0..1.0);
    let spread: f64 = r.random_range(0.5..2.0);
    let members = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| loc + spread * r.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Ensemble::new(members, None).expect("finite members")
}

/// Divergence S(P, Q) − H(Q) of a categorical rule.
pub fn categorical_divergence<F>(rule: F, p: &[f64], q: &[f64]) -> Result<f64>
where
    F: Fn(&[f64], usize) -> Result<f64>,
{
    Ok(expected(&rule, p, q)? - entropy_of(&rule, q)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub kernel: String,
    pub triples: usize,
    pub seed: u64,
    /// max |d(P, Q) − d(Q, P)|.
    pub symmetry_max_error: f64,
    /// max d(P, P).
    pub self_divergence_max: f64,
    /// Orientations where √d(P, R) > √d(P, Q) + √d(Q, R) + 1e-12.
    pub triangle_violations: usize,
    /// Smallest √d(P, Q) + √d(Q, R) − √d(P, R).
    pub worst_triangle_slack: f64,
}

/// Symmetry, vanishing self-divergence and the triangle inequality for √d on random
/// ensemble triples. Each triple is checked in all three orientations.
pub fn symmetry_metric_check(
    h: &Kernel,
    triples: usize,
    members: usize,
    dim: usize,
    seed: u64,
) -> Result<SymmetryReport> {
    if members == 0 || dim == 0 {
        return Err(invalid(
            "ensembles need at least one member and one dimension",
        ));
    }
    let mut report = SymmetryReport {
        kernel: h.id(),
        triples,
        seed,
        symmetry_max_error: 0.0,
        self_divergence_max: 0.0,
        triangle_violations: 0,
        worst_triangle_slack: f64::INFINITY,
    };
    for t in 0..triples as u64 {
        let base = seed.wrapping_mul(1_000_003).wrapping_add(3 * t);
        let e: Vec<Ensemble> = (0..3)
            .map(|k| random_ensemble(members, dim, base + k))
            .collect();
        let mut d = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                d[i][j] = kernel_divergence(h, &e[i], &e[j])?;
            }
        }
        for i in 0..3 {
            report.self_divergence_max = report.self_divergence_max.max(d[i][i]);
            for j in 0..3 {
                report.symmetry_max_error =
                    report.symmetry_max_error.max((d[i][j] - d[j][i]).abs());
            }
        }
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let slack = d[a][b].sqrt() + d[b][c].sqrt() - d[a][c].sqrt();
            if slack < -1e-12 {
                report.triangle_violations += 1;
            }
            report.worst_triangle_slack = report.worst_triangle_slack.min(slack);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrpsRepresentationReport {
    pub instances: usize,
    /// max |CDF-integral form − kernel form|.
    pub max_discrepancy: f64,
    /// Instances above 1e-6.
    pub failures: usize,
}

/// Compares the CRPS as ∫(F − 1{y ≤ ·})² by quadrature with its kernel form
/// E|X − y| − ½E|X − X'| for the empirical measure of each ensemble.
pub fn crps_representation_check(
    instances: &[(Vec<f64>, f64)],
) -> Result<CrpsRepresentationReport> {
    let h = Kernel::energy(1.0)?;
    let mut report = CrpsRepresentationReport {
        instances: instances.len(),
        max_discrepancy: 0.0,
        failures: 0,
    };
    for (members, y) in instances {
        let e = Ensemble::univariate(members)?;
        let kernel = kernel_score_exact(&h, &e, &[*y], EnsembleVariant::Empirical)?.get();
        let integral = crps_numeric(&Forecast::Ensemble(e), *y, 1e-10)?.get();
        let gap = (kernel - integral).abs();
        if gap > 1e-6 {
            report.failures += 1;
        }
        report.max_discrepancy = report.max_discrepancy.max(gap);
    }
    Ok(report)
}
