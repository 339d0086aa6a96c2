//! Small dense helpers for symmetric positive definite matrices.

use crate::error::{Error, Result};

/// Relative tolerance on Cholesky pivots, scaled by the largest diagonal entry.
pub const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Vec<Vec<f64>>,
}

impl Cholesky {
    /// Factorises a symmetric positive definite matrix.
    ///
    /// Rejects non-square, non-symmetric and numerically singular input. A pivot is
    /// treated as zero when it falls below `PIVOT_TOL * max_i A_ii`.
    pub fn new(a: &[Vec<f64>]) -> Result<Self> {
        let d = a.len();
        if d == 0 {
            return Err(Error::Singular("empty matrix".into()));
        }
        for row in a {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Singular("non-finite entry".into()));
            }
        }
        let max_diag = (0..d).map(|i| a[i][i].abs()).fold(0.0, f64::max);
        for i in 0..d {
            for j in 0..i {
                let scale = a[i][j].abs().max(a[j][i].abs()).max(max_diag);
                if (a[i][j] - a[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::Singular(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let tol = PIVOT_TOL * max_diag;
        let mut l = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut pivot = a[j][j];
            for k in 0..j {
                pivot -= l[j][k] * l[j][k];
            }
            if pivot <= tol {
                return Err(Error::Singular(format!("pivot {pivot:e} at column {j}")));
            }
            let ljj = pivot.sqrt();
            l[j][j] = ljj;
            for i in (j + 1)..d {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.len()
    }

    pub fn factor(&self) -> &[Vec<f64>] {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self
            .l
            .iter()
            .enumerate()
            .map(|(i, r)| r[i].ln())
            .sum::<f64>()
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut z = vec![0.0; d];
        for i in 0..d {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i][k] * z[k];
            }
            z[i] = s / self.l[i][i];
        }
        z
    }

    /// Mahalanobis form `rᵀ A⁻¹ r`.
    pub fn quad_form(&self, r: &[f64]) -> f64 {
        self.solve_lower(r).iter().map(|z| z * z).sum()
    }

    /// Computes `L z`.
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        self.l
            .iter()
            .enumerate()
            .map(|(i, row)| (0..=i).map(|k| row[k] * z[k]).sum())
            .collect()
    }
}

pub(crate) fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reconstructs() {
        let a = vec![
            vec![4.0, 2.0, 0.4],
            vec![2.0, 3.0, 0.5],
            vec![0.4, 0.5, 1.0],
        ];
        let c = Cholesky::new(&a).unwrap();
        let l = c.factor();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - a[i][j]).abs() < 1e-14);
            }
        }
        let r = [1.0, -1.0, 2.0];
        // brute-force A^{-1} r via Cramer would be overkill; check L L^T x = r instead
        let z = c.solve_lower(&r);
        assert!((c.quad_form(&r) - z.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn rejects_singular_and_asymmetric() {
        assert!(matches!(
            Cholesky::new(&[vec![1.0, 1.0], vec![1.0, 1.0]]),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            Cholesky::new(&[vec![1.0, 0.5], vec![0.4, 1.0]]),
            Err(Error::Singular(_))
        ));
        assert!(Cholesky::new(&[vec![-1.0]]).is_err());
    }

    #[test]
    fn log_det_of_diagonal() {
        let c = Cholesky::new(&[vec![2.0, 0.0], vec![0.0, 8.0]]).unwrap();
        assert!((c.log_det() - 16f64.ln()).abs() < 1e-14);
    }
}
