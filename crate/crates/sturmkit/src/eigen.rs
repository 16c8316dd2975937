//! Eigenvalues of real tridiagonal matrices whose off-diagonal products are
//! positive (discretized Sturm-Liouville operators). Such matrices are
//! diagonally similar to symmetric tridiagonal ones, so the spectrum is real
//! and simple, and eigenvalue counts come from the classical Sturm sequence /
//! LDL^T inertia recurrence. Individual eigenvalues are located by bisection
//! on the counting function; eigenvectors by inverse iteration with a
//! partially pivoted tridiagonal solve.

use crate::error::{Result, SturmError};

#[derive(Debug, Clone)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    /// sub[i] = A[i+1][i]
    pub sub: Vec<f64>,
    /// sup[i] = A[i][i+1]
    pub sup: Vec<f64>,
    /// squared off-diagonal of the symmetrized matrix: sub[i] * sup[i]
    b2: Vec<f64>,
}

impl Tridiag {
    pub fn new(diag: Vec<f64>, sub: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let m = diag.len();
        if m == 0 || sub.len() != m - 1 || sup.len() != m - 1 {
            return Err(SturmError::Eigen("inconsistent tridiagonal dimensions".into()));
        }
        let b2: Vec<f64> = sub.iter().zip(&sup).map(|(s, t)| s * t).collect();
        if b2.iter().any(|&v| v < 0.0) {
            return Err(SturmError::Eigen(
                "off-diagonal product negative; matrix is not similar to a symmetric one \
                 (grid too coarse for the drift term?)"
                    .into(),
            ));
        }
        Ok(Tridiag { diag, sub, sup, b2 })
    }

    pub fn m(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below sigma (LDL^T inertia count).
    pub fn count_below(&self, sigma: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut d = self.diag[0] - sigma;
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.m() {
            d = (self.diag[i] - sigma) - self.b2[i - 1] / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds of the symmetrized matrix.
    pub fn bounds(&self) -> (f64, f64) {
        let m = self.m();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let mut r = 0.0;
            if i > 0 {
                r += self.b2[i - 1].sqrt();
            }
            if i < m - 1 {
                r += self.b2[i].sqrt();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The j-th eigenvalue in ascending order (0-based), by bisection.
    pub fn eigenvalue_asc(&self, j: usize) -> Result<f64> {
        let m = self.m();
        if j >= m {
            return Err(SturmError::Eigen(format!("eigenvalue index {j} out of range (m={m})")));
        }
        let (mut lo, mut hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) <= j {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * scale {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The k-th eigenvalue from the top (k = 0 is the largest).
    pub fn eigenvalue_desc(&self, k: usize) -> Result<f64> {
        let m = self.m();
        if k >= m {
            return Err(SturmError::Eigen(format!("eigenvalue index {k} out of range (m={m})")));
        }
        self.eigenvalue_asc(m - 1 - k)
    }

    /// Number of strictly positive eigenvalues.
    pub fn count_positive(&self) -> usize {
        self.m() - self.count_below(0.0)
    }

    /// The eigenvalue of smallest absolute value.
    pub fn smallest_abs_eigenvalue(&self) -> Result<f64> {
        let below = self.count_below(0.0);
        let mut best = f64::INFINITY;
        if below > 0 {
            let v = self.eigenvalue_asc(below - 1)?;
            if v.abs() < best.abs() {
                best = v;
            }
        }
        if below < self.m() {
            let v = self.eigenvalue_asc(below)?;
            if v.abs() < best.abs() {
                best = v;
            }
        }
        Ok(best)
    }

    /// Eigenvector for the eigenvalue nearest `lambda`, by inverse iteration.
    /// The result has Euclidean norm 1 and positive first nonzero component.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let m = self.m();
        let (lo, hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let shift = lambda + 1e-11 * scale;
        let mut v: Vec<f64> = (0..m)
            .map(|i| 1.0 + 0.5 * ((i * 2654435761usize) % 1024) as f64 / 1024.0)
            .collect();
        normalize(&mut v);
        // Iterate down to the roundoff floor: probe directions built from
        // these vectors must not carry other-mode contamination, which would
        // be amplified exponentially along the flow.
        let mut resid = f64::INFINITY;
        for _ in 0..40 {
            let mut w = self.solve_shifted(shift, &v)?;
            normalize(&mut w);
            v = w;
            resid = self.residual(lambda, &v);
            if resid < 64.0 * f64::EPSILON * scale {
                break;
            }
        }
        if resid > 1e-9 * scale {
            return Err(SturmError::Eigen(format!(
                "inverse iteration did not converge (residual {resid:.3e})"
            )));
        }
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
        Ok(v)
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let m = self.m();
        let mut worst = 0.0f64;
        for i in 0..m {
            let mut acc = (self.diag[i] - lambda) * v[i];
            if i > 0 {
                acc += self.sub[i - 1] * v[i - 1];
            }
            if i < m - 1 {
                acc += self.sup[i] * v[i + 1];
            }
            worst = worst.max(acc.abs());
        }
        worst
    }

    /// Solve (A - shift I) x = r by Gaussian elimination with partial
    /// pivoting (bandwidth grows to 2 above the diagonal).
    fn solve_shifted(&self, shift: f64, r: &[f64]) -> Result<Vec<f64>> {
        let m = self.m();
        let tiny = 1e-300;
        let mut alpha: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut beta = self.sup.clone();
        let mut gamma = vec![0.0; m.saturating_sub(2)];
        let mut rhs = r.to_vec();

        for k in 0..m - 1 {
            let mut low = self.sub[k];
            if alpha[k].abs() < low.abs() {
                let (a_old, b_old) = (alpha[k], beta[k]);
                let g_old = if k < m - 2 { gamma[k] } else { 0.0 };
                alpha[k] = low;
                beta[k] = alpha[k + 1];
                if k < m - 2 {
                    gamma[k] = beta[k + 1];
                }
                low = a_old;
                alpha[k + 1] = b_old;
                if k < m - 2 {
                    beta[k + 1] = g_old;
                }
                rhs.swap(k, k + 1);
            }
            if alpha[k] == 0.0 {
                alpha[k] = tiny;
            }
            let factor = low / alpha[k];
            alpha[k + 1] -= factor * beta[k];
            if k < m - 2 {
                beta[k + 1] -= factor * gamma[k];
            }
            rhs[k + 1] -= factor * rhs[k];
        }

        let mut x = vec![0.0; m];
        if alpha[m - 1] == 0.0 {
            alpha[m - 1] = tiny;
        }
        x[m - 1] = rhs[m - 1] / alpha[m - 1];
        if m >= 2 {
            x[m - 2] = (rhs[m - 2] - beta[m - 2] * x[m - 1]) / alpha[m - 2];
        }
        for k in (0..m.saturating_sub(2)).rev() {
            x[k] = (rhs[k] - beta[k] * x[k + 1] - gamma[k] * x[k + 2]) / alpha[k];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SturmError::Eigen("shifted solve produced non-finite values".into()));
        }
        Ok(x)
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_spectrum() {
        let t = Tridiag::new(vec![2.0, 2.0], vec![1.0], vec![1.0]).unwrap();
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(2.0), 1);
        assert_eq!(t.count_below(4.0), 2);
        assert!((t.eigenvalue_asc(0).unwrap() - 1.0).abs() < 1e-12);
        assert!((t.eigenvalue_asc(1).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_but_similar_matrix() {
        // [[1, 2], [0.5, 1]] is similar to [[1, 1], [1, 1]]: eigenvalues 0, 2.
        let t = Tridiag::new(vec![1.0, 1.0], vec![0.5], vec![2.0]).unwrap();
        assert!((t.eigenvalue_asc(0).unwrap()).abs() < 1e-12);
        assert!((t.eigenvalue_asc(1).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(t.count_positive(), 1);
    }

    #[test]
    fn indefinite_similarity_is_rejected() {
        assert!(Tridiag::new(vec![0.0, 0.0], vec![1.0], vec![-1.0]).is_err());
    }

    #[test]
    fn eigenvector_satisfies_the_matrix() {
        let m = 50;
        let h = 1.0 / (m as f64 - 1.0);
        // Neumann Laplacian with ghost-point closure.
        let mut diag = vec![-2.0 / (h * h); m];
        let mut sub = vec![1.0 / (h * h); m - 1];
        let mut sup = vec![1.0 / (h * h); m - 1];
        sup[0] = 2.0 / (h * h);
        sub[m - 2] = 2.0 / (h * h);
        for d in diag.iter_mut() {
            *d += 5.0;
        }
        let t = Tridiag::new(diag, sub, sup).unwrap();
        let top = t.eigenvalue_desc(0).unwrap();
        assert!((top - 5.0).abs() < 1e-9, "top eigenvalue {top}");
        let v = t.eigenvector(top).unwrap();
        assert!(t.residual(top, &v) < 1e-7);
        // constant mode: all entries identical in sign and size
        let spread =
            v.iter().fold(0.0f64, |acc, &x| acc.max((x - v[0]).abs() / v[0].abs()));
        assert!(spread < 1e-6);
    }

    #[test]
    fn smallest_abs_eigenvalue_straddles_zero() {
        let t = Tridiag::new(vec![-1.0, 0.3, 5.0], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!((t.smallest_abs_eigenvalue().unwrap() - 0.3).abs() < 1e-12);
    }
}
