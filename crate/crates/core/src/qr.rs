//! Householder QR for tall, full-column-rank least-squares problems.
//!
//! The factorization is computed once; [`HouseholderQr::solve_into`] is the
//! single sequential kernel used for every right-hand side so that batched
//! and one-at-a-time solves agree bit for bit.

use nalgebra::{DMatrix, SVD};

use crate::error::{CsrError, Result};

/// Relative singular-value threshold below which a design is rank deficient.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Strict upper triangle holds R; column `j` from row `j` down holds the
    /// Householder vector `v_j`.
    packed: DMatrix<f64>,
    r_diag: Vec<f64>,
    beta: Vec<f64>,
}

impl HouseholderQr {
    /// Factor `a` (n × m, n ≥ m) and check its numerical rank.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let (n, m) = a.shape();
        if n < m {
            return Err(CsrError::Underdetermined { n, m });
        }
        let mut packed = a.clone();
        let mut r_diag = vec![0.0; m];
        let mut beta = vec![0.0; m];

        for j in 0..m {
            let norm = packed.view((j, j), (n - j, 1)).norm();
            if norm == 0.0 {
                continue;
            }
            let x0 = packed[(j, j)];
            let alpha = if x0 > 0.0 { -norm } else { norm };
            packed[(j, j)] = x0 - alpha;
            let vtv = 2.0 * norm * (norm + x0.abs());
            beta[j] = 2.0 / vtv;
            r_diag[j] = alpha;

            for c in (j + 1)..m {
                let mut s = 0.0;
                for i in j..n {
                    s += packed[(i, j)] * packed[(i, c)];
                }
                s *= beta[j];
                for i in j..n {
                    packed[(i, c)] -= s * packed[(i, j)];
                }
            }
        }

        let qr = Self { packed, r_diag, beta };
        qr.check_rank(a)?;
        Ok(qr)
    }

    fn check_rank(&self, a: &DMatrix<f64>) -> Result<()> {
        let m = self.r_diag.len();
        if m == 0 {
            return Ok(());
        }
        let sv = SVD::new(self.r(), false, false).singular_values;
        let max = sv.max();
        let min = sv.min();
        if max > 0.0 && min > COLLINEARITY_TOLERANCE * max {
            return Ok(());
        }
        // Name the column that contributes least new direction relative to
        // its own length; zero columns report as fully collinear.
        let column = (0..m)
            .map(|j| {
                let len = a.column(j).norm();
                let ratio = if len > 0.0 { self.r_diag[j].abs() / len } else { 0.0 };
                (j, ratio)
            })
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(j, _)| j)
            .unwrap_or(0);
        Err(CsrError::Collinear { column })
    }

    pub fn rows(&self) -> usize {
        self.packed.nrows()
    }

    pub fn cols(&self) -> usize {
        self.packed.ncols()
    }

    /// The m × m upper-triangular factor.
    pub fn r(&self) -> DMatrix<f64> {
        let m = self.cols();
        DMatrix::from_fn(m, m, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => self.packed[(i, j)],
            std::cmp::Ordering::Equal => self.r_diag[i],
            std::cmp::Ordering::Greater => 0.0,
        })
    }

    /// The n × m factor with orthonormal columns.
    pub fn thin_q(&self) -> DMatrix<f64> {
        let (n, m) = self.packed.shape();
        let mut q = DMatrix::zeros(n, m);
        let mut x = vec![0.0; n];
        for c in 0..m {
            x.iter_mut().for_each(|v| *v = 0.0);
            x[c] = 1.0;
            for j in (0..m).rev() {
                self.reflect(j, &mut x);
            }
            q.column_mut(c).copy_from_slice(&x);
        }
        q
    }

    fn reflect(&self, j: usize, x: &mut [f64]) {
        if self.beta[j] == 0.0 {
            return;
        }
        let v = self.packed.column(j);
        let n = x.len();
        let mut s = 0.0;
        for i in j..n {
            s += v[i] * x[i];
        }
        s *= self.beta[j];
        for i in j..n {
            x[i] -= s * v[i];
        }
    }

    /// Least-squares solve for one right-hand side. `work` is overwritten
    /// with `Qᵀ b`; the solution is written to `out`.
    pub fn solve_into(&self, b: &[f64], work: &mut Vec<f64>, out: &mut [f64]) {
        let m = self.cols();
        debug_assert_eq!(b.len(), self.rows());
        debug_assert_eq!(out.len(), m);
        work.clear();
        work.extend_from_slice(b);
        for j in 0..m {
            self.reflect(j, work);
        }
        for i in (0..m).rev() {
            let mut s = work[i];
            for (k, x) in out.iter().enumerate().skip(i + 1) {
                s -= self.packed[(i, k)] * x;
            }
            out[i] = s / self.r_diag[i];
        }
    }

    #[cfg(test)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        let mut work = Vec::with_capacity(b.len());
        self.solve_into(b, &mut work, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            5,
            3,
            &[
                1.0, 2.0, -1.0, //
                0.5, -3.0, 2.0, //
                4.0, 1.0, 0.0, //
                -2.0, 0.5, 1.5, //
                1.0, 1.0, 1.0,
            ],
        )
    }

    #[test]
    fn q_times_r_reproduces_input() {
        let a = sample();
        let qr = HouseholderQr::new(&a).unwrap();
        let q = qr.thin_q();
        assert!((&q * qr.r() - &a).amax() < 1e-13);
        assert!((q.transpose() * &q - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn solve_matches_normal_equations() {
        let a = sample();
        let b = [1.0, -2.0, 0.25, 3.0, 0.0];
        let x = HouseholderQr::new(&a).unwrap().solve(&b);
        let ata = a.transpose() * &a;
        let atb = a.transpose() * nalgebra::DVector::from_row_slice(&b);
        let expected = ata.cholesky().unwrap().solve(&atb);
        for (u, v) in x.iter().zip(expected.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_column_is_collinear() {
        let mut a = sample();
        let c0 = a.column(0).clone_owned();
        a.set_column(2, &c0);
        assert_eq!(HouseholderQr::new(&a).unwrap_err(), CsrError::Collinear { column: 2 });
    }

    #[test]
    fn zero_column_is_collinear() {
        let mut a = sample();
        a.column_mut(1).fill(0.0);
        assert_eq!(HouseholderQr::new(&a).unwrap_err(), CsrError::Collinear { column: 1 });
    }

    #[test]
    fn wide_matrix_is_underdetermined() {
        let a = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(
            HouseholderQr::new(&a).unwrap_err(),
            CsrError::Underdetermined { n: 2, m: 3 }
        );
    }
}
