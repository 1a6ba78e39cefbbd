//! Least-squares estimation of expansion coefficients.
//!
//! For a design `Ψ` (n × m) and observations `Y` (n × p) the estimate is
//! `Ĉ = argmin ‖ΨC − Y‖`, i.e. `(ΨᵀΨ)⁻¹ΨᵀY`. The default solver works from
//! the Householder factorization cached in the [`DesignMatrix`]; the
//! normal-equation route is kept behind [`Solver::NormalEquations`] for
//! comparison. Columns of `Y` are solved independently by the same kernel,
//! so [`fit_batch`] column `i` is bitwise identical to [`fit_single`] on
//! `Y_i`, regardless of how many threads run.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::design::{DesignMatrix, Factor, Provenance};
use crate::error::{CsrError, Result};
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    Qr,
    NormalEquations,
}

/// Offset and scale applied to a series before fitting: `y' = (y - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub offset: f64,
    pub scale: f64,
}

impl Default for Preprocess {
    fn default() -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
        }
    }
}

/// p series of n samples each, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBatch {
    values: DMatrix<f64>,
    labels: Vec<String>,
    preprocess: Vec<Preprocess>,
}

impl SeriesBatch {
    pub fn new(values: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.ncols() {
            return Err(CsrError::shape("series labels", values.ncols(), labels.len()));
        }
        if let Some(position) = values.iter().position(|v| !v.is_finite()) {
            return Err(CsrError::NonFinite {
                what: "series batch",
                position,
            });
        }
        let preprocess = vec![Preprocess::default(); labels.len()];
        Ok(Self {
            values,
            labels,
            preprocess,
        })
    }

    /// Labels default to `s1, s2, ...`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let labels = (1..=values.ncols()).map(|i| format!("s{i}")).collect();
        Self::new(values, labels)
    }

    pub fn single(y: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_column_slice(y.len(), 1, y))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn preprocess(&self) -> &[Preprocess] {
        &self.preprocess
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    /// Z-score every series (subtract the mean, divide by the sample
    /// standard deviation). Constant series keep scale 1.
    pub fn normalized(&self) -> SeriesBatch {
        let n = self.n_samples();
        let mut values = self.values.clone();
        let mut preprocess = Vec::with_capacity(self.n_series());
        for (i, mut col) in values.column_iter_mut().enumerate() {
            let prior = self.preprocess[i];
            let mean = if n == 0 { 0.0 } else { col.sum() / n as f64 };
            let var = if n < 2 {
                0.0
            } else {
                col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            };
            let sd = var.sqrt();
            let scale = if sd > 0.0 { sd } else { 1.0 };
            col.iter_mut().for_each(|v| *v = (*v - mean) / scale);
            preprocess.push(Preprocess {
                offset: prior.offset + prior.scale * mean,
                scale: prior.scale * scale,
            });
        }
        SeriesBatch {
            values,
            labels: self.labels.clone(),
            preprocess,
        }
    }

    /// Undo the stored preprocessing on an n' × p matrix of the same series.
    pub fn restore_units(&self, values: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = values.clone();
        for (mut col, pre) in out.column_iter_mut().zip(&self.preprocess) {
            col.iter_mut().for_each(|v| *v = pre.offset + pre.scale * *v);
        }
        out
    }
}

/// Fitted coefficients (m × p) in the analytic basis of `spec`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub coeffs: DMatrix<f64>,
    pub spec: BasisSpec,
    pub provenance: Provenance,
    /// Per-series residual sum of squares.
    pub residual_norms: Vec<f64>,
}

impl CoefficientSet {
    pub fn n_series(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Coefficient of basis function `index` for series `series`.
    pub fn get(&self, index: usize, series: usize) -> Result<f64> {
        let row = self.spec.column_of_index(index)?;
        if series >= self.n_series() {
            return Err(CsrError::shape(
                "series index",
                format!("< {}", self.n_series()),
                series,
            ));
        }
        Ok(self.coeffs[(row, series)])
    }
}

enum Kernel<'a> {
    Qr(&'a crate::qr::HouseholderQr),
    Orthonormal,
    Normal(Cholesky<f64, Dyn>),
}

impl Kernel<'_> {
    fn prepare(dm: &DesignMatrix, solver: Solver) -> Result<Kernel<'_>> {
        let factor = dm.factor()?;
        Ok(match (factor, solver) {
            (Factor::Orthonormal, _) => Kernel::Orthonormal,
            (Factor::Qr(qr), Solver::Qr) => Kernel::Qr(qr),
            (Factor::Qr(_), Solver::NormalEquations) => {
                let gram = dm.values().transpose() * dm.values();
                let m = gram.nrows();
                let chol = Cholesky::new(gram).ok_or(CsrError::Collinear {
                    column: m.saturating_sub(1),
                })?;
                Kernel::Normal(chol)
            }
        })
    }

    /// Solve one column in the design's own coordinates and return the
    /// residual sum of squares.
    fn solve(&self, dm: &DesignMatrix, y: &[f64], out: &mut [f64]) -> f64 {
        let psi = dm.values();
        match self {
            Kernel::Qr(qr) => {
                let mut work = Vec::with_capacity(y.len());
                qr.solve_into(y, &mut work, out);
            }
            Kernel::Orthonormal => {
                for (c, slot) in out.iter_mut().enumerate() {
                    *slot = psi.column(c).iter().zip(y).map(|(a, b)| a * b).sum();
                }
            }
            Kernel::Normal(chol) => {
                let rhs = psi.tr_mul(&nalgebra::DVector::from_column_slice(y));
                out.copy_from_slice(chol.solve(&rhs).as_slice());
            }
        }
        let mut rss = 0.0;
        for (j, &yj) in y.iter().enumerate() {
            let mut fitted = 0.0;
            for (c, &coef) in out.iter().enumerate() {
                fitted += psi[(j, c)] * coef;
            }
            rss += (fitted - yj).powi(2);
        }
        rss
    }
}

fn check_rows(dm: &DesignMatrix, n: usize) -> Result<()> {
    if n != dm.nrows() {
        return Err(CsrError::shape("observation rows", dm.nrows(), n));
    }
    let m = dm.ncols();
    if n < m {
        return Err(CsrError::Underdetermined { n, m });
    }
    if n < 2 * m {
        log::warn!("fitting {m} basis functions to only {n} samples; estimates will be noisy");
    }
    Ok(())
}

pub fn fit_single(dm: &DesignMatrix, y: &[f64]) -> Result<CoefficientSet> {
    fit_single_with(dm, y, Solver::Qr)
}

pub fn fit_single_with(dm: &DesignMatrix, y: &[f64], solver: Solver) -> Result<CoefficientSet> {
    check_rows(dm, y.len())?;
    if let Some(position) = y.iter().position(|v| !v.is_finite()) {
        return Err(CsrError::NonFinite {
            what: "observations",
            position,
        });
    }
    let kernel = Kernel::prepare(dm, solver)?;
    let mut own = vec![0.0; dm.ncols()];
    let rss = kernel.solve(dm, y, &mut own);
    let own = DMatrix::from_column_slice(dm.ncols(), 1, &own);
    Ok(CoefficientSet {
        coeffs: dm.to_analytic(&own),
        spec: *dm.spec(),
        provenance: dm.grid().fingerprint(),
        residual_norms: vec![rss],
    })
}

pub fn fit_batch(dm: &DesignMatrix, batch: &SeriesBatch) -> Result<CoefficientSet> {
    fit_batch_with(dm, batch, Solver::Qr)
}

/// Fit all series against one factorization. Columns are distributed over
/// the rayon pool.
pub fn fit_batch_with(dm: &DesignMatrix, batch: &SeriesBatch, solver: Solver) -> Result<CoefficientSet> {
    if batch.n_series() == 0 {
        return Err(CsrError::shape("series count", ">= 1", 0));
    }
    check_rows(dm, batch.n_samples())?;
    let kernel = Kernel::prepare(dm, solver)?;
    let m = dm.ncols();
    let solved: Vec<(Vec<f64>, f64)> = (0..batch.n_series())
        .into_par_iter()
        .map(|i| {
            let y = batch.values().column(i);
            let mut out = vec![0.0; m];
            let rss = kernel.solve(dm, y.as_slice(), &mut out);
            (out, rss)
        })
        .collect();

    let mut own = DMatrix::zeros(m, batch.n_series());
    let mut residual_norms = Vec::with_capacity(batch.n_series());
    for (i, (coef, rss)) in solved.into_iter().enumerate() {
        own.column_mut(i).copy_from_slice(&coef);
        residual_norms.push(rss);
    }
    Ok(CoefficientSet {
        coeffs: dm.to_analytic(&own),
        spec: *dm.spec(),
        provenance: dm.grid().fingerprint(),
        residual_norms,
    })
}

/// Continuous Fourier coefficients `c_l = ∫₀¹ f ψ_l dt` by quadrature.
///
/// Aim for at least `32 k` intervals for smooth `f`; the rule must at least
/// pass [`QuadratureRule::check_resolution`]. The stored residual is the
/// quadrature estimate of `∫ (f - Σ c_l ψ_l)²`.
pub fn project_continuous<F>(f: F, spec: &BasisSpec, rule: &QuadratureRule) -> Result<CoefficientSet>
where
    F: Fn(f64) -> f64,
{
    rule.check_resolution(spec.max_frequency())?;
    let nodes = rule.nodes();
    let weights = rule.weights();
    let mut samples = Vec::with_capacity(nodes.len());
    for (position, &t) in nodes.iter().enumerate() {
        let v = f(t);
        if !v.is_finite() {
            return Err(CsrError::NonFinite {
                what: "function samples",
                position,
            });
        }
        samples.push(v);
    }

    let psi = crate::design::basis_matrix(spec, &nodes);
    let mut coeffs = DMatrix::zeros(spec.len(), 1);
    for c in 0..spec.len() {
        coeffs[(c, 0)] = psi
            .column(c)
            .iter()
            .zip(&samples)
            .zip(&weights)
            .map(|((p, s), w)| p * s * w)
            .sum();
    }
    let fitted = &psi * &coeffs;
    let residual = samples
        .iter()
        .zip(fitted.iter())
        .zip(&weights)
        .map(|((s, v), w)| w * (s - v).powi(2))
        .sum();
    Ok(CoefficientSet {
        coeffs,
        spec: *spec,
        provenance: Provenance::Continuous,
        residual_norms: vec![residual],
    })
}
