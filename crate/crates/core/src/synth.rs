//! Forward simulation of functional noise and observations.
//!
//! Noise follows a truncated Karhunen-Loève style expansion
//! `ε(t) = Σ_l Z_l ψ_l(t) + e(t)` with `Z_l ~ N(0, τ_l²)` and white
//! `e(t) ~ N(0, σ_e²)`. The `Z_l` are independent unless a correlation
//! factor is supplied.
//!
//! Series `i` draws from its own ChaCha20 stream (`seed`, stream `i`), so a
//! batch is reproducible bit for bit and independent of thread scheduling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::BasisSpec;
use crate::design::{basis_matrix, SampleGrid};
use crate::error::{CsrError, Result};
use crate::fit::SeriesBatch;

/// Recorded in output metadata so batches can be regenerated.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng(seed_from_u64(seed)), stream = series index; rand_distr::StandardNormal";

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    spec: BasisSpec,
    variances: Vec<f64>,
    residual_sigma: f64,
    seed: u64,
    /// Lower-triangular `L` with unit-norm rows; `Z = diag(τ) L ξ`.
    correlation: Option<DMatrix<f64>>,
}

impl NoiseModel {
    pub fn new(spec: BasisSpec, variances: Vec<f64>, residual_sigma: f64, seed: u64) -> Result<Self> {
        if variances.len() != spec.len() {
            return Err(CsrError::shape("variance list", spec.len(), variances.len()));
        }
        if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(CsrError::invalid(
                "variance",
                format!("{v} (variances must be finite and >= 0)"),
            ));
        }
        if !(residual_sigma.is_finite() && residual_sigma >= 0.0) {
            return Err(CsrError::invalid(
                "residual sigma",
                format!("{residual_sigma} (must be finite and >= 0)"),
            ));
        }
        Ok(Self {
            spec,
            variances,
            residual_sigma,
            seed,
            correlation: None,
        })
    }

    /// Same variance for every basis function.
    pub fn uniform(spec: BasisSpec, variance: f64, residual_sigma: f64, seed: u64) -> Result<Self> {
        Self::new(spec, vec![variance; spec.len()], residual_sigma, seed)
    }

    /// Correlate the coefficients through a lower-triangular factor `L`
    /// (`L Lᵀ` is the correlation matrix). Rows must have unit norm so each
    /// `Z_l` keeps variance `τ_l²`.
    pub fn with_correlation(mut self, factor: DMatrix<f64>) -> Result<Self> {
        let m = self.spec.len();
        if factor.shape() != (m, m) {
            return Err(CsrError::shape(
                "correlation factor",
                format!("{m}x{m}"),
                format!("{}x{}", factor.nrows(), factor.ncols()),
            ));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if factor[(i, j)] != 0.0 {
                    return Err(CsrError::invalid(
                        "correlation factor",
                        format!("entry ({i}, {j}) above the diagonal is non-zero"),
                    ));
                }
            }
            let norm = factor.row(i).norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(CsrError::invalid(
                    "correlation factor",
                    format!("row {i} has norm {norm}, expected 1"),
                ));
            }
        }
        self.correlation = Some(factor);
        Ok(self)
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn residual_sigma(&self) -> f64 {
        self.residual_sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Pointwise standard deviation of `ε(t)` under independent `Z_l`.
    pub fn pointwise_sd(&self, t: f64) -> f64 {
        let mut row = vec![0.0; self.spec.len()];
        self.spec.eval_row(t, &mut row);
        let var: f64 = row.iter().zip(&self.variances).map(|(p, v)| p * p * v).sum();
        (var + self.residual_sigma.powi(2)).sqrt()
    }

    fn draw_series(&self, psi: &DMatrix<f64>, series: usize) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(series as u64);
        let m = self.spec.len();
        let xi: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let z: Vec<f64> = (0..m)
            .map(|l| {
                let mixed = match &self.correlation {
                    None => xi[l],
                    Some(f) => (0..=l).map(|j| f[(l, j)] * xi[j]).sum(),
                };
                self.variances[l].sqrt() * mixed
            })
            .collect();
        (0..psi.nrows())
            .map(|j| {
                let smooth: f64 = (0..m).map(|l| psi[(j, l)] * z[l]).sum();
                let white: f64 = rng.sample(StandardNormal);
                smooth + self.residual_sigma * white
            })
            .collect()
    }
}

fn series_batch(n: usize, columns: Vec<Vec<f64>>) -> Result<SeriesBatch> {
    let p = columns.len();
    let flat: Vec<f64> = columns.into_iter().flatten().collect();
    SeriesBatch::from_matrix(DMatrix::from_vec(n, p, flat))
}

pub fn sample_noise(model: &NoiseModel, grid: &SampleGrid, p: usize) -> Result<SeriesBatch> {
    if p == 0 {
        return Err(CsrError::invalid("series count", "at least one series is required"));
    }
    let psi = basis_matrix(&model.spec, grid.points());
    let columns: Vec<Vec<f64>> = (0..p).into_par_iter().map(|i| model.draw_series(&psi, i)).collect();
    series_batch(grid.len(), columns)
}

/// `ζ = μ + ε`, with `mean` evaluated at the grid's unit-interval points.
pub fn sample_observation<F>(mean: F, model: &NoiseModel, grid: &SampleGrid, p: usize) -> Result<SeriesBatch>
where
    F: Fn(f64) -> f64,
{
    let mu = sample_mean(mean, grid)?;
    let noise = sample_noise(model, grid, p)?;
    let mut values = noise.values().clone();
    for mut col in values.column_iter_mut() {
        for (v, m) in col.iter_mut().zip(&mu) {
            *v += m;
        }
    }
    SeriesBatch::from_matrix(values)
}

/// The mean function on the grid; fails on non-finite values.
pub fn sample_mean<F: Fn(f64) -> f64>(mean: F, grid: &SampleGrid) -> Result<Vec<f64>> {
    grid.points()
        .iter()
        .enumerate()
        .map(|(position, &t)| {
            let v = mean(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CsrError::NonFinite {
                    what: "mean function",
                    position,
                })
            }
        })
        .collect()
}
