//! Turning coefficients back into functions: evaluation, reconstruction,
//! residuals and one-call denoising.

use nalgebra::DMatrix;

use crate::basis::BasisSpec;
use crate::design::{basis_matrix, build_design, DesignMatrix, Provenance, SampleGrid};
use crate::error::{CsrError, Result};
use crate::fit::{fit_batch, CoefficientSet, SeriesBatch};

/// Fitted series evaluated on a target grid (n' × p).
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub values: DMatrix<f64>,
    pub target_grid: SampleGrid,
    pub source: Provenance,
}

/// `μ̂_i(t) = Σ_l C[l][i] ψ_l(t)` for every series `i`.
pub fn evaluate(cs: &CoefficientSet, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CsrError::Domain { what: "t", value: t });
    }
    let row = basis_matrix(&cs.spec, &[t]);
    Ok((row * &cs.coeffs).iter().copied().collect())
}

pub fn reconstruct(cs: &CoefficientSet, grid: &SampleGrid) -> Reconstruction {
    let psi = basis_matrix(&cs.spec, grid.points());
    Reconstruction {
        values: psi * &cs.coeffs,
        target_grid: grid.clone(),
        source: cs.provenance,
    }
}

/// `Y − ΨC`.
pub fn residuals(dm: &DesignMatrix, batch: &SeriesBatch, cs: &CoefficientSet) -> Result<DMatrix<f64>> {
    if cs.spec != *dm.spec() {
        return Err(CsrError::shape("coefficient basis", dm.spec(), cs.spec));
    }
    if batch.n_samples() != dm.nrows() {
        return Err(CsrError::shape("observation rows", dm.nrows(), batch.n_samples()));
    }
    if batch.n_series() != cs.n_series() {
        return Err(CsrError::shape("series count", cs.n_series(), batch.n_series()));
    }
    Ok(batch.values() - dm.predict(&cs.coeffs))
}

/// Project every series onto `spec` and evaluate the fit on the same grid.
pub fn denoise(batch: &SeriesBatch, grid: &SampleGrid, spec: BasisSpec) -> Result<Reconstruction> {
    if batch.n_samples() != grid.len() {
        return Err(CsrError::shape("observation rows", grid.len(), batch.n_samples()));
    }
    let dm = build_design(spec, grid.clone());
    if batch.n_series() == 0 {
        dm.check_solvable()?;
        return Ok(Reconstruction {
            values: DMatrix::zeros(grid.len(), 0),
            target_grid: grid.clone(),
            source: grid.fingerprint(),
        });
    }
    let cs = fit_batch(&dm, batch)?;
    Ok(Reconstruction {
        values: dm.predict(&cs.coeffs),
        target_grid: grid.clone(),
        source: cs.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::SampleGrid;
    use crate::fit::fit_single;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn unit(spec: BasisSpec, index: usize) -> CoefficientSet {
        let mut coeffs = DMatrix::zeros(spec.len(), 1);
        coeffs[(spec.column_of_index(index).unwrap(), 0)] = 1.0;
        CoefficientSet {
            coeffs,
            spec,
            provenance: Provenance::Continuous,
            residual_norms: vec![0.0],
        }
    }

    #[test]
    fn evaluate_examples() {
        let spec = BasisSpec::cosine(3);
        assert_eq!(evaluate(&unit(spec, 0), 0.77).unwrap(), vec![1.0]);
        assert_abs_diff_eq!(evaluate(&unit(spec, 1), 0.5).unwrap()[0], 0.0, epsilon = 1e-15);
        assert!(matches!(evaluate(&unit(spec, 1), 1.01), Err(CsrError::Domain { .. })));
    }

    #[test]
    fn truncated_ramp_at_midpoint() {
        let dm = build_design(BasisSpec::cosine(5), SampleGrid::uniform(4096).unwrap());
        let cs = fit_single(&dm, dm.grid().points()).unwrap();
        // Partial sum of the closed-form coefficients of f(t) = t at t = 1/2.
        let oracle: f64 = 0.5
            + (1..=5)
                .map(|l| {
                    let l = l as f64;
                    let c = SQRT_2 * ((-1f64).powi(l as i32) - 1.0) / (l * l * PI * PI);
                    c * SQRT_2 * (l * PI * 0.5).cos()
                })
                .sum::<f64>();
        let v = evaluate(&cs, 0.5).unwrap()[0];
        assert_abs_diff_eq!(v, 0.5, epsilon = 2e-3);
        assert_abs_diff_eq!(v, oracle, epsilon = 2e-3);
    }

    #[test]
    fn reconstruct_round_trip_and_zero() {
        let spec = BasisSpec::cosine(6);
        let grid = SampleGrid::uniform(80).unwrap();
        let dm = build_design(spec, grid.clone());
        let y: Vec<f64> = grid.points().iter().map(|&t| spec.eval(2, t).unwrap()).collect();
        let rec = reconstruct(&fit_single(&dm, &y).unwrap(), &grid);
        for (a, b) in rec.values.iter().zip(&y) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }

        let zero = CoefficientSet {
            coeffs: DMatrix::zeros(7, 2),
            spec,
            provenance: Provenance::Continuous,
            residual_norms: vec![0.0; 2],
        };
        assert!(reconstruct(&zero, &grid).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn residuals_match_stored_norms_and_are_orthogonal() {
        let spec = BasisSpec::cosine(7);
        let grid = SampleGrid::uniform(150).unwrap();
        let dm = build_design(spec, grid.clone());
        let values = DMatrix::from_fn(150, 3, |j, i| {
            let t = grid.points()[j];
            (t * (i + 2) as f64 * 7.3).sin() + t.powi(i as i32 + 1)
        });
        let batch = SeriesBatch::from_matrix(values).unwrap();
        let cs = fit_batch(&dm, &batch).unwrap();
        let r = residuals(&dm, &batch, &cs).unwrap();
        for (i, col) in r.column_iter().enumerate() {
            let ss = col.norm_squared();
            assert!((ss - cs.residual_norms[i]).abs() <= 1e-10 * ss.max(1e-300));
        }
        let scale = batch.values().norm();
        assert!((dm.values().transpose() * &r).amax() < 1e-8 * scale);
    }

    #[test]
    fn residual_shape_errors() {
        let grid = SampleGrid::uniform(20).unwrap();
        let dm = build_design(BasisSpec::cosine(2), grid);
        let batch = SeriesBatch::from_matrix(DMatrix::zeros(20, 1)).unwrap();
        let cs = fit_batch(&dm, &batch).unwrap();
        let other = build_design(BasisSpec::cosine(3), SampleGrid::uniform(20).unwrap());
        assert!(matches!(residuals(&other, &batch, &cs), Err(CsrError::Shape { .. })));
        let wide = SeriesBatch::from_matrix(DMatrix::zeros(20, 2)).unwrap();
        assert!(matches!(residuals(&dm, &wide, &cs), Err(CsrError::Shape { .. })));
    }

    #[test]
    fn denoise_keeps_span_and_drops_high_tone() {
        let spec = BasisSpec::cosine(59);
        let grid = SampleGrid::uniform(1200).unwrap();
        let clean: Vec<f64> = grid.points().iter().map(|t| SQRT_2 * (3.0 * PI * t).cos()).collect();
        let noisy: Vec<f64> = grid
            .points()
            .iter()
            .zip(&clean)
            .map(|(t, c)| c + SQRT_2 * (80.0 * PI * t).cos())
            .collect();

        let out = denoise(&SeriesBatch::single(&clean).unwrap(), &grid, spec).unwrap();
        for (a, b) in out.values.iter().zip(&clean) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }

        let out = denoise(&SeriesBatch::single(&noisy).unwrap(), &grid, spec).unwrap();
        let rss = |v: &[f64]| v.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        assert!(rss(out.values.as_slice()) < rss(&noisy));
    }

    #[test]
    fn denoise_empty_batch() {
        let grid = SampleGrid::uniform(10).unwrap();
        let batch = SeriesBatch::from_matrix(DMatrix::zeros(10, 0)).unwrap();
        let out = denoise(&batch, &grid, BasisSpec::cosine(3)).unwrap();
        assert_eq!(out.values.shape(), (10, 0));
    }
}
