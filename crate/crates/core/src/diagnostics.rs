//! Boundary-artifact (Gibbs) comparison across basis families.
//!
//! A signal is fitted by least squares with a cosine basis of degree `k`, a
//! sine basis of degree `k` and a full Fourier basis of degree `⌊k/2⌋`, so the
//! three models have `k + 1`, `k` and `2⌊k/2⌋ + 1` functions. Each fit is
//! reconstructed on the grid and the max-abs error is reported separately
//! near the ends of the interval and in the interior.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{BasisSpec, Family};
use crate::design::{build_design, SampleGrid};
use crate::error::{CsrError, Result};
use crate::fit::fit_single;
use crate::synth::sample_mean;

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyError {
    pub family: Family,
    pub degree: usize,
    pub functions: usize,
    /// Max abs error on `[0, δ] ∪ [1 − δ, 1]`.
    pub boundary_error: f64,
    /// Max abs error on `[δ, 1 − δ]`.
    pub interior_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsReport {
    pub test_signal: String,
    pub k: usize,
    pub delta: f64,
    pub n: usize,
    pub families: Vec<FamilyError>,
}

impl GibbsReport {
    pub fn family(&self, family: Family) -> &FamilyError {
        self.families
            .iter()
            .find(|f| f.family == family)
            .expect("every family is reported")
    }
}

/// Compare boundary and interior reconstruction error of the three families.
///
/// The grid needs `n >= 8k` points to resolve the oscillations of the
/// highest-frequency basis function.
pub fn gibbs_compare<F>(signal: F, label: &str, k: usize, grid: &SampleGrid, delta: f64) -> Result<GibbsReport>
where
    F: Fn(f64) -> f64,
{
    if !(delta > 0.0 && delta < 0.5) {
        return Err(CsrError::invalid(
            "boundary width",
            format!("{delta} (must lie in (0, 0.5))"),
        ));
    }
    if k == 0 {
        return Err(CsrError::invalid("degree", "the sine basis needs k >= 1"));
    }
    let required = 8 * k;
    if grid.len() < required {
        return Err(CsrError::Resolution {
            nodes: grid.len(),
            required,
        });
    }
    let y = sample_mean(signal, grid)?;
    let specs = [BasisSpec::cosine(k), BasisSpec::sine(k), BasisSpec::full_fourier(k / 2)];

    let families = specs
        .par_iter()
        .map(|&spec| {
            let dm = build_design(spec, grid.clone());
            let cs = fit_single(&dm, &y)?;
            let fitted = dm.predict(&cs.coeffs);
            let mut boundary_error = 0.0f64;
            let mut interior_error = 0.0f64;
            for ((&t, &target), &approx) in grid.points().iter().zip(&y).zip(fitted.iter()) {
                let err = (approx - target).abs();
                if t <= delta || t >= 1.0 - delta {
                    boundary_error = boundary_error.max(err);
                }
                if t >= delta && t <= 1.0 - delta {
                    interior_error = interior_error.max(err);
                }
            }
            Ok(FamilyError {
                family: spec.family,
                degree: spec.degree,
                functions: spec.len(),
                boundary_error,
                interior_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GibbsReport {
        test_signal: label.to_string(),
        k,
        delta,
        n: grid.len(),
        families,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Signal;

    #[test]
    fn ramp_sine_worse_than_cosine_at_boundary() {
        let grid = SampleGrid::uniform(1000).unwrap();
        let r = gibbs_compare(|t| t, "t", 20, &grid, 0.05).unwrap();
        assert!(r.family(Family::Sine).boundary_error > r.family(Family::Cosine).boundary_error);
        assert_eq!(r.family(Family::FullFourier).functions, 21);
        assert_eq!(r.family(Family::Sine).functions, 20);
    }

    #[test]
    fn representable_signal_is_exact() {
        let grid = SampleGrid::uniform(200).unwrap();
        let s = Signal::Cosine(3);
        let r = gibbs_compare(|t| s.eval(t), "cos:3", 5, &grid, 0.05).unwrap();
        assert!(r.family(Family::Cosine).boundary_error < 1e-10);
    }

    #[test]
    fn sine_cannot_represent_constant_at_ends() {
        let grid = SampleGrid::uniform(400).unwrap();
        let r = gibbs_compare(|_| 1.0, "const", 20, &grid, 0.05).unwrap();
        assert!(r.family(Family::Sine).boundary_error >= 0.5);
    }

    #[test]
    fn preconditions() {
        let grid = SampleGrid::uniform(100).unwrap();
        assert!(matches!(
            gibbs_compare(|t| t, "t", 20, &grid, 0.05),
            Err(CsrError::Resolution { .. })
        ));
        assert!(gibbs_compare(|t| t, "t", 5, &grid, 0.5).is_err());
        assert!(gibbs_compare(|t| t, "t", 5, &grid, 0.0).is_err());
        assert!(gibbs_compare(|t| t, "t", 0, &grid, 0.1).is_err());
    }
}
