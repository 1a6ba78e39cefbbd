//! Sample grids and design matrices.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{CsrError, Result};
use crate::qr::HouseholderQr;

/// Affine map from raw timestamps to [0, 1]: `u = (t - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub offset: f64,
    pub scale: f64,
}

impl AffineMap {
    pub fn to_unit(&self, t: f64) -> f64 {
        (t - self.offset) / self.scale
    }

    pub fn to_original(&self, u: f64) -> f64 {
        self.offset + self.scale * u
    }
}

/// Identifies the grid a set of coefficients was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "fingerprint")]
pub enum Provenance {
    Grid(u64),
    Continuous,
}

/// Sorted, distinct sample points mapped into [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<f64>,
    original: Vec<f64>,
    mapping: AffineMap,
}

impl SampleGrid {
    /// Sort the timestamps and map them affinely onto [0, 1] so the first
    /// lands on 0 and the last on 1.
    pub fn from_timestamps(timestamps: &[f64]) -> Result<Self> {
        if timestamps.len() < 2 {
            return Err(CsrError::GridSize { len: timestamps.len() });
        }
        if let Some(position) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(CsrError::NonFinite {
                what: "timestamps",
                position,
            });
        }
        let mut sorted = timestamps.to_vec();
        sorted.sort_by(f64::total_cmp);
        if let Some(i) = sorted.windows(2).position(|w| w[0] == w[1]) {
            return Err(CsrError::DegenerateGrid {
                index: i + 1,
                value: sorted[i],
            });
        }
        let t_min = sorted[0];
        let t_max = sorted[sorted.len() - 1];
        let mapping = AffineMap {
            offset: t_min,
            scale: t_max - t_min,
        };
        let last = sorted.len() - 1;
        let points = sorted
            .iter()
            .enumerate()
            .map(|(i, &t)| match i {
                0 => 0.0,
                i if i == last => 1.0,
                _ => mapping.to_unit(t).clamp(0.0, 1.0),
            })
            .collect();
        Ok(Self {
            points,
            original: sorted,
            mapping,
        })
    }

    /// `n` points at `j / (n - 1)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(CsrError::GridSize { len: n });
        }
        let denom = (n - 1) as f64;
        let points: Vec<f64> = (0..n).map(|j| j as f64 / denom).collect();
        Ok(Self {
            original: points.clone(),
            points,
            mapping: AffineMap {
                offset: 0.0,
                scale: 1.0,
            },
        })
    }

    /// Points already in [0, 1]; kept as given, with the identity mapping.
    pub fn from_unit_points(points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(CsrError::GridSize { len: points.len() });
        }
        for (position, &u) in points.iter().enumerate() {
            if !u.is_finite() {
                return Err(CsrError::NonFinite {
                    what: "grid points",
                    position,
                });
            }
            if !(0.0..=1.0).contains(&u) {
                return Err(CsrError::Domain {
                    what: "grid point",
                    value: u,
                });
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(CsrError::DegenerateGrid {
                index: i + 1,
                value: points[i + 1],
            });
        }
        Ok(Self {
            points: points.to_vec(),
            original: points.to_vec(),
            mapping: AffineMap {
                offset: 0.0,
                scale: 1.0,
            },
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// The sorted raw timestamps.
    pub fn original(&self) -> &[f64] {
        &self.original
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn original_range(&self) -> (f64, f64) {
        (self.original[0], self.original[self.original.len() - 1])
    }

    pub fn mapping(&self) -> AffineMap {
        self.mapping
    }

    pub fn fingerprint(&self) -> Provenance {
        let mut h = DefaultHasher::new();
        for p in &self.points {
            p.to_bits().hash(&mut h);
        }
        Provenance::Grid(h.finish())
    }
}

pub fn make_grid(timestamps: &[f64]) -> Result<SampleGrid> {
    SampleGrid::from_timestamps(timestamps)
}

/// Evaluate every basis function of `spec` at every point (n × m).
pub fn basis_matrix(spec: &BasisSpec, points: &[f64]) -> DMatrix<f64> {
    let m = spec.len();
    let mut values = DMatrix::zeros(points.len(), m);
    let mut row = vec![0.0; m];
    for (i, &t) in points.iter().enumerate() {
        spec.eval_row(t, &mut row);
        for (j, v) in row.iter().enumerate() {
            values[(i, j)] = *v;
        }
    }
    values
}

#[derive(Debug, Clone)]
pub(crate) enum Factor {
    Qr(HouseholderQr),
    /// Columns are orthonormal; least squares reduces to `Ψᵀy`.
    Orthonormal,
}

/// Basis functions evaluated on a grid, with the least-squares factorization
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    spec: BasisSpec,
    grid: SampleGrid,
    /// `R` with `Ψ_analytic = Ψ_orthonormal · R`; present only when
    /// orthonormalized.
    change_of_basis: Option<DMatrix<f64>>,
    factor: std::result::Result<Factor, CsrError>,
}

impl DesignMatrix {
    /// Wrap an arbitrary n × m matrix as the design for `spec` on `grid`.
    /// The matrix must have `grid.len()` rows and `spec.len()` columns.
    pub fn from_values(spec: BasisSpec, grid: SampleGrid, values: DMatrix<f64>) -> Result<Self> {
        let expected = (grid.len(), spec.len());
        if values.shape() != expected {
            return Err(CsrError::shape(
                "design values",
                format!("{}x{}", expected.0, expected.1),
                format!("{}x{}", values.nrows(), values.ncols()),
            ));
        }
        let factor = HouseholderQr::new(&values).map(Factor::Qr);
        Ok(Self {
            values,
            spec,
            grid,
            change_of_basis: None,
            factor,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_orthonormalized(&self) -> bool {
        self.change_of_basis.is_some()
    }

    pub fn change_of_basis(&self) -> Option<&DMatrix<f64>> {
        self.change_of_basis.as_ref()
    }

    pub(crate) fn factor(&self) -> Result<&Factor> {
        self.factor.as_ref().map_err(Clone::clone)
    }

    /// Fails with the cached underdetermined/collinearity error, if any.
    pub fn check_solvable(&self) -> Result<()> {
        self.factor().map(|_| ())
    }

    /// Map coefficients in this design's own column coordinates to the
    /// analytic basis. Identity unless orthonormalized.
    pub fn to_analytic(&self, own: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.change_of_basis {
            None => own.clone(),
            Some(r) => r
                .solve_upper_triangular(own)
                .expect("change of basis is nonsingular by construction"),
        }
    }

    /// Map analytic-basis coefficients into this design's own coordinates.
    pub fn from_analytic(&self, analytic: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.change_of_basis {
            None => analytic.clone(),
            Some(r) => r * analytic,
        }
    }

    /// `Ψ C` for analytic-basis coefficients `C` (m × p).
    pub fn predict(&self, analytic: &DMatrix<f64>) -> DMatrix<f64> {
        &self.values * self.from_analytic(analytic)
    }
}

/// Evaluate `spec` on `grid`. Entry `(j, c)` is `ψ_{index(c)}(points[j])`.
pub fn build_design(spec: BasisSpec, grid: SampleGrid) -> DesignMatrix {
    let values = basis_matrix(&spec, grid.points());
    DesignMatrix::from_values(spec, grid, values).expect("shape matches by construction")
}

/// Replace the columns of `dm` by an orthonormal basis of the same span
/// (thin Householder QR), so that `ΨᵀΨ = I`. The triangular factor is kept
/// as the change of basis back to the analytic functions.
pub fn orthonormalize_design(dm: &DesignMatrix) -> Result<DesignMatrix> {
    if dm.is_orthonormalized() {
        return Ok(dm.clone());
    }
    let qr = match dm.factor()? {
        Factor::Qr(qr) => qr,
        Factor::Orthonormal => unreachable!("plain designs always carry a QR factor"),
    };
    Ok(DesignMatrix {
        values: qr.thin_q(),
        spec: dm.spec,
        grid: dm.grid.clone(),
        change_of_basis: Some(qr.r()),
        factor: Ok(Factor::Orthonormal),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    #[test]
    fn grid_identity_and_affine() {
        let g = make_grid(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        assert_eq!(
            g.mapping(),
            AffineMap {
                offset: 0.0,
                scale: 1.0
            }
        );

        let g = make_grid(&[10.0, 20.0, 40.0]).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_abs_diff_eq!(g.points()[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(g.points()[2], 1.0);
        assert_eq!(g.original_range(), (10.0, 40.0));
    }

    #[test]
    fn grid_of_1200_uniform_timestamps() {
        let ts: Vec<f64> = (0..1200).map(|j| 3.0 + 0.72 * j as f64).collect();
        let g = make_grid(&ts).unwrap();
        for (j, &u) in g.points().iter().enumerate() {
            assert_abs_diff_eq!(u, j as f64 / 1199.0, epsilon = 1e-12);
        }
        for (t, u) in ts.iter().zip(g.points()) {
            assert!((g.mapping().to_unit(*t) - u).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    #[test]
    fn grid_sorts_and_rejects_duplicates() {
        let g = make_grid(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        assert!(matches!(
            make_grid(&[1.0, 2.0, 1.0]),
            Err(CsrError::DegenerateGrid { .. })
        ));
        assert_eq!(make_grid(&[1.0]).unwrap_err(), CsrError::GridSize { len: 1 });
        assert!(matches!(make_grid(&[0.0, f64::NAN]), Err(CsrError::NonFinite { .. })));
    }

    #[test]
    fn design_examples() {
        let grid = make_grid(&[0.0, 0.5, 1.0]).unwrap();
        let dm = build_design(BasisSpec::cosine(0), grid.clone());
        assert_eq!(dm.values(), &DMatrix::from_element(3, 1, 1.0));

        let dm = build_design(BasisSpec::cosine(1), grid);
        let expected = DMatrix::from_row_slice(3, 2, &[1.0, SQRT_2, 1.0, 0.0, 1.0, -SQRT_2]);
        assert!((dm.values() - expected).amax() < 1e-15);
        assert!(!dm.is_orthonormalized());

        let dm = build_design(BasisSpec::sine(2), make_grid(&[0.0, 1.0]).unwrap());
        assert!(dm.values().amax() < 1e-15);
        assert_eq!(dm.values().shape(), (2, 2));
    }

    #[test]
    fn orthonormalized_gram_is_identity() {
        let dm = build_design(BasisSpec::cosine(3), SampleGrid::uniform(4096).unwrap());
        let on = orthonormalize_design(&dm).unwrap();
        assert!(on.is_orthonormalized());
        let gram = on.values().transpose() * on.values();
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-12);

        let again = orthonormalize_design(&on).unwrap();
        assert_eq!(again.values(), on.values());
        assert_eq!(again.change_of_basis(), on.change_of_basis());
    }

    #[test]
    fn orthonormalize_rejects_duplicate_column() {
        let grid = SampleGrid::uniform(50).unwrap();
        let mut values = basis_matrix(&BasisSpec::cosine(3), grid.points());
        let c1 = values.column(1).clone_owned();
        values.set_column(3, &c1);
        let dm = DesignMatrix::from_values(BasisSpec::cosine(3), grid, values).unwrap();
        assert_eq!(
            orthonormalize_design(&dm).unwrap_err(),
            CsrError::Collinear { column: 3 }
        );
    }

    #[test]
    fn from_values_checks_shape() {
        let grid = SampleGrid::uniform(5).unwrap();
        let err = DesignMatrix::from_values(BasisSpec::cosine(2), grid, DMatrix::zeros(5, 2)).unwrap_err();
        assert!(matches!(err, CsrError::Shape { .. }));
    }

    #[test]
    fn change_of_basis_round_trip() {
        let dm = build_design(BasisSpec::cosine(6), SampleGrid::uniform(200).unwrap());
        let on = orthonormalize_design(&dm).unwrap();
        let c = DMatrix::from_fn(7, 2, |i, j| (i as f64 - 2.5) * (j as f64 + 0.5));
        let back = on.to_analytic(&on.from_analytic(&c));
        assert!((back - &c).amax() < 1e-10);
        assert!((on.predict(&c) - dm.predict(&c)).amax() < 1e-10);
    }

    #[test]
    fn discrete_gram_converges_to_identity() {
        let spec = BasisSpec::cosine(20);
        let off_diag = |n: usize| {
            let dm = build_design(spec, SampleGrid::uniform(n).unwrap());
            let mut g = dm.values().transpose() * dm.values() / n as f64;
            g.fill_diagonal(0.0);
            g.amax()
        };
        let errs: Vec<f64> = [4096, 8192, 16384].into_iter().map(off_diag).collect();
        assert!(errs[0] < 1e-3, "{errs:?}");
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }
}
