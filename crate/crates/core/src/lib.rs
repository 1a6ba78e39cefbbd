//! Cosine series representation of functional data on [0, 1].
//!
//! Functions sampled at `t_1..t_n` are expanded in orthonormal Laplacian
//! eigenfunctions (`1, √2 cos(lπt), ...`) and the expansion coefficients are
//! estimated by least squares, one series at a time or all `p` series
//! against a single factorization.
//!
//! ```
//! use csr_core::{build_design, fit_single, BasisSpec, SampleGrid};
//!
//! let grid = SampleGrid::uniform(200).unwrap();
//! let dm = build_design(BasisSpec::cosine(4), grid);
//! let y: Vec<f64> = dm.grid().points().iter().map(|t| 2.0 + t * t).collect();
//! let cs = fit_single(&dm, &y).unwrap();
//! assert!((cs.coeffs[0] - (2.0 + 1.0 / 3.0)).abs() < 1e-3);
//! ```

pub mod basis;
pub mod design;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod quadrature;
pub mod signal;
pub mod synth;
pub mod transform;

mod qr;

pub use basis::{eigenvalue, eval_basis, gram_matrix, BasisSpec, EigenPair, Family};
pub use design::{
    basis_matrix, build_design, make_grid, orthonormalize_design, AffineMap, DesignMatrix, Provenance, SampleGrid,
};
pub use diagnostics::{gibbs_compare, FamilyError, GibbsReport};
pub use error::{CsrError, Result};
pub use fit::{
    fit_batch, fit_batch_with, fit_single, fit_single_with, project_continuous, CoefficientSet, Preprocess,
    SeriesBatch, Solver,
};
pub use qr::COLLINEARITY_TOLERANCE;
pub use quadrature::{QuadratureKind, QuadratureRule};
pub use signal::Signal;
pub use synth::{sample_mean, sample_noise, sample_observation, NoiseModel, RNG_ALGORITHM};
pub use transform::{denoise, evaluate, reconstruct, residuals, Reconstruction};
