//! Orthonormal eigenfunctions of the 1D Laplacian on [0, 1].
//!
//! Every family solves `ψ'' + λψ = 0` with `λ_l = l²π²`:
//!
//! - [`Family::Cosine`]: `ψ_0 = 1`, `ψ_l = √2 cos(lπt)` for `l = 1..=k`
//!   (even, period-2 extension; continuous at the interval ends).
//! - [`Family::Sine`]: `ψ_l = √2 sin(lπt)` for `l = 1..=k`; there is no
//!   constant term.
//! - [`Family::FullFourier`]: the periodic Fourier basis, interleaved by
//!   frequency. Slot 0 is the constant, slot `2j - 1` is `√2 sin(2jπt)` and
//!   slot `2j` is `√2 cos(2jπt)`, for `j = 1..=k`. Sines and cosines of the
//!   same `lπt` are not mutually orthogonal on [0, 1] when `l` is odd, so
//!   this family uses even multiples only; its eigenvalues are `(2j)²π²`.
//!
//! Basis functions are addressed by *index*. For cosine and full-Fourier
//! bases the index runs over `0..=last`; for the sine basis it is the
//! frequency `l` itself and runs over `1..=k`. Use [`BasisSpec::index_of_column`]
//! to go from a design-matrix column to an index.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CsrError, Result};
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cosine,
    Sine,
    #[serde(rename = "fourier")]
    FullFourier,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Cosine, Family::Sine, Family::FullFourier];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cosine => "cosine",
            Family::Sine => "sine",
            Family::FullFourier => "fourier",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(Family::Cosine),
            "sine" | "sin" => Ok(Family::Sine),
            "fourier" | "full-fourier" | "full_fourier" => Ok(Family::FullFourier),
            other => Err(CsrError::invalid(
                "basis family",
                format!("unknown family {other:?} (expected cosine, sine or fourier)"),
            )),
        }
    }
}

/// A basis family truncated at degree `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: Family,
    pub degree: usize,
}

impl BasisSpec {
    pub fn new(family: Family, degree: usize) -> Self {
        Self { family, degree }
    }

    pub fn cosine(degree: usize) -> Self {
        Self::new(Family::Cosine, degree)
    }

    pub fn sine(degree: usize) -> Self {
        Self::new(Family::Sine, degree)
    }

    pub fn full_fourier(degree: usize) -> Self {
        Self::new(Family::FullFourier, degree)
    }

    /// Number of basis functions: `k + 1`, `k` or `2k + 1`.
    pub fn len(&self) -> usize {
        match self.family {
            Family::Cosine => self.degree + 1,
            Family::Sine => self.degree,
            Family::FullFourier => 2 * self.degree + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Highest frequency `l` (in multiples of π) present in the basis.
    pub fn max_frequency(&self) -> usize {
        match self.family {
            Family::FullFourier => 2 * self.degree,
            _ => self.degree,
        }
    }

    /// Valid basis indices. Empty (`1..=0`) for a degree-0 sine basis.
    pub fn indices(&self) -> RangeInclusive<usize> {
        match self.family {
            Family::Cosine => 0..=self.degree,
            Family::Sine => 1..=self.degree,
            Family::FullFourier => 0..=2 * self.degree,
        }
    }

    pub fn index_of_column(&self, column: usize) -> usize {
        match self.family {
            Family::Sine => column + 1,
            _ => column,
        }
    }

    pub fn column_of_index(&self, index: usize) -> Result<usize> {
        self.check_index(index)?;
        Ok(match self.family {
            Family::Sine => index - 1,
            _ => index,
        })
    }

    fn check_index(&self, index: usize) -> Result<()> {
        let range = self.indices();
        if range.contains(&index) {
            Ok(())
        } else {
            Err(CsrError::IndexOutOfRange {
                index,
                first: *range.start(),
                last: *range.end(),
            })
        }
    }

    /// Frequency `l` of the function at `index` (its eigenvalue is `l²π²`).
    pub fn frequency(&self, index: usize) -> Result<usize> {
        self.check_index(index)?;
        Ok(self.frequency_unchecked(index))
    }

    fn frequency_unchecked(&self, index: usize) -> usize {
        match self.family {
            Family::Cosine | Family::Sine => index,
            Family::FullFourier => 2 * index.div_ceil(2),
        }
    }

    /// `ψ_index(t)` for `t ∈ [0, 1]`.
    pub fn eval(&self, index: usize, t: f64) -> Result<f64> {
        self.check_index(index)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(CsrError::Domain { what: "t", value: t });
        }
        Ok(self.eval_unchecked(index, t))
    }

    /// Evaluate the closed form at any real `t`. Outside [0, 1] this is the
    /// natural extension of the eigenfunction (even and 2-periodic for the
    /// cosine family, odd and 2-periodic for the sine family, 1-periodic for
    /// the full Fourier family).
    pub fn eval_extended(&self, index: usize, t: f64) -> Result<f64> {
        self.check_index(index)?;
        Ok(self.eval_unchecked(index, t))
    }

    pub(crate) fn eval_unchecked(&self, index: usize, t: f64) -> f64 {
        let cos = |l: usize| SQRT_2 * (l as f64 * PI * t).cos();
        let sin = |l: usize| SQRT_2 * (l as f64 * PI * t).sin();
        match self.family {
            Family::Cosine if index == 0 => 1.0,
            Family::Cosine => cos(index),
            Family::Sine => sin(index),
            Family::FullFourier if index == 0 => 1.0,
            Family::FullFourier if index % 2 == 1 => sin(index + 1),
            Family::FullFourier => cos(index),
        }
    }

    /// Evaluate every basis function at `t`, in column order.
    pub(crate) fn eval_row(&self, t: f64, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.len());
        for (column, slot) in row.iter_mut().enumerate() {
            *slot = self.eval_unchecked(self.index_of_column(column), t);
        }
    }

    pub fn eigenpair(&self, index: usize) -> Result<EigenPair> {
        let frequency = self.frequency(index)?;
        Ok(EigenPair {
            family: self.family,
            index,
            frequency,
            eigenvalue: eigenvalue(frequency),
        })
    }

    /// All eigenpairs in column order; eigenvalues are non-decreasing.
    pub fn eigenpairs(&self) -> Vec<EigenPair> {
        self.indices()
            .map(|index| {
                let frequency = self.frequency_unchecked(index);
                EigenPair {
                    family: self.family,
                    index,
                    frequency,
                    eigenvalue: eigenvalue(frequency),
                }
            })
            .collect()
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(k={})", self.family, self.degree)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub family: Family,
    pub index: usize,
    pub frequency: usize,
    pub eigenvalue: f64,
}

/// Laplacian eigenvalue `l²π²` of frequency `l`.
pub fn eigenvalue(l: usize) -> f64 {
    let l = l as f64;
    l * l * PI * PI
}

/// Free-function form of [`BasisSpec::eval`].
pub fn eval_basis(spec: &BasisSpec, index: usize, t: f64) -> Result<f64> {
    spec.eval(index, t)
}

/// Pairwise inner products `⟨ψ_l, ψ_m⟩` under a quadrature rule. Intended for
/// verifying orthonormality, not for fitting.
pub fn gram_matrix(spec: &BasisSpec, rule: &QuadratureRule) -> Result<DMatrix<f64>> {
    rule.check_resolution(spec.max_frequency())?;
    let nodes = rule.nodes();
    let weights = rule.weights();
    let m = spec.len();

    let mut values = DMatrix::zeros(nodes.len(), m);
    let mut row = vec![0.0; m];
    for (i, &t) in nodes.iter().enumerate() {
        spec.eval_row(t, &mut row);
        for (j, v) in row.iter().enumerate() {
            values[(i, j)] = *v;
        }
    }
    let mut weighted = values.clone();
    for (i, w) in weights.iter().enumerate() {
        weighted.row_mut(i).scale_mut(*w);
    }
    Ok(values.transpose() * weighted)
}
