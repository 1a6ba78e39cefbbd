//! Composite Newton-Cotes rules on [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{CsrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Simpson,
    Trapezoid,
}

/// A composite quadrature rule over [0, 1] with `intervals` equal panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub intervals: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::simpson(4096)
    }
}

impl QuadratureRule {
    /// Composite Simpson; an odd interval count is rounded up to the next even.
    pub fn simpson(intervals: usize) -> Self {
        let intervals = intervals.max(2);
        Self {
            kind: QuadratureKind::Simpson,
            intervals: intervals + intervals % 2,
        }
    }

    pub fn trapezoid(intervals: usize) -> Self {
        Self {
            kind: QuadratureKind::Trapezoid,
            intervals: intervals.max(1),
        }
    }

    pub fn node_count(&self) -> usize {
        self.intervals + 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = self.intervals as f64;
        (0..=self.intervals).map(|i| i as f64 / n).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = 1.0 / self.intervals as f64;
        let last = self.intervals;
        (0..=last)
            .map(|i| match self.kind {
                QuadratureKind::Trapezoid if i == 0 || i == last => h / 2.0,
                QuadratureKind::Trapezoid => h,
                QuadratureKind::Simpson if i == 0 || i == last => h / 3.0,
                QuadratureKind::Simpson if i % 2 == 1 => 4.0 * h / 3.0,
                QuadratureKind::Simpson => 2.0 * h / 3.0,
            })
            .collect()
    }

    /// Products of basis functions up to frequency `max_frequency` oscillate
    /// at up to `2 * max_frequency` half-periods; require four nodes per
    /// unit of the highest frequency.
    pub fn check_resolution(&self, max_frequency: usize) -> Result<()> {
        let required = 4 * max_frequency;
        if self.node_count() < required {
            return Err(CsrError::Resolution {
                nodes: self.node_count(),
                required,
            });
        }
        Ok(())
    }

    /// Integrate `f` over [0, 1]. Fails on the first non-finite evaluation.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut total = 0.0;
        for (position, (t, w)) in self.nodes().into_iter().zip(self.weights()).enumerate() {
            let v = f(t);
            if !v.is_finite() {
                return Err(CsrError::NonFinite {
                    what: "integrand",
                    position,
                });
            }
            total += w * v;
        }
        Ok(total)
    }
}
