//! Tabulated quantities against SNR.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `(snr, value)` samples sorted by SNR, with what produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub quantity: String,
    pub input: String,
    pub method: String,
    pub tolerance: f64,
    points: Vec<(f64, f64)>,
}

impl Curve {
    /// Sorts the points by SNR; NaN SNRs are rejected.
    pub fn new(
        quantity: impl Into<String>,
        input: impl Into<String>,
        method: impl Into<String>,
        tolerance: f64,
        mut points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if points.iter().any(|p| p.0.is_nan()) {
            return Err(invalid("curve SNRs must not be NaN"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            quantity: quantity.into(),
            input: input.into(),
            method: method.into(),
            tolerance,
            points,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `f` to every value, e.g. a unit conversion.
    pub fn map_values(mut self, f: impl Fn(f64) -> f64) -> Self {
        for p in &mut self.points {
            p.1 = f(p.1);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_by_snr() {
        let c = Curve::new("mmse", "binary", "quadrature", 1e-10, vec![(2.0, 0.2), (0.0, 1.0), (1.0, 0.4)]).unwrap();
        assert_eq!(c.points().iter().map(|p| p.0).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert!(Curve::new("mi", "x", "y", 0.0, vec![(f64::NAN, 0.0)]).is_err());
        assert_eq!(c.map_values(|v| 2.0 * v).points()[0].1, 2.0);
    }
}
