//! Verification reports: named left/right comparisons with a tolerance.

use serde::{Deserialize, Serialize};

/// One comparison of two routes to the same quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `|lhs - rhs| <= tolerance`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let deviation = (lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    /// Passes when `lhs <= rhs + tolerance`; `deviation` is the slack `rhs - lhs`.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            deviation: rhs - lhs,
            tolerance,
            pass: lhs <= rhs + tolerance,
        }
    }

    /// Passes when `lo <= value <= hi`; `lhs` is the value, `rhs` the midpoint.
    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        Self {
            name: name.into(),
            lhs: value,
            rhs: mid,
            deviation: (value - mid).abs(),
            tolerance: 0.5 * (hi - lo),
            pass: value >= lo && value <= hi,
        }
    }
}

/// A named list of checks plus free-form notes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation.abs()).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_kinds() {
        assert!(Check::close("a", 1.0, 1.0 + 1e-9, 1e-8).pass);
        assert!(!Check::close("a", 1.0, 1.1, 1e-8).pass);
        let c = Check::at_most("b", 1.0, 2.0, 0.0);
        assert!(c.pass && c.deviation == 1.0);
        assert!(!Check::within("c", 3.0, 0.0, 2.0).pass);
    }

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        assert!((fit_slope(&xs, &ys) - 2.5).abs() < 1e-14);
    }
}
