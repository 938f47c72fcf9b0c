//! Time grids and the quadrature / differencing rules used on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing sample times starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("need at least two points".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("grid must start at 0, starts at {}", points[0])));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid(format!("not strictly increasing at {} -> {}", w[0], w[1])));
        }
        Ok(Self { points })
    }

    /// `n + 1` equispaced points on `[0, t_end]` with `n = round(t_end/step)`.
    pub fn uniform(t_end: f64, step: f64) -> Result<Self> {
        if !(t_end > 0.0 && step > 0.0) || !t_end.is_finite() || !step.is_finite() {
            return Err(Error::InvalidGrid(format!("t_end = {t_end}, step = {step}")));
        }
        let n = ((t_end / step).round() as usize).max(1);
        Self::new((0..=n).map(|k| t_end * k as f64 / n as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.points.last().expect("grid is non-empty")
    }

    /// Scale every point by `factor > 0` (unit conversion).
    pub fn scaled(&self, factor: f64) -> Self {
        Self { points: self.points.iter().map(|t| t * factor).collect() }
    }
}

/// Trapezoid integral of samples `f` on `t`.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(t.len(), f.len());
    t.windows(2).zip(f.windows(2)).map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum()
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    debug_assert_eq!(t.len(), f.len());
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(acc);
    for (t, f) in t.windows(2).zip(f.windows(2)) {
        acc += 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
        out.push(acc);
    }
    out
}

/// Second-order three-point derivative: central in the interior, one-sided
/// at the endpoints. Handles nonuniform spacing.
pub fn derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    debug_assert_eq!(n, f.len());
    if n < 3 {
        let slope = if n == 2 { (f[1] - f[0]) / (t[1] - t[0]) } else { 0.0 };
        return vec![slope; n];
    }
    let three_point = |i0: usize, at: usize| {
        // Lagrange derivative through (i0, i0+1, i0+2) evaluated at `at`
        let (x0, x1, x2) = (t[i0], t[i0 + 1], t[i0 + 2]);
        let x = t[at];
        let l0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        l0 * f[i0] + l1 * f[i0 + 1] + l2 * f[i0 + 2]
    };
    let mut out = Vec::with_capacity(n);
    out.push(three_point(0, 0));
    for i in 1..n - 1 {
        out.push(three_point(i - 1, i));
    }
    out.push(three_point(n - 3, n - 1));
    out
}
