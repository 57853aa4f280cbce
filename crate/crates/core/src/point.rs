use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, y)` of the slit tangent bundle: base coordinates `x` and a
/// nonzero fiber vector `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::invalid(format!(
                "base and fiber coordinates must have the same positive length (got {} and {})",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tangent point has non-finite coordinates"));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid(
                "fiber vector is zero (zero section is excluded)",
            ));
        }
        Ok(TangentPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn fiber_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Stacked coordinates `(x^1..x^n, y^1..y^n)`.
    pub fn coordinates(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }
}
