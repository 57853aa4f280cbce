use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub point: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub point: usize,
    pub error: String,
}

/// Outcome of one identity check over a sample set.
///
/// `passed` holds exactly when `max_residual <= tolerance`. A point where the
/// check could not be evaluated counts as an infinite residual, as does an
/// empty sweep. Skipped checks carry a reason, a NaN residual and
/// `passed = false`; callers aggregating reports ignore them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub tolerance: f64,
    pub residuals: Vec<PointResidual>,
    pub failures: Vec<PointFailure>,
    pub max_residual: f64,
    pub passed: bool,
    pub skipped: Option<String>,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        IdentityReport {
            name: name.into(),
            tolerance,
            residuals: Vec::new(),
            failures: Vec::new(),
            max_residual: f64::INFINITY,
            passed: false,
            skipped: None,
        }
    }

    pub fn skipped(name: impl Into<String>, tolerance: f64, reason: impl Into<String>) -> Self {
        IdentityReport {
            max_residual: f64::NAN,
            skipped: Some(reason.into()),
            ..IdentityReport::new(name, tolerance)
        }
    }

    pub fn record(&mut self, point: usize, residual: f64) {
        self.residuals.push(PointResidual { point, residual });
    }

    pub fn fail(&mut self, point: usize, error: &Error) {
        self.failures.push(PointFailure {
            point,
            error: error.to_string(),
        });
    }

    pub fn record_result(&mut self, point: usize, result: Result<f64>) {
        match result {
            Ok(r) => self.record(point, r),
            Err(e) => self.fail(point, &e),
        }
    }

    pub fn finish(mut self) -> Self {
        if self.skipped.is_some() {
            self.passed = false;
            self.max_residual = f64::NAN;
            return self;
        }
        self.max_residual = if self.residuals.is_empty() || !self.failures.is_empty() {
            f64::INFINITY
        } else {
            self.residuals
                .iter()
                .map(|r| {
                    if r.residual.is_nan() {
                        f64::INFINITY
                    } else {
                        r.residual
                    }
                })
                .fold(0.0, f64::max)
        };
        self.passed = self.max_residual <= self.tolerance;
        self
    }

    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }

    /// Largest residual among the points that evaluated.
    pub fn max_evaluated_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }
}

/// `|a − b| / (1 + |a| + |b|)`: absolute for small quantities, relative for
/// large ones.
pub fn scaled_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs() + b.abs())
}
