//! Partial derivatives of a Lagrangian up to third order, and a central
//! finite-difference oracle that only ever evaluates `L` itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{multi_indices, LagrangianField};
use crate::point::TangentPoint;
use crate::report::IdentityReport;

/// All partials of `L` to order three at one point, stored with full
/// redundancy over stacked coordinates `(x^1..x^n, y^1..y^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    dim: usize,
    pub value: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

impl Jet3 {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stacked coordinates, `2n`.
    pub fn coords(&self) -> usize {
        2 * self.dim
    }

    pub fn first(&self, a: usize) -> f64 {
        self.d1[a]
    }

    pub fn second(&self, a: usize, b: usize) -> f64 {
        self.d2[a * self.coords() + b]
    }

    pub fn third(&self, a: usize, b: usize, c: usize) -> f64 {
        let m = self.coords();
        self.d3[(a * m + b) * m + c]
    }

    /// Stacked coordinate of x^i.
    pub fn x(&self, i: usize) -> usize {
        i
    }

    /// Stacked coordinate of y^i.
    pub fn y(&self, i: usize) -> usize {
        self.dim + i
    }

    /// Value of the partial for an arbitrary multi-index of order 0..=3.
    pub fn get(&self, index: &[usize]) -> f64 {
        match index {
            [] => self.value,
            [a] => self.first(*a),
            [a, b] => self.second(*a, *b),
            [a, b, c] => self.third(*a, *b, *c),
            _ => panic!("jets are capped at third order"),
        }
    }

    /// `c·jet`, entrywise.
    pub fn scaled(&self, c: f64) -> Jet3 {
        Jet3 {
            dim: self.dim,
            value: c * self.value,
            d1: self.d1.iter().map(|v| c * v).collect(),
            d2: self.d2.iter().map(|v| c * v).collect(),
            d3: self.d3.iter().map(|v| c * v).collect(),
        }
    }
}

/// Exact partials of `field` at `u` to third order.
pub fn jet3(field: &LagrangianField, u: &TangentPoint) -> Result<Jet3> {
    field.check_point(u)?;
    let jt = field.jet_tape();
    let values = jt.tape.eval(u.x(), u.y())?;
    let n = field.dim();
    let m = 2 * n;
    let mut jet = Jet3 {
        dim: n,
        value: 0.0,
        d1: vec![0.0; m],
        d2: vec![0.0; m * m],
        d3: vec![0.0; m * m * m],
    };
    for (idx, v) in jt.indices.iter().zip(values) {
        match idx.as_slice() {
            [] => jet.value = v,
            [a] => jet.d1[*a] = v,
            [a, b] => {
                jet.d2[a * m + b] = v;
                jet.d2[b * m + a] = v;
            }
            [a, b, c] => {
                for (p, q, r) in [
                    (a, b, c),
                    (a, c, b),
                    (b, a, c),
                    (b, c, a),
                    (c, a, b),
                    (c, b, a),
                ] {
                    jet.d3[(p * m + q) * m + r] = v;
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(jet)
}

/// Step sizes and tolerance for the finite-difference oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub tolerance: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            h1: 1e-5,
            h2: 1e-4,
            h3: 1e-3,
            tolerance: 1e-5,
        }
    }
}

impl FdConfig {
    pub fn step(&self, order: usize) -> f64 {
        match order {
            1 => self.h1,
            2 => self.h2,
            _ => self.h3,
        }
    }
}

/// Central-difference estimate of a partial of order 1..=3 using the
/// tensor-product stencil
/// `Σ_{s ∈ {±1}^k} (Π s) L(u + h Σ_m s_m e_{c_m}) / (2h)^k`,
/// whose truncation error is O(h²).
///
/// Fails with a domain error if any stencil point is outside the domain of
/// `L`, or if the stencil box reaches the zero section (`‖y‖∞ ≤ k·h`).
pub fn fd_partial(
    field: &LagrangianField,
    u: &TangentPoint,
    index: &[usize],
    h: f64,
) -> Result<f64> {
    field.check_point(u)?;
    let k = index.len();
    if k == 0 || k > 3 {
        return Err(Error::invalid(format!(
            "finite differences support orders 1..=3, got {k}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let n = field.dim();
    if index.iter().any(|&c| c >= 2 * n) {
        return Err(Error::invalid("coordinate index out of range"));
    }
    let ymax = u.y().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if ymax <= k as f64 * h {
        return Err(Error::domain(
            field.label(),
            "finite-difference stencil reaches the zero section",
        ));
    }
    let base = u.coordinates();
    let mut acc = 0.0;
    for mask in 0..(1u32 << k) {
        let mut p = base.clone();
        let mut sign = 1.0;
        for (m, &c) in index.iter().enumerate() {
            let s = if mask & (1 << m) != 0 { -1.0 } else { 1.0 };
            sign *= s;
            p[c] += s * h;
        }
        let (x, y) = p.split_at(n);
        acc += sign * crate::expr::eval_slices(field.expr(), x, y)?;
    }
    Ok(acc / (2.0 * h).powi(k as i32))
}

/// Compares every exact partial of order 1..=3 with its finite-difference
/// estimate at each point.
///
/// The residual of a partial is `|exact − fd| / max(1, M_k)` where `M_k` is the
/// largest exact partial of the same order at that point. Points where either
/// side cannot be evaluated are recorded as failures.
pub fn validate_jets(
    field: &LagrangianField,
    points: &[TangentPoint],
    cfg: &FdConfig,
) -> IdentityReport {
    let mut report = IdentityReport::new("jets_vs_finite_differences", cfg.tolerance);
    let m = 2 * field.dim();
    let by_order: Vec<_> = (1..=3).map(|k| multi_indices(m, k)).collect();
    for (pi, u) in points.iter().enumerate() {
        let result = (|| -> Result<f64> {
            let jet = jet3(field, u)?;
            let mut worst: f64 = 0.0;
            for (k, indices) in by_order.iter().enumerate() {
                let scale = indices
                    .iter()
                    .fold(1.0_f64, |s, idx| s.max(jet.get(idx).abs()));
                let h = cfg.step(k + 1);
                for idx in indices {
                    let fd = fd_partial(field, u, idx, h)?;
                    worst = worst.max((jet.get(idx) - fd).abs() / scale);
                }
            }
            Ok(worst)
        })();
        report.record_result(pi, result);
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: &[f64]) -> TangentPoint {
        TangentPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn flat_jet_is_exact() {
        let f = LagrangianField::parse("y1^2 + y2^2", 2).unwrap();
        let j = jet3(&f, &pt(&[0.5, -1.0], &[3.0, 4.0])).unwrap();
        assert_eq!(j.value, 25.0);
        assert_eq!(j.d1, vec![0.0, 0.0, 6.0, 8.0]);
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == b && a >= 2 { 2.0 } else { 0.0 };
                assert_eq!(j.second(a, b), expected);
            }
        }
        assert!(j.d3.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn perturbed_and_polar_values() {
        let f = LagrangianField::parse("y1^2 + y2^2 + 2*x1*y1", 2).unwrap();
        let j = jet3(&f, &pt(&[1.0, 2.0], &[3.0, 4.0])).unwrap();
        assert_eq!(j.first(j.x(0)), 6.0);
        assert_eq!(j.second(j.x(0), j.y(0)), 2.0);
        let f = LagrangianField::parse("y1^2 + x1^2*y2^2", 2).unwrap();
        let j = jet3(&f, &pt(&[1.0, 0.0], &[1.0, 1.0])).unwrap();
        assert_eq!(j.third(j.x(0), j.y(1), j.y(1)), 4.0);
        assert_eq!(j.third(j.y(1), j.x(0), j.y(1)), 4.0);
    }

    #[test]
    fn finite_difference_examples() {
        let flat = LagrangianField::parse("y1^2 + y2^2", 2).unwrap();
        let v = fd_partial(&flat, &pt(&[0.0, 0.0], &[3.0, 4.0]), &[2], 1e-5).unwrap();
        assert!((v - 6.0).abs() < 1e-8);
        let pert = LagrangianField::parse("y1^2 + y2^2 + 2*x1*y1", 2).unwrap();
        let v = fd_partial(&pert, &pt(&[1.0, 2.0], &[3.0, 4.0]), &[0, 2], 1e-4).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
        let polar = LagrangianField::parse("y1^2 + x1^2*y2^2", 2).unwrap();
        let v = fd_partial(&polar, &pt(&[1.0, 0.0], &[1.0, 1.0]), &[0, 3, 3], 1e-3).unwrap();
        assert!((v - 4.0).abs() < 1e-4);
    }

    #[test]
    fn stencil_domain_failures() {
        let f = LagrangianField::parse("y1^2 + log(x1)", 1).unwrap();
        let u = pt(&[1e-9], &[1.0]);
        assert!(matches!(
            fd_partial(&f, &u, &[0], 1e-5),
            Err(Error::Domain { .. })
        ));
        let report = validate_jets(&f, &[u, pt(&[1.0], &[1.0])], &FdConfig::default());
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].point, 0);
        assert!(!report.passed);
        let near_zero = pt(&[1.0], &[1e-6]);
        assert!(fd_partial(&f, &near_zero, &[1], 1e-5).is_err());
        assert!(fd_partial(&f, &pt(&[1.0], &[1.0]), &[], 1e-5).is_err());
        assert!(fd_partial(&f, &pt(&[1.0], &[1.0]), &[0, 0, 0, 0], 1e-5).is_err());
    }

    #[test]
    fn validate_flat_and_polar() {
        let flat = LagrangianField::parse("y1^2 + y2^2", 2).unwrap();
        let points: Vec<_> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.37;
                pt(&[t.sin() * 2.0, t.cos()], &[1.0 + t.cos(), 0.5 - t.sin()])
            })
            .collect();
        let r = validate_jets(&flat, &points, &FdConfig::default());
        assert!(r.passed, "{r:?}");
        // First- and second-order rows are below 1e-8; third-order stencils at
        // h = 1e-3 carry ~1e-7 of round-off.
        assert!(r.max_residual < 1e-6);

        let polar = LagrangianField::parse("y1^2 + x1^2*y2^2", 2).unwrap();
        let points: Vec<_> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.41;
                pt(
                    &[0.5 + 1.5 * (k as f64) / 9.0, t],
                    &[t.cos() + 0.2, t.sin() - 0.3],
                )
            })
            .collect();
        let r = validate_jets(&polar, &points, &FdConfig::default());
        assert!(r.passed && r.max_residual < 1e-5, "{r:?}");
    }
}
