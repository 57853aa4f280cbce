//! Residual checks for the identities satisfied by the canonical objects.
//!
//! Every check evaluates a [`GeometryBundle`] per point and reports one
//! residual per point (the worst over components and test vectors). Test
//! vectors are constant-coefficient extensions of vectors drawn from the
//! supplied [`Sampler`], so brackets with `S` reduce to `[S, X] = −DS·X`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{numerical_rank, GeometryBundle};
use crate::error::{Error, Result};
use crate::field::LagrangianField;
use crate::point::TangentPoint;
use crate::report::{scaled_residual, IdentityReport};
use crate::sampling::Sampler;

/// Tolerances for the identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Differential identities and the semispray equation.
    pub identity: f64,
    /// Exact algebraic laws: projector idempotence, metric inverse,
    /// adapted-coframe reconstruction of the two-form.
    pub structural: f64,
    /// `ω(hX, hY) = 0` and the bracket form of the horizontal projector.
    pub subbundle: f64,
    /// Finite-difference cross-check of `N = ∂G/∂y`.
    pub connection_fd: f64,
    /// Spread allowed in `ℂ(L)/L` when detecting homogeneity.
    pub homogeneity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            structural: 1e-10,
            subbundle: 1e-9,
            connection_fd: 1e-5,
            homogeneity: 1e-8,
        }
    }
}

fn sweep(
    name: &str,
    tol: f64,
    field: &LagrangianField,
    points: &[TangentPoint],
    mut f: impl FnMut(&GeometryBundle) -> Result<f64>,
) -> IdentityReport {
    let mut report = IdentityReport::new(name, tol);
    for (i, u) in points.iter().enumerate() {
        report.record_result(i, GeometryBundle::compute(field, u).and_then(|b| f(&b)));
    }
    report.finish()
}

fn basis(len: usize, k: usize) -> DVector<f64> {
    DVector::from_fn(len, |a, _| if a == k { 1.0 } else { 0.0 })
}

/// `J(X; Y) = (0; X)`.
pub fn tangent_structure(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |a, _| if a < n { 0.0 } else { v[a - n] })
}

/// The bracket expression `½(X − [S, JX] + J[S, X])` for every natural
/// frame field, compared with the block projector `(X; Y) ↦ (X; −NX)`.
pub fn bracket_projector_check(
    field: &LagrangianField,
    points: &[TangentPoint],
    tol: f64,
) -> IdentityReport {
    sweep("bracket_projector", tol, field, points, |b| {
        let m = 2 * b.dim();
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let e = basis(m, k);
            let je = tangent_structure(&e);
            let bracket_formula = 0.5
                * (&e - b.bracket_with_semispray(&je)
                    + tangent_structure(&b.bracket_with_semispray(&e)));
            let block = b.projector.h.column(k);
            worst = worst.max((bracket_formula - block).amax());
        }
        Ok(worst)
    })
}

/// `ι_S θ_L = ℂ(L)` and `(𝓛_S θ_L)(X) = dL(X)` with
/// `(𝓛_S θ_L)(X) = S(θ_L(X)) − θ_L([S, X])`.
pub fn check_cartan_one_form(
    field: &LagrangianField,
    points: &[TangentPoint],
    sampler: &mut Sampler,
    vectors_per_point: usize,
    tol: f64,
) -> IdentityReport {
    sweep("cartan_one_form_identities", tol, field, points, |b| {
        let n = b.dim();
        let s = b.semispray_vector();
        let theta = |v: &DVector<f64>| b.cartan_one_form.components.dot(&v.rows(0, n));
        let mut worst = scaled_residual(theta(&s), b.liouville_derivative());
        // Row i: ∂(∂L/∂y^i)/∂z^a, so S(θ(X)) = X_base · (H S).
        let hess_y = DMatrix::from_fn(n, 2 * n, |i, a| b.jet.second(b.jet.y(i), a));
        let s_of_theta = hess_y * &s;
        let dl = b.differential();
        for _ in 0..vectors_per_point {
            let x = DVector::from_vec(sampler.vector(2 * n));
            let lie = x.rows(0, n).dot(&s_of_theta) - theta(&b.bracket_with_semispray(&x));
            worst = worst.max(scaled_residual(lie, dl.dot(&x)));
        }
        Ok(worst)
    })
}

/// `ι_S ω_L = d(L − ℂ(L))`, on every natural basis vector and on sampled
/// vectors.
pub fn check_semispray_equation(
    field: &LagrangianField,
    points: &[TangentPoint],
    sampler: &mut Sampler,
    vectors_per_point: usize,
    tol: f64,
) -> IdentityReport {
    sweep("semispray_equation", tol, field, points, |b| {
        let m = 2 * b.dim();
        let s = b.semispray_vector();
        let lhs = b.cartan_two_form.omega.transpose() * &s;
        let rhs = b.d_lagrangian_minus_liouville();
        let mut worst: f64 = (0..m)
            .map(|a| scaled_residual(lhs[a], rhs[a]))
            .fold(0.0, f64::max);
        for _ in 0..vectors_per_point {
            let x = DVector::from_vec(sampler.vector(m));
            worst = worst.max(scaled_residual(lhs.dot(&x), rhs.dot(&x)));
        }
        Ok(worst)
    })
}

/// `L_{|i} = ½ ∂S(L)/∂y^i`, where the right side differentiates an explicit
/// expression for `S(L)` symbolically.
pub fn check_horizontal_differential(
    field: &LagrangianField,
    points: &[TangentPoint],
    tol: f64,
) -> IdentityReport {
    let symbolic = field.symbolic_semispray();
    sweep(
        "horizontal_differential_identity",
        tol,
        field,
        points,
        |b| {
            let vals = symbolic.tape.eval(b.point.x(), b.point.y())?;
            Ok((0..b.dim())
                .map(|i| scaled_residual(b.horizontal_differential.components[i], vals[1 + i]))
                .fold(0.0, f64::max))
        },
    )
}

/// `ω_L(hX, hY) = 0` on sampled pairs. The second report compares the
/// natural-coordinate two-form with `2g_ij δy^j ∧ dx^i` built from the
/// adapted coframe `δy^j = dy^j + N^j_k dx^k`.
pub fn check_lagrangian_subbundle(
    field: &LagrangianField,
    points: &[TangentPoint],
    sampler: &mut Sampler,
    pairs_per_point: usize,
    tol: f64,
    adapted_tol: f64,
) -> [IdentityReport; 2] {
    let subbundle = sweep("lagrangian_subbundle", tol, field, points, |b| {
        let m = 2 * b.dim();
        let h = &b.projector.h;
        let mut worst: f64 = 0.0;
        for _ in 0..pairs_per_point {
            let x = h * DVector::from_vec(sampler.vector(m));
            let y = h * DVector::from_vec(sampler.vector(m));
            worst = worst.max(b.cartan_two_form.apply(&x, &y).abs());
        }
        Ok(worst)
    });
    let adapted = sweep("adapted_two_form", adapted_tol, field, points, |b| {
        Ok((adapted_two_form(b) - &b.cartan_two_form.omega).amax())
    });
    [subbundle, adapted]
}

/// `Σ 2g_ij (δy^j ⊗ dx^i − dx^i ⊗ δy^j)` in the natural basis.
pub fn adapted_two_form(b: &GeometryBundle) -> DMatrix<f64> {
    let n = b.dim();
    let m = 2 * n;
    let dx = |i: usize| basis(m, i);
    let delta_y = |j: usize| {
        let mut v = basis(m, n + j);
        for k in 0..n {
            v[k] += b.connection.n[(j, k)];
        }
        v
    };
    let mut omega = DMatrix::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            let c = 2.0 * b.metric.g[(i, j)];
            let (a, bb) = (delta_y(j), dx(i));
            omega += c * (&a * bb.transpose() - &bb * a.transpose());
        }
    }
    omega
}

/// Outcome of homogeneity detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityDegree {
    /// `k` with `ℂ(L) = kL` at every usable point, if the ratio is constant.
    pub degree: Option<f64>,
    /// Points skipped because `L` vanished there (or failed to evaluate).
    pub skipped_points: Vec<usize>,
}

/// Detects `k` with `ℂ(L) = kL` from the ratio `ℂ(L)/L` over the points.
pub fn homogeneity_degree(
    field: &LagrangianField,
    points: &[TangentPoint],
    tol: f64,
) -> Result<HomogeneityDegree> {
    if points.is_empty() {
        return Err(Error::invalid(
            "homogeneity detection needs at least one point",
        ));
    }
    let mut ratios = Vec::new();
    let mut skipped_points = Vec::new();
    for (i, u) in points.iter().enumerate() {
        let jet = match crate::jet::jet3(field, u) {
            Ok(j) => j,
            Err(_) => {
                skipped_points.push(i);
                continue;
            }
        };
        if jet.value == 0.0 {
            skipped_points.push(i);
            continue;
        }
        let c: f64 = (0..field.dim())
            .map(|k| u.y()[k] * jet.first(jet.y(k)))
            .sum();
        ratios.push(c / jet.value);
    }
    if ratios.is_empty() {
        return Err(Error::ZeroLagrangianValue);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let degree = (hi - lo <= tol * mean.abs().max(1.0)).then_some(mean);
    Ok(HomogeneityDegree {
        degree,
        skipped_points,
    })
}

/// For a Lagrangian homogeneous of degree `k ≠ 1`: `S(L) = 0`, `d_hL = 0`
/// and `ι_S ω_L = (1 − k) dL` componentwise.
pub fn check_homogeneous_horizontality(
    field: &LagrangianField,
    points: &[TangentPoint],
    tol: Tolerances,
) -> IdentityReport {
    const NAME: &str = "homogeneous_horizontality";
    let k = match homogeneity_degree(field, points, tol.homogeneity) {
        Ok(HomogeneityDegree {
            degree: Some(k), ..
        }) => k,
        Ok(_) => {
            return IdentityReport::skipped(NAME, tol.identity, Error::NotHomogeneous.to_string())
                .finish()
        }
        Err(e) => return IdentityReport::skipped(NAME, tol.identity, e.to_string()).finish(),
    };
    if (k - 1.0).abs() <= tol.homogeneity {
        return IdentityReport::skipped(NAME, tol.identity, "homogeneous of degree 1").finish();
    }
    sweep(NAME, tol.identity, field, points, |b| {
        let s = b.semispray_vector();
        let lhs = b.cartan_two_form.omega.transpose() * &s;
        let rhs = (1.0 - k) * b.differential();
        let mut worst = scaled_residual(b.semispray_derivative, 0.0);
        worst = worst.max(b.max_abs_horizontal_differential());
        for a in 0..lhs.len() {
            worst = worst.max(scaled_residual(lhs[a], rhs[a]));
        }
        Ok(worst)
    })
}

/// `N^i_j` against central differences of `G^i` in `y^j` (step `h`),
/// relative to `max(1, max|N|)`.
pub fn check_connection_fd(
    field: &LagrangianField,
    points: &[TangentPoint],
    h: f64,
    tol: f64,
) -> IdentityReport {
    sweep(
        "connection_vs_finite_differences",
        tol,
        field,
        points,
        |b| {
            let n = b.dim();
            let scale = b.connection.n.amax().max(1.0);
            let mut worst: f64 = 0.0;
            for j in 0..n {
                let shifted = |s: f64| -> Result<DVector<f64>> {
                    let mut y = b.point.y().to_vec();
                    y[j] += s;
                    let u = TangentPoint::new(b.point.x().to_vec(), y)?;
                    Ok(super::semispray_coeffs(field, &u)?.coeffs)
                };
                let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h);
                for i in 0..n {
                    worst = worst.max((b.connection.n[(i, j)] - fd[i]).abs() / scale);
                }
            }
            Ok(worst)
        },
    )
}

/// Exact algebraic laws at each point: `g·g⁻¹ = I`, `Ω = −Ωᵀ`, `rank Ω = 2n`,
/// `h² = h`, `rank h = n`, `h` kills verticals and `I − h` is the vertical
/// projector. A rank mismatch counts as an infinite residual.
pub fn check_structural_laws(
    field: &LagrangianField,
    points: &[TangentPoint],
    tol: f64,
) -> IdentityReport {
    sweep("structural_laws", tol, field, points, |b| {
        let n = b.dim();
        let m = 2 * n;
        let id_n = DMatrix::<f64>::identity(n, n);
        let h = &b.projector.h;
        let omega = &b.cartan_two_form.omega;
        if numerical_rank(h) != n || numerical_rank(omega) != m {
            return Ok(f64::INFINITY);
        }
        let mut worst = (&b.metric.g * &b.metric.g_inv - id_n).amax();
        worst = worst.max((omega + omega.transpose()).amax());
        worst = worst.max((h * h - h).amax());
        worst = worst.max(h.columns(n, n).amax());
        let v = DMatrix::<f64>::identity(m, m) - h;
        worst = worst.max((&v * &v - &v).amax());
        // I − h maps onto the vertical subspace.
        worst = worst.max(v.rows(0, n).amax());
        Ok(worst)
    })
}

/// Test vectors drawn per point by the suite.
pub const SUITE_VECTORS_PER_POINT: usize = 10;

/// Step used by the suite's finite-difference check of `N`.
pub const CONNECTION_FD_STEP: f64 = 1e-5;

/// The full identity suite in a fixed order: jets against finite
/// differences, bracket projector, Cartan one-form, the semispray equation,
/// the horizontal differential, the Lagrangian subbundle and adapted two-form,
/// homogeneous horizontality,
/// the connection against finite differences and the structural laws.
pub fn identity_suite(
    field: &LagrangianField,
    points: &[TangentPoint],
    sampler: &mut Sampler,
    tol: &Tolerances,
    fd: &crate::jet::FdConfig,
) -> Vec<IdentityReport> {
    let mut out = vec![
        crate::jet::validate_jets(field, points, fd),
        bracket_projector_check(field, points, tol.structural),
        check_cartan_one_form(
            field,
            points,
            sampler,
            SUITE_VECTORS_PER_POINT,
            tol.identity,
        ),
        check_semispray_equation(
            field,
            points,
            sampler,
            SUITE_VECTORS_PER_POINT,
            tol.identity,
        ),
        check_horizontal_differential(field, points, tol.identity),
    ];
    out.extend(check_lagrangian_subbundle(
        field,
        points,
        sampler,
        SUITE_VECTORS_PER_POINT,
        tol.subbundle,
        tol.structural,
    ));
    out.push(check_homogeneous_horizontality(field, points, *tol));
    out.push(check_connection_fd(
        field,
        points,
        CONNECTION_FD_STEP,
        tol.connection_fd,
    ));
    out.push(check_structural_laws(field, points, tol.structural));
    out
}

/// `hS − S`, whose natural components are `(0; N y − 2G)`.
pub fn horizontality_gap(b: &GeometryBundle) -> DVector<f64> {
    let s = b.semispray_vector();
    &b.projector.h * &s - s
}
