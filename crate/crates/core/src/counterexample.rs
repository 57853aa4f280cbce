//! Riemannian quadratic Lagrangians `L' = a_ij(x) y^i y^j` perturbed by the
//! complete lift of a function, `L = L' + (∂φ/∂x^i) y^i`.
//!
//! Both Lagrangians share the metric, the two-form, the semispray and the
//! nonlinear connection, yet `L_{|i} = T_ij y^j` with
//! `T_ij = ∂²φ/∂x^i∂x^j − γ^k_ij ∂φ/∂x^k`, which is nonzero whenever `φ` is not
//! affine with respect to the Levi-Civita connection of `a`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{eval_slices, parse_expr, simplify, Expr, Var};
use crate::field::LagrangianField;
use crate::geometry::{GeometryBundle, OneForm};
use crate::point::TangentPoint;
use crate::report::IdentityReport;
use crate::sampling::SamplingBox;

/// Metric `a_ij(x)` on the base, as expressions in base coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannianMetricSpec {
    pub dim: usize,
    pub entries: Vec<Vec<Expr>>,
    /// Region where the metric is declared positive definite.
    pub domain: SamplingBox,
}

impl RiemannianMetricSpec {
    pub fn new(entries: Vec<Vec<Expr>>, domain: SamplingBox) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 || entries.iter().any(|row| row.len() != dim) {
            return Err(Error::invalid(
                "metric entry table must be square and nonempty",
            ));
        }
        if domain.dim() != dim {
            return Err(Error::invalid(
                "sampling domain dimension does not match metric",
            ));
        }
        for i in 0..dim {
            for j in 0..dim {
                let e = &entries[i][j];
                if !e.is_base_only() || e.max_index().is_some_and(|k| k >= dim) {
                    return Err(Error::invalid(format!(
                        "metric entry a_{}{} must depend on x1..x{dim} only",
                        i + 1,
                        j + 1
                    )));
                }
                if entries[j][i] != *e {
                    return Err(Error::invalid("metric entry table is not symmetric"));
                }
            }
        }
        Ok(RiemannianMetricSpec {
            dim,
            entries,
            domain,
        })
    }

    /// Parses a table of entry expressions, e.g. `[["1", "0"], ["0", "x1^2"]]`.
    pub fn parse(rows: &[&[&str]], domain: SamplingBox) -> Result<Self> {
        let dim = rows.len();
        let entries = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| parse_expr(t, dim).map_err(Error::from))
                    .collect()
            })
            .collect::<Result<Vec<Vec<Expr>>>>()?;
        RiemannianMetricSpec::new(entries, domain)
    }

    pub fn euclidean(dim: usize) -> Self {
        let entries = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        RiemannianMetricSpec {
            dim,
            entries,
            domain: SamplingBox::default_for(dim),
        }
    }

    /// `diag(1, (x1)²)` on `x1 ∈ [0.5, 2]`: the plane in polar coordinates.
    pub fn polar() -> Self {
        let x1 = Expr::base(0);
        RiemannianMetricSpec {
            dim: 2,
            entries: vec![
                vec![Expr::one(), Expr::zero()],
                vec![Expr::zero(), x1.powf(2.0)],
            ],
            domain: SamplingBox::default_for(2).with_base_interval(0, 0.5, 2.0),
        }
    }

    fn check_base(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "base point has dimension {}, metric has dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn eval(&self, e: &Expr, x: &[f64]) -> Result<f64> {
        // Entries never mention y; any nonzero fiber placeholder works.
        eval_slices(e, x, &vec![1.0; self.dim])
    }

    pub fn matrix_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_base(x)?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self.eval(&self.entries[i][j], x)?;
            }
        }
        Ok(m)
    }

    /// Leading principal minors at each point; errors at the first point where
    /// one is not positive.
    pub fn check_positive_definite(&self, points: &[Vec<f64>]) -> Result<()> {
        for x in points {
            let m = self.matrix_at(x)?;
            for k in 1..=self.dim {
                let minor = m.view((0, 0), (k, k)).determinant();
                if !(minor > 0.0) {
                    return Err(Error::invalid(format!(
                        "metric is not positive definite at x = {x:?} (leading minor {k} = {minor:e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A function `φ(x)` on the base.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub expr: Expr,
}

impl PotentialSpec {
    pub fn new(expr: Expr) -> Result<Self> {
        if !expr.is_base_only() {
            return Err(Error::invalid(
                "potential must depend on base coordinates only",
            ));
        }
        Ok(PotentialSpec { expr })
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        PotentialSpec::new(parse_expr(text, dim)?)
    }

    pub fn zero() -> Self {
        PotentialSpec { expr: Expr::zero() }
    }

    fn gradient_exprs(&self, dim: usize) -> Vec<Expr> {
        (0..dim)
            .map(|i| simplify(&self.expr.differentiate(Var::Base(i))))
            .collect()
    }

    fn eval_derivatives(&self, dim: usize, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let y = vec![1.0; dim];
        let grad = self.gradient_exprs(dim);
        let mut g = DVector::zeros(dim);
        let mut h = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            g[i] = eval_slices(&grad[i], x, &y)?;
            for j in 0..dim {
                h[(i, j)] = eval_slices(&simplify(&grad[i].differentiate(Var::Base(j))), x, &y)?;
            }
        }
        Ok((g, h))
    }
}

/// `γ^i_jk`, stored as `symbols[i][(j, k)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Christoffel {
    pub symbols: Vec<DMatrix<f64>>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.symbols[i][(j, k)]
    }

    /// `2G^i = γ^i_jk y^j y^k`.
    pub fn contract(&self, y: &[f64]) -> DVector<f64> {
        let y = DVector::from_column_slice(y);
        DVector::from_fn(self.symbols.len(), |i, _| {
            (y.transpose() * &self.symbols[i] * &y)[(0, 0)]
        })
    }
}

/// Christoffel symbols of the second kind,
/// `γ^i_jk = ½ a^il (∂a_lj/∂x^k + ∂a_lk/∂x^j − ∂a_jk/∂x^l)`.
pub fn christoffel_symbols(a: &RiemannianMetricSpec, x: &[f64]) -> Result<Christoffel> {
    let n = a.dim;
    let m = a.matrix_at(x)?;
    let scale = m.amax();
    let det = m.determinant();
    let threshold = crate::geometry::REGULARITY_THRESHOLD * scale.powi(n as i32);
    let inv = if scale > 0.0 && det.abs() > threshold {
        m.try_inverse()
    } else {
        None
    }
    .ok_or(Error::DegenerateLagrangian {
        object: "Riemannian metric a_ij".into(),
        det,
        threshold,
    })?;
    // da[l][j][k] = ∂a_lj/∂x^k
    let mut da = vec![vec![vec![0.0; n]; n]; n];
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = simplify(&a.entries[l][j].differentiate(Var::Base(k)));
                da[l][j][k] = a.eval(&d, x)?;
            }
        }
    }
    let symbols = (0..n)
        .map(|i| {
            DMatrix::from_fn(n, n, |j, k| {
                0.5 * (0..n)
                    .map(|l| inv[(i, l)] * (da[l][j][k] + da[l][k][j] - da[j][k][l]))
                    .sum::<f64>()
            })
        })
        .collect();
    Ok(Christoffel { symbols })
}

/// `L'(x, y) = a_ij(x) y^i y^j`.
pub fn build_riemannian_quadratic(a: &RiemannianMetricSpec) -> Result<LagrangianField> {
    let mut terms = Vec::new();
    for i in 0..a.dim {
        for j in 0..a.dim {
            terms.push(Expr::product(vec![
                a.entries[i][j].clone(),
                Expr::fiber(i),
                Expr::fiber(j),
            ]));
        }
    }
    LagrangianField::new(simplify(&Expr::sum(terms)), a.dim)
}

/// `L = L' + φᶜ` with the complete lift `φᶜ = (∂φ/∂x^i) y^i`.
pub fn perturb_with_gradient(
    base: &LagrangianField,
    phi: &PotentialSpec,
) -> Result<LagrangianField> {
    let n = base.dim();
    if phi.expr.max_index().is_some_and(|k| k >= n) {
        return Err(Error::invalid(
            "potential references coordinates beyond the dimension",
        ));
    }
    let mut terms = vec![base.expr().clone()];
    for (i, d) in phi.gradient_exprs(n).into_iter().enumerate() {
        terms.push(d * Expr::fiber(i));
    }
    LagrangianField::new(simplify(&Expr::sum(terms)), n)
}

/// Differences between the structures of `L'` and `L` at each point:
/// `‖ΔΩ‖∞`, `‖ΔG‖∞` and `‖ΔN‖∞`, each as its own report.
pub fn compare_structures(
    base: &LagrangianField,
    perturbed: &LagrangianField,
    points: &[TangentPoint],
    tol: f64,
) -> [IdentityReport; 3] {
    let mut omega = IdentityReport::new("shared_two_form", tol);
    let mut spray = IdentityReport::new("shared_semispray", tol);
    let mut conn = IdentityReport::new("shared_connection", tol);
    for (i, u) in points.iter().enumerate() {
        match GeometryBundle::compute(base, u)
            .and_then(|b| Ok((b, GeometryBundle::compute(perturbed, u)?)))
        {
            Ok((b0, b1)) => {
                omega.record(
                    i,
                    (&b0.cartan_two_form.omega - &b1.cartan_two_form.omega).amax(),
                );
                spray.record(i, (&b0.semispray.coeffs - &b1.semispray.coeffs).amax());
                conn.record(i, (&b0.connection.n - &b1.connection.n).amax());
            }
            Err(e) => {
                omega.fail(i, &e);
                spray.fail(i, &e);
                conn.fail(i, &e);
            }
        }
    }
    [omega.finish(), spray.finish(), conn.finish()]
}

/// `T_ij = ∂²φ/∂x^i∂x^j − γ^k_ij ∂φ/∂x^k` at a base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionTensor {
    pub t: DMatrix<f64>,
    pub max_abs: f64,
}

pub fn obstruction_tensor(
    a: &RiemannianMetricSpec,
    phi: &PotentialSpec,
    x: &[f64],
) -> Result<ObstructionTensor> {
    let n = a.dim;
    let gamma = christoffel_symbols(a, x)?;
    let (grad, hess) = phi.eval_derivatives(n, x)?;
    let t = DMatrix::from_fn(n, n, |i, j| {
        hess[(i, j)] - (0..n).map(|k| gamma.get(k, i, j) * grad[k]).sum::<f64>()
    });
    let max_abs = t.amax();
    Ok(ObstructionTensor { t, max_abs })
}

/// `L_{|i} = T_ij y^j`, computed from Christoffel symbols and derivatives of
/// `φ` only.
pub fn dhl_closed_form(
    a: &RiemannianMetricSpec,
    phi: &PotentialSpec,
    u: &TangentPoint,
) -> Result<OneForm> {
    let t = obstruction_tensor(a, phi, u.x())?;
    Ok(OneForm {
        components: t.t * DVector::from_column_slice(u.y()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub point: usize,
    pub semispray_derivative: f64,
    pub max_abs_horizontal_differential: f64,
    pub semispray_derivative_vanishes: bool,
    pub horizontal_differential_vanishes: bool,
}

/// Pointwise co-occurrence of `S(L) = 0` and `d_hL = 0`. Records evidence
/// only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceProbe {
    pub tolerance: f64,
    pub entries: Vec<ProbeEntry>,
    /// `table[s][d]` counts points with `S(L) = 0` iff `s == 1` and
    /// `d_hL = 0` iff `d == 1`.
    pub table: [[usize; 2]; 2],
    pub failures: Vec<crate::report::PointFailure>,
}

impl EquivalenceProbe {
    /// True when no point has exactly one of the two conditions.
    pub fn conditions_co_occur(&self) -> bool {
        self.table[0][1] == 0 && self.table[1][0] == 0
    }
}

pub fn equivalence_probe(
    field: &LagrangianField,
    points: &[TangentPoint],
    tol: f64,
) -> EquivalenceProbe {
    let mut probe = EquivalenceProbe {
        tolerance: tol,
        entries: Vec::new(),
        table: [[0; 2]; 2],
        failures: Vec::new(),
    };
    for (i, u) in points.iter().enumerate() {
        match GeometryBundle::compute(field, u) {
            Ok(b) => {
                let sl = b.semispray_derivative;
                let dh = b.max_abs_horizontal_differential();
                let entry = ProbeEntry {
                    point: i,
                    semispray_derivative: sl,
                    max_abs_horizontal_differential: dh,
                    semispray_derivative_vanishes: sl.abs() <= tol,
                    horizontal_differential_vanishes: dh <= tol,
                };
                probe.table[entry.semispray_derivative_vanishes as usize]
                    [entry.horizontal_differential_vanishes as usize] += 1;
                probe.entries.push(entry);
            }
            Err(e) => probe.failures.push(crate::report::PointFailure {
                point: i,
                error: e.to_string(),
            }),
        }
    }
    probe
}

/// Built-in `(a, φ)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Euclidean metric, `φ = (x1)²`.
    FlatQuadraticPhi,
    /// Polar metric `diag(1, (x1)²)` on `x1 ∈ [0.5, 2]`, `φ = x2`.
    PolarLinearPhi,
    /// Euclidean metric, `φ = x1 + 2·x2`; no obstruction.
    NullControl,
    /// Polar metric, `φ = 0`; homogeneous.
    HomogeneousControl,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::FlatQuadraticPhi,
        Family::PolarLinearPhi,
        Family::NullControl,
        Family::HomogeneousControl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::FlatQuadraticPhi => "flat-quadratic-phi",
            Family::PolarLinearPhi => "polar-linear-phi",
            Family::NullControl => "null-control",
            Family::HomogeneousControl => "homogeneous-control",
        }
    }

    pub fn dim(self) -> usize {
        2
    }

    pub fn metric(self) -> RiemannianMetricSpec {
        match self {
            Family::FlatQuadraticPhi | Family::NullControl => RiemannianMetricSpec::euclidean(2),
            Family::PolarLinearPhi | Family::HomogeneousControl => RiemannianMetricSpec::polar(),
        }
    }

    pub fn potential(self) -> PotentialSpec {
        let text = match self {
            Family::FlatQuadraticPhi => "x1^2",
            Family::PolarLinearPhi => "x2",
            Family::NullControl => "x1 + 2*x2",
            Family::HomogeneousControl => return PotentialSpec::zero(),
        };
        PotentialSpec::parse(text, 2).expect("built-in potential parses")
    }

    /// Whether the family is expected to produce `d_hL ≠ 0` somewhere.
    pub fn expects_witness(self) -> bool {
        matches!(self, Family::FlatQuadraticPhi | Family::PolarLinearPhi)
    }

    pub fn sampling_box(self) -> SamplingBox {
        self.metric().domain
    }

    /// The unperturbed quadratic `L'`.
    pub fn base_lagrangian(self) -> Result<LagrangianField> {
        Ok(build_riemannian_quadratic(&self.metric())?
            .with_label(format!("{} (unperturbed)", self.name())))
    }

    /// `L = L' + φᶜ`.
    pub fn lagrangian(self) -> Result<LagrangianField> {
        Ok(perturb_with_gradient(
            &build_riemannian_quadratic(&self.metric())?,
            &self.potential(),
        )?
        .with_label(self.name()))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown family '{s}' (expected one of: {})",
                    Family::ALL.map(|f| f.name()).join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{horizontal_differential, metric_tensor};
    use crate::sampling::Sampler;

    fn pt(x: &[f64], y: &[f64]) -> TangentPoint {
        TangentPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn christoffel_examples() {
        let flat = christoffel_symbols(&RiemannianMetricSpec::euclidean(2), &[0.3, -1.0]).unwrap();
        assert!(flat.symbols.iter().all(|m| m.amax() == 0.0));
        let polar = christoffel_symbols(&RiemannianMetricSpec::polar(), &[2.0, 0.7]).unwrap();
        assert_eq!(polar.get(0, 1, 1), -2.0);
        assert_eq!(polar.get(1, 0, 1), 0.5);
        assert_eq!(polar.get(1, 1, 0), 0.5);
        for (i, j, k) in [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)] {
            assert_eq!(polar.get(i, j, k), 0.0);
        }
        for m in &polar.symbols {
            assert_eq!(m, &m.transpose());
        }
    }

    #[test]
    fn christoffel_contraction_matches_semispray() {
        let a = RiemannianMetricSpec::polar();
        let l = build_riemannian_quadratic(&a).unwrap();
        let pts = Sampler::new(21).points(&a.domain, 20).unwrap();
        for u in &pts {
            let gamma = christoffel_symbols(&a, u.x()).unwrap();
            let g = crate::geometry::semispray_coeffs(&l, u).unwrap();
            assert!((gamma.contract(u.y()) - 2.0 * g.coeffs).amax() < 1e-8);
        }
    }

    #[test]
    fn quadratic_and_perturbed_fields() {
        let flat = build_riemannian_quadratic(&RiemannianMetricSpec::euclidean(2)).unwrap();
        let u = pt(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(flat.value(&u).unwrap(), 25.0);
        let polar = build_riemannian_quadratic(&RiemannianMetricSpec::polar()).unwrap();
        let m = metric_tensor(&polar, &pt(&[3.0, 0.0], &[1.0, 1.0])).unwrap();
        assert_eq!(m.g, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 9.0]));

        let pert = Family::FlatQuadraticPhi.lagrangian().unwrap();
        let reference = LagrangianField::parse("y1^2 + y2^2 + 2*x1*y1", 2).unwrap();
        let polar_pert = Family::PolarLinearPhi.lagrangian().unwrap();
        let polar_ref = LagrangianField::parse("y1^2 + x1^2*y2^2 + y2", 2).unwrap();
        let pts = Sampler::new(3)
            .points(&Family::PolarLinearPhi.sampling_box(), 20)
            .unwrap();
        for u in &pts {
            assert!((pert.value(u).unwrap() - reference.value(u).unwrap()).abs() < 1e-12);
            assert!((polar_pert.value(u).unwrap() - polar_ref.value(u).unwrap()).abs() < 1e-12);
            let g0 = metric_tensor(&polar, u).unwrap().g;
            let g1 = metric_tensor(&polar_pert, u).unwrap().g;
            assert!((g0 - g1).amax() <= 1e-12);
        }
    }

    #[test]
    fn structure_sharing_and_negative_control() {
        let pts = Sampler::new(4)
            .points(&Family::PolarLinearPhi.sampling_box(), 20)
            .unwrap();
        for fam in [Family::FlatQuadraticPhi, Family::PolarLinearPhi] {
            let reports = compare_structures(
                &fam.base_lagrangian().unwrap(),
                &fam.lagrangian().unwrap(),
                &pts,
                1e-9,
            );
            assert!(reports.iter().all(|r| r.passed), "{fam}: {reports:?}");
        }
        let flat = build_riemannian_quadratic(&RiemannianMetricSpec::euclidean(2)).unwrap();
        let polar = build_riemannian_quadratic(&RiemannianMetricSpec::polar()).unwrap();
        let reports = compare_structures(&flat, &polar, &pts, 1e-9);
        assert!(reports.iter().all(|r| !r.passed));
    }

    #[test]
    fn closed_form_horizontal_differential() {
        let flat = RiemannianMetricSpec::euclidean(2);
        let phi = PotentialSpec::parse("x1^2", 2).unwrap();
        let d = dhl_closed_form(&flat, &phi, &pt(&[1.0, 2.0], &[3.0, 4.0])).unwrap();
        assert_eq!(d.components.as_slice(), &[6.0, 0.0]);

        let polar = RiemannianMetricSpec::polar();
        let d = dhl_closed_form(
            &polar,
            &PotentialSpec::parse("x2", 2).unwrap(),
            &pt(&[1.0, 0.0], &[1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(d.components.as_slice(), &[-1.0, -1.0]);

        let d = dhl_closed_form(
            &flat,
            &PotentialSpec::parse("3*x1 - x2", 2).unwrap(),
            &pt(&[1.0, 2.0], &[3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(d.components.as_slice(), &[0.0, 0.0]);

        for fam in Family::ALL {
            let l = fam.lagrangian().unwrap();
            for u in Sampler::new(5).points(&fam.sampling_box(), 20).unwrap() {
                let closed = dhl_closed_form(&fam.metric(), &fam.potential(), &u).unwrap();
                let general = horizontal_differential(&l, &u).unwrap();
                assert!(
                    (closed.components - general.components).amax() <= 1e-8,
                    "{fam}"
                );
            }
        }
    }

    #[test]
    fn obstruction_examples() {
        let t = obstruction_tensor(
            &RiemannianMetricSpec::euclidean(2),
            &PotentialSpec::parse("x1^2", 2).unwrap(),
            &[0.3, 0.1],
        )
        .unwrap();
        assert_eq!(t.max_abs, 2.0);
        let t = obstruction_tensor(
            &RiemannianMetricSpec::polar(),
            &PotentialSpec::parse("x2", 2).unwrap(),
            &[1.6, 0.1],
        )
        .unwrap();
        assert!((t.max_abs - 1.0 / 1.6).abs() < 1e-15);
        assert_eq!(t.t, t.t.transpose());
        let t = obstruction_tensor(
            &RiemannianMetricSpec::euclidean(2),
            &PotentialSpec::parse("x1 + 2*x2", 2).unwrap(),
            &[0.3, 0.1],
        )
        .unwrap();
        assert_eq!(t.max_abs, 0.0);
    }

    #[test]
    fn probe_examples() {
        let l = Family::FlatQuadraticPhi.lagrangian().unwrap();
        let off = [pt(&[0.2, 0.1], &[1.0, 0.5]), pt(&[-1.0, 0.3], &[-0.4, 2.0])];
        let probe = equivalence_probe(&l, &off, 1e-8);
        assert_eq!(probe.table, [[2, 0], [0, 0]]);
        let on = [pt(&[0.2, 0.1], &[0.0, 0.5]), pt(&[-1.0, 0.3], &[0.0, -2.0])];
        let probe = equivalence_probe(&l, &on, 1e-8);
        assert_eq!(probe.table, [[0, 0], [0, 2]]);
        let hom = Family::HomogeneousControl.lagrangian().unwrap();
        let pts = Sampler::new(2)
            .points(&Family::HomogeneousControl.sampling_box(), 20)
            .unwrap();
        let probe = equivalence_probe(&hom, &pts, 1e-8);
        assert_eq!(probe.table[1][1], 20);
        assert!(probe.conditions_co_occur());
    }

    #[test]
    fn spec_validation() {
        let bad =
            RiemannianMetricSpec::parse(&[&["1", "x1"], &["0", "1"]], SamplingBox::default_for(2));
        assert!(bad.is_err());
        assert!(RiemannianMetricSpec::parse(&[&["y1"]], SamplingBox::default_for(1)).is_err());
        assert!(PotentialSpec::parse("y1", 1).is_err());
        let a = RiemannianMetricSpec::parse(
            &[&["1", "0"], &["0", "x1^2"]],
            SamplingBox::default_for(2),
        )
        .unwrap();
        assert_eq!(
            a,
            RiemannianMetricSpec {
                domain: SamplingBox::default_for(2),
                ..RiemannianMetricSpec::polar()
            }
        );
        assert!(a.check_positive_definite(&[vec![1.0, 0.0]]).is_ok());
        assert!(a.check_positive_definite(&[vec![0.0, 0.0]]).is_err());
        assert!(christoffel_symbols(&a, &[0.0, 0.0]).is_err());
        assert_eq!(
            "polar-linear-phi".parse::<Family>().unwrap(),
            Family::PolarLinearPhi
        );
        assert!("nope".parse::<Family>().is_err());
    }
}
