//! Canonical objects of a regular Lagrangian at a point of the slit tangent
//! bundle.
//!
//! Conventions used throughout:
//! - Natural basis order is `(∂/∂x^1..∂/∂x^n, ∂/∂y^1..∂/∂y^n)`; tangent vectors
//!   of `TM` are column vectors `(X; Y)` in that basis.
//! - A two-form is stored as `Ω[a][b] = ω(e_a, e_b)`, with
//!   `(α∧β)(u, v) = α(u)β(v) − α(v)β(u)`.
//! - The tangent structure acts as `J(X; Y) = (0; X)`; the Liouville field is
//!   `y^i ∂/∂y^i`.

pub mod checks;
pub(crate) mod symbolic;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::LagrangianField;
use crate::jet::{jet3, Jet3};
use crate::point::TangentPoint;

pub use checks::*;

/// Relative determinant threshold below which the fiber Hessian is treated
/// as singular: `|det g| > REGULARITY_THRESHOLD · (max |g_ij|)^n`.
pub const REGULARITY_THRESHOLD: f64 = 1e-10;

/// `g_ij = ½ ∂²L/∂y^i∂y^j`, its inverse and determinant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub det: f64,
}

/// Semispray coefficients `G^i`, so that `S = y^i ∂/∂x^i − 2G^i ∂/∂y^i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemisprayCoeffs {
    pub coeffs: DVector<f64>,
}

/// Nonlinear connection coefficients; `n[(i, j)] = N^i_j = ∂G^i/∂y^j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionCoeffs {
    pub n: DMatrix<f64>,
}

/// A semi-basic one-form `c_i dx^i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneForm {
    pub components: DVector<f64>,
}

impl OneForm {
    /// Pairing with `(X; Y)`; only the base components contribute.
    pub fn pair(&self, v: &TangentVectorTM) -> f64 {
        self.components.dot(&v.base)
    }
}

/// `Ω[a][b] = ω(e_a, e_b)` in the natural basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoFormMatrix {
    pub omega: DMatrix<f64>,
}

impl TwoFormMatrix {
    pub fn apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.omega * v)[(0, 0)]
    }
}

/// `X^i ∂/∂x^i + Y^i ∂/∂y^i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentVectorTM {
    pub base: DVector<f64>,
    pub fiber: DVector<f64>,
}

impl TangentVectorTM {
    pub fn new(base: Vec<f64>, fiber: Vec<f64>) -> Self {
        TangentVectorTM {
            base: DVector::from_vec(base),
            fiber: DVector::from_vec(fiber),
        }
    }

    pub fn from_stacked(v: &DVector<f64>) -> Self {
        let n = v.len() / 2;
        TangentVectorTM {
            base: v.rows(0, n).into_owned(),
            fiber: v.rows(n, n).into_owned(),
        }
    }

    pub fn stacked(&self) -> DVector<f64> {
        let n = self.base.len();
        DVector::from_fn(2 * n, |a, _| {
            if a < n {
                self.base[a]
            } else {
                self.fiber[a - n]
            }
        })
    }

    pub fn vertical(fiber: Vec<f64>) -> Self {
        TangentVectorTM::new(vec![0.0; fiber.len()], fiber)
    }
}

/// Horizontal projector in the natural basis: `(X; Y) ↦ (X; −N X)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorMatrix {
    pub h: DMatrix<f64>,
}

/// Every derived object at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryBundle {
    pub point: TangentPoint,
    #[serde(skip)]
    pub jet: Jet3,
    pub metric: Metric,
    pub semispray: SemisprayCoeffs,
    pub connection: ConnectionCoeffs,
    /// `∂G^i/∂x^j`, needed for brackets with `S`.
    pub semispray_base_gradient: DMatrix<f64>,
    pub cartan_one_form: OneForm,
    pub cartan_two_form: TwoFormMatrix,
    pub energy: f64,
    pub semispray_derivative: f64,
    pub horizontal_differential: OneForm,
    pub projector: ProjectorMatrix,
}

impl GeometryBundle {
    pub fn compute(field: &LagrangianField, u: &TangentPoint) -> Result<Self> {
        let jet = jet3(field, u)?;
        GeometryBundle::from_jet(u.clone(), jet)
    }

    pub fn from_jet(point: TangentPoint, jet: Jet3) -> Result<Self> {
        let metric = metric_from_jet(&jet)?;
        let semispray = semispray_from_jet(&jet, point.y(), &metric);
        let (connection, semispray_base_gradient) =
            semispray_gradients(&jet, point.y(), &metric, &semispray);
        let cartan_one_form = cartan_one_form_from_jet(&jet);
        let cartan_two_form = cartan_two_form_from_jet(&jet);
        let energy = energy_from_jet(&jet, point.y());
        let semispray_derivative = semispray_derivative_from_jet(&jet, point.y(), &semispray);
        let horizontal_differential = horizontal_differential_from_jet(&jet, &connection);
        let projector = projector_from_connection(&connection);
        Ok(GeometryBundle {
            point,
            jet,
            metric,
            semispray,
            connection,
            semispray_base_gradient,
            cartan_one_form,
            cartan_two_form,
            energy,
            semispray_derivative,
            horizontal_differential,
            projector,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Natural components of `S`: `(y; −2G)`.
    pub fn semispray_vector(&self) -> DVector<f64> {
        let n = self.dim();
        let y = self.point.y();
        DVector::from_fn(2 * n, |a, _| {
            if a < n {
                y[a]
            } else {
                -2.0 * self.semispray.coeffs[a - n]
            }
        })
    }

    /// Jacobian of the components of `S`:
    /// `[[0, I], [−2 ∂G/∂x, −2N]]`.
    pub fn semispray_jacobian(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            d[(i, n + i)] = 1.0;
            for j in 0..n {
                d[(n + i, j)] = -2.0 * self.semispray_base_gradient[(i, j)];
                d[(n + i, n + j)] = -2.0 * self.connection.n[(i, j)];
            }
        }
        d
    }

    /// `[S, V]` for the constant-coefficient extension of `V`, which is
    /// `−DS · V`.
    pub fn bracket_with_semispray(&self, v: &DVector<f64>) -> DVector<f64> {
        -(self.semispray_jacobian() * v)
    }

    /// `dL` in the natural basis: `(∂L/∂x; ∂L/∂y)`.
    pub fn differential(&self) -> DVector<f64> {
        DVector::from_vec(self.jet.d1.clone())
    }

    /// `ℂ(L) = y^i ∂L/∂y^i`.
    pub fn liouville_derivative(&self) -> f64 {
        let y = self.point.y();
        (0..self.dim())
            .map(|i| y[i] * self.jet.first(self.jet.y(i)))
            .sum()
    }

    /// Natural components of `d(L − ℂ(L))`.
    pub fn d_lagrangian_minus_liouville(&self) -> DVector<f64> {
        let n = self.dim();
        let y = self.point.y();
        let j = &self.jet;
        DVector::from_fn(2 * n, |a, _| {
            let mut v = j.first(a) - (0..n).map(|i| y[i] * j.second(j.y(i), a)).sum::<f64>();
            if a >= n {
                v -= j.first(a);
            }
            v
        })
    }

    /// `(hS)(L) = y^i L_{|i}`.
    pub fn horizontal_rate(&self) -> f64 {
        self.horizontal_differential
            .components
            .iter()
            .zip(self.point.y())
            .map(|(c, y)| c * y)
            .sum()
    }

    pub fn max_abs_horizontal_differential(&self) -> f64 {
        self.horizontal_differential.components.amax()
    }
}

pub fn metric_from_jet(jet: &Jet3) -> Result<Metric> {
    let n = jet.dim();
    let g = DMatrix::from_fn(n, n, |i, j| 0.5 * jet.second(jet.y(i), jet.y(j)));
    let scale = g.amax();
    let det = g.determinant();
    let threshold = REGULARITY_THRESHOLD * scale.powi(n as i32);
    if scale == 0.0 || !(det.abs() > threshold) {
        return Err(Error::DegenerateLagrangian {
            object: "metric tensor g_ij".into(),
            det,
            threshold,
        });
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateLagrangian {
            object: "metric tensor g_ij".into(),
            det,
            threshold,
        })?;
    Ok(Metric { g, g_inv, det })
}

/// `R_k = ∂²L/∂y^k∂x^h y^h − ∂L/∂x^k`, so that `G = ¼ g⁻¹ R`.
fn semispray_rhs(jet: &Jet3, y: &[f64]) -> DVector<f64> {
    let n = jet.dim();
    DVector::from_fn(n, |k, _| {
        (0..n)
            .map(|h| jet.second(jet.y(k), jet.x(h)) * y[h])
            .sum::<f64>()
            - jet.first(jet.x(k))
    })
}

pub fn semispray_from_jet(jet: &Jet3, y: &[f64], metric: &Metric) -> SemisprayCoeffs {
    SemisprayCoeffs {
        coeffs: 0.25 * &metric.g_inv * semispray_rhs(jet, y),
    }
}

/// Exact derivatives of `G^i` with respect to every coordinate, by the
/// product rule on `¼ g⁻¹ R` with `∂g⁻¹ = −g⁻¹ (∂g) g⁻¹`. Returns
/// `(N, ∂G/∂x)` with `N[(i, j)] = ∂G^i/∂y^j`.
pub fn semispray_gradients(
    jet: &Jet3,
    y: &[f64],
    metric: &Metric,
    semispray: &SemisprayCoeffs,
) -> (ConnectionCoeffs, DMatrix<f64>) {
    let n = jet.dim();
    let mut n_mat = DMatrix::zeros(n, n);
    let mut dx_mat = DMatrix::zeros(n, n);
    // g⁻¹R = 4G
    let four_g = 4.0 * &semispray.coeffs;
    for z in 0..2 * n {
        let dg = DMatrix::from_fn(n, n, |a, b| 0.5 * jet.third(jet.y(a), jet.y(b), z));
        let dr = DVector::from_fn(n, |k, _| {
            let mut v = (0..n)
                .map(|h| jet.third(jet.y(k), jet.x(h), z) * y[h])
                .sum::<f64>()
                - jet.second(jet.x(k), z);
            if z >= n {
                v += jet.second(jet.y(k), jet.x(z - n));
            }
            v
        });
        // ∂(g⁻¹R) = g⁻¹ (∂R − ∂g · g⁻¹R)
        let d = 0.25 * &metric.g_inv * (dr - dg * &four_g);
        let target = if z < n { &mut dx_mat } else { &mut n_mat };
        target.set_column(z % n, &d);
    }
    (ConnectionCoeffs { n: n_mat }, dx_mat)
}

pub fn cartan_one_form_from_jet(jet: &Jet3) -> OneForm {
    OneForm {
        components: DVector::from_fn(jet.dim(), |i, _| jet.first(jet.y(i))),
    }
}

/// Builds `Ω` term by term from
/// `ω = 2g_ij dy^j∧dx^i + ½(∂²L/∂y^i∂x^j − ∂²L/∂x^i∂y^j) dx^j∧dx^i`.
pub fn cartan_two_form_from_jet(jet: &Jet3) -> TwoFormMatrix {
    let n = jet.dim();
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    let mut add_wedge = |coef: f64, a: usize, b: usize| {
        // coef · (e^a ∧ e^b)
        omega[(a, b)] += coef;
        omega[(b, a)] -= coef;
    };
    for i in 0..n {
        for j in 0..n {
            let g_ij = 0.5 * jet.second(jet.y(i), jet.y(j));
            add_wedge(2.0 * g_ij, jet.y(j), jet.x(i));
            let c = 0.5 * (jet.second(jet.y(i), jet.x(j)) - jet.second(jet.x(i), jet.y(j)));
            add_wedge(c, jet.x(j), jet.x(i));
        }
    }
    TwoFormMatrix { omega }
}

pub fn energy_from_jet(jet: &Jet3, y: &[f64]) -> f64 {
    (0..jet.dim())
        .map(|i| y[i] * jet.first(jet.y(i)))
        .sum::<f64>()
        - jet.value
}

/// `S(L) = y^i ∂L/∂x^i − 2G^i ∂L/∂y^i`.
pub fn semispray_derivative_from_jet(jet: &Jet3, y: &[f64], semispray: &SemisprayCoeffs) -> f64 {
    (0..jet.dim())
        .map(|i| y[i] * jet.first(jet.x(i)) - 2.0 * semispray.coeffs[i] * jet.first(jet.y(i)))
        .sum()
}

/// `L_{|i} = ∂L/∂x^i − N^j_i ∂L/∂y^j`.
pub fn horizontal_differential_from_jet(jet: &Jet3, connection: &ConnectionCoeffs) -> OneForm {
    let n = jet.dim();
    OneForm {
        components: DVector::from_fn(n, |i, _| {
            jet.first(jet.x(i))
                - (0..n)
                    .map(|j| connection.n[(j, i)] * jet.first(jet.y(j)))
                    .sum::<f64>()
        }),
    }
}

pub fn projector_from_connection(connection: &ConnectionCoeffs) -> ProjectorMatrix {
    let n = connection.n.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        h[(i, i)] = 1.0;
        for j in 0..n {
            h[(n + i, j)] = -connection.n[(i, j)];
        }
    }
    ProjectorMatrix { h }
}

pub fn metric_tensor(field: &LagrangianField, u: &TangentPoint) -> Result<Metric> {
    metric_from_jet(&jet3(field, u)?)
}

pub fn cartan_one_form(field: &LagrangianField, u: &TangentPoint) -> Result<OneForm> {
    Ok(cartan_one_form_from_jet(&jet3(field, u)?))
}

pub fn cartan_two_form_natural(field: &LagrangianField, u: &TangentPoint) -> Result<TwoFormMatrix> {
    Ok(cartan_two_form_from_jet(&jet3(field, u)?))
}

pub fn semispray_coeffs(field: &LagrangianField, u: &TangentPoint) -> Result<SemisprayCoeffs> {
    let jet = jet3(field, u)?;
    let metric = metric_from_jet(&jet)?;
    Ok(semispray_from_jet(&jet, u.y(), &metric))
}

pub fn connection_coeffs(field: &LagrangianField, u: &TangentPoint) -> Result<ConnectionCoeffs> {
    Ok(GeometryBundle::compute(field, u)?.connection)
}

pub fn horizontal_projector_matrix(
    field: &LagrangianField,
    u: &TangentPoint,
) -> Result<ProjectorMatrix> {
    Ok(GeometryBundle::compute(field, u)?.projector)
}

pub fn energy(field: &LagrangianField, u: &TangentPoint) -> Result<f64> {
    Ok(energy_from_jet(&jet3(field, u)?, u.y()))
}

pub fn semispray_derivative(field: &LagrangianField, u: &TangentPoint) -> Result<f64> {
    Ok(GeometryBundle::compute(field, u)?.semispray_derivative)
}

pub fn horizontal_differential(field: &LagrangianField, u: &TangentPoint) -> Result<OneForm> {
    Ok(GeometryBundle::compute(field, u)?.horizontal_differential)
}

/// Numerical rank: singular values above `1e-10 · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.amax();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &[f64], y: &[f64]) -> TangentPoint {
        TangentPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn field(text: &str) -> LagrangianField {
        LagrangianField::parse(text, 2).unwrap()
    }

    const FLAT: &str = "y1^2 + y2^2";
    const PERT: &str = "y1^2 + y2^2 + 2*x1*y1";
    const POLAR: &str = "y1^2 + x1^2*y2^2";

    #[test]
    fn metric_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(
            metric_tensor(&field(FLAT), &pt(&[0.3, 1.0], &[1.0, 2.0]))
                .unwrap()
                .g,
            id
        );
        assert_eq!(
            metric_tensor(&field(PERT), &pt(&[0.3, 1.0], &[1.0, 2.0]))
                .unwrap()
                .g,
            id
        );
        let m = metric_tensor(&field(POLAR), &pt(&[2.0, 0.0], &[1.0, 1.0])).unwrap();
        assert_eq!(m.g, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]));
        assert_eq!(m.det, 4.0);
        assert!((&m.g * &m.g_inv - id).amax() <= 1e-10);
    }

    #[test]
    fn degenerate_lagrangians() {
        let err = metric_tensor(&field("y1"), &pt(&[0.0, 0.0], &[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateLagrangian { .. }));
        let err =
            GeometryBundle::compute(&field("y1^2"), &pt(&[0.0, 0.0], &[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateLagrangian { .. }));
        assert!(semispray_coeffs(&field("(y1+y2)^2"), &pt(&[0.0, 0.0], &[1.0, 1.0])).is_err());
    }

    #[test]
    fn cartan_one_form_examples() {
        let th = cartan_one_form(&field(FLAT), &pt(&[0.0, 0.0], &[3.0, 4.0])).unwrap();
        assert_eq!(th.components.as_slice(), &[6.0, 8.0]);
        let th = cartan_one_form(&field(PERT), &pt(&[1.0, 7.0], &[3.0, 4.0])).unwrap();
        assert_eq!(th.components.as_slice(), &[8.0, 8.0]);
        assert_eq!(th.pair(&TangentVectorTM::vertical(vec![2.5, -1.0])), 0.0);
    }

    #[test]
    fn cartan_two_form_examples() {
        let u = pt(&[1.0, 2.0], &[3.0, 4.0]);
        let flat = cartan_two_form_natural(&field(FLAT), &u).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        for i in 0..2 {
            expected[(i, 2 + i)] = -2.0;
            expected[(2 + i, i)] = 2.0;
        }
        assert_eq!(flat.omega, expected);
        let pert = cartan_two_form_natural(&field(PERT), &u).unwrap();
        assert_eq!(pert.omega, flat.omega);
        assert_eq!(numerical_rank(&flat.omega), 4);
    }

    #[test]
    fn two_form_is_exterior_derivative_of_theta() {
        // Independent route: ω(u, v) = Σ_i dP_i(u) v^i − dP_i(v) u^i with P_i = ∂L/∂y^i.
        let f = LagrangianField::parse("y1^2 + x1^2*y2^2 + sin(x2)*y1*x1 + y2", 2).unwrap();
        let u = pt(&[1.3, 0.4], &[0.7, -1.1]);
        let b = GeometryBundle::compute(&f, &u).unwrap();
        let j = &b.jet;
        let n = 2;
        let direct = DMatrix::from_fn(2 * n, 2 * n, |a, c| {
            let mut v = 0.0;
            if c < n {
                v += j.second(a, j.y(c));
            }
            if a < n {
                v -= j.second(c, j.y(a));
            }
            v
        });
        assert!((direct - &b.cartan_two_form.omega).amax() < 1e-12);
        assert!((&b.cartan_two_form.omega + b.cartan_two_form.omega.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn semispray_and_connection_examples() {
        let u = pt(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(
            semispray_coeffs(&field(FLAT), &u)
                .unwrap()
                .coeffs
                .as_slice(),
            &[0.0, 0.0]
        );
        assert_eq!(
            semispray_coeffs(&field(PERT), &u)
                .unwrap()
                .coeffs
                .as_slice(),
            &[0.0, 0.0]
        );
        assert_eq!(
            connection_coeffs(&field(FLAT), &u).unwrap().n,
            DMatrix::zeros(2, 2)
        );

        let u = pt(&[1.0, 0.0], &[1.0, 1.0]);
        let b = GeometryBundle::compute(&field(POLAR), &u).unwrap();
        assert!((b.semispray.coeffs[0] + 0.5).abs() < 1e-15);
        assert!((b.semispray.coeffs[1] - 1.0).abs() < 1e-15);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 1.0]);
        assert!((&b.connection.n - expected).amax() < 1e-15);
        let ny = &b.connection.n * DVector::from_column_slice(u.y());
        assert!((ny - 2.0 * &b.semispray.coeffs).amax() < 1e-15);
    }

    #[test]
    fn projector_examples() {
        let u = pt(&[1.0, 0.0], &[1.0, 1.0]);
        let flat = horizontal_projector_matrix(&field(FLAT), &u).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        expected[(1, 1)] = 1.0;
        assert_eq!(flat.h, expected);
        let b = GeometryBundle::compute(&field(POLAR), &u).unwrap();
        let h = &b.projector.h;
        assert!((h * h - h).amax() <= 1e-10);
        let s = b.semispray_vector();
        assert_eq!(s.as_slice(), &[1.0, 1.0, 1.0, -2.0]);
        assert!((h * &s - &s).amax() < 1e-15);
    }

    #[test]
    fn energy_and_semispray_derivative_examples() {
        let u = pt(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(energy(&field(FLAT), &u).unwrap(), 25.0);
        assert_eq!(energy(&field(PERT), &u).unwrap(), 25.0);
        assert_eq!(semispray_derivative(&field(FLAT), &u).unwrap(), 0.0);
        assert_eq!(semispray_derivative(&field(PERT), &u).unwrap(), 18.0);
        let d = horizontal_differential(&field(PERT), &u).unwrap();
        assert_eq!(d.components.as_slice(), &[6.0, 0.0]);
        assert_eq!(
            horizontal_differential(&field(FLAT), &u)
                .unwrap()
                .components
                .as_slice(),
            &[0.0, 0.0]
        );
        for (x1, y) in [(1.0, [1.0, 1.0]), (0.7, [-0.3, 1.9]), (1.8, [2.0, -0.5])] {
            let u = pt(&[x1, 0.2], &y);
            assert!(semispray_derivative(&field(POLAR), &u).unwrap().abs() < 1e-9);
            assert!(
                horizontal_differential(&field(POLAR), &u)
                    .unwrap()
                    .components
                    .amax()
                    < 1e-9
            );
        }
    }
}
