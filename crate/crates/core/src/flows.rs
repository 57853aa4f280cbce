//! Fixed-step RK4 integration of the semispray `(y, −2G)` and of its
//! horizontal part `hS = (y, −N y)`, with per-step diagnostics.

use std::io::{self, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::LagrangianField;
use crate::geometry::GeometryBundle;
use crate::point::TangentPoint;

/// Trajectories stop once `‖y‖` falls below this fraction of `‖y0‖`.
pub const FIBER_COLLAPSE_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_end: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-3,
            t_end: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64, t_end: f64) -> Result<Self> {
        let cfg = IntegratorConfig { step, t_end };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step must be a positive finite number"));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.step) {
            return Err(Error::invalid("t_end must be finite and at least one step"));
        }
        Ok(())
    }

    fn step_count(&self) -> usize {
        ((self.t_end / self.step) - 1e-9).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Semispray,
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub lagrangian: f64,
    pub energy: f64,
    pub semispray_derivative: f64,
    pub max_abs_horizontal_differential: f64,
    /// `(hS)(L) = y^i L_{|i}`.
    pub horizontal_rate: f64,
}

impl Diagnostics {
    fn from_bundle(b: &GeometryBundle) -> Self {
        Diagnostics {
            lagrangian: b.jet.value,
            energy: b.energy,
            semispray_derivative: b.semispray_derivative,
            max_abs_horizontal_differential: b.max_abs_horizontal_differential(),
            horizontal_rate: b.horizontal_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    /// The geometry could not be evaluated (degenerate metric, domain error).
    Geometry {
        t: f64,
        message: String,
        degenerate: bool,
    },
    FiberCollapse {
        t: f64,
        fiber_norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: FlowKind,
    pub dim: usize,
    pub config: IntegratorConfig,
    pub samples: Vec<Sample>,
    pub truncation: Option<Truncation>,
}

impl Trajectory {
    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    /// Writes `t,x1..xn,y1..yn,L,E,SL,dhL_max`, one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.dim;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("y{i}")));
        header.extend(["L", "E", "SL", "dhL_max"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let d = &s.diagnostics;
            let row: Vec<String> = std::iter::once(s.t)
                .chain(s.x.iter().copied())
                .chain(s.y.iter().copied())
                .chain([
                    d.lagrangian,
                    d.energy,
                    d.semispray_derivative,
                    d.max_abs_horizontal_differential,
                ])
                .map(|v| format!("{v:?}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn velocity(kind: FlowKind, b: &GeometryBundle) -> DVector<f64> {
    match kind {
        FlowKind::Semispray => b.semispray_vector(),
        FlowKind::Horizontal => {
            let n = b.dim();
            let y = DVector::from_column_slice(b.point.y());
            let ny = &b.connection.n * &y;
            DVector::from_fn(2 * n, |a, _| if a < n { y[a] } else { -ny[a - n] })
        }
    }
}

fn split(z: &DVector<f64>, n: usize) -> Result<TangentPoint> {
    TangentPoint::new(
        z.rows(0, n).iter().copied().collect(),
        z.rows(n, n).iter().copied().collect(),
    )
}

fn bundle_at(field: &LagrangianField, z: &DVector<f64>) -> Result<GeometryBundle> {
    GeometryBundle::compute(field, &split(z, field.dim())?)
}

fn truncation(t: f64, e: Error) -> Truncation {
    Truncation::Geometry {
        t,
        degenerate: matches!(e, Error::DegenerateLagrangian { .. }),
        message: e.to_string(),
    }
}

pub fn integrate(
    field: &LagrangianField,
    u0: &TangentPoint,
    cfg: &IntegratorConfig,
    kind: FlowKind,
) -> Result<Trajectory> {
    cfg.validate()?;
    field.check_point(u0)?;
    let n = field.dim();
    let mut b = GeometryBundle::compute(field, u0)?;
    let mut z = DVector::from_vec(u0.coordinates());
    let y0_norm = u0.fiber_norm();
    let mut traj = Trajectory {
        kind,
        dim: n,
        config: *cfg,
        samples: vec![Sample {
            t: 0.0,
            x: u0.x().to_vec(),
            y: u0.y().to_vec(),
            diagnostics: Diagnostics::from_bundle(&b),
        }],
        truncation: None,
    };
    let steps = cfg.step_count();
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps {
            cfg.t_end
        } else {
            k as f64 * cfg.step
        };
        let h = t_next - t;
        let stage = |z: &DVector<f64>| bundle_at(field, z).map(|b| velocity(kind, &b));
        let k1 = velocity(kind, &b);
        let advanced = stage(&(&z + &k1 * (h / 2.0))).and_then(|k2| {
            let k3 = stage(&(&z + &k2 * (h / 2.0)))?;
            let k4 = stage(&(&z + &k3 * h))?;
            let z_next = &z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            let u = split(&z_next, n)?;
            if u.fiber_norm() < FIBER_COLLAPSE_RATIO * y0_norm {
                return Ok(Err(Truncation::FiberCollapse {
                    t: t_next,
                    fiber_norm: u.fiber_norm(),
                }));
            }
            Ok(Ok((z_next, GeometryBundle::compute(field, &u)?)))
        });
        match advanced {
            Ok(Ok((z_next, b_next))) => {
                z = z_next;
                b = b_next;
                t = t_next;
                traj.samples.push(Sample {
                    t,
                    x: b.point.x().to_vec(),
                    y: b.point.y().to_vec(),
                    diagnostics: Diagnostics::from_bundle(&b),
                });
            }
            Ok(Err(tr)) => {
                traj.truncation = Some(tr);
                break;
            }
            Err(e) => {
                traj.truncation = Some(truncation(t_next, e));
                break;
            }
        }
    }
    Ok(traj)
}

/// Integral curve of `S`: `x' = y`, `y' = −2G(x, y)`.
pub fn integrate_semispray(
    field: &LagrangianField,
    u0: &TangentPoint,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate(field, u0, cfg, FlowKind::Semispray)
}

/// Integral curve of `hS`: `x' = y`, `y' = −N(x, y) y`.
pub fn integrate_horizontal(
    field: &LagrangianField,
    u0: &TangentPoint,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate(field, u0, cfg, FlowKind::Horizontal)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub initial: f64,
    pub max_abs: f64,
    pub final_abs: f64,
    pub max_rel: f64,
    pub final_rel: f64,
}

impl Drift {
    fn over(values: impl Iterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.collect();
        let initial = values[0];
        let scale = if initial == 0.0 { 1.0 } else { initial.abs() };
        let max_abs = values
            .iter()
            .map(|v| (v - initial).abs())
            .fold(0.0, f64::max);
        let final_abs = (values[values.len() - 1] - initial).abs();
        Drift {
            initial,
            max_abs,
            final_abs,
            max_rel: max_abs / scale,
            final_rel: final_abs / scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub kind: FlowKind,
    pub samples: usize,
    pub t_final: f64,
    pub lagrangian: Drift,
    pub energy: Drift,
    /// Max over interior samples of `|ΔL/Δt − predicted|`, with `ΔL/Δt` the
    /// central difference and the prediction `S(L)` (semispray) or
    /// `y^i L_{|i}` (horizontal). `None` with fewer than three samples.
    pub rate_residual: Option<f64>,
    pub truncated: bool,
}

pub fn drift_report(traj: &Trajectory) -> Result<DriftSummary> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(Error::invalid("drift report needs at least two samples"));
    }
    let rate_residual = (s.len() >= 3).then(|| {
        s.windows(3)
            .map(|w| {
                let observed =
                    (w[2].diagnostics.lagrangian - w[0].diagnostics.lagrangian) / (w[2].t - w[0].t);
                let d = &w[1].diagnostics;
                let predicted = match traj.kind {
                    FlowKind::Semispray => d.semispray_derivative,
                    FlowKind::Horizontal => d.horizontal_rate,
                };
                (observed - predicted).abs()
            })
            .fold(0.0, f64::max)
    });
    Ok(DriftSummary {
        kind: traj.kind,
        samples: s.len(),
        t_final: s[s.len() - 1].t,
        lagrangian: Drift::over(s.iter().map(|p| p.diagnostics.lagrangian)),
        energy: Drift::over(s.iter().map(|p| p.diagnostics.energy)),
        rate_residual,
        truncated: traj.is_truncated(),
    })
}

/// Largest sup-norm distance between same-index samples of two trajectories.
pub fn max_pointwise_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| {
            p.x.iter()
                .zip(&q.x)
                .chain(p.y.iter().zip(&q.y))
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
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

    #[test]
    fn flat_is_a_straight_line() {
        let l = field("y1^2 + y2^2");
        let tr = integrate_semispray(
            &l,
            &pt(&[0.0, 0.0], &[1.0, 0.0]),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(tr.samples.len(), 1001);
        assert!((tr.last().t - 1.0).abs() < 1e-15);
        assert!((tr.last().x[0] - 1.0).abs() < 1e-12);
        assert_eq!(tr.last().y, vec![1.0, 0.0]);
        assert_eq!(drift_report(&tr).unwrap().energy.max_abs, 0.0);
        let hz = integrate_horizontal(
            &l,
            &pt(&[0.0, 0.0], &[1.0, 0.0]),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(max_pointwise_gap(&tr, &hz), 0.0);
    }

    #[test]
    fn perturbed_flat_lagrangian_drifts_linearly() {
        let l = field("y1^2 + y2^2 + 2*x1*y1");
        let tr = integrate_semispray(
            &l,
            &pt(&[1.0, 0.0], &[1.0, 0.0]),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let last = tr.last();
        assert!((last.x[0] - 2.0).abs() < 1e-12 && last.x[1] == 0.0);
        let d = drift_report(&tr).unwrap();
        assert!((d.lagrangian.final_abs - 2.0).abs() < 1e-8);
        assert!(d.energy.max_rel < 1e-12);
        assert!(d.rate_residual.unwrap() < 1e-6);
    }

    #[test]
    fn polar_energy_conserved_and_flows_coincide() {
        let l = field("y1^2 + x1^2*y2^2");
        let u0 = pt(&[1.0, 0.0], &[0.0, 1.0]);
        let cfg = IntegratorConfig::default();
        let s = integrate_semispray(&l, &u0, &cfg).unwrap();
        let h = integrate_horizontal(&l, &u0, &cfg).unwrap();
        assert!(!s.is_truncated());
        assert!(drift_report(&s).unwrap().energy.max_rel <= 1e-10);
        assert!(drift_report(&h).unwrap().lagrangian.max_rel <= 1e-8);
        assert!(max_pointwise_gap(&s, &h) < 1e-9);
    }

    #[test]
    fn magnetic_flows_diverge() {
        let l = field("y1^2 + y2^2 + x1*y2");
        let u0 = pt(&[0.5, 0.5], &[1.0, 1.0]);
        let cfg = IntegratorConfig::default();
        let s = integrate_semispray(&l, &u0, &cfg).unwrap();
        let h = integrate_horizontal(&l, &u0, &cfg).unwrap();
        assert!(max_pointwise_gap(&s, &h) > 1e-3);
        let dh = drift_report(&h).unwrap();
        assert!(dh.rate_residual.unwrap() < 1e-5);
    }

    #[test]
    fn fourth_order_energy_convergence() {
        let l = field("(y1^2 + y2^2)^2 + x1^2*y2^2");
        let u0 = pt(&[1.0, 0.2], &[0.3, 0.8]);
        let drifts: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| {
                let tr =
                    integrate_semispray(&l, &u0, &IntegratorConfig::new(h, 1.0).unwrap()).unwrap();
                drift_report(&tr).unwrap().energy.final_abs
            })
            .collect();
        for w in drifts.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 3.5, "observed order {order} from {drifts:?}");
        }
    }

    #[test]
    fn last_step_is_shortened() {
        let l = field("y1^2 + y2^2");
        let tr = integrate_semispray(
            &l,
            &pt(&[0.0, 0.0], &[1.0, 0.0]),
            &IntegratorConfig::new(0.3, 1.0).unwrap(),
        )
        .unwrap();
        let ts: Vec<f64> = tr.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts[4], 1.0);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_start_and_truncation() {
        assert!(matches!(
            integrate_semispray(
                &field("y1 + y2^2"),
                &pt(&[0.0, 0.0], &[1.0, 1.0]),
                &IntegratorConfig::default()
            ),
            Err(Error::DegenerateLagrangian { .. })
        ));
        let l = field("y1^2 + sqrt(1 - x1)*y2^2");
        let tr = integrate_semispray(
            &l,
            &pt(&[0.0, 0.0], &[2.0, 0.0]),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(tr.is_truncated(), "{:?}", tr.truncation);
        assert!(tr.last().t < 1.0);
        let collapse = field("exp(x1)*(y1^2 + y2^2)");
        let tr = integrate_semispray(
            &collapse,
            &pt(&[0.0, 0.0], &[1.0, 0.0]),
            &IntegratorConfig::new(1e-2, 50.0).unwrap(),
        )
        .unwrap();
        assert!(
            matches!(tr.truncation, Some(Truncation::FiberCollapse { .. })),
            "{:?}",
            tr.truncation
        );
    }

    #[test]
    fn csv_layout() {
        let l = field("y1^2 + y2^2");
        let tr = integrate_semispray(
            &l,
            &pt(&[0.0, 0.0], &[1.0, 0.0]),
            &IntegratorConfig::new(0.5, 1.0).unwrap(),
        )
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,y1,y2,L,E,SL,dhL_max");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "1.0,1.0,0.0,1.0,0.0,1.0,1.0,0.0,0.0");
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1.0).is_err());
        assert!(IntegratorConfig::new(2.0, 1.0).is_err());
        assert!(drift_report(&Trajectory {
            kind: FlowKind::Semispray,
            dim: 1,
            config: IntegratorConfig::default(),
            samples: vec![],
            truncation: None
        })
        .is_err());
    }
}
