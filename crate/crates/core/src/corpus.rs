//! Named reference Lagrangians used by the test suites and the CLI.

use crate::counterexample::Family;
use crate::error::Result;
use crate::field::LagrangianField;
use crate::point::TangentPoint;
use crate::sampling::SamplingBox;

#[derive(Debug, Clone)]
pub struct CorpusMember {
    pub name: &'static str,
    pub field: LagrangianField,
    pub region: SamplingBox,
    /// Degree of homogeneity in `y`, when homogeneous.
    pub homogeneity: Option<f64>,
    /// Default starting point for flow experiments.
    pub initial: TangentPoint,
}

fn member(
    name: &'static str,
    text: &str,
    region: SamplingBox,
    homogeneity: Option<f64>,
    initial: ([f64; 2], [f64; 2]),
) -> Result<CorpusMember> {
    Ok(CorpusMember {
        name,
        field: LagrangianField::parse(text, 2)?.with_label(name),
        region,
        homogeneity,
        initial: TangentPoint::new(initial.0.to_vec(), initial.1.to_vec())?,
    })
}

pub const NAMES: [&str; 6] = [
    "flat",
    "pert",
    "polar",
    "polar_pert",
    "quartic",
    "null_control",
];

/// All six members, in a fixed order.
pub fn corpus() -> Vec<CorpusMember> {
    NAMES
        .iter()
        .map(|n| by_name(n).expect("corpus member builds"))
        .collect()
}

pub fn by_name(name: &str) -> Option<CorpusMember> {
    let square = SamplingBox::default_for(2);
    let polar = square.clone().with_base_interval(0, 0.5, 2.0);
    let m = match name {
        "flat" => member(
            "flat",
            "y1^2 + y2^2",
            square,
            Some(2.0),
            ([0.0, 0.0], [1.0, 0.0]),
        ),
        "pert" => member(
            "pert",
            "y1^2 + y2^2 + 2*x1*y1",
            square,
            None,
            ([1.0, 0.0], [1.0, 0.0]),
        ),
        "polar" => member(
            "polar",
            "y1^2 + x1^2*y2^2",
            polar,
            Some(2.0),
            ([1.0, 0.0], [0.0, 1.0]),
        ),
        "polar_pert" => member(
            "polar_pert",
            "y1^2 + x1^2*y2^2 + y2",
            polar,
            None,
            ([1.0, 0.0], [1.0, 1.0]),
        ),
        "quartic" => member(
            "quartic",
            "(y1^2 + y2^2)^2",
            square,
            Some(4.0),
            ([0.0, 0.0], [1.0, 0.5]),
        ),
        "null_control" => Family::NullControl.lagrangian().and_then(|field| {
            Ok(CorpusMember {
                name: "null_control",
                field: field.with_label("null_control"),
                region: square,
                homogeneity: None,
                initial: TangentPoint::new(vec![0.0, 0.0], vec![1.0, 0.5])?,
            })
        }),
        _ => return None,
    };
    m.ok()
}
