use lagrangian::corpus::corpus;
use lagrangian::flows::{
    drift_report, integrate_horizontal, integrate_semispray, max_pointwise_gap, IntegratorConfig,
};

const STEPS: [f64; 3] = [1e-2, 5e-3, 1e-3];

#[test]
fn energy_drift_is_fourth_order() {
    for m in corpus() {
        let drifts: Vec<f64> = STEPS
            .iter()
            .map(|&h| {
                let tr = integrate_semispray(
                    &m.field,
                    &m.initial,
                    &IntegratorConfig::new(h, 1.0).unwrap(),
                )
                .unwrap();
                assert!(!tr.is_truncated(), "{}", m.name);
                drift_report(&tr).unwrap().energy.max_rel
            })
            .collect();
        let c = drifts[0] / STEPS[0].powi(4);
        for (d, h) in drifts.iter().zip(STEPS) {
            // Round-off floor for exactly conserved cases.
            assert!(*d <= 2.0 * c * h.powi(4) + 1e-13, "{}: {drifts:?}", m.name);
        }
    }
}

#[test]
fn observed_rates_match_predictions() {
    for m in corpus() {
        let cfg = IntegratorConfig::default();
        for tr in [
            integrate_semispray(&m.field, &m.initial, &cfg).unwrap(),
            integrate_horizontal(&m.field, &m.initial, &cfg).unwrap(),
        ] {
            let d = drift_report(&tr).unwrap();
            let scale = 1.0 + d.lagrangian.initial.abs();
            // Central differences are second order in the step.
            assert!(
                d.rate_residual.unwrap() <= 1e-4 * scale,
                "{} {:?}: {d:?}",
                m.name,
                tr.kind
            );
        }
    }
}

#[test]
fn homogeneous_members_have_coinciding_flows() {
    for m in corpus().into_iter().filter(|m| m.homogeneity == Some(2.0)) {
        let cfg = IntegratorConfig::default();
        let s = integrate_semispray(&m.field, &m.initial, &cfg).unwrap();
        let h = integrate_horizontal(&m.field, &m.initial, &cfg).unwrap();
        assert!(max_pointwise_gap(&s, &h) <= 1e-8, "{}", m.name);
        assert!(
            drift_report(&h).unwrap().lagrangian.max_rel <= 1e-8,
            "{}",
            m.name
        );
    }
}
