//! Acceptance suite: one PASS/FAIL line per criterion, with supporting
//! detail lines. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};

use lagrangian::corpus::{corpus, CorpusMember};
use lagrangian::counterexample::{compare_structures, dhl_closed_form, Family};
use lagrangian::flows::{
    drift_report, integrate_horizontal, integrate_semispray, max_pointwise_gap, IntegratorConfig,
};
use lagrangian::geometry::checks::{
    check_cartan_one_form, check_connection_fd, check_homogeneous_horizontality,
    check_horizontal_differential, check_lagrangian_subbundle, check_semispray_equation,
    check_structural_laws, homogeneity_degree, Tolerances, CONNECTION_FD_STEP,
};
use lagrangian::geometry::horizontal_differential;
use lagrangian::jet::{validate_jets, FdConfig};
use lagrangian::{IdentityReport, Sampler, TangentPoint};

const SEED: u64 = 7;
const POINTS: usize = 50;
const FAMILY_POINTS: usize = 20;
const VECTORS: usize = 10;

struct Criterion {
    ok: bool,
    lines: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Criterion {
            ok: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, label: impl AsRef<str>, ok: bool, detail: impl AsRef<str>) {
        self.ok &= ok;
        self.lines.push(format!(
            "    {} {}: {}",
            if ok { "ok  " } else { "FAIL" },
            label.as_ref(),
            detail.as_ref()
        ));
    }

    fn report(&mut self, label: impl AsRef<str>, r: &IdentityReport) {
        let mut detail = format!("max {:e} <= {:e}", r.max_residual, r.tolerance);
        if let Some(f) = r.failures.first() {
            detail.push_str(&format!(
                " ({} failed point(s), first: {})",
                r.failures.len(),
                f.error
            ));
        }
        self.check(format!("{} {}", label.as_ref(), r.name), r.passed, detail);
    }
}

fn points(m: &CorpusMember) -> Vec<TangentPoint> {
    Sampler::new(SEED).points(&m.region, POINTS).unwrap()
}

fn family_points(f: Family) -> Vec<TangentPoint> {
    Sampler::new(SEED)
        .points(&f.sampling_box(), FAMILY_POINTS)
        .unwrap()
}

fn pt(x: &[f64], y: &[f64]) -> TangentPoint {
    TangentPoint::new(x.to_vec(), y.to_vec()).unwrap()
}

fn horizontal_differential_identity() -> Criterion {
    let mut c = Criterion::new();
    for m in corpus() {
        c.report(
            m.name,
            &check_horizontal_differential(&m.field, &points(&m), 1e-8),
        );
    }
    c
}

fn cartan_one_form() -> Criterion {
    let mut c = Criterion::new();
    for m in corpus() {
        let mut s = Sampler::new(SEED);
        let p = s.points(&m.region, POINTS).unwrap();
        c.report(
            m.name,
            &check_cartan_one_form(&m.field, &p, &mut s, VECTORS, 1e-8),
        );
    }
    c
}

fn semispray_equation() -> Criterion {
    let mut c = Criterion::new();
    for m in corpus() {
        let mut s = Sampler::new(SEED);
        let p = s.points(&m.region, POINTS).unwrap();
        c.report(
            m.name,
            &check_semispray_equation(&m.field, &p, &mut s, VECTORS, 1e-8),
        );
    }
    c
}

fn homogeneous() -> Criterion {
    let mut c = Criterion::new();
    for m in corpus() {
        let p = points(&m);
        let detected = homogeneity_degree(&m.field, &p, 1e-8).unwrap().degree;
        match m.homogeneity {
            Some(k) => {
                c.check(
                    format!("{} degree", m.name),
                    detected.is_some_and(|d| (d - k).abs() <= 1e-8),
                    format!("detected {detected:?}, expected {k}"),
                );
                c.report(
                    m.name,
                    &check_homogeneous_horizontality(&m.field, &p, Tolerances::default()),
                );
            }
            None => c.check(
                format!("{} degree", m.name),
                detected.is_none(),
                format!("detected {detected:?}, expected none"),
            ),
        }
    }
    c
}

fn perturbed_families() -> Criterion {
    let mut c = Criterion::new();
    let flat = Family::FlatQuadraticPhi.lagrangian().unwrap();
    let worst = family_points(Family::FlatQuadraticPhi)
        .iter()
        .map(|u| {
            let d = horizontal_differential(&flat, u).unwrap().components;
            (d[0] - 2.0 * u.y()[0]).abs().max(d[1].abs())
        })
        .fold(0.0, f64::max);
    c.check(
        "flat-quadratic-phi d_hL = (2y1, 0)",
        worst <= 1e-10,
        format!("max {worst:e} <= 1e-10"),
    );
    let w = horizontal_differential(&flat, &pt(&[1.0, 2.0], &[3.0, 4.0]))
        .unwrap()
        .components;
    c.check(
        "flat-quadratic-phi witness at y = (3,4)",
        (w[0] - 6.0).abs() <= 1e-10 && w[1].abs() <= 1e-10,
        format!("({}, {})", w[0], w[1]),
    );

    let polar = Family::PolarLinearPhi.lagrangian().unwrap();
    let worst = family_points(Family::PolarLinearPhi)
        .iter()
        .map(|u| {
            let d = horizontal_differential(&polar, u).unwrap().components;
            (d[0] + u.y()[1] / u.x()[0]).abs()
        })
        .fold(0.0, f64::max);
    c.check(
        "polar-linear-phi L_|1 = -y2/x1",
        worst <= 1e-8,
        format!("max {worst:e} <= 1e-8"),
    );
    let w = horizontal_differential(&polar, &pt(&[1.0, 0.0], &[1.0, 1.0]))
        .unwrap()
        .components;
    c.check(
        "polar-linear-phi witness at x1 = 1, y = (1,1)",
        (w[0] + 1.0).abs() <= 1e-8,
        format!("L_|1 = {}", w[0]),
    );

    for f in [Family::NullControl, Family::HomogeneousControl] {
        let l = f.lagrangian().unwrap();
        let worst = family_points(f)
            .iter()
            .map(|u| horizontal_differential(&l, u).unwrap().components.amax())
            .fold(0.0, f64::max);
        c.check(
            format!("{f} max|d_hL|"),
            worst <= 1e-10,
            format!("{worst:e} <= 1e-10"),
        );
    }
    for f in Family::ALL {
        let [omega, spray, _] = compare_structures(
            &f.base_lagrangian().unwrap(),
            &f.lagrangian().unwrap(),
            &family_points(f),
            1e-9,
        );
        c.report(f.name(), &omega);
        c.report(f.name(), &spray);
    }
    c
}

fn flows() -> Criterion {
    let mut c = Criterion::new();
    let cfg = IntegratorConfig::new(1e-3, 1.0).unwrap();
    for m in corpus() {
        let tr = integrate_semispray(&m.field, &m.initial, &cfg).unwrap();
        let d = drift_report(&tr).unwrap();
        c.check(
            format!("{} semispray relative E drift", m.name),
            !tr.is_truncated() && d.energy.max_rel <= 1e-8,
            format!(
                "{:e} <= 1e-8 (truncated: {})",
                d.energy.max_rel,
                tr.is_truncated()
            ),
        );
    }
    let get = |name: &str| corpus().into_iter().find(|m| m.name == name).unwrap();

    let pert = get("pert");
    let u0 = pt(&[1.0, 0.0], &[1.0, 0.0]);
    let tr = integrate_semispray(&pert.field, &u0, &cfg).unwrap();
    let (l0, l1) = (
        tr.samples[0].diagnostics.lagrangian,
        tr.last().diagnostics.lagrangian,
    );
    c.check(
        "pert final L = L(0) + 2",
        (l1 - l0 - 2.0).abs() <= 1e-6,
        format!(
            "L(0) = {l0}, L(1) = {l1}, error {:e}",
            (l1 - l0 - 2.0).abs()
        ),
    );

    for (name, u0, want_coincide) in [
        ("polar", pt(&[1.0, 0.0], &[0.0, 1.0]), true),
        ("polar_pert", pt(&[1.0, 0.0], &[1.0, 1.0]), false),
    ] {
        let m = get(name);
        let s = integrate_semispray(&m.field, &u0, &cfg).unwrap();
        let h = integrate_horizontal(&m.field, &u0, &cfg).unwrap();
        let gap = max_pointwise_gap(&s, &h);
        if want_coincide {
            c.check(
                format!("{name} flows coincide"),
                gap <= 1e-8,
                format!("gap {gap:e} <= 1e-8"),
            );
        } else {
            c.check(
                format!("{name} flows separate"),
                gap > 1e-3,
                format!("gap {gap:e} > 1e-3"),
            );
        }
    }
    c
}

fn oracles() -> Criterion {
    let mut c = Criterion::new();
    for m in corpus() {
        let p = points(&m);
        c.report(m.name, &validate_jets(&m.field, &p, &FdConfig::default()));
        c.report(
            m.name,
            &check_connection_fd(&m.field, &p, CONNECTION_FD_STEP, 1e-5),
        );
    }
    for f in Family::ALL {
        let l = f.lagrangian().unwrap();
        let worst = family_points(f)
            .iter()
            .map(|u| {
                let closed = dhl_closed_form(&f.metric(), &f.potential(), u)
                    .unwrap()
                    .components;
                (closed - horizontal_differential(&l, u).unwrap().components).amax()
            })
            .fold(0.0, f64::max);
        c.check(
            format!("{f} closed-form d_hL"),
            worst <= 1e-8,
            format!("max {worst:e} <= 1e-8"),
        );
    }
    c
}

fn structural() -> Criterion {
    let mut c = Criterion::new();
    for m in corpus() {
        let mut s = Sampler::new(SEED);
        let p = s.points(&m.region, POINTS).unwrap();
        c.report(m.name, &check_structural_laws(&m.field, &p, 1e-10));
        let [sub, adapted] = check_lagrangian_subbundle(&m.field, &p, &mut s, VECTORS, 1e-9, 1e-10);
        c.report(m.name, &sub);
        c.report(m.name, &adapted);
    }
    c
}

fn determinism() -> Criterion {
    let mut c = Criterion::new();
    let dir = tempfile::tempdir().unwrap();
    let run = |file: &str| {
        let path = dir.path().join(file);
        let status = Command::new(env!("CARGO_BIN_EXE_lagrangian"))
            .args([
                "verify",
                "--lagrangian",
                "y1^2 + x1^2*y2^2 + y2",
                "--base-interval",
                "1:0.5,2",
            ])
            .args(["--samples", "50", "--seed", "7", "--no-timestamp", "--json"])
            .arg(&path)
            .output()
            .unwrap()
            .status;
        (status.code(), std::fs::read(&path).unwrap_or_default())
    };
    let (code_a, a) = run("a.json");
    let (code_b, b) = run("b.json");
    c.check(
        "exit codes",
        code_a == Some(0) && code_b == Some(0),
        format!("{code_a:?}, {code_b:?}"),
    );
    c.check(
        "byte-identical reports",
        !a.is_empty() && a == b,
        format!("{} and {} bytes", a.len(), b.len()),
    );
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Criterion); 9] = [
        (
            "1 horizontal differential equals half the fiber gradient of S(L)",
            horizontal_differential_identity,
        ),
        ("2 Cartan one-form identities", cartan_one_form),
        ("3 semispray defining equation", semispray_equation),
        ("4 homogeneous Lagrangians", homogeneous),
        ("5 perturbed Riemannian families", perturbed_families),
        ("6 conservation along flows", flows),
        ("7 cross-validation oracles", oracles),
        ("8 structural laws", structural),
        ("9 deterministic verify reports", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let c = run();
        println!("{} criterion {name}", if c.ok { "PASS" } else { "FAIL" });
        for l in &c.lines {
            println!("{l}");
        }
        failed += usize::from(!c.ok);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
