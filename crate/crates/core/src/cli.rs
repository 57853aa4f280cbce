//! The `lagrangian` command-line front end.
//!
//! Exit codes: `0` pass, `1` identity or witness failure, `2` input error,
//! `3` degenerate geometry.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::json;

use crate::counterexample::{self, Family};
use crate::error::Error;
use crate::field::{parse_lagrangian, LagrangianField, LagrangianSpec};
use crate::flows::{self, IntegratorConfig};
use crate::geometry::checks::{identity_suite, Tolerances};
use crate::geometry::{metric_tensor, GeometryBundle};
use crate::jet::FdConfig;
use crate::point::TangentPoint;
use crate::report::{IdentityReport, PointFailure};
use crate::sampling::{Sampler, SamplingBox};

pub const SCHEMA_VERSION: u32 = 1;
pub const PRNG: &str = "xoshiro256** seeded by SplitMix64";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Threshold a witness `max|d_hL|` must exceed for the two obstruction
/// families; controls must stay below [`CONTROL_TOLERANCE`].
pub const WITNESS_THRESHOLD: f64 = 0.1;
pub const CONTROL_TOLERANCE: f64 = 1e-10;
pub const SHARED_STRUCTURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "lagrangian",
    version,
    about = "Canonical geometry of regular Lagrangians on TM"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every canonical object at one point.
    Inspect(CommonArgs),
    /// Run the identity suite at sampled points.
    Verify(CommonArgs),
    /// Integrate the semispray and horizontal flows from one point.
    Flow(CommonArgs),
    /// Run a built-in family end to end.
    Counterexample(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Inspect(_) => "inspect",
            Command::Verify(_) => "verify",
            Command::Flow(_) => "flow",
            Command::Counterexample(_) => "counterexample",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Inspect(a)
            | Command::Verify(a)
            | Command::Flow(a)
            | Command::Counterexample(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Manifold dimension n.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Lagrangian expression over x1..xn, y1..yn.
    #[arg(long, conflicts_with_all = ["lagrangian_file", "family"])]
    pub lagrangian: Option<String>,
    /// File holding the Lagrangian expression (`#` starts a comment line).
    #[arg(long, conflicts_with = "family")]
    pub lagrangian_file: Option<PathBuf>,
    /// Built-in family: flat-quadratic-phi, polar-linear-phi, null-control,
    /// homogeneous-control.
    #[arg(long)]
    pub family: Option<String>,
    /// Evaluation point as "x1,..,xn;y1,..,yn".
    #[arg(long)]
    pub point: Option<String>,
    /// Number of sampled points.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Tolerance of the identity checks.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Integrator step.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Sampling interval "lo,hi" for every base coordinate.
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<String>,
    /// Sampling interval "lo,hi" for every fiber coordinate.
    #[arg(long, allow_hyphen_values = true)]
    pub y_range: Option<String>,
    /// Interval for one base coordinate, "k:lo,hi" (one-based k); repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub base_interval: Vec<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Trajectory CSV stem: writes <stem>.semispray.csv and
    /// <stem>.horizontal.csv.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Omit the `timestamp` field from the JSON report.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Degenerate(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateLagrangian { .. } => CliError::Degenerate(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceEcho {
    Expression(String),
    Family(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub dim: usize,
    pub source: SourceEcho,
    pub lagrangian: String,
    pub point: Option<TangentPoint>,
    pub samples: usize,
    pub seed: u64,
    pub prng: &'static str,
    pub sampling_box: SamplingBox,
    pub tolerance: f64,
    pub step: f64,
    pub t_end: f64,
}

/// One line of the report. `passed` is `value <= threshold` for
/// `comparison == "le"` and `value > threshold` for `"gt"`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: &'static str,
    pub passed: bool,
    pub skipped: Option<String>,
    pub points: usize,
    pub failures: Vec<PointFailure>,
}

impl CheckEntry {
    pub fn from_report(r: &IdentityReport) -> Self {
        CheckEntry {
            name: r.name.clone(),
            value: r.max_residual,
            threshold: r.tolerance,
            comparison: "le",
            passed: r.passed,
            skipped: r.skipped.clone(),
            points: r.residuals.len() + r.failures.len(),
            failures: r.failures.clone(),
        }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64, points: usize) -> Self {
        CheckEntry {
            name: name.into(),
            value,
            threshold,
            comparison: "le",
            passed: value <= threshold,
            skipped: None,
            points,
            failures: Vec::new(),
        }
    }

    pub fn above(name: &str, value: f64, threshold: f64, points: usize) -> Self {
        CheckEntry {
            comparison: "gt",
            passed: value > threshold,
            ..CheckEntry::at_most(name, value, threshold, points)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<CheckEntry>,
    /// All non-skipped checks passed.
    pub overall: bool,
    pub details: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

fn overall(checks: &[CheckEntry]) -> bool {
    checks
        .iter()
        .filter(|c| c.skipped.is_none())
        .all(|c| c.passed)
}

fn parse_pair(text: &str, what: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(CliError::Input(format!(
                "{what}: expected \"lo,hi\", got \"{text}\""
            ))),
        },
        _ => Err(CliError::Input(format!(
            "{what}: expected \"lo,hi\", got \"{text}\""
        ))),
    }
}

/// Parses "x1,..,xn;y1,..,yn".
pub fn parse_point(text: &str, dim: usize) -> CliResult<TangentPoint> {
    let halves: Vec<&str> = text.split(';').collect();
    let bad = || {
        CliError::Input(format!(
            "--point: expected \"x1,..,x{dim};y1,..,y{dim}\", got \"{text}\""
        ))
    };
    if halves.len() != 2 {
        return Err(bad());
    }
    let parse = |s: &str| -> CliResult<Vec<f64>> {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    };
    let (x, y) = (parse(halves[0])?, parse(halves[1])?);
    if x.len() != dim || y.len() != dim {
        return Err(bad());
    }
    Ok(TangentPoint::new(x, y)?)
}

struct Setup {
    field: LagrangianField,
    family: Option<Family>,
    echo: ConfigEcho,
}

fn setup(args: &CommonArgs) -> CliResult<Setup> {
    if !(args.tol > 0.0) {
        return Err(CliError::Input("--tol must be positive".into()));
    }
    let (spec, source, family) = match (&args.lagrangian, &args.lagrangian_file, &args.family) {
        (Some(text), None, None) => (
            parse_lagrangian(text, args.dim)?,
            SourceEcho::Expression(text.clone()),
            None,
        ),
        (None, Some(path), None) => {
            let raw = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let text = raw
                .lines()
                .filter(|l| !l.trim_start().starts_with('#'))
                .collect::<Vec<_>>()
                .join(" ");
            let text = text.trim().to_string();
            (
                parse_lagrangian(&text, args.dim)?,
                SourceEcho::Expression(text),
                None,
            )
        }
        (None, None, Some(name)) => {
            let f: Family = name.parse()?;
            if args.dim != f.dim() {
                return Err(CliError::Input(format!(
                    "family {f} has dimension {}, --dim is {}",
                    f.dim(),
                    args.dim
                )));
            }
            (
                LagrangianSpec::family(f),
                SourceEcho::Family(f.name().into()),
                Some(f),
            )
        }
        (None, None, None) => {
            return Err(CliError::Input(
                "one of --lagrangian, --lagrangian-file or --family is required".into(),
            ))
        }
        _ => {
            return Err(CliError::Input(
                "give only one of --lagrangian, --lagrangian-file, --family".into(),
            ))
        }
    };
    let field = spec.build()?;
    let n = spec.dim;
    let mut region = family.map_or_else(|| SamplingBox::default_for(n), |f| f.sampling_box());
    if let Some(r) = &args.x_range {
        region.x = vec![parse_pair(r, "--x-range")?; n];
    }
    if let Some(r) = &args.y_range {
        region.y = vec![parse_pair(r, "--y-range")?; n];
    }
    for spec_text in &args.base_interval {
        let (k, range) = spec_text.split_once(':').ok_or_else(|| {
            CliError::Input(format!(
                "--base-interval: expected \"k:lo,hi\", got \"{spec_text}\""
            ))
        })?;
        let k: usize = k
            .trim()
            .parse()
            .ok()
            .filter(|&k| (1..=n).contains(&k))
            .ok_or_else(|| CliError::Input(format!("--base-interval: index must be in 1..={n}")))?;
        let (lo, hi) = parse_pair(range, "--base-interval")?;
        region = region.with_base_interval(k - 1, lo, hi);
    }
    region.validate()?;
    let point = args
        .point
        .as_deref()
        .map(|p| parse_point(p, n))
        .transpose()?;
    let echo = ConfigEcho {
        dim: n,
        source,
        lagrangian: field.expr().to_string(),
        point,
        samples: args.samples,
        seed: args.seed,
        prng: PRNG,
        sampling_box: region,
        tolerance: args.tol,
        step: args.step,
        t_end: args.t_end,
    };
    Ok(Setup {
        field,
        family,
        echo,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_dvec(v: &DVector<f64>) -> String {
    fmt_vec(v.as_slice())
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| fmt_vec(&r.iter().copied().collect::<Vec<_>>()))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn print_checks(out: &mut String, checks: &[CheckEntry]) {
    for c in checks {
        let status = match (&c.skipped, c.passed) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        let op = if c.comparison == "gt" { ">" } else { "<=" };
        let _ = write!(
            out,
            "{status} {:<36} value={:e} {op} {:e}",
            c.name, c.value, c.threshold
        );
        if let Some(reason) = &c.skipped {
            let _ = write!(out, " ({reason})");
        }
        if !c.failures.is_empty() {
            let _ = write!(
                out,
                " [{} point(s) failed: {}]",
                c.failures.len(),
                c.failures[0].error
            );
        }
        out.push('\n');
    }
}

fn require_point(echo: &ConfigEcho) -> CliResult<TangentPoint> {
    echo.point
        .clone()
        .ok_or_else(|| CliError::Input("--point is required for this command".into()))
}

struct Outcome {
    checks: Vec<CheckEntry>,
    details: serde_json::Value,
    text: String,
    exit: Option<i32>,
}

fn cmd_inspect(s: &Setup) -> CliResult<Outcome> {
    let u = require_point(&s.echo)?;
    let b = GeometryBundle::compute(&s.field, &u)?;
    let mut t = String::new();
    let _ = writeln!(t, "L       = {}", s.field.expr());
    let _ = writeln!(t, "point   = x {} y {}", fmt_vec(u.x()), fmt_vec(u.y()));
    let _ = writeln!(t, "L(u)    = {}", b.jet.value);
    let _ = writeln!(t, "g       = {}", fmt_matrix(&b.metric.g));
    let _ = writeln!(t, "g^-1    = {}", fmt_matrix(&b.metric.g_inv));
    let _ = writeln!(t, "det g   = {}", b.metric.det);
    let _ = writeln!(t, "G       = {}", fmt_dvec(&b.semispray.coeffs));
    let _ = writeln!(t, "N       = {}", fmt_matrix(&b.connection.n));
    let _ = writeln!(t, "theta_L = {}", fmt_dvec(&b.cartan_one_form.components));
    let _ = writeln!(t, "Omega   = {}", fmt_matrix(&b.cartan_two_form.omega));
    let _ = writeln!(t, "E_L     = {}", b.energy);
    let _ = writeln!(t, "S(L)    = {}", b.semispray_derivative);
    let _ = writeln!(
        t,
        "d_hL    = {}",
        fmt_dvec(&b.horizontal_differential.components)
    );
    let _ = writeln!(t, "h       = {}", fmt_matrix(&b.projector.h));
    Ok(Outcome {
        checks: Vec::new(),
        details: serde_json::to_value(&b).expect("bundle serializes"),
        text: t,
        exit: None,
    })
}

fn cmd_verify(s: &Setup) -> CliResult<Outcome> {
    let mut sampler = Sampler::new(s.echo.seed);
    let points = sampler.points(&s.echo.sampling_box, s.echo.samples)?;
    if points.is_empty() {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let degenerate: Vec<String> = points
        .iter()
        .enumerate()
        .filter_map(|(i, u)| match metric_tensor(&s.field, u) {
            Err(e @ Error::DegenerateLagrangian { .. }) => Some(format!("point {i}: {e}")),
            _ => None,
        })
        .collect();
    let tol = Tolerances {
        identity: s.echo.tolerance,
        ..Tolerances::default()
    };
    let reports = identity_suite(&s.field, &points, &mut sampler, &tol, &FdConfig::default());
    let checks: Vec<CheckEntry> = reports.iter().map(CheckEntry::from_report).collect();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "L = {}  ({} points, seed {})",
        s.field.expr(),
        points.len(),
        s.echo.seed
    );
    print_checks(&mut text, &checks);
    if let Some(first) = degenerate.first() {
        let _ = writeln!(
            text,
            "degenerate metric at {} sampled point(s); first: {first}",
            degenerate.len()
        );
    }
    Ok(Outcome {
        checks,
        details: json!({ "points": points, "degenerate_points": degenerate }),
        text,
        exit: (!degenerate.is_empty()).then_some(EXIT_DEGENERATE),
    })
}

fn csv_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let base = if stem.extension().is_some_and(|e| e == "csv") {
        stem.with_extension("")
    } else {
        stem.to_path_buf()
    };
    let with = |suffix: &str| {
        let mut s = base.as_os_str().to_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".semispray.csv"), with(".horizontal.csv"))
}

fn cmd_flow(s: &Setup, csv: Option<&Path>) -> CliResult<Outcome> {
    let u0 = require_point(&s.echo)?;
    let cfg = IntegratorConfig::new(s.echo.step, s.echo.t_end)?;
    let spray = flows::integrate_semispray(&s.field, &u0, &cfg)?;
    let horizontal = flows::integrate_horizontal(&s.field, &u0, &cfg)?;
    let ds = flows::drift_report(&spray)?;
    let dh = flows::drift_report(&horizontal)?;
    let gap = flows::max_pointwise_gap(&spray, &horizontal);
    let coincide = gap <= s.echo.tolerance;
    if let Some(stem) = csv {
        let (a, b) = csv_paths(stem);
        spray.write_csv(fs::File::create(&a)?)?;
        horizontal.write_csv(fs::File::create(&b)?)?;
    }
    let checks = vec![CheckEntry::at_most(
        "semispray_energy_conservation",
        ds.energy.max_rel,
        s.echo.tolerance,
        ds.samples,
    )];
    let mut text = String::new();
    let _ = writeln!(
        text,
        "L = {}  from x {} y {}",
        s.field.expr(),
        fmt_vec(u0.x()),
        fmt_vec(u0.y())
    );
    for (name, tr, d) in [("semispray", &spray, &ds), ("horizontal", &horizontal, &dh)] {
        let last = tr.last();
        let _ = writeln!(
            text,
            "{name:<10} t={} x={} y={} | L drift {:e} (rel {:e}) | E drift {:e} (rel {:e}) | dL/dt residual {}",
            last.t,
            fmt_vec(&last.x),
            fmt_vec(&last.y),
            d.lagrangian.final_abs,
            d.lagrangian.final_rel,
            d.energy.max_abs,
            d.energy.max_rel,
            d.rate_residual.map_or("n/a".into(), |r| format!("{r:e}")),
        );
        if let Some(tr) = &tr.truncation {
            let _ = writeln!(text, "{name:<10} TRUNCATED: {tr:?}");
        }
    }
    let _ = writeln!(text, "max pointwise gap {gap:e}; coincide = {coincide}");
    print_checks(&mut text, &checks);
    Ok(Outcome {
        checks,
        details: json!({
            "semispray": { "drift": ds, "truncation": spray.truncation, "final": spray.last() },
            "horizontal": { "drift": dh, "truncation": horizontal.truncation, "final": horizontal.last() },
            "max_pointwise_gap": gap,
            "coincide": coincide,
        }),
        text,
        exit: None,
    })
}

/// Canonical evaluation point used to print a family's witness.
pub fn canonical_witness_point(family: Family) -> TangentPoint {
    let (x, y) = match family {
        Family::FlatQuadraticPhi | Family::NullControl => ([1.0, 2.0], [3.0, 4.0]),
        Family::PolarLinearPhi | Family::HomogeneousControl => ([1.0, 0.0], [1.0, 1.0]),
    };
    TangentPoint::new(x.to_vec(), y.to_vec()).expect("valid point")
}

fn cmd_counterexample(s: &Setup) -> CliResult<Outcome> {
    let family = s
        .family
        .ok_or_else(|| CliError::Input("counterexample requires --family".into()))?;
    let mut sampler = Sampler::new(s.echo.seed);
    let points = sampler.points(&s.echo.sampling_box, s.echo.samples)?;
    if points.is_empty() {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let (a, phi) = (family.metric(), family.potential());
    a.check_positive_definite(&points.iter().map(|u| u.x().to_vec()).collect::<Vec<_>>())?;
    let base = family.base_lagrangian()?;
    let mut checks: Vec<CheckEntry> =
        counterexample::compare_structures(&base, &s.field, &points, SHARED_STRUCTURE_TOLERANCE)
            .iter()
            .map(CheckEntry::from_report)
            .collect();
    let mut closed = IdentityReport::new("closed_form_horizontal_differential", s.echo.tolerance);
    let mut max_dhl: f64 = 0.0;
    let mut max_obstruction: f64 = 0.0;
    let mut witness: Option<(usize, Vec<f64>)> = None;
    for (i, u) in points.iter().enumerate() {
        let r = (|| {
            let general = crate::geometry::horizontal_differential(&s.field, u)?;
            let cf = counterexample::dhl_closed_form(&a, &phi, u)?;
            let t = counterexample::obstruction_tensor(&a, &phi, u.x())?;
            Ok::<_, Error>((general, cf, t))
        })();
        match r {
            Ok((general, cf, t)) => {
                closed.record(i, (&general.components - &cf.components).amax());
                max_obstruction = max_obstruction.max(t.max_abs);
                let m = general.components.amax();
                if m > max_dhl || witness.is_none() {
                    max_dhl = max_dhl.max(m);
                    witness = Some((i, general.components.as_slice().to_vec()));
                }
            }
            Err(e) => closed.fail(i, &e),
        }
    }
    checks.push(CheckEntry::from_report(&closed.finish()));
    checks.push(if family.expects_witness() {
        CheckEntry::above(
            "horizontal_differential_witness",
            max_dhl,
            WITNESS_THRESHOLD,
            points.len(),
        )
    } else {
        CheckEntry::at_most(
            "horizontal_differential_vanishes",
            max_dhl,
            CONTROL_TOLERANCE,
            points.len(),
        )
    });
    let probe = counterexample::equivalence_probe(&s.field, &points, s.echo.tolerance);
    let cu = canonical_witness_point(family);
    let cb = GeometryBundle::compute(&s.field, &cu)?;
    let ct = counterexample::obstruction_tensor(&a, &phi, cu.x())?;

    let mut text = String::new();
    let _ = writeln!(text, "family {family}: L = {}", s.field.expr());
    let _ = writeln!(text, "L' = {}", base.expr());
    let _ = writeln!(
        text,
        "at x {} y {}: d_hL = {}, S(L) = {}, T = {}",
        fmt_vec(cu.x()),
        fmt_vec(cu.y()),
        fmt_dvec(&cb.horizontal_differential.components),
        cb.semispray_derivative,
        fmt_matrix(&ct.t)
    );
    let _ = writeln!(
        text,
        "max |T_ij| over samples {max_obstruction:e}; max |d_hL| {max_dhl:e}"
    );
    if let Some((i, w)) = &witness {
        let _ = writeln!(text, "largest d_hL at sample {i}: {}", fmt_vec(w));
    }
    let _ = writeln!(
        text,
        "probe (tol {:e}): S(L)!=0,d_hL!=0: {}  S(L)!=0,d_hL=0: {}  S(L)=0,d_hL!=0: {}  S(L)=0,d_hL=0: {}",
        probe.tolerance, probe.table[0][0], probe.table[0][1], probe.table[1][0], probe.table[1][1]
    );
    print_checks(&mut text, &checks);
    Ok(Outcome {
        checks,
        details: json!({
            "family": family,
            "unperturbed": base.expr().to_string(),
            "canonical_point": cu,
            "canonical_horizontal_differential": cb.horizontal_differential.components.as_slice(),
            "canonical_semispray_derivative": cb.semispray_derivative,
            "canonical_obstruction": ct,
            "max_obstruction": max_obstruction,
            "max_horizontal_differential": max_dhl,
            "witness": witness.map(|(i, w)| json!({ "point": points[i], "horizontal_differential": w })),
            "probe": probe,
        }),
        text,
        exit: None,
    })
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs a parsed command, writing human output to `out`; returns the exit
/// code and, when the command got far enough, the report.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> (i32, Option<Report>) {
    let args = cli.command.args();
    let s = match setup(args) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            return (e.exit_code(), None);
        }
    };
    let outcome = match &cli.command {
        Command::Inspect(_) => cmd_inspect(&s),
        Command::Verify(_) => cmd_verify(&s),
        Command::Flow(a) => cmd_flow(&s, a.csv.as_deref()),
        Command::Counterexample(_) => cmd_counterexample(&s),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            return (e.exit_code(), None);
        }
    };
    let passed = overall(&outcome.checks);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name().into(),
        config: s.echo,
        checks: outcome.checks,
        overall: passed,
        details: outcome.details,
        timestamp: (!args.no_timestamp).then(timestamp),
    };
    let _ = out.write_all(outcome.text.as_bytes());
    let _ = writeln!(out, "overall: {}", if passed { "PASS" } else { "FAIL" });
    if let Some(path) = &args.json {
        let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        if let Err(e) = fs::write(path, body) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return (EXIT_INPUT, Some(report));
        }
    }
    let code = outcome
        .exit
        .unwrap_or(if passed { EXIT_PASS } else { EXIT_FAILURE });
    (code, Some(report))
}

/// Entry point shared by the binary: parses `args` and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err).0,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            code
        }
    }
}
