//! C ABI for the `lagrangian` crate.
//!
//! Fields are opaque handles created by `lg_field_from_expression` or
//! `lg_field_from_family` and released with `lg_field_free`. Every fallible
//! function returns an [`LgStatus`]; on failure a message is available from
//! `lg_last_error_message` on the same thread. Points are passed as two
//! arrays of `dim` doubles (`x`, then `y`); matrices are written row-major
//! into caller buffers whose length is checked.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lagrangian::counterexample::Family;
use lagrangian::flows::{self, IntegratorConfig};
use lagrangian::geometry::checks::{identity_suite, Tolerances};
use lagrangian::geometry::GeometryBundle;
use lagrangian::jet::FdConfig;
use lagrangian::{Error, LagrangianField, Sampler, SamplingBox, TangentPoint};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ParseError = 3,
    DomainError = 4,
    Degenerate = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque Lagrangian handle.
pub struct LgField {
    field: LagrangianField,
    region: SamplingBox,
}

/// Outcome of `lg_flow`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LgFlowSummary {
    pub samples: usize,
    pub t_final: f64,
    pub lagrangian_drift: f64,
    pub energy_relative_drift: f64,
    pub truncated: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: LgStatus, msg: impl Into<String>) -> LgStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> LgStatus {
    let status = match e {
        Error::Parse(_) => LgStatus::ParseError,
        Error::Domain { .. } => LgStatus::DomainError,
        Error::DegenerateLagrangian { .. } => LgStatus::Degenerate,
        _ => LgStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> LgStatus) -> LgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(LgStatus::Panic, "internal panic"))
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

unsafe fn out_field(
    field: LagrangianField,
    region: SamplingBox,
    out: *mut *mut LgField,
) -> LgStatus {
    *out = Box::into_raw(Box::new(LgField { field, region }));
    LgStatus::Ok
}

/// Parses `text` as a Lagrangian over `x1..xdim, y1..ydim`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_field_from_expression(
    text: *const c_char,
    dim: usize,
    out: *mut *mut LgField,
) -> LgStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(LgStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(LgStatus::InvalidInput, "expression is not UTF-8");
        };
        match LagrangianField::parse(text, dim) {
            Ok(f) => out_field(f, SamplingBox::default_for(dim), out),
            Err(e) => from_error(e),
        }
    })
}

/// Builds a named family (`flat-quadratic-phi`, `polar-linear-phi`,
/// `null-control`, `homogeneous-control`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_field_from_family(
    name: *const c_char,
    out: *mut *mut LgField,
) -> LgStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            return fail(LgStatus::NullPointer, "null argument");
        }
        let family = match CStr::from_ptr(name)
            .to_str()
            .map_err(|_| ())
            .and_then(|s| s.parse::<Family>().map_err(|_| ()))
        {
            Ok(f) => f,
            Err(()) => return fail(LgStatus::InvalidInput, "unknown family"),
        };
        match family.lagrangian() {
            Ok(f) => out_field(f, family.sampling_box(), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `field` must come from this library and not be freed twice. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn lg_field_free(field: *mut LgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Dimension of the base manifold, or 0 for NULL.
///
/// # Safety
/// `field` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lg_field_dim(field: *const LgField) -> usize {
    field.as_ref().map_or(0, |f| f.field.dim())
}

unsafe fn point(f: &LgField, x: *const f64, y: *const f64) -> Result<TangentPoint, LgStatus> {
    if x.is_null() || y.is_null() {
        return Err(fail(LgStatus::NullPointer, "null coordinates"));
    }
    let n = f.field.dim();
    let x = std::slice::from_raw_parts(x, n).to_vec();
    let y = std::slice::from_raw_parts(y, n).to_vec();
    TangentPoint::new(x, y).map_err(from_error)
}

unsafe fn with_bundle(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
    needed: impl Fn(usize) -> usize,
    write: impl Fn(&GeometryBundle) -> Vec<f64>,
) -> LgStatus {
    guard(|| {
        let Some(f) = field.as_ref() else {
            return fail(LgStatus::NullPointer, "null field");
        };
        if out.is_null() {
            return fail(LgStatus::NullPointer, "null output buffer");
        }
        let want = needed(f.field.dim());
        if len < want {
            return fail(
                LgStatus::BufferTooSmall,
                format!("buffer holds {len} values, {want} needed"),
            );
        }
        let u = match point(f, x, y) {
            Ok(u) => u,
            Err(s) => return s,
        };
        match GeometryBundle::compute(&f.field, &u) {
            Ok(b) => {
                let values = write(&b);
                std::slice::from_raw_parts_mut(out, values.len()).copy_from_slice(&values);
                LgStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

fn row_major(m: &lagrangian::nalgebra::DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// `g_ij`, n×n row-major.
///
/// # Safety
/// `x`, `y` hold `dim` doubles; `out` holds `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lg_metric(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
) -> LgStatus {
    with_bundle(field, x, y, out, len, |n| n * n, |b| row_major(&b.metric.g))
}

/// `G^i`, n values.
///
/// # Safety
/// As for `lg_metric`.
#[no_mangle]
pub unsafe extern "C" fn lg_semispray(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
) -> LgStatus {
    with_bundle(
        field,
        x,
        y,
        out,
        len,
        |n| n,
        |b| b.semispray.coeffs.as_slice().to_vec(),
    )
}

/// `N^i_j`, n×n row-major.
///
/// # Safety
/// As for `lg_metric`.
#[no_mangle]
pub unsafe extern "C" fn lg_connection(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
) -> LgStatus {
    with_bundle(
        field,
        x,
        y,
        out,
        len,
        |n| n * n,
        |b| row_major(&b.connection.n),
    )
}

/// `ω_L(e_a, e_b)` over the natural basis `(∂/∂x, ∂/∂y)`, 2n×2n row-major.
///
/// # Safety
/// As for `lg_metric`.
#[no_mangle]
pub unsafe extern "C" fn lg_two_form(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
) -> LgStatus {
    with_bundle(
        field,
        x,
        y,
        out,
        len,
        |n| 4 * n * n,
        |b| row_major(&b.cartan_two_form.omega),
    )
}

/// `L_{|i}`, n values.
///
/// # Safety
/// As for `lg_metric`.
#[no_mangle]
pub unsafe extern "C" fn lg_horizontal_differential(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
) -> LgStatus {
    with_bundle(
        field,
        x,
        y,
        out,
        len,
        |n| n,
        |b| b.horizontal_differential.components.as_slice().to_vec(),
    )
}

/// Writes `L`, `E_L` and `S(L)` (3 values).
///
/// # Safety
/// As for `lg_metric`.
#[no_mangle]
pub unsafe extern "C" fn lg_scalars(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    len: usize,
) -> LgStatus {
    with_bundle(
        field,
        x,
        y,
        out,
        len,
        |_| 3,
        |b| vec![b.jet.value, b.energy, b.semispray_derivative],
    )
}

/// Runs the identity suite at `samples` points drawn with `seed`;
/// `*passed` is true when every non-skipped check passes.
///
/// # Safety
/// `field` must be a live handle; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_verify(
    field: *const LgField,
    samples: usize,
    seed: u64,
    tol: f64,
    passed: *mut bool,
) -> LgStatus {
    guard(|| {
        let (Some(f), false) = (field.as_ref(), passed.is_null()) else {
            return fail(LgStatus::NullPointer, "null argument");
        };
        if samples == 0 || !(tol > 0.0) {
            return fail(LgStatus::InvalidInput, "samples and tol must be positive");
        }
        let mut sampler = Sampler::new(seed);
        let points = match sampler.points(&f.region, samples) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let tol = Tolerances {
            identity: tol,
            ..Tolerances::default()
        };
        let reports = identity_suite(&f.field, &points, &mut sampler, &tol, &FdConfig::default());
        *passed = reports.iter().filter(|r| !r.is_skipped()).all(|r| r.passed);
        LgStatus::Ok
    })
}

/// Integrates the semispray (`horizontal == false`) or horizontal flow from
/// `(x, y)` and writes the final state `(x, y)` into `state` (2n values).
///
/// # Safety
/// `x`, `y` hold `dim` doubles; `state` holds `len` doubles; `summary` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn lg_flow(
    field: *const LgField,
    x: *const f64,
    y: *const f64,
    step: f64,
    t_end: f64,
    horizontal: bool,
    state: *mut f64,
    len: usize,
    summary: *mut LgFlowSummary,
) -> LgStatus {
    guard(|| {
        let Some(f) = field.as_ref() else {
            return fail(LgStatus::NullPointer, "null field");
        };
        if state.is_null() || summary.is_null() {
            return fail(LgStatus::NullPointer, "null output");
        }
        let n = f.field.dim();
        if len < 2 * n {
            return fail(
                LgStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", 2 * n),
            );
        }
        let u = match point(f, x, y) {
            Ok(u) => u,
            Err(s) => return s,
        };
        let run = || -> lagrangian::Result<LgFlowSummary> {
            let cfg = IntegratorConfig::new(step, t_end)?;
            let tr = if horizontal {
                flows::integrate_horizontal(&f.field, &u, &cfg)?
            } else {
                flows::integrate_semispray(&f.field, &u, &cfg)?
            };
            let d = flows::drift_report(&tr)?;
            let last = tr.last();
            let out = std::slice::from_raw_parts_mut(state, 2 * n);
            out[..n].copy_from_slice(&last.x);
            out[n..].copy_from_slice(&last.y);
            Ok(LgFlowSummary {
                samples: d.samples,
                t_final: d.t_final,
                lagrangian_drift: d.lagrangian.final_abs,
                energy_relative_drift: d.energy.max_rel,
                truncated: d.truncated,
            })
        };
        match run() {
            Ok(s) => {
                *summary = s;
                LgStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
