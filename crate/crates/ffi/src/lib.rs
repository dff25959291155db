//! C ABI over `loewner-core`.
//!
//! Every entry point returns a [`LoewnerStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and read back
//! with [`loewner_last_error_message`]. Series and fields are opaque handles
//! released with their `_free` function; strings returned by the library are
//! released with [`loewner_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use loewner_core::analysis::{check_starlike, phi_map, reproduce_with_coefficient};
use loewner_core::loewner::{
    integrate_transition, recover_chain_map_with_tol, shear_coefficient_flow, HerglotzField, QProfile, QSegment,
};
use loewner_core::mminus::{check_mminus, sharp_shear_bound, shear_field, SamplingConfig, Verdict};
use loewner_core::shear::shear_of;
use loewner_core::{Component, Error, MultiIndex, Point2, PowerSeriesMap2};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoewnerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    /// Input outside the domain of the operation: non-normalized field,
    /// point outside the ball, singular linear part.
    Domain = 4,
    /// ODE step underflow, quadrature failure or inconsistent flow routes.
    Numerical = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

impl From<&Error> for LoewnerStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidDegree(..)
            | Error::IndexAboveTruncation(..)
            | Error::NonFinite(..)
            | Error::InvalidArgument(_) => Self::InvalidArgument,
            Error::Parse(_) => Self::Parse,
            Error::NonzeroConstantTerm
            | Error::NotDiagonalInvertible
            | Error::SingularShear
            | Error::NotNormalized
            | Error::OutsideBall(_)
            | Error::SingularJacobian(_) => Self::Domain,
            Error::StepUnderflow { .. } | Error::QuadratureDiverged(..) | Error::Inconsistent(_) => Self::Numerical,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerComplex {
    pub re: f64,
    pub im: f64,
}

impl From<LoewnerComplex> for Complex64 {
    fn from(c: LoewnerComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for LoewnerComplex {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerPoint {
    pub z1: LoewnerComplex,
    pub z2: LoewnerComplex,
}

impl From<LoewnerPoint> for Point2 {
    fn from(p: LoewnerPoint) -> Self {
        Point2::new(p.z1.into(), p.z2.into())
    }
}

impl From<Point2> for LoewnerPoint {
    fn from(p: Point2) -> Self {
        Self {
            z1: p.z1.into(),
            z2: p.z2.into(),
        }
    }
}

/// `(λ z₁ + A z₂², μ z₂)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerShear {
    pub lambda: LoewnerComplex,
    pub mu: LoewnerComplex,
    pub a: LoewnerComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerSamplingConfig {
    pub grid_radii: u32,
    pub grid_angles: u32,
    pub random_samples: u64,
    pub rng_seed: u64,
    pub defect_tolerance: f64,
}

impl From<&LoewnerSamplingConfig> for SamplingConfig {
    fn from(c: &LoewnerSamplingConfig) -> Self {
        SamplingConfig {
            grid_radii: c.grid_radii as usize,
            grid_angles: c.grid_angles as usize,
            random_samples: c.random_samples as usize,
            rng_seed: c.rng_seed,
            defect_tolerance: c.defect_tolerance,
        }
    }
}

/// `extremum` is the largest defect for membership checks and the smallest
/// margin for starlikeness checks.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerReport {
    pub accepted: bool,
    pub extremum: f64,
    pub witness: LoewnerPoint,
    pub samples_used: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerBound {
    pub value: f64,
    pub direction_x: f64,
    pub direction_y: f64,
}

/// `q(t) = value` from `t_start` until the next segment starts.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerQSegment {
    pub t_start: f64,
    pub value: LoewnerComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoewnerFlow {
    pub a_st: LoewnerComplex,
    pub a_ode: LoewnerComplex,
    pub envelope: f64,
}

/// Truncated power series map on `C²`.
pub struct LoewnerSeries(PowerSeriesMap2);

/// Time-independent Herglotz field.
pub struct LoewnerField(HerglotzField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(LoewnerStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(LoewnerStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LoewnerStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LoewnerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LoewnerStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {message}"));
            LoewnerStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(LoewnerStatus::InvalidUtf8, e.to_string()))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(LoewnerStatus::InvalidArgument, e.to_string()))
}

fn boxed_series(f: PowerSeriesMap2) -> *mut LoewnerSeries {
    Box::into_raw(Box::new(LoewnerSeries(f)))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn loewner_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn loewner_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn loewner_sampling_config_default() -> LoewnerSamplingConfig {
    let d = SamplingConfig::default();
    LoewnerSamplingConfig {
        grid_radii: d.grid_radii as u32,
        grid_angles: d.grid_angles as u32,
        random_samples: d.random_samples as u64,
        rng_seed: d.rng_seed,
        defect_tolerance: d.defect_tolerance,
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_from_json(json: *const c_char, out: *mut *mut LoewnerSeries) -> LoewnerStatus {
    guard(|| {
        let f = PowerSeriesMap2::from_json(read_str(json)?)?;
        write_out(out, boxed_series(f))
    })
}

/// # Safety
/// `series` must be a live handle; `out` must be writable. The string is
/// released with `loewner_string_free`.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_to_json(series: *const LoewnerSeries, out: *mut *mut c_char) -> LoewnerStatus {
    guard(|| {
        let f = borrow(series, "series")?;
        write_out(out, into_c_string(f.0.to_json())?)
    })
}

/// # Safety
/// `series` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_free(series: *mut LoewnerSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// The shear `(z₁ + a z₂², z₂)` truncated at `trunc_degree ≥ 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_phi(
    a: LoewnerComplex,
    trunc_degree: u32,
    out: *mut *mut LoewnerSeries,
) -> LoewnerStatus {
    guard(|| write_out(out, boxed_series(phi_map(a.into(), trunc_degree)?)))
}

/// The field `(−z₁ + a z₂², −z₂)` truncated at `trunc_degree ≥ 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_shear_field(
    a: LoewnerComplex,
    trunc_degree: u32,
    out: *mut *mut LoewnerSeries,
) -> LoewnerStatus {
    guard(|| write_out(out, boxed_series(shear_field(a.into(), trunc_degree)?)))
}

/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_eval(
    series: *const LoewnerSeries,
    z: LoewnerPoint,
    out: *mut LoewnerPoint,
) -> LoewnerStatus {
    guard(|| {
        let f = borrow(series, "series")?;
        write_out(out, f.0.eval(z.into()).into())
    })
}

/// Coefficient of `z₁^a1 z₂^a2` in component 1 or 2.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_coefficient(
    series: *const LoewnerSeries,
    component: u32,
    a1: u32,
    a2: u32,
    out: *mut LoewnerComplex,
) -> LoewnerStatus {
    guard(|| {
        let f = borrow(series, "series")?;
        let comp = Component::from_number(component).ok_or_else(|| {
            Failure(
                LoewnerStatus::InvalidArgument,
                format!("component {component} is not 1 or 2"),
            )
        })?;
        write_out(out, f.0.coefficient(comp, MultiIndex::new(a1, a2)).into())
    })
}

/// `outer ∘ inner`, truncated at the smaller degree.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_series_compose(
    outer: *const LoewnerSeries,
    inner: *const LoewnerSeries,
    out: *mut *mut LoewnerSeries,
) -> LoewnerStatus {
    guard(|| {
        let f = borrow(outer, "outer series")?;
        let g = borrow(inner, "inner series")?;
        write_out(out, boxed_series(f.0.compose(&g.0)?))
    })
}

/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_shear_of(series: *const LoewnerSeries, out: *mut LoewnerShear) -> LoewnerStatus {
    guard(|| {
        let s = shear_of(&borrow(series, "series")?.0)?;
        write_out(
            out,
            LoewnerShear {
                lambda: s.lambda.into(),
                mu: s.mu.into(),
                a: s.a.into(),
            },
        )
    })
}

/// Samples `Re⟨H(z), z⟩ ≤ 0`. A null `config` uses the defaults.
///
/// # Safety
/// `field` must be a live handle, `config` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_check_mminus(
    field: *const LoewnerSeries,
    config: *const LoewnerSamplingConfig,
    out: *mut LoewnerReport,
) -> LoewnerStatus {
    guard(|| {
        let h = borrow(field, "field")?;
        let cfg = config.as_ref().map(SamplingConfig::from).unwrap_or_default();
        let r = check_mminus(&h.0, &cfg)?;
        write_out(
            out,
            LoewnerReport {
                accepted: r.verdict == Verdict::Accept,
                extremum: r.max_defect,
                witness: r.witness.into(),
                samples_used: r.samples_used as u64,
            },
        )
    })
}

/// Samples the starlikeness margin of a map. A null `config` uses the
/// defaults.
///
/// # Safety
/// `map` must be a live handle, `config` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_check_starlike(
    map: *const LoewnerSeries,
    config: *const LoewnerSamplingConfig,
    out: *mut LoewnerReport,
) -> LoewnerStatus {
    guard(|| {
        let f = borrow(map, "map")?;
        let cfg = config.as_ref().map(SamplingConfig::from).unwrap_or_default();
        let r = check_starlike(&f.0, &cfg)?;
        write_out(
            out,
            LoewnerReport {
                accepted: r.verdict == Verdict::Accept,
                extremum: r.min_margin,
                witness: r.witness.into(),
                samples_used: r.samples_used as u64,
            },
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_sharp_bound(out: *mut LoewnerBound) -> LoewnerStatus {
    guard(|| {
        let b = sharp_shear_bound();
        write_out(
            out,
            LoewnerBound {
                value: b.value,
                direction_x: b.direction.0,
                direction_y: b.direction.1,
            },
        )
    })
}

/// Wraps a normalized field `H` (`H(0) = 0`, `dH₀ = −id`) as a constant
/// Herglotz field. The series handle stays owned by the caller.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_field_constant(
    series: *const LoewnerSeries,
    out: *mut *mut LoewnerField,
) -> LoewnerStatus {
    guard(|| {
        let h = borrow(series, "series")?;
        let g = HerglotzField::constant(h.0.clone())?;
        write_out(out, Box::into_raw(Box::new(LoewnerField(g))))
    })
}

/// # Safety
/// `field` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn loewner_field_free(field: *mut LoewnerField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Transition map `φ_{s,t}(z)` for `0 ≤ s ≤ t`.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_integrate_transition(
    field: *const LoewnerField,
    s: f64,
    t: f64,
    z: LoewnerPoint,
    tol: f64,
    out: *mut LoewnerPoint,
) -> LoewnerStatus {
    guard(|| {
        let g = borrow(field, "field")?;
        write_out(out, integrate_transition(&g.0, s, t, z.into(), tol)?.into())
    })
}

/// Chain map `f_s ≈ e^T φ_{s,T}` fitted up to `stencil_degree`.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_recover_chain_map(
    field: *const LoewnerField,
    s: f64,
    horizon: f64,
    stencil_degree: u32,
    tol: f64,
    out: *mut *mut LoewnerSeries,
) -> LoewnerStatus {
    guard(|| {
        let g = borrow(field, "field")?;
        write_out(
            out,
            boxed_series(recover_chain_map_with_tol(&g.0, s, horizon, stencil_degree, tol)?),
        )
    })
}

/// Shear coefficient `a(s,t)` for a piecewise-constant `q`.
///
/// # Safety
/// `segments` must point to `len` readable segments; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_shear_coefficient_flow(
    segments: *const LoewnerQSegment,
    len: usize,
    s: f64,
    t: f64,
    out: *mut LoewnerFlow,
) -> LoewnerStatus {
    guard(|| {
        if segments.is_null() {
            return Err(null("segments"));
        }
        let segs = std::slice::from_raw_parts(segments, len)
            .iter()
            .map(|g| QSegment {
                t_start: g.t_start,
                value: g.value.into(),
            })
            .collect();
        let flow = shear_coefficient_flow(&QProfile::new(segs)?, s, t)?;
        write_out(
            out,
            LoewnerFlow {
                a_st: flow.a_st.into(),
                a_ode: flow.a_ode.into(),
                envelope: flow.envelope,
            },
        )
    })
}

/// Runs the end-to-end checks for the shear coefficient `a` and writes the
/// report as JSON. `all_passed` is set from the report.
///
/// # Safety
/// `config` null or valid; `all_passed` null or writable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn loewner_reproduce(
    a: LoewnerComplex,
    config: *const LoewnerSamplingConfig,
    all_passed: *mut bool,
    out: *mut *mut c_char,
) -> LoewnerStatus {
    guard(|| {
        let cfg = config.as_ref().map(SamplingConfig::from).unwrap_or_default();
        let report = reproduce_with_coefficient(a.into(), &cfg)?;
        let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        if !all_passed.is_null() {
            all_passed.write(report.all_passed);
        }
        write_out(out, into_c_string(json)?)
    })
}
