// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! C interface. Objects are opaque heap handles released with the matching
//! `*_free`; every call returns a [`TlStatus`] and leaves a message for
//! [`tl_last_error`] on failure. Panics never cross the boundary.

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use twolevel::kernel::{kernel_at, KernelSpec};
use twolevel::oracle::{integrate_schrodinger, Frame};
use twolevel::propagator::{effective_hamiltonian, quasienergies, transition_probability, unitary_analytic};
use twolevel::{gbf, presets, rwa, DriveSpec, Error, Mat2};

/// Result codes. Values 1..=15 mirror the library error kinds.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    InvalidSpec = 1,
    SpecParse = 2,
    InvalidArgument = 3,
    QuadratureNotConverged = 4,
    BesselNotConverged = 5,
    Acausal = 6,
    NotIntegerResonant = 7,
    GridMismatch = 8,
    SeriesNotConverged = 9,
    BudgetExceeded = 10,
    Discretization = 11,
    Unitarity = 12,
    StepBudget = 13,
    OutOfBand = 14,
    Io = 15,
    NullPointer = 100,
    InvalidUtf8 = 101,
    Panic = 102,
}

impl From<&Error> for TlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidSpec(_) => TlStatus::InvalidSpec,
            Error::SpecParse { .. } => TlStatus::SpecParse,
            Error::InvalidArgument(_) => TlStatus::InvalidArgument,
            Error::QuadratureNotConverged { .. } => TlStatus::QuadratureNotConverged,
            Error::BesselNotConverged { .. } => TlStatus::BesselNotConverged,
            Error::Acausal { .. } => TlStatus::Acausal,
            Error::NotIntegerResonant { .. } => TlStatus::NotIntegerResonant,
            Error::GridMismatch(_) => TlStatus::GridMismatch,
            Error::SeriesNotConverged { .. } => TlStatus::SeriesNotConverged,
            Error::BudgetExceeded { .. } => TlStatus::BudgetExceeded,
            Error::Discretization { .. } => TlStatus::Discretization,
            Error::Unitarity { .. } => TlStatus::Unitarity,
            Error::StepBudget { .. } => TlStatus::StepBudget,
            Error::OutOfBand { .. } => TlStatus::OutOfBand,
            Error::Io(_) => TlStatus::Io,
        }
    }
}

/// Lab frame for [`tl_unitary_oracle`].
pub const TL_FRAME_LAB: i32 = 0;
/// Rotated frame for [`tl_unitary_oracle`].
pub const TL_FRAME_ROTATED: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TlComplex {
    pub re: f64,
    pub im: f64,
}

/// Row-major 2×2 complex matrix.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TlMat2 {
    pub u11: TlComplex,
    pub u12: TlComplex,
    pub u21: TlComplex,
    pub u22: TlComplex,
}

impl From<Complex64> for TlComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<Mat2> for TlMat2 {
    fn from(m: Mat2) -> Self {
        Self {
            u11: m.u11.into(),
            u12: m.u12.into(),
            u21: m.u21.into(),
            u22: m.u22.into(),
        }
    }
}

/// Opaque drive specification.
pub struct TlDrive {
    spec: DriveSpec,
}

/// Opaque kernel: a drive with its consolidated coefficient table.
pub struct TlKernel {
    spec: DriveSpec,
    ks: KernelSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TlStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            TlStatus::from(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            TlStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8");
            TlStatus::InvalidUtf8
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            TlStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

/// Message of the last failed call on this thread, or "" after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON drive spec.
///
/// # Safety
/// `json` must be NUL-terminated; `out_drive` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_drive_from_json(json: *const c_char, out_drive: *mut *mut TlDrive) -> TlStatus {
    guard(|| {
        let slot = out(out_drive, "out_drive")?;
        *slot = ptr::null_mut();
        let spec = DriveSpec::from_json(as_str(json, "json")?)?;
        *slot = Box::into_raw(Box::new(TlDrive { spec }));
        Ok(())
    })
}

/// Looks up a named preset.
///
/// # Safety
/// `name` must be NUL-terminated; `out_drive` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_drive_preset(name: *const c_char, out_drive: *mut *mut TlDrive) -> TlStatus {
    guard(|| {
        let slot = out(out_drive, "out_drive")?;
        *slot = ptr::null_mut();
        let name = as_str(name, "name")?;
        let spec = presets::by_name(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{name}'")))?;
        *slot = Box::into_raw(Box::new(TlDrive { spec }));
        Ok(())
    })
}

/// Releases a drive. Null is ignored.
///
/// # Safety
/// `drive` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_drive_free(drive: *mut TlDrive) {
    if !drive.is_null() {
        drop(Box::from_raw(drive));
    }
}

/// Drive period `2π/ω`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_drive_period(drive: *const TlDrive, out_period: *mut f64) -> TlStatus {
    guard(|| {
        *out(out_period, "out_period")? = as_ref(drive, "drive")?.spec.period();
        Ok(())
    })
}

/// Builds the kernel of a drive with the default truncation threshold.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_kernel_new(drive: *const TlDrive, out_kernel: *mut *mut TlKernel) -> TlStatus {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        *slot = ptr::null_mut();
        let spec = as_ref(drive, "drive")?.spec.clone();
        let ks = KernelSpec::from_spec(&spec, gbf::DEFAULT_THRESHOLD)?;
        *slot = Box::into_raw(Box::new(TlKernel { spec, ks }));
        Ok(())
    })
}

/// Releases a kernel. Null is ignored.
///
/// # Safety
/// `kernel` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_kernel_free(kernel: *mut TlKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// `K(t, s)` for `t ≥ s`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_kernel_at(kernel: *const TlKernel, t: f64, s: f64, out_value: *mut TlComplex) -> TlStatus {
    guard(|| {
        let k = as_ref(kernel, "kernel")?;
        let slot = out(out_value, "out_value")?;
        *slot = kernel_at(&k.ks, t, s)?.into();
        Ok(())
    })
}

/// Rotated-frame `U(t, s)` from the series engine.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_unitary(
    kernel: *const TlKernel,
    t: f64,
    s: f64,
    tol: f64,
    k_max: usize,
    out_u: *mut TlMat2,
) -> TlStatus {
    guard(|| {
        let k = as_ref(kernel, "kernel")?;
        let slot = out(out_u, "out_u")?;
        *slot = unitary_analytic(&k.ks, t, s, tol, k_max)?.into();
        Ok(())
    })
}

/// `p(t, s) = |U₁₂(t, s)|²` from the series engine, clamped to `[0, 1]`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_transition_probability(
    kernel: *const TlKernel,
    t: f64,
    s: f64,
    tol: f64,
    k_max: usize,
    out_p: *mut f64,
) -> TlStatus {
    guard(|| {
        let k = as_ref(kernel, "kernel")?;
        let slot = out(out_p, "out_p")?;
        *slot = transition_probability(&unitary_analytic(&k.ks, t, s, tol, k_max)?);
        Ok(())
    })
}

/// `U(t, s)` by adaptive time stepping in the given frame
/// (`TL_FRAME_LAB` or `TL_FRAME_ROTATED`).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_unitary_oracle(
    drive: *const TlDrive,
    t: f64,
    s: f64,
    tol: f64,
    frame: i32,
    out_u: *mut TlMat2,
) -> TlStatus {
    guard(|| {
        let d = as_ref(drive, "drive")?;
        let slot = out(out_u, "out_u")?;
        let frame = match frame {
            TL_FRAME_LAB => Frame::Lab,
            TL_FRAME_ROTATED => Frame::Rotated,
            other => return Err(Error::InvalidArgument(format!("unknown frame {other}")).into()),
        };
        *slot = integrate_schrodinger(&d.spec, s, t, tol, frame)?.into();
        Ok(())
    })
}

/// Rotated-frame quasienergies `(ε₊, ε₋)` from the series monodromy.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_quasienergies(
    kernel: *const TlKernel,
    tol: f64,
    k_max: usize,
    out_plus: *mut f64,
    out_minus: *mut f64,
) -> TlStatus {
    guard(|| {
        let k = as_ref(kernel, "kernel")?;
        let plus = out(out_plus, "out_plus")?;
        let minus = out(out_minus, "out_minus")?;
        let period = k.spec.period();
        let m = unitary_analytic(&k.ks, period, 0.0, tol, k_max)?;
        (*plus, *minus) = quasienergies(&m, period)?;
        Ok(())
    })
}

/// Period-averaged rotated-frame Hamiltonian.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_effective_hamiltonian(drive: *const TlDrive, n_quad: usize, out_h: *mut TlMat2) -> TlStatus {
    guard(|| {
        let d = as_ref(drive, "drive")?;
        let slot = out(out_h, "out_h")?;
        *slot = effective_hamiltonian(&d.spec, d.spec.period(), n_quad)?.into();
        Ok(())
    })
}

/// Rotating-wave long-time average of the transition probability.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_rwa_average(drive: *const TlDrive, out_avg: *mut f64) -> TlStatus {
    guard(|| {
        let d = as_ref(drive, "drive")?;
        let slot = out(out_avg, "out_avg")?;
        let table = gbf::build_table(&d.spec, gbf::DEFAULT_THRESHOLD)?;
        *slot = rwa::rwa_average(&table, d.spec.eps0, d.spec.omega);
        Ok(())
    })
}
