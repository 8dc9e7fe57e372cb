//! C interface to `wiretap-core`.
//!
//! Channels and wiretap channels are opaque heap handles released with the
//! matching `*_free` function. Every fallible call returns a [`WtcStatus`];
//! on failure a message is available from [`wtc_last_error`] until the next
//! failing call on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wiretap_core::capacity::{
    gaussian_secrecy_capacity, secrecy_capacity_degraded, shannon_capacity, CapacityResult, SolverOptions,
};
use wiretap_core::channel::{check_degradedness, compose, Channel, WiretapChannel};
use wiretap_core::metrics::compute_metrics;
use wiretap_core::prob::JointDistribution;
use wiretap_core::{io, Error};

/// Opaque channel `X → Y`.
pub struct WtcChannel(Channel);

/// Opaque wiretap channel `X → (Y, Z)`.
pub struct WtcWiretap(WiretapChannel);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WtcStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid distribution, channel, dimensions or precondition.
    InvalidArgument = 2,
    NotDegraded = 3,
    BudgetExceeded = 4,
    Parse = 5,
    Io = 6,
    /// Output buffer has the wrong length.
    BufferSize = 7,
    Panic = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WtcCapacity {
    pub value_bits: f64,
    pub kkt_slack: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WtcMetrics {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
    pub s6: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WtcDegradedness {
    pub degraded: bool,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(WtcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidDistribution(_)
            | Error::InvalidChannel(_)
            | Error::DimensionMismatch(_)
            | Error::Precondition(_)
            | Error::RejectionCap { .. } => WtcStatus::InvalidArgument,
            Error::NotDegraded { .. } => WtcStatus::NotDegraded,
            Error::BudgetExceeded { .. } => WtcStatus::BudgetExceeded,
            Error::Parse { .. } | Error::Config(_) => WtcStatus::Parse,
            Error::Io(_) => WtcStatus::Io,
            _ => WtcStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(WtcStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WtcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WtcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WtcStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_path<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(WtcStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(Path::new(s))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn checked_len(a: usize, b: usize) -> Result<usize, Failure> {
    a.checked_mul(b)
        .ok_or_else(|| Failure(WtcStatus::InvalidArgument, "dimensions overflow".into()))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wtc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, nul-terminated version string.
#[no_mangle]
pub extern "C" fn wtc_version() -> *const c_char {
    concat!("wiretap ", env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a channel from a row-major `inputs × outputs` matrix.
///
/// # Safety
/// `matrix` must point to `inputs * outputs` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_channel_new(
    inputs: usize,
    outputs: usize,
    matrix: *const f64,
    out: *mut *mut WtcChannel,
) -> WtcStatus {
    guard(|| {
        let m = slice(matrix, checked_len(inputs, outputs)?, "matrix")?;
        let c = Channel::new(inputs, outputs, m.to_vec())?;
        write(out, Box::into_raw(Box::new(WtcChannel(c))), "out")
    })
}

/// Binary symmetric channel with crossover `p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_channel_bsc(p: f64, out: *mut *mut WtcChannel) -> WtcStatus {
    guard(|| {
        let c = Channel::bsc(p)?;
        write(out, Box::into_raw(Box::new(WtcChannel(c))), "out")
    })
}

/// Reads a channel file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_channel_read(path: *const c_char, out: *mut *mut WtcChannel) -> WtcStatus {
    guard(|| {
        let c = io::read_channel(c_path(path)?)?;
        write(out, Box::into_raw(Box::new(WtcChannel(c))), "out")
    })
}

/// # Safety
/// `c` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wtc_channel_free(c: *mut WtcChannel) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Wiretap channel from a joint `P(y, z | x)`, row-major with `z` fastest.
///
/// # Safety
/// `joint` must point to `x * y * z` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_wiretap_from_joint(
    x: usize,
    y: usize,
    z: usize,
    joint: *const f64,
    out: *mut *mut WtcWiretap,
) -> WtcStatus {
    guard(|| {
        let j = slice(joint, checked_len(checked_len(x, y)?, z)?, "joint")?;
        let w = WiretapChannel::from_joint(x, y, z, j.to_vec())?;
        write(out, Box::into_raw(Box::new(WtcWiretap(w))), "out")
    })
}

/// Physically degraded wiretap channel `X → Y` followed by `Y → Z`.
///
/// # Safety
/// `main` and `degrading` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_wiretap_compose(
    main: *const WtcChannel,
    degrading: *const WtcChannel,
    out: *mut *mut WtcWiretap,
) -> WtcStatus {
    guard(|| {
        let main = main.as_ref().ok_or_else(|| null("main"))?;
        let degrading = degrading.as_ref().ok_or_else(|| null("degrading"))?;
        let w = compose(&main.0, &degrading.0)?;
        write(out, Box::into_raw(Box::new(WtcWiretap(w))), "out")
    })
}

/// Reads a wiretap file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_wiretap_read(path: *const c_char, out: *mut *mut WtcWiretap) -> WtcStatus {
    guard(|| {
        let w = io::read_wiretap(c_path(path)?)?;
        write(out, Box::into_raw(Box::new(WtcWiretap(w))), "out")
    })
}

/// # Safety
/// `w` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wtc_wiretap_free(w: *mut WtcWiretap) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

unsafe fn report(
    r: &CapacityResult,
    out: *mut WtcCapacity,
    input: *mut f64,
    input_len: usize,
) -> Result<(), Failure> {
    if !input.is_null() {
        let p = r.optimal_input.probs();
        if input_len != p.len() {
            return Err(Failure(
                WtcStatus::BufferSize,
                format!("input buffer holds {input_len} values, need {}", p.len()),
            ));
        }
        std::slice::from_raw_parts_mut(input, input_len).copy_from_slice(p);
    }
    let cap = WtcCapacity {
        value_bits: r.value,
        kkt_slack: r.kkt_slack,
        iterations: r.iterations,
        converged: r.converged,
    };
    write(out, cap, "out")
}

/// Shannon capacity in bits. `input` may be null; otherwise it receives the
/// optimal input law and must hold exactly `|X|` values.
///
/// # Safety
/// `c` must be a live handle, `out` writable, `input` null or valid for
/// `input_len` writes.
#[no_mangle]
pub unsafe extern "C" fn wtc_shannon_capacity(
    c: *const WtcChannel,
    tol: f64,
    max_iter: usize,
    out: *mut WtcCapacity,
    input: *mut f64,
    input_len: usize,
) -> WtcStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("channel"))?;
        if !(tol > 0.0) {
            return Err(Failure(WtcStatus::InvalidArgument, "tol must be positive".into()));
        }
        report(&shannon_capacity(&c.0, tol, max_iter), out, input, input_len)
    })
}

/// Secrecy capacity of a degraded wiretap channel, in bits.
///
/// # Safety
/// As for [`wtc_shannon_capacity`].
#[no_mangle]
pub unsafe extern "C" fn wtc_secrecy_capacity(
    w: *const WtcWiretap,
    tol: f64,
    max_iter: usize,
    out: *mut WtcCapacity,
    input: *mut f64,
    input_len: usize,
) -> WtcStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("wiretap"))?;
        let r = secrecy_capacity_degraded(&w.0, SolverOptions::new(tol, max_iter))?;
        report(&r, out, input, input_len)
    })
}

/// Degradedness test. A non-degraded channel is a result, not an error.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_check_degradedness(
    w: *const WtcWiretap,
    tol: f64,
    out: *mut WtcDegradedness,
) -> WtcStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("wiretap"))?;
        let cert = check_degradedness(&w.0, tol)?;
        let d = WtcDegradedness {
            degraded: cert.is_degraded(),
            residual: cert.residual,
        };
        write(out, d, "out")
    })
}

/// The six secrecy metrics of a `rows × cols` joint of message and
/// eavesdropper block, row-major.
///
/// # Safety
/// `joint` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_compute_metrics(
    rows: usize,
    cols: usize,
    joint: *const f64,
    n: usize,
    eta1_bits: f64,
    eta2_bits: f64,
    out: *mut WtcMetrics,
) -> WtcStatus {
    guard(|| {
        let j = slice(joint, checked_len(rows, cols)?, "joint")?;
        let joint = JointDistribution::new(rows, cols, j.to_vec())?;
        let m = compute_metrics(&joint, n, eta1_bits, eta2_bits)?;
        let r = WtcMetrics {
            s1: m.s1,
            s2: m.s2,
            s3: m.s3,
            s4: m.s4,
            s5: m.s5,
            s6: m.s6,
        };
        write(out, r, "out")
    })
}

/// Secrecy capacity of the degraded Gaussian wiretap channel, in bits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wtc_gaussian_secrecy_capacity(
    power: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
    out: *mut f64,
) -> WtcStatus {
    guard(|| {
        let c = gaussian_secrecy_capacity(power, sigma1_sq, sigma2_sq)?;
        write(out, c, "out")
    })
}
