//! C ABI over the `noisy_mh` library.
//!
//! Every fallible function returns an [`NmhStatus`]; on failure a message is
//! kept per thread and read with [`nmh_last_error_message`]. Objects are
//! passed as opaque handles created by `*_new`/`nmh_run_chain` and released
//! with the matching `*_free`. Strings returned through `char **` belong to
//! the caller and are released with [`nmh_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use noisy_mh::diagnostics::{tv_rate_bound, TvRateParams};
use noisy_mh::discrete_walk::{classify, BirthDeathSpec, ClassifyOptions, Verdict};
use noisy_mh::hmm_smc::{bootstrap_pf_loglik, kalman_loglik, LgssmParams};
use noisy_mh::presets::classify_preset;
use noisy_mh::{run_chain, ChainTrace, Error, KernelSpec, RngStream, State};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NmhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    OffSupport = 4,
    NonPositiveWeight = 5,
    Unsupported = 6,
    InvalidSpec = 7,
    InconclusiveBound = 8,
    Config = 9,
    Io = 10,
    Parse = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Classification of a birth-death chain.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NmhVerdict {
    Transient = 0,
    RecurrentNull = 1,
    PositiveRecurrent = 2,
    GeometricallyErgodic = 3,
    Inconclusive = 4,
}

impl From<Verdict> for NmhVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Transient => NmhVerdict::Transient,
            Verdict::RecurrentNull => NmhVerdict::RecurrentNull,
            Verdict::PositiveRecurrent => NmhVerdict::PositiveRecurrent,
            Verdict::GeometricallyErgodic => NmhVerdict::GeometricallyErgodic,
            Verdict::Inconclusive => NmhVerdict::Inconclusive,
        }
    }
}

/// Opaque transition kernel.
pub struct NmhKernel(KernelSpec);

/// Opaque chain realization.
pub struct NmhTrace(ChainTrace);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(NmhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::OffSupport(_) => NmhStatus::OffSupport,
            Error::NonPositiveWeight(_) => NmhStatus::NonPositiveWeight,
            Error::Unsupported(_) => NmhStatus::Unsupported,
            Error::InvalidInput(_) => NmhStatus::InvalidInput,
            Error::InvalidSpec(_) => NmhStatus::InvalidSpec,
            Error::InconclusiveBound(_) => NmhStatus::InconclusiveBound,
            Error::Config { .. } => NmhStatus::Config,
            Error::Io(_) => NmhStatus::Io,
            Error::Json(_) | Error::Csv(_) => NmhStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(NmhStatus::Parse, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NmhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NmhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            NmhStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NmhStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NmhStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nmh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nmh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nmh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a kernel from its JSON description, e.g.
/// `{"kind":"noisy","target":{"kind":"geometric","ratio":0.5},
///   "proposal":{"kind":"integer_walk","theta":0.75},
///   "weights":{"family":"unit"},"n":1}`.
#[no_mangle]
pub unsafe extern "C" fn nmh_kernel_new_from_json(json: *const c_char, out: *mut *mut NmhKernel) -> NmhStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let spec: KernelSpec = serde_json::from_str(str_arg(json, "json")?)?;
        spec.validate()?;
        *out = Box::into_raw(Box::new(NmhKernel(spec)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nmh_kernel_free(kernel: *mut NmhKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Run `iterations` steps from the JSON state `x0_json` (an integer or an
/// array of numbers) on the random stream `(seed, stream_id)`.
#[no_mangle]
pub unsafe extern "C" fn nmh_run_chain(
    kernel: *const NmhKernel,
    x0_json: *const c_char,
    iterations: usize,
    seed: u64,
    stream_id: u64,
    out: *mut *mut NmhTrace,
) -> NmhStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let kernel = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let x0: State = serde_json::from_str(str_arg(x0_json, "x0_json")?)?;
        let trace = run_chain(&kernel.0, x0, iterations, RngStream::new(seed, stream_id))?;
        *out = Box::into_raw(Box::new(NmhTrace(trace)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nmh_trace_free(trace: *mut NmhTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded states (`iterations + 1`); 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nmh_trace_len(trace: *const NmhTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.len())
}

/// Dimension of the states (1 on the lattice); 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nmh_trace_dim(trace: *const NmhTrace) -> usize {
    trace.as_ref().map_or(0, |t| match &t.0.states[0] {
        State::Integer(_) => 1,
        State::Vector(v) => v.len(),
    })
}

/// Copy coordinate `coord` of every state into `out[0..len]`; `len` must be
/// at least [`nmh_trace_len`].
#[no_mangle]
pub unsafe extern "C" fn nmh_trace_coordinates(trace: *const NmhTrace, coord: usize, out: *mut f64, len: usize) -> NmhStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        if coord >= nmh_trace_dim(trace) {
            return Err(Failure(NmhStatus::InvalidInput, format!("coordinate {coord} out of range")));
        }
        if len < t.0.len() {
            return Err(Failure(NmhStatus::BufferTooSmall, format!("need {} slots, got {len}", t.0.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, v) in dst.iter_mut().zip(t.0.coordinate(coord)) {
            *d = v;
        }
        Ok(())
    })
}

/// Copy the acceptance flags (`len >= nmh_trace_len - 1`) as 0/1 bytes.
#[no_mangle]
pub unsafe extern "C" fn nmh_trace_accepted(trace: *const NmhTrace, out: *mut u8, len: usize) -> NmhStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        let n = t.0.accepted.len();
        if len < n {
            return Err(Failure(NmhStatus::BufferTooSmall, format!("need {n} slots, got {len}")));
        }
        if n == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, a) in dst.iter_mut().zip(&t.0.accepted) {
            *d = u8::from(*a);
        }
        Ok(())
    })
}

/// Fraction of accepted proposals.
#[no_mangle]
pub unsafe extern "C" fn nmh_trace_acceptance_rate(trace: *const NmhTrace, out: *mut f64) -> NmhStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        *out_arg(out, "out")? = noisy_mh::diagnostics::mean_acceptance(&t.0.accepted)?;
        Ok(())
    })
}

fn classify_into(
    spec: &BirthDeathSpec,
    m: i64,
    verdict: *mut NmhVerdict,
    report_json: *mut *mut c_char,
) -> Result<(), Failure> {
    let opts = ClassifyOptions {
        m,
        ..Default::default()
    };
    let c = classify(spec, &opts)?;
    // SAFETY: caller-provided out pointers are checked for null
    unsafe {
        *out_arg(verdict, "verdict")? = c.verdict.into();
        if let Some(slot) = report_json.as_mut() {
            *slot = to_c_string(serde_json::to_string(&c)?);
        }
    }
    Ok(())
}

/// Classify a named preset chain. `n = 0` selects the preset default.
/// `report_json` may be null; otherwise it receives the full report.
#[no_mangle]
pub unsafe extern "C" fn nmh_classify_preset(
    name: *const c_char,
    n: usize,
    m: i64,
    verdict: *mut NmhVerdict,
    report_json: *mut *mut c_char,
) -> NmhStatus {
    guard(|| {
        let spec = classify_preset(str_arg(name, "name")?, (n > 0).then_some(n))?;
        classify_into(&spec, m, verdict, report_json)
    })
}

/// Classify a chain given by `p[m-1]`, `q[m-1]` for `m = 1..=len`; the last
/// row is reused beyond the table.
#[no_mangle]
pub unsafe extern "C" fn nmh_classify_table(
    p: *const f64,
    q: *const f64,
    len: usize,
    m: i64,
    verdict: *mut NmhVerdict,
    report_json: *mut *mut c_char,
) -> NmhStatus {
    guard(|| {
        if len == 0 {
            return Err(Failure(NmhStatus::InvalidInput, "table needs at least one row".into()));
        }
        let spec = BirthDeathSpec::Table {
            p: slice_arg(p, len, "p")?.to_vec(),
            q: slice_arg(q, len, "q")?.to_vec(),
        };
        classify_into(&spec, m, verdict, report_json)
    })
}

/// Minimal `2 R tau^n + n / r` over integer `n` and its minimiser.
#[no_mangle]
pub unsafe extern "C" fn nmh_tv_rate_bound(big_r: f64, tau: f64, r: f64, bound: *mut f64, n: *mut u64) -> NmhStatus {
    guard(|| {
        let b = tv_rate_bound(&TvRateParams { big_r, tau }, r)?;
        *out_arg(bound, "bound")? = b.bound;
        *out_arg(n, "n")? = b.n;
        Ok(())
    })
}

/// Exact log-likelihood of `y[0..len]` under the linear-Gaussian model.
#[no_mangle]
pub unsafe extern "C" fn nmh_kalman_loglik(
    x0: f64,
    a: f64,
    sigma2_x: f64,
    sigma2_y: f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> NmhStatus {
    guard(|| {
        let params = LgssmParams::new(x0, a, sigma2_x, sigma2_y)?;
        *out_arg(out, "out")? = kalman_loglik(&params, slice_arg(y, len, "y")?);
        Ok(())
    })
}

/// Bootstrap particle-filter estimate of the same log-likelihood.
#[no_mangle]
pub unsafe extern "C" fn nmh_pf_loglik(
    x0: f64,
    a: f64,
    sigma2_x: f64,
    sigma2_y: f64,
    y: *const f64,
    len: usize,
    particles: usize,
    seed: u64,
    out: *mut f64,
) -> NmhStatus {
    guard(|| {
        if particles == 0 {
            return Err(Failure(NmhStatus::InvalidInput, "need at least one particle".into()));
        }
        let params = LgssmParams::new(x0, a, sigma2_x, sigma2_y)?;
        let ys = slice_arg(y, len, "y")?;
        let mut g = RngStream::new(seed, 0).generator();
        *out_arg(out, "out")? = bootstrap_pf_loglik(&params, ys, particles, &mut g).loglik;
        Ok(())
    })
}
