//! C ABI for the modwd enhancement pipeline.
//!
//! All entry points take an opaque `ModwdHandle` created by
//! `modwd_handle_new` and return a `ModwdStatus` code; the message for the
//! most recent failure on the current thread is available through
//! `modwd_last_error`. Buffers returned by `modwd_enhance_buffer` must be
//! released with `modwd_buffer_free`.

use modwd::enhance::{cascade, EnhanceContext, MethodToken};
use modwd::signal::{read_wav, write_wav, PcmSignal};
use modwd::{Error, FrameParams};
use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModwdStatus {
    ModwdOk = 0,
    ModwdNullPointer = 1,
    ModwdInvalidArgument = 2,
    ModwdIoError = 3,
    ModwdProcessingError = 4,
    ModwdPanic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend_from_slice(msg.as_bytes());
        e.push(0);
    });
}

fn status_of(err: &Error) -> ModwdStatus {
    match err {
        Error::Config(_) => ModwdStatus::ModwdInvalidArgument,
        Error::Io(_) | Error::MalformedHeader(_) | Error::UnsupportedFormat(_) => {
            ModwdStatus::ModwdIoError
        }
        _ => ModwdStatus::ModwdProcessingError,
    }
}

fn fail(err: &Error) -> ModwdStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Opaque enhancement configuration: a method cascade plus framing.
pub struct ModwdHandle {
    method: MethodToken,
    alpha: f64,
    ctx: EnhanceContext,
}

fn guard<F: FnOnce() -> ModwdStatus>(f: F) -> ModwdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            ModwdStatus::ModwdPanic
        }
    }
}

/// Create a handle for the default single-stage pipeline at the given
/// detail-scaling factor. Returns null when `alpha` is outside [0, 1].
#[no_mangle]
pub extern "C" fn modwd_handle_new(alpha: c_double) -> *mut ModwdHandle {
    if !(0.0..=1.0).contains(&alpha) {
        set_error("alpha outside [0, 1]");
        return std::ptr::null_mut();
    }
    let handle = ModwdHandle {
        method: MethodToken::parse("modwd").expect("builtin token"),
        alpha,
        ctx: EnhanceContext::default(),
    };
    Box::into_raw(Box::new(handle))
}

/// Release a handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn modwd_handle_free(handle: *mut ModwdHandle) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Replace the detail-scaling factor.
#[no_mangle]
pub extern "C" fn modwd_handle_set_alpha(handle: *mut ModwdHandle, alpha: c_double) -> ModwdStatus {
    guard(|| {
        let Some(handle) = (unsafe { handle.as_mut() }) else {
            set_error("null handle");
            return ModwdStatus::ModwdNullPointer;
        };
        if !(0.0..=1.0).contains(&alpha) {
            set_error("alpha outside [0, 1]");
            return ModwdStatus::ModwdInvalidArgument;
        }
        handle.alpha = alpha;
        ModwdStatus::ModwdOk
    })
}

/// Replace the method cascade, e.g. `"modwd"`, `"ss"`, or `"modwd-logstsa"`.
///
/// # Safety
/// `method` must be a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn modwd_handle_set_method(
    handle: *mut ModwdHandle,
    method: *const c_char,
) -> ModwdStatus {
    guard(|| {
        let (Some(handle), false) = (unsafe { handle.as_mut() }, method.is_null()) else {
            set_error("null handle or method");
            return ModwdStatus::ModwdNullPointer;
        };
        let text = match unsafe { CStr::from_ptr(method) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("method is not valid UTF-8");
                return ModwdStatus::ModwdInvalidArgument;
            }
        };
        match MethodToken::parse(text) {
            Ok(token) => {
                handle.method = token;
                ModwdStatus::ModwdOk
            }
            Err(e) => fail(&e),
        }
    })
}

fn run_handle(handle: &ModwdHandle, input: &PcmSignal) -> Result<PcmSignal, Error> {
    let spec = handle.method.instantiate(
        Some(handle.alpha),
        &modwd::enhance::SsParams::default(),
        &modwd::enhance::GainParams::default(),
    )?;
    cascade(&spec, input, &handle.ctx)
}

/// Enhance an in-memory buffer of samples in [-1, 1].
///
/// On success `*out_samples` points to a malloc'd buffer of `*out_len`
/// doubles owned by the caller; release it with `modwd_buffer_free`. The
/// output can be up to one frame shorter than the input.
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out_samples` and
/// `out_len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modwd_enhance_buffer(
    handle: *const ModwdHandle,
    samples: *const c_double,
    len: usize,
    sample_rate_hz: c_int,
    out_samples: *mut *mut c_double,
    out_len: *mut usize,
) -> ModwdStatus {
    guard(|| {
        if handle.is_null() || samples.is_null() || out_samples.is_null() || out_len.is_null() {
            set_error("null pointer argument");
            return ModwdStatus::ModwdNullPointer;
        }
        if sample_rate_hz <= 0 {
            set_error("sample rate must be positive");
            return ModwdStatus::ModwdInvalidArgument;
        }
        let handle = unsafe { &*handle };
        let input = PcmSignal::new(
            unsafe { std::slice::from_raw_parts(samples, len) }.to_vec(),
            sample_rate_hz as u32,
        );
        match run_handle(handle, &input) {
            Ok(out) => {
                let n = out.samples.len();
                let buf = unsafe { libc::malloc(n * std::mem::size_of::<c_double>()) } as *mut c_double;
                if buf.is_null() {
                    set_error("allocation failed");
                    return ModwdStatus::ModwdProcessingError;
                }
                unsafe {
                    std::ptr::copy_nonoverlapping(out.samples.as_ptr(), buf, n);
                    *out_samples = buf;
                    *out_len = n;
                }
                ModwdStatus::ModwdOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a buffer returned by `modwd_enhance_buffer`. Null is a no-op.
#[no_mangle]
pub extern "C" fn modwd_buffer_free(samples: *mut c_double) {
    if !samples.is_null() {
        unsafe { libc::free(samples as *mut libc::c_void) };
    }
}

/// Read a mono WAV, enhance it, and write the result as 16-bit PCM.
///
/// # Safety
/// `input_path` and `output_path` must be valid NUL-terminated C strings.
#[no_mangle]
pub unsafe extern "C" fn modwd_enhance_file(
    handle: *const ModwdHandle,
    input_path: *const c_char,
    output_path: *const c_char,
) -> ModwdStatus {
    guard(|| {
        if handle.is_null() || input_path.is_null() || output_path.is_null() {
            set_error("null pointer argument");
            return ModwdStatus::ModwdNullPointer;
        }
        let handle = unsafe { &*handle };
        let path_of = |p: *const c_char| -> Result<&Path, ModwdStatus> {
            unsafe { CStr::from_ptr(p) }.to_str().map(Path::new).map_err(|_| {
                set_error("path is not valid UTF-8");
                ModwdStatus::ModwdInvalidArgument
            })
        };
        let input_path = match path_of(input_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let output_path = match path_of(output_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let result = read_wav(input_path)
            .and_then(|sig| run_handle(handle, &sig))
            .and_then(|out| write_wav(output_path, &out));
        match result {
            Ok(_clipped) => ModwdStatus::ModwdOk,
            Err(e) => fail(&e),
        }
    })
}

/// Copy the most recent error message on this thread into `buf` (truncated
/// to `buf_len`, always NUL-terminated). Returns the full message length
/// excluding the NUL, or 0 when there is no pending error.
///
/// # Safety
/// `buf` must be valid for `buf_len` writable bytes (or null to query the
/// required length).
#[no_mangle]
pub unsafe extern "C" fn modwd_last_error(buf: *mut c_char, buf_len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if e.is_empty() {
            return 0;
        }
        let msg_len = e.len() - 1;
        if !buf.is_null() && buf_len > 0 {
            let n = msg_len.min(buf_len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        msg_len
    })
}

/// Number of samples expected from enhancing `len` input samples with the
/// default framing, or 0 when the input is too short to process.
#[no_mangle]
pub extern "C" fn modwd_output_len(len: usize) -> usize {
    let p = FrameParams::default();
    p.output_len(p.num_frames(len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn message() -> String {
        let mut buf = vec![0i8; 256];
        let n = unsafe { modwd_last_error(buf.as_mut_ptr() as *mut c_char, buf.len()) };
        let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&b| b as u8).collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }

    #[test]
    fn handle_lifecycle_and_validation() {
        let h = modwd_handle_new(0.25);
        assert!(!h.is_null());
        assert_eq!(modwd_handle_set_alpha(h, 0.5), ModwdStatus::ModwdOk);
        assert_eq!(modwd_handle_set_alpha(h, 1.5), ModwdStatus::ModwdInvalidArgument);
        assert!(modwd_handle_new(-0.1).is_null());
        assert!(!message().is_empty());
        modwd_handle_free(h);
        modwd_handle_free(std::ptr::null_mut());
    }

    #[test]
    fn buffer_round_trip_matches_library_call() {
        let h = modwd_handle_new(0.25);
        let input: Vec<f64> = (0..2000)
            .map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 8000.0).sin() * 0.4)
            .collect();
        let mut out: *mut c_double = std::ptr::null_mut();
        let mut out_len = 0usize;
        let status = unsafe {
            modwd_enhance_buffer(h, input.as_ptr(), input.len(), 8000, &mut out, &mut out_len)
        };
        assert_eq!(status, ModwdStatus::ModwdOk);
        assert_eq!(out_len, modwd_output_len(input.len()));
        let ffi_out = unsafe { std::slice::from_raw_parts(out, out_len) }.to_vec();
        let direct = modwd::modwd_enhance(
            &PcmSignal::new(input, 8000),
            &modwd::ModwdConfig::new(0.25),
        )
        .unwrap();
        assert_eq!(ffi_out, direct.samples);
        modwd_buffer_free(out);
        modwd_handle_free(h);
    }

    #[test]
    fn method_switch_and_bad_token() {
        let h = modwd_handle_new(0.0);
        let good = CString::new("ss-wf").unwrap();
        let bad = CString::new("nope").unwrap();
        unsafe {
            assert_eq!(modwd_handle_set_method(h, good.as_ptr()), ModwdStatus::ModwdOk);
            assert_eq!(
                modwd_handle_set_method(h, bad.as_ptr()),
                ModwdStatus::ModwdInvalidArgument
            );
        }
        modwd_handle_free(h);
    }

    #[test]
    fn short_buffer_reports_processing_error() {
        let h = modwd_handle_new(0.25);
        let input = vec![0.1; 50];
        let mut out: *mut c_double = std::ptr::null_mut();
        let mut out_len = 0usize;
        let status = unsafe {
            modwd_enhance_buffer(h, input.as_ptr(), input.len(), 8000, &mut out, &mut out_len)
        };
        assert_eq!(status, ModwdStatus::ModwdProcessingError);
        assert!(!message().is_empty());
        modwd_handle_free(h);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.wav");
        let output = dir.path().join("out.wav");
        let sig = PcmSignal::new(
            (0..3000)
                .map(|i| (2.0 * std::f64::consts::PI * 300.0 * i as f64 / 8000.0).sin() * 0.3)
                .collect(),
            8000,
        );
        write_wav(&input, &sig).unwrap();
        let h = modwd_handle_new(0.5);
        let c_in = CString::new(input.to_str().unwrap()).unwrap();
        let c_out = CString::new(output.to_str().unwrap()).unwrap();
        let status = unsafe { modwd_enhance_file(h, c_in.as_ptr(), c_out.as_ptr()) };
        assert_eq!(status, ModwdStatus::ModwdOk);
        let back = read_wav(&output).unwrap();
        assert_eq!(back.sample_rate_hz, 8000);
        assert!(!back.samples.is_empty());
        let missing = CString::new(dir.path().join("none.wav").to_str().unwrap()).unwrap();
        let status = unsafe { modwd_enhance_file(h, missing.as_ptr(), c_out.as_ptr()) };
        assert_eq!(status, ModwdStatus::ModwdIoError);
        modwd_handle_free(h);
    }
}
