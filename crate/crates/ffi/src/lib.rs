//! C ABI over openxxx-core.
//!
//! Every function returns an [`OxStatus`]. On failure the message is kept in
//! thread-local storage and read with [`ox_last_error`]. Complex numbers cross
//! the boundary as interleaved `re, im` doubles; matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use openxxx_core::harness::output::to_rounded_json;
use openxxx_core::harness::{run_identity_suite, run_spectrum, Experiment, ExperimentConfig};
use openxxx_core::{BetheSystem, Error, RootFamilies, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque handle to a validated experiment.
pub struct OxModel {
    exp: Experiment,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: OxStatus, msg: impl Into<String>) -> OxStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> OxStatus {
    let status = match e {
        Error::Config(_) | Error::Io { .. } => OxStatus::Config,
        _ => OxStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> OxStatus) -> OxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(OxStatus::Panic, "panic inside openxxx"),
    }
}

unsafe fn model<'a>(m: *const OxModel) -> Result<&'a OxModel, OxStatus> {
    m.as_ref().ok_or_else(|| fail(OxStatus::NullPointer, "model handle is null"))
}

fn export_string(text: String, out: *mut *mut c_char) -> OxStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            OxStatus::Ok
        }
        Err(_) => fail(OxStatus::Numerical, "report contains a nul byte"),
    }
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ox_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse and validate a JSON configuration. `seed` overrides the configured
/// seed when `override_seed` is nonzero.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ox_model_from_json(json: *const c_char, override_seed: i32, seed: u64, out: *mut *mut OxModel) -> OxStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(OxStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(OxStatus::InvalidUtf8, "configuration is not UTF-8");
        };
        let seed = (override_seed != 0).then_some(seed);
        match ExperimentConfig::from_json(text).and_then(|c| c.resolve(seed)) {
            Ok(exp) => {
                *out = Box::into_raw(Box::new(OxModel { exp }));
                OxStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `m` must come from [`ox_model_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ox_model_free(m: *mut OxModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ox_model_rank(m: *const OxModel) -> usize {
    m.as_ref().map_or(0, |m| m.exp.model.n())
}

/// Dimension of the quantum space, 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ox_model_quantum_dim(m: *const OxModel) -> usize {
    m.as_ref().map_or(0, |m| m.exp.model.chain.quantum_dim())
}

/// Write d(u) into `buf` as 2·dim² interleaved doubles.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ox_transfer_matrix(m: *const OxModel, u_re: f64, u_im: f64, buf: *mut f64, len: usize) -> OxStatus {
    guard(|| {
        let m = match model(m) {
            Ok(m) => m,
            Err(s) => return s,
        };
        if buf.is_null() {
            return fail(OxStatus::NullPointer, "buffer is null");
        }
        let dim = m.exp.model.chain.quantum_dim();
        if len < 2 * dim * dim {
            return fail(OxStatus::BufferTooSmall, format!("need {} doubles", 2 * dim * dim));
        }
        let d = match m.exp.model.transfer_matrix(C64::new(u_re, u_im)) {
            Ok(d) => d.into_data(),
            Err(e) => return from_core(e),
        };
        let out = std::slice::from_raw_parts_mut(buf, 2 * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = d[(i, j)];
                out[2 * (i * dim + j)] = z.re;
                out[2 * (i * dim + j) + 1] = z.im;
            }
        }
        OxStatus::Ok
    })
}

/// Bethe eigenvalue Λ(u) for the root families given level by level:
/// `counts[k]` roots at level k, `roots` holding all of them interleaved.
///
/// # Safety
/// `counts` must hold `levels` entries, `roots` 2·Σcounts doubles and `out`
/// two doubles.
#[no_mangle]
pub unsafe extern "C" fn ox_bethe_eigenvalue(
    m: *const OxModel,
    u_re: f64,
    u_im: f64,
    counts: *const usize,
    levels: usize,
    roots: *const f64,
    out: *mut f64,
) -> OxStatus {
    guard(|| {
        let m = match model(m) {
            Ok(m) => m,
            Err(s) => return s,
        };
        if out.is_null() || (levels > 0 && counts.is_null()) {
            return fail(OxStatus::NullPointer, "null argument");
        }
        let n = m.exp.model.n();
        if levels != n - 1 {
            return fail(OxStatus::Config, format!("expected {} root levels, got {levels}", n - 1));
        }
        let counts = if levels == 0 { &[][..] } else { std::slice::from_raw_parts(counts, levels) };
        let total: usize = counts.iter().sum();
        if total > 0 && roots.is_null() {
            return fail(OxStatus::NullPointer, "roots are null");
        }
        let flat = if total == 0 { &[][..] } else { std::slice::from_raw_parts(roots, 2 * total) };
        let z: Vec<C64> = flat.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
        let families = RootFamilies::from_flat(counts, &z);
        let result = BetheSystem::new(&m.exp.model).and_then(|s| s.lambda_eig(C64::new(u_re, u_im), &families));
        match result {
            Ok(l) => {
                *out = l.re;
                *out.add(1) = l.im;
                OxStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Run the identity suite; `*json` receives the report, freed with
/// [`ox_string_free`]. Returns Ok even when checks fail; inspect `passed`.
///
/// # Safety
/// `json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ox_identity_report(m: *const OxModel, json: *mut *mut c_char) -> OxStatus {
    guard(|| {
        let m = match model(m) {
            Ok(m) => m,
            Err(s) => return s,
        };
        if json.is_null() {
            return fail(OxStatus::NullPointer, "json is null");
        }
        match to_rounded_json(&run_identity_suite(&m.exp)) {
            Ok(t) => export_string(t, json),
            Err(e) => from_core(e),
        }
    })
}

/// Solve every configured sector and match against exact diagonalization;
/// `*json` receives the spectrum report.
///
/// # Safety
/// `json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ox_spectrum_report(m: *const OxModel, json: *mut *mut c_char) -> OxStatus {
    guard(|| {
        let m = match model(m) {
            Ok(m) => m,
            Err(s) => return s,
        };
        if json.is_null() {
            return fail(OxStatus::NullPointer, "json is null");
        }
        match run_spectrum(&m.exp).and_then(|r| to_rounded_json(&r.report)) {
            Ok(t) => export_string(t, json),
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ox_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
