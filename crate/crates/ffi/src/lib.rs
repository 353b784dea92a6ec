//! C ABI over `decolab`.
//!
//! Every fallible call returns a [`DecolabStatus`]; on failure the message is
//! kept per thread and can be fetched with [`decolab_last_error_message`].
//! Handles are opaque and must be released with the matching `*_free`.
//! Panics never cross the boundary.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! makes: strings NUL-terminated, arrays at least as long as the length
//! passed with them, handles obtained from this library and not yet freed.
//! Nulls are detected and reported as [`DecolabStatus::NullPointer`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use decolab::measures::{fidelity_distance, ppt_min_eigenvalue};
use decolab::operator::DensityMatrix;
use decolab::runner::{self, ExperimentConfig, OutputFormat, TimeSeriesRecord};
use decolab::states::{self, ApparatusPartition, MeasurementCoefficients, WeightVector};
use decolab::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecolabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    IoError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecolabFormat {
    Csv = 0,
    Json = 1,
}

/// Parsed experiment configuration.
pub struct DecolabConfig {
    inner: ExperimentConfig,
}

/// Diagnostics time series produced by a run.
pub struct DecolabRecord {
    inner: TimeSeriesRecord,
}

/// Density matrix on system ⊗ apparatus.
pub struct DecolabState {
    inner: DensityMatrix,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DecolabSample {
    pub time: f64,
    pub dist_eq6: f64,
    pub dist_eq7: f64,
    pub min_ppt_eig: f64,
    pub n_negative_ppt: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DecolabSearchReport {
    pub seed: u64,
    pub hs_dist: f64,
    pub fidelity_dist: f64,
    pub ensemble_size: usize,
    pub iterations: usize,
    pub hs_to_decohered: f64,
    pub fidelity_to_decohered: f64,
    pub target_hs_to_decohered: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DecolabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::Config { .. } => DecolabStatus::ConfigError,
            Error::Io { .. } => DecolabStatus::IoError,
            Error::Eigen(_) | Error::Internal(_) => DecolabStatus::NumericalError,
            _ => DecolabStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DecolabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DecolabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DecolabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            DecolabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            DecolabStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// there is no error. Pass a null `buf` to query the size.
#[no_mangle]
pub unsafe extern "C" fn decolab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Parses config text. On success `*out` owns a new handle.
#[no_mangle]
pub unsafe extern "C" fn decolab_config_parse(
    text: *const c_char,
    out: *mut *mut DecolabConfig,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = ExperimentConfig::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(DecolabConfig { inner: cfg }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_config_load(
    path: *const c_char,
    out: *mut *mut DecolabConfig,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = ExperimentConfig::load(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(DecolabConfig { inner: cfg }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_config_set_seed(
    config: *mut DecolabConfig,
    seed: u64,
) -> DecolabStatus {
    guard(|| {
        out_arg(config, "config")?.inner.seed = Some(seed);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_config_free(config: *mut DecolabConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the decoherence experiment. On success `*out` owns a new record.
#[no_mangle]
pub unsafe extern "C" fn decolab_run_experiment(
    config: *const DecolabConfig,
    out: *mut *mut DecolabRecord,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let record = runner::run_decoherence_experiment(&ref_arg(config, "config")?.inner)?;
        *out = Box::into_raw(Box::new(DecolabRecord { inner: record }));
        Ok(())
    })
}

/// Number of samples, or 0 for a null record.
#[no_mangle]
pub unsafe extern "C" fn decolab_record_len(record: *const DecolabRecord) -> usize {
    record.as_ref().map_or(0, |r| r.inner.len())
}

#[no_mangle]
pub unsafe extern "C" fn decolab_record_sample(
    record: *const DecolabRecord,
    index: usize,
    out: *mut DecolabSample,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let samples = ref_arg(record, "record")?.inner.samples();
        let s = samples.get(index).ok_or_else(|| {
            Failure(
                DecolabStatus::InvalidArgument,
                format!("index {index} out of range for {} samples", samples.len()),
            )
        })?;
        *out = DecolabSample {
            time: s.time,
            dist_eq6: s.dist_decohered,
            dist_eq7: s.dist_microcanonical,
            min_ppt_eig: s.min_ppt_eig,
            n_negative_ppt: s.n_negative_ppt,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_record_write(
    record: *const DecolabRecord,
    path: *const c_char,
    format: DecolabFormat,
) -> DecolabStatus {
    guard(|| {
        let record = ref_arg(record, "record")?;
        let format = match format {
            DecolabFormat::Csv => OutputFormat::Csv,
            DecolabFormat::Json => OutputFormat::Json,
        };
        runner::emit(&record.inner, format, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_record_free(record: *mut DecolabRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

#[no_mangle]
pub unsafe extern "C" fn decolab_run_search(
    config: *const DecolabConfig,
    out: *mut DecolabSearchReport,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = runner::run_separability_search(&ref_arg(config, "config")?.inner)?;
        *out = DecolabSearchReport {
            seed: r.seed,
            hs_dist: r.hs_dist,
            fidelity_dist: r.fidelity_dist,
            ensemble_size: r.ensemble_size,
            iterations: r.iterations,
            hs_to_decohered: r.hs_to_decohered,
            fidelity_to_decohered: r.fidelity_to_decohered,
            target_hs_to_decohered: r.target_hs_to_decohered,
        };
        Ok(())
    })
}

fn coefficients(
    c1_re: f64,
    c1_im: f64,
    c2_re: f64,
    c2_im: f64,
) -> Result<MeasurementCoefficients, Failure> {
    Ok(MeasurementCoefficients::new(
        Complex64::new(c1_re, c1_im),
        Complex64::new(c2_re, c2_im),
    )?)
}

fn put_state(out: &mut *mut DecolabState, rho: DensityMatrix) {
    *out = Box::into_raw(Box::new(DecolabState { inner: rho }));
}

/// Pure-mixed entangled state for weights `p` (length `n1`) and `q` (length `n2`).
#[no_mangle]
pub unsafe extern "C" fn decolab_state_pure_mixed(
    c1_re: f64,
    c1_im: f64,
    c2_re: f64,
    c2_im: f64,
    p: *const f64,
    n1: usize,
    q: *const f64,
    n2: usize,
    out: *mut *mut DecolabState,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = coefficients(c1_re, c1_im, c2_re, c2_im)?;
        let p = WeightVector::new(slice_arg(p, n1, "p")?.to_vec())?;
        let q = WeightVector::new(slice_arg(q, n2, "q")?.to_vec())?;
        let pt = ApparatusPartition::new(n1, n2)?;
        put_state(out, states::pure_mixed_entangled(c, &p, &q, pt)?);
        Ok(())
    })
}

/// The pure-mixed state with its system coherences removed.
#[no_mangle]
pub unsafe extern "C" fn decolab_state_decohered(
    c1_re: f64,
    c1_im: f64,
    c2_re: f64,
    c2_im: f64,
    p: *const f64,
    n1: usize,
    q: *const f64,
    n2: usize,
    out: *mut *mut DecolabState,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = coefficients(c1_re, c1_im, c2_re, c2_im)?;
        let p = WeightVector::new(slice_arg(p, n1, "p")?.to_vec())?;
        let q = WeightVector::new(slice_arg(q, n2, "q")?.to_vec())?;
        let pt = ApparatusPartition::new(n1, n2)?;
        put_state(out, states::decohered_target(c, &p, &q, pt)?);
        Ok(())
    })
}

/// Separable end state with both apparatus groups uniformly mixed.
#[no_mangle]
pub unsafe extern "C" fn decolab_state_microcanonical(
    c1_re: f64,
    c1_im: f64,
    c2_re: f64,
    c2_im: f64,
    n1: usize,
    n2: usize,
    out: *mut *mut DecolabState,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = coefficients(c1_re, c1_im, c2_re, c2_im)?;
        let pt = ApparatusPartition::new(n1, n2)?;
        put_state(out, states::microcanonical_target(c, pt)?);
        Ok(())
    })
}

/// Matrix dimension, or 0 for a null state.
#[no_mangle]
pub unsafe extern "C" fn decolab_state_dim(state: *const DecolabState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.dim())
}

/// Copies the matrix in row-major order into `re` and `im`, each of length `len = dim * dim`.
#[no_mangle]
pub unsafe extern "C" fn decolab_state_matrix(
    state: *const DecolabState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> DecolabStatus {
    guard(|| {
        let m = ref_arg(state, "state")?.inner.matrix();
        let n = m.nrows();
        if len != n * n {
            return Err(Failure(
                DecolabStatus::InvalidArgument,
                format!("buffer length {len}, expected {}", n * n),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        let im = std::slice::from_raw_parts_mut(im, len);
        for i in 0..n {
            for j in 0..n {
                re[i * n + j] = m[(i, j)].re;
                im[i * n + j] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_state_free(state: *mut DecolabState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

#[no_mangle]
pub unsafe extern "C" fn decolab_fidelity_distance(
    a: *const DecolabState,
    b: *const DecolabState,
    out: *mut f64,
) -> DecolabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = fidelity_distance(&ref_arg(a, "a")?.inner, &ref_arg(b, "b")?.inner)?;
        Ok(())
    })
}

/// Lowest partial-transpose eigenvalue and the count of clearly negative ones.
#[no_mangle]
pub unsafe extern "C" fn decolab_ppt_min_eigenvalue(
    state: *const DecolabState,
    min_out: *mut f64,
    count_out: *mut usize,
) -> DecolabStatus {
    guard(|| {
        let min_out = out_arg(min_out, "min_out")?;
        let count_out = out_arg(count_out, "count_out")?;
        let (min, n) = ppt_min_eigenvalue(&ref_arg(state, "state")?.inner)?;
        *min_out = min;
        *count_out = n;
        Ok(())
    })
}
