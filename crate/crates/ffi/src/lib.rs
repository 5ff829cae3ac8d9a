//! C interface to leanml.
//!
//! Every function returns a [`LeanStatus`]. On failure the message is kept
//! per thread and can be read with [`lean_last_error_message`]. Datasets and
//! monitors are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use leanml::data::{load_csv, Dataset, IngestConfig};
use leanml::entropy::{hbar_q, hbar_q_inverse, RangePolicy};
use leanml::mi::{Method, SolverConfig};
use leanml::monitor::{Decision, Direction, Monitor, MonitorConfig};
use leanml::valuation::{best_accuracy, best_r2, value};
use leanml::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Data = 3,
    Solver = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeanMethod {
    Dual = 0,
    Gaussian = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeanDirection {
    HigherIsBetter = 0,
    LowerIsBetter = 1,
}

/// Achievable performance of a feature set. Metrics that do not apply to
/// the target type are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeanValuation {
    pub mutual_information: f64,
    pub best_r2: f64,
    pub best_rmse: f64,
    pub best_accuracy: f64,
    pub best_log_likelihood: f64,
    pub target_entropy: f64,
}

/// A loaded dataset.
pub struct LeanDataset {
    inner: Dataset,
}

/// Early-termination state for one training run.
pub struct LeanMonitor {
    inner: Monitor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LeanStatus {
    match err {
        e if e.is_solver() => LeanStatus::Solver,
        Error::Io(_) => LeanStatus::Io,
        Error::Csv(_)
        | Error::RaggedRow { .. }
        | Error::NonNumeric { .. }
        | Error::AllRowsDropped
        | Error::TooFewRows { .. }
        | Error::UnknownColumn(_)
        | Error::DuplicateColumn(_)
        | Error::ConstantColumn(_)
        | Error::InsufficientRows { .. } => LeanStatus::Data,
        _ => LeanStatus::InvalidArgument,
    }
}

fn fail(status: LeanStatus, message: impl Into<String>) -> LeanStatus {
    set_last_error(message.into());
    status
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), LeanStatus>) -> LeanStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            LeanStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(LeanStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: leanml::Result<T>) -> Result<T, LeanStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), LeanStatus> {
    if p.is_null() {
        Err(fail(LeanStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, LeanStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LeanStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message for the last failed call on this thread, or NULL after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn lean_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a CSV with a header row. `target` may be NULL to use the last column.
///
/// # Safety
/// `path` and a non-NULL `target` must be NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_dataset_load_csv(
    path: *const c_char,
    target: *const c_char,
    out: *mut *mut LeanDataset,
) -> LeanStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = utf8(path, "path")?;
        let cfg = IngestConfig {
            target: if target.is_null() {
                None
            } else {
                Some(utf8(target, "target")?.to_string())
            },
            ..IngestConfig::default()
        };
        let ds = lift(load_csv(path, &cfg))?;
        *out = Box::into_raw(Box::new(LeanDataset { inner: ds }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from [`lean_dataset_load_csv`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lean_dataset_free(dataset: *mut LeanDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of rows kept after dropping incomplete ones.
///
/// # Safety
/// `dataset` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lean_dataset_rows(dataset: *const LeanDataset, out: *mut usize) -> LeanStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(out, "out")?;
        *out = (*dataset).inner.n();
        Ok(())
    })
}

/// Values a feature set against the dataset's target. Pass `features` NULL
/// to use every feature; a non-NULL array with `n_features` 0 values the
/// empty set.
///
/// # Safety
/// `dataset` must be a live handle, `features` (when non-NULL) must hold
/// `n_features` NUL-terminated strings, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_value(
    dataset: *const LeanDataset,
    features: *const *const c_char,
    n_features: usize,
    method: LeanMethod,
    out: *mut LeanValuation,
) -> LeanStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(out, "out")?;
        let ds = &(*dataset).inner;
        let names: Vec<String> = if features.is_null() {
            ds.feature_names().into_iter().map(String::from).collect()
        } else {
            (0..n_features)
                .map(|i| utf8(*features.add(i), "feature name").map(String::from))
                .collect::<Result<_, _>>()?
        };
        let cfg = SolverConfig {
            method: match method {
                LeanMethod::Dual => Method::MindDual,
                LeanMethod::Gaussian => Method::GaussianCopula,
            },
            ..SolverConfig::default()
        };
        let perf = lift(value(ds, &names, &cfg))?;
        *out = LeanValuation {
            mutual_information: perf.mi.value,
            best_r2: perf.best_r2,
            best_rmse: perf.best_rmse.unwrap_or(f64::NAN),
            best_accuracy: perf.best_accuracy.unwrap_or(f64::NAN),
            best_log_likelihood: perf.best_log_likelihood,
            target_entropy: perf.target_entropy,
        };
        Ok(())
    })
}

/// `1 − e^{−2 mi}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_best_r2(mi: f64, out: *mut f64) -> LeanStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(best_r2(mi))?;
        Ok(())
    })
}

/// Best accuracy for `n_classes` classes with the given frequencies.
///
/// # Safety
/// `frequencies` must hold `n_classes` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_best_accuracy(
    mi: f64,
    frequencies: *const f64,
    n_classes: usize,
    out: *mut f64,
) -> LeanStatus {
    guard(|| {
        non_null(frequencies, "frequencies")?;
        non_null(out, "out")?;
        let freqs = std::slice::from_raw_parts(frequencies, n_classes);
        *out = lift(best_accuracy(mi, freqs))?;
        Ok(())
    })
}

/// Entropy of the `q`-class law with top mass `a` and a flat tail.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_hbar_q(a: f64, q: usize, out: *mut f64) -> LeanStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(hbar_q(a, q))?;
        Ok(())
    })
}

/// Inverse of [`lean_hbar_q`] on `[1/q, 1]`. `h` outside `[0, ln q]` is an error.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_hbar_q_inverse(h: f64, q: usize, out: *mut f64) -> LeanStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(hbar_q_inverse(h, q, RangePolicy::Strict))?;
        Ok(())
    })
}

/// Creates a monitor that terminates once the metric beats `best_value` by
/// more than `threshold` for `patience` consecutive observations.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lean_monitor_new(
    best_value: f64,
    direction: LeanDirection,
    threshold: f64,
    patience: usize,
    out: *mut *mut LeanMonitor,
) -> LeanStatus {
    guard(|| {
        non_null(out, "out")?;
        let config = MonitorConfig {
            best_value,
            direction: match direction {
                LeanDirection::HigherIsBetter => Direction::HigherIsBetter,
                LeanDirection::LowerIsBetter => Direction::LowerIsBetter,
            },
            threshold,
            patience,
        };
        let monitor = lift(Monitor::new(config))?;
        *out = Box::into_raw(Box::new(LeanMonitor { inner: monitor }));
        Ok(())
    })
}

/// Feeds one epoch's metric; `terminate` is set once training should stop
/// and stays set afterwards.
///
/// # Safety
/// `monitor` must be a live handle and `terminate` writable.
#[no_mangle]
pub unsafe extern "C" fn lean_monitor_observe(monitor: *mut LeanMonitor, metric: f64, terminate: *mut bool) -> LeanStatus {
    guard(|| {
        non_null(monitor, "monitor")?;
        non_null(terminate, "terminate")?;
        let decision = lift((*monitor).inner.observe(metric))?;
        *terminate = matches!(decision, Decision::Terminate { .. });
        Ok(())
    })
}

/// # Safety
/// `monitor` must come from [`lean_monitor_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lean_monitor_free(monitor: *mut LeanMonitor) {
    if !monitor.is_null() {
        drop(Box::from_raw(monitor));
    }
}
