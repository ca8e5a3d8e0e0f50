//! C ABI over split ensembles.
//!
//! Ensembles are opaque handles created by `se_ensemble_train` or
//! `se_ensemble_load` and released with `se_ensemble_free`. Every fallible
//! call returns an `SeStatus`; on failure `se_last_error` describes the cause.
//! Matrices are row-major `double` arrays in original (unstandardized) units.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use split_ensemble::cluster::ClusterAssignment;
use split_ensemble::data::{Dataset, StandardizationStats};
use split_ensemble::ensemble::{Ensemble, EnsembleConfig};
use split_ensemble::math::Matrix;
use split_ensemble::{Error, ErrorClass};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeStatus {
    Ok = 0,
    Io = 1,
    Config = 2,
    Data = 3,
    Numerical = 4,
    /// Null pointer, bad UTF-8 or inconsistent sizes.
    InvalidArgument = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Training settings. Obtain defaults from `se_train_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SeTrainConfig {
    pub members: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden_units: usize,
    pub seed: u64,
}

/// Opaque trained ensemble.
pub struct SeEnsemble {
    inner: Ensemble,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SeStatus {
    match e.class() {
        ErrorClass::Io => SeStatus::Io,
        ErrorClass::Config => SeStatus::Config,
        ErrorClass::Data => SeStatus::Data,
        ErrorClass::Numerical => SeStatus::Numerical,
    }
}

enum Failure {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SeStatus::Ok
        }
        Ok(Err(Failure::Arg(m))) => {
            set_error(m);
            SeStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal error".into());
            SeStatus::Internal
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Arg("path is null".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure::Arg("path is not valid UTF-8".into()))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Arg(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle_arg<'a>(h: *const SeEnsemble) -> Result<&'a SeEnsemble, Failure> {
    h.as_ref().ok_or_else(|| Failure::Arg("ensemble handle is null".into()))
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn se_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Default training settings: 5 members, 40 epochs, batch 100, learning rate
/// 0.1, 50 hidden units, seed 0.
#[no_mangle]
pub extern "C" fn se_train_config_default() -> SeTrainConfig {
    let d = EnsembleConfig::default();
    SeTrainConfig {
        members: d.members,
        epochs: d.epochs,
        batch_size: d.batch_size,
        learning_rate: d.learning_rate,
        hidden_units: d.hidden_units,
        seed: d.seed,
    }
}

/// Trains an ensemble on `n` rows of `d` features.
///
/// `cluster_of[j]` is the cluster label of feature `j`; labels must cover
/// `0..k` without gaps. Inputs and targets are standardized internally.
///
/// # Safety
/// `x` must point to `n * d` doubles, `y` and `cluster_of` to `n` and `d`
/// values, `config` to a valid `SeTrainConfig` and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_train(
    x: *const f64,
    y: *const f64,
    n: usize,
    d: usize,
    cluster_of: *const usize,
    config: *const SeTrainConfig,
    out: *mut *mut SeEnsemble,
) -> SeStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Arg("out is null".into()));
        }
        *out = std::ptr::null_mut();
        let cfg = config.as_ref().ok_or_else(|| Failure::Arg("config is null".into()))?;
        let total = n.checked_mul(d).ok_or_else(|| Failure::Arg("n * d overflows".into()))?;
        let xs = slice_arg(x, total, "x")?;
        let ys = slice_arg(y, n, "y")?;
        let labels = slice_arg(cluster_of, d, "cluster_of")?;
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut clusters = vec![Vec::new(); k];
        for (j, &c) in labels.iter().enumerate() {
            clusters[c].push(j);
        }
        let assignment = ClusterAssignment::new(clusters, d, true)?;
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        let data = Dataset::new("ffi", Matrix::from_vec(n, d, xs.to_vec())?, ys.to_vec(), names, "y")?;
        let stats = StandardizationStats::fit(&data)?;
        let ens_cfg = EnsembleConfig {
            members: cfg.members,
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            hidden_units: cfg.hidden_units,
            seed: cfg.seed,
            parallel: false,
        };
        let inner = Ensemble::train(&stats.transform(&data)?, &assignment, &stats, &ens_cfg)?;
        *out = Box::into_raw(Box::new(SeEnsemble { inner }));
        Ok(())
    })
}

/// Loads an ensemble saved by `se_ensemble_save` or the command-line tool.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_load(dir: *const c_char, out: *mut *mut SeEnsemble) -> SeStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Arg("out is null".into()));
        }
        *out = std::ptr::null_mut();
        let inner = Ensemble::load(&path_arg(dir)?)?;
        *out = Box::into_raw(Box::new(SeEnsemble { inner }));
        Ok(())
    })
}

/// Writes the ensemble into directory `dir`, creating it if needed.
///
/// # Safety
/// `ensemble` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_save(ensemble: *const SeEnsemble, dir: *const c_char) -> SeStatus {
    guard(|| {
        let h = handle_arg(ensemble)?;
        h.inner.save(&path_arg(dir)?)?;
        Ok(())
    })
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_clusters(ensemble: *const SeEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |h| h.inner.k())
}

/// Number of input features, or 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_features(ensemble: *const SeEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |h| h.inner.d())
}

/// Predicts `n` rows. Writes `n` means to `mean_out` and `n * k` per-cluster
/// variances (row-major) to `variance_out`.
///
/// # Safety
/// `x` must point to `n * d` doubles, `mean_out` to `n` and `variance_out` to
/// `n * k` writable doubles, where `d` and `k` are the handle's sizes.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_predict(
    ensemble: *const SeEnsemble,
    x: *const f64,
    n: usize,
    mean_out: *mut f64,
    variance_out: *mut f64,
) -> SeStatus {
    guard(|| {
        let h = handle_arg(ensemble)?;
        let (d, k) = (h.inner.d(), h.inner.k());
        let total = n.checked_mul(d).ok_or_else(|| Failure::Arg("n * d overflows".into()))?;
        let xs = slice_arg(x, total, "x")?;
        if n > 0 && (mean_out.is_null() || variance_out.is_null()) {
            return Err(Failure::Arg("output buffer is null".into()));
        }
        let preds = h.inner.predict_batch(&Matrix::from_vec(n, d, xs.to_vec())?)?;
        for (i, p) in preds.iter().enumerate() {
            *mean_out.add(i) = p.mean;
            for (c, v) in p.variances.iter().enumerate() {
                *variance_out.add(i * k + c) = *v;
            }
        }
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `ensemble` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn se_ensemble_free(ensemble: *mut SeEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}
