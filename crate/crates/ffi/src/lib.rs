//! C ABI over `loftune`.
//!
//! Every fallible function returns an [`LtStatus`]; on failure a message is
//! kept per thread and read back with [`lt_last_error`]. Models are opaque
//! [`LtModel`] handles released with [`lt_model_free`]. Matrices are
//! row-major `n x p` arrays of `double`, label and flag arrays are one byte
//! per row with nonzero meaning anomaly.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use loftune::eval::{f1_score, roc_auc};
use loftune::lof::lof_train_scores;
use loftune::nct::{noncentral_t_cdf, NctParams};
use loftune::projection::make_projection;
use loftune::{load_model, save_model, tune, tune_with_projection, Dataset, Error, TunedModel, TuningGrid};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad shape, non-finite value or out-of-range parameter.
    InvalidArgument = 2,
    /// Grid contamination too small or large for the number of rows.
    Infeasible = 3,
    /// Metric undefined for the given labels.
    OneClass = 4,
    Io = 5,
    /// Model file unreadable or inconsistent.
    BadModel = 6,
    Panic = 7,
}

/// Opaque tuned model.
pub struct LtModel {
    inner: TunedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> LtStatus {
    match err {
        Error::GridInfeasible { .. }
        | Error::ContaminationTooLarge { .. }
        | Error::ContaminationTooSmall { .. } => LtStatus::Infeasible,
        Error::OneClassOnly => LtStatus::OneClass,
        Error::Io(_) => LtStatus::Io,
        Error::DeserializeFailure { .. } | Error::InvariantViolation(_) => LtStatus::BadModel,
        _ => LtStatus::InvalidArgument,
    }
}

struct Failure(LtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LtStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LtStatus::Panic
        }
    }
}

unsafe fn view<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn view_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn dataset(data: *const f64, n: usize, p: usize) -> Result<Dataset, Failure> {
    let len = n
        .checked_mul(p)
        .ok_or_else(|| Failure(LtStatus::InvalidArgument, "n * p overflows".into()))?;
    let values = view(data, len, "data")?;
    Ok(Dataset::from_flat(values.to_vec(), n, p)?)
}

unsafe fn model_ref<'a>(model: *const LtModel) -> Result<&'a TunedModel, Failure> {
    model.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn path_of(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(LtStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn grid(cs: *const f64, n_c: usize, ks: *const usize, n_k: usize) -> Result<TuningGrid, Failure> {
    let cs = view(cs, n_c, "contaminations")?.to_vec();
    let ks = view(ks, n_k, "neighborhood sizes")?.to_vec();
    Ok(TuningGrid::new(cs, ks)?)
}

unsafe fn emit(out: *mut *mut LtModel, model: TunedModel) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(LtModel { inner: model }));
    Ok(())
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = value;
    Ok(())
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Tunes `(c, k)` on `n x p` training rows over the given grid.
///
/// # Safety
/// `data` must hold `n * p` doubles, `cs` `n_c` doubles, `ks` `n_k` values
/// and `out` must be writable. On success `*out` owns a new model.
#[no_mangle]
pub unsafe extern "C" fn lt_tune(
    data: *const f64,
    n: usize,
    p: usize,
    cs: *const f64,
    n_c: usize,
    ks: *const usize,
    n_k: usize,
    out: *mut *mut LtModel,
) -> LtStatus {
    guard(|| {
        let data = dataset(data, n, p)?;
        let model = tune(&data, &grid(cs, n_c, ks, n_k)?)?;
        emit(out, model)
    })
}

/// Like [`lt_tune`] after projecting the rows to `project_dim` dimensions
/// with the Gaussian projection seeded by `seed`.
///
/// # Safety
/// Same as [`lt_tune`].
#[no_mangle]
pub unsafe extern "C" fn lt_tune_projected(
    data: *const f64,
    n: usize,
    p: usize,
    cs: *const f64,
    n_c: usize,
    ks: *const usize,
    n_k: usize,
    project_dim: usize,
    seed: u64,
    out: *mut *mut LtModel,
) -> LtStatus {
    guard(|| {
        let data = dataset(data, n, p)?;
        let spec = make_projection(p, project_dim, seed)?;
        let model = tune_with_projection(&data, &grid(cs, n_c, ks, n_k)?, spec)?;
        emit(out, model)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lt_model_free(model: *mut LtModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_model_load(path: *const c_char, out: *mut *mut LtModel) -> LtStatus {
    guard(|| {
        let model = load_model(path_of(path)?)?;
        emit(out, model)
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lt_model_save(model: *const LtModel, path: *const c_char) -> LtStatus {
    guard(|| Ok(save_model(model_ref(model)?, path_of(path)?)?))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_model_k_opt(model: *const LtModel, out: *mut usize) -> LtStatus {
    guard(|| put(out, model_ref(model)?.k_opt()))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_model_c_opt(model: *const LtModel, out: *mut f64) -> LtStatus {
    guard(|| put(out, model_ref(model)?.c_opt()))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_model_threshold(model: *const LtModel, out: *mut f64) -> LtStatus {
    guard(|| put(out, model_ref(model)?.threshold()))
}

/// Number of columns the model expects from callers (before projection).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_model_input_dim(model: *const LtModel, out: *mut usize) -> LtStatus {
    guard(|| put(out, model_ref(model)?.input_dim()))
}

/// Novelty LOF of each of `n` query rows into `scores[n]`.
///
/// # Safety
/// `data` must hold `n * p` doubles and `scores` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn lt_model_score(
    model: *const LtModel,
    data: *const f64,
    n: usize,
    p: usize,
    scores: *mut f64,
) -> LtStatus {
    guard(|| {
        let model = model_ref(model)?;
        let queries = dataset(data, n, p)?;
        let out = view_mut(scores, n, "scores")?;
        out.copy_from_slice(&model.score(&queries)?);
        Ok(())
    })
}

/// Anomaly flags (1 or 0) of each of `n` query rows into `flags[n]`.
///
/// # Safety
/// `data` must hold `n * p` doubles and `flags` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn lt_model_predict(
    model: *const LtModel,
    data: *const f64,
    n: usize,
    p: usize,
    flags: *mut u8,
) -> LtStatus {
    guard(|| {
        let model = model_ref(model)?;
        let queries = dataset(data, n, p)?;
        let out = view_mut(flags, n, "flags")?;
        for (o, f) in out.iter_mut().zip(model.predict(&queries)?) {
            *o = u8::from(f);
        }
        Ok(())
    })
}

/// LOF of every training row at neighborhood size `k` into `scores[n]`.
///
/// # Safety
/// `data` must hold `n * p` doubles and `scores` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn lt_lof_scores(
    data: *const f64,
    n: usize,
    p: usize,
    k: usize,
    scores: *mut f64,
) -> LtStatus {
    guard(|| {
        let fitted = lof_train_scores(&dataset(data, n, p)?, k)?;
        view_mut(scores, n, "scores")?.copy_from_slice(&fitted.scores);
        Ok(())
    })
}

/// P(T < x) for a noncentral t with `df` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lt_noncentral_t_cdf(x: f64, df: f64, ncp: f64, out: *mut f64) -> LtStatus {
    guard(|| put(out, noncentral_t_cdf(x, NctParams::new(df, ncp)?)?))
}

unsafe fn flags(p: *const u8, n: usize, what: &str) -> Result<Vec<bool>, Failure> {
    Ok(view(p, n, what)?.iter().map(|b| *b != 0).collect())
}

/// # Safety
/// `truth` must hold `n` bytes, `scores` `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_roc_auc(truth: *const u8, scores: *const f64, n: usize, out: *mut f64) -> LtStatus {
    guard(|| {
        let truth = flags(truth, n, "truth")?;
        put(out, roc_auc(&truth, view(scores, n, "scores")?)?)
    })
}

/// # Safety
/// `truth` and `predicted` must hold `n` bytes each, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_f1_score(truth: *const u8, predicted: *const u8, n: usize, out: *mut f64) -> LtStatus {
    guard(|| {
        let truth = flags(truth, n, "truth")?;
        put(out, f1_score(&truth, &flags(predicted, n, "predicted")?)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_codes() {
        assert_eq!(status_of(&Error::OneClassOnly), LtStatus::OneClass);
        assert_eq!(
            status_of(&Error::GridInfeasible { c: 0.01, n: 10, m: 0 }),
            LtStatus::Infeasible
        );
        assert_eq!(status_of(&Error::InvariantViolation("x".into())), LtStatus::BadModel);
        assert_eq!(status_of(&Error::EmptyDataset), LtStatus::InvalidArgument);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), LtStatus::Panic);
        assert!(unsafe { CStr::from_ptr(lt_last_error()) }.to_str().unwrap().contains("boom"));
    }
}
