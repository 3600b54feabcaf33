//! C interface to the structure learners.
//!
//! Models live behind opaque handles created by the `ggm_model_*`
//! constructors and released with [`ggm_model_free`]. Every fallible call
//! returns a [`GgmStatus`]; the message for the most recent failure on the
//! calling thread is available from [`ggm_last_error_message`].
//!
//! Matrices cross the boundary as row-major `double` buffers of length
//! `n*n`. Estimated graphs are row-major `uint8_t` buffers where entry
//! `(i, j)` is 1 iff `j` is in the estimated neighborhood of `i`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nalgebra::DMatrix;

use ggm_core::experiment::score_partial;
use ggm_core::mit::{baseline_fb_greedy, mit_select_neighborhood, MitConfig};
use ggm_core::model::{build_named, generate_random_walk_summable};
use ggm_core::sampler::sample_covariance;
use ggm_core::threshold::{learn_graph, Pipeline, PruneLevel, ThresholdConfig};
use ggm_core::{CovarianceKind, CovarianceView, GgmError, GgmModel, OrderedIndexSet, ParamBox, Topology};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    SingularConditioning = 4,
    NotPositiveDefinite = 5,
    GenerationFailed = 6,
    Degenerate = 7,
    Config = 8,
    Io = 9,
    Parse = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgmTopology {
    Chain = 0,
    Star = 1,
    Grid = 2,
    Diamond = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgmParamBox {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub delta_max: usize,
}

/// Options for [`ggm_learn_threshold`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgmThresholdOptions {
    /// Slack below the population bound; negative selects half the bound.
    pub epsilon: f64,
    /// Absolute pruning level; non-positive selects `nu * a`.
    pub tau_p: f64,
    pub nu: f64,
    pub triangle_free: bool,
    pub prune: bool,
    pub symmetry: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgmMetrics {
    pub success_rate: f64,
    pub accuracy: f64,
}

/// Opaque model handle.
pub struct GgmModelHandle {
    model: GgmModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &GgmError) -> GgmStatus {
    match err {
        GgmError::Dimension { .. } | GgmError::Shape { .. } | GgmError::UnsupportedSize { .. } => GgmStatus::Dimension,
        GgmError::SingularConditioning { .. } => GgmStatus::SingularConditioning,
        GgmError::NotPositiveDefinite { .. } => GgmStatus::NotPositiveDefinite,
        GgmError::GenerationFailed { .. } => GgmStatus::GenerationFailed,
        GgmError::DegenerateDistribution { .. } | GgmError::PerfectCorrelation { .. } => GgmStatus::Degenerate,
        GgmError::Config(_) | GgmError::OracleMisuse => GgmStatus::Config,
        GgmError::Io(_) => GgmStatus::Io,
        GgmError::Parse(_) => GgmStatus::Parse,
        GgmError::Round { source, .. } => status_of(source),
        _ => GgmStatus::InvalidArgument,
    }
}

fn fail(status: GgmStatus, msg: impl Into<String>) -> GgmStatus {
    set_last_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), GgmStatus>) -> GgmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GgmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(GgmStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: ggm_core::Result<T>) -> Result<T, GgmStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn model_ref<'a>(h: *const GgmModelHandle) -> Result<&'a GgmModel, GgmStatus> {
    if h.is_null() {
        return Err(fail(GgmStatus::NullPointer, "null model handle"));
    }
    Ok(&(*h).model)
}

unsafe fn put_model(out: *mut *mut GgmModelHandle, model: GgmModel) {
    *out = Box::into_raw(Box::new(GgmModelHandle { model }));
}

unsafe fn read_matrix(data: *const f64, n: usize) -> Result<DMatrix<f64>, GgmStatus> {
    if data.is_null() {
        return Err(fail(GgmStatus::NullPointer, "null matrix buffer"));
    }
    if n == 0 {
        return Err(fail(GgmStatus::Dimension, "dimension must be positive"));
    }
    let len = n
        .checked_mul(n)
        .ok_or_else(|| fail(GgmStatus::Dimension, "dimension overflows"))?;
    Ok(DMatrix::from_row_slice(n, n, std::slice::from_raw_parts(data, len)))
}

unsafe fn read_view(data: *const f64, n: usize, samples: usize) -> Result<CovarianceView, GgmStatus> {
    let m = read_matrix(data, n)?;
    let kind = if samples == 0 {
        CovarianceKind::Exact
    } else {
        CovarianceKind::Empirical { samples }
    };
    lift(CovarianceView::new(m, kind))
}

unsafe fn write_matrix(m: &DMatrix<f64>, out: *mut f64, len: usize) -> Result<(), GgmStatus> {
    if out.is_null() {
        return Err(fail(GgmStatus::NullPointer, "null output buffer"));
    }
    let n = m.nrows();
    if len < n * n {
        return Err(fail(
            GgmStatus::BufferTooSmall,
            format!("need {} entries, got {len}", n * n),
        ));
    }
    let buf = std::slice::from_raw_parts_mut(out, n * n);
    for i in 0..n {
        for j in 0..n {
            buf[i * n + j] = m[(i, j)];
        }
    }
    Ok(())
}

unsafe fn write_sets(sets: &[OrderedIndexSet], out: *mut u8) -> Result<(), GgmStatus> {
    if out.is_null() {
        return Err(fail(GgmStatus::NullPointer, "null adjacency buffer"));
    }
    let n = sets.len();
    let buf = std::slice::from_raw_parts_mut(out, n * n);
    buf.fill(0);
    for (i, s) in sets.iter().enumerate() {
        for j in s.iter() {
            buf[i * n + j] = 1;
        }
    }
    Ok(())
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, GgmStatus> {
    if path.is_null() {
        return Err(fail(GgmStatus::NullPointer, "null path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(GgmStatus::InvalidArgument, "path is not UTF-8"))
}

fn to_box(pb: &GgmParamBox) -> Result<ParamBox, GgmStatus> {
    lift(ParamBox::new(pb.alpha, pb.a, pb.b, pb.d_min, pb.d_max, pb.delta_max))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ggm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Random walk-summable model drawn from the given parameter box.
///
/// # Safety
/// `params` must point to a valid `GgmParamBox` and `out` to writable
/// storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_random(
    n: usize,
    params: *const GgmParamBox,
    triangle_free: bool,
    seed: u64,
    out: *mut *mut GgmModelHandle,
) -> GgmStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return Err(fail(GgmStatus::NullPointer, "null argument"));
        }
        let pb = to_box(&*params)?;
        put_model(out, lift(generate_random_walk_summable(n, &pb, triangle_free, seed))?);
        Ok(())
    })
}

/// Named topology with one weight on every edge; `size` is the side length
/// for grids.
///
/// # Safety
/// `out` must point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_named(
    topology: GgmTopology,
    size: usize,
    weight: f64,
    diag: f64,
    out: *mut *mut GgmModelHandle,
) -> GgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(GgmStatus::NullPointer, "null argument"));
        }
        let t = match topology {
            GgmTopology::Chain => Topology::Chain,
            GgmTopology::Star => Topology::Star,
            GgmTopology::Grid => Topology::Grid,
            GgmTopology::Diamond => Topology::Diamond,
        };
        put_model(out, lift(build_named(t, size, weight, diag))?);
        Ok(())
    })
}

/// Model from a row-major `n*n` precision matrix.
///
/// # Safety
/// `precision` must point to `n*n` readable doubles and `out` to writable
/// storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_from_precision(
    precision: *const f64,
    n: usize,
    out: *mut *mut GgmModelHandle,
) -> GgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(GgmStatus::NullPointer, "null argument"));
        }
        let j = read_matrix(precision, n)?;
        put_model(out, lift(GgmModel::from_precision(j, None, None, "external"))?);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` must point to writable
/// storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_load(path: *const c_char, out: *mut *mut GgmModelHandle) -> GgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(GgmStatus::NullPointer, "null argument"));
        }
        let p = path_arg(path)?;
        put_model(out, lift(GgmModel::load(p))?);
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_save(model: *const GgmModelHandle, path: *const c_char) -> GgmStatus {
    guard(|| {
        let m = model_ref(model)?;
        lift(m.save(path_arg(path)?))
    })
}

/// # Safety
/// `model` must be NULL or a handle returned by this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_free(model: *mut GgmModelHandle) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimension of the model, or 0 for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_dim(model: *const GgmModelHandle) -> usize {
    if model.is_null() {
        0
    } else {
        (*model).model.dim()
    }
}

/// # Safety
/// `model` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_precision(model: *const GgmModelHandle, out: *mut f64, len: usize) -> GgmStatus {
    guard(|| write_matrix(model_ref(model)?.precision(), out, len))
}

/// # Safety
/// `model` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_covariance(model: *const GgmModelHandle, out: *mut f64, len: usize) -> GgmStatus {
    guard(|| write_matrix(model_ref(model)?.covariance(), out, len))
}

/// True graph of the model as an `n*n` adjacency buffer.
///
/// # Safety
/// `model` must be a live handle and `out` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ggm_model_adjacency(model: *const GgmModelHandle, out: *mut u8, len: usize) -> GgmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let n = m.dim();
        if len < n * n {
            return Err(fail(
                GgmStatus::BufferTooSmall,
                format!("need {} entries, got {len}", n * n),
            ));
        }
        write_sets(m.neighborhoods(), out)
    })
}

/// Empirical covariance of `count` seeded samples from the model.
///
/// # Safety
/// `model` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ggm_sample_covariance(
    model: *const GgmModelHandle,
    count: usize,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> GgmStatus {
    guard(|| {
        let m = model_ref(model)?;
        let view = lift(sample_covariance(m, count, seed, 0))?;
        write_matrix(view.entries(), out, len)
    })
}

/// Thresholding learner over every node. `samples` is 0 for an exact
/// covariance. `out` receives the `n*n` estimated adjacency.
///
/// # Safety
/// `cov` must point to `n*n` readable doubles, `params` and `options` to
/// valid structs, and `out` to `n*n` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ggm_learn_threshold(
    cov: *const f64,
    n: usize,
    samples: usize,
    params: *const GgmParamBox,
    options: *const GgmThresholdOptions,
    out: *mut u8,
) -> GgmStatus {
    guard(|| {
        if params.is_null() || options.is_null() {
            return Err(fail(GgmStatus::NullPointer, "null argument"));
        }
        let view = read_view(cov, n, samples)?;
        let opts = &*options;
        let mut cfg = ThresholdConfig::new(to_box(&*params)?, opts.triangle_free);
        if opts.epsilon >= 0.0 {
            cfg.epsilon = Some(opts.epsilon);
        }
        cfg.prune = if opts.tau_p > 0.0 {
            PruneLevel::Absolute(opts.tau_p)
        } else {
            PruneLevel::Fraction(opts.nu)
        };
        let pipeline = Pipeline {
            prune: opts.prune,
            symmetry: opts.symmetry,
        };
        let est = lift(learn_graph(&view, &cfg, None, pipeline))?;
        let sets: Vec<OrderedIndexSet> = est.into_iter().map(|e| e.members).collect();
        write_sets(&sets, out)
    })
}

/// Forward-backward MI learner over every node with forward threshold
/// `epsilon_f` in nats.
///
/// # Safety
/// `cov` must point to `n*n` readable doubles and `out` to `n*n` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ggm_learn_mit(
    cov: *const f64,
    n: usize,
    samples: usize,
    epsilon_f: f64,
    nu: f64,
    out: *mut u8,
) -> GgmStatus {
    guard(|| {
        let view = read_view(cov, n, samples)?;
        let cfg = lift(MitConfig::new(epsilon_f, nu))?;
        let sets = (0..n)
            .map(|i| lift(mit_select_neighborhood(&view, i, &cfg)).map(|e| e.members))
            .collect::<Result<Vec<_>, _>>()?;
        write_sets(&sets, out)
    })
}

/// Forward-backward greedy regression over every node with loss threshold
/// `epsilon_s`.
///
/// # Safety
/// `cov` must point to `n*n` readable doubles and `out` to `n*n` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ggm_learn_baseline(
    cov: *const f64,
    n: usize,
    samples: usize,
    epsilon_s: f64,
    nu: f64,
    out: *mut u8,
) -> GgmStatus {
    guard(|| {
        let view = read_view(cov, n, samples)?;
        let sets = (0..n)
            .map(|i| lift(baseline_fb_greedy(&view, i, epsilon_s, nu, None)).map(|e| e.members))
            .collect::<Result<Vec<_>, _>>()?;
        write_sets(&sets, out)
    })
}

/// Score an `n*n` estimated adjacency against the model's graph. Row `i` is
/// the estimated neighborhood of node `i`.
///
/// # Safety
/// `model` must be a live handle, `adjacency` must point to `len` readable
/// bytes and `out` to a writable `GgmMetrics`.
#[no_mangle]
pub unsafe extern "C" fn ggm_score(
    model: *const GgmModelHandle,
    adjacency: *const u8,
    len: usize,
    out: *mut GgmMetrics,
) -> GgmStatus {
    guard(|| {
        let m = model_ref(model)?;
        if adjacency.is_null() || out.is_null() {
            return Err(fail(GgmStatus::NullPointer, "null argument"));
        }
        let n = m.dim();
        if len != n * n {
            return Err(fail(
                GgmStatus::Dimension,
                format!("expected {} entries, got {len}", n * n),
            ));
        }
        let buf = std::slice::from_raw_parts(adjacency, len);
        let sets: Vec<Option<OrderedIndexSet>> = (0..n)
            .map(|i| Some((0..n).filter(|&j| buf[i * n + j] != 0).collect()))
            .collect();
        let metrics = lift(score_partial(m, &sets))?;
        *out = GgmMetrics {
            success_rate: metrics.success_rate,
            accuracy: metrics.accuracy,
        };
        Ok(())
    })
}
