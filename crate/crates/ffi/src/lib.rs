//! C ABI over sbmlab.
//!
//! Every fallible call returns an [`SbmStatus`]; on failure the message is
//! kept per thread and read back with [`sbm_last_error`]. Graphs are opaque
//! handles released with [`sbm_graph_free`]. Status values match the CLI
//! exit codes where one exists.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sbmlab::certificate::{default_lambda_grid, failure_witness_stats, lambda_sweep, BlockProbabilities};
use sbmlab::sdp::{
    build_asym_sdp, build_sym_sdp, compare_with_truth, planted_asym, planted_sym, solve, MleWeights,
    SolverOptions, Status,
};
use sbmlab::threshold::{boundary_alpha, find_witness, it_value, Rates};
use sbmlab::{best_swap, sample, Assignment, Error, LabeledGraph, ModelParams, SampleConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbmStatus {
    Ok = 0,
    InvalidInput = 2,
    NotConverged = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Opaque labelled graph.
pub struct SbmGraph(LabeledGraph);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbmProblem {
    Sym = 0,
    Asym = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SbmThreshold {
    pub value: f64,
    pub argmax_t: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SbmWitness {
    pub found: bool,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub slope: f64,
    pub gap: f64,
    pub delta: f64,
    pub epsilon: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SbmSwap {
    pub i: usize,
    pub j: usize,
    /// Change in the partition objective; positive means improving.
    pub delta: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SbmSdpSummary {
    /// 0 converged, 1 iteration limit, 2 infeasible.
    pub status: i32,
    pub iterations: usize,
    pub objective: f64,
    pub planted_objective: f64,
    /// NaN unless converged.
    pub gap: f64,
    /// NaN unless converged.
    pub relative_distance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SbmCertificateSummary {
    pub valid: bool,
    pub valid_lambdas: usize,
    pub grid_size: usize,
    pub best_lambda: f64,
    pub eta: f64,
    pub h_min: f64,
    pub b_min: f64,
    pub lambda2: f64,
    pub failure_statistic: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SbmStatus {
    match e.exit_code() {
        2 => SbmStatus::InvalidInput,
        3 => SbmStatus::NotConverged,
        _ => SbmStatus::Io,
    }
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), (SbmStatus, String)>) -> SbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SbmStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SbmStatus::Panic
        }
    }
}

fn lib<T>(r: sbmlab::Result<T>) -> Result<T, (SbmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SbmStatus, String) {
    (SbmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SbmStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn graph_ref<'a>(g: *const SbmGraph) -> Result<&'a LabeledGraph, (SbmStatus, String)> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, (SbmStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (SbmStatus::InvalidInput, "path is not UTF-8".into()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn sbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Sample `SBM(n, α1, α2, β)` with the first `n/2` vertices in community 1.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_sample(
    n: usize,
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    seed: u64,
    out: *mut *mut SbmGraph,
) -> SbmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let params = lib(ModelParams::new(n, alpha1, alpha2, beta))?;
        let cfg = SampleConfig {
            params,
            seed,
            assignment: Assignment::FirstHalf,
        };
        let g = lib(sample(&cfg))?;
        *out = Box::into_raw(Box::new(SbmGraph(g)));
        Ok(())
    })
}

/// Read a graph in the text format.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_read(path: *const c_char, out: *mut *mut SbmGraph) -> SbmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let path = path_arg(path)?;
        let f = lib(File::open(&path).map_err(|e| Error::io(&path, e)))?;
        let g = lib(LabeledGraph::read_text(BufReader::new(f)))?;
        *out = Box::into_raw(Box::new(SbmGraph(g)));
        Ok(())
    })
}

/// Write a graph in the text format.
///
/// # Safety
/// `g` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_write(g: *const SbmGraph, path: *const c_char) -> SbmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let path = path_arg(path)?;
        let f = lib(File::create(&path).map_err(|e| Error::io(&path, e)))?;
        lib(g.write_text(BufWriter::new(f)).map_err(|e| Error::io(&path, e)))
    })
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_free(g: *mut SbmGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, or 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_n(g: *const SbmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// Edge count, or 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_edge_count(g: *const SbmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Copy the ±1 planted labels into `labels[0..len]`; `len` must equal n.
///
/// # Safety
/// `labels` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sbm_graph_labels(g: *const SbmGraph, labels: *mut i8, len: usize) -> SbmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if labels.is_null() {
            return Err(null("labels"));
        }
        if len != g.n() {
            return Err((SbmStatus::InvalidInput, format!("len {len} != n {}", g.n())));
        }
        std::slice::from_raw_parts_mut(labels, len).copy_from_slice(g.truth().as_slice());
        Ok(())
    })
}

/// Threshold value `IT(α1, α2, β)` and its maximiser.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbm_it_value(alpha1: f64, alpha2: f64, beta: f64, out: *mut SbmThreshold) -> SbmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let e = lib(it_value(alpha1, alpha2, beta))?;
        *out = SbmThreshold {
            value: e.value,
            argmax_t: e.argmax_t,
        };
        Ok(())
    })
}

/// The `α1` with `IT(α1, alpha2, β) = 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbm_boundary_alpha(beta: f64, alpha2: f64, out: *mut f64) -> SbmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(boundary_alpha(beta, alpha2))?;
        Ok(())
    })
}

/// Witness pair of cloud extremes; `found` is false when the clouds are
/// separated by `x = y`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbm_find_witness(alpha1: f64, alpha2: f64, beta: f64, out: *mut SbmWitness) -> SbmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = lib(Rates::new(alpha1, alpha2, beta))?;
        *out = match lib(find_witness(&r))? {
            Some(w) => SbmWitness {
                found: true,
                x1: w.p1.x,
                y1: w.p1.y,
                x2: w.p2.x,
                y2: w.p2.y,
                slope: w.slope,
                gap: w.gap,
                delta: w.delta,
                epsilon: w.epsilon,
            },
            None => SbmWitness::default(),
        };
        Ok(())
    })
}

/// Best single swap at the planted labelling.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbm_best_swap(g: *const SbmGraph, out: *mut SbmSwap) -> SbmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let out = out_ref(out, "out")?;
        let b = lib(best_swap(g, g.truth()))?;
        *out = SbmSwap {
            i: b.i,
            j: b.j,
            delta: b.delta,
        };
        Ok(())
    })
}

/// Solve a relaxation. Rates are used only for [`SbmProblem::Asym`];
/// `tol <= 0` and `max_iter == 0` keep the solver defaults. When `matrix`
/// is non-null it receives the n×n solution in row-major order. A
/// non-converged solve fills `out` and returns `NotConverged`.
///
/// # Safety
/// `g` must be a live handle, `out` valid, and `matrix` null or `n*n`
/// writable doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sbm_sdp_solve(
    g: *const SbmGraph,
    problem: SbmProblem,
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    tol: f64,
    max_iter: usize,
    out: *mut SbmSdpSummary,
    matrix: *mut f64,
) -> SbmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let out = out_ref(out, "out")?;
        let n = g.n();
        let (p, target) = match problem {
            SbmProblem::Sym => (build_sym_sdp(g), planted_sym(g.truth())),
            SbmProblem::Asym => {
                let w = lib(ModelParams::new(n, alpha1, alpha2, beta).and_then(|m| MleWeights::from_params(&m)))?;
                (lib(build_asym_sdp(g, &w))?, planted_asym(g.truth(), &w))
            }
        };
        let mut opts = SolverOptions::for_order(n);
        if tol > 0.0 {
            opts.tol_feas = tol;
        }
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        let sol = lib(solve(&p, &opts))?;
        let cmp = compare_with_truth(&sol, &p, &target).ok();
        *out = SbmSdpSummary {
            status: match sol.status {
                Status::Converged => 0,
                Status::IterLimit => 1,
                Status::Infeasible => 2,
            },
            iterations: sol.iterations,
            objective: sol.objective_value,
            planted_objective: p.objective.inner(&target),
            gap: cmp.map_or(f64::NAN, |c| c.gap),
            relative_distance: cmp.map_or(f64::NAN, |c| c.relative_distance),
        };
        if !matrix.is_null() {
            std::slice::from_raw_parts_mut(matrix, n * n).copy_from_slice(sol.matrix.as_slice());
        }
        if sol.status != Status::Converged {
            return Err((
                SbmStatus::NotConverged,
                format!("{:?} after {} iterations", sol.status, sol.iterations),
            ));
        }
        Ok(())
    })
}

/// Dual certificate sweep over the default λ grid.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbm_certificate(
    g: *const SbmGraph,
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    tol: f64,
    out: *mut SbmCertificateSummary,
) -> SbmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let out = out_ref(out, "out")?;
        let params = lib(ModelParams::new(g.n(), alpha1, alpha2, beta))?;
        let w = lib(MleWeights::from_params(&params))?;
        let probs = BlockProbabilities::from(&params);
        let grid = default_lambda_grid(g);
        let sweep = lib(lambda_sweep(g, &w, &probs, &grid, tol))?;
        let fail = lib(failure_witness_stats(g, &w, &probs))?;
        let b = sweep.best;
        *out = SbmCertificateSummary {
            valid: b.valid,
            valid_lambdas: sweep.reports.iter().filter(|r| r.valid).count(),
            grid_size: grid.len(),
            best_lambda: b.lambda,
            eta: b.eta,
            h_min: b.h_min,
            b_min: b.b_min,
            lambda2: b.lambda2,
            failure_statistic: fail.statistic,
        };
        Ok(())
    })
}
