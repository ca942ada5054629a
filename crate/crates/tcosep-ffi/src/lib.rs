//! C ABI for the tcosep library.
//!
//! Conventions:
//! - tensors and models are opaque handles created and freed here;
//! - every fallible call returns a [`TcosepStatus`]; on failure a
//!   thread-local message is readable via `tcosep_last_error_message`
//!   until the next call on that thread;
//! - indices crossing this boundary are 0-based;
//! - tensor entry buffers use the library storage order: frontal slice
//!   outermost, then row-major within a slice.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use tcosep::{
    cosntf_select, gen_synthetic, hybrid_select, recover_factors, reconstruct, rel_error, tprod,
    tsvd, CosepModel, CosntfOptions, DeimPairing, DistKind, FgmParams, IndexList, Mode,
    RecoverOptions, SynthSpec, TcurDeimOptions, Tensor3,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TcosepStatus {
    TcosepOk = 0,
    /// A required pointer argument was null.
    TcosepNullArgument = 1,
    /// Sizes, indices or parameters were rejected.
    TcosepInvalidArgument = 2,
    /// The computation itself failed; see `tcosep_last_error_message`.
    TcosepRuntimeError = 3,
}

use TcosepStatus::*;

thread_local! {
    static LAST_ERROR: std::cell::RefCell<CString> =
        std::cell::RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn fail(status: TcosepStatus, msg: &str) -> TcosepStatus {
    set_error(msg);
    status
}

/// Message describing the most recent failure on this thread. The
/// pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn tcosep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque dense real third-order tensor.
pub struct TcosepTensor(Tensor3);

/// Opaque recovered coseparable model.
pub struct TcosepModel(CosepModel);

fn guarded(body: impl FnOnce() -> TcosepStatus) -> TcosepStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(TcosepRuntimeError, "internal panic"),
    }
}

unsafe fn tensor_ref<'a>(t: *const TcosepTensor) -> Option<&'a Tensor3> {
    t.as_ref().map(|t| &t.0)
}

fn export_tensor(t: Tensor3, out: *mut *mut TcosepTensor) -> TcosepStatus {
    unsafe {
        *out = Box::into_raw(Box::new(TcosepTensor(t)));
    }
    TcosepOk
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, TcosepStatus> {
    if ptr.is_null() {
        return Err(TcosepNullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(TcosepInvalidArgument)
        }
    }
}

/// Creates an `m × n × p` tensor from `len = m·n·p` entries in storage
/// order. The entries are copied.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be a valid
/// output slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tensor_create(
    m: usize,
    n: usize,
    p: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut TcosepTensor,
) -> TcosepStatus {
    if data.is_null() || out.is_null() {
        return fail(TcosepNullArgument, "null data or output pointer");
    }
    let values = std::slice::from_raw_parts(data, len).to_vec();
    guarded(|| match Tensor3::new(m, n, p, values) {
        Ok(t) => export_tensor(t, out),
        Err(e) => fail(TcosepInvalidArgument, &e.to_string()),
    })
}

/// Frees a tensor handle; a null pointer is ignored.
///
/// # Safety
/// `t` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tensor_free(t: *mut TcosepTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Writes the dimensions of `t` into `m`, `n`, `p`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tensor_dims(
    t: *const TcosepTensor,
    m: *mut usize,
    n: *mut usize,
    p: *mut usize,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if m.is_null() || n.is_null() || p.is_null() {
        return fail(TcosepNullArgument, "null dimension output");
    }
    let (dm, dn, dp) = tensor.dims();
    *m = dm;
    *n = dn;
    *p = dp;
    TcosepOk
}

/// Copies the entries of `t` (storage order) into `buf` of capacity
/// `len`, which must be exactly `m·n·p`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tensor_copy_data(
    t: *const TcosepTensor,
    buf: *mut f64,
    len: usize,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if buf.is_null() {
        return fail(TcosepNullArgument, "null buffer");
    }
    let data = tensor.as_slice();
    if data.len() != len {
        return fail(TcosepInvalidArgument, "buffer length does not match m*n*p");
    }
    std::ptr::copy_nonoverlapping(data.as_ptr(), buf, len);
    TcosepOk
}

/// Reads a `.t3t` tensor file.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tensor_read_t3t(
    path: *const c_char,
    out: *mut *mut TcosepTensor,
) -> TcosepStatus {
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    guarded(|| match tcosep::fileio::read_t3t(path) {
        Ok(t) => export_tensor(t, out),
        Err(e) => fail(TcosepRuntimeError, &e.to_string()),
    })
}

/// Writes a `.t3t` tensor file (17 significant digits; bit-exact round
/// trip).
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tensor_write_t3t(
    t: *const TcosepTensor,
    path: *const c_char,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    let path = match path_from(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    guarded(|| match tcosep::fileio::write_t3t(path, tensor) {
        Ok(()) => TcosepOk,
        Err(e) => fail(TcosepRuntimeError, &e.to_string()),
    })
}

/// Tensor t-product `a * b`.
///
/// # Safety
/// Handles must be valid; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tprod(
    a: *const TcosepTensor,
    b: *const TcosepTensor,
    out: *mut *mut TcosepTensor,
) -> TcosepStatus {
    let (Some(ta), Some(tb)) = (tensor_ref(a), tensor_ref(b)) else {
        return fail(TcosepNullArgument, "null operand");
    };
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    guarded(|| match tprod(ta, tb) {
        Ok(t) => export_tensor(t, out),
        Err(e) => fail(TcosepInvalidArgument, &e.to_string()),
    })
}

/// Tensor transpose.
///
/// # Safety
/// `t` must be valid; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_transpose(
    t: *const TcosepTensor,
    out: *mut *mut TcosepTensor,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    export_tensor(tensor.transpose(), out)
}

/// Frobenius norm of `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tcosep_fro_norm(t: *const TcosepTensor, out: *mut f64) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    *out = tensor.fro_norm();
    TcosepOk
}

/// `‖a − b‖_F / ‖a‖_F`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tcosep_rel_error(
    a: *const TcosepTensor,
    b: *const TcosepTensor,
    out: *mut f64,
) -> TcosepStatus {
    let (Some(ta), Some(tb)) = (tensor_ref(a), tensor_ref(b)) else {
        return fail(TcosepNullArgument, "null operand");
    };
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    guarded(|| match rel_error(ta, tb) {
        Ok(v) => {
            *out = v;
            TcosepOk
        }
        Err(e) => fail(TcosepInvalidArgument, &e.to_string()),
    })
}

/// t-SVD `t = W * Σ * Vᵀ`; the three factors come back as new handles.
///
/// # Safety
/// Pointers must be valid output slots.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tsvd(
    t: *const TcosepTensor,
    w: *mut *mut TcosepTensor,
    sigma: *mut *mut TcosepTensor,
    v: *mut *mut TcosepTensor,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if w.is_null() || sigma.is_null() || v.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    guarded(|| match tsvd(tensor) {
        Ok(f) => {
            export_tensor(f.w, w);
            export_tensor(f.sigma, sigma);
            export_tensor(f.v, v);
            TcosepOk
        }
        Err(e) => fail(TcosepRuntimeError, &e.to_string()),
    })
}

/// Multirank (one entry per frontal slice, buffer length `p`),
/// tubalrank and stable rank at relative tolerance `rank_tol`.
///
/// # Safety
/// `multirank` must hold `p` writable entries.
#[no_mangle]
pub unsafe extern "C" fn tcosep_ranks(
    t: *const TcosepTensor,
    rank_tol: f64,
    multirank: *mut usize,
    multirank_len: usize,
    tubalrank: *mut usize,
    stable_rank: *mut f64,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if multirank.is_null() || tubalrank.is_null() || stable_rank.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    if multirank_len != tensor.nslices() {
        return fail(TcosepInvalidArgument, "multirank buffer must have length p");
    }
    guarded(|| {
        let report = tcosep::ranks(tensor, rank_tol);
        std::ptr::copy_nonoverlapping(report.multirank.as_ptr(), multirank, multirank_len);
        *tubalrank = report.tubalrank;
        *stable_rank = report.stable_rank;
        TcosepOk
    })
}

/// Sampling distribution selector for `tcosep_tcur_deim_select`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TcosepDist {
    TcosepDistUniform = 0,
    TcosepDistSliceSize = 1,
    TcosepDistLeverage = 2,
}

/// DEIM pairing selector: 0 keeps the always-well-defined pairing
/// (W feeds rows); 1 runs the transposed pairing exactly as printed,
/// which can fail on unequal sample sets.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TcosepPairing {
    TcosepPairingSwapped = 0,
    TcosepPairingPrinted = 1,
}

unsafe fn write_selection(
    i: &IndexList,
    j: &IndexList,
    i_buf: *mut usize,
    j_buf: *mut usize,
) {
    std::ptr::copy_nonoverlapping(i.indices().as_ptr(), i_buf, i.len());
    std::ptr::copy_nonoverlapping(j.indices().as_ptr(), j_buf, j.len());
}

/// Alternating coseparable index selection; writes `r1` horizontal and
/// `r2` lateral 0-based indices.
///
/// # Safety
/// `i_out` / `j_out` must hold `r1` / `r2` writable entries.
#[no_mangle]
pub unsafe extern "C" fn tcosep_cosntf_select(
    t: *const TcosepTensor,
    r1: usize,
    r2: usize,
    delta: f64,
    max_outer: usize,
    lambda: f64,
    i_out: *mut usize,
    j_out: *mut usize,
    outer_iterations: *mut usize,
    converged: *mut bool,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if i_out.is_null() || j_out.is_null() || outer_iterations.is_null() || converged.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    let opts = CosntfOptions {
        delta,
        max_outer,
        fgm: FgmParams { lambda, ..FgmParams::default() },
    };
    guarded(|| match cosntf_select(tensor, r1, r2, &opts) {
        Ok(res) => {
            write_selection(&res.i, &res.j, i_out, j_out);
            *outer_iterations = res.outer_iterations;
            *converged = res.converged;
            TcosepOk
        }
        Err(e) => fail(TcosepRuntimeError, &e.to_string()),
    })
}

/// Randomized t-CUR-DEIM index selection.
///
/// # Safety
/// `i_out` / `j_out` must hold `r1` / `r2` writable entries.
#[no_mangle]
pub unsafe extern "C" fn tcosep_tcur_deim_select(
    t: *const TcosepTensor,
    r1: usize,
    r2: usize,
    seed: u64,
    dist: TcosepDist,
    pairing: TcosepPairing,
    i_out: *mut usize,
    j_out: *mut usize,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if i_out.is_null() || j_out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    let opts = TcurDeimOptions {
        dist: match dist {
            TcosepDist::TcosepDistUniform => DistKind::Uniform,
            TcosepDist::TcosepDistSliceSize => DistKind::SliceSize,
            TcosepDist::TcosepDistLeverage => DistKind::Leverage,
        },
        pairing: match pairing {
            TcosepPairing::TcosepPairingSwapped => DeimPairing::Swapped,
            TcosepPairing::TcosepPairingPrinted => DeimPairing::AsPrinted,
        },
    };
    guarded(|| match tcur_deim_select_shim(tensor, r1, r2, seed, &opts) {
        Ok(res) => {
            write_selection(&res.i, &res.j, i_out, j_out);
            TcosepOk
        }
        Err(e) => fail(TcosepRuntimeError, &e.to_string()),
    })
}

fn tcur_deim_select_shim(
    t: &Tensor3,
    r1: usize,
    r2: usize,
    seed: u64,
    opts: &TcurDeimOptions,
) -> tcosep::Result<tcosep::SelectionResult> {
    tcosep::tcur_deim_select(t, r1, r2, seed, opts)
}

/// Hybrid selection: uniform pre-sampling, then the alternating
/// selector on the subtensor.
///
/// # Safety
/// `i_out` / `j_out` must hold `r1` / `r2` writable entries.
#[no_mangle]
pub unsafe extern "C" fn tcosep_hybrid_select(
    t: *const TcosepTensor,
    r1: usize,
    r2: usize,
    seed: u64,
    delta: f64,
    max_outer: usize,
    lambda: f64,
    i_out: *mut usize,
    j_out: *mut usize,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if i_out.is_null() || j_out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    let opts = CosntfOptions {
        delta,
        max_outer,
        fgm: FgmParams { lambda, ..FgmParams::default() },
    };
    guarded(|| match hybrid_select(tensor, r1, r2, seed, &opts) {
        Ok(res) => {
            write_selection(&res.i, &res.j, i_out, j_out);
            TcosepOk
        }
        Err(e) => fail(TcosepRuntimeError, &e.to_string()),
    })
}

/// Recovers nonnegative factors for the core at the given 0-based
/// index sets and returns an opaque model.
///
/// # Safety
/// `i`/`j` must hold `i_len`/`j_len` readable entries; `out` is a
/// valid slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_recover_factors(
    t: *const TcosepTensor,
    i: *const usize,
    i_len: usize,
    j: *const usize,
    j_len: usize,
    max_iter: usize,
    delta: f64,
    out: *mut *mut TcosepModel,
) -> TcosepStatus {
    let Some(tensor) = tensor_ref(t) else {
        return fail(TcosepNullArgument, "null tensor");
    };
    if i.is_null() || j.is_null() || out.is_null() {
        return fail(TcosepNullArgument, "null argument");
    }
    let rows = std::slice::from_raw_parts(i, i_len).to_vec();
    let cols = std::slice::from_raw_parts(j, j_len).to_vec();
    guarded(|| {
        let (m, n, _) = tensor.dims();
        let i = match IndexList::new_distinct(Mode::Horizontal, rows.clone(), m) {
            Ok(list) => list,
            Err(e) => return fail(TcosepInvalidArgument, &e.to_string()),
        };
        let j = match IndexList::new_distinct(Mode::Lateral, cols.clone(), n) {
            Ok(list) => list,
            Err(e) => return fail(TcosepInvalidArgument, &e.to_string()),
        };
        let opts = RecoverOptions { max_iter, delta, ..RecoverOptions::default() };
        match recover_factors(tensor, &i, &j, &opts) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(TcosepModel(model)));
                TcosepOk
            }
            Err(e) => fail(TcosepRuntimeError, &e.to_string()),
        }
    })
}

/// Frees a model handle; a null pointer is ignored.
///
/// # Safety
/// `model` must be a handle from `tcosep_recover_factors`.
#[no_mangle]
pub unsafe extern "C" fn tcosep_model_free(model: *mut TcosepModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Copies out one factor of the model: 0 = P1, 1 = core, 2 = P2.
///
/// # Safety
/// `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_model_factor(
    model: *const TcosepModel,
    which: u32,
    out: *mut *mut TcosepTensor,
) -> TcosepStatus {
    let Some(model) = model.as_ref() else {
        return fail(TcosepNullArgument, "null model");
    };
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    let tensor = match which {
        0 => model.0.p1.clone(),
        1 => model.0.core.clone(),
        2 => model.0.p2.clone(),
        _ => return fail(TcosepInvalidArgument, "factor selector must be 0, 1 or 2"),
    };
    export_tensor(tensor, out)
}

/// Reconstructs `P1 * core * P2`.
///
/// # Safety
/// `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn tcosep_model_reconstruct(
    model: *const TcosepModel,
    out: *mut *mut TcosepTensor,
) -> TcosepStatus {
    let Some(model) = model.as_ref() else {
        return fail(TcosepNullArgument, "null model");
    };
    if out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    guarded(|| export_tensor(reconstruct(&model.0), out))
}

/// Generates a synthetic coseparable tensor; writes the ground-truth
/// index sets (0-based) into buffers of length `r1` and `r2`.
///
/// # Safety
/// Buffers and the output slot must be valid.
#[no_mangle]
pub unsafe extern "C" fn tcosep_gen_synthetic(
    m: usize,
    n: usize,
    p: usize,
    r1: usize,
    r2: usize,
    noise: f64,
    slice_sum: f64,
    seed: u64,
    out: *mut *mut TcosepTensor,
    i_out: *mut usize,
    j_out: *mut usize,
) -> TcosepStatus {
    if out.is_null() || i_out.is_null() || j_out.is_null() {
        return fail(TcosepNullArgument, "null output pointer");
    }
    let spec = SynthSpec { m, n, p, r1, r2, noise, slice_sum, seed };
    guarded(|| match gen_synthetic(&spec) {
        Ok(gen) => {
            write_selection(&gen.truth.i, &gen.truth.j, i_out, j_out);
            export_tensor(gen.tensor, out)
        }
        Err(e) => fail(TcosepInvalidArgument, &e.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    unsafe fn make(m: usize, n: usize, p: usize, data: &[f64]) -> *mut TcosepTensor {
        let mut out = std::ptr::null_mut();
        let status = tcosep_tensor_create(m, n, p, data.as_ptr(), data.len(), &mut out);
        assert_eq!(status, TcosepOk);
        out
    }

    #[test]
    fn create_dims_copy_free_round_trip() {
        unsafe {
            let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
            let t = make(1, 3, 2, &data);
            let (mut m, mut n, mut p) = (0, 0, 0);
            assert_eq!(tcosep_tensor_dims(t, &mut m, &mut n, &mut p), TcosepOk);
            assert_eq!((m, n, p), (1, 3, 2));
            let mut buf = [0.0; 6];
            assert_eq!(tcosep_tensor_copy_data(t, buf.as_mut_ptr(), 6), TcosepOk);
            assert_eq!(buf, data);
            assert_eq!(
                tcosep_tensor_copy_data(t, buf.as_mut_ptr(), 5),
                TcosepInvalidArgument
            );
            tcosep_tensor_free(t);
        }
    }

    #[test]
    fn invalid_construction_reports_errors() {
        unsafe {
            let mut out = std::ptr::null_mut();
            let bad = [f64::NAN];
            let status = tcosep_tensor_create(1, 1, 1, bad.as_ptr(), 1, &mut out);
            assert_eq!(status, TcosepInvalidArgument);
            let msg = CStr::from_ptr(tcosep_last_error_message());
            assert!(msg.to_str().unwrap().contains("non-finite"));
        }
    }

    #[test]
    fn tprod_and_norms_work_through_the_boundary() {
        unsafe {
            let id = {
                let mut data = vec![0.0; 9 * 2];
                data[0] = 1.0;
                data[4] = 1.0;
                data[8] = 1.0;
                make(3, 3, 2, &data)
            };
            let t = make(3, 3, 2, &(0..18).map(|v| v as f64).collect::<Vec<_>>());
            let mut prod = std::ptr::null_mut();
            assert_eq!(tcosep_tprod(id, t, &mut prod), TcosepOk);
            let mut err = f64::NAN;
            assert_eq!(tcosep_rel_error(t, prod, &mut err), TcosepOk);
            assert!(err <= 1e-12);
            tcosep_tensor_free(prod);
            tcosep_tensor_free(t);
            tcosep_tensor_free(id);
        }
    }

    #[test]
    fn full_pipeline_runs_through_the_abi() {
        unsafe {
            let mut tensor = std::ptr::null_mut();
            let mut i_buf = [0usize; 3];
            let mut j_buf = [0usize; 2];
            let status = tcosep_gen_synthetic(
                14,
                14,
                3,
                3,
                2,
                0.0,
                100.0,
                11,
                &mut tensor,
                i_buf.as_mut_ptr(),
                j_buf.as_mut_ptr(),
            );
            assert_eq!(status, TcosepOk);

            let mut sel_i = [0usize; 3];
            let mut sel_j = [0usize; 2];
            let mut iters = 0usize;
            let mut converged = false;
            let status = tcosep_cosntf_select(
                tensor,
                3,
                2,
                1e-6,
                50,
                0.25,
                sel_i.as_mut_ptr(),
                sel_j.as_mut_ptr(),
                &mut iters,
                &mut converged,
            );
            assert_eq!(status, TcosepOk);
            assert!(converged);

            let mut model = std::ptr::null_mut();
            let status = tcosep_recover_factors(
                tensor,
                sel_i.as_ptr(),
                3,
                sel_j.as_ptr(),
                2,
                100,
                1e-6,
                &mut model,
            );
            assert_eq!(status, TcosepOk);
            let mut rebuilt = std::ptr::null_mut();
            assert_eq!(tcosep_model_reconstruct(model, &mut rebuilt), TcosepOk);
            let mut err = f64::NAN;
            assert_eq!(tcosep_rel_error(tensor, rebuilt, &mut err), TcosepOk);
            assert!(err <= 1e-6, "pipeline error {err:.3e}");

            let mut p1 = std::ptr::null_mut();
            assert_eq!(tcosep_model_factor(model, 0, &mut p1), TcosepOk);
            let (mut m, mut n, mut p) = (0, 0, 0);
            assert_eq!(tcosep_tensor_dims(p1, &mut m, &mut n, &mut p), TcosepOk);
            assert_eq!((m, n, p), (14, 3, 3));

            tcosep_tensor_free(p1);
            tcosep_tensor_free(rebuilt);
            tcosep_model_free(model);
            tcosep_tensor_free(tensor);
        }
    }

    #[test]
    fn tsvd_and_ranks_through_the_abi() {
        unsafe {
            let mut tensor = std::ptr::null_mut();
            let mut i_buf = [0usize; 2];
            let mut j_buf = [0usize; 2];
            assert_eq!(
                tcosep_gen_synthetic(
                    8,
                    8,
                    2,
                    2,
                    2,
                    0.0,
                    10.0,
                    3,
                    &mut tensor,
                    i_buf.as_mut_ptr(),
                    j_buf.as_mut_ptr()
                ),
                TcosepOk
            );
            let (mut w, mut s, mut v) =
                (std::ptr::null_mut(), std::ptr::null_mut(), std::ptr::null_mut());
            assert_eq!(tcosep_tsvd(tensor, &mut w, &mut s, &mut v), TcosepOk);
            let mut multirank = [0usize; 2];
            let mut tubal = 0usize;
            let mut stable = 0.0f64;
            assert_eq!(
                tcosep_ranks(tensor, 1e-10, multirank.as_mut_ptr(), 2, &mut tubal, &mut stable),
                TcosepOk
            );
            assert!((1..=8).contains(&tubal));
            assert!(stable <= tubal as f64 + 1e-9);
            for h in [w, s, v, tensor] {
                tcosep_tensor_free(h);
            }
        }
    }

    #[test]
    fn header_is_generated_with_the_public_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("tcosep.h");
        let text = std::fs::read_to_string(header).expect("header generated by build.rs");
        for symbol in [
            "tcosep_tensor_create",
            "tcosep_tprod",
            "tcosep_tsvd",
            "tcosep_cosntf_select",
            "tcosep_recover_factors",
            "tcosep_last_error_message",
            "TcosepStatus",
        ] {
            assert!(text.contains(symbol), "header misses {symbol}");
        }
    }
}
