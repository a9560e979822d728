//! C ABI for the spinform kernel.
//!
//! Every function returns an [`SpfStatus`]. On failure a message is stored
//! per thread and can be copied out with [`spf_last_error`]. Objects are
//! opaque handles created by `*_new` functions and released by the
//! matching `*_free`. Complex arrays are interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinform::cli::{self, RunOptions, Scene};
use spinform::clifford::{build_clifford, CliffordRep, Signature};
use spinform::error::Error;
use spinform::geometry::residual_at;
use spinform::jet::C64;
use spinform::models::{CatalogEntry, Model, ModelSpec};
use spinform::svforms::{dim_sigma, twistor_projector};

/// Largest `n₊ + n₋` accepted for Clifford handles.
pub const SPF_MAX_CLIFFORD_DIM: usize = 16;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Domain = 4,
    Parse = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Model families for [`spf_model_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpfModelKind {
    Flat = 0,
    Sphere = 1,
    Hyperbolic = 2,
}

/// Clifford module of a signature.
pub struct SpfClifford {
    rep: CliffordRep,
}

/// A model geometry with its catalog of certified fields.
pub struct SpfModel {
    model: Model,
    catalog: Vec<CatalogEntry>,
}

/// A finished run: verdict and JSON report.
pub struct SpfReport {
    pass: bool,
    json: String,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> SpfStatus {
    match e {
        Error::DimensionMismatch { .. } => SpfStatus::DimensionMismatch,
        Error::Domain(_) | Error::SingularFrame(_) => SpfStatus::Domain,
        Error::Parse { .. } => SpfStatus::Parse,
        Error::Io(_) => SpfStatus::Io,
        _ => SpfStatus::InvalidArgument,
    }
}

fn fail(status: SpfStatus, msg: impl Into<String>) -> SpfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), SpfStatus>) -> SpfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpfStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SpfStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: spinform::error::Result<T>) -> Result<T, SpfStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), SpfStatus> {
    if p.is_null() {
        Err(fail(SpfStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), SpfStatus> {
    non_null(out, name)?;
    out.write(value);
    Ok(())
}

/// Copies `text` plus a terminating NUL into `buf`; `needed` receives the
/// full size including the NUL.
unsafe fn copy_raw(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> bool {
    let size = text.len() + 1;
    if !needed.is_null() {
        needed.write(size);
    }
    if buf.is_null() || len < size {
        return false;
    }
    std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    buf.add(text.len()).write(0);
    true
}

unsafe fn copy_str(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), SpfStatus> {
    if copy_raw(text, buf, len, needed) {
        Ok(())
    } else {
        Err(fail(
            SpfStatus::BufferTooSmall,
            format!("buffer of {len} bytes, {} needed", text.len() + 1),
        ))
    }
}

unsafe fn read_complex(data: *const f64, count: usize, name: &str) -> Result<Vec<C64>, SpfStatus> {
    if count == 0 {
        return Ok(Vec::new());
    }
    non_null(data, name)?;
    let raw = std::slice::from_raw_parts(data, 2 * count);
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

unsafe fn read_cstr<'a>(s: *const c_char, name: &str) -> Result<&'a str, SpfStatus> {
    non_null(s, name)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(SpfStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

/// Copies the calling thread's last error message into `buf`. The stored
/// message is left unchanged, also when the buffer is too small.
///
/// # Safety
/// `buf` must hold `len` bytes or be null; `needed` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn spf_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> SpfStatus {
    let text = LAST_ERROR.with(|e| e.borrow().clone());
    if copy_raw(&text, buf, len, needed) {
        SpfStatus::Ok
    } else {
        SpfStatus::BufferTooSmall
    }
}

/// Creates the Clifford module of signature `(n_plus, n_minus)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_clifford_new(n_plus: usize, n_minus: usize, out: *mut *mut SpfClifford) -> SpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let n = n_plus + n_minus;
        if n == 0 || n > SPF_MAX_CLIFFORD_DIM {
            return Err(fail(
                SpfStatus::InvalidArgument,
                format!("dimension must be between 1 and {SPF_MAX_CLIFFORD_DIM}, got {n}"),
            ));
        }
        let rep = build_clifford(Signature::new(n_plus, n_minus));
        write(out, Box::into_raw(Box::new(SpfClifford { rep })), "out")
    })
}

/// Releases a Clifford handle; null is ignored.
///
/// # Safety
/// `h` must come from [`spf_clifford_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spf_clifford_free(h: *mut SpfClifford) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes the spinor dimension `2^⌊n/2⌋`.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spf_clifford_spinor_dim(h: *const SpfClifford, out: *mut usize) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        write(out, (*h).rep.spinor_dim(), "out")
    })
}

/// Writes the largest entry of `γ_iγ_j + γ_jγ_i + 2g_ij`.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spf_clifford_anticommutator_residual(h: *const SpfClifford, out: *mut f64) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        write(out, (*h).rep.anticommutator_residual(), "out")
    })
}

/// Applies `γ_k` to a spinor of `spinor_dim` complex entries.
///
/// # Safety
/// `input` and `output` must each hold `2 * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spf_clifford_apply_gamma(
    h: *const SpfClifford,
    k: usize,
    input: *const f64,
    output: *mut f64,
    len: usize,
) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        non_null(output, "output")?;
        let rep = &(*h).rep;
        if k >= rep.n() {
            return Err(fail(SpfStatus::InvalidArgument, format!("γ index {k} out of range 0..{}", rep.n())));
        }
        if len != rep.spinor_dim() {
            return Err(fail(
                SpfStatus::DimensionMismatch,
                format!("spinor length {len}, expected {}", rep.spinor_dim()),
            ));
        }
        let v = read_complex(input, len, "input")?;
        let out = std::slice::from_raw_parts_mut(output, 2 * len);
        for (dst, z) in out.chunks_exact_mut(2).zip(rep.gamma(k).apply(&v)) {
            dst[0] = z.re;
            dst[1] = z.im;
        }
        Ok(())
    })
}

/// Writes the rank of the twistor module of spinor-valued `p`-forms.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spf_clifford_twistor_rank(h: *const SpfClifford, p: usize, out: *mut usize) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        let rep = &(*h).rep;
        if p > rep.n() {
            return Err(fail(SpfStatus::InvalidArgument, format!("degree {p} exceeds {}", rep.n())));
        }
        write(out, twistor_projector(rep, p).rank(), "out")
    })
}

/// Writes `dim Σᵖ = C(n, p)·spinor_dim`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_dim_sigma(n: usize, p: usize, spinor_dim: usize, out: *mut usize) -> SpfStatus {
    guard(|| write(out, dim_sigma(n, p as isize, spinor_dim), "out"))
}

/// Creates a model. `n_minus` is only used for flat models; `dim` is the
/// total dimension.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_model_new(
    kind: SpfModelKind,
    dim: usize,
    n_minus: usize,
    out: *mut *mut SpfModel,
) -> SpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = match kind {
            SpfModelKind::Flat => {
                if n_minus > dim {
                    return Err(fail(SpfStatus::InvalidArgument, "n_minus exceeds the dimension"));
                }
                ModelSpec::Flat {
                    signature: Signature::new(dim - n_minus, n_minus),
                }
            }
            SpfModelKind::Sphere => ModelSpec::Sphere { dim },
            SpfModelKind::Hyperbolic => ModelSpec::Hyperbolic { dim },
        };
        let model = lift(Model::new(spec))?;
        let catalog = lift(model.killing_catalog())?;
        write(out, Box::into_raw(Box::new(SpfModel { model, catalog })), "out")
    })
}

/// Releases a model handle; null is ignored.
///
/// # Safety
/// `h` must come from [`spf_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spf_model_free(h: *mut SpfModel) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes the number of catalog fields.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spf_model_catalog_len(h: *const SpfModel, out: *mut usize) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        write(out, (*h).catalog.len(), "out")
    })
}

unsafe fn entry<'a>(h: *const SpfModel, index: usize) -> Result<&'a CatalogEntry, SpfStatus> {
    non_null(h, "h")?;
    let catalog = &(*h).catalog;
    catalog.get(index).ok_or_else(|| {
        fail(
            SpfStatus::InvalidArgument,
            format!("catalog index {index} out of range 0..{}", catalog.len()),
        )
    })
}

/// Copies the label of catalog field `index`.
///
/// # Safety
/// `buf` must hold `len` bytes or be null; `needed` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn spf_model_catalog_label(
    h: *const SpfModel,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> SpfStatus {
    guard(|| {
        let e = entry(h, index)?;
        copy_str(&e.label, buf, len, needed)
    })
}

/// Writes the largest residual of catalog field `index` over its certified
/// equations at chart point `x` (`len` = model dimension).
///
/// # Safety
/// `x` must hold `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn spf_model_catalog_residual(
    h: *const SpfModel,
    index: usize,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> SpfStatus {
    guard(|| {
        let e = entry(h, index)?;
        let model = &(*h).model;
        if len != model.dim() {
            return Err(fail(
                SpfStatus::DimensionMismatch,
                format!("point of length {len}, expected {}", model.dim()),
            ));
        }
        non_null(x, "x")?;
        let point = std::slice::from_raw_parts(x, len);
        let mut worst: f64 = 0.0;
        for &eq in &e.checks {
            match lift(residual_at(model.chart(), &e.field, eq, &e.data, point))? {
                Some(r) => worst = worst.max(r),
                None => return Err(fail(SpfStatus::Domain, format!("precondition of {} fails", eq.tag()))),
            }
        }
        write(out, worst, "out")
    })
}

fn report(r: cli::Report) -> *mut SpfReport {
    Box::into_raw(Box::new(SpfReport {
        pass: r.pass,
        json: r.to_json(),
    }))
}

/// Runs the identity suite for all signatures with `n ≤ n_max`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_identities(n_max: usize, seed: u64, samples: usize, out: *mut *mut SpfReport) -> SpfStatus {
    guard(|| {
        non_null(out, "out")?;
        if samples == 0 {
            return Err(fail(SpfStatus::InvalidArgument, "sample count must be positive"));
        }
        let opts = RunOptions { seed, samples, tol: None };
        let r = lift(cli::identities(n_max, false, opts))?;
        write(out, report(r), "out")
    })
}

/// Runs `check-field` (`cone = 0`) or `cone-check` (`cone = 1`) on a scene
/// given as JSON text. `samples = 0` uses the scene's value or the default.
///
/// # Safety
/// `scene_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spf_run_scene(
    scene_json: *const c_char,
    cone: bool,
    seed: u64,
    samples: usize,
    out: *mut *mut SpfReport,
) -> SpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = read_cstr(scene_json, "scene_json")?;
        let scene = lift(Scene::parse(text))?;
        let opts = RunOptions {
            seed,
            samples: if samples > 0 { samples } else { scene.samples.unwrap_or(50) },
            tol: scene.tol,
        };
        let r = if cone {
            lift(cli::cone_check(&scene, opts))?
        } else {
            lift(cli::check_field(&scene, opts))?
        };
        write(out, report(r), "out")
    })
}

/// Releases a report; null is ignored.
///
/// # Safety
/// `h` must come from a report-producing function and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spf_report_free(h: *mut SpfReport) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes whether every check of the report passed.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spf_report_pass(h: *const SpfReport, out: *mut bool) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        write(out, (*h).pass, "out")
    })
}

/// Copies the JSON report.
///
/// # Safety
/// `buf` must hold `len` bytes or be null; `needed` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn spf_report_json(
    h: *const SpfReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> SpfStatus {
    guard(|| {
        non_null(h, "h")?;
        copy_str(&(*h).json, buf, len, needed)
    })
}
