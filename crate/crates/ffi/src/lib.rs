//! C ABI for symsat.
//!
//! Every fallible call returns a [`SymsatStatus`]; on failure the message is
//! kept per thread and read with [`symsat_last_error`]. Handles are opaque
//! and must be released with their `_free` function. Matrices are dense,
//! row-major `n × n` arrays of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nalgebra::DMatrix;
use symsat::group::{GroupExpr, Perm};
use symsat::pipeline::evaluate;
use symsat::solver::{load_model, GroupSpec, Model};
use symsat::symfind::{normalized, sym_find, SymFindConfig};
use symsat::tasks::{Example, Task};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymsatStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A permutation group expression together with its conjugating permutation.
pub struct SymsatGroup {
    spec: GroupSpec,
}

/// A trained model loaded from a checkpoint.
pub struct SymsatModel {
    model: Model,
    task: Task,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(SymsatStatus, String);

impl Failure {
    fn invalid(m: impl ToString) -> Self {
        Failure(SymsatStatus::InvalidArgument, m.to_string())
    }
}

/// Runs `f`, recording its error and turning panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SymsatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SymsatStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SymsatStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SymsatStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{what} is not UTF-8")))
}

unsafe fn matrix_arg(p: *const f64, n: usize, what: &str) -> Result<DMatrix<f64>, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let len = n.checked_mul(n).ok_or_else(|| Failure::invalid("n too large"))?;
    Ok(DMatrix::from_row_slice(n, n, std::slice::from_raw_parts(p, len)))
}

unsafe fn write_matrix(m: &DMatrix<f64>, out: *mut f64) {
    let n = m.ncols();
    let dst = std::slice::from_raw_parts_mut(out, m.nrows() * n);
    for i in 0..m.nrows() {
        for j in 0..n {
            dst[i * n + j] = m[(i, j)];
        }
    }
}

/// Copies `s` plus a terminating NUL into `buf`. `required` receives the
/// needed size in bytes whether or not it fits.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, required: *mut usize) -> Result<(), Failure> {
    if !required.is_null() {
        *required = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return Err(Failure(
            SymsatStatus::BufferTooSmall,
            format!("buffer of {len} bytes, need {}", s.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn symsat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn symsat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a group expression such as `S3 wr S3 * S3 wr S3 * S9` with the
/// identity as conjugating permutation.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_parse(expr: *const c_char, out: *mut *mut SymsatGroup) -> SymsatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(expr, "expr")?;
        let spec = match text.trim() {
            "rubik" => GroupSpec::named("rubik").map_err(Failure::invalid)?,
            t => GroupSpec::identity(&t.parse::<GroupExpr>().map_err(Failure::invalid)?),
        };
        *out = Box::into_raw(Box::new(SymsatGroup { spec }));
        Ok(())
    })
}

/// # Safety
/// `group` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_free(group: *mut SymsatGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Number of points the group acts on, or 0 for a null handle.
///
/// # Safety
/// `group` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_degree(group: *const SymsatGroup) -> usize {
    group.as_ref().map_or(0, |g| g.spec.degree())
}

/// Dimension of the symmetric equivariant basis.
///
/// # Safety
/// `group` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_basis_dim(group: *const SymsatGroup, out: *mut usize) -> SymsatStatus {
    guard(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.spec.basis().map_err(Failure::invalid)?.dim();
        Ok(())
    })
}

/// Writes the expression text into `buf`.
///
/// # Safety
/// `group` must be a live handle; `buf` must hold `len` bytes; `required`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_expr(
    group: *const SymsatGroup,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> SymsatStatus {
    guard(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        write_str(&g.spec.expr, buf, len, required)
    })
}

/// Copies the conjugating permutation (degree entries) into `out`.
///
/// # Safety
/// `group` must be a live handle and `out` hold `symsat_group_degree` entries.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_sigma(group: *const SymsatGroup, out: *mut usize) -> SymsatStatus {
    guard(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = &g.spec.sigma;
        ptr::copy_nonoverlapping(s.as_ptr(), out, s.len());
        Ok(())
    })
}

/// Replaces the conjugating permutation.
///
/// # Safety
/// `group` must be a live handle and `sigma` hold `symsat_group_degree` entries.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_set_sigma(group: *mut SymsatGroup, sigma: *const usize) -> SymsatStatus {
    guard(|| {
        let g = group.as_mut().ok_or_else(|| null("group"))?;
        if sigma.is_null() {
            return Err(null("sigma"));
        }
        let images = std::slice::from_raw_parts(sigma, g.spec.sigma.len()).to_vec();
        Perm::from_images(images.clone()).map_err(Failure::invalid)?;
        g.spec.sigma = images;
        Ok(())
    })
}

/// Projects the `n × n` matrix `c` onto the matrices commuting with the
/// group, writing the result to `out` (which may alias `c`).
///
/// # Safety
/// `c` and `out` must hold `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn symsat_group_project(
    group: *const SymsatGroup,
    c: *const f64,
    n: usize,
    out: *mut f64,
) -> SymsatStatus {
    guard(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        if n != g.spec.degree() {
            return Err(Failure::invalid(format!("matrix is {n}x{n}, group has degree {}", g.spec.degree())));
        }
        let m = matrix_arg(c, n, "c")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = g
            .spec
            .partition()
            .map_err(Failure::invalid)?
            .reynolds_project(&m)
            .map_err(Failure::invalid)?;
        write_matrix(&p, out);
        Ok(())
    })
}

/// Discovers the symmetry group of an `n × n` matrix with default
/// tolerances, optionally after scaling it to unit Frobenius norm.
///
/// # Safety
/// `m` must hold `n * n` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symsat_symfind(
    m: *const f64,
    n: usize,
    normalize: bool,
    out: *mut *mut SymsatGroup,
) -> SymsatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err(Failure::invalid("empty matrix"));
        }
        let mut mat = matrix_arg(m, n, "m")?;
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Failure(SymsatStatus::Numerical, "matrix has non-finite entries".into()));
        }
        if normalize {
            mat = normalized(&mat);
        }
        let res = sym_find(&mat, &SymFindConfig::default());
        let spec = GroupSpec::new(&res.expr, &res.sigma);
        *out = Box::into_raw(Box::new(SymsatGroup { spec }));
        Ok(())
    })
}

/// Loads a model checkpoint written by `symsat train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symsat_model_load(path: *const c_char, out: *mut *mut SymsatModel) -> SymsatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let model = load_model(Path::new(path)).map_err(|e| Failure(SymsatStatus::Io, e.to_string()))?;
        let task = model
            .task
            .as_deref()
            .ok_or_else(|| Failure::invalid("checkpoint has no task tag"))?
            .parse::<Task>()
            .map_err(Failure::invalid)?;
        *out = Box::into_raw(Box::new(SymsatModel { model, task }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symsat_model_free(model: *mut SymsatModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of task bits the model completes, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symsat_model_task_bits(model: *const SymsatModel) -> usize {
    model.as_ref().map_or(0, |m| m.task.n())
}

/// Number of trainable parameters.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symsat_model_param_count(model: *const SymsatModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.params.len())
}

/// Completes one example. `bits` and `given` hold one byte (0 or 1) per task
/// bit; bits not given are ignored. `probs` receives the probability that
/// every task bit is true (given bits are copied).
///
/// # Safety
/// `bits`, `given` and `probs` must hold `symsat_model_task_bits` entries.
#[no_mangle]
pub unsafe extern "C" fn symsat_model_complete(
    model: *const SymsatModel,
    bits: *const u8,
    given: *const u8,
    seed: u64,
    probs: *mut f64,
) -> SymsatStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if bits.is_null() || given.is_null() || probs.is_null() {
            return Err(null("bits, given or probs"));
        }
        let n = m.task.n();
        let bits = std::slice::from_raw_parts(bits, n);
        let given = std::slice::from_raw_parts(given, n);
        let ex = Example {
            task: m.task,
            bits: bits.iter().map(|&b| b != 0).collect(),
            mask: given.iter().map(|&g| g != 0).collect(),
        };
        let e = evaluate(&m.model, &[ex], seed, &Default::default()).map_err(Failure::invalid)?;
        let p = &e.probs[0];
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Failure(SymsatStatus::Numerical, "non-finite probabilities".into()));
        }
        ptr::copy_nonoverlapping(p.as_ptr(), probs, n);
        Ok(())
    })
}
