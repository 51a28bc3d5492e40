//! C ABI over `vfold-core`.
//!
//! Every entry point returns a [`VfStatus`]; on failure the message is kept
//! per thread and read back with [`vf_last_error`]. Handles are opaque and
//! must be released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vfold_core::binom::{delta_penv, einvz, kappa_v, BinomialSpec, VFoldCellSpec};
use vfold_core::cli::to_json;
use vfold_core::experiments::{benchmark, Bench, BenchmarkTable};
use vfold_core::histogram::{fit, DataSet, HistogramModel};
use vfold_core::selectors::{parse_selector_list, pen_vf_closed};
use vfold_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Numerical = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> VfStatus {
    match e {
        Error::QuadratureFailure { .. } => VfStatus::Numerical,
        Error::Io(_) => VfStatus::Io,
        _ => VfStatus::InvalidArgument,
    }
}

struct Failure(VfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            VfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            VfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(VfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(VfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn vf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn vf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A finished benchmark table.
pub struct VfTable {
    table: BenchmarkTable,
    labels: Vec<CString>,
}

/// Numbers of one table row. `v` is 0 and `c` is NaN when not applicable.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VfRow {
    pub v: usize,
    pub c: f64,
    pub overpen: f64,
    pub c_or: f64,
    pub se_or: f64,
    pub c_path_or: f64,
    pub se_path_or: f64,
    pub c_prime_or: f64,
    pub n_reps: usize,
    pub drops: usize,
}

/// Runs `n_reps` replications of a built-in scenario. `threads == 0` uses
/// every core.
///
/// # Safety
/// `scenario` and `selectors` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vf_benchmark_run(
    scenario: *const c_char,
    selectors: *const c_char,
    n_reps: usize,
    seed: u64,
    threads: usize,
    out: *mut *mut VfTable,
) -> VfStatus {
    guard(|| {
        let name = read_str(scenario, "scenario")?;
        let list = read_str(selectors, "selectors")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let specs = parse_selector_list(list)?;
        let bench = Bench::preset(name)?;
        let table = benchmark(&bench, &specs, n_reps, seed, (threads > 0).then_some(threads))?;
        let labels = table
            .rows
            .iter()
            .map(|r| CString::new(r.selector.clone()).expect("labels have no NUL"))
            .collect();
        write_out(out, Box::into_raw(Box::new(VfTable { table, labels })), "out")
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vf_table_len(table: *const VfTable) -> usize {
    table.as_ref().map_or(0, |t| t.table.rows.len())
}

/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vf_table_row(table: *const VfTable, index: usize, out: *mut VfRow) -> VfStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        let r = t
            .table
            .rows
            .get(index)
            .ok_or_else(|| Failure(VfStatus::OutOfRange, format!("row {index} of {}", t.table.rows.len())))?;
        let row = VfRow {
            v: r.v.unwrap_or(0),
            c: r.c.unwrap_or(f64::NAN),
            overpen: r.overpen,
            c_or: r.c_or,
            se_or: r.se_or,
            c_path_or: r.c_path_or,
            se_path_or: r.se_path_or,
            c_prime_or: r.c_prime_or,
            n_reps: r.n_reps,
            drops: r.drops,
        };
        write_out(out, row, "out")
    })
}

/// Selector label of a row, owned by the table; null when out of range.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vf_table_selector(table: *const VfTable, index: usize) -> *const c_char {
    table.as_ref().and_then(|t| t.labels.get(index)).map_or(ptr::null(), |s| s.as_ptr())
}

/// Serializes the table; release the string with [`vf_string_free`].
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vf_table_to_json(table: *const VfTable, out: *mut *mut c_char) -> VfStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        let s = CString::new(to_json(std::slice::from_ref(&t.table))).expect("json has no NUL");
        write_out(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `table` must be null or a handle from [`vf_benchmark_run`], freed once.
#[no_mangle]
pub unsafe extern "C" fn vf_table_free(table: *mut VfTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn vf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// An owned sample of `(x, y)` pairs.
pub struct VfDataset(DataSet);

/// Copies `n` pairs; `x` must lie in `[0, 1)`.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vf_dataset_new(xs: *const f64, ys: *const f64, n: usize, out: *mut *mut VfDataset) -> VfStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() {
            return Err(null("xs/ys"));
        }
        let xs = std::slice::from_raw_parts(xs, n).to_vec();
        let ys = std::slice::from_raw_parts(ys, n).to_vec();
        let d = DataSet::new(xs, ys)?;
        write_out(out, Box::into_raw(Box::new(VfDataset(d))), "out")
    })
}

/// # Safety
/// `data` must be null or a handle from [`vf_dataset_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn vf_dataset_free(data: *mut VfDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Closed-form V-fold penalty of the regular histogram with `dims` cells.
///
/// # Safety
/// `data` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vf_pen_vf_closed(data: *const VfDataset, dims: usize, v: usize, c: f64, out: *mut f64) -> VfStatus {
    guard(|| {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        let model = HistogramModel::regular(0, dims)?;
        let p = pen_vf_closed(&fit(&d.0, &model), v, c)?;
        write_out(out, p, "out")
    })
}

/// `E[Z] E[Z^{-1} 1{Z>0}]` for `Z ~ Binomial(n, p)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vf_einvz(n: u64, p: f64, out: *mut f64) -> VfStatus {
    guard(|| write_out(out, einvz(BinomialSpec::new(n, p)?), "out"))
}

/// Bias of the V-fold penalty of a cell with `count` points.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vf_delta_penv(count: u64, v: u64, out: *mut f64) -> VfStatus {
    guard(|| write_out(out, delta_penv(VFoldCellSpec::new(count, v)?)?, "out"))
}

/// Asymptotic excess-loss constant of V-fold cross-validation.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vf_kappa_v(v: u64, out: *mut f64) -> VfStatus {
    guard(|| write_out(out, kappa_v(v)?, "out"))
}
