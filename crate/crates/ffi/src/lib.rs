//! C ABI over the `hormander` crate.
//!
//! Every object crosses the boundary as an opaque pointer owned by the caller
//! and released with the matching `hm_*_free`. Functions return an
//! [`HmStatus`]; on any status other than `Ok`, `Fail` or `Inconclusive` the
//! reason is available from [`hm_last_error`] on the same thread. Panics are
//! caught and reported as [`HmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hormander::dnsystem::{library, schema::parse_system, DnSystem};
use hormander::harness::{apriori_check, fredholm_check, regularity_check, AprioriOptions, RegularityOptions};
use hormander::hspace::{vector_hnorm, Grid, SpectralField, VectorField};
use hormander::report::{Report, Verdict};
use hormander::roparam::{RoParam, RoParamSpec};
use hormander::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    /// A check ran and failed.
    Fail = 1,
    /// Malformed configuration or input text.
    Config = 2,
    /// A check ran and could not decide.
    Inconclusive = 3,
    /// Null pointer or out-of-range argument.
    InvalidArgument = 4,
    /// Numerical precondition or solver failure.
    Numerical = 5,
    Panic = 6,
}

pub struct HmRoParam(RoParam);
pub struct HmSystem(DnSystem);
pub struct HmField(VectorField);
pub struct HmReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Message for the last error on this thread, or null. Valid until the next
/// call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

fn status_of(e: &Error) -> HmStatus {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::InvalidSystem(_) => HmStatus::Config,
        Error::Domain(_) | Error::ShapeMismatch { .. } | Error::GridMismatch(_) => HmStatus::InvalidArgument,
        _ => HmStatus::Numerical,
    }
}

fn verdict_status(v: Verdict) -> HmStatus {
    match v {
        Verdict::Pass => HmStatus::Ok,
        Verdict::Fail => HmStatus::Fail,
        Verdict::Inconclusive => HmStatus::Inconclusive,
    }
}

enum Failure {
    Lib(Error),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Run `f`, mapping errors and panics to a status.
fn guard<F: FnOnce() -> Result<HmStatus, Failure>>(f: F) -> HmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg);
            HmStatus::InvalidArgument
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::Arg(format!("{name} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Arg("output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Arg("output pointer is null".into()));
    }
    *out = value;
    Ok(())
}

/// Parse `power:S`, `powerlog:S,R` or `powersinlog:S,DELTA`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_roparam_parse(spec: *const c_char, out: *mut *mut HmRoParam) -> HmStatus {
    guard(|| {
        let spec: RoParamSpec = str_arg(spec, "spec")?.parse()?;
        put(out, HmRoParam(spec.build()))?;
        Ok(HmStatus::Ok)
    })
}

/// `φ(t)` for `t ≥ 1`.
///
/// # Safety
/// `param` must come from [`hm_roparam_parse`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_roparam_eval(param: *const HmRoParam, t: f64, out: *mut f64) -> HmStatus {
    guard(|| {
        let v = ref_arg(param, "param")?.0.eval(t)?;
        put_value(out, v)?;
        Ok(HmStatus::Ok)
    })
}

/// # Safety
/// `param` must come from [`hm_roparam_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn hm_roparam_free(param: *mut HmRoParam) {
    if !param.is_null() {
        drop(Box::from_raw(param));
    }
}

/// Build a system from its JSON description. DN numbers are computed when absent.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_system_from_json(json: *const c_char, out: *mut *mut HmSystem) -> HmStatus {
    guard(|| {
        let mut sys = parse_system(str_arg(json, "json")?)?;
        if sys.dn().is_none() {
            sys = sys.with_computed_dn()?;
        }
        put(out, HmSystem(sys))?;
        Ok(HmStatus::Ok)
    })
}

/// A built-in system by name (`cauchy-riemann`, `one-minus-laplacian`, ...).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_system_library(name: *const c_char, dim: usize, out: *mut *mut HmSystem) -> HmStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let sys = library::by_name(name, dim).ok_or_else(|| Failure::Arg(format!("unknown system {name:?}")))??;
        put(out, HmSystem(sys))?;
        Ok(HmStatus::Ok)
    })
}

/// Number of equations `p`, or 0 for a null handle.
///
/// # Safety
/// `sys` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hm_system_p(sys: *const HmSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.p())
}

/// Copy the DN numbers into `l` and `m`, each of length `len == p`.
///
/// # Safety
/// `l` and `m` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hm_system_dn(sys: *const HmSystem, l: *mut f64, m: *mut f64, len: usize) -> HmStatus {
    guard(|| {
        let sys = &ref_arg(sys, "sys")?.0;
        if l.is_null() || m.is_null() || len != sys.p() {
            return Err(Failure::Arg(format!("need two buffers of length p = {}", sys.p())));
        }
        let dn = sys.require_dn()?;
        std::slice::from_raw_parts_mut(l, len).copy_from_slice(&dn.l);
        std::slice::from_raw_parts_mut(m, len).copy_from_slice(&dn.m);
        Ok(HmStatus::Ok)
    })
}

/// Ellipticity margin `c_hat` on the default sphere and x samples.
///
/// # Safety
/// `sys` must be valid; `out` may be null.
#[no_mangle]
pub unsafe extern "C" fn hm_system_check_elliptic(sys: *const HmSystem, out: *mut *mut HmReport) -> HmStatus {
    guard(|| {
        let sys = &ref_arg(sys, "sys")?.0;
        let r = sys.ellipticity_margin(
            &hormander::dnsystem::default_x_samples(sys),
            &hormander::dnsystem::default_sphere(sys.dim()),
        )?;
        finish(r, out)
    })
}

/// # Safety
/// `sys` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hm_system_free(sys: *mut HmSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Field from Fourier coefficients in FFT order, row-major per component,
/// components back to back: `p * size^dim` entries in each of `re`, `im`.
///
/// # Safety
/// `re` and `im` must point to `p * size^dim` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn hm_field_from_coeffs(
    dim: usize,
    size: usize,
    p: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut HmField,
) -> HmStatus {
    guard(|| {
        let grid = Grid::new(dim, size)?;
        if p == 0 || re.is_null() || im.is_null() {
            return Err(Failure::Arg("need p >= 1 and non-null coefficient buffers".into()));
        }
        let len = grid.len();
        let re = std::slice::from_raw_parts(re, len * p);
        let im = std::slice::from_raw_parts(im, len * p);
        let comps = (0..p)
            .map(|k| {
                let c = (k * len..(k + 1) * len).map(|i| Complex64::new(re[i], im[i])).collect();
                SpectralField::from_coeffs(grid, c)
            })
            .collect::<hormander::Result<Vec<_>>>()?;
        put(out, HmField(VectorField::new(comps)?))?;
        Ok(HmStatus::Ok)
    })
}

/// Seeded random field with decaying complex Gaussian coefficients.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_field_random(dim: usize, size: usize, p: usize, seed: u64, out: *mut *mut HmField) -> HmStatus {
    guard(|| {
        let grid = Grid::new(dim, size)?;
        if p == 0 {
            return Err(Failure::Arg("p must be >= 1".into()));
        }
        let u = VectorField::random(grid, p, &mut hormander::numeric::trial_rng(seed, 0));
        put(out, HmField(u))?;
        Ok(HmStatus::Ok)
    })
}

/// `(Σ_k ‖u_k‖²_φ)^{1/2}` with the same parameter for every component.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_field_hnorm(field: *const HmField, param: *const HmRoParam, out: *mut f64) -> HmStatus {
    guard(|| {
        let u = &ref_arg(field, "field")?.0;
        let phi = &ref_arg(param, "param")?.0;
        let v = vector_hnorm(u, &vec![phi.clone(); u.p()])?;
        put_value(out, v)?;
        Ok(HmStatus::Ok)
    })
}

/// Apply the system to a field.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_system_apply(sys: *const HmSystem, field: *const HmField, out: *mut *mut HmField) -> HmStatus {
    guard(|| {
        let f = ref_arg(sys, "sys")?.0.apply(&ref_arg(field, "field")?.0)?;
        put(out, HmField(f))?;
        Ok(HmStatus::Ok)
    })
}

/// # Safety
/// `field` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hm_field_free(field: *mut HmField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

unsafe fn finish(r: Report, out: *mut *mut HmReport) -> Result<HmStatus, Failure> {
    let s = verdict_status(r.verdict);
    if !out.is_null() {
        *out = Box::into_raw(Box::new(HmReport(r)));
    }
    Ok(s)
}

unsafe fn grid_list<'a>(grids: *const usize, n: usize) -> Result<&'a [usize], Failure> {
    if grids.is_null() || n == 0 {
        return Err(Failure::Arg("need at least one grid size".into()));
    }
    Ok(std::slice::from_raw_parts(grids, n))
}

/// A priori estimate. The status reflects the verdict; the report is stored
/// in `out` when it is non-null.
///
/// # Safety
/// Handles must be valid; `grids` must point to `n_grids` sizes.
#[no_mangle]
pub unsafe extern "C" fn hm_apriori(
    sys: *const HmSystem,
    param: *const HmRoParam,
    sigma: f64,
    grids: *const usize,
    n_grids: usize,
    trials: usize,
    seed: u64,
    out: *mut *mut HmReport,
) -> HmStatus {
    guard(|| {
        let opts = AprioriOptions {
            sigma,
            grids: grid_list(grids, n_grids)?.to_vec(),
            trials,
            seed,
            radius: None,
        };
        let r = apriori_check(&ref_arg(sys, "sys")?.0, &ref_arg(param, "param")?.0, &opts)?;
        finish(r, out)
    })
}

/// Regularity lifting, global and localized; `project != 0` projects the data
/// onto the range.
///
/// # Safety
/// Handles must be valid; `grids` must point to `n_grids` sizes.
#[no_mangle]
pub unsafe extern "C" fn hm_regularity(
    sys: *const HmSystem,
    param: *const HmRoParam,
    grids: *const usize,
    n_grids: usize,
    project: i32,
    seed: u64,
    out: *mut *mut HmReport,
) -> HmStatus {
    guard(|| {
        let opts = RegularityOptions {
            grids: grid_list(grids, n_grids)?.to_vec(),
            seed,
            project: project != 0,
            ..RegularityOptions::default()
        };
        let r = regularity_check(&ref_arg(sys, "sys")?.0, &ref_arg(param, "param")?.0, &opts)?;
        finish(r, out)
    })
}

/// Fredholm analysis on one grid; kernel dimensions and index are stored in
/// the report constants `dim_N`, `dim_Nplus`, `index`.
///
/// # Safety
/// Handles must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_fredholm(
    sys: *const HmSystem,
    param: *const HmRoParam,
    size: usize,
    trials: usize,
    seed: u64,
    out: *mut *mut HmReport,
) -> HmStatus {
    guard(|| {
        let sys = &ref_arg(sys, "sys")?.0;
        let phi = ref_arg(param, "param")?.0.clone();
        let grid = Grid::new(sys.dim(), size)?;
        let (a, mut r) = fredholm_check(sys, &[phi], grid, trials, seed)?;
        r.constant("dim_N", a.dims.0 as f64);
        r.constant("dim_Nplus", a.dims.1 as f64);
        r.constant("index", a.index as f64);
        finish(r, out)
    })
}

/// Run a command line as the `hormander` binary would (`argv[0]` is the
/// program name). The exit code is returned; the JSON report text is stored
/// in `json_out` when it is non-null and the command produced reports.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hm_run(argc: usize, argv: *const *const c_char, json_out: *mut *mut c_char) -> i32 {
    use clap::Parser;
    clear_error();
    let result = catch_unwind(AssertUnwindSafe(|| -> Result<i32, String> {
        if argv.is_null() {
            return Err("argv is null".into());
        }
        let args = std::slice::from_raw_parts(argv, argc)
            .iter()
            .map(|&a| str_arg(a, "argv entry").map(str::to_owned).map_err(|_| "bad argv entry".to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let cli = hormander::cli::Cli::try_parse_from(args).map_err(|e| e.to_string())?;
        let reports = match hormander::cli::execute(&cli.command) {
            Ok(r) => r,
            Err(e) => {
                set_error(e.to_string());
                return Ok(if status_of(&e) == HmStatus::Config { 2 } else { 1 });
            }
        };
        if !json_out.is_null() {
            *json_out = CString::new(hormander::cli::reports_json(&reports)).map_or(ptr::null_mut(), CString::into_raw);
        }
        Ok(reports.iter().fold(Verdict::Pass, |v, r| v.and(r.verdict)).exit_code())
    }));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(msg)) => {
            set_error(msg);
            2
        }
        Err(_) => {
            set_error("panic");
            1
        }
    }
}

/// Overall verdict of a report as a status (`Ok`, `Fail` or `Inconclusive`).
///
/// # Safety
/// `report` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_report_verdict(report: *const HmReport) -> HmStatus {
    match report.as_ref() {
        Some(r) => verdict_status(r.0.verdict),
        None => HmStatus::InvalidArgument,
    }
}

/// Named constant of a report.
///
/// # Safety
/// `report` and `name` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_report_constant(report: *const HmReport, name: *const c_char, out: *mut f64) -> HmStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        let name = str_arg(name, "name")?;
        let v = r.get(name).ok_or_else(|| Failure::Arg(format!("no constant {name:?}")))?;
        put_value(out, v)?;
        Ok(HmStatus::Ok)
    })
}

/// JSON text of a report; release with [`hm_string_free`].
///
/// # Safety
/// `report` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn hm_report_json(report: *const HmReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => CString::new(r.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `report` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hm_report_free(report: *mut HmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
