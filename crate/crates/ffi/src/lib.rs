//! C interface to `fenchel-lab`.
//!
//! Functions are passed around as opaque `FlFunction` handles built from
//! the same JSON used for the `f`/`g` entries of instance files. Every
//! fallible call returns an `FlStatus`; on failure the message is kept in a
//! thread-local slot readable through [`fl_last_error`]. Strings handed out
//! by the library are released with [`fl_string_free`], handles with
//! [`fl_function_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use fenchel_lab::cli::{self, Args, Command, Format, FunctionSpec};
use fenchel_lab::funcrep::{Function, Grid};
use fenchel_lab::subdiff::{eps_subdiff_set, eps_threshold};
use fenchel_lab::Error;

/// Result codes. `Ok` is zero; everything else leaves a message behind.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a function description that does not validate.
    Schema = 3,
    Dimension = 4,
    /// Point outside the effective domain, or an empty domain.
    Domain = 5,
    /// Improper function or envelope.
    Improper = 6,
    /// The operation does not apply to this representation (for example a
    /// grid function without a dual grid).
    Unsupported = 7,
    /// Any other library error.
    Library = 8,
    /// A usage problem reported by the command runner.
    Usage = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

/// Opaque function handle.
pub struct FlFunction {
    inner: Function,
}

/// A uniform grid: `nodes[i]` points from `lower[i]` to `upper[i]` on each
/// of `dim` axes.
#[repr(C)]
pub struct FlGridSpec {
    pub dim: usize,
    pub lower: *const f64,
    pub upper: *const f64,
    pub nodes: *const usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(FlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let status = match &e {
            Error::Dimension { .. } => FlStatus::Dimension,
            Error::Domain(_) | Error::EmptyDomain(_) => FlStatus::Domain,
            Error::ImproperFunction(_) | Error::EnvelopeImproper => FlStatus::Improper,
            Error::InvalidGrid(_) | Error::InvalidArgument(_) => FlStatus::Schema,
            _ => FlStatus::Library,
        };
        Fail(status, format!("{}: {e}", e.name()))
    }
}

fn null(what: &str) -> Fail {
    Fail(FlStatus::NullArgument, format!("{what} is null"))
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> FlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            FlStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(FlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn func_arg<'a>(f: *const FlFunction) -> Result<&'a Function, Fail> {
    f.as_ref().map(|h| &h.inner).ok_or_else(|| null("function"))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn grid_arg(g: *const FlGridSpec) -> Result<Option<Grid>, Fail> {
    let Some(g) = g.as_ref() else { return Ok(None) };
    let lower = slice_arg(g.lower, g.dim, "grid lower")?.to_vec();
    let upper = slice_arg(g.upper, g.dim, "grid upper")?.to_vec();
    let nodes = slice_arg(g.nodes, g.dim, "grid nodes")?.to_vec();
    Ok(Some(Grid::new(lower, upper, nodes)?))
}

fn check_len(f: &Function, len: usize) -> Result<(), Fail> {
    if f.dim() != len {
        return Err(Error::Dimension { expected: f.dim(), got: len }.into());
    }
    Ok(())
}

fn hand_out(f: Function, out: *mut *mut FlFunction) {
    unsafe { *out = Box::into_raw(Box::new(FlFunction { inner: f })) };
}

fn hand_out_string(s: String, out: *mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(FlStatus::Internal, "string contains nul".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn piecewise(f: &Function) -> Result<fenchel_lab::funcrep::PiecewiseMinFunction, Fail> {
    f.as_piecewise()
        .ok_or_else(|| Fail(FlStatus::Unsupported, "operation needs a polyhedral or piecewise_min function".into()))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a function from a JSON description such as
/// `{"kind":"polyhedral","pieces":[{"slope":[1],"intercept":0}]}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_function_from_json(json: *const c_char, out: *mut *mut FlFunction) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let spec: FunctionSpec = serde_json::from_str(text)
            .map_err(|e| Fail(FlStatus::Schema, format!("line {} column {}: {e}", e.line(), e.column())))?;
        hand_out(spec.build()?, out);
        Ok(())
    })
}

/// Serializes a function in the form accepted by [`fl_function_from_json`].
///
/// # Safety
/// `f` must be a live handle; `out` receives a string to release with
/// [`fl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fl_function_to_json(f: *const FlFunction, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let f = func_arg(f)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&FunctionSpec::from_function(f))
            .map_err(|e| Fail(FlStatus::Internal, e.to_string()))?;
        hand_out_string(text, out)
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_function_free(f: *mut FlFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Dimension of the function's argument, 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_function_dim(f: *const FlFunction) -> usize {
    f.as_ref().map_or(0, |h| h.inner.dim())
}

/// `f(x)`; writes `+inf` outside the domain.
///
/// # Safety
/// `x` must point to `len` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn fl_function_eval(f: *const FlFunction, x: *const f64, len: usize, out: *mut f64) -> FlStatus {
    guard(|| {
        let f = func_arg(f)?;
        check_len(f, len)?;
        let x = slice_arg(x, len, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.eval(x)?.value();
        Ok(())
    })
}

/// Conjugate `f*`. Polyhedral and piecewise-min inputs give an exact
/// polyhedral result and ignore `dual`; grid inputs need `dual`, the grid
/// the conjugate is sampled on.
///
/// # Safety
/// `f` must be a live handle, `dual` null or a valid grid description,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_function_conjugate(
    f: *const FlFunction,
    dual: *const FlGridSpec,
    out: *mut *mut FlFunction,
) -> FlStatus {
    guard(|| {
        let f = func_arg(f)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = match f {
            Function::Grid(g) => {
                let dual = grid_arg(dual)?
                    .ok_or_else(|| Fail(FlStatus::Unsupported, "grid conjugate needs a dual grid".into()))?;
                Function::Grid(g.conjugate(&dual)?.function)
            }
            _ => Function::Polyhedral(piecewise(f)?.conjugate()?),
        };
        hand_out(result, out);
        Ok(())
    })
}

/// Closed convex envelope `f**`, with the same grid rules as
/// [`fl_function_conjugate`].
///
/// # Safety
/// As for [`fl_function_conjugate`].
#[no_mangle]
pub unsafe extern "C" fn fl_function_envelope(
    f: *const FlFunction,
    dual: *const FlGridSpec,
    out: *mut *mut FlFunction,
) -> FlStatus {
    guard(|| {
        let f = func_arg(f)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = match f {
            Function::Grid(g) => {
                let dual = grid_arg(dual)?
                    .ok_or_else(|| Fail(FlStatus::Unsupported, "grid envelope needs a dual grid".into()))?;
                Function::Grid(g.envelope(&dual)?.function)
            }
            _ => Function::Polyhedral(piecewise(f)?.envelope()?),
        };
        hand_out(result, out);
        Ok(())
    })
}

/// `f(x) − f**(x)`, the smallest `ε` for which the ε-subdifferential at
/// `x` is nonempty. Polyhedral and piecewise-min functions only.
///
/// # Safety
/// `x` must point to `len` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn fl_eps_threshold(f: *const FlFunction, x: *const f64, len: usize, out: *mut f64) -> FlStatus {
    guard(|| {
        let f = func_arg(f)?;
        check_len(f, len)?;
        let x = slice_arg(x, len, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = eps_threshold(&piecewise(f)?, x)?.value();
        Ok(())
    })
}

/// Support function of the ε-subdifferential at `x` in direction `u`:
/// `+inf` when unbounded that way, `-inf` when the set is empty.
///
/// # Safety
/// `x` and `u` must point to `len` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn fl_eps_subdiff_support(
    f: *const FlFunction,
    x: *const f64,
    len: usize,
    epsilon: f64,
    u: *const f64,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        let f = func_arg(f)?;
        check_len(f, len)?;
        let x = slice_arg(x, len, "x")?;
        let u = slice_arg(u, len, "u")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Fail(FlStatus::Schema, format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        let set = eps_subdiff_set(&piecewise(f)?, x, epsilon)?;
        *out = set.support(u).value();
        Ok(())
    })
}

/// Runs one of the command-line commands (`transform`, `subdiff`,
/// `verify`, `witnesses`, `relax`) on an instance file or directory and
/// returns the machine-format report and the exit code the binary would
/// use. `Usage` means no report was produced (for example an empty
/// directory).
///
/// # Safety
/// `command` and `path` must be nul-terminated strings; `report` and
/// `exit_code` valid pointers. The report is released with
/// [`fl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fl_run(
    command: *const c_char,
    path: *const c_char,
    report: *mut *mut c_char,
    exit_code: *mut i32,
) -> FlStatus {
    guard(|| {
        let name = str_arg(command, "command")?;
        let path = str_arg(path, "path")?;
        if report.is_null() || exit_code.is_null() {
            return Err(null("output pointer"));
        }
        let command: Command = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| Fail(FlStatus::Usage, format!("unknown command {name:?}")))?;
        let args = Args {
            command,
            path: PathBuf::from(path),
            splits: None,
            box_radius: None,
            directions: None,
            tol: None,
            format: Format::Machine,
            out: None,
            timing: false,
        };
        match cli::execute(&args) {
            Ok((text, code)) => {
                hand_out_string(text, report)?;
                *exit_code = code;
                Ok(())
            }
            Err((msg, code)) => {
                *exit_code = code;
                Err(Fail(FlStatus::Usage, msg))
            }
        }
    })
}
