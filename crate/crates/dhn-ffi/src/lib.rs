//! C ABI over the `dhn` crate.
//!
//! Networks are opaque `DhnNetwork` handles created by the `dhn_build_*` and
//! `dhn_network_from_json` functions and released with `dhn_network_free`.
//! Every fallible function returns a `DhnStatus`; on failure the message is
//! available from `dhn_last_error` on the same thread until the next call.
//! Strings returned by the library are released with `dhn_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use dhn::analysis;
use dhn::builders::{self, BuiltNetwork};
use dhn::net::KindTag;
use dhn::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DhnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    InvalidInput = 2,
    Parse = 3,
    Precision = 4,
    Resource = 5,
    /// A string argument was not valid UTF-8.
    Utf8 = 6,
    /// The library panicked; the handle arguments should be considered lost.
    Panic = 7,
}

/// Network family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DhnKind {
    Plain = 0,
    Skip = 1,
    Lin = 2,
}

impl From<DhnKind> for KindTag {
    fn from(k: DhnKind) -> Self {
        match k {
            DhnKind::Plain => KindTag::Plain,
            DhnKind::Skip => KindTag::Skip,
            DhnKind::Lin => KindTag::Lin,
        }
    }
}

/// Opaque network handle.
pub struct DhnNetwork {
    inner: BuiltNetwork,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(DhnStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) | Error::Io { .. } => DhnStatus::InvalidInput,
            Error::Parse { .. } => DhnStatus::Parse,
            Error::Precision(_) => DhnStatus::Precision,
            Error::Resource(_) => DhnStatus::Resource,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DhnStatus::Null, format!("{what} is null"))
}

/// Runs `f`, clearing or setting the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DhnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DhnStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            DhnStatus::Panic
        }
    }
}

unsafe fn net_ref<'a>(net: *const DhnNetwork) -> Result<&'a BuiltNetwork, Fail> {
    net.as_ref().map(|n| &n.inner).ok_or_else(|| null("network"))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn put_network(out_net: *mut *mut DhnNetwork, built: dhn::Result<BuiltNetwork>) -> Result<(), Fail> {
    let slot = out(out_net, "out")?;
    *slot = Box::into_raw(Box::new(DhnNetwork { inner: built? }));
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn dhn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dhn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `net` must be null or a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_free(net: *mut DhnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Parses a network document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_net` writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_from_json(json: *const c_char, out_net: *mut *mut DhnNetwork) -> DhnStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(DhnStatus::Utf8, e.to_string()))?;
        put_network(out_net, BuiltNetwork::from_json(text))
    })
}

/// Serializes a network; free the result with `dhn_string_free`.
///
/// # Safety
/// `net` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_to_json(net: *const DhnNetwork, out_json: *mut *mut c_char) -> DhnStatus {
    guard(|| {
        let text = net_ref(net)?.to_json()?;
        let c = CString::new(text).map_err(|e| Fail(DhnStatus::InvalidInput, e.to_string()))?;
        *out(out_json, "out_json")? = c.into_raw();
        Ok(())
    })
}

/// Input dimension, output dimension and number of hidden layers.
///
/// # Safety
/// `net` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_shape(
    net: *const DhnNetwork,
    out_input_dim: *mut usize,
    out_output_dim: *mut usize,
    out_depth: *mut usize,
) -> DhnStatus {
    guard(|| {
        let n = &net_ref(net)?.net;
        *out(out_input_dim, "out_input_dim")? = n.input_dim();
        *out(out_output_dim, "out_output_dim")? = n.output_dim();
        *out(out_depth, "out_depth")? = n.depth();
        Ok(())
    })
}

/// Writes 1 to `out_valid` if the network satisfies its architecture
/// constraints, 0 otherwise.
///
/// # Safety
/// `net` must be a live handle and `out_valid` writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_validate(net: *const DhnNetwork, out_valid: *mut i32) -> DhnStatus {
    guard(|| {
        let valid = net_ref(net)?.net.is_valid();
        *out(out_valid, "out_valid")? = i32::from(valid);
        Ok(())
    })
}

/// Proven sup-norm error bound of a constructed approximator. Writes 1 to
/// `out_present` and the bound to `out_bound` if the network carries one.
///
/// # Safety
/// `net` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_guarantee(
    net: *const DhnNetwork,
    out_present: *mut i32,
    out_bound: *mut f64,
) -> DhnStatus {
    guard(|| {
        let g = net_ref(net)?.guarantee.as_ref().map(|g| g.sup_error_bound);
        *out(out_present, "out_present")? = i32::from(g.is_some());
        *out(out_bound, "out_bound")? = g.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Evaluates the network at one point.
///
/// # Safety
/// `x` must hold `x_len` doubles and `y` room for `y_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_eval(
    net: *const DhnNetwork,
    x: *const f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
) -> DhnStatus {
    guard(|| {
        let n = &net_ref(net)?.net;
        let x = input(x, x_len, "x")?;
        if y_len != n.output_dim() {
            return Err(Fail(
                DhnStatus::InvalidInput,
                format!("output buffer holds {y_len} values, network has {} outputs", n.output_dim()),
            ));
        }
        let v = n.eval(x)?;
        if y.is_null() && y_len > 0 {
            return Err(null("y"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), y, y_len);
        Ok(())
    })
}

/// Number of maximal constant pieces of the network along the segment from
/// `x1` to `x2`, each holding `len` coordinates.
///
/// # Safety
/// `x1` and `x2` must hold `len` doubles and `out_count` be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_network_piece_count(
    net: *const DhnNetwork,
    x1: *const f64,
    x2: *const f64,
    len: usize,
    out_count: *mut usize,
) -> DhnStatus {
    guard(|| {
        let n = &net_ref(net)?.net;
        let part = analysis::exact_pieces(n, input(x1, len, "x1")?, input(x2, len, "x2")?)?;
        *out(out_count, "out_count")? = part.piece_count();
        Ok(())
    })
}

/// Indicator of the box `[a, b]` in `len` dimensions.
///
/// # Safety
/// `a` and `b` must hold `len` doubles and `out_net` be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_build_rect(
    a: *const f64,
    b: *const f64,
    len: usize,
    out_net: *mut *mut DhnNetwork,
) -> DhnStatus {
    guard(|| {
        let built = builders::hyperrectangle_indicator(input(a, len, "a")?, input(b, len, "b")?);
        put_network(out_net, built)
    })
}

/// Approximator of `x^2` with `l` hidden layers, first width `p1` and skip
/// budgets `skips[0..skips_len]` for layers 2..=l.
///
/// # Safety
/// `skips` must hold `skips_len` values and `out_net` be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_build_square(
    l: usize,
    p1: usize,
    skips: *const usize,
    skips_len: usize,
    out_net: *mut *mut DhnNetwork,
) -> DhnStatus {
    guard(|| put_network(out_net, builders::square_approximator(l, p1, input(skips, skips_len, "skips")?)))
}

/// Network realizing `labels[0..labels_len]` (each 0 or 1) on the shattered
/// point set of the geometry (`t` is ignored for skip networks).
///
/// # Safety
/// `labels` must hold `labels_len` bytes and `out_net` be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_build_shattering_net(
    kind: DhnKind,
    m: usize,
    n: usize,
    t: usize,
    labels: *const u8,
    labels_len: usize,
    out_net: *mut *mut DhnNetwork,
) -> DhnStatus {
    guard(|| {
        let g = match kind {
            DhnKind::Skip => builders::Geometry::skip(1, m, n)?,
            DhnKind::Lin => builders::Geometry::lin(1, m, n, t)?,
            DhnKind::Plain => return Err(Fail(DhnStatus::InvalidInput, "geometries are skip or lin".into())),
        };
        put_network(out_net, builders::shattering_net(&g, input(labels, labels_len, "labels")?))
    })
}

/// Exhaustively checks that every labeling of the shattered point set is
/// realized within the depth and width budgets. Writes 1 to `out_passed` on
/// success and the number of points to `out_points`.
///
/// # Safety
/// The out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dhn_shatter_verify(
    kind: DhnKind,
    m: usize,
    n: usize,
    t: usize,
    out_passed: *mut i32,
    out_points: *mut usize,
) -> DhnStatus {
    guard(|| {
        let cert = analysis::shatter_verify(kind.into(), m, n, t)?;
        *out(out_passed, "out_passed")? = i32::from(cert.passed() && cert.within_budget());
        *out(out_points, "out_points")? = cert.points.len();
        Ok(())
    })
}
