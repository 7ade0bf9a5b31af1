//! C ABI over `eqalg-core`.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! fallible call returns an [`EqalgStatus`]; the message of the last failure
//! on the calling thread is available from [`eqalg_last_error`]. Strings
//! returned by the library are released with [`eqalg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eqalg_core::eqalgebra::{self, GeneratorSet, SamplingConfig, Source};
use eqalg_core::equivalence::{self, EquationInstance, Verdict};
use eqalg_core::exprcore::CanonicalForm;
use eqalg_core::invariants::{self, Overall};
use eqalg_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqalgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Math = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqalgSource {
    Paper = 0,
    Derived = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqalgVerdict {
    EquivalentPerCriterion = 0,
    NotEquivalent = 1,
    BothDegenerate = 2,
    MixedDegenerate = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqalgInvariance {
    Absolute = 0,
    Relative = 1,
    Neither = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EqalgRankResult {
    pub order: u32,
    pub rank: usize,
    pub variable_count: usize,
    pub invariant_count: usize,
    pub samples_used: usize,
}

/// A canonical expression over the order-2 chart.
pub struct EqalgExpr(CanonicalForm);

/// A discretized generator set `{Y0, Y1, Y2, Y3, Y^0, ..., Y^K}`.
pub struct EqalgGenerators(GeneratorSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: EqalgStatus, msg: impl Into<String>) -> EqalgStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> EqalgStatus {
    let status = match e {
        Error::Syntax { .. } | Error::UnknownIdentifier(_) => EqalgStatus::Parse,
        Error::InvalidArgument(_) | Error::OrderOverflow(_) | Error::Unbound(_) => {
            EqalgStatus::InvalidArgument
        }
        _ => EqalgStatus::Math,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> EqalgStatus) -> EqalgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(EqalgStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, EqalgStatus> {
    if p.is_null() {
        return Err(fail(EqalgStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EqalgStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior nuls removed")
        .into_raw()
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($p:expr, $what:literal) => {
        if $p.is_null() {
            return fail(EqalgStatus::NullPointer, concat!("null ", $what));
        }
    };
}

/// Copy of the last error message on this thread, or null if the last call
/// succeeded. Release with [`eqalg_string_free`].
#[no_mangle]
pub extern "C" fn eqalg_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |m| m.clone().into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, released once.
#[no_mangle]
pub unsafe extern "C" fn eqalg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and canonicalizes an expression over the order-2 chart. The names
/// `R`, `R1_printed`, `R1_corrected` and `R2` are predefined.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eqalg_expr_parse(
    text: *const c_char,
    out: *mut *mut EqalgExpr,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let text = try_status!(read_str(text));
        let form = try_status!(invariants::parse_candidate(text, 2)
            .and_then(|e| e.canonicalize())
            .map_err(from_core));
        *out = Box::into_raw(Box::new(EqalgExpr(form)));
        EqalgStatus::Ok
    })
}

/// Canonical text of an expression, or null for a null handle. Release with
/// [`eqalg_string_free`].
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eqalg_expr_to_string(e: *const EqalgExpr) -> *mut c_char {
    match e.as_ref() {
        Some(e) => to_c_string(e.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn eqalg_expr_equals(
    a: *const EqalgExpr,
    b: *const EqalgExpr,
    out: *mut bool,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        match (a.as_ref(), b.as_ref()) {
            (Some(a), Some(b)) => {
                *out = a.0 == b.0;
                EqalgStatus::Ok
            }
            _ => fail(EqalgStatus::NullPointer, "null expression handle"),
        }
    })
}

/// # Safety
/// `e` must be null or a handle from [`eqalg_expr_parse`], released once.
#[no_mangle]
pub unsafe extern "C" fn eqalg_expr_free(e: *mut EqalgExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn eqalg_generators_build(
    source: EqalgSource,
    k: u32,
    out: *mut *mut EqalgGenerators,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let source = match source {
            EqalgSource::Paper => Source::PaperPrinted,
            EqalgSource::Derived => Source::Derived,
        };
        let g = try_status!(eqalgebra::build_generators(source, k).map_err(from_core));
        *out = Box::into_raw(Box::new(EqalgGenerators(g)));
        EqalgStatus::Ok
    })
}

/// Number of generators, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eqalg_generators_len(g: *const EqalgGenerators) -> usize {
    g.as_ref().map_or(0, |g| g.0.generators.len())
}

/// # Safety
/// `g` must be null or a handle from [`eqalg_generators_build`], released once.
#[no_mangle]
pub unsafe extern "C" fn eqalg_generators_free(g: *mut EqalgGenerators) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Sampled generic rank of the order-`order` prolongation.
///
/// # Safety
/// `g` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn eqalg_rank(
    g: *const EqalgGenerators,
    order: u32,
    seed: u64,
    samples: usize,
    out: *mut EqalgRankResult,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let Some(g) = g.as_ref() else {
            return fail(EqalgStatus::NullPointer, "null generator handle");
        };
        let cfg = SamplingConfig {
            seed,
            samples,
            ..SamplingConfig::default()
        };
        let r = try_status!(eqalgebra::prolonged_rank(&g.0, order, &cfg).map_err(from_core));
        *out = EqalgRankResult {
            order: r.order,
            rank: r.rank,
            variable_count: r.variable_count,
            invariant_count: r.invariant_count,
            samples_used: r.samples_used,
        };
        EqalgStatus::Ok
    })
}

/// Largest closing `k`, or -1 if no truncation closes.
///
/// # Safety
/// `g` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn eqalg_closure_max_k(
    g: *const EqalgGenerators,
    out: *mut i32,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let Some(g) = g.as_ref() else {
            return fail(EqalgStatus::NullPointer, "null generator handle");
        };
        let r = try_status!(eqalgebra::closure_max_k(&g.0).map_err(from_core));
        *out = r.max_closing_k.map_or(-1, |k| k as i32);
        EqalgStatus::Ok
    })
}

/// Overall invariance of `e` under the prolonged generators.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn eqalg_is_absolute(
    e: *const EqalgExpr,
    g: *const EqalgGenerators,
    order: u32,
    out: *mut EqalgInvariance,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let (Some(e), Some(g)) = (e.as_ref(), g.as_ref()) else {
            return fail(EqalgStatus::NullPointer, "null handle");
        };
        let r =
            try_status!(invariants::is_absolute(&e.0.to_expr(), &g.0, order).map_err(from_core));
        *out = match r.overall {
            Overall::Absolute => EqalgInvariance::Absolute,
            Overall::Relative => EqalgInvariance::Relative,
            Overall::Neither => EqalgInvariance::Neither,
        };
        EqalgStatus::Ok
    })
}

/// Compares two right-hand sides `f(u, sigma)` by their signatures.
///
/// # Safety
/// Strings must be nul-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn eqalg_check_equivalence(
    f1: *const c_char,
    f2: *const c_char,
    out: *mut EqalgVerdict,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let a = try_status!(EquationInstance::parse(try_status!(read_str(f1))).map_err(from_core));
        let b = try_status!(EquationInstance::parse(try_status!(read_str(f2))).map_err(from_core));
        let v = try_status!(equivalence::check_equivalence(&a, &b).map_err(from_core));
        *out = match v {
            Verdict::EquivalentPerCriterion => EqalgVerdict::EquivalentPerCriterion,
            Verdict::NotEquivalent => EqalgVerdict::NotEquivalent,
            Verdict::BothDegenerate => EqalgVerdict::BothDegenerate,
            Verdict::MixedDegenerate => EqalgVerdict::MixedDegenerate,
        };
        EqalgStatus::Ok
    })
}

/// Signature of `f(u, sigma)` as JSON
/// `{"degenerate": bool, "rho1": string|null, "rho2": string|null}`.
/// Release the result with [`eqalg_string_free`].
///
/// # Safety
/// `f` must be nul-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn eqalg_signature_json(
    f: *const c_char,
    out: *mut *mut c_char,
) -> EqalgStatus {
    guard(|| {
        non_null!(out, "output pointer");
        let eq = try_status!(EquationInstance::parse(try_status!(read_str(f))).map_err(from_core));
        let sig = try_status!(equivalence::signature_of(&eq).map_err(from_core));
        let v = serde_json::json!({
            "degenerate": sig.degenerate(),
            "rho1": sig.rho1().map(|r| r.to_string()),
            "rho2": sig.rho2().map(|r| r.to_string()),
        });
        *out = to_c_string(v.to_string());
        EqalgStatus::Ok
    })
}
