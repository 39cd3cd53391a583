//! C interface to `rankone`.
//!
//! A tower handle holds a parsed construction. Functions return a
//! [`RoStatus`]; on failure the message is available from [`ro_last_error`]
//! until the next call on the same thread. Strings returned through `out`
//! parameters are owned by the caller and released with [`ro_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use rankone::arith::to_pq;
use rankone::config::{parse_construction, parse_level_set};
use rankone::construction::ConstructionSpec;
use rankone::suites::{run_suite, with_geometry, SuiteOptions, Target, TheoremId};
use rankone::{Correlator, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed configuration, family, level selector or argument.
    Config = 3,
    /// A size, pair or enumeration budget was exceeded.
    Budget = 4,
    /// A mathematical precondition of the request does not hold.
    Precondition = 5,
    /// A theorem suite ran and at least one check failed.
    SuiteFailed = 6,
    Internal = 7,
}

/// Opaque construction handle.
pub struct RoTower {
    label: String,
    spec: ConstructionSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> RoStatus {
    match e {
        Error::Config(_)
        | Error::UnknownFamily(_)
        | Error::InvalidParameter { .. }
        | Error::InvalidStage { .. }
        | Error::InvalidLevel(_)
        | Error::SpacerBound { .. } => RoStatus::Config,
        Error::SizeBudget { .. }
        | Error::PairBudget { .. }
        | Error::EnumerationCap { .. }
        | Error::PrefixTooShallow { .. }
        | Error::DepthExceeded { .. } => RoStatus::Budget,
        Error::Precondition(_) | Error::OracleRange { .. } | Error::SearchExhausted { .. } => RoStatus::Precondition,
        Error::Verification(_) | Error::Cache(_) => RoStatus::Internal,
    }
}

struct Failure(RoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> RoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RoStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RoStatus::Internal
        }
    }
}

/// Requires: `p` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RoStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(RoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn give_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(RoStatus::Internal, "string contains NUL".into()))?;
    // SAFETY: callers check `out` for null before producing output
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(RoStatus::NullArgument, "out is null".into()));
    }
    Ok(())
}

/// Parses a construction document such as `{"family": "hk2"}` or
/// `{"stages": [[2, [0, 1]]]}` and returns a new handle in `*out`.
///
/// Requires: `config_json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ro_tower_new(config_json: *const c_char, out: *mut *mut RoTower) -> RoStatus {
    guarded(|| {
        check_out(out)?;
        let text = read_str(config_json, "config_json")?;
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Failure(RoStatus::Config, format!("invalid JSON: {e}")))?;
        let spec = parse_construction(&doc)?;
        spec.geometry(spec.depth_hint().min(1))?;
        let label = doc.get("family").and_then(|v| v.as_str()).map_or_else(|| spec.name(), str::to_string);
        *out = Box::into_raw(Box::new(RoTower { label, spec }));
        Ok(())
    })
}

/// Requires: `tower` is null or a handle from [`ro_tower_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ro_tower_free(tower: *mut RoTower) {
    if !tower.is_null() {
        drop(Box::from_raw(tower));
    }
}

/// Height `h_stage` in decimal.
///
/// Requires: `tower` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ro_tower_height(tower: *const RoTower, stage: usize, out: *mut *mut c_char) -> RoStatus {
    guarded(|| {
        check_out(out)?;
        let t = tower.as_ref().ok_or_else(|| Failure(RoStatus::NullArgument, "tower is null".into()))?;
        let g = t.spec.geometry(stage.max(1))?;
        give_string(g.height(stage).to_string(), out)
    })
}

/// `mu(A ∩ T^k B)` as `p/q`. Levels use the selectors `I`, `J1`, `J2`,
/// `C<c>`, `C<c>:h` and `C<c>[h ..]`; `k` is a decimal integer.
///
/// Requires: `tower` is a live handle; strings are NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ro_correlation(
    tower: *const RoTower,
    a: *const c_char,
    b: *const c_char,
    k: *const c_char,
    out: *mut *mut c_char,
) -> RoStatus {
    guarded(|| {
        check_out(out)?;
        let t = tower.as_ref().ok_or_else(|| Failure(RoStatus::NullArgument, "tower is null".into()))?;
        let (a, b) = (read_str(a, "a")?, read_str(b, "b")?);
        let k: BigInt = read_str(k, "k")?
            .trim()
            .parse()
            .map_err(|_| Failure(RoStatus::Config, "k is not an integer".into()))?;
        let value = with_geometry(&t.spec, 1, |g| {
            let c = Correlator::new(g);
            c.correlation(&parse_level_set(a, g)?, &parse_level_set(b, g)?, &k)
        })?;
        give_string(to_pq(&value), out)
    })
}

/// Runs a theorem suite on the tower and writes its JSON verdict to `*out`.
/// `depth = 0` selects the suite's default depth. The JSON is written even
/// when a check fails, in which case the status is `SuiteFailed`.
///
/// Requires: `tower` is a live handle; `theorem_id` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ro_theorem_json(
    tower: *const RoTower,
    theorem_id: *const c_char,
    depth: usize,
    out: *mut *mut c_char,
) -> RoStatus {
    let mut failed_suite = false;
    let status = guarded(|| {
        check_out(out)?;
        let t = tower.as_ref().ok_or_else(|| Failure(RoStatus::NullArgument, "tower is null".into()))?;
        let id: TheoremId = read_str(theorem_id, "theorem_id")?.parse()?;
        let depth = if depth == 0 { id.defaults()[0].1 } else { depth };
        let target = Target::new(t.label.clone(), t.spec.clone(), depth);
        let report = run_suite(id, &target, &SuiteOptions::default(), None)?;
        failed_suite = !report.passed();
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure(RoStatus::Internal, e.to_string()))?;
        give_string(text, out)
    });
    if status == RoStatus::Ok && failed_suite {
        set_error("at least one check failed");
        return RoStatus::SuiteFailed;
    }
    status
}

/// Requires: `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ro_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null.
#[no_mangle]
pub extern "C" fn ro_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
