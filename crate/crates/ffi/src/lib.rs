//! C ABI over the `iface` library.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every fallible call returns an [`IfaceStatus`] and
//! records a message readable through [`iface_last_error`].

use iface::classify::{ranks_and_class, restricted_invariants, Thresholds};
use iface::cli::{synthesize, SynthRequest};
use iface::synth_general::SPECIAL_PHI;
use iface::symplectic::TAU_SYM;
use iface::{Class, Error, Interface, Library, SynthPlan};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfaceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Ambiguous = 3,
    Infeasible = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfaceClass {
    Identity = 0,
    Qndi = 1,
    Tms = 2,
    Bs = 3,
    Stms = 4,
    Sqndi = 5,
    Swap = 6,
}

impl From<Class> for IfaceClass {
    fn from(c: Class) -> Self {
        match c {
            Class::Identity => IfaceClass::Identity,
            Class::Qndi => IfaceClass::Qndi,
            Class::Tms => IfaceClass::Tms,
            Class::Bs => IfaceClass::Bs,
            Class::Stms => IfaceClass::Stms,
            Class::Sqndi => IfaceClass::Sqndi,
            Class::Swap => IfaceClass::Swap,
        }
    }
}

impl From<IfaceClass> for Class {
    fn from(c: IfaceClass) -> Self {
        match c {
            IfaceClass::Identity => Class::Identity,
            IfaceClass::Qndi => Class::Qndi,
            IfaceClass::Tms => Class::Tms,
            IfaceClass::Bs => Class::Bs,
            IfaceClass::Stms => Class::Stms,
            IfaceClass::Sqndi => Class::Sqndi,
            IfaceClass::Swap => Class::Swap,
        }
    }
}

/// Invariants of an interface. `lambda`/`kappa` are valid only when the
/// matching `has_*` flag is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfaceInvariants {
    pub class_: IfaceClass,
    pub chi: f64,
    pub n_r: u8,
    pub n_t: u8,
    pub has_lambda: bool,
    pub lambda: f64,
    pub has_kappa: bool,
    pub kappa: f64,
}

/// Opaque 4×4 symplectic matrix.
pub struct IfaceInterface(Interface);

/// Opaque component library.
pub struct IfaceLibrary(Library);

/// Opaque synthesized plan.
pub struct IfacePlan(SynthPlan);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IfaceStatus {
    match e.exit_code() {
        3 => IfaceStatus::Ambiguous,
        4 => IfaceStatus::Infeasible,
        _ => IfaceStatus::InvalidInput,
    }
}

/// Run `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), IfaceStatus>) -> IfaceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IfaceStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            IfaceStatus::Internal
        }
    }
}

fn fail(e: Error) -> IfaceStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> IfaceStatus {
    set_error(&format!("null pointer: {what}"));
    IfaceStatus::NullPointer
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, IfaceStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(Error::Input(format!("{what} is not UTF-8"))))
}

/// Copy the last error message into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn iface_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Build an interface from 16 row-major entries; rejects non-symplectic input.
///
/// # Safety
/// `entries` must point to 16 doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iface_interface_new(entries: *const f64, out: *mut *mut IfaceInterface) -> IfaceStatus {
    guard(|| {
        if entries.is_null() || out.is_null() {
            return Err(null("entries/out"));
        }
        let e = std::slice::from_raw_parts(entries, 16);
        let mut m = [[0.0; 4]; 4];
        for (k, x) in e.iter().enumerate() {
            m[k / 4][k % 4] = *x;
        }
        let t = Interface::from_rows(m);
        t.validate(TAU_SYM).map_err(fail)?;
        *out = Box::into_raw(Box::new(IfaceInterface(t)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `iface_interface_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iface_interface_free(h: *mut IfaceInterface) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Classify an interface; `restricted` adds Λ and κ.
///
/// # Safety
/// `h` must be a live interface handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iface_classify(h: *const IfaceInterface, restricted: bool, out: *mut IfaceInvariants) -> IfaceStatus {
    guard(|| {
        if h.is_null() || out.is_null() {
            return Err(null("interface/out"));
        }
        let th = Thresholds::default();
        let t = &(*h).0;
        let inv = if restricted { restricted_invariants(t, &th) } else { ranks_and_class(t, &th) }.map_err(fail)?;
        *out = IfaceInvariants {
            class_: inv.class.into(),
            chi: inv.chi,
            n_r: inv.n_r,
            n_t: inv.n_t,
            has_lambda: inv.lambda.is_some(),
            lambda: inv.lambda.unwrap_or(f64::NAN),
            has_kappa: inv.kappa.is_some(),
            kappa: inv.kappa.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Parse a library from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iface_library_from_json(json: *const c_char, out: *mut *mut IfaceLibrary) -> IfaceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let lib = iface::json::library_from_str(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(IfaceLibrary(lib)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `iface_library_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iface_library_free(h: *mut IfaceLibrary) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

fn opt(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Synthesize a plan over the library's components in id order.
/// Pass NaN for `chi`, `lambda` or `kappa` to leave them unset.
///
/// # Safety
/// `lib` must be a live library handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iface_synth(
    lib: *const IfaceLibrary,
    target: IfaceClass,
    chi: f64,
    lambda: f64,
    kappa: f64,
    restricted: bool,
    out: *mut *mut IfacePlan,
) -> IfaceStatus {
    guard(|| {
        if lib.is_null() || out.is_null() {
            return Err(null("library/out"));
        }
        let th = Thresholds::default();
        let lib = &(*lib).0;
        let comps = lib.component_list(&th).map_err(fail)?;
        let req = SynthRequest {
            class: target.into(),
            chi: opt(chi),
            lambda: opt(lambda),
            kappa: opt(kappa),
            restricted: restricted || lib.restricted_mode == Some(2),
            scheme: None,
            knob_phi: SPECIAL_PHI,
            shortcut: true,
        };
        let plan = synthesize(&comps, &req, &th).map_err(fail)?;
        *out = Box::into_raw(Box::new(IfacePlan(plan)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `iface_synth` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iface_plan_free(h: *mut IfacePlan) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Residual of the plan against its target.
///
/// # Safety
/// `h` must be a live plan handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iface_plan_residual(h: *const IfacePlan, out: *mut f64) -> IfaceStatus {
    guard(|| {
        if h.is_null() || out.is_null() {
            return Err(null("plan/out"));
        }
        *out = (*h).0.residual;
        Ok(())
    })
}

/// Achieved matrix, 16 row-major entries.
///
/// # Safety
/// `h` must be a live plan handle and `out` valid for 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn iface_plan_matrix(h: *const IfacePlan, out: *mut f64) -> IfaceStatus {
    guard(|| {
        if h.is_null() || out.is_null() {
            return Err(null("plan/out"));
        }
        let m = (*h).0.achieved.m;
        let dst = std::slice::from_raw_parts_mut(out, 16);
        for (k, x) in dst.iter_mut().enumerate() {
            *x = m[k / 4][k % 4];
        }
        Ok(())
    })
}

/// Plan JSON; release with `iface_string_free`.
///
/// # Safety
/// `h` must be a live plan handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn iface_plan_to_json(h: *const IfacePlan, out: *mut *mut c_char) -> IfaceStatus {
    guard(|| {
        if h.is_null() || out.is_null() {
            return Err(null("plan/out"));
        }
        let text = iface::json::plan_to_string(&(*h).0);
        *out = CString::new(text).map_err(|_| fail(Error::Input("plan JSON contains NUL".into())))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iface_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
