//! C interface to `prt-core`.
//!
//! Every fallible call returns a [`PrtStatus`]. Objects are opaque handles
//! released with their matching `*_free` function. Strings returned through
//! `char **` outputs are owned by the caller and released with
//! [`prt_string_free`]. The message of the most recent failure on the calling
//! thread is available from [`prt_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use prt_core::antichain::AlmostAntichain;
use prt_core::coding_tree::CodingTree;
use prt_core::diary::{classify, Diary};
use prt_core::enumeration::{
    brute_force_classes, enumerate_diaries, host_limit, two_chain_id, DiaryCatalog,
};
use prt_core::scheduler::GenericScheduler;
use prt_core::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    DepthExhausted = 4,
    InstanceTooLarge = 5,
    Failed = 6,
    Panic = 7,
}

/// Opaque coding tree.
pub struct PrtCodingTree(CodingTree);

/// Opaque almost antichain together with its host.
pub struct PrtAntichain(AlmostAntichain);

/// Opaque canonical diary.
pub struct PrtDiary(Diary);

/// Opaque diary catalog.
pub struct PrtCatalog(DiaryCatalog);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PrtStatus {
    match e {
        Error::Parse { .. } | Error::InvalidDigit(_) | Error::InvalidWord(_) => PrtStatus::Parse,
        Error::DepthExhausted(_) => PrtStatus::DepthExhausted,
        Error::InstanceTooLarge(_) => PrtStatus::InstanceTooLarge,
        Error::Config(_) | Error::NotAChain | Error::NotAlmostAntichain => {
            PrtStatus::InvalidArgument
        }
        _ => PrtStatus::Failed,
    }
}

fn guard<F: FnOnce() -> Result<(), (PrtStatus, String)>>(f: F) -> PrtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PrtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PrtStatus::Panic
        }
    }
}

fn core<T>(r: prt_core::Result<T>) -> Result<T, (PrtStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (PrtStatus, String) {
    (PrtStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: &str) -> (PrtStatus, String) {
    (PrtStatus::InvalidArgument, msg.into())
}

unsafe fn text_arg<'a>(s: *const c_char) -> Result<&'a str, (PrtStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (PrtStatus::Parse, "input is not UTF-8".into()))
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (PrtStatus, String)> {
    let c = CString::new(s).map_err(|_| invalid("string contains a NUL byte"))?;
    *out = c.into_raw();
    Ok(())
}

fn scheduler(has_seed: bool, seed: u64) -> GenericScheduler {
    if has_seed {
        GenericScheduler::seeded(seed)
    } else {
        GenericScheduler::new()
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn prt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generates a coding tree of the given depth. Without a seed the canonical
/// scheduler is used.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prt_coding_tree_generate(
    depth: usize,
    has_seed: bool,
    seed: u64,
    out: *mut *mut PrtCodingTree,
) -> PrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let mut sched = scheduler(has_seed, seed);
        put(out, PrtCodingTree(CodingTree::generate(depth, &mut sched)));
        Ok(())
    })
}

/// Parses a coding tree from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prt_coding_tree_from_text(
    text: *const c_char,
    out: *mut *mut PrtCodingTree,
) -> PrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = core(CodingTree::from_text(text_arg(text)?))?;
        put(out, PrtCodingTree(t));
        Ok(())
    })
}

/// Depth of the tree.
///
/// # Safety
/// `tree` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_coding_tree_depth(
    tree: *const PrtCodingTree,
    out: *mut usize,
) -> PrtStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = t.0.depth();
        Ok(())
    })
}

/// Writes the `n`-th coding node as a digit string (`-` for the root).
///
/// # Safety
/// `tree` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_coding_tree_coding_node(
    tree: *const PrtCodingTree,
    n: usize,
    out: *mut *mut c_char,
) -> PrtStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        if n >= t.0.depth() {
            return Err(invalid("coding node index out of range"));
        }
        put_string(out, t.0.coding_node(n).to_string())
    })
}

/// Serializes the tree to text.
///
/// # Safety
/// `tree` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_coding_tree_to_text(
    tree: *const PrtCodingTree,
    out: *mut *mut c_char,
) -> PrtStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        put_string(out, t.0.to_text())
    })
}

/// # Safety
/// `tree` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prt_coding_tree_free(tree: *mut PrtCodingTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Builds a guided almost antichain with `levels` levels.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prt_antichain_build(
    levels: usize,
    has_seed: bool,
    seed: u64,
    out: *mut *mut PrtAntichain,
) -> PrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let a = core(AlmostAntichain::build_guided(
            scheduler(has_seed, seed),
            levels,
            host_limit(levels),
        ))?;
        put(out, PrtAntichain(a));
        Ok(())
    })
}

/// Number of levels.
///
/// # Safety
/// `a` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_antichain_len(a: *const PrtAntichain, out: *mut usize) -> PrtStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = a.0.len();
        Ok(())
    })
}

/// Checks every level of the antichain; `out` is set to whether all pass.
///
/// # Safety
/// `a` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_antichain_audit(a: *const PrtAntichain, out: *mut bool) -> PrtStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = (0..a.0.len()).all(|m| a.0.audit_level(m).passed());
        Ok(())
    })
}

/// Serializes the antichain to text.
///
/// # Safety
/// `a` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_antichain_to_text(
    a: *const PrtAntichain,
    out: *mut *mut c_char,
) -> PrtStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        put_string(out, a.0.to_text())
    })
}

/// # Safety
/// `a` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prt_antichain_free(a: *mut PrtAntichain) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Classifies the chain formed by the antichain coding nodes at the given
/// level indices.
///
/// # Safety
/// `a` and `out` must be valid pointers; `indices` must point to `count`
/// values.
#[no_mangle]
pub unsafe extern "C" fn prt_diary_classify(
    a: *const PrtAntichain,
    indices: *const usize,
    count: usize,
    out: *mut *mut PrtDiary,
) -> PrtStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() || (indices.is_null() && count > 0) {
            return Err(null());
        }
        let idx = if count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(indices, count)
        };
        let mut chain = Vec::with_capacity(count);
        for &i in idx {
            if i >= a.0.len() {
                return Err(invalid("antichain level out of range"));
            }
            chain.push(a.0.level(i).coding_node().clone());
        }
        let d = core(classify(&chain, a.0.host()))?;
        put(out, PrtDiary(d));
        Ok(())
    })
}

/// Parses a diary from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prt_diary_from_text(
    text: *const c_char,
    out: *mut *mut PrtDiary,
) -> PrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let d = core(Diary::from_text(text_arg(text)?))?;
        put(out, PrtDiary(d));
        Ok(())
    })
}

/// Height (number of levels) of the diary.
///
/// # Safety
/// `d` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_diary_height(d: *const PrtDiary, out: *mut usize) -> PrtStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = d.0.height();
        Ok(())
    })
}

/// Case number 1..=7 of a 2-chain diary, or 0 for any other diary.
///
/// # Safety
/// `d` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_diary_two_chain_id(d: *const PrtDiary, out: *mut u32) -> PrtStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = two_chain_id(&d.0).map_or(0, |id| id as u32);
        Ok(())
    })
}

/// Serializes the diary to text.
///
/// # Safety
/// `d` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_diary_to_text(d: *const PrtDiary, out: *mut *mut c_char) -> PrtStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        put_string(out, d.0.to_text())
    })
}

/// # Safety
/// `d` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prt_diary_free(d: *mut PrtDiary) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Catalog of `p`-chain diaries realized among the first `levels` antichain
/// coding nodes. With `brute_force` every chain is classified; otherwise
/// diaries are enumerated from the axioms and filtered for realizability.
///
/// # Safety
/// `a` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_catalog_build(
    a: *const PrtAntichain,
    p: usize,
    levels: usize,
    brute_force: bool,
    out: *mut *mut PrtCatalog,
) -> PrtStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        if p == 0 {
            return Err(invalid("p must be positive"));
        }
        let cat = if brute_force {
            core(brute_force_classes(p, &a.0, levels))?
        } else {
            core(enumerate_diaries(
                p,
                prt_core::enumeration::default_max_height(p),
                &a.0,
                levels,
            ))?
        };
        put(out, PrtCatalog(cat));
        Ok(())
    })
}

/// Parses a catalog from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prt_catalog_from_text(
    text: *const c_char,
    out: *mut *mut PrtCatalog,
) -> PrtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let c = core(DiaryCatalog::from_text(text_arg(text)?))?;
        put(out, PrtCatalog(c));
        Ok(())
    })
}

/// Number of diaries in the catalog.
///
/// # Safety
/// `c` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_catalog_len(c: *const PrtCatalog, out: *mut usize) -> PrtStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = c.0.len();
        Ok(())
    })
}

/// Sets `out` to whether two catalogs contain the same diaries.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn prt_catalog_equal(
    a: *const PrtCatalog,
    b: *const PrtCatalog,
    out: *mut bool,
) -> PrtStatus {
    guard(|| {
        let (a, b) = (a.as_ref().ok_or_else(null)?, b.as_ref().ok_or_else(null)?);
        if out.is_null() {
            return Err(null());
        }
        *out = a.0.diary_set() == b.0.diary_set();
        Ok(())
    })
}

/// Serializes the catalog to text.
///
/// # Safety
/// `c` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn prt_catalog_to_text(
    c: *const PrtCatalog,
    out: *mut *mut c_char,
) -> PrtStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        put_string(out, c.0.to_text())
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn prt_catalog_free(c: *mut PrtCatalog) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
