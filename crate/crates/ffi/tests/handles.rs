use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use prt_ffi::*;

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    prt_string_free(s);
    out
}

#[test]
fn coding_tree_text_roundtrip() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(
            prt_coding_tree_generate(20, false, 0, &mut t),
            PrtStatus::Ok
        );
        let mut depth = 0;
        assert_eq!(prt_coding_tree_depth(t, &mut depth), PrtStatus::Ok);
        assert_eq!(depth, 20);
        let mut s = ptr::null_mut();
        assert_eq!(prt_coding_tree_to_text(t, &mut s), PrtStatus::Ok);
        let text = take(s);
        let c = CString::new(text.clone()).unwrap();
        let mut u = ptr::null_mut();
        assert_eq!(prt_coding_tree_from_text(c.as_ptr(), &mut u), PrtStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(prt_coding_tree_to_text(u, &mut s), PrtStatus::Ok);
        assert_eq!(take(s), text);
        let mut s = ptr::null_mut();
        assert_eq!(prt_coding_tree_coding_node(t, 0, &mut s), PrtStatus::Ok);
        assert_eq!(take(s), "-");
        assert_eq!(
            prt_coding_tree_coding_node(t, 20, &mut s),
            PrtStatus::InvalidArgument
        );
        prt_coding_tree_free(t);
        prt_coding_tree_free(u);
    }
}

#[test]
fn catalogs_agree_through_the_c_interface() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(prt_antichain_build(24, false, 0, &mut a), PrtStatus::Ok);
        let mut ok = false;
        assert_eq!(prt_antichain_audit(a, &mut ok), PrtStatus::Ok);
        assert!(ok);
        let (mut e, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(prt_catalog_build(a, 2, 24, false, &mut e), PrtStatus::Ok);
        assert_eq!(prt_catalog_build(a, 2, 24, true, &mut b), PrtStatus::Ok);
        let mut n = 0;
        assert_eq!(prt_catalog_len(b, &mut n), PrtStatus::Ok);
        assert_eq!(n, 7);
        let mut same = false;
        assert_eq!(prt_catalog_equal(e, b, &mut same), PrtStatus::Ok);
        assert!(same);
        let mut s = ptr::null_mut();
        assert_eq!(prt_catalog_to_text(b, &mut s), PrtStatus::Ok);
        let c = CString::new(take(s)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(prt_catalog_from_text(c.as_ptr(), &mut back), PrtStatus::Ok);
        assert_eq!(prt_catalog_equal(back, b, &mut same), PrtStatus::Ok);
        assert!(same);
        for h in [e, b, back] {
            prt_catalog_free(h);
        }
        prt_antichain_free(a);
    }
}

#[test]
fn classified_pairs_have_a_case_number() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(prt_antichain_build(8, true, 7, &mut a), PrtStatus::Ok);
        let mut seen = 0;
        for i in 0..8usize {
            for j in i + 1..8 {
                let mut d = ptr::null_mut();
                let idx = [i, j];
                match prt_diary_classify(a, idx.as_ptr(), 2, &mut d) {
                    PrtStatus::Ok => {
                        let mut id = 0;
                        assert_eq!(prt_diary_two_chain_id(d, &mut id), PrtStatus::Ok);
                        assert!((1..=7).contains(&id));
                        let mut s = ptr::null_mut();
                        assert_eq!(prt_diary_to_text(d, &mut s), PrtStatus::Ok);
                        let c = CString::new(take(s)).unwrap();
                        let mut e = ptr::null_mut();
                        assert_eq!(prt_diary_from_text(c.as_ptr(), &mut e), PrtStatus::Ok);
                        prt_diary_free(e);
                        prt_diary_free(d);
                        seen += 1;
                    }
                    PrtStatus::InvalidArgument => assert!(!prt_last_error().is_null()),
                    other => panic!("unexpected status {other:?}"),
                }
            }
        }
        assert!(seen > 0);
        prt_antichain_free(a);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(
            prt_coding_tree_from_text(ptr::null(), &mut t),
            PrtStatus::NullPointer
        );
        let bad = CString::new("not a tree").unwrap();
        assert_eq!(
            prt_coding_tree_from_text(bad.as_ptr(), &mut t),
            PrtStatus::Parse
        );
        let msg = CStr::from_ptr(prt_last_error()).to_str().unwrap();
        assert!(!msg.is_empty());
        let mut d = 0;
        assert_eq!(
            prt_coding_tree_depth(ptr::null(), &mut d),
            PrtStatus::NullPointer
        );
        prt_coding_tree_free(ptr::null_mut());
        prt_string_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/prt.h");
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    assert!(status.success());
}
