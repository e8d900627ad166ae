use std::ffi::{c_char, CStr, CString};
use std::ptr;

use suffbench_ffi::*;

fn model_json(name: &str) -> CString {
    let path = format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"));
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn load(name: &str) -> *mut SbModel {
    let mut m = ptr::null_mut();
    let s = unsafe { sb_model_from_json(model_json(name).as_ptr(), &mut m) };
    assert_eq!(s, SbStatus::Ok);
    m
}

fn stat(m: *const SbModel, json: &str) -> *mut SbStatistic {
    let mut t = ptr::null_mut();
    let j = CString::new(json).unwrap();
    assert_eq!(unsafe { sb_statistic_from_json(m, j.as_ptr(), &mut t) }, SbStatus::Ok);
    t
}

fn last_code() -> String {
    unsafe { CStr::from_ptr(sb_last_error_code()) }.to_str().unwrap().to_string()
}

const COUNT: &str = r#"{"axis":"X","map":{"00":"0","01":"1","10":"1","11":"2"}}"#;
const PARITY: &str = r#"{"axis":"X","map":{"00":"e","01":"o","10":"o","11":"e"}}"#;

#[test]
fn sufficiency_round_trip() {
    let m = load("fam_bin.json");
    let (count, parity) = (stat(m, COUNT), stat(m, PARITY));
    let (mut holds, mut cmi) = (false, f64::NAN);
    unsafe {
        assert_eq!(sb_is_sufficient(m, count, 1e-9, &mut holds, &mut cmi), SbStatus::Ok);
        assert!(holds && cmi <= 1e-9);
        assert_eq!(sb_is_sufficient(m, parity, 1e-9, &mut holds, &mut cmi), SbStatus::Ok);
        assert!(!holds && cmi > 0.05);

        let mut n = 0;
        assert_eq!(sb_statistic_num_classes(count, &mut n), SbStatus::Ok);
        assert_eq!(n, 3);
        let mut buf = [9usize; 4];
        let mut written = 0;
        assert_eq!(sb_statistic_labels(count, buf.as_mut_ptr(), 2, &mut written), SbStatus::BufferTooSmall);
        assert_eq!(written, 4);
        assert_eq!(sb_statistic_labels(count, buf.as_mut_ptr(), 4, &mut written), SbStatus::Ok);
        assert_eq!(buf, [0, 1, 1, 2]);

        let mut min = ptr::null_mut();
        assert_eq!(sb_minimal_sufficient(m, ptr::null(), &mut min), SbStatus::Ok);
        assert_eq!(sb_statistic_labels(min, buf.as_mut_ptr(), 4, &mut written), SbStatus::Ok);
        assert_eq!(buf, [0, 1, 1, 2]);

        sb_statistic_free(min);
        sb_statistic_free(count);
        sb_statistic_free(parity);
        sb_model_free(m);
    }
}

#[test]
fn conditional_sufficiency_on_two_axes() {
    let m = load("fam_dep.json");
    let count_x = r#"{"axis":"X","map":{"00":"0","01":"1","10":"1","11":"2"}}"#;
    let t = stat(m, count_x);
    let y = CString::new("Y").unwrap();
    let (mut holds, mut cmi) = (false, f64::NAN);
    unsafe {
        assert_eq!(sb_is_conditionally_sufficient(m, t, y.as_ptr(), 1e-9, &mut holds, &mut cmi), SbStatus::Ok);
        assert!(holds, "cmi {cmi}");
        // Marginal sufficiency of the same statistic on its own axis.
        assert_eq!(sb_is_sufficient(m, t, 1e-9, &mut holds, &mut cmi), SbStatus::Ok);
        assert!(holds);
        sb_statistic_free(t);
        sb_model_free(m);
    }
}

#[test]
fn corner_point_of_ab_pair() {
    let m = load("ab_pair.json");
    let mut h = 0.0;
    unsafe {
        assert_eq!(sb_corner_point(m, &mut h), SbStatus::Ok);
        sb_model_free(m);
    }
    assert!((h - 1.0).abs() <= 1e-9);
}

#[test]
fn errors_carry_codes() {
    let mut m = ptr::null_mut();
    let bad = CString::new(r#"{"theta":["a"],"prior":[1],"axes":[{"name":"X","symbols":["0","1"]}],"cond":[[0.7,0.7]]}"#)
        .unwrap();
    unsafe {
        assert_eq!(sb_model_from_json(bad.as_ptr(), &mut m), SbStatus::Normalization);
        assert_eq!(last_code(), "NORMALIZATION");
        assert!(m.is_null());

        let junk = CString::new("{").unwrap();
        assert_eq!(sb_model_from_json(junk.as_ptr(), &mut m), SbStatus::Parse);
        assert_eq!(sb_model_from_json(ptr::null(), &mut m), SbStatus::NullPointer);
        assert_eq!(last_code(), "NULL_POINTER");

        let invalid = [0xffu8, 0];
        assert_eq!(sb_model_from_json(invalid.as_ptr().cast(), &mut m), SbStatus::InvalidUtf8);

        let fam = load("fam_bin.json");
        let mut t = ptr::null_mut();
        let wrong_axis = CString::new(r#"{"axis":"Q","map":{}}"#).unwrap();
        assert_eq!(sb_statistic_from_json(fam, wrong_axis.as_ptr(), &mut t), SbStatus::Domain);
        assert_eq!(last_code(), "UNKNOWN_AXIS");
        let msg = CStr::from_ptr(sb_last_error_message()).to_str().unwrap();
        assert!(msg.contains('Q'), "{msg}");

        let mut ok = 0.0;
        assert_eq!(sb_corner_point(fam, &mut ok), SbStatus::Ok);
        assert_eq!(last_code(), "");
        sb_model_free(fam);
    }
}

#[test]
fn run_matches_cli_exit_codes() {
    let dir = format!("{}/../../models", env!("CARGO_MANIFEST_DIR"));
    let (model, parity) = (format!("{dir}/fam_bin.json"), format!("{dir}/fam_bin_parity.json"));
    let args: Vec<CString> = ["suffbench", "check-sufficiency", "--model", &model, "--statistic", &parity]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let argv: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let mut report = ptr::null_mut();
    let mut code = -1;
    unsafe {
        assert_eq!(sb_run(argv.len(), argv.as_ptr(), &mut report, &mut code), SbStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_string();
        sb_string_free(report);
        assert_eq!(code, 1);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["exit_code"], 1);
        assert_eq!(v["command"], "check-sufficiency");
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(sb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
