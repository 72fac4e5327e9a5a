use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use poplabel_ffi::*;

fn last_error() -> String {
    let p = pl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn config(name: &str, n: usize) -> *mut PlConfig {
    let name = CString::new(name).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { pl_config_new(name.as_ptr(), n, &mut cfg) }, PlStatus::Ok);
    cfg
}

#[test]
fn run_single_cycle_and_read_labels() {
    let cfg = config("single-cycle", 16);
    let mut rec = ptr::null_mut();
    assert_eq!(unsafe { pl_run(cfg, 7, 0, &mut rec) }, PlStatus::Ok);
    unsafe {
        assert!(pl_record_completed(rec));
        assert!(pl_record_valid(rec));
        assert!(pl_record_safe(rec));
        assert_eq!(pl_record_n(rec), 16);
        assert!(pl_record_census(rec) <= 40);
        assert!(pl_record_interactions(rec) > 0);
        let mut labels: Vec<u64> = (0..16)
            .map(|i| {
                let mut l = 0;
                assert_eq!(pl_record_label(rec, i, &mut l), PlStatus::Ok);
                l
            })
            .collect();
        labels.sort_unstable();
        assert_eq!(labels, (1..=16).collect::<Vec<_>>());
        let mut l = 0;
        assert_eq!(pl_record_label(rec, 16, &mut l), PlStatus::InvalidParameter);

        let mut json = ptr::null_mut();
        assert_eq!(pl_record_json(rec, &mut json), PlStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap();
        assert!(text.contains("\"protocol\":\"single-cycle\""));
        pl_string_free(json);
        pl_record_free(rec);
        pl_config_free(cfg);
    }
}

#[test]
fn same_seed_same_record() {
    let cfg = config("interval-2n", 64);
    let json = |seed| unsafe {
        let mut rec = ptr::null_mut();
        assert_eq!(pl_run(cfg, seed, 0, &mut rec), PlStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(pl_record_json(rec, &mut s), PlStatus::Ok);
        let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
        pl_string_free(s);
        pl_record_free(rec);
        out
    };
    assert_eq!(json(3), json(3));
    assert_ne!(json(3), json(4));
    unsafe { pl_config_free(cfg) };
}

#[test]
fn parameters_and_errors() {
    let bad = CString::new("bogus").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { pl_config_new(bad.as_ptr(), 4, &mut cfg) }, PlStatus::UnknownProtocol);
    assert!(last_error().contains("bogus"));
    assert_eq!(unsafe { pl_config_new(ptr::null(), 4, &mut cfg) }, PlStatus::NullPointer);

    let cfg = config("interval-eps", 256);
    unsafe {
        assert_eq!(pl_config_validate(cfg), PlStatus::InvalidParameter);
        assert_eq!(pl_config_set_epsilon(cfg, 0.25), PlStatus::Ok);
        assert_eq!(pl_config_set_leader(cfg, PlLeaderMode::Elected), PlStatus::Ok);
        assert_eq!(pl_config_validate(cfg), PlStatus::Ok);
        let mut rec = ptr::null_mut();
        assert_eq!(pl_run(cfg, 1, 0, &mut rec), PlStatus::Ok);
        assert!(pl_record_valid(rec));
        pl_record_free(rec);
        assert_eq!(pl_config_set_k(cfg, 2), PlStatus::Ok);
        assert_eq!(pl_config_validate(cfg), PlStatus::InvalidParameter);
        pl_config_free(cfg);
        assert_eq!(pl_config_set_k(ptr::null_mut(), 2), PlStatus::NullPointer);
    }

    let cfg = config("k-cycle", 32);
    unsafe {
        assert_eq!(pl_config_set_k(cfg, 2), PlStatus::Ok);
        assert_eq!(pl_config_validate(cfg), PlStatus::Ok);
        pl_config_free(cfg);
    }
}

#[test]
fn sweep_returns_report() {
    let spec = CString::new(r#"{"protocol":"single-cycle","grid":{"n":[4,16]},"trials":10,"master_seed":1}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pl_sweep_json(spec.as_ptr(), 1, &mut out) }, PlStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { pl_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells.iter().all(|c| c["completed"] == 10));

    let broken = CString::new("{").unwrap();
    assert_eq!(unsafe { pl_sweep_json(broken.as_ptr(), 1, &mut out) }, PlStatus::Parse);
}

#[test]
fn bounds() {
    assert_eq!(pl_pool_bound(32, 0), 1024.0);
    assert!((pl_state_lower_bound(5) - (4.0 + 2f64.sqrt())).abs() < 1e-12);
    assert_eq!(pl_silent_safe_bound(10, 9), 10.0);
    assert!(pl_silent_safe_bound(10, 10).is_nan());
}

#[test]
fn protocol_listing() {
    let names: Vec<String> = (0..pl_protocol_count())
        .map(|i| unsafe { CStr::from_ptr(pl_protocol_name(i)) }.to_str().unwrap().to_owned())
        .collect();
    assert_eq!(names.len(), 8);
    assert!(names.contains(&"k-cycle".to_string()));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/poplabel.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["pl_run", "pl_config_new", "pl_sweep_json", "pl_last_error", "pl_string_free"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"poplabel.h\"\nint main(void) { PlConfig *c = 0; PlStatus s = pl_config_new(\"naive\", 3, &c); return s == PL_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler available; header syntax not checked");
        return;
    };
    assert!(status.success());
}
