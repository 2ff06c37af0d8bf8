use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use netdecide_ffi::*;

fn last_error() -> String {
    let p = nd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_scenario() -> *mut NdScenario {
    let json = CString::new(r#"{"agents": 10, "split": 5, "mean_degree": 4, "replicas": 2, "iterations": 300}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nd_scenario_from_json(json.as_ptr(), &mut s) }, NdStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn run_roundtrip() {
    let s = small_scenario();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(nd_scenario_configure(s, 7, 0, 0), NdStatus::Ok);
        assert_eq!(nd_run(s, &mut r), NdStatus::Ok);
        let len = nd_result_len(r);
        assert_eq!(len, 301);
        let mut buf = vec![0.0; len + 5];
        let mut written = 0;
        assert_eq!(nd_result_msd_db(r, 1, buf.as_mut_ptr(), buf.len(), &mut written), NdStatus::Ok);
        assert_eq!(written, len);
        assert!(buf[..len].iter().all(|v| v.is_finite()));
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(nd_result_steady_state(r, &mut a, &mut b), NdStatus::Ok);
        assert!(a.is_finite() && b.is_finite());
        let mut median = 0.0;
        assert_eq!(nd_result_median_agreement(r, &mut median), NdStatus::Ok);
        let json = nd_result_summary_json(r);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        nd_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["replicas"], 2);
        nd_result_free(r);
        nd_scenario_free(s);
    }
}

#[test]
fn same_seed_same_curve() {
    let curve = |seed| unsafe {
        let s = small_scenario();
        nd_scenario_configure(s, seed, 1, 200);
        let mut r = ptr::null_mut();
        assert_eq!(nd_run(s, &mut r), NdStatus::Ok);
        let mut buf = vec![0.0; 201];
        nd_result_msd_db(r, 0, buf.as_mut_ptr(), buf.len(), ptr::null_mut());
        nd_result_free(r);
        nd_scenario_free(s);
        buf
    };
    assert_eq!(curve(3), curve(3));
    assert_ne!(curve(3), curve(4));
}

#[test]
fn error_codes_and_messages() {
    let mut s = ptr::null_mut();
    unsafe {
        let bad = CString::new("nope").unwrap();
        assert_eq!(nd_scenario_preset(bad.as_ptr(), &mut s), NdStatus::Config);
        assert!(s.is_null());
        assert!(last_error().contains("nope"));

        let unstable = CString::new(r#"{"mu": 5.0}"#).unwrap();
        assert_eq!(nd_scenario_from_json(unstable.as_ptr(), &mut s), NdStatus::Config);
        assert!(last_error().contains("mu"));

        let junk = CString::new("{").unwrap();
        assert_eq!(nd_scenario_from_json(junk.as_ptr(), &mut s), NdStatus::Config);

        assert_eq!(nd_scenario_preset(ptr::null(), &mut s), NdStatus::NullPointer);
        assert_eq!(nd_run(ptr::null(), &mut ptr::null_mut()), NdStatus::NullPointer);

        let fig5 = CString::new("fig5").unwrap();
        assert_eq!(nd_scenario_preset(fig5.as_ptr(), ptr::null_mut()), NdStatus::NullPointer);
        assert_eq!(nd_scenario_preset(fig5.as_ptr(), &mut s), NdStatus::Ok);
        assert!(nd_last_error().is_null());
        assert_eq!(nd_result_msd_db(ptr::null(), 0, ptr::null_mut(), 0, ptr::null_mut()), NdStatus::NullPointer);
        nd_scenario_free(s);

        let invalid_utf8 = [0xffu8, 0];
        assert_eq!(nd_scenario_preset(invalid_utf8.as_ptr().cast(), &mut s), NdStatus::InvalidUtf8);

        nd_scenario_free(ptr::null_mut());
        nd_result_free(ptr::null_mut());
        nd_string_free(ptr::null_mut());
    }
}

#[test]
fn scalar_helpers() {
    assert!((nd_quorum_prob(3, 4, 1, 1.0) - 0.75).abs() < 1e-15);
    assert!(nd_quorum_prob(0, 4, 1, 1.0).is_nan());
    assert!(nd_quorum_prob(5, 4, 1, 1.0).is_nan());
    let mut rho = [0.0; 3];
    for (i, k) in (1..=3).enumerate() {
        assert_eq!(unsafe { nd_meanfield_rate(6, k, &mut rho[i]) }, NdStatus::Ok);
    }
    assert!(rho[0] > rho[1] && rho[1] > rho[2]);
    assert_eq!(unsafe { nd_meanfield_rate(1, 1, &mut rho[0]) }, NdStatus::Config);
    let v = unsafe { CStr::from_ptr(nd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/netdecide.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["nd_run", "nd_last_error", "nd_result_free", "ND_STATUS_NUMERICAL = 3", "typedef struct NdScenario NdScenario"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"netdecide.h\"\nint probe(void) { NdScenario *s = 0; return nd_scenario_preset(\"fig5\", &s) == ND_STATUS_OK; }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler available, skipping");
            return;
        }
    };
    assert!(status.success());
}
