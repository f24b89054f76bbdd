use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use wcrt_ffi::*;

fn reference() -> *mut WcrtTopology {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { wcrt_topology_reference(&mut t) }, WcrtStatus::Ok);
    assert!(!t.is_null());
    t
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(wcrt_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn bounds_through_the_c_abi() {
    let t = reference();
    let (c, p) = (CString::new("cva6").unwrap(), CString::new("spm").unwrap());
    let mut iso = 0;
    let st = unsafe { wcrt_isolation_bound(t, c.as_ptr(), p.as_ptr(), WcrtKind::Read, 16, WcrtMemoryCase::None, &mut iso) };
    assert_eq!(st, WcrtStatus::Ok);
    // 25 cycles of the 5 ns crossbar clock
    assert_eq!(iso, 125_000);
    let mut h = 0;
    let st = unsafe { wcrt_response_time_bound(t, c.as_ptr(), p.as_ptr(), WcrtKind::Read, 16, WcrtMemoryCase::None, 1, 0, &mut h) };
    assert_eq!(st, WcrtStatus::Ok);
    assert!(h > iso);
    unsafe { wcrt_topology_free(t) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let bad = CString::new("{\"clocks\": [").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { wcrt_topology_parse(bad.as_ptr(), &mut t) }, WcrtStatus::Parse);
    assert!(t.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { wcrt_topology_parse(ptr::null(), &mut t) }, WcrtStatus::NullPointer);

    let t = reference();
    let (c, p) = (CString::new("cva6").unwrap(), CString::new("mem").unwrap());
    let mut out = 0;
    let st = unsafe { wcrt_isolation_bound(t, c.as_ptr(), p.as_ptr(), WcrtKind::Read, 4, WcrtMemoryCase::None, &mut out) };
    assert_eq!(st, WcrtStatus::Analysis);
    assert!(last_error().contains("memory case"), "{}", last_error());

    let nobody = CString::new("nobody").unwrap();
    let st = unsafe { wcrt_isolation_bound(t, nobody.as_ptr(), p.as_ptr(), WcrtKind::Read, 4, WcrtMemoryCase::Hit, &mut out) };
    assert_eq!(st, WcrtStatus::NotFound);
    unsafe { wcrt_topology_free(t) };
}

const SCENARIO: &str = r#"{"scenario": {"name": "s", "observed": "cva6", "workloads": [
  {"controller": "cva6", "mode": "isolation", "target": "spm", "count": 200, "beta": {"fixed": 8}, "kind": "read"}]}}"#;

#[test]
fn simulation_handles() {
    let t = reference();
    let s = CString::new(SCENARIO).unwrap();
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { wcrt_simulate(t, s.as_ptr(), 3, 0, &mut a) }, WcrtStatus::Ok);
    assert_eq!(unsafe { wcrt_simulate(t, s.as_ptr(), 3, 0, &mut b) }, WcrtStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { wcrt_trace_len(a, &mut n) }, WcrtStatus::Ok);
    assert_eq!(n, 200);
    let (ha, hb) = unsafe { (CStr::from_ptr(wcrt_trace_hash(a)), CStr::from_ptr(wcrt_trace_hash(b))) };
    assert_eq!(ha, hb);
    assert_eq!(ha.to_bytes().len(), 64);
    let mut m = 0;
    assert_eq!(unsafe { wcrt_trace_max_service(a, WcrtKind::Read, 8, &mut m) }, WcrtStatus::Ok);
    assert_eq!(m, 70_000);
    assert_eq!(unsafe { wcrt_trace_max_service(a, WcrtKind::Write, 8, &mut m) }, WcrtStatus::NotFound);

    let mut partial = ptr::null_mut();
    assert_eq!(unsafe { wcrt_simulate(t, s.as_ptr(), 3, 1, &mut partial) }, WcrtStatus::Horizon);
    assert!(!partial.is_null());
    unsafe {
        wcrt_trace_free(a);
        wcrt_trace_free(b);
        wcrt_trace_free(partial);
        wcrt_topology_free(t);
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn header_compiles_and_links() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/wcrt.h");
    assert!(header.exists(), "header not generated");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include "wcrt.h"
#include <stdio.h>
int main(void) {
    WcrtTopology *t = NULL;
    if (wcrt_topology_reference(&t) != WCRT_STATUS_OK) return 1;
    uint64_t ps = 0;
    WcrtStatus st = wcrt_isolation_bound(t, "cva6", "io", WCRT_KIND_WRITE, 1, WCRT_MEMORY_CASE_NONE, &ps);
    wcrt_topology_free(t);
    if (st != WCRT_STATUS_OK) { fprintf(stderr, "%s\n", wcrt_last_error_message()); return 2; }
    printf("%llu\n", (unsigned long long)ps);
    return 0;
}
"#,
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let check = Command::new(&cc).arg("-fsyntax-only").arg("-I").arg(dir.join("include")).arg(&src).status().unwrap();
    assert!(check.success());

    // target/<profile>/deps/<test binary> -> target/<profile>/libwcrt_ffi.a
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = lib_dir.join("libwcrt_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built; link step skipped");
        return;
    }
    let exe = tmp.path().join("smoke");
    let link = Command::new(&cc)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(link.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success());
    // IO write in isolation on the reference topology: 4 + 3 crossbar cycles of 5 ns
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "35000");
}
