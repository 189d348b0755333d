use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sbmlab_ffi::*;

fn last_error() -> String {
    let p = sbm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sample(n: usize, seed: u64) -> *mut SbmGraph {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { sbm_graph_sample(n, 8.0, 5.0, 2.0, seed, &mut g) }, SbmStatus::Ok);
    g
}

#[test]
fn threshold_calls() {
    let mut t = SbmThreshold::default();
    assert_eq!(unsafe { sbm_it_value(9.0, 9.0, 1.0, &mut t) }, SbmStatus::Ok);
    assert!((t.value - 2.0).abs() < 1e-8);
    let mut a = 0.0;
    assert_eq!(unsafe { sbm_boundary_alpha(10.0, 12.43, &mut a) }, SbmStatus::Ok);
    assert!((a - 26.24).abs() < 0.05);
    let mut w = SbmWitness::default();
    assert_eq!(unsafe { sbm_find_witness(26.3, 12.5, 10.0, &mut w) }, SbmStatus::Ok);
    assert!(w.found && w.gap > 0.0 && w.x1 > w.y1);
    assert_eq!(unsafe { sbm_find_witness(25.0, 25.0, 4.0, &mut w) }, SbmStatus::Ok);
    assert!(!w.found);
}

#[test]
fn errors_are_reported() {
    let mut t = SbmThreshold::default();
    assert_eq!(unsafe { sbm_it_value(-1.0, 2.0, 1.0, &mut t) }, SbmStatus::InvalidInput);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { sbm_it_value(2.0, 2.0, 1.0, ptr::null_mut()) }, SbmStatus::NullPointer);
    let mut g = ptr::null_mut();
    let path = CString::new("/nonexistent/graph.txt").unwrap();
    assert_eq!(unsafe { sbm_graph_read(path.as_ptr(), &mut g) }, SbmStatus::Io);
    assert!(g.is_null());
    assert_eq!(unsafe { sbm_graph_n(ptr::null()) }, 0);
    unsafe { sbm_graph_free(ptr::null_mut()) };
}

#[test]
fn graph_round_trip_and_swap() {
    let g = sample(40, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.txt").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sbm_graph_write(g, path.as_ptr()) }, SbmStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sbm_graph_read(path.as_ptr(), &mut h) }, SbmStatus::Ok);
    unsafe {
        assert_eq!(sbm_graph_n(h), 40);
        assert_eq!(sbm_graph_edge_count(h), sbm_graph_edge_count(g));
        let mut labels = [0i8; 40];
        assert_eq!(sbm_graph_labels(h, labels.as_mut_ptr(), 40), SbmStatus::Ok);
        assert_eq!(labels.iter().filter(|&&s| s == 1).count(), 20);
        assert_eq!(sbm_graph_labels(h, labels.as_mut_ptr(), 39), SbmStatus::InvalidInput);
        let (mut a, mut b) = (SbmSwap::default(), SbmSwap::default());
        assert_eq!(sbm_best_swap(g, &mut a), SbmStatus::Ok);
        assert_eq!(sbm_best_swap(h, &mut b), SbmStatus::Ok);
        assert_eq!(a, b);
        assert!(labels[a.i] == 1 && labels[a.j] == -1);
        sbm_graph_free(g);
        sbm_graph_free(h);
    }
}

#[test]
fn sdp_and_certificate() {
    let g = sample(40, 5);
    let mut s = SbmSdpSummary::default();
    let mut m = vec![0.0; 40 * 40];
    unsafe {
        let st = sbm_sdp_solve(g, SbmProblem::Sym, 0.0, 0.0, 0.0, 0.0, 0, &mut s, m.as_mut_ptr());
        assert_eq!(st, SbmStatus::Ok, "{}", last_error());
        assert_eq!(s.status, 0);
        assert!(s.gap >= -1e-3 * s.planted_objective.abs().max(1.0));
        assert!((0..40).all(|i| (m[i * 41] - 1.0).abs() < 1e-3));
        let st = sbm_sdp_solve(g, SbmProblem::Asym, 8.0, 5.0, 2.0, 0.0, 3, &mut s, ptr::null_mut());
        assert_eq!(st, SbmStatus::NotConverged);
        assert_eq!(s.status, 1);
        assert!(s.gap.is_nan());
        let mut c = SbmCertificateSummary::default();
        assert_eq!(sbm_certificate(g, 8.0, 5.0, 2.0, 1e-6, &mut c), SbmStatus::Ok);
        assert_eq!(c.grid_size, 41);
        assert!(c.valid_lambdas <= c.grid_size);
        assert_eq!(c.valid, c.valid_lambdas > 0);
        sbm_graph_free(g);
    }
}

/// The committed header must compile as C; when the static library sits
/// next to this test binary the program is also linked and run.
#[test]
fn header_compiles_as_c() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/sbmlab.h")).unwrap();
    for f in ["sbm_graph_sample", "sbm_sdp_solve", "sbm_certificate", "sbm_last_error"] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let base = || {
        let mut c = Command::new(&cc);
        c.args(["-std=c99", "-Wall", "-Werror", "-I"])
            .arg(root.join("include"))
            .arg(root.join("tests/smoke.c"));
        c
    };
    assert!(base().arg("-fsyntax-only").status().expect("a C compiler").success());

    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().parent().unwrap().join("libsbmlab_ffi.a");
    if !lib.exists() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let linked = base()
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(linked.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
