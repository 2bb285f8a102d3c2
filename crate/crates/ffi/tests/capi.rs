use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use symsat_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(symsat_last_error()) }.to_string_lossy().into_owned()
}

fn parse(expr: &str) -> *mut SymsatGroup {
    let text = CString::new(expr).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { symsat_group_parse(text.as_ptr(), &mut g) }, SymsatStatus::Ok);
    g
}

#[test]
fn group_handle_round_trip() {
    let g = parse("S3 wr S3");
    unsafe {
        assert_eq!(symsat_group_degree(g), 9);
        let mut dim = 0;
        assert_eq!(symsat_group_basis_dim(g, &mut dim), SymsatStatus::Ok);
        assert_eq!(dim, 3);

        let mut need = 0;
        assert_eq!(symsat_group_expr(g, ptr::null_mut(), 0, &mut need), SymsatStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; need];
        assert_eq!(symsat_group_expr(g, buf.as_mut_ptr(), need, ptr::null_mut()), SymsatStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "S3 wr S3");

        let bad = [0usize, 0, 1, 2, 3, 4, 5, 6, 7];
        assert_eq!(symsat_group_set_sigma(g, bad.as_ptr()), SymsatStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        let rev: Vec<usize> = (0..9).rev().collect();
        assert_eq!(symsat_group_set_sigma(g, rev.as_ptr()), SymsatStatus::Ok);
        let mut back = [0usize; 9];
        assert_eq!(symsat_group_sigma(g, back.as_mut_ptr()), SymsatStatus::Ok);
        assert_eq!(back.to_vec(), rev);
        symsat_group_free(g);
    }
}

#[test]
fn projection_is_idempotent_and_pools_orbits() {
    let g = parse("S4");
    let c: Vec<f64> = (0..16).map(|i| i as f64).collect();
    let mut p = vec![0.0; 16];
    unsafe {
        assert_eq!(symsat_group_project(g, c.as_ptr(), 4, p.as_mut_ptr()), SymsatStatus::Ok);
        let diag = (0 + 5 + 10 + 15) as f64 / 4.0;
        let off = (0..16).filter(|i| i % 5 != 0).map(|i| i as f64).sum::<f64>() / 12.0;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { diag } else { off };
                assert!((p[i * 4 + j] - want).abs() < 1e-12);
            }
        }
        // in place
        let mut q = p.clone();
        assert_eq!(symsat_group_project(g, q.as_ptr(), 4, q.as_mut_ptr()), SymsatStatus::Ok);
        assert_eq!(p, q);
        assert_eq!(symsat_group_project(g, c.as_ptr(), 3, p.as_mut_ptr()), SymsatStatus::InvalidArgument);
        symsat_group_free(g);
    }
}

#[test]
fn symfind_on_identity_matrix() {
    let n = 6;
    let m: Vec<f64> = (0..n * n).map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(symsat_symfind(m.as_ptr(), n, true, &mut g), SymsatStatus::Ok);
        let mut buf = [0 as std::ffi::c_char; 32];
        assert_eq!(symsat_group_expr(g, buf.as_mut_ptr(), 32, ptr::null_mut()), SymsatStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "S6");
        symsat_group_free(g);
        let nan = vec![f64::NAN; 4];
        assert_eq!(symsat_symfind(nan.as_ptr(), 2, false, &mut g), SymsatStatus::Numerical);
    }
}

#[test]
fn null_and_invalid_arguments_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(symsat_group_parse(ptr::null(), &mut g), SymsatStatus::NullArgument);
        let bad = CString::new("S3 wr").unwrap();
        assert_eq!(symsat_group_parse(bad.as_ptr(), &mut g), SymsatStatus::InvalidArgument);
        assert!(g.is_null());
        assert_eq!(symsat_group_degree(ptr::null()), 0);
        symsat_group_free(ptr::null_mut());
        let path = CString::new("/nonexistent/model.ssn").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(symsat_model_load(path.as_ptr(), &mut m), SymsatStatus::Io);
        assert!(last_error().contains("nonexistent") || !last_error().is_empty());
        symsat_model_free(ptr::null_mut());
    }
}

#[test]
fn model_completes_a_sudoku() {
    use symsat::pipeline::{new_model, ModelKind, TrainConfig};
    use symsat::solver::save_model;
    use symsat::tasks::{sudoku_generate, MaskSpec, Task};

    let dir = tempfile::tempdir().unwrap();
    let cfg = TrainConfig { model: ModelKind::Sym, k: Some(6), ..Default::default() };
    let model = new_model(&cfg, Task::Sudoku9).unwrap();
    let path = dir.path().join("m.ssn");
    save_model(&path, &model).unwrap();

    let ex = &sudoku_generate(1, MaskSpec::Fixed(40), 3)[0];
    let bits: Vec<u8> = ex.bits.iter().map(|&b| b as u8).collect();
    let given: Vec<u8> = ex.mask.iter().map(|&b| b as u8).collect();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(symsat_model_load(cpath.as_ptr(), &mut h), SymsatStatus::Ok);
        assert_eq!(symsat_model_task_bits(h), 729);
        assert_eq!(symsat_model_param_count(h), 20);
        let mut probs = vec![-1.0; 729];
        assert_eq!(
            symsat_model_complete(h, bits.as_ptr(), given.as_ptr(), 1, probs.as_mut_ptr()),
            SymsatStatus::Ok
        );
        for (b, p) in probs.iter().enumerate() {
            assert!((0.0..=1.0).contains(p));
            if ex.mask[b] {
                assert_eq!(*p, bits[b] as f64);
            }
        }
        symsat_model_free(h);
    }
}

/// Compiles a small C program against the generated header and the static
/// library.
#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/symsat.h");
    assert!(header.exists());
    // target/<profile>/deps/capi-xxxx -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsymsat_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "symsat.h"
int main(void) {
    SymsatGroup *g = NULL;
    if (symsat_group_parse("S3 wr S3 * S2", &g) != SYMSAT_STATUS_OK) return 1;
    size_t dim = 0;
    if (symsat_group_basis_dim(g, &dim) != SYMSAT_STATUS_OK) return 2;
    printf("%zu %zu\n", symsat_group_degree(g), dim);
    symsat_group_free(g);
    if (symsat_group_parse("bogus", &g) != SYMSAT_STATUS_INVALID_ARGUMENT) return 3;
    printf("%s\n", symsat_last_error()[0] ? "error-set" : "error-missing");
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "18 6\nerror-set\n");
}
