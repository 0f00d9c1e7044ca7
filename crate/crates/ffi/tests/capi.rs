use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use qptopo_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0; 512];
    unsafe { qp_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn c3() -> *mut QpField {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { qp_field_builtin(c"c3".as_ptr(), &mut f) }, QpStatus::Ok);
    f
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(qp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn field_roundtrip_and_evaluate() {
    let text = CString::new("dim = 3\n1 0 0 1.0 0.0\n0 1 0 1.0 0.0\n0 0 1 1.0 0.0\n").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { qp_field_parse(text.as_ptr(), &mut f) }, QpStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { qp_field_dim(f, &mut dim) }, QpStatus::Ok);
    assert_eq!(dim, 3);
    let mut v = 0.0;
    let p = [0.0, 0.0, 0.0];
    assert_eq!(unsafe { qp_field_evaluate(f, p.as_ptr(), 3, &mut v) }, QpStatus::Ok);
    assert!((v - 3.0).abs() < 1e-12);
    assert_eq!(unsafe { qp_field_evaluate(f, p.as_ptr(), 2, &mut v) }, QpStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    unsafe { qp_field_free(f) };
}

#[test]
fn parse_errors_map_to_status() {
    let text = CString::new("dim = 3\n1 0 0 x 0.0\n").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { qp_field_parse(text.as_ptr(), &mut f) }, QpStatus::Parse);
    assert!(f.is_null());
    assert!(last_error().contains("line"));
}

#[test]
fn genus_three_surface() {
    let f = c3();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { qp_mesh_extract(f, 0.0, 32, &mut m) }, QpStatus::Ok);
    let (mut nv, mut nt) = (0, 0);
    assert_eq!(unsafe { qp_mesh_size(m, &mut nv, &mut nt) }, QpStatus::Ok);
    assert!(nv > 0 && nt > 0);
    let mut genera = [0i64; 4];
    let mut count = 0;
    assert_eq!(unsafe { qp_mesh_genera(m, genera.as_mut_ptr(), 4, &mut count) }, QpStatus::Ok);
    assert_eq!(count, 1);
    assert_eq!(genera[0], 3);
    unsafe {
        qp_mesh_free(m);
        qp_field_free(f);
    }
}

#[test]
fn label_and_interval() {
    let f = c3();
    let mut label = QpLabel { kind: QpLabelKind::Undetermined, homology_class: [0; 3] };
    let b = [0i64, 0, 1];
    assert_eq!(unsafe { qp_label(f, 0.0, b.as_ptr(), 32, &mut label) }, QpStatus::Ok);
    assert_eq!(label.kind, QpLabelKind::Closed);
    let zero = [0i64; 3];
    assert_eq!(unsafe { qp_label(f, 0.0, zero.as_ptr(), 32, &mut label) }, QpStatus::InvalidArgument);
    let b = [1i64, 2, 5];
    let mut iv = QpInterval { kind: QpIntervalKind::Empty, low: 0.0, upp: 0.0 };
    assert_eq!(unsafe { qp_energy_interval(f, b.as_ptr(), 32, 1e-2, &mut iv) }, QpStatus::Ok);
    assert_eq!(iv.kind, QpIntervalKind::Interval);
    assert!(iv.low < 0.0 && iv.upp > 0.0);
    unsafe { qp_field_free(f) };
}

#[test]
fn trace_summary() {
    let f = c3();
    let normal = [1.0, 2.0f64.sqrt(), 5.0];
    let offset = [0.1, 0.2, 0.3];
    let start = [0.3, 0.1];
    let mut s = QpOrbitSummary {
        verdict: QpVerdictKind::Undetermined,
        direction: [0.0; 2],
        size: 0.0,
        arc_length: 0.0,
        residual: 0.0,
        points: 0,
    };
    let st = unsafe { qp_trace(f, normal.as_ptr(), offset.as_ptr(), 0.0, start.as_ptr(), 50.0, &mut s) };
    assert_eq!(st, QpStatus::Ok);
    assert!(s.points > 10);
    assert!(s.residual < 1e-9);
    let flat = [0.0; 3];
    let st = unsafe { qp_trace(f, flat.as_ptr(), offset.as_ptr(), 0.0, start.as_ptr(), 50.0, &mut s) };
    assert_eq!(st, QpStatus::InvalidArgument);
    unsafe { qp_field_free(f) };
}

#[test]
fn null_handles_are_rejected() {
    let mut n = 0;
    assert_eq!(unsafe { qp_mesh_size(ptr::null(), &mut n, &mut n) }, QpStatus::NullPointer);
    assert_eq!(unsafe { qp_field_builtin(c"c3".as_ptr(), ptr::null_mut()) }, QpStatus::NullPointer);
    unsafe {
        qp_field_free(ptr::null_mut());
        qp_mesh_free(ptr::null_mut());
    }
}

/// The generated header must compile as both C and C++.
#[test]
fn header_compiles() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"qptopo.h\"\n\
         int main(void) {\n\
           QpField *f = 0;\n\
           char buf[64];\n\
           if (qp_field_builtin(\"c3\", &f) != QP_STATUS_OK) { qp_last_error_message(buf, sizeof buf); return 1; }\n\
           QpLabel l; int64_t b[3] = {0, 0, 1};\n\
           qp_label(f, 0.0, b, 32, &l);\n\
           qp_field_free(f);\n\
           return l.kind == QP_LABEL_KIND_CLOSED ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let out = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I", include])
            .arg(&src)
            .output()
            .unwrap_or_else(|e| panic!("cannot run {compiler}: {e}"));
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
