use iface::symplectic::StandardSpec;
use iface_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

fn entries(spec: StandardSpec) -> Vec<f64> {
    spec.matrix().m.iter().flatten().copied().collect()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        iface_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn classify_round_trip() {
    let mut h = ptr::null_mut();
    let m = entries(StandardSpec::bs(0.3));
    unsafe {
        assert_eq!(iface_interface_new(m.as_ptr(), &mut h), IfaceStatus::Ok);
        let mut inv = std::mem::zeroed::<IfaceInvariants>();
        assert_eq!(iface_classify(h, true, &mut inv), IfaceStatus::Ok);
        assert_eq!(inv.class_, IfaceClass::Bs);
        assert!((inv.chi - 0.3f64.sin().powi(2)).abs() < 1e-15);
        assert!(inv.has_lambda && !inv.has_kappa);
        iface_interface_free(h);
    }
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    let mut m = entries(StandardSpec::tms(0.4));
    m[0] += 1e-3;
    unsafe {
        assert_eq!(iface_interface_new(m.as_ptr(), &mut h), IfaceStatus::InvalidInput);
        assert!(last_error().contains("symplectic"));
        assert_eq!(iface_interface_new(ptr::null(), &mut h), IfaceStatus::NullPointer);
        assert_eq!(iface_classify(ptr::null(), false, ptr::null_mut()), IfaceStatus::NullPointer);
        let theta = (1.0f64 - 5e-11).sqrt().asin();
        let m = entries(StandardSpec::bs(theta));
        assert_eq!(iface_interface_new(m.as_ptr(), &mut h), IfaceStatus::Ok);
        let mut inv = std::mem::zeroed::<IfaceInvariants>();
        assert_eq!(iface_classify(h, false, &mut inv), IfaceStatus::Ambiguous);
        iface_interface_free(h);
        iface_interface_free(ptr::null_mut());
    }
}

fn library(specs: &[StandardSpec]) -> CString {
    let comps: Vec<String> = specs
        .iter()
        .enumerate()
        .map(|(k, s)| format!("\"C{k}\":{}", iface::json::interface_to_string(&s.matrix())))
        .collect();
    CString::new(format!("{{\"components\":{{{}}}}}", comps.join(","))).unwrap()
}

#[test]
fn synthesis_through_handles() {
    let text = library(&[StandardSpec::bs(0.3), StandardSpec::tms(0.5)]);
    let mut lib = ptr::null_mut();
    let mut plan = ptr::null_mut();
    unsafe {
        assert_eq!(iface_library_from_json(text.as_ptr(), &mut lib), IfaceStatus::Ok);
        assert_eq!(iface_synth(lib, IfaceClass::Bs, 0.7, f64::NAN, f64::NAN, false, &mut plan), IfaceStatus::Ok);
        let mut r = f64::NAN;
        assert_eq!(iface_plan_residual(plan, &mut r), IfaceStatus::Ok);
        assert!(r < 1e-9);
        let mut m = [0.0; 16];
        assert_eq!(iface_plan_matrix(plan, m.as_mut_ptr()), IfaceStatus::Ok);
        let chi = m[8] * m[13] - m[9] * m[12];
        assert!((chi - 0.7).abs() < 1e-9);
        let mut s = ptr::null_mut();
        assert_eq!(iface_plan_to_json(plan, &mut s), IfaceStatus::Ok);
        assert!(CStr::from_ptr(s).to_str().unwrap().contains("\"steps\""));
        iface_string_free(s);
        iface_plan_free(plan);

        let mut plan = ptr::null_mut();
        assert_eq!(iface_synth(lib, IfaceClass::Swap, f64::NAN, f64::NAN, f64::NAN, false, &mut plan), IfaceStatus::Infeasible);
        assert!(last_error().contains("must be complemented"));
        assert_eq!(iface_synth(lib, IfaceClass::Bs, 0.3, f64::NAN, 1.0, false, &mut plan), IfaceStatus::InvalidInput);
        iface_library_free(lib);
    }
    let bad = CString::new("{\"components\":").unwrap();
    let mut lib = ptr::null_mut();
    unsafe {
        assert_eq!(iface_library_from_json(bad.as_ptr(), &mut lib), IfaceStatus::InvalidInput);
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/iface.h")).unwrap();
    for name in ["iface_interface_new", "iface_classify", "iface_synth", "iface_plan_to_json", "typedef struct IfacePlan IfacePlan"] {
        assert!(header.contains(name), "{name}");
    }
    let probe = std::env::temp_dir().join("iface_header_probe.c");
    std::fs::write(&probe, "#include \"iface.h\"\nint main(void) { return IFACE_STATUS_OK; }\n").unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-I").arg(dir.join("include")).arg(&probe).status() {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("no C compiler, syntax check skipped"),
    }
}
