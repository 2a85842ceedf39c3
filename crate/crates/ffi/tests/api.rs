use std::ffi::{CStr, CString};
use std::ptr;

use cqtraj_ffi::*;

fn parse(text: &str) -> *mut CqState {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cq_state_parse(c.as_ptr(), &mut out) },
        CqStatus::Ok
    );
    out
}

fn last_error() -> String {
    let p = cq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn z(re: f64, im: f64) -> CqComplex {
    CqComplex { re, im }
}

#[test]
fn state_round_trip_and_energy() {
    let s = parse("well:n=1,a=pi");
    let mut e = 0.0;
    unsafe {
        assert_eq!(cq_state_energy(s, &mut e), CqStatus::Ok);
        let needed = cq_state_describe(s, ptr::null_mut(), 0);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(cq_state_describe(s, buf.as_mut_ptr(), buf.len()), needed);
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(text.starts_with("well:n=1,a=3.14159"));
        cq_state_free(s);
    }
    assert!((e - 0.5).abs() < 1e-15);
}

#[test]
fn bad_input_reports_codes_and_messages() {
    let c = CString::new("ho:n=1,alpha=2,omega=1").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { cq_state_parse(c.as_ptr(), &mut out) };
    assert_ne!(status, CqStatus::Ok);
    assert!(out.is_null());
    assert!(last_error().contains("alpha"));

    let mut e = 0.0;
    assert_eq!(
        unsafe { cq_state_energy(ptr::null(), &mut e) },
        CqStatus::NullPointer
    );

    let s = parse("ho:n=1");
    let mut v = CqComplex::default();
    assert_eq!(
        unsafe { cq_velocity(s, z(0.0, 0.0), &mut v) },
        CqStatus::NodeProximity
    );
    assert!(last_error().contains("node"));
    assert_eq!(
        unsafe { cq_velocity(s, z(1.0, 0.5), ptr::null_mut()) },
        CqStatus::NullPointer
    );
    let mut rho = 0.0;
    let mut mask = CqMask::Defined;
    let ho3 = parse("ho:n=3");
    assert_eq!(
        unsafe { cq_closed_form_rho(ho3, z(0.5, 0.5), &mut rho, &mut mask) },
        CqStatus::UnsupportedState
    );
    unsafe {
        cq_state_free(s);
        cq_state_free(ho3);
    }
}

#[test]
fn velocity_forms_and_energy_agree() {
    let s = parse("ho:n=2");
    let x = z(0.9, 0.4);
    let (mut a, mut b, mut e) = (
        CqComplex::default(),
        CqComplex::default(),
        CqComplex::default(),
    );
    unsafe {
        assert_eq!(cq_velocity(s, x, &mut a), CqStatus::Ok);
        assert_eq!(cq_velocity_alt(s, x, &mut b), CqStatus::Ok);
        assert_eq!(cq_complex_energy(s, x, &mut e), CqStatus::Ok);
        cq_state_free(s);
    }
    assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
    assert!((e.re - 2.5).abs() < 1e-12 && e.im.abs() < 1e-12);
}

#[test]
fn loop_handle_exposes_samples() {
    let s = parse("ho:n=0");
    let mut tr = ptr::null_mut();
    let mut settings = CqIntegrator {
        rel_tol: 0.0,
        abs_tol: 0.0,
        max_step: 0.0,
        node_guard: 0.0,
        max_steps: 0,
        horizon_periods: 0.0,
    };
    unsafe {
        assert_eq!(cq_integrator_defaults(&mut settings), CqStatus::Ok);
        assert_eq!(
            cq_integrate_loop(s, z(1.0, 0.0), &settings, &mut tr),
            CqStatus::Ok
        );
        let n = cq_trajectory_len(tr);
        assert!(n > 50);
        let (mut t, mut x, mut v) = (0.0, CqComplex::default(), CqComplex::default());
        assert_eq!(
            cq_trajectory_sample(tr, n - 1, &mut t, &mut x, &mut v),
            CqStatus::Ok
        );
        assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-6);
        assert!((x.re - 1.0).abs() < 1e-6 && x.im.abs() < 1e-6);
        assert_eq!(
            cq_trajectory_sample(tr, n, &mut t, &mut x, &mut v),
            CqStatus::OutOfRange
        );
        let (mut a, mut drift) = (0.0, 1.0);
        assert_eq!(
            cq_trajectory_path_constant(tr, &mut a, &mut drift),
            CqStatus::Ok
        );
        assert!(drift < 1e-8);
        cq_trajectory_free(tr);

        settings.rel_tol = -1.0;
        let mut bad = ptr::null_mut();
        assert_ne!(
            cq_integrate_trajectory(s, z(1.0, 0.0), 0.0, 1.0, &settings, &mut bad),
            CqStatus::Ok
        );
        assert!(bad.is_null());

        let mut open = ptr::null_mut();
        assert_eq!(
            cq_integrate_trajectory(s, z(1.0, 0.0), 0.0, 1.0, ptr::null(), &mut open),
            CqStatus::Ok
        );
        assert!(cq_trajectory_len(open) > 2);
        cq_trajectory_free(open);
        cq_state_free(s);
    }
}

#[test]
fn densities_through_both_routes() {
    let s = parse("ho:n=1");
    let x = z(1.2, 0.9);
    let (mut a, mut b) = (0.0, 0.0);
    let (mut ma, mut mb) = (CqMask::NearNode, CqMask::NearNode);
    let mut p = 0.0;
    unsafe {
        assert_eq!(cq_closed_form_rho(s, x, &mut a, &mut ma), CqStatus::Ok);
        assert_eq!(
            cq_rho_at_point(s, x, ptr::null(), &mut b, &mut mb),
            CqStatus::Ok
        );
        assert_eq!(cq_born_direct(s, 1.0, &mut p), CqStatus::Ok);
        assert_eq!(
            cq_born_direct(s, f64::NAN, &mut p),
            CqStatus::InvalidArgument
        );
        cq_state_free(s);
    }
    assert_eq!((ma, mb), (CqMask::Defined, CqMask::Defined));
    assert!((a - b).abs() <= 1e-6 * a);
}
