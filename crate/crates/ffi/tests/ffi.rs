use std::f64::consts::FRAC_PI_2;
use std::ffi::CStr;
use std::ptr;

use whipchain_ffi::*;

fn new_chain(theta: &[f64], omega: &[f64], g: f64) -> *mut WcChain {
    let mut out = ptr::null_mut();
    let st = unsafe { wc_chain_new(theta.len(), theta.as_ptr(), omega.as_ptr(), g, &mut out) };
    assert_eq!(st, WcStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = wc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn hanging_chain_tension_and_acceleration() {
    let n = 6;
    let g = 2.0;
    let c = new_chain(&vec![-FRAC_PI_2; n], &vec![0.0; n], g);
    let mut lambda = vec![0.0; n];
    let mut pivots = vec![0.0; n];
    assert_eq!(unsafe { wc_chain_tension(c, lambda.as_mut_ptr(), pivots.as_mut_ptr(), n) }, WcStatus::Ok);
    for (k, l) in lambda.iter().enumerate() {
        let exact = n as f64 * g * (n - k) as f64;
        assert!((l - exact).abs() <= 1e-12 * exact);
    }
    assert!(pivots.iter().all(|b| (b - 1.0).abs() < 1e-15));
    let mut acc = vec![1.0; n];
    assert_eq!(unsafe { wc_chain_acceleration(c, acc.as_mut_ptr(), n) }, WcStatus::Ok);
    assert!(acc.iter().all(|a| a.abs() < 1e-12));
    unsafe { wc_chain_free(c) };
}

#[test]
fn energy_reconstruct_and_inverse() {
    let c = new_chain(&[0.0, 0.0], &[1.0, 1.0], 0.0);
    let (mut k, mut u, mut l) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { wc_chain_energy(c, &mut k, &mut u) }, WcStatus::Ok);
    assert!((k - 0.625).abs() < 1e-15 && u == 0.0);
    assert_eq!(unsafe { wc_chain_angular_momentum(c, &mut l) }, WcStatus::Ok);
    assert!((l - 1.25).abs() < 1e-15);

    let mut pos = vec![0.0; 6];
    let mut vel = vec![0.0; 6];
    assert_eq!(unsafe { wc_chain_reconstruct(c, pos.as_mut_ptr(), vel.as_mut_ptr(), 6) }, WcStatus::Ok);
    assert_eq!(pos, vec![0.0, 0.0, 0.5, 0.0, 1.0, 0.0]);
    assert_eq!(vel, vec![0.0, 0.0, 0.0, 0.5, 0.0, 1.0]);

    let mut inv = vec![0.0; 4];
    assert_eq!(unsafe { wc_chain_inverse(c, inv.as_mut_ptr(), 4) }, WcStatus::Ok);
    // straight chain: n + 1 - max(i, j)
    assert_eq!(inv, vec![2.0, 1.0, 1.0, 1.0]);
    unsafe { wc_chain_free(c) };
}

#[test]
fn stepping_conserves_energy() {
    let n = 5;
    let c = new_chain(&[0.1, 0.3, 0.2, -0.1, 0.0], &[0.5, -0.2, 0.3, 0.1, 0.0], 0.0);
    let (mut k0, mut u) = (0.0, 0.0);
    unsafe { wc_chain_energy(c, &mut k0, &mut u) };
    assert_eq!(unsafe { wc_chain_step_rk4(c, 1e-3, 500) }, WcStatus::Ok);
    let mut k1 = 0.0;
    unsafe { wc_chain_energy(c, &mut k1, &mut u) };
    assert!((k1 - k0).abs() <= 1e-9 * k0);
    let mut th = vec![0.0; n];
    let mut om = vec![0.0; n];
    assert_eq!(unsafe { wc_chain_state(c, th.as_mut_ptr(), om.as_mut_ptr(), n) }, WcStatus::Ok);
    assert!(th[0] != 0.1);
    assert_eq!(unsafe { wc_chain_step_rk4(c, -1.0, 1) }, WcStatus::InvalidArgument);
    unsafe { wc_chain_free(c) };
}

#[test]
fn curvature_of_straight_pair() {
    let c = new_chain(&[0.0, 0.0], &[0.0, 0.0], 0.0);
    let (mut num, mut k) = (0.0, 0.0);
    let eta = [1.0, 0.0];
    let xi = [0.0, 1.0];
    assert_eq!(unsafe { wc_curvature(c, eta.as_ptr(), xi.as_ptr(), 2, &mut num, &mut k) }, WcStatus::Ok);
    assert!((num - 0.25).abs() < 1e-15 && (k - 4.0).abs() < 1e-12);
    let st = unsafe { wc_curvature(c, eta.as_ptr(), eta.as_ptr(), 2, &mut num, &mut k) };
    assert_eq!(st, WcStatus::DegeneratePlane);
    unsafe { wc_chain_free(c) };
}

#[test]
fn continuum_entry_points() {
    let m = 20;
    let kappa = vec![0.0; m + 1];
    let mut table = vec![0.0; (m + 1) * (m + 1)];
    assert_eq!(unsafe { wc_green_table(kappa.as_ptr(), m + 1, table.as_mut_ptr(), table.len()) }, WcStatus::Ok);
    for j in 0..=m {
        for k in 0..=m {
            let exact = 1.0 - (j.max(k) as f64 / m as f64);
            assert!((table[j * (m + 1) + k] - exact).abs() < 1e-12);
        }
    }

    let theta = vec![-FRAC_PI_2; m + 1];
    let rate = vec![0.0; m + 1];
    let mut sigma = vec![0.0; m + 1];
    assert_eq!(unsafe { wc_sigma_solve(theta.as_ptr(), rate.as_ptr(), m + 1, 1.0, sigma.as_mut_ptr()) }, WcStatus::Ok);
    for (j, s) in sigma.iter().enumerate() {
        assert!((s - (1.0 - j as f64 / m as f64)).abs() < 1e-12);
    }

    let m = 100;
    let kappa = vec![0.0; m + 1];
    let mut f = vec![0.0; m + 1];
    let (ks, ka) = ([0.5], [1.0]);
    let st = unsafe { wc_riccati_solve(kappa.as_ptr(), m + 1, ks.as_ptr(), ka.as_ptr(), 1, f.as_mut_ptr()) };
    assert_eq!(st, WcStatus::Ok);
    assert!(f[50].is_infinite() && f[..50].iter().all(|v| *v == 0.0));
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let th = [0.0, f64::NAN];
    let st = unsafe { wc_chain_new(2, th.as_ptr(), th.as_ptr(), 0.0, &mut out) };
    assert_eq!(st, WcStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("finite"));

    let st = unsafe { wc_chain_new(2, ptr::null(), th.as_ptr(), 0.0, &mut out) };
    assert_eq!(st, WcStatus::NullPointer);

    let c = new_chain(&[0.0, 0.0], &[0.0, 0.0], 0.0);
    let mut small = [0.0; 1];
    let st = unsafe { wc_chain_tension(c, small.as_mut_ptr(), ptr::null_mut(), 1) };
    assert_eq!(st, WcStatus::LengthMismatch);
    assert!(last_error().contains("expected 2"));
    assert_eq!(unsafe { wc_chain_n(c) }, 2);
    assert_eq!(unsafe { wc_chain_n(ptr::null()) }, 0);
    unsafe { wc_chain_free(c) };
    unsafe { wc_chain_free(ptr::null_mut()) };

    let (ks, ka) = ([1.5], [1.0]);
    let kappa = [0.0; 11];
    let mut f = [0.0; 11];
    let st = unsafe { wc_riccati_solve(kappa.as_ptr(), 11, ks.as_ptr(), ka.as_ptr(), 1, f.as_mut_ptr()) };
    assert_eq!(st, WcStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(wc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let root = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{root}/include/whipchain.h")).unwrap();
    let src = std::fs::read_to_string(format!("{root}/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct WcChain WcChain;"));
}
