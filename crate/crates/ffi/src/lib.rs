//! C ABI over `whipchain`.
//!
//! Chains live behind the opaque `WcChain` handle. Every fallible call
//! returns a `WcStatus`; on failure `wc_last_error_message` describes the
//! most recent error on the calling thread. Output arrays are caller-owned
//! and their lengths are checked against the expected size.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use whipchain::continuum::{green_table, sigma_solve, ContinuumCurve};
use whipchain::curvature::{CurvatureContext, TangentVector};
use whipchain::dynamics::{acceleration, step_rk4};
use whipchain::kink::{riccati_solve, KinkSpec};
use whipchain::tension::{closed_form_inverse, tension, TridiagonalOperator};
use whipchain::{chain, ChainState, WhipError};

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    SingularPivot = 4,
    DegeneratePlane = 5,
    NonFinite = 6,
    CflViolation = 7,
    SignCheck = 8,
    Panic = 9,
}

/// Opaque chain state.
pub struct WcChain {
    state: ChainState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &WhipError) -> WcStatus {
    match err {
        WhipError::LengthMismatch { .. } => WcStatus::LengthMismatch,
        WhipError::SingularPivot { .. } => WcStatus::SingularPivot,
        WhipError::DegeneratePlane { .. } => WcStatus::DegeneratePlane,
        WhipError::NonFinite { .. } => WcStatus::NonFinite,
        WhipError::Cfl { .. } => WcStatus::CflViolation,
        WhipError::SignCheck(_) => WcStatus::SignCheck,
        WhipError::Invalid(_) | WhipError::Io(_) | WhipError::Json(_) => WcStatus::InvalidArgument,
    }
}

enum Failure {
    Status(WcStatus, String),
    Whip(WhipError),
}

impl From<WhipError> for Failure {
    fn from(e: WhipError) -> Self {
        Failure::Whip(e)
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> WcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WcStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Whip(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            WcStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure::Status(WcStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, expected: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len != expected {
        return Err(Failure::Status(
            WcStatus::LengthMismatch,
            format!("`{name}` holds {len} values, expected {expected}"),
        ));
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn chain_ref<'a>(c: *const WcChain) -> Result<&'a WcChain, Failure> {
    c.as_ref().ok_or_else(|| null("chain"))
}

unsafe fn write_scalar(p: *mut f64, v: f64, name: &str) -> FfiResult {
    if p.is_null() {
        return Err(null(name));
    }
    *p = v;
    Ok(())
}

/// Creates a chain of `n` links. `g` must be nonnegative.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_new(
    n: usize,
    theta: *const f64,
    omega: *const f64,
    g: f64,
    out: *mut *mut WcChain,
) -> WcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let th = input(theta, n, "theta")?.to_vec();
        let om = input(omega, n, "omega")?.to_vec();
        let state = ChainState::new(th, om, g)?;
        *out = Box::into_raw(Box::new(WcChain { state }));
        Ok(())
    })
}

/// Releases a chain; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_free(chain: *mut WcChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of links, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_n(chain: *const WcChain) -> usize {
    chain.as_ref().map_or(0, |c| c.state.n())
}

/// Copies the current angles and rates.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_state(
    chain: *const WcChain,
    theta_out: *mut f64,
    omega_out: *mut f64,
    len: usize,
) -> WcStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let n = c.state.n();
        output(theta_out, len, n, "theta_out")?.copy_from_slice(c.state.theta());
        output(omega_out, len, n, "omega_out")?.copy_from_slice(c.state.omega());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wc_chain_energy(chain: *const WcChain, kinetic: *mut f64, potential: *mut f64) -> WcStatus {
    guard(|| {
        let e = chain::energy(&chain_ref(chain)?.state);
        write_scalar(kinetic, e.kinetic, "kinetic")?;
        write_scalar(potential, e.potential, "potential")
    })
}

#[no_mangle]
pub unsafe extern "C" fn wc_chain_angular_momentum(chain: *const WcChain, out: *mut f64) -> WcStatus {
    guard(|| write_scalar(out, chain::angular_momentum(&chain_ref(chain)?.state), "out"))
}

/// Joint positions and velocities as interleaved `(x, y)` pairs; each
/// buffer holds `2 (n + 1)` values.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_reconstruct(
    chain: *const WcChain,
    positions: *mut f64,
    velocities: *mut f64,
    len: usize,
) -> WcStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let frame = chain::reconstruct(&c.state);
        let expected = 2 * (c.state.n() + 1);
        let pos = output(positions, len, expected, "positions")?;
        for (k, p) in frame.positions.iter().enumerate() {
            pos[2 * k] = p.x;
            pos[2 * k + 1] = p.y;
        }
        let vel = output(velocities, len, expected, "velocities")?;
        for (k, v) in frame.velocities.iter().enumerate() {
            vel[2 * k] = v.x;
            vel[2 * k + 1] = v.y;
        }
        Ok(())
    })
}

/// Tensions `λ_1..λ_n`; `pivots_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_tension(
    chain: *const WcChain,
    lambda_out: *mut f64,
    pivots_out: *mut f64,
    len: usize,
) -> WcStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let t = tension(&c.state)?;
        output(lambda_out, len, c.state.n(), "lambda_out")?.copy_from_slice(&t.lambda);
        if !pivots_out.is_null() {
            output(pivots_out, len, c.state.n(), "pivots_out")?.copy_from_slice(&t.pivots);
        }
        Ok(())
    })
}

/// Angular accelerations `θ̈_1..θ̈_n`.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_acceleration(chain: *const WcChain, out: *mut f64, len: usize) -> WcStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let acc = acceleration(&c.state)?;
        output(out, len, c.state.n(), "out")?.copy_from_slice(&acc);
        Ok(())
    })
}

/// Advances the chain in place by `steps` RK4 steps of size `dt`. On
/// failure the chain keeps its last finite state.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_step_rk4(chain: *mut WcChain, dt: f64, steps: usize) -> WcStatus {
    guard(|| {
        let c = chain.as_mut().ok_or_else(|| null("chain"))?;
        for step in 0..steps {
            let next = step_rk4(&c.state, dt)?;
            if !next.is_finite() {
                return Err(WhipError::NonFinite { time: (step + 1) as f64 * dt }.into());
            }
            c.state = next;
        }
        Ok(())
    })
}

/// Inverse of the tension matrix, row-major `n × n`.
#[no_mangle]
pub unsafe extern "C" fn wc_chain_inverse(chain: *const WcChain, out: *mut f64, len: usize) -> WcStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let n = c.state.n();
        let inv = closed_form_inverse(&TridiagonalOperator::from_angles(c.state.theta()))?;
        output(out, len, n * n, "out")?.copy_from_slice(inv.as_slice());
        Ok(())
    })
}

/// Curvature numerator and sectional curvature of the plane spanned by the
/// tangent vectors `eta`, `xi` (normal components, `len = n`).
#[no_mangle]
pub unsafe extern "C" fn wc_curvature(
    chain: *const WcChain,
    eta: *const f64,
    xi: *const f64,
    len: usize,
    numerator: *mut f64,
    curvature: *mut f64,
) -> WcStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let u = TangentVector::new(input(eta, len, "eta")?.to_vec());
        let v = TangentVector::new(input(xi, len, "xi")?.to_vec());
        let section = CurvatureContext::new(&c.state)?.sectional_curvature(&u, &v)?;
        write_scalar(numerator, section.numerator, "numerator")?;
        write_scalar(curvature, section.curvature, "curvature")
    })
}

/// Green function of `-∂² + κ²` on `m + 1 = len` nodes, row-major
/// `(m + 1) × (m + 1)` into `out`.
#[no_mangle]
pub unsafe extern "C" fn wc_green_table(kappa: *const f64, len: usize, out: *mut f64, out_len: usize) -> WcStatus {
    guard(|| {
        let table = green_table(input(kappa, len, "kappa")?)?;
        output(out, out_len, len * len, "out")?.copy_from_slice(table.matrix().as_slice());
        Ok(())
    })
}

/// Continuum tension `σ` for the curve sampled at `len` nodes.
#[no_mangle]
pub unsafe extern "C" fn wc_sigma_solve(
    theta: *const f64,
    theta_t: *const f64,
    len: usize,
    g: f64,
    out: *mut f64,
) -> WcStatus {
    guard(|| {
        let curve = ContinuumCurve::new(input(theta, len, "theta")?.to_vec(), input(theta_t, len, "theta_t")?.to_vec(), g)?;
        let sigma = sigma_solve(&curve)?;
        output(out, len, len, "out")?.copy_from_slice(&sigma);
        Ok(())
    })
}

/// Riccati solution `f` on the `len` nodes of `kappa`, kinks given as
/// parallel arrays. Kink nodes hold `+inf`.
#[no_mangle]
pub unsafe extern "C" fn wc_riccati_solve(
    kappa: *const f64,
    len: usize,
    kink_s: *const f64,
    kink_alpha: *const f64,
    kink_count: usize,
    f_out: *mut f64,
) -> WcStatus {
    guard(|| {
        let s = input(kink_s, kink_count, "kink_s")?;
        let a = input(kink_alpha, kink_count, "kink_alpha")?;
        let kinks = s
            .iter()
            .zip(a)
            .map(|(&s, &a)| KinkSpec::new(s, a))
            .collect::<Result<Vec<_>, _>>()?;
        let sol = riccati_solve(input(kappa, len, "kappa")?, &kinks)?;
        output(f_out, len, len, "f_out")?.copy_from_slice(&sol.f);
        Ok(())
    })
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
