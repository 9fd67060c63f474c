//! Time evolution of the chain in angle coordinates.
//!
//! Working in `θ` keeps every rod length exact; each right-hand-side
//! evaluation re-solves the tension system for the current state.

use std::io::Write;

use serde::Serialize;

use crate::chain::{angular_momentum, energy, reconstruct, ChainState, Vec2};
use crate::error::{Result, WhipError};
use crate::tension::{tension, TensionVector};

/// `θ̈` together with the tensions that produced it.
#[derive(Debug, Clone)]
pub struct Acceleration {
    pub theta_ddot: Vec<f64>,
    pub tension: TensionVector,
}

pub fn acceleration_with_tension(state: &ChainState) -> Result<Acceleration> {
    let t = tension(state)?;
    let n = state.n();
    let th = state.theta();
    let lam = &t.lambda;
    let mut acc = vec![0.0; n];
    for i in 0..n {
        let ahead = if i + 1 < n { lam[i + 1] * (th[i + 1] - th[i]).sin() } else { 0.0 };
        let behind = if i > 0 { lam[i - 1] * (th[i] - th[i - 1]).sin() } else { 0.0 };
        acc[i] = ahead - behind;
    }
    acc[0] -= n as f64 * state.g() * th[0].cos();
    Ok(Acceleration { theta_ddot: acc, tension: t })
}

/// `θ̈_i = λ_{i+1} sin(θ_{i+1}-θ_i) - λ_{i-1} sin(θ_i-θ_{i-1})`, with the
/// gravity term `-n g cos θ_1` on the first link.
pub fn acceleration(state: &ChainState) -> Result<Vec<f64>> {
    Ok(acceleration_with_tension(state)?.theta_ddot)
}

/// Residual of the Cartesian equations of motion
/// `ẍ_i = -g e_2 + λ_{i+1}(x_{i+1}-x_i) + λ_i(x_{i-1}-x_i)` evaluated with
/// `ẍ` obtained by differentiating the reconstruction twice.
pub fn cartesian_residual(state: &ChainState) -> Result<f64> {
    let acc = acceleration_with_tension(state)?;
    let frame = reconstruct(state);
    let x = &frame.positions;
    let h = state.link_length();
    let n = state.n();
    let gvec = Vec2::new(0.0, state.g());
    let mut xdd = Vec2::ZERO;
    let mut worst: f64 = 0.0;
    for i in 1..=n {
        let th = state.theta()[i - 1];
        let om = state.omega()[i - 1];
        xdd += h * (acc.theta_ddot[i - 1] * Vec2::unit_normal(th) - (om * om) * Vec2::unit(th));
        let ahead = if i < n { acc.tension.at(i + 1) * (x[i + 1] - x[i]) } else { Vec2::ZERO };
        let behind = acc.tension.at(i) * (x[i - 1] - x[i]);
        let r = xdd + gvec - ahead - behind;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// One classical Runge–Kutta step on `(θ, ω)`.
pub fn step_rk4(state: &ChainState, dt: f64) -> Result<ChainState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(WhipError::Invalid(format!("time step must be positive, got {dt}")));
    }
    let g = state.g();
    let th0 = state.theta();
    let om0 = state.omega();
    let stage = |th: Vec<f64>, om: Vec<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
        let s = ChainState::from_parts(th, om, g);
        let a = acceleration(&s)?;
        Ok((s.omega().to_vec(), a))
    };
    let offset = |base: &[f64], d: &[f64], c: f64| -> Vec<f64> {
        base.iter().zip(d).map(|(b, d)| b + c * d).collect()
    };

    let (k1t, k1w) = stage(th0.to_vec(), om0.to_vec())?;
    let (k2t, k2w) = stage(offset(th0, &k1t, 0.5 * dt), offset(om0, &k1w, 0.5 * dt))?;
    let (k3t, k3w) = stage(offset(th0, &k2t, 0.5 * dt), offset(om0, &k2w, 0.5 * dt))?;
    let (k4t, k4w) = stage(offset(th0, &k3t, dt), offset(om0, &k3w, dt))?;

    let combine = |base: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..base.len())
            .map(|i| base[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    let theta = combine(th0, &k1t, &k2t, &k3t, &k4t);
    let omega = combine(om0, &k1w, &k2w, &k3w, &k4w);
    Ok(ChainState::from_parts(theta, omega, g))
}

/// Suggested step for an `n`-link chain; stiffness grows with `n`.
pub fn suggested_dt(n: usize) -> f64 {
    1e-3 * 50.0 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub kinetic: f64,
    pub potential: f64,
    pub angular_momentum: f64,
    pub min_tension: f64,
}

impl Diagnostics {
    pub fn of(state: &ChainState) -> Result<Self> {
        let e = energy(state);
        Ok(Diagnostics {
            kinetic: e.kinetic,
            potential: e.potential,
            angular_momentum: angular_momentum(state),
            min_tension: tension(state)?.min(),
        })
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic + self.potential
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChainState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn last(&self) -> &ChainState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// `max_t |q(t) - q(0)| / |q(0)|` for a diagnostic `q`.
    pub fn relative_drift(&self, q: impl Fn(&Diagnostics) -> f64) -> f64 {
        let q0 = q(&self.diagnostics[0]);
        let scale = q0.abs().max(f64::MIN_POSITIVE);
        self.diagnostics
            .iter()
            .map(|d| (q(d) - q0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Columns `t, theta_1..theta_n, omega_1..omega_n, K, U, L, lambda_min`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.states[0].n();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("theta_{i}")));
        header.extend((1..=n).map(|i| format!("omega_{i}")));
        header.extend(["K", "U", "L", "lambda_min"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for ((t, s), d) in self.times.iter().zip(&self.states).zip(&self.diagnostics) {
            let mut row = vec![format!("{t:e}")];
            row.extend(s.theta().iter().chain(s.omega()).map(|v| format!("{v:e}")));
            row.extend(
                [d.kinetic, d.potential, d.angular_momentum, d.min_tension].map(|v| format!("{v:e}")),
            );
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integrates to `t_end` with fixed steps, sampling diagnostics every
/// `sample_every` steps (and always at the final step).
pub fn simulate(state: &ChainState, dt: f64, t_end: f64, sample_every: usize) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(WhipError::Invalid("dt and T must be positive".into()));
    }
    let every = sample_every.max(1);
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![state.clone()],
        diagnostics: vec![Diagnostics::of(state)?],
    };
    let mut current = state.clone();
    for step in 1..=steps {
        current = step_rk4(&current, dt)?;
        let t = step as f64 * dt;
        if !current.is_finite() {
            return Err(WhipError::NonFinite { time: t });
        }
        if step % every == 0 || step == steps {
            traj.diagnostics.push(Diagnostics::of(&current)?);
            traj.times.push(t);
            traj.states.push(current.clone());
        }
    }
    Ok(traj)
}

/// Integrates without sampling and returns the final state.
pub fn integrate(state: &ChainState, dt: f64, t_end: f64) -> Result<ChainState> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut current = state.clone();
    for step in 1..=steps {
        current = step_rk4(&current, dt)?;
        if !current.is_finite() {
            return Err(WhipError::NonFinite { time: step as f64 * dt });
        }
    }
    Ok(current)
}
