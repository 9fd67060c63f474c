//! State of the discrete chain: `n` rigid links of length `1/n` hanging from
//! the origin, with the last joint free.
//!
//! Index convention: link `k` (1-based, `1 <= k <= n`) is stored at slot
//! `k - 1` of every per-link sequence. Joint positions `x_0..x_n` are stored
//! at slots `0..=n`, so `x_0` sits at slot 0 and is always the origin.

use std::io::Write;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, WhipError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta`.
    pub fn unit(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    /// Unit normal `(-sin theta, cos theta)`.
    pub fn unit_normal(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: -s, y: c }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Planar cross product `self.x * o.y - self.y * o.x`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// Angles and angular rates of an `n`-link chain plus the gravity constant.
///
/// Angles are unwrapped reals; they are never reduced modulo `2π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainState {
    n: usize,
    theta: Vec<f64>,
    omega: Vec<f64>,
    g: f64,
}

#[derive(Deserialize)]
struct RawChainState {
    n: Option<usize>,
    theta: Vec<f64>,
    omega: Vec<f64>,
    #[serde(default)]
    g: f64,
}

impl<'de> Deserialize<'de> for ChainState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawChainState::deserialize(d)?;
        if let Some(n) = raw.n {
            if n != raw.theta.len() {
                return Err(serde::de::Error::custom(format!(
                    "n = {n} but theta has {} entries",
                    raw.theta.len()
                )));
            }
        }
        ChainState::new(raw.theta, raw.omega, raw.g).map_err(serde::de::Error::custom)
    }
}

impl ChainState {
    pub fn new(theta: Vec<f64>, omega: Vec<f64>, g: f64) -> Result<Self> {
        let n = theta.len();
        if n == 0 {
            return Err(WhipError::Invalid("chain needs at least one link".into()));
        }
        check_len(n, omega.len())?;
        if theta.iter().chain(omega.iter()).any(|v| !v.is_finite()) {
            return Err(WhipError::Invalid("angles and rates must be finite".into()));
        }
        if !g.is_finite() || g < 0.0 {
            return Err(WhipError::Invalid(format!("gravity must be finite and >= 0, got {g}")));
        }
        Ok(ChainState { n, theta, omega, g })
    }

    /// Straight chain at angle `angle`, every link rotating at `rate`.
    pub fn straight(n: usize, angle: f64, rate: f64, g: f64) -> Result<Self> {
        ChainState::new(vec![angle; n], vec![rate; n], g)
    }

    /// Chain hanging straight down at rest.
    pub fn hanging(n: usize, g: f64) -> Result<Self> {
        Self::straight(n, -std::f64::consts::FRAC_PI_2, 0.0, g)
    }

    /// Samples `theta(k/n)` and `theta_t(k/n)` for `k = 1..=n`.
    pub fn from_profile(
        n: usize,
        theta: impl Fn(f64) -> f64,
        theta_t: impl Fn(f64) -> f64,
        g: f64,
    ) -> Result<Self> {
        let s = |k: usize| k as f64 / n as f64;
        let th = (1..=n).map(|k| theta(s(k))).collect();
        let om = (1..=n).map(|k| theta_t(s(k))).collect();
        ChainState::new(th, om, g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn link_length(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.omega).all(|v| v.is_finite())
    }

    pub fn with_omega(&self, omega: Vec<f64>) -> Result<Self> {
        ChainState::new(self.theta.clone(), omega, self.g)
    }

    pub fn with_gravity(&self, g: f64) -> Result<Self> {
        ChainState::new(self.theta.clone(), self.omega.clone(), g)
    }

    /// Builds a state without validation; used by integrators that check
    /// finiteness themselves.
    pub(crate) fn from_parts(theta: Vec<f64>, omega: Vec<f64>, g: f64) -> Self {
        debug_assert_eq!(theta.len(), omega.len());
        ChainState { n: theta.len(), theta, omega, g }
    }

    pub fn reconstruct(&self) -> CartesianFrame {
        reconstruct(self)
    }
}

/// Joint positions `x_0..x_n` and velocities `v_0..v_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianFrame {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
}

impl CartesianFrame {
    pub fn n(&self) -> usize {
        self.positions.len().saturating_sub(1)
    }

    /// Rows `(i, x, y, vx, vy)` for `i = 0..=n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        check_len(self.positions.len(), self.velocities.len())?;
        writeln!(w, "i,x,y,vx,vy")?;
        for (i, (p, v)) in self.positions.iter().zip(&self.velocities).enumerate() {
            writeln!(w, "{i},{:e},{:e},{:e},{:e}", p.x, p.y, v.x, v.y)?;
        }
        Ok(())
    }
}

pub fn reconstruct(state: &ChainState) -> CartesianFrame {
    let h = state.link_length();
    let mut positions = Vec::with_capacity(state.n + 1);
    let mut velocities = Vec::with_capacity(state.n + 1);
    let mut x = Vec2::ZERO;
    let mut v = Vec2::ZERO;
    positions.push(x);
    velocities.push(v);
    for (&th, &om) in state.theta.iter().zip(&state.omega) {
        x += h * Vec2::unit(th);
        v += (h * om) * Vec2::unit_normal(th);
        positions.push(x);
        velocities.push(v);
    }
    CartesianFrame { positions, velocities }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Kinetic `½ Σ |v_i|²` and potential `g Σ ⟨x_i, e_2⟩`, unit mass per joint.
pub fn energy(state: &ChainState) -> Energy {
    let frame = reconstruct(state);
    let kinetic = 0.5 * frame.velocities[1..].iter().map(|v| v.norm_sq()).sum::<f64>();
    let potential = state.g * frame.positions[1..].iter().map(|x| x.y).sum::<f64>();
    Energy { kinetic, potential }
}

pub fn angular_momentum(state: &ChainState) -> f64 {
    let frame = reconstruct(state);
    frame.positions[1..]
        .iter()
        .zip(&frame.velocities[1..])
        .map(|(x, v)| x.cross(*v))
        .sum()
}

/// `max_i | |x_i - x_{i-1}|² - 1/n² |` for externally supplied frames.
pub fn constraint_residual(frame: &CartesianFrame) -> Result<f64> {
    check_len(frame.positions.len(), frame.velocities.len())?;
    let n = frame.n();
    if n == 0 {
        return Err(WhipError::Invalid("frame needs at least two points".into()));
    }
    let target = 1.0 / (n * n) as f64;
    Ok(frame
        .positions
        .windows(2)
        .map(|w| ((w[1] - w[0]).norm_sq() - target).abs())
        .fold(0.0, f64::max))
}

/// `max_i |⟨v_i - v_{i-1}, x_i - x_{i-1}⟩|`, the velocity-level constraint.
pub fn velocity_constraint_residual(frame: &CartesianFrame) -> Result<f64> {
    check_len(frame.positions.len(), frame.velocities.len())?;
    Ok(frame
        .positions
        .windows(2)
        .zip(frame.velocities.windows(2))
        .map(|(x, v)| (v[1] - v[0]).dot(x[1] - x[0]).abs())
        .fold(0.0, f64::max))
}
