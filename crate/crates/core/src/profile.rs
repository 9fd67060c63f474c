//! Closed-form profiles on `[0, 1]` and the JSON profile descriptions used
//! to build chains and grids from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chain::ChainState;
use crate::error::{Result, WhipError};
use crate::kink::KinkSpec;

fn one() -> f64 {
    1.0
}

/// A smooth function of arclength with exact first and second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Analytic {
    Constant {
        value: f64,
    },
    /// `Σ_k coeffs[k] s^k`.
    Poly {
        coeffs: Vec<f64>,
    },
    /// `offset + amplitude · sin(π · frequency · s)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Analytic {
    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Analytic::Sine { amplitude, frequency, offset: 0.0 }
    }

    pub fn poly(coeffs: &[f64]) -> Self {
        Analytic::Poly { coeffs: coeffs.to_vec() }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivative(0, s)
    }

    pub fn d1(&self, s: f64) -> f64 {
        self.derivative(1, s)
    }

    pub fn d2(&self, s: f64) -> f64 {
        self.derivative(2, s)
    }

    fn derivative(&self, order: u32, s: f64) -> f64 {
        match self {
            Analytic::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    0.0
                }
            }
            Analytic::Poly { coeffs } => {
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().rev() {
                    let k = k as u32;
                    if k < order {
                        break;
                    }
                    let falling: f64 = (0..order).map(|r| (k - r) as f64).product();
                    acc += c * falling * s.powi((k - order) as i32);
                }
                acc
            }
            Analytic::Sine { amplitude, frequency, offset } => {
                let w = PI * frequency;
                let base = match order % 4 {
                    0 => (w * s).sin(),
                    1 => (w * s).cos(),
                    2 => -(w * s).sin(),
                    _ => -(w * s).cos(),
                };
                let shift = if order == 0 { *offset } else { 0.0 };
                shift + amplitude * w.powi(order as i32) * base
            }
        }
    }
}

/// Smooth part of a chain/curve shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Straight {
        #[serde(default)]
        angle: f64,
    },
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Angles sampled on a uniform grid over `[0, 1]`, linearly interpolated.
    Custom { theta: Vec<f64> },
}

/// `{"type": "straight" | "sine" | "custom", ..., "kinks": [{"s_o", "alpha"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub kinks: Vec<KinkSpec>,
}

impl ProfileSpec {
    pub fn straight(angle: f64) -> Self {
        ProfileSpec { shape: Shape::Straight { angle }, kinks: Vec::new() }
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        ProfileSpec { shape: Shape::Sine { amplitude, frequency, offset: 0.0 }, kinks: Vec::new() }
    }

    pub fn with_kinks(mut self, kinks: Vec<KinkSpec>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Shape::Custom { theta } = &self.shape {
            if theta.len() < 2 || theta.iter().any(|v| !v.is_finite()) {
                return Err(WhipError::Invalid("custom profile needs >= 2 finite samples".into()));
            }
        }
        crate::kink::validate_kinks(&self.kinks)
    }

    /// Smooth angle, without kinks.
    pub fn smooth_theta(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::Straight { angle } => *angle,
            Shape::Sine { amplitude, frequency, offset } => offset + amplitude * (PI * frequency * s).sin(),
            Shape::Custom { theta } => {
                let m = theta.len() - 1;
                let x = (s.clamp(0.0, 1.0) * m as f64).min(m as f64);
                let j = (x.floor() as usize).min(m - 1);
                let t = x - j as f64;
                theta[j] * (1.0 - t) + theta[j + 1] * t
            }
        }
    }

    /// Curvature `θ_s` of the smooth part.
    pub fn smooth_kappa(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::Straight { .. } => 0.0,
            Shape::Sine { amplitude, frequency, .. } => amplitude * PI * frequency * (PI * frequency * s).cos(),
            Shape::Custom { theta } => {
                let m = theta.len() - 1;
                let j = ((s.clamp(0.0, 1.0) * m as f64).floor() as usize).min(m - 1);
                (theta[j + 1] - theta[j]) * m as f64
            }
        }
    }

    /// Kink positions snapped to link boundaries `k/n`, returned as `k`.
    pub fn kink_indices(&self, n: usize) -> Vec<(usize, f64)> {
        self.kinks.iter().map(|k| (k.snap(n), k.alpha)).collect()
    }

    /// Chain with `θ_k = θ(k/n)`, each kink adding `α` to every link past
    /// its snapped boundary. Angular rates are zero.
    pub fn chain(&self, n: usize, g: f64) -> Result<ChainState> {
        self.validate()?;
        let kinks = self.kink_indices(n);
        let theta = (1..=n)
            .map(|k| {
                let jump: f64 = kinks.iter().filter(|(ko, _)| k > *ko).map(|(_, a)| a).sum();
                self.smooth_theta(k as f64 / n as f64) + jump
            })
            .collect();
        ChainState::new(theta, vec![0.0; n], g)
    }

    /// `κ` of the smooth part at `s_j = j/m`.
    pub fn kappa_grid(&self, m: usize) -> Vec<f64> {
        (0..=m).map(|j| self.smooth_kappa(j as f64 / m as f64)).collect()
    }
}
