//! Riccati shadow of the elimination pivots, kinks, and the limit of the
//! scaled inverse tension matrix.
//!
//! For a smooth chain the pivots behave like `b_i ≈ 1 + f(i/n)/n` with
//! `f' = κ² - f²`, `f(0) = 0`. A kink makes `f` blow up from the right; `f`
//! does not depend on the kink angle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ChainState;
use crate::error::{Result, WhipError};
use crate::profile::ProfileSpec;
use crate::tension::{closed_form_inverse, tension, TridiagonalOperator};

/// Tangent jump of angle `alpha` at arclength `s_o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkSpec {
    pub s_o: f64,
    pub alpha: f64,
}

impl KinkSpec {
    pub fn new(s_o: f64, alpha: f64) -> Result<Self> {
        let k = KinkSpec { s_o, alpha };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_o > 0.0 && self.s_o < 1.0) {
            return Err(WhipError::Invalid(format!("kink position {} outside (0, 1)", self.s_o)));
        }
        if !(self.alpha != 0.0 && self.alpha.abs() < std::f64::consts::PI) {
            return Err(WhipError::Invalid(format!("kink angle {} must satisfy 0 < |alpha| < pi", self.alpha)));
        }
        Ok(())
    }

    /// Nearest grid index `k` with `k/m ≈ s_o`.
    pub fn snap(&self, m: usize) -> usize {
        (self.s_o * m as f64).round() as usize
    }
}

pub(crate) fn validate_kinks(kinks: &[KinkSpec]) -> Result<()> {
    for k in kinks {
        k.validate()?;
    }
    if kinks.windows(2).any(|w| !(w[0].s_o < w[1].s_o)) {
        return Err(WhipError::Invalid("kinks must be sorted and distinct".into()));
    }
    Ok(())
}

/// `f` on `s_j = j/m`, with `f = +∞` recorded at kink nodes, and the
/// running integral `F(s_j) = ∫_0^{s_j} f` where each blow-up cell
/// `[s_o, s_o + ε]` is left out (`ε = 1/m`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiSolution {
    pub m: usize,
    pub f: Vec<f64>,
    pub integral: Vec<f64>,
    pub kink_nodes: Vec<usize>,
}

impl RiccatiSolution {
    pub fn s(&self, j: usize) -> f64 {
        j as f64 / self.m as f64
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// `F` at arbitrary `s` by linear interpolation between nodes.
    pub fn integral_at(&self, s: f64) -> f64 {
        let x = s.clamp(0.0, 1.0) * self.m as f64;
        let j = (x.floor() as usize).min(self.m - 1);
        let t = x - j as f64;
        self.integral[j] * (1.0 - t) + self.integral[j + 1] * t
    }
}

/// RK4 for `(f, F)' = (κ² - f², f)` on `m` cells; `kappa_sq(s)` is sampled at
/// nodes and cell midpoints.
pub fn riccati_solve_with(kappa_sq: impl Fn(f64) -> f64, kinks: &[KinkSpec], m: usize) -> Result<RiccatiSolution> {
    validate_kinks(kinks)?;
    if m < 2 {
        return Err(WhipError::Invalid("riccati grid needs m >= 2".into()));
    }
    let h = 1.0 / m as f64;
    let kink_nodes: Vec<usize> = kinks.iter().map(|k| k.snap(m).clamp(1, m - 1)).collect();
    if kink_nodes.windows(2).any(|w| w[1] <= w[0] + 1) {
        return Err(WhipError::Invalid("kinks closer than two grid cells".into()));
    }
    let rhs = |s: f64, f: f64| kappa_sq(s) - f * f;

    let mut f = vec![0.0; m + 1];
    let mut integral = vec![0.0; m + 1];
    let mut j = 0;
    while j < m {
        if kink_nodes.contains(&(j + 1)) {
            f[j + 1] = f64::INFINITY;
            integral[j + 1] = integral[j] + rk4_cell(&rhs, j as f64 * h, f[j], h).1;
            if j + 2 <= m {
                f[j + 2] = 1.0 / h;
                integral[j + 2] = integral[j + 1];
            }
            j += 2;
            continue;
        }
        let (next, area) = rk4_cell(&rhs, j as f64 * h, f[j], h);
        f[j + 1] = next;
        integral[j + 1] = integral[j] + area;
        j += 1;
    }
    Ok(RiccatiSolution { m, f, integral, kink_nodes })
}

fn rk4_cell(rhs: &impl Fn(f64, f64) -> f64, s: f64, f: f64, h: f64) -> (f64, f64) {
    let k1 = rhs(s, f);
    let k2 = rhs(s + 0.5 * h, f + 0.5 * h * k1);
    let k3 = rhs(s + 0.5 * h, f + 0.5 * h * k2);
    let k4 = rhs(s + h, f + h * k3);
    let next = f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // F' = f, integrated with the same stage values of f
    let f2 = f + 0.5 * h * k1;
    let f3 = f + 0.5 * h * k2;
    let f4 = f + h * k3;
    let area = h / 6.0 * (f + 2.0 * f2 + 2.0 * f3 + f4);
    (next, area)
}

/// Grid version: `kappa` holds `κ(s_j)` for `j = 0..=m`; midpoint values use
/// the average of the neighbouring nodes.
pub fn riccati_solve(kappa: &[f64], kinks: &[KinkSpec]) -> Result<RiccatiSolution> {
    let m = kappa.len().saturating_sub(1);
    if m < 2 || kappa.iter().any(|k| !k.is_finite()) {
        return Err(WhipError::Invalid("kappa must hold >= 3 finite samples".into()));
    }
    let interp = |s: f64| {
        let x = s * m as f64;
        let j = (x.floor() as usize).min(m - 1);
        let t = x - j as f64;
        let k = kappa[j] * (1.0 - t) + kappa[j + 1] * t;
        k * k
    };
    riccati_solve_with(interp, kinks, m)
}

/// Per-link comparison of the pivots with `1 + f(i/n)/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotComparison {
    pub pivots: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `true` where the link lies within the exclusion window of a kink.
    pub excluded: Vec<bool>,
}

impl PivotComparison {
    pub fn residual(&self) -> f64 {
        self.pivots
            .iter()
            .zip(&self.predicted)
            .zip(&self.excluded)
            .filter(|(_, &ex)| !ex)
            .map(|((b, p), _)| (b - p).abs())
            .fold(0.0, f64::max)
    }
}

/// Discrete curvature of a chain as a function of `s`: the values
/// `n(θ_{i+1} - θ_i - α_i)` placed at `(i + ½)/n`, linearly interpolated
/// (held constant past the ends). Kink jumps `α_i` are removed.
pub fn chain_curvature(state: &ChainState, kinks: &[KinkSpec]) -> impl Fn(f64) -> f64 {
    let n = state.n();
    let mut jumps = vec![0.0; n];
    for k in kinks {
        let ko = k.snap(n);
        if ko >= 1 && ko < n {
            jumps[ko] += k.alpha;
        }
    }
    let th = state.theta();
    let samples: Vec<(f64, f64)> = (1..n)
        .map(|i| ((i as f64 + 0.5) / n as f64, n as f64 * (th[i] - th[i - 1] - jumps[i])))
        .collect();
    move |s: f64| {
        if samples.is_empty() {
            return 0.0;
        }
        if s <= samples[0].0 {
            return samples[0].1;
        }
        let last = samples[samples.len() - 1];
        if s >= last.0 {
            return last.1;
        }
        let x = s * n as f64 - 1.5;
        let i = (x.floor() as usize).min(samples.len() - 2);
        let t = x - i as f64;
        samples[i].1 * (1.0 - t) + samples[i + 1].1 * t
    }
}

pub fn pivot_comparison(state: &ChainState, kinks: &[KinkSpec], exclusion: usize) -> Result<PivotComparison> {
    let n = state.n();
    let pivots = tension(state)?.pivots;
    let kappa = chain_curvature(state, kinks);
    let m = n.max(2);
    let sol = riccati_solve_with(|s| kappa(s).powi(2), kinks, m)?;
    let predicted = (1..=n).map(|i| 1.0 + sol.f[i * m / n] / n as f64).collect();
    let kink_idx: Vec<usize> = kinks.iter().map(|k| k.snap(n)).collect();
    let excluded = (1..=n).map(|i| kink_idx.iter().any(|&k| i.abs_diff(k) <= exclusion)).collect();
    Ok(PivotComparison { pivots, predicted, excluded })
}

/// `max_i |b_i - 1 - f(i/n)/n|` away from kinks (two cells either side).
pub fn pivot_approximation_residual(state: &ChainState, kinks: &[KinkSpec]) -> Result<f64> {
    Ok(pivot_comparison(state, kinks, 2)?.residual())
}

/// Truncated value of the kinked Green-function integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinkGreenValue {
    pub value: f64,
    /// Truncation distance used for `∫f` past each kink.
    pub epsilon: f64,
    /// Whether some `∫f` in the integrand crosses a kink (and is truncated).
    pub truncated: bool,
}

/// `G(x,y) = ∫_{max(x,y)}^1 φ(x,s) φ(y,s) e^{-∫_x^s f} e^{-∫_y^s f} ds`,
/// `φ(x,s) = cos α` for each kink with `x < s_o < s`.
pub fn kink_green_from(sol: &RiccatiSolution, x: f64, y: f64, kinks: &[KinkSpec]) -> Result<KinkGreenValue> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(WhipError::Invalid("x and y must lie in [0, 1]".into()));
    }
    let m = sol.m;
    let kink_pos: Vec<(f64, f64)> = kinks
        .iter()
        .zip(&sol.kink_nodes)
        .map(|(k, &node)| (node as f64 / m as f64, k.alpha))
        .collect();
    let phi = |from: f64, s: f64| -> f64 {
        kink_pos.iter().filter(|(so, _)| from < *so && *so < s).map(|(_, a)| a.cos()).product()
    };
    let fx = sol.integral_at(x);
    let fy = sol.integral_at(y);
    let integrand = |s: f64, big_f: f64| phi(x, s) * phi(y, s) * (-(big_f - fx) - (big_f - fy)).exp();

    let lo = x.max(y);
    let first = ((lo * m as f64).floor() as usize + 1).min(m + 1);
    let mut points: Vec<(f64, f64)> = vec![(lo, sol.integral_at(lo))];
    points.extend((first..=m).map(|j| (sol.s(j), sol.integral[j])));
    let mut value = 0.0;
    for w in points.windows(2) {
        let (s0, f0) = w[0];
        let (s1, f1) = w[1];
        // evaluate φ just inside the cell so a kink node counts on its right
        let left = integrand(s0 + 1e-12, f0) * phi(x, s0 + 1e-12).signum().abs();
        let right = integrand(s1, f1);
        value += 0.5 * (s1 - s0) * (left + right);
    }
    let truncated = kink_pos.iter().any(|(so, _)| lo.min(x) < *so || lo.min(y) < *so);
    Ok(KinkGreenValue { value, epsilon: sol.epsilon(), truncated })
}

pub fn kink_green(x: f64, y: f64, kappa: &[f64], kinks: &[KinkSpec]) -> Result<KinkGreenValue> {
    let sol = riccati_solve(kappa, kinks)?;
    kink_green_from(&sol, x, y, kinks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenLimitSample {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    /// `(1/n) M^{ij}`.
    pub value: f64,
}

/// `(1/n) M^{ij}` at `i = ⌊nx⌋`, `j = ⌊ny⌋` for each `n`, the chain being
/// sampled from `profile` with kinks snapped to link boundaries.
pub fn discrete_green_limit(profile: &ProfileSpec, x: f64, y: f64, n_list: &[usize]) -> Result<Vec<GreenLimitSample>> {
    if !(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0) {
        return Err(WhipError::Invalid("x and y must lie in (0, 1]".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WhipError::Invalid("n_list must be increasing".into()));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let chain = profile.chain(n, 0.0)?;
            let inv = closed_form_inverse(&TridiagonalOperator::from_angles(chain.theta()))?;
            let i = ((n as f64 * x + 1e-9).floor() as usize).clamp(1, n);
            let j = ((n as f64 * y + 1e-9).floor() as usize).clamp(1, n);
            Ok(GreenLimitSample { n, i, j, value: inv.get(i - 1, j - 1) / n as f64 })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GravityProbe {
    pub lambda1: f64,
    pub m11: f64,
    /// `-n g M^{11} sin θ_1`.
    pub predicted: f64,
}

/// First-link tension of a straight chain at angle `theta1`, at rest with
/// `g = 1`; checks that `λ_1` has the sign of `-sin θ_1`.
pub fn gravity_negative_tension_probe(theta1: f64, n: usize) -> Result<GravityProbe> {
    let g = 1.0;
    let chain = ChainState::straight(n, theta1, 0.0, g)?;
    let lambda1 = tension(&chain)?.lambda[0];
    let m11 = closed_form_inverse(&TridiagonalOperator::from_angles(chain.theta()))?.get(0, 0);
    let predicted = -(n as f64) * g * m11 * theta1.sin();
    let sin = theta1.sin();
    let scale = n as f64 * g * m11;
    let consistent = if sin.abs() * scale <= 1e-12 {
        lambda1.abs() <= 1e-12 * scale.max(1.0)
    } else {
        lambda1.signum() == -sin.signum()
    };
    if !consistent {
        return Err(WhipError::SignCheck(format!("lambda_1 = {lambda1:e} for sin(theta_1) = {sin:e}")));
    }
    Ok(GravityProbe { lambda1, m11, predicted })
}
