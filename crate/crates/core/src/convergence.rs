//! Discrete-to-continuum checks: truncation order of the scaled chain
//! equations, refinement studies of the dynamics, and tension/acceleration
//! comparisons against continuum profiles.
//!
//! The scaling is `θ_n(k/n) = θ_k`, `σ_n(k/n) = λ_k / n²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ChainState;
use crate::dynamics::{acceleration_with_tension, integrate};
use crate::error::{Result, WhipError};
use crate::profile::Analytic;
use crate::tension::tension;

/// Errors at several resolutions and the fitted order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    /// `(resolution, error)` pairs.
    pub levels: Vec<(usize, f64)>,
    /// Negated least-squares slope of `log error` against `log resolution`,
    /// so that `error ~ C / resolution^p` gives `p`.
    pub observed_order: f64,
}

impl RefinementReport {
    pub fn from_levels(levels: Vec<(usize, f64)>) -> Result<Self> {
        if levels.len() < 3 {
            return Err(WhipError::Invalid("a refinement report needs at least 3 levels".into()));
        }
        if levels.iter().any(|(n, e)| *n == 0 || !(*e > 0.0) || !e.is_finite()) {
            return Err(WhipError::Invalid("refinement errors must be positive and finite".into()));
        }
        let pts: Vec<(f64, f64)> = levels.iter().map(|(n, e)| ((*n as f64).ln(), e.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        if !(sxx > 0.0) {
            return Err(WhipError::Invalid("refinement resolutions must differ".into()));
        }
        Ok(RefinementReport { levels, observed_order: -sxy / sxx })
    }

    /// Successive error ratios `e(n_i) / e(n_{i+1})`.
    pub fn ratios(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[0].1 / w[1].1).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Max-norm residuals of the two scaled chain equations on exact samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationResidual {
    /// `n²[σ(x+h) sin(θ(x+h)-θ(x)) - σ(x-h) sin(θ(x)-θ(x-h))] - (σθ'' + 2σ'θ')`.
    pub evolution: f64,
    /// `n²[2σ(x) - cos(θ(x+h)-θ(x)) σ(x+h) - cos(θ(x)-θ(x-h)) σ(x-h)] - (θ'²σ - σ'')`.
    pub tension: f64,
}

/// Residuals over the interior nodes `x = k/n`, `k = 1..n-1`.
pub fn truncation_residual(theta: &Analytic, sigma: &Analytic, n: usize) -> Result<TruncationResidual> {
    if n < 2 {
        return Err(WhipError::Invalid("truncation residual needs n >= 2".into()));
    }
    let h = 1.0 / n as f64;
    let n2 = (n * n) as f64;
    let mut out = TruncationResidual { evolution: 0.0, tension: 0.0 };
    for k in 1..n {
        let x = k as f64 * h;
        let (tm, t0, tp) = (theta.value(x - h), theta.value(x), theta.value(x + h));
        let (sm, s0, sp) = (sigma.value(x - h), sigma.value(x), sigma.value(x + h));
        let evol = n2 * (sp * (tp - t0).sin() - sm * (t0 - tm).sin())
            - (s0 * theta.d2(x) + 2.0 * sigma.d1(x) * theta.d1(x));
        let tens = n2 * (2.0 * s0 - (tp - t0).cos() * sp - (t0 - tm).cos() * sm)
            - (theta.d1(x).powi(2) * s0 - sigma.d2(x));
        out.evolution = out.evolution.max(evol.abs());
        out.tension = out.tension.max(tens.abs());
    }
    Ok(out)
}

/// Truncation residuals at each `n`, one report per equation.
pub fn truncation_study(
    theta: &Analytic,
    sigma: &Analytic,
    n_list: &[usize],
) -> Result<(RefinementReport, RefinementReport)> {
    let res = n_list
        .iter()
        .map(|&n| truncation_residual(theta, sigma, n).map(|r| (n, r)))
        .collect::<Result<Vec<_>>>()?;
    let evol = RefinementReport::from_levels(res.iter().map(|(n, r)| (*n, r.evolution)).collect())?;
    let tens = RefinementReport::from_levels(res.iter().map(|(n, r)| (*n, r.tension)).collect())?;
    Ok((evol, tens))
}

/// Smooth initial data for a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub theta: Analytic,
    pub theta_t: Analytic,
    #[serde(default)]
    pub g: f64,
}

impl InitialData {
    pub fn chain(&self, n: usize) -> Result<ChainState> {
        ChainState::from_profile(n, |s| self.theta.value(s), |s| self.theta_t.value(s), self.g)
    }
}

/// `dt = min(1e-3, 0.2/n)`.
pub fn default_dt(n: usize) -> f64 {
    f64::min(1e-3, 0.2 / n as f64)
}

/// Per-level errors of a dynamics refinement study against the finest level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    /// `(n, max_k |θ_k(T) - θ_ref(k/n, T)|)` for every level but the finest.
    pub angle_errors: Vec<(usize, f64)>,
    /// Same for the angular rates.
    pub rate_errors: Vec<(usize, f64)>,
    pub reference_n: usize,
}

impl RefinementStudy {
    pub fn max_angle_error(&self) -> f64 {
        self.angle_errors.iter().map(|l| l.1).fold(0.0, f64::max)
    }

    pub fn report(&self) -> Result<RefinementReport> {
        RefinementReport::from_levels(self.angle_errors.clone())
    }
}

/// Simulates each level to `t_end` with `dt_rule(n)` and compares at the
/// shared nodes `k/n` with the finest level. Every level must divide the
/// finest one.
pub fn refinement_study(
    data: &InitialData,
    n_list: &[usize],
    t_end: f64,
    dt_rule: impl Fn(usize) -> f64 + Sync,
) -> Result<RefinementStudy> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WhipError::Invalid("n_list must be increasing with at least two entries".into()));
    }
    let finest = *n_list.last().unwrap();
    if n_list.iter().any(|n| !finest.is_multiple_of(*n)) {
        return Err(WhipError::Invalid("every level must divide the finest level".into()));
    }
    let finals = n_list
        .par_iter()
        .map(|&n| integrate(&data.chain(n)?, dt_rule(n), t_end))
        .collect::<Result<Vec<_>>>()?;
    let reference = finals.last().unwrap();
    let mut angle_errors = Vec::new();
    let mut rate_errors = Vec::new();
    for (state, &n) in finals.iter().zip(n_list).take(n_list.len() - 1) {
        let stride = finest / n;
        let mut ea: f64 = 0.0;
        let mut er: f64 = 0.0;
        for k in 1..=n {
            let r = k * stride - 1;
            ea = ea.max((state.theta()[k - 1] - reference.theta()[r]).abs());
            er = er.max((state.omega()[k - 1] - reference.omega()[r]).abs());
        }
        angle_errors.push((n, ea));
        rate_errors.push((n, er));
    }
    Ok(RefinementStudy { angle_errors, rate_errors, reference_n: finest })
}

/// `max_k |λ_k / n² - σ(k/n)|`.
pub fn tension_comparison(state: &ChainState, sigma: impl Fn(f64) -> f64) -> Result<f64> {
    let n = state.n();
    let n2 = (n * n) as f64;
    let lam = tension(state)?.lambda;
    Ok((1..=n)
        .map(|k| (lam[k - 1] / n2 - sigma(k as f64 / n as f64)).abs())
        .fold(0.0, f64::max))
}

/// `max_k |θ̈_k - (σθ'' + 2σ'θ')(k/n)|` over interior links `k = 2..n-1`.
pub fn acceleration_comparison(state: &ChainState, theta: &Analytic, sigma: &Analytic) -> Result<f64> {
    let n = state.n();
    let acc = acceleration_with_tension(state)?.theta_ddot;
    Ok((2..n)
        .map(|k| {
            let x = k as f64 / n as f64;
            let exact = sigma.value(x) * theta.d2(x) + 2.0 * sigma.d1(x) * theta.d1(x);
            (acc[k - 1] - exact).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_recovers_power_law() {
        let levels = (0..4).map(|i| {
            let n = 10usize << i;
            (n, 3.0 / (n as f64).powi(2))
        });
        let r = RefinementReport::from_levels(levels.collect()).unwrap();
        assert!((r.observed_order - 2.0).abs() < 1e-12);
        assert!(r.is_monotone());
        assert!(r.ratios().iter().all(|q| (q - 4.0).abs() < 1e-12));
    }

    #[test]
    fn report_validation() {
        assert!(RefinementReport::from_levels(vec![(1, 1.0), (2, 0.5)]).is_err());
        assert!(RefinementReport::from_levels(vec![(1, 1.0), (2, 0.0), (4, 0.1)]).is_err());
    }

    #[test]
    fn constant_profiles_have_zero_residual() {
        let c = Analytic::Constant { value: 0.7 };
        let r = truncation_residual(&c, &Analytic::Constant { value: 2.0 }, 50).unwrap();
        assert_eq!(r.evolution, 0.0);
        assert!(r.tension.abs() < 1e-9);
    }

    #[test]
    fn hanging_chain_tension_offset() {
        let n = 40;
        let g = 9.8;
        let d = tension_comparison(&ChainState::hanging(n, g).unwrap(), |s| g * (1.0 - s)).unwrap();
        assert!(d <= g / n as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn default_dt_rule() {
        assert_eq!(default_dt(100), 1e-3);
        assert_eq!(default_dt(400), 5e-4);
    }
}
