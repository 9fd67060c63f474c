//! Grid model of the continuum whip on `s ∈ [0, 1]`, `s_j = j/m`.
//!
//! The tension operator `-∂_s² + κ²` is discretised as a symmetric
//! tridiagonal matrix on the unknowns `s_0..s_{m-1}` (the free end `s_m`
//! carries the Dirichlet value 0). Rows are scaled by the trapezoid weights
//! `w_0 = h/2`, `w_j = h`, so that interior rows are `h` times the central
//! difference and row 0 is `h/2` times the reflected (ghost-node) Neumann
//! row. The matrix is a symmetric M-matrix, so the discrete Green function
//! is symmetric and entrywise positive.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{Energy, Vec2};
use crate::error::{check_len, Result, WhipError};
use crate::linalg::LdlTridiagonal;
use crate::tension::DenseMatrix;

/// `θ(s)`, `θ_t(s)` sampled on the uniform grid, plus gravity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumCurve {
    m: usize,
    theta: Vec<f64>,
    theta_t: Vec<f64>,
    g: f64,
}

#[derive(Deserialize)]
struct RawCurve {
    m: Option<usize>,
    theta: Vec<f64>,
    theta_t: Vec<f64>,
    #[serde(default)]
    g: f64,
}

impl<'de> Deserialize<'de> for ContinuumCurve {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCurve::deserialize(d)?;
        if let Some(m) = raw.m {
            if m + 1 != raw.theta.len() {
                return Err(serde::de::Error::custom(format!(
                    "m = {m} needs {} samples, got {}",
                    m + 1,
                    raw.theta.len()
                )));
            }
        }
        ContinuumCurve::new(raw.theta, raw.theta_t, raw.g).map_err(serde::de::Error::custom)
    }
}

impl ContinuumCurve {
    /// `theta` and `theta_t` hold `m + 1` samples each; `m >= 3`.
    pub fn new(theta: Vec<f64>, theta_t: Vec<f64>, g: f64) -> Result<Self> {
        if theta.len() < 4 {
            return Err(WhipError::Invalid("continuum grid needs m >= 3".into()));
        }
        check_len(theta.len(), theta_t.len())?;
        if theta.iter().chain(&theta_t).any(|v| !v.is_finite()) || !g.is_finite() || g < 0.0 {
            return Err(WhipError::Invalid("curve samples must be finite and g >= 0".into()));
        }
        Ok(ContinuumCurve { m: theta.len() - 1, theta, theta_t, g })
    }

    pub fn from_fn(m: usize, theta: impl Fn(f64) -> f64, theta_t: impl Fn(f64) -> f64, g: f64) -> Result<Self> {
        let s = grid(m);
        ContinuumCurve::new(s.iter().map(|&x| theta(x)).collect(), s.iter().map(|&x| theta_t(x)).collect(), g)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_t(&self) -> &[f64] {
        &self.theta_t
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn s(&self) -> Vec<f64> {
        grid(self.m)
    }

    /// `κ = θ_s`, central inside, second-order one-sided at both ends.
    pub fn kappa(&self) -> Vec<f64> {
        derivative(&self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.theta_t).all(|v| v.is_finite())
    }
}

pub fn grid(m: usize) -> Vec<f64> {
    (0..=m).map(|j| j as f64 / m as f64).collect()
}

/// Trapezoid weights on the uniform grid with `m` intervals.
pub fn trapezoid_weights(m: usize) -> Vec<f64> {
    let h = 1.0 / m as f64;
    let mut w = vec![h; m + 1];
    w[0] = 0.5 * h;
    w[m] = 0.5 * h;
    w
}

pub fn trapezoid(values: &[f64]) -> f64 {
    let m = values.len() - 1;
    values.iter().zip(trapezoid_weights(m)).map(|(v, w)| v * w).sum()
}

/// Nodal first derivative on `[0, 1]`: central differences inside and
/// second-order one-sided differences at the ends.
pub fn derivative(f: &[f64]) -> Vec<f64> {
    let m = f.len() - 1;
    let inv2h = 0.5 * m as f64;
    let mut d = vec![0.0; m + 1];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
    d[m] = (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]) * inv2h;
    for j in 1..m {
        d[j] = (f[j + 1] - f[j - 1]) * inv2h;
    }
    d
}

/// Factorised tension operator for a given `κ` grid function.
#[derive(Debug, Clone)]
pub struct TensionOperator {
    m: usize,
    factor: LdlTridiagonal,
}

impl TensionOperator {
    pub fn new(kappa: &[f64]) -> Result<Self> {
        let m = kappa.len().checked_sub(1).filter(|&m| m >= 2).ok_or_else(|| {
            WhipError::Invalid("kappa grid needs at least three samples".into())
        })?;
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(WhipError::Invalid("kappa must be finite".into()));
        }
        let h = 1.0 / m as f64;
        let mut diag: Vec<f64> = (0..m).map(|j| 2.0 / h + h * kappa[j] * kappa[j]).collect();
        diag[0] = 1.0 / h + 0.5 * h * kappa[0] * kappa[0];
        let off = vec![-1.0 / h; m - 1];
        Ok(TensionOperator { m, factor: LdlTridiagonal::factor(&diag, &off)? })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Solves with weighted right-hand side `rhs[0..m]`; appends the
    /// Dirichlet value at `s = 1`.
    fn solve_weighted(&self, rhs: Vec<f64>) -> Result<Vec<f64>> {
        let mut x = rhs;
        self.factor.solve_in_place(&mut x)?;
        x.push(0.0);
        Ok(x)
    }

    /// Column `k` of the discrete Green function, `G(s_j, s_k)` for all `j`.
    pub fn green_column(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.m {
            return Err(WhipError::Invalid(format!("source index {k} outside 0..={}", self.m)));
        }
        if k == self.m {
            return Ok(vec![0.0; self.m + 1]);
        }
        let mut rhs = vec![0.0; self.m];
        rhs[k] = 1.0;
        self.solve_weighted(rhs)
    }

    /// Solves `-σ'' + κ²σ = f`, `σ'(0) = slope0`, `σ(1) = 0`.
    pub fn solve(&self, f: &[f64], slope0: f64) -> Result<Vec<f64>> {
        check_len(self.m + 1, f.len())?;
        let w = trapezoid_weights(self.m);
        let mut rhs: Vec<f64> = (0..self.m).map(|j| w[j] * f[j]).collect();
        rhs[0] -= slope0;
        self.solve_weighted(rhs)
    }
}

/// `G[j][k] ≈ G(s_j, s_k)` on the `(m+1) × (m+1)` grid.
#[derive(Debug, Clone)]
pub struct GreenTable {
    m: usize,
    table: DenseMatrix,
}

impl GreenTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.table.get(j, k)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.table
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.m + 1;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j + 1..n {
                worst = worst.max((self.get(j, k) - self.get(k, j)).abs());
            }
        }
        worst
    }

    pub fn min_entry(&self) -> f64 {
        self.table.min_entry()
    }

    /// `max |G[j][k] - exact(s_j, s_k)|`.
    pub fn max_error(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let s = grid(self.m);
        let mut worst: f64 = 0.0;
        for (j, &sj) in s.iter().enumerate() {
            for (k, &sk) in s.iter().enumerate() {
                worst = worst.max((self.get(j, k) - exact(sj, sk)).abs());
            }
        }
        worst
    }

    /// Square CSV matrix, one grid row per line, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for j in 0..=self.m {
            let row: Vec<String> = self.table.row(j).iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Discrete Green function of `-∂_s² + κ²` with `G_s(0, q) = 0`,
/// `G(1, q) = 0` and a unit source lumped at each node.
pub fn green_table(kappa: &[f64]) -> Result<GreenTable> {
    let op = TensionOperator::new(kappa)?;
    let m = op.m();
    let columns: Vec<Vec<f64>> = (0..=m)
        .into_par_iter()
        .map(|k| op.green_column(k))
        .collect::<Result<_>>()?;
    let mut table = DenseMatrix::zeros(m + 1);
    for (k, col) in columns.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            table.set(j, k, *v);
        }
    }
    Ok(GreenTable { m, table })
}

pub fn green_column(kappa: &[f64], k: usize) -> Result<Vec<f64>> {
    TensionOperator::new(kappa)?.green_column(k)
}

/// Tension `σ` with `σ_ss - κ²σ = -θ_t²`, `σ_s(0) = g sin θ(0)`, `σ(1) = 0`.
pub fn sigma_solve(curve: &ContinuumCurve) -> Result<Vec<f64>> {
    let op = TensionOperator::new(&curve.kappa())?;
    let f: Vec<f64> = curve.theta_t.iter().map(|w| w * w).collect();
    op.solve(&f, curve.g * curve.theta[0].sin())
}

/// Kinetic `½∫|η_t|² ds` and potential `g∫⟨η, e_2⟩ ds`, with `η` and `η_t`
/// rebuilt from `θ`, `θ_t` by cumulative trapezoid integration.
pub fn continuum_energy(curve: &ContinuumCurve) -> Energy {
    let h = curve.h();
    let m = curve.m;
    let mut pos = vec![Vec2::ZERO; m + 1];
    let mut vel = vec![Vec2::ZERO; m + 1];
    for j in 1..=m {
        let t0 = Vec2::unit(curve.theta[j - 1]);
        let t1 = Vec2::unit(curve.theta[j]);
        let n0 = curve.theta_t[j - 1] * Vec2::unit_normal(curve.theta[j - 1]);
        let n1 = curve.theta_t[j] * Vec2::unit_normal(curve.theta[j]);
        pos[j] = pos[j - 1] + (0.5 * h) * (t0 + t1);
        vel[j] = vel[j - 1] + (0.5 * h) * (n0 + n1);
    }
    let kinetic = 0.5 * trapezoid(&vel.iter().map(|v| v.norm_sq()).collect::<Vec<_>>());
    let potential = curve.g * trapezoid(&pos.iter().map(|p| p.y).collect::<Vec<_>>());
    Energy { kinetic, potential }
}

/// Largest stable step `h / (2 √max σ)`.
pub fn cfl_limit(curve: &ContinuumCurve, sigma: &[f64]) -> f64 {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax <= 0.0 {
        f64::INFINITY
    } else {
        curve.h() / (2.0 * smax.sqrt())
    }
}

/// `θ_tt = 2σ_s θ_s + σ θ_ss` on the grid.
///
/// At `s = 0` the curve is reflected evenly (`θ_{-1} = θ_1`, so `θ_s = 0`)
/// and `σ_s` takes its boundary value; at the free end second-order
/// one-sided differences are used and `σ = 0` removes the `θ_ss` term.
fn theta_accel(curve: &ContinuumCurve, sigma: &[f64]) -> Vec<f64> {
    let m = curve.m;
    let th = &curve.theta;
    let inv_h = m as f64;
    let inv_h2 = inv_h * inv_h;
    let sig_s = {
        let mut d = derivative(sigma);
        d[0] = curve.g * th[0].sin();
        d
    };
    let mut acc = vec![0.0; m + 1];
    acc[0] = sigma[0] * 2.0 * (th[1] - th[0]) * inv_h2;
    for j in 1..m {
        let ts = 0.5 * (th[j + 1] - th[j - 1]) * inv_h;
        let tss = (th[j + 1] - 2.0 * th[j] + th[j - 1]) * inv_h2;
        acc[j] = 2.0 * sig_s[j] * ts + sigma[j] * tss;
    }
    let ts_end = 0.5 * (3.0 * th[m] - 4.0 * th[m - 1] + th[m - 2]) * inv_h;
    let tss_end = (2.0 * th[m] - 5.0 * th[m - 1] + 4.0 * th[m - 2] - th[m - 3]) * inv_h2;
    acc[m] = 2.0 * sig_s[m] * ts_end + sigma[m] * tss_end;
    acc
}

/// Sampled continuum trajectory.
#[derive(Debug, Clone)]
pub struct ContinuumTrajectory {
    pub times: Vec<f64>,
    pub curves: Vec<ContinuumCurve>,
}

impl ContinuumTrajectory {
    pub fn last(&self) -> &ContinuumCurve {
        self.curves.last().expect("trajectory holds the initial curve")
    }

    /// Columns `t, theta_0..theta_m, theta_t_0..theta_t_m, K, U`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = self.curves[0].m;
        let mut header = vec!["t".to_string()];
        header.extend((0..=m).map(|j| format!("theta_{j}")));
        header.extend((0..=m).map(|j| format!("theta_t_{j}")));
        header.extend(["K".to_string(), "U".to_string()]);
        writeln!(w, "{}", header.join(","))?;
        for (t, c) in self.times.iter().zip(&self.curves) {
            let e = continuum_energy(c);
            let mut row = vec![format!("{t:e}")];
            row.extend(c.theta.iter().chain(&c.theta_t).map(|v| format!("{v:e}")));
            row.push(format!("{:e}", e.kinetic));
            row.push(format!("{:e}", e.potential));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn moved(curve: &ContinuumCurve, k_theta: &[f64], k_rate: &[f64], c: f64) -> ContinuumCurve {
    ContinuumCurve {
        m: curve.m,
        theta: curve.theta.iter().zip(k_theta).map(|(a, b)| a + c * b).collect(),
        theta_t: curve.theta_t.iter().zip(k_rate).map(|(a, b)| a + c * b).collect(),
        g: curve.g,
    }
}

/// One RK4 step of the method-of-lines system; `σ` is re-solved at every
/// stage. Returns the new curve and the CFL limit measured at the start.
pub fn evolve_step(curve: &ContinuumCurve, dt: f64) -> Result<(ContinuumCurve, f64)> {
    let rhs = |c: &ContinuumCurve| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let sigma = sigma_solve(c)?;
        let limit = cfl_limit(c, &sigma);
        Ok((c.theta_t.clone(), theta_accel(c, &sigma), limit))
    };
    let (k1t, k1w, limit) = rhs(curve)?;
    if dt > limit {
        return Err(WhipError::Cfl { dt, limit });
    }
    let (k2t, k2w, _) = rhs(&moved(curve, &k1t, &k1w, 0.5 * dt))?;
    let (k3t, k3w, _) = rhs(&moved(curve, &k2t, &k2w, 0.5 * dt))?;
    let (k4t, k4w, _) = rhs(&moved(curve, &k3t, &k3w, dt))?;
    let combine = |k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..k1.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect()
    };
    let dtheta = combine(&k1t, &k2t, &k3t, &k4t);
    let drate = combine(&k1w, &k2w, &k3w, &k4w);
    Ok((moved(curve, &dtheta, &drate, dt), limit))
}

/// Method-of-lines evolution to `t_end`, sampling every `sample_every` steps
/// and at the final step.
pub fn evolve(curve: &ContinuumCurve, dt: f64, t_end: f64, sample_every: usize) -> Result<ContinuumTrajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(WhipError::Invalid("dt and T must be positive".into()));
    }
    let every = sample_every.max(1);
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut traj = ContinuumTrajectory { times: vec![0.0], curves: vec![curve.clone()] };
    let mut current = curve.clone();
    for step in 1..=steps {
        current = evolve_step(&current, dt)?.0;
        let t = step as f64 * dt;
        if !current.is_finite() {
            return Err(WhipError::NonFinite { time: t });
        }
        if step % every == 0 || step == steps {
            traj.times.push(t);
            traj.curves.push(current.clone());
        }
    }
    Ok(traj)
}

/// Green-function curvature quadratures at one curve.
#[derive(Debug, Clone)]
pub struct ContinuumCurvature {
    table: GreenTable,
    weights: Vec<f64>,
}

impl ContinuumCurvature {
    pub fn new(curve: &ContinuumCurve) -> Result<Self> {
        Self::from_kappa(&curve.kappa())
    }

    pub fn from_kappa(kappa: &[f64]) -> Result<Self> {
        let table = green_table(kappa)?;
        let weights = trapezoid_weights(table.m);
        Ok(ContinuumCurvature { table, weights })
    }

    pub fn table(&self) -> &GreenTable {
        &self.table
    }

    fn check_field(&self, f: &[Vec2]) -> Result<()> {
        check_len(self.table.m + 1, f.len())
    }

    /// `½ ∬ G(s,q) Σ_{i,j} (X'_i(s) Y'_j(q) - X'_j(q) Y'_i(s))² ds dq`.
    pub fn curvature(&self, xp: &[Vec2], yp: &[Vec2]) -> Result<f64> {
        self.check_field(xp)?;
        self.check_field(yp)?;
        let n = self.table.m + 1;
        let total: f64 = (0..n)
            .into_par_iter()
            .map(|a| {
                let (xs, ys) = ([xp[a].x, xp[a].y], [yp[a].x, yp[a].y]);
                let mut row = 0.0;
                for b in 0..n {
                    let (xq, yq) = ([xp[b].x, xp[b].y], [yp[b].x, yp[b].y]);
                    let mut bracket = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            let d = xs[i] * yq[j] - xq[j] * ys[i];
                            bracket += d * d;
                        }
                    }
                    row += self.weights[b] * self.table.get(a, b) * bracket;
                }
                self.weights[a] * row
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        Ok(0.5 * total)
    }

    /// `∬ G(s,q) (|X'(q)|² ⟨Y'(s),W'(s)⟩ - ⟨X'(q),Y'(q)⟩ ⟨X'(s),W'(s)⟩) ds dq`.
    pub fn polarized(&self, xp: &[Vec2], yp: &[Vec2], wp: &[Vec2]) -> Result<f64> {
        self.check_field(xp)?;
        self.check_field(yp)?;
        self.check_field(wp)?;
        let n = self.table.m + 1;
        let mut total = 0.0;
        for a in 0..n {
            let yw = yp[a].dot(wp[a]);
            let xw = xp[a].dot(wp[a]);
            let mut row = 0.0;
            for b in 0..n {
                let integrand = xp[b].norm_sq() * yw - xp[b].dot(yp[b]) * xw;
                row += self.weights[b] * self.table.get(a, b) * integrand;
            }
            total += self.weights[a] * row;
        }
        Ok(total)
    }
}

pub fn continuum_curvature(curve: &ContinuumCurve, xp: &[Vec2], yp: &[Vec2]) -> Result<f64> {
    ContinuumCurvature::new(curve)?.curvature(xp, yp)
}

pub fn polarized_curvature(curve: &ContinuumCurve, xp: &[Vec2], yp: &[Vec2], wp: &[Vec2]) -> Result<f64> {
    ContinuumCurvature::new(curve)?.polarized(xp, yp, wp)
}

/// `max_q |G(q,q) - ∫ (G_s² + κ² G²) ds|` with nodal derivatives and the
/// trapezoid rule. The jump of `G_s` at `s = q` limits this to first order.
pub fn green_identity_check(kappa: &[f64]) -> Result<f64> {
    let table = green_table(kappa)?;
    let m = table.m;
    let mut worst: f64 = 0.0;
    for k in 0..m {
        let col: Vec<f64> = (0..=m).map(|j| table.get(j, k)).collect();
        let gs = derivative(&col);
        let integrand: Vec<f64> = (0..=m)
            .map(|j| gs[j] * gs[j] + kappa[j] * kappa[j] * col[j] * col[j])
            .collect();
        worst = worst.max((col[k] - trapezoid(&integrand)).abs());
    }
    Ok(worst)
}
