//! The tension (Lagrange multiplier) system of the chain.
//!
//! The constraint equations reduce to `M λ = r` with `M` symmetric
//! tridiagonal: unit first diagonal entry, `2` elsewhere, and off-diagonal
//! entries `-a_i` with `a_i = cos(θ_{i+1} - θ_i)`. Symmetric elimination
//! produces the pivots `b_1 = 1`, `b_{i+1} = 2 - a_i² / b_i`, which lie in
//! `[1, 2]` whenever `|a_i| <= 1`.

use serde::Serialize;

use crate::chain::ChainState;
use crate::error::{check_len, Result, WhipError};

/// Smallest pivot accepted by the elimination.
pub const MIN_PIVOT: f64 = 1e-14;

/// Tensions below this are reported as genuinely negative.
pub const NEGATIVE_TENSION_THRESHOLD: f64 = -1e-12;

/// The matrix `M`, stored by its couplings `a_i` (`off_i = -a_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    couplings: Vec<f64>,
}

impl TridiagonalOperator {
    /// Operator with `n = couplings.len() + 1`.
    pub fn from_couplings(couplings: Vec<f64>) -> Result<Self> {
        if couplings.iter().any(|a| !a.is_finite()) {
            return Err(WhipError::Invalid("couplings must be finite".into()));
        }
        Ok(TridiagonalOperator { couplings })
    }

    pub fn from_angles(theta: &[f64]) -> Self {
        let couplings = theta.windows(2).map(|w| (w[1] - w[0]).cos()).collect();
        TridiagonalOperator { couplings }
    }

    pub fn n(&self) -> usize {
        self.couplings.len() + 1
    }

    /// `a_1..a_{n-1}`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![2.0; self.n()];
        d[0] = 1.0;
        d
    }

    pub fn off(&self) -> Vec<f64> {
        self.couplings.iter().map(|a| -a).collect()
    }

    /// Row-major dense copy of `M`.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut m = DenseMatrix::zeros(n);
        for (i, d) in self.diag().into_iter().enumerate() {
            m.set(i, i, d);
        }
        for (i, &a) in self.couplings.iter().enumerate() {
            m.set(i, i + 1, -a);
            m.set(i + 1, i, -a);
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(n, x.len())?;
        let mut y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        y[0] = x[0];
        for (i, &a) in self.couplings.iter().enumerate() {
            y[i] -= a * x[i + 1];
            y[i + 1] -= a * x[i];
        }
        Ok(y)
    }

    /// Elimination pivots `b_1..b_n`.
    pub fn pivots(&self) -> Result<Vec<f64>> {
        let mut b = Vec::with_capacity(self.n());
        b.push(1.0);
        for (i, &a) in self.couplings.iter().enumerate() {
            let next = 2.0 - a * a / b[i];
            if !(next >= MIN_PIVOT) {
                return Err(WhipError::SingularPivot { index: i + 1, value: next });
            }
            b.push(next);
        }
        Ok(b)
    }
}

/// `(M, r)` with `r_i = ω_i² - n g sin(θ_1) [i = 1]`.
pub fn assemble(state: &ChainState) -> (TridiagonalOperator, Vec<f64>) {
    let op = TridiagonalOperator::from_angles(state.theta());
    let mut rhs: Vec<f64> = state.omega().iter().map(|w| w * w).collect();
    rhs[0] -= state.n() as f64 * state.g() * state.theta()[0].sin();
    (op, rhs)
}

/// Discrete tensions `λ_1..λ_n` (with `λ_{n+1} = 0` implied) and the pivots
/// used to compute them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensionVector {
    pub lambda: Vec<f64>,
    pub pivots: Vec<f64>,
}

impl TensionVector {
    /// `λ_i` with the 1-based convention `λ_0 = λ_{n+1} = 0`.
    pub fn at(&self, i: usize) -> f64 {
        if i == 0 || i > self.lambda.len() {
            0.0
        } else {
            self.lambda[i - 1]
        }
    }

    pub fn min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Forward elimination with the `b` recurrence, then back substitution.
pub fn solve_tension(op: &TridiagonalOperator, rhs: &[f64]) -> Result<TensionVector> {
    let n = op.n();
    check_len(n, rhs.len())?;
    let b = op.pivots()?;
    let a = op.couplings();
    let mut y = rhs.to_vec();
    for i in 0..n - 1 {
        y[i + 1] += a[i] / b[i] * y[i];
    }
    let mut lambda = y;
    lambda[n - 1] /= b[n - 1];
    for i in (0..n - 1).rev() {
        lambda[i] = (lambda[i] + a[i] * lambda[i + 1]) / b[i];
    }
    Ok(TensionVector { lambda, pivots: b })
}

pub fn tension(state: &ChainState) -> Result<TensionVector> {
    let (op, rhs) = assemble(state);
    solve_tension(&op, &rhs)
}

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            check_len(n, r.len())?;
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-based access.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.n, other.n)?;
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `M⁻¹` from the pivots:
/// `M^{ij} = Σ_{m=max(i,j)}^{n} (1/b_m) Π_{k=i}^{m-1}(a_k/b_k) Π_{l=j}^{m-1}(a_l/b_l)`.
///
/// With `P(i,m) = Π_{k=i}^{m-1} a_k/b_k` one has `P(i,m) = P(i,j) P(j,m)` for
/// `i <= j <= m`, so for `i <= j` the sum collapses to `P(i,j) M^{jj}` and the
/// diagonal obeys `M^{jj} = 1/b_j + (a_j/b_j)² M^{j+1,j+1}`.
pub fn closed_form_inverse(op: &TridiagonalOperator) -> Result<DenseMatrix> {
    let n = op.n();
    let b = op.pivots()?;
    let ratio: Vec<f64> = op.couplings().iter().zip(&b).map(|(a, b)| a / b).collect();

    let mut diag = vec![0.0; n];
    diag[n - 1] = 1.0 / b[n - 1];
    for j in (0..n - 1).rev() {
        diag[j] = 1.0 / b[j] + ratio[j] * ratio[j] * diag[j + 1];
    }

    let mut inv = DenseMatrix::zeros(n);
    for i in 0..n {
        let mut p = 1.0;
        for j in i..n {
            if j > i {
                p *= ratio[j - 1];
            }
            let v = p * diag[j];
            inv.set(i, j, v);
            inv.set(j, i, v);
        }
    }
    Ok(inv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeTension {
    /// 1-based link index of the negative tension.
    pub i: usize,
    /// 1-based index of the unit velocity `ω = e_j`.
    pub j: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignProbeReport {
    pub n: usize,
    pub g: f64,
    pub threshold: f64,
    pub negatives: Vec<NegativeTension>,
    pub min_probe_tension: f64,
    /// Tension at rest, present when `g > 0`.
    pub rest_tension: Option<Vec<f64>>,
    /// 1-based links with negative rest tension.
    pub rest_negative: Vec<usize>,
}

impl SignProbeReport {
    pub fn all_nonnegative(&self) -> bool {
        self.negatives.is_empty() && self.rest_negative.is_empty()
    }
}

/// Solves the tension for every unit velocity `ω = e_j` (gravity as given)
/// and collects the negative entries. The state's own `ω` is ignored.
pub fn tension_sign_probe(state: &ChainState) -> Result<SignProbeReport> {
    let n = state.n();
    let (op, _) = assemble(state);
    let gravity_term = n as f64 * state.g() * state.theta()[0].sin();
    let mut negatives = Vec::new();
    let mut min_probe_tension = f64::INFINITY;
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        rhs.iter_mut().for_each(|r| *r = 0.0);
        rhs[j] = 1.0;
        rhs[0] -= gravity_term;
        let t = solve_tension(&op, &rhs)?;
        for (i, &l) in t.lambda.iter().enumerate() {
            min_probe_tension = min_probe_tension.min(l);
            if l < NEGATIVE_TENSION_THRESHOLD {
                negatives.push(NegativeTension { i: i + 1, j: j + 1, lambda: l });
            }
        }
    }
    let (rest_tension, rest_negative) = if state.g() > 0.0 {
        rhs.iter_mut().for_each(|r| *r = 0.0);
        rhs[0] = -gravity_term;
        let t = solve_tension(&op, &rhs)?;
        let neg = t
            .lambda
            .iter()
            .enumerate()
            .filter(|(_, &l)| l < NEGATIVE_TENSION_THRESHOLD)
            .map(|(i, _)| i + 1)
            .collect();
        (Some(t.lambda), neg)
    } else {
        (None, Vec::new())
    };
    Ok(SignProbeReport {
        n,
        g: state.g(),
        threshold: NEGATIVE_TENSION_THRESHOLD,
        negatives,
        min_probe_tension,
        rest_tension,
        rest_negative,
    })
}
