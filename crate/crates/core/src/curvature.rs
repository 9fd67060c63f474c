//! Second fundamental form and sectional curvature of the configuration
//! torus `(S¹)ⁿ ⊂ ℝ²ⁿ` under the kinetic-energy metric.
//!
//! A tangent vector is described by its normal components `η_k`:
//! `u_k - u_{k-1} = (1/n) η_k (-sin θ_k, cos θ_k)`, `u_0 = 0`.

use serde::{Deserialize, Serialize};

use crate::chain::{reconstruct, ChainState, Vec2};
use crate::error::{check_len, Result, WhipError};
use crate::tension::{closed_form_inverse, DenseMatrix, TridiagonalOperator};

/// Smallest Gram determinant accepted for a section.
pub const MIN_GRAM: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TangentVector {
    pub eta: Vec<f64>,
}

impl TangentVector {
    pub fn new(eta: Vec<f64>) -> Self {
        TangentVector { eta }
    }

    pub fn zeros(n: usize) -> Self {
        TangentVector { eta: vec![0.0; n] }
    }

    /// The `k`-th coordinate vector (0-based slot).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut eta = vec![0.0; n];
        eta[k] = 1.0;
        TangentVector { eta }
    }

    pub fn scaled(&self, c: f64) -> Self {
        TangentVector { eta: self.eta.iter().map(|v| c * v).collect() }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

fn check(state: &ChainState, tv: &TangentVector) -> Result<()> {
    check_len(state.n(), tv.len())?;
    if tv.eta.iter().any(|v| !v.is_finite()) {
        return Err(WhipError::Invalid("tangent components must be finite".into()));
    }
    Ok(())
}

/// Ambient vectors `u_1..u_n` (the fixed `u_0 = 0` is omitted).
pub fn ambient_lift(state: &ChainState, tv: &TangentVector) -> Result<Vec<Vec2>> {
    check(state, tv)?;
    let h = state.link_length();
    let mut u = Vec2::ZERO;
    Ok(state
        .theta()
        .iter()
        .zip(&tv.eta)
        .map(|(&th, &e)| {
            u += (h * e) * Vec2::unit_normal(th);
            u
        })
        .collect())
}

pub fn metric_inner(state: &ChainState, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    let lu = ambient_lift(state, u)?;
    let lv = ambient_lift(state, v)?;
    Ok(lu.iter().zip(&lv).map(|(a, b)| a.dot(*b)).sum())
}

/// Precomputed `M⁻¹` for repeated curvature queries at one configuration.
#[derive(Debug, Clone)]
pub struct CurvatureContext {
    state: ChainState,
    inverse: DenseMatrix,
    positions: Vec<Vec2>,
}

impl CurvatureContext {
    pub fn new(state: &ChainState) -> Result<Self> {
        let inverse = closed_form_inverse(&TridiagonalOperator::from_angles(state.theta()))?;
        Ok(CurvatureContext {
            state: state.clone(),
            inverse,
            positions: reconstruct(state).positions,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn inverse(&self) -> &DenseMatrix {
        &self.inverse
    }

    /// `λ(u,v)_i = Σ_j M^{ij} η_j ξ_j`.
    pub fn second_fundamental_form(&self, u: &TangentVector, v: &TangentVector) -> Result<Vec<f64>> {
        check(&self.state, u)?;
        check(&self.state, v)?;
        let w: Vec<f64> = u.eta.iter().zip(&v.eta).map(|(a, b)| a * b).collect();
        self.inverse.mul_vec(&w)
    }

    /// `B_k = λ_{k+1}(x_{k+1} - x_k) + λ_k(x_{k-1} - x_k)` for `k = 1..n`.
    pub fn ambient_form(&self, u: &TangentVector, v: &TangentVector) -> Result<Vec<Vec2>> {
        let lam = self.second_fundamental_form(u, v)?;
        let x = &self.positions;
        let n = self.state.n();
        Ok((1..=n)
            .map(|k| {
                let ahead = if k < n { lam[k] * (x[k + 1] - x[k]) } else { Vec2::ZERO };
                ahead + lam[k - 1] * (x[k - 1] - x[k])
            })
            .collect())
    }

    /// `(1/2n²) Σ_{i,j} M^{ij} (η_i ξ_j - η_j ξ_i)²`.
    pub fn curvature_numerator(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        check(&self.state, u)?;
        check(&self.state, v)?;
        let n = self.state.n();
        let (eta, xi) = (&u.eta, &v.eta);
        let mut sum = 0.0;
        for i in 0..n {
            // the bracket vanishes on the diagonal and is symmetric in (i, j)
            for j in i + 1..n {
                let w = eta[i] * xi[j] - eta[j] * xi[i];
                sum += self.inverse.get(i, j) * w * w;
            }
        }
        Ok(sum / (n * n) as f64)
    }

    /// `⟨B(u,u), B(v,v)⟩ - |B(u,v)|²` from the ambient vectors.
    pub fn gauss_codazzi(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        let buu = self.ambient_form(u, u)?;
        let bvv = self.ambient_form(v, v)?;
        let buv = self.ambient_form(u, v)?;
        let cross: f64 = buu.iter().zip(&bvv).map(|(a, b)| a.dot(*b)).sum();
        let mixed: f64 = buv.iter().map(|b| b.norm_sq()).sum();
        Ok(cross - mixed)
    }

    pub fn sectional_curvature(&self, u: &TangentVector, v: &TangentVector) -> Result<Section> {
        let numerator = self.curvature_numerator(u, v)?;
        let uu = metric_inner(&self.state, u, u)?;
        let vv = metric_inner(&self.state, v, v)?;
        let uv = metric_inner(&self.state, u, v)?;
        let denominator = uu * vv - uv * uv;
        if !(denominator > MIN_GRAM) {
            return Err(WhipError::DegeneratePlane { denominator });
        }
        Ok(Section { numerator, denominator, curvature: numerator / denominator })
    }

    /// Coordinate pair `(p, q)` (1-based) spanning a section of negative
    /// curvature, if any exists.
    pub fn find_negative_section(&self) -> Option<(usize, usize)> {
        let n = self.state.n();
        (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .find(|&(p, q)| self.inverse.get(p, q) < 0.0)
            .map(|(p, q)| (p + 1, q + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Section {
    pub numerator: f64,
    pub denominator: f64,
    pub curvature: f64,
}

pub fn second_fundamental_form(state: &ChainState, u: &TangentVector, v: &TangentVector) -> Result<Vec<f64>> {
    CurvatureContext::new(state)?.second_fundamental_form(u, v)
}

pub fn curvature_numerator(state: &ChainState, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    CurvatureContext::new(state)?.curvature_numerator(u, v)
}

pub fn gauss_codazzi_oracle(state: &ChainState, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    CurvatureContext::new(state)?.gauss_codazzi(u, v)
}

pub fn sectional_curvature(state: &ChainState, u: &TangentVector, v: &TangentVector) -> Result<Section> {
    CurvatureContext::new(state)?.sectional_curvature(u, v)
}
