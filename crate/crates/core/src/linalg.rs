//! Symmetric tridiagonal factorisation used by the grid solvers.

use crate::error::{check_len, Result, WhipError};

/// `A = L D Lᵀ` for a symmetric tridiagonal `A` with diagonal `diag` and
/// off-diagonal `off` (`off[i] = A[i][i+1]`).
#[derive(Debug, Clone)]
pub struct LdlTridiagonal {
    pivots: Vec<f64>,
    // multipliers l[i] = off[i] / pivots[i]
    lower: Vec<f64>,
}

impl LdlTridiagonal {
    pub fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(WhipError::Invalid("empty system".into()));
        }
        check_len(n - 1, off.len())?;
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n - 1);
        pivots.push(diag[0]);
        for i in 0..n - 1 {
            let p = pivots[i];
            if !(p.abs() > 1e-300) || !p.is_finite() {
                return Err(WhipError::SingularPivot { index: i, value: p });
            }
            let l = off[i] / p;
            lower.push(l);
            pivots.push(diag[i + 1] - l * off[i]);
        }
        let last = pivots[n - 1];
        if !(last.abs() > 1e-300) || !last.is_finite() {
            return Err(WhipError::SingularPivot { index: n - 1, value: last });
        }
        Ok(LdlTridiagonal { pivots, lower })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.len();
        check_len(n, x.len())?;
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        for (xi, p) in x.iter_mut().zip(&self.pivots) {
            *xi /= p;
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.lower[i] * x[i + 1];
        }
        Ok(())
    }
}
