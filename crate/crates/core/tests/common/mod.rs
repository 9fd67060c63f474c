//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use whipchain::{reconstruct, ChainState, Vec2};

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, p);
        let piv = m[col][col];
        assert!(piv.abs() > 1e-300, "singular matrix");
        for v in m[col].iter_mut() {
            *v /= piv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col {
                let f = row[col];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let inv = dense_inverse(a);
    inv.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum()).collect()
}

/// Tension matrix written out entry by entry from the angles.
pub fn tension_matrix(theta: &[f64]) -> Vec<Vec<f64>> {
    let n = theta.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = if i == 0 { 1.0 } else { 2.0 };
        if i + 1 < n {
            let a = (theta[i + 1] - theta[i]).cos();
            m[i][i + 1] = -a;
            m[i + 1][i] = -a;
        }
    }
    m
}

/// Multipliers from the Cartesian constraints: differentiating
/// `|x_i - x_{i-1}|² = 1/n²` twice with
/// `ẍ_i = -g e₂ + λ_{i+1}(x_{i+1}-x_i) + λ_i(x_{i-1}-x_i)` and `ẍ_0 = 0`
/// gives one linear equation per rod, solved densely here.
pub fn cartesian_tension(state: &ChainState) -> Vec<f64> {
    let n = state.n();
    let frame = reconstruct(state);
    let x = &frame.positions;
    let v = &frame.velocities;
    let d = |i: usize| x[i] - x[i - 1];
    // coefficient of λ_k in ẍ_i, as a vector
    let coeff = |i: usize, k: usize| -> Vec2 {
        if i == 0 {
            return Vec2::ZERO;
        }
        let mut c = Vec2::ZERO;
        if k == i + 1 && i < n {
            c += d(i + 1);
        }
        if k == i {
            c += -d(i);
        }
        c
    };
    let gvec = Vec2::new(0.0, -state.g());
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 1..=n {
        let di = d(i);
        for k in 1..=n {
            a[i - 1][k - 1] = (coeff(i, k) - coeff(i - 1, k)).dot(di);
        }
        let grav = if i == 1 { gvec.dot(di) } else { 0.0 };
        let dv = v[i] - v[i - 1];
        b[i - 1] = -dv.norm_sq() - grav;
    }
    dense_solve(&a, &b)
}

/// Complete elliptic integral `K(k) = ∫_0^{π/2} (1 - k² sin²ψ)^{-1/2} dψ`
/// by the trapezoid rule over a full period of the integrand, which
/// converges geometrically.
pub fn elliptic_k(k: f64) -> f64 {
    let m = 4096;
    let h = std::f64::consts::PI / m as f64;
    let sum: f64 = (0..m).map(|j| 1.0 / (1.0 - (k * (j as f64 * h).sin()).powi(2)).sqrt()).sum();
    0.5 * h * sum
}

/// `K(k)` via the arithmetic-geometric mean, as a second opinion.
pub fn elliptic_k_agm(k: f64) -> f64 {
    let (mut a, mut b) = (1.0, (1.0 - k * k).sqrt());
    for _ in 0..40 {
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        a = an;
        b = bn;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// `(1/2) ∬ (1 - max(s,q)) Σ_{i,j} (X'_i(s) Y'_j(q) - X'_j(q) Y'_i(s))²`
/// on an `r`-cell midpoint grid with the exact flat Green function.
pub fn flat_curvature_quadrature(xp: impl Fn(f64) -> Vec2, yp: impl Fn(f64) -> Vec2, r: usize) -> f64 {
    let h = 1.0 / r as f64;
    let pts: Vec<(f64, Vec2, Vec2)> = (0..r).map(|j| {
        let s = (j as f64 + 0.5) * h;
        (s, xp(s), yp(s))
    }).collect();
    let mut total = 0.0;
    for &(s, xs, ys) in &pts {
        for &(q, xq, yq) in &pts {
            let xs_ = [xs.x, xs.y];
            let ys_ = [ys.x, ys.y];
            let xq_ = [xq.x, xq.y];
            let yq_ = [yq.x, yq.y];
            let mut br = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let d = xs_[i] * yq_[j] - xq_[j] * ys_[i];
                    br += d * d;
                }
            }
            total += (1.0 - s.max(q)) * br;
        }
    }
    0.5 * total * h * h
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
