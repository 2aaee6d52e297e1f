//! Conformal dilations of the round sphere and the center-of-mass gauge.
//!
//! For `b` in the open unit ball the dilation with fixed points `±b/|b|` is
//!
//! ```text
//! Phi_b(x) = ((1 - |b|^2) x + 2 (1 + x.b) b) / (1 + 2 x.b + |b|^2)
//! ```
//!
//! with `Phi_b^* g0 = e^{2 w_b} g0`, `e^{w_b} = (1 - |b|^2) / (1 + 2 x.b + |b|^2)`,
//! and `Phi_b^{-1} = Phi_{-b}`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::sphere::grid::SphereGrid;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn dilation(b: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let bb = dot(b, b);
    let xb = dot(x, b);
    let d = 1.0 + 2.0 * xb + bb;
    let k = 2.0 * (1.0 + xb);
    [
        ((1.0 - bb) * x[0] + k * b[0]) / d,
        ((1.0 - bb) * x[1] + k * b[1]) / d,
        ((1.0 - bb) * x[2] + k * b[2]) / d,
    ]
}

/// Log conformal factor `w_b(x)`.
pub fn log_conformal_factor(b: [f64; 3], x: [f64; 3]) -> f64 {
    let bb = dot(b, b);
    ((1.0 - bb) / (1.0 + 2.0 * dot(x, b) + bb)).ln()
}

fn check_ball(b: [f64; 3]) -> Result<()> {
    let nb = dot(b, b).sqrt();
    if !(nb < 1.0) {
        return Err(Error::MobiusOutsideBall(nb));
    }
    Ok(())
}

/// Pull back a grid field by `Phi_b`. Returns `(f o Phi_b, e^{2 w_b})` on the nodes.
pub fn apply_mobius(grid: &SphereGrid, f: &[f64], b: [f64; 3]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_ball(b)?;
    let coeffs = grid.analyze(f)?;
    let mut pulled = Vec::with_capacity(grid.len());
    let mut factor = Vec::with_capacity(grid.len());
    for n in 0..grid.len() {
        let x = grid.unit_vector(n);
        pulled.push(coeffs.evaluate_at(dilation(b, x)));
        factor.push((2.0 * log_conformal_factor(b, x)).exp());
    }
    Ok((pulled, factor))
}

/// `u' = u o Phi_b + w_b`, the conformal factor of the pulled-back metric.
pub fn pull_back_conformal_factor(grid: &SphereGrid, u: &[f64], b: [f64; 3]) -> Result<Vec<f64>> {
    check_ball(b)?;
    let coeffs = grid.analyze(u)?;
    Ok((0..grid.len())
        .map(|n| {
            let x = grid.unit_vector(n);
            coeffs.evaluate_at(dilation(b, x)) + log_conformal_factor(b, x)
        })
        .collect())
}

/// First moments `∫ e^{2u} x_i dσ0`.
pub fn conformal_moments(grid: &SphereGrid, u: &[f64]) -> [f64; 3] {
    let mut m = [0.0; 3];
    for n in 0..grid.len() {
        let w = grid.weight(n) * (2.0 * u[n]).exp();
        let x = grid.unit_vector(n);
        for i in 0..3 {
            m[i] += w * x[i];
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct GaugeResult {
    pub u: Vec<f64>,
    pub b: [f64; 3],
    pub moments: [f64; 3],
    pub iterations: usize,
}

pub const GAUGE_TOLERANCE: f64 = 1e-10;
const GAUGE_MAX_ITERATIONS: usize = 50;

/// Finds `b` so that `u' = u o Phi_b + w_b` has vanishing first moments.
///
/// Damped Newton on the 3-vector `b` with a finite-difference Jacobian; the
/// step is halved until the moment norm decreases.
pub fn center_gauge(grid: &SphereGrid, u: &[f64]) -> Result<GaugeResult> {
    grid.check_len(u.len())?;
    let coeffs = grid.analyze(u)?;
    let nodes: Vec<[f64; 3]> = (0..grid.len()).map(|n| grid.unit_vector(n)).collect();
    let moments_at = |b: [f64; 3]| -> ([f64; 3], Vec<f64>) {
        let up: Vec<f64> = nodes
            .iter()
            .map(|&x| coeffs.evaluate_at(dilation(b, x)) + log_conformal_factor(b, x))
            .collect();
        (conformal_moments(grid, &up), up)
    };
    let norm = |m: [f64; 3]| dot(m, m).sqrt();

    let mut b = [0.0; 3];
    let (mut mom, mut up) = moments_at(b);
    let mut iterations = 0;
    while norm(mom) > GAUGE_TOLERANCE {
        if iterations >= GAUGE_MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                stage: "center_gauge",
                iterations,
                residual: norm(mom),
            });
        }
        iterations += 1;
        let h = 1e-6;
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let mut bp = b;
            let mut bm = b;
            bp[j] += h;
            bm[j] -= h;
            let (mp, _) = moments_at(bp);
            let (mm, _) = moments_at(bm);
            for i in 0..3 {
                jac[(i, j)] = (mp[i] - mm[i]) / (2.0 * h);
            }
        }
        let rhs = Vector3::new(-mom[0], -mom[1], -mom[2]);
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence {
            stage: "center_gauge",
            iterations,
            residual: norm(mom),
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = [b[0] + t * step[0], b[1] + t * step[1], b[2] + t * step[2]];
            if dot(cand, cand) < 1.0 {
                let (mc, uc) = moments_at(cand);
                if norm(mc) < norm(mom) {
                    b = cand;
                    mom = mc;
                    up = uc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                stage: "center_gauge",
                iterations,
                residual: norm(mom),
            });
        }
    }
    Ok(GaugeResult { u: up, b, moments: mom, iterations })
}
