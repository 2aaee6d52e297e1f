//! Vector fields and symmetric 2-tensors on the round sphere in spectral form.
//!
//! A deformation of the unit sphere is written `δY = f ω̂ + ∇α + J∇β` with `J`
//! the rotation by a right angle in the tangent plane. A symmetric tensor `E`
//! is described by its trace and by the gradient and curl parts of its
//! trace-free part, measured against trace-free Hessians of `Y_lm`.

use crate::sphere::harmonics::{HarmonicCoeffs, Radial};
use crate::sphere::SphereGrid;

/// Cartesian components of a vector field on the grid with their angular derivatives.
#[derive(Debug, Clone)]
pub struct DeformationField {
    pub value: [Vec<f64>; 3],
    pub dtheta: [Vec<f64>; 3],
    pub dphi: [Vec<f64>; 3],
}

/// Synthesizes `f ω̂ + ∇α + J∇β` and its first derivatives.
pub fn deformation_field(
    grid: &SphereGrid,
    f: &HarmonicCoeffs,
    alpha: &HarmonicCoeffs,
    beta: &HarmonicCoeffs,
) -> DeformationField {
    let n = grid.len();
    let fd = grid.derivatives(f);
    let ad = grid.derivatives(alpha);
    let bd = grid.derivatives(beta);
    let zero = || [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut out = DeformationField { value: zero(), dtheta: zero(), dphi: zero() };
    for k in 0..n {
        let ring = grid.ring_of(k);
        let (c, s) = (grid.cos_theta(ring), grid.sin_theta(ring));
        let w = grid.unit_vector(k);
        let (et, ep) = grid.frame(k);
        let p = ad.t[k] - bd.p[k] / s;
        let q = ad.p[k] / s + bd.t[k];
        let p_t = ad.tt[k] - bd.tp[k] / s + bd.p[k] * c / (s * s);
        let p_p = ad.tp[k] - bd.pp[k] / s;
        let q_t = ad.tp[k] / s - ad.p[k] * c / (s * s) + bd.tt[k];
        let q_p = ad.pp[k] / s + bd.tp[k];
        let fv = fd.f[k];
        for i in 0..3 {
            out.value[i][k] = fv * w[i] + p * et[i] + q * ep[i];
            out.dtheta[i][k] = fd.t[k] * w[i] + (fv + p_t) * et[i] - p * w[i] + q_t * ep[i];
            out.dphi[i][k] = (fd.p[k] - q * s) * w[i] + (p_p - q * c) * et[i] + (fv * s + p * c + q_p) * ep[i];
        }
    }
    out
}

/// Orthonormal-frame description of a symmetric tensor given in the
/// `(θ, φ)` chart: `(E11 + E22, E11 − E22, 2 E12)`.
pub fn frame_parts(grid: &SphereGrid, node: usize, e_tt: f64, e_tp: f64, e_pp: f64) -> (f64, f64, f64) {
    let s = grid.sin_theta(grid.ring_of(node));
    let e11 = e_tt;
    let e12 = e_tp / s;
    let e22 = e_pp / (s * s);
    (e11 + e22, e11 - e22, 2.0 * e12)
}

/// `c_lm = ∫ u H°11(Y_lm) + v H12(Y_lm)`, where `H°` is the trace-free Hessian
/// in the orthonormal `(θ̂, φ̂)` frame.
pub fn tracefree_projection(grid: &SphereGrid, u: &[f64], v: &[f64]) -> HarmonicCoeffs {
    let n = grid.len();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for k in 0..n {
        let ring = grid.ring_of(k);
        let (ct, st) = (grid.cos_theta(ring), grid.sin_theta(ring));
        a[k] = 0.5 * u[k];
        b[k] = -0.5 * u[k] / (st * st);
        c[k] = -0.5 * u[k] * ct / st;
        d[k] = v[k] / st;
        e[k] = -v[k] * ct / (st * st);
    }
    let mut out = grid.synth_adjoint(&a, Radial::Ddp, 0);
    for (field, radial, order) in [(&b, Radial::P, 2), (&c, Radial::Dp, 0), (&d, Radial::Dp, 1), (&e, Radial::P, 1)] {
        let part = grid.synth_adjoint(field, radial, order);
        for (o, p) in out.as_mut_slice().iter_mut().zip(part.as_slice()) {
            *o += p;
        }
    }
    out
}

/// Trace, gradient and curl projections of a symmetric tensor given by its
/// frame parts at every node.
pub fn tensor_projections(
    grid: &SphereGrid,
    trace: &[f64],
    diff: &[f64],
    off: &[f64],
) -> (HarmonicCoeffs, HarmonicCoeffs, HarmonicCoeffs) {
    let t = grid.synth_adjoint(trace, Radial::P, 0);
    let grad = tracefree_projection(grid, diff, off);
    let neg: Vec<f64> = diff.iter().map(|x| -x).collect();
    let curl = tracefree_projection(grid, off, &neg);
    (t, grad, curl)
}

/// `l(l+1)(l(l+1) − 2)`: the round-sphere eigenvalue of the gradient and curl blocks.
pub fn tracefree_eigenvalue(l: usize) -> f64 {
    let lam = (l * (l + 1)) as f64;
    lam * (lam - 2.0)
}
