//! Newton–Krylov solver for the isometric embedding of a nearly round metric.
//!
//! The image is `Y = ω̂ + f ω̂ + ∇α + J∇β` with `f` of degree `≤ L−1` and
//! `α, β` of degree `2..=L−1`; the omitted degree-one parts of `α` and `β`
//! are the translations and rotations. Cartesian components of `Y` are then
//! band-limited to `L`, so their derivatives on the grid are exact.

use crate::error::{Error, Result};
use crate::linalg::gmres;
use crate::sphere::legendre::lm_index;
use crate::sphere::tensor::{deformation_field, frame_parts, tensor_projections, tracefree_eigenvalue, DeformationField};
use crate::sphere::{HarmonicCoeffs, SphereGrid};
use crate::surface::Sym2;

#[derive(Debug, Clone)]
pub struct EmbeddingOptions {
    /// Largest accepted norm of the projected (Galerkin) mismatch. The nodal
    /// mismatch also contains the truncation of the target metric and is
    /// reported, not enforced.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Starting coefficient vector; the round sphere when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        EmbeddingOptions { tolerance: 1e-10, max_iterations: 30, initial: None }
    }
}

/// Converged normalized image.
#[derive(Debug, Clone)]
pub struct EmbeddingSolution {
    /// Unknown vector `(f, α, β)` in solver layout.
    pub coefficients: Vec<f64>,
    pub positions: [Vec<f64>; 3],
    pub iterations: usize,
    pub projected_residual: f64,
    pub metric_residual: f64,
}

/// Index bookkeeping between the flat unknown vector and the three expansions.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    lmax: usize,
    top: usize,
}

impl Layout {
    pub(crate) fn new(lmax: usize) -> Self {
        Layout { lmax, top: lmax - 1 }
    }

    fn scalar_len(&self) -> usize {
        (self.top + 1) * (self.top + 1)
    }

    fn vector_len(&self) -> usize {
        self.scalar_len() - 4
    }

    pub(crate) fn len(&self) -> usize {
        self.scalar_len() + 2 * self.vector_len()
    }

    pub(crate) fn split(&self, x: &[f64]) -> (HarmonicCoeffs, HarmonicCoeffs, HarmonicCoeffs) {
        let mut f = HarmonicCoeffs::zeros(self.lmax);
        let mut a = HarmonicCoeffs::zeros(self.lmax);
        let mut b = HarmonicCoeffs::zeros(self.lmax);
        let ns = self.scalar_len();
        let nv = self.vector_len();
        f.as_mut_slice()[..ns].copy_from_slice(&x[..ns]);
        a.as_mut_slice()[4..ns].copy_from_slice(&x[ns..ns + nv]);
        b.as_mut_slice()[4..ns].copy_from_slice(&x[ns + nv..]);
        (f, a, b)
    }

    fn join(&self, t: &HarmonicCoeffs, d: &HarmonicCoeffs, c: &HarmonicCoeffs) -> Vec<f64> {
        let ns = self.scalar_len();
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&t.as_slice()[..ns]);
        out.extend_from_slice(&d.as_slice()[4..ns]);
        out.extend_from_slice(&c.as_slice()[4..ns]);
        out
    }

    /// Inverse of the linearization at the round sphere.
    fn round_inverse(&self, r: &[f64]) -> Vec<f64> {
        let ns = self.scalar_len();
        let nv = self.vector_len();
        let mut out = vec![0.0; self.len()];
        for l in 0..=self.top {
            let lam = (l * (l + 1)) as f64;
            for m in -(l as i64)..=(l as i64) {
                let i = lm_index(l, m);
                if l < 2 {
                    out[i] = r[i] / 4.0;
                    continue;
                }
                let ev = tracefree_eigenvalue(l);
                let alpha = r[ns + i - 4] / ev;
                out[ns + i - 4] = alpha;
                out[ns + nv + i - 4] = r[ns + nv + i - 4] / ev;
                out[i] = (r[i] + 2.0 * lam * alpha) / 4.0;
            }
        }
        out
    }
}

/// Image `ω̂ + δY` with its derivatives.
fn image(grid: &SphereGrid, layout: &Layout, x: &[f64]) -> DeformationField {
    let (f, a, b) = layout.split(x);
    let mut y = deformation_field(grid, &f, &a, &b);
    for k in 0..grid.len() {
        let w = grid.unit_vector(k);
        let (et, ep) = grid.frame(k);
        let s = grid.sin_theta(grid.ring_of(k));
        for i in 0..3 {
            y.value[i][k] += w[i];
            y.dtheta[i][k] += et[i];
            y.dphi[i][k] += s * ep[i];
        }
    }
    y
}

fn dot_at(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3], k: usize) -> f64 {
    a[0][k] * b[0][k] + a[1][k] * b[1][k] + a[2][k] * b[2][k]
}

/// Frame parts of `target − (∂Y·∂Y)` at every node and the sup relative mismatch.
fn mismatch(grid: &SphereGrid, target: &[Sym2], y: &DeformationField) -> ([Vec<f64>; 3], f64) {
    let n = grid.len();
    let mut parts = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut worst = 0.0_f64;
    for k in 0..n {
        let e = [
            target[k][0] - dot_at(&y.dtheta, &y.dtheta, k),
            target[k][1] - dot_at(&y.dtheta, &y.dphi, k),
            target[k][2] - dot_at(&y.dphi, &y.dphi, k),
        ];
        let (t, u, v) = frame_parts(grid, k, e[0], e[1], e[2]);
        let (tt, ut, vt) = frame_parts(grid, k, target[k][0], target[k][1], target[k][2]);
        // Frobenius norms in the orthonormal frame.
        let en = (0.5 * (t * t + u * u + v * v)).sqrt();
        let tn = (0.5 * (tt * tt + ut * ut + vt * vt)).sqrt();
        worst = worst.max(en / tn);
        parts[0][k] = t;
        parts[1][k] = u;
        parts[2][k] = v;
    }
    (parts, worst)
}

fn project(grid: &SphereGrid, layout: &Layout, parts: &[Vec<f64>; 3]) -> Vec<f64> {
    let (t, d, c) = tensor_projections(grid, &parts[0], &parts[1], &parts[2]);
    layout.join(&t, &d, &c)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Embeds the metric `target` (chart components `(h_θθ, h_θφ, h_φφ)` per node,
/// normalized to unit area radius) in Euclidean space.
pub fn solve_embedding(grid: &SphereGrid, target: &[Sym2], options: &EmbeddingOptions) -> Result<EmbeddingSolution> {
    grid.check_len(target.len())?;
    let layout = Layout::new(grid.band_limit());
    let mut x = match &options.initial {
        Some(v) if v.len() == layout.len() => v.clone(),
        Some(v) => return Err(Error::GridMismatch { expected: layout.len(), got: v.len() }),
        None => vec![0.0; layout.len()],
    };
    let mut y = image(grid, &layout, &x);
    let (parts, mut metric_residual) = mismatch(grid, target, &y);
    let mut r = project(grid, &layout, &parts);
    let mut rnorm = norm(&r);
    let mut iterations = 0;
    while rnorm > 1e-13 && iterations < options.max_iterations {
        iterations += 1;
        let yc = y.clone();
        let apply = |v: &[f64]| {
            let (f, a, b) = layout.split(v);
            let d = deformation_field(grid, &f, &a, &b);
            let n = grid.len();
            let mut lin = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            for k in 0..n {
                let htt = 2.0 * dot_at(&yc.dtheta, &d.dtheta, k);
                let htp = dot_at(&yc.dtheta, &d.dphi, k) + dot_at(&d.dtheta, &yc.dphi, k);
                let hpp = 2.0 * dot_at(&yc.dphi, &d.dphi, k);
                let (t, u, w) = frame_parts(grid, k, htt, htp, hpp);
                lin[0][k] = t;
                lin[1][k] = u;
                lin[2][k] = w;
            }
            project(grid, &layout, &lin)
        };
        let (step, _) = gmres(apply, |v| layout.round_inverse(v), &r, 1e-11, 60, 600);
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 1024.0 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            let yt = image(grid, &layout, &trial);
            let (pt, mt) = mismatch(grid, target, &yt);
            let rt = project(grid, &layout, &pt);
            let nt = norm(&rt);
            if nt < rnorm {
                x = trial;
                y = yt;
                r = rt;
                rnorm = nt;
                metric_residual = mt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(rnorm <= options.tolerance) {
        return Err(Error::NoConvergence { stage: "solve_embedding", iterations, residual: rnorm });
    }
    star_shaped(grid, &y)?;
    Ok(EmbeddingSolution {
        coefficients: x,
        positions: y.value,
        iterations,
        projected_residual: rnorm,
        metric_residual,
    })
}

/// Rejects images whose support function about the centroid changes sign.
fn star_shaped(grid: &SphereGrid, y: &DeformationField) -> Result<()> {
    let w = grid.weights();
    let total: f64 = w.iter().sum();
    let c: Vec<f64> = (0..3).map(|i| y.value[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total).collect();
    for k in 0..grid.len() {
        let a = [y.dtheta[0][k], y.dtheta[1][k], y.dtheta[2][k]];
        let b = [y.dphi[0][k], y.dphi[1][k], y.dphi[2][k]];
        let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let s: f64 = (0..3).map(|i| (y.value[i][k] - c[i]) * n[i]).sum();
        if !(s > 0.0) {
            return Err(Error::SelfIntersection);
        }
    }
    Ok(())
}

/// Number of unknowns at band limit `lmax`.
pub fn unknown_count(lmax: usize) -> usize {
    Layout::new(lmax).len()
}
