use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::legendre::lm_of_index;
use crate::sphere::{center_gauge, HarmonicCoeffs, SphereGrid};

/// Default perturbative threshold on `sup |K − 1|`.
pub const DEFAULT_CURVATURE_THRESHOLD: f64 = 0.5;

const MAX_NEWTON: usize = 30;
const PDE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct UniformizationDiagnostics {
    /// `|u₀|`, the mean part.
    pub mean: f64,
    /// Coefficients `a_i` of `u₁ = a·x`.
    pub first_moments: [f64; 3],
    /// `‖u₂‖_{L²}`, the part of degree two and higher.
    pub higher_norm: f64,
    /// `‖u‖_{L²}`.
    pub l2_norm: f64,
    /// `sup |K − 1|`.
    pub curvature_deviation: f64,
    /// Sup-norm of `Δu + K e^{2u} − 1` at the nodes; includes the part of
    /// `K e^{2u}` above the band limit.
    pub pde_residual: f64,
    /// Norm of the projected equations at the solution.
    pub galerkin_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Uniformization {
    /// Conformal factor after the Möbius gauge: `∫ e^{2u} x_i = 0`.
    pub u: Vec<f64>,
    /// Galerkin solution before gauge fixing.
    pub raw: HarmonicCoeffs,
    pub gauge: [f64; 3],
    pub diagnostics: UniformizationDiagnostics,
}

fn pde_residual(grid: &SphereGrid, k: &[f64], a: &HarmonicCoeffs) -> Vec<f64> {
    let lap = grid.synthesize(&a.laplace_beltrami());
    let u = grid.synthesize(a);
    (0..grid.len()).map(|n| lap[n] + k[n] * (2.0 * u[n]).exp() - 1.0).collect()
}

/// Solves `Δu + K e^{2u} = 1` on the unit sphere for the nodal curvature `k`.
pub fn uniformize(grid: &SphereGrid, k: &[f64], threshold: f64) -> Result<Uniformization> {
    grid.check_len(k.len())?;
    let deviation = k.iter().fold(0.0_f64, |a, v| a.max((v - 1.0).abs()));
    if !(deviation <= threshold) {
        return Err(Error::RegimeViolation { deviation, threshold });
    }
    let nc = grid.n_coeffs();
    let lmax = grid.band_limit();
    let nn = grid.len();
    let weights = grid.weights();
    // Basis functions at the nodes, one column per coefficient.
    let mut basis = DMatrix::<f64>::zeros(nn, nc);
    for idx in 0..nc {
        let mut e = HarmonicCoeffs::zeros(lmax);
        e.as_mut_slice()[idx] = 1.0;
        basis.set_column(idx, &DVector::from_vec(grid.synthesize(&e)));
    }
    let eig: Vec<f64> = (0..nc)
        .map(|i| {
            let l = lm_of_index(i).0 as f64;
            l * (l + 1.0)
        })
        .collect();

    let mut a = HarmonicCoeffs::zeros(lmax);
    let mut iterations = 0;
    let mut galerkin_residual = 0.0;
    // The degree-one block is singular at the round sphere: solve the
    // complement first, then correct all degrees together.
    let restricted: Vec<usize> = (0..nc).filter(|&i| lm_of_index(i).0 != 1).collect();
    let full: Vec<usize> = (0..nc).collect();
    for active in [&restricted, &full] {
        let na = active.len();
        let galerkin = |a: &HarmonicCoeffs| -> (DVector<f64>, Vec<f64>) {
            let u = grid.synthesize(a);
            let src: Vec<f64> = (0..nn).map(|n| k[n] * (2.0 * u[n]).exp() - 1.0).collect();
            let proj = grid.analyze(&src).expect("grid-sized field");
            let f = DVector::from_fn(na, |j, _| -eig[active[j]] * a.as_slice()[active[j]] + proj.as_slice()[active[j]]);
            (f, u)
        };
        let (mut f, mut u) = galerkin(&a);
        let mut fnorm = f.norm();
        let mut local = 0;
        while fnorm > 1e-13 && local < MAX_NEWTON {
            local += 1;
            let scale = DVector::from_fn(nn, |n, _| weights[n] * 2.0 * k[n] * (2.0 * u[n]).exp());
            let sub = basis.select_columns(active.iter());
            let mut weighted = sub.clone();
            for (n, mut row) in weighted.row_iter_mut().enumerate() {
                row *= scale[n];
            }
            let mut jac = sub.transpose() * weighted;
            for j in 0..na {
                jac[(j, j)] -= eig[active[j]];
            }
            let Some(step) = jac.lu().solve(&(-&f)) else { break };
            let mut t = 1.0;
            let mut accepted = false;
            while t >= 1e-4 {
                let mut trial = a.clone();
                for (j, &idx) in active.iter().enumerate() {
                    trial.as_mut_slice()[idx] += t * step[j];
                }
                let (ft, ut) = galerkin(&trial);
                if ft.norm() < fnorm {
                    a = trial;
                    f = ft;
                    u = ut;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            fnorm = f.norm();
        }
        iterations += local;
        galerkin_residual = fnorm;
    }
    let u = grid.synthesize(&a);
    if !(galerkin_residual <= PDE_TOLERANCE) {
        return Err(Error::NoConvergence { stage: "uniformize", iterations, residual: galerkin_residual });
    }
    let residual = pde_residual(grid, k, &a).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let gauged = center_gauge(grid, &u)?;
    let c = grid.analyze(&gauged.u)?;
    let s = c.as_slice();
    let mut first_moments = [0.0; 3];
    for (i, m) in first_moments.iter_mut().enumerate() {
        let ux: Vec<f64> = (0..nn).map(|n| gauged.u[n] * grid.unit_vector(n)[i]).collect();
        *m = 3.0 / (4.0 * std::f64::consts::PI) * grid.integrate(&ux);
    }
    let higher_norm = s[4..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let diagnostics = UniformizationDiagnostics {
        mean: s[0] / (4.0 * std::f64::consts::PI).sqrt(),
        first_moments,
        higher_norm,
        l2_norm: c.l2_norm(),
        curvature_deviation: deviation,
        pde_residual: residual,
        galerkin_residual,
        iterations,
    };
    Ok(Uniformization { u: gauged.u, raw: a, gauge: gauged.b, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manufactured(grid: &SphereGrid, a: &HarmonicCoeffs) -> Vec<f64> {
        let u = grid.synthesize(a);
        let lap = grid.synthesize(&a.laplace_beltrami());
        (0..grid.len()).map(|n| (1.0 - lap[n]) * (-2.0 * u[n]).exp()).collect()
    }

    #[test]
    fn unit_curvature_gives_zero() {
        let g = SphereGrid::new(12).unwrap();
        let res = uniformize(&g, &vec![1.0; g.len()], 0.5).unwrap();
        assert!(res.u.iter().all(|v| v.abs() < 1e-13));
        assert_eq!(res.diagnostics.iterations, 0);
    }

    #[test]
    fn regime_violation_is_reported() {
        let g = SphereGrid::new(8).unwrap();
        assert!(matches!(uniformize(&g, &vec![1.7; g.len()], 0.5), Err(Error::RegimeViolation { .. })));
    }

    #[test]
    fn recovers_manufactured_solution() {
        for lmax in [16, 24] {
            let g = SphereGrid::new(lmax).unwrap();
            let mut a = HarmonicCoeffs::zeros(lmax);
            a.set(0, 0, 0.05);
            a.set(1, 1, 0.02);
            a.set(2, 0, 0.06);
            a.set(3, -2, 0.03);
            a.set(4, 3, -0.02);
            let k = manufactured(&g, &a);
            let res = uniformize(&g, &k, 0.5).unwrap();
            assert!(res.diagnostics.pde_residual <= 1e-10);
            let target = center_gauge(&g, &g.synthesize(&a)).unwrap();
            let err = res.u.iter().zip(&target.u).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err <= 1e-8, "L={lmax} err={err:e}");
        }
    }
}
