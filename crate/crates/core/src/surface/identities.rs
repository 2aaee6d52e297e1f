//! Residuals of exact and asymptotic identities relating the Euclidean and
//! curved-ambient geometry of a surface.
//!
//! Throughout, `n̂` is the outward Euclidean unit normal, used as the gradient
//! of the Euclidean distance `ρ` on the surface, and `D_ij = ∂²ρ/∂x^i∂x^j`
//! on the surface is the Euclidean shape operator extended by zero in the
//! normal direction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{christoffel, AfMetric, Mat3};
use crate::surface::forms::{fundamental_forms, Ambient, FundamentalData, Sym2};
use crate::surface::immersion::Immersion;

/// Euclidean distance Hessian on the surface at a node.
pub fn distance_hessian(hat: &FundamentalData, node: usize) -> Mat3 {
    hat.lift(node, hat.second_form[node])
}

/// Coefficients (w.r.t. `d_theta y, d_phi y`) of a Euclidean orthonormal tangent frame.
fn orthonormal_coefficients(h: Sym2) -> [[f64; 2]; 2] {
    let n1 = h[0].sqrt();
    let n2 = (h[2] - h[1] * h[1] / h[0]).sqrt();
    [[1.0 / n1, 0.0], [-h[1] / h[0] / n2, 1.0 / n2]]
}

fn bilinear(t: Sym2, x: [f64; 2], y: [f64; 2]) -> f64 {
    t[0] * x[0] * y[0] + t[1] * (x[0] * y[1] + x[1] * y[0]) + t[2] * x[1] * y[1]
}

fn hat_and_curved(s: &Immersion, metric: &AfMetric) -> Result<(FundamentalData, FundamentalData)> {
    Ok((fundamental_forms(s, Ambient::Euclidean)?, fundamental_forms(s, Ambient::Af(*metric))?))
}

/// `sup |Â(X,Y) − |∇_g ρ| A(X,Y) − X^i Y^j Γ^k_ij ∂_k ρ|` over nodes and
/// Euclidean-orthonormal tangent frame pairs.
pub fn lemma23_residual(s: &Immersion, metric: &AfMetric) -> Result<f64> {
    let (hat, fd) = hat_and_curved(s, metric)?;
    Ok(second_form_relation_from(&hat, &fd, metric))
}

pub(crate) fn second_form_relation_from(hat: &FundamentalData, fd: &FundamentalData, metric: &AfMetric) -> f64 {
    let mut worst = 0.0_f64;
    for n in 0..hat.len() {
        let gamma = christoffel(&metric.jet_unchecked(hat.positions[n]));
        let coef = orthonormal_coefficients(hat.induced[n]);
        let e = hat.tangents[n];
        let vec = |c: [f64; 2]| [0, 1, 2].map(|i| c[0] * e[0][i] + c[1] * e[1][i]);
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let (x, y) = (vec(coef[a]), vec(coef[b]));
            let mut gterm = 0.0;
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        gterm += x[i] * y[j] * gamma[k][i][j] * hat.euclidean_normal[n][k];
                    }
                }
            }
            let lhs = bilinear(hat.second_form[n], coef[a], coef[b]);
            let rhs = fd.distance_gradient[n] * bilinear(fd.second_form[n], coef[a], coef[b]) + gterm;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistanceHessianReport {
    /// `sup |D − B − (Ĥ/2) P|` with `P` the Euclidean tangential projector.
    pub algebraic: f64,
    /// `sup r |D − D_fd|` at sample nodes, where `D_fd` is a finite-difference
    /// Hessian of the true signed distance. Only available for radial immersions.
    pub spot_check: Option<f64>,
}

pub fn lemma24_residual(s: &Immersion) -> Result<DistanceHessianReport> {
    let hat = fundamental_forms(s, Ambient::Euclidean)?;
    let mut algebraic = 0.0_f64;
    for n in 0..hat.len() {
        let d = distance_hessian(&hat, n);
        let b = hat.lift(n, hat.traceless[n]);
        let nh = hat.euclidean_normal[n];
        let h = hat.mean_curvature[n];
        for i in 0..3 {
            for j in 0..3 {
                let p = if i == j { 1.0 } else { 0.0 } - nh[i] * nh[j];
                algebraic = algebraic.max((d[i][j] - b[i][j] - 0.5 * h * p).abs());
            }
        }
    }
    let spot_check = match s.radial() {
        Some(_) => Some(distance_spot_check(s, &hat)?),
        None => None,
    };
    Ok(DistanceHessianReport { algebraic, spot_check })
}

/// Signed Euclidean distance from `x` to a radial immersion, by Newton
/// iteration for the foot point starting from `(theta, phi)`.
fn signed_distance(
    coeffs: &crate::sphere::HarmonicCoeffs,
    center: [f64; 3],
    x: [f64; 3],
    start: (f64, f64),
) -> Result<f64> {
    let (mut th, mut ph) = start;
    let surface = |th: f64, ph: f64| {
        let r = coeffs.evaluate_derivatives(th, ph);
        let (ct, st, cp, sp) = (th.cos(), th.sin(), ph.cos(), ph.sin());
        let w = [st * cp, st * sp, ct];
        let wt = [ct * cp, ct * sp, -st];
        let wp = [-st * sp, st * cp, 0.0];
        let wtt = [-w[0], -w[1], -w[2]];
        let wtp = [-ct * sp, ct * cp, 0.0];
        let wpp = [-st * cp, -st * sp, 0.0];
        let mut y = [[0.0; 3]; 6];
        for i in 0..3 {
            y[0][i] = center[i] + r[0] * w[i];
            y[1][i] = r[1] * w[i] + r[0] * wt[i];
            y[2][i] = r[2] * w[i] + r[0] * wp[i];
            y[3][i] = r[3] * w[i] + 2.0 * r[1] * wt[i] + r[0] * wtt[i];
            y[4][i] = r[4] * w[i] + r[1] * wp[i] + r[2] * wt[i] + r[0] * wtp[i];
            y[5][i] = r[5] * w[i] + 2.0 * r[2] * wp[i] + r[0] * wpp[i];
        }
        y
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    for _ in 0..50 {
        let y = surface(th, ph);
        let d = [x[0] - y[0][0], x[1] - y[0][1], x[2] - y[0][2]];
        let g = [-dot(d, y[1]), -dot(d, y[2])];
        let h = [
            dot(y[1], y[1]) - dot(d, y[3]),
            dot(y[1], y[2]) - dot(d, y[4]),
            dot(y[2], y[2]) - dot(d, y[5]),
        ];
        let det = h[0] * h[2] - h[1] * h[1];
        let st = (h[2] * g[0] - h[1] * g[1]) / det;
        let sp = (h[0] * g[1] - h[1] * g[0]) / det;
        th -= st;
        ph -= sp;
        if st.abs() + sp.abs() < 1e-15 {
            break;
        }
    }
    let y = surface(th, ph);
    let d = [x[0] - y[0][0], x[1] - y[0][1], x[2] - y[0][2]];
    let nrm = [
        y[1][1] * y[2][2] - y[1][2] * y[2][1],
        y[1][2] * y[2][0] - y[1][0] * y[2][2],
        y[1][0] * y[2][1] - y[1][1] * y[2][0],
    ];
    let dist = dot(d, d).sqrt();
    if !dist.is_finite() {
        return Err(Error::NoConvergence { stage: "nearest point", iterations: 50, residual: dist });
    }
    Ok(if dot(d, nrm) < 0.0 { -dist } else { dist })
}

fn distance_spot_check(s: &Immersion, hat: &FundamentalData) -> Result<f64> {
    let radial = s.radial().expect("radial immersion");
    let grid = s.grid();
    let coeffs = grid.analyze(&radial.profile)?;
    let r = hat.r_min;
    let step = 1e-4 * r;
    let mut worst = 0.0_f64;
    for k in 0..8 {
        let node = (k * grid.len()) / 8 + grid.nlon() / 3;
        let node = node.min(grid.len() - 1);
        let start = grid.angles(node);
        let y0 = hat.positions[node];
        let sd = |di: [f64; 3]| -> Result<f64> {
            let x = [y0[0] + di[0], y0[1] + di[1], y0[2] + di[2]];
            signed_distance(&coeffs, radial.center, x, start)
        };
        let unit = |i: usize, a: f64| {
            let mut v = [0.0; 3];
            v[i] = a;
            v
        };
        let d = distance_hessian(hat, node);
        let centre = sd([0.0; 3])?;
        for i in 0..3 {
            for j in i..3 {
                let fd = if i == j {
                    (sd(unit(i, step))? - 2.0 * centre + sd(unit(i, -step))?) / (step * step)
                } else {
                    let pp = sd([0, 1, 2].map(|c| unit(i, step)[c] + unit(j, step)[c]))?;
                    let pm = sd([0, 1, 2].map(|c| unit(i, step)[c] - unit(j, step)[c]))?;
                    let mp = sd([0, 1, 2].map(|c| -unit(i, step)[c] + unit(j, step)[c]))?;
                    let mm = sd([0, 1, 2].map(|c| -unit(i, step)[c] - unit(j, step)[c]))?;
                    (pp - pm - mp + mm) / (4.0 * step * step)
                };
                worst = worst.max(r * (fd - d[i][j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Pointwise expansion of `H` in terms of Euclidean data and the metric
/// perturbation `σ = g − δ`; returns `sup |H − RHS| · r^{1+2τ}`.
pub fn mean_curvature_expansion_residual(s: &Immersion, metric: &AfMetric) -> Result<f64> {
    let (hat, fd) = hat_and_curved(s, metric)?;
    Ok(expansion_from(&hat, &fd, metric))
}

pub(crate) fn expansion_from(hat: &FundamentalData, fd: &FundamentalData, metric: &AfMetric) -> f64 {
    let tau = metric.decay_order();
    let r = hat.r_min;
    let mut worst = 0.0_f64;
    for n in 0..hat.len() {
        let jet = metric.jet_unchecked(hat.positions[n]);
        let nh = hat.euclidean_normal[n];
        let d = distance_hessian(hat, n);
        let h = fd.mean_curvature[n];
        let mut rhs = hat.mean_curvature[n];
        for i in 0..3 {
            for j in 0..3 {
                let sigma = jet.g[i][j] - if i == j { 1.0 } else { 0.0 };
                rhs += 0.5 * h * sigma * nh[i] * nh[j];
                rhs -= sigma * d[i][j];
                rhs -= jet.dg[i][j][i] * nh[j];
                rhs += 0.5 * jet.dg[j][j][i] * nh[i];
                for t in 0..3 {
                    // ½ σ_jt,i n_i n_j n_t
                    rhs += 0.5 * jet.dg[j][t][i] * nh[i] * nh[j] * nh[t];
                }
            }
        }
        worst = worst.max((h - rhs).abs());
    }
    worst * r.powf(1.0 + 2.0 * tau)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralIdentityReport {
    /// `∫(H − Ĥ) dσ`.
    pub lhs: f64,
    /// `½∫(g_ii,j − g_ij,i) n̂_j dσ⁰ − ½∫σ_st D_st dσ⁰`.
    pub rhs: f64,
    /// `|lhs − rhs| · r^{2τ−1}`.
    pub scaled_residual: f64,
    /// Both sides of the divergence-theorem identity
    /// `∫σ_st,i n̂_i n̂_s n̂_t = −∫Ĥ σ_st n̂_s n̂_t + ∫σ_st,t n̂_s + ∫σ_st D_st` (all `dσ⁰`).
    pub divergence_lhs: f64,
    pub divergence_rhs: f64,
    pub divergence_residual: f64,
}

pub fn integral_identity_residual(s: &Immersion, metric: &AfMetric) -> Result<IntegralIdentityReport> {
    let (hat, fd) = hat_and_curved(s, metric)?;
    Ok(integral_from(&hat, &fd, metric))
}

pub(crate) fn integral_from(hat: &FundamentalData, fd: &FundamentalData, metric: &AfMetric) -> IntegralIdentityReport {
    let tau = metric.decay_order();
    let r = hat.r_min;
    let lhs = (0..hat.len())
        .map(|n| (fd.mean_curvature[n] - hat.mean_curvature[n]) * fd.area_weights[n])
        .sum::<f64>();
    let (mut flux, mut hess, mut cubic, mut mean_term, mut div_term) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in 0..hat.len() {
        let w = hat.area_weights[n];
        let jet = metric.jet_unchecked(hat.positions[n]);
        let nh = hat.euclidean_normal[n];
        let d = distance_hessian(hat, n);
        for i in 0..3 {
            for j in 0..3 {
                let sigma = jet.g[i][j] - if i == j { 1.0 } else { 0.0 };
                // (g_ii,j − g_ij,i) n_j, summed over i and j
                flux += w * (jet.dg[i][i][j] - jet.dg[i][j][i]) * nh[j];
                hess += w * sigma * d[i][j];
                mean_term += w * hat.mean_curvature[n] * sigma * nh[i] * nh[j];
                div_term += w * jet.dg[i][j][j] * nh[i];
                for k in 0..3 {
                    cubic += w * jet.dg[i][j][k] * nh[k] * nh[i] * nh[j];
                }
            }
        }
    }
    let rhs = 0.5 * flux - 0.5 * hess;
    let divergence_rhs = -mean_term + div_term + hess;
    IntegralIdentityReport {
        lhs,
        rhs,
        scaled_residual: (lhs - rhs).abs() * r.powf(2.0 * tau - 1.0),
        divergence_lhs: cubic,
        divergence_rhs,
        divergence_residual: (cubic - divergence_rhs).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SphereGrid;
    use crate::surface::immersion::{coordinate_sphere, immerse_radial};

    #[test]
    fn second_form_relation_trivial_in_flat_ambient() {
        let g = SphereGrid::new(12).unwrap();
        let prof = g.map(|n| 10.0 + 0.5 * g.unit_vector(n)[0] * g.unit_vector(n)[2]);
        let s = immerse_radial(&g, [0.0; 3], &prof, None).unwrap();
        assert!(lemma23_residual(&s, &AfMetric::euclidean()).unwrap() <= 1e-11);
    }

    #[test]
    fn second_form_relation_converges_off_center() {
        let m = AfMetric::schwarzschild_isotropic(1.0).unwrap();
        let res: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&l| {
                let g = SphereGrid::new(l).unwrap();
                let s = coordinate_sphere(&g, [2.0, 0.0, 1.0], 10.0, Some(&m)).unwrap();
                lemma23_residual(&s, &m).unwrap()
            })
            .collect();
        assert!(res[1] <= res[0] / 10.0 && res[2] <= (res[1] / 10.0).max(1e-13), "{res:?}");
    }

    #[test]
    fn distance_hessian_round_sphere() {
        let g = SphereGrid::new(12).unwrap();
        let r = 6.0;
        let s = coordinate_sphere(&g, [0.0; 3], r, None).unwrap();
        let hat = fundamental_forms(&s, Ambient::Euclidean).unwrap();
        for n in 0..g.len() {
            let d = distance_hessian(&hat, n);
            let w = g.unit_vector(n);
            for i in 0..3 {
                for j in 0..3 {
                    let want = (if i == j { 1.0 } else { 0.0 } - w[i] * w[j]) / r;
                    assert!((d[i][j] - want).abs() < 1e-13);
                }
            }
        }
        let rep = lemma24_residual(&s).unwrap();
        assert!(rep.algebraic <= 1e-12);
        assert!(rep.spot_check.unwrap() <= 1e-5, "{:?}", rep);
    }

    #[test]
    fn distance_hessian_matches_true_distance_on_perturbed_sphere() {
        for l in [16, 32] {
            let g = SphereGrid::new(l).unwrap();
            let prof = g.map(|n| {
                let w = g.unit_vector(n);
                10.0 + 0.3 * (3.0 * w[2] * w[2] - 1.0) + 0.2 * w[0] * w[1]
            });
            let s = immerse_radial(&g, [0.5, 0.0, 0.0], &prof, None).unwrap();
            let rep = lemma24_residual(&s).unwrap();
            assert!(rep.algebraic <= 1e-10);
            assert!(rep.spot_check.unwrap() <= 1e-5, "{rep:?}");
        }
    }

    #[test]
    fn euclidean_identities_vanish() {
        let g = SphereGrid::new(12).unwrap();
        let e = AfMetric::euclidean();
        let s = coordinate_sphere(&g, [0.0; 3], 10.0, None).unwrap();
        assert!(mean_curvature_expansion_residual(&s, &e).unwrap() < 1e-9);
        let rep = integral_identity_residual(&s, &e).unwrap();
        assert!(rep.lhs.abs() < 1e-12 && rep.rhs.abs() < 1e-12 && rep.divergence_residual < 1e-14);
    }

    #[test]
    fn expansion_bounded_on_isotropic_spheres() {
        let m = AfMetric::schwarzschild_isotropic(1.0).unwrap();
        let g = SphereGrid::new(12).unwrap();
        let v: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&r| {
                let s = coordinate_sphere(&g, [0.0; 3], r, Some(&m)).unwrap();
                mean_curvature_expansion_residual(&s, &m).unwrap()
            })
            .collect();
        assert!(v.iter().all(|x| *x < 50.0), "{v:?}");
        assert!(v[2] <= 1.5 * v[0], "{v:?}");
    }

    #[test]
    fn mean_curvature_integral_matches_isotropic_closed_form() {
        let m = AfMetric::schwarzschild_isotropic(1.0).unwrap();
        let g = SphereGrid::new(12).unwrap();
        for r in [10.0, 40.0] {
            let s = coordinate_sphere(&g, [0.0; 3], r, Some(&m)).unwrap();
            let rep = integral_identity_residual(&s, &m).unwrap();
            let psi = 1.0 + 0.5 / r;
            let h = (2.0 / r - 2.0 / (r * r * psi)) / (psi * psi);
            let exact = 4.0 * std::f64::consts::PI * r * r * psi.powi(4) * (h - 2.0 / r);
            assert!((rep.lhs - exact).abs() <= 1e-10 * exact.abs(), "{} vs {exact}", rep.lhs);
        }
    }

    #[test]
    fn divergence_identity_on_kerr_sphere() {
        let m = AfMetric::kerr_slice(1.0, 0.5).unwrap();
        let g = SphereGrid::new(24).unwrap();
        let s = coordinate_sphere(&g, [0.0; 3], 40.0, Some(&m)).unwrap();
        let rep = integral_identity_residual(&s, &m).unwrap();
        assert!(rep.divergence_residual <= 1e-7, "{rep:?}");
    }
}
