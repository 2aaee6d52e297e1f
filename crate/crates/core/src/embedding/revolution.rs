use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Meridian of a surface of revolution sampled at `θ_k = kπ/n`, the
/// Chebyshev–Lobatto points in `t = cos θ`.
///
/// The surface is `(R cos φ, R sin φ, −z)`; `z` grows from the north pole so
/// that the orientation agrees with the round chart. With `ρ = G/sin²θ` every
/// stored quantity except `radius` and `dheight` is a smooth function of `t`.
#[derive(Debug, Clone)]
pub struct RevolutionProfile {
    pub theta: Vec<f64>,
    pub radius: Vec<f64>,
    pub height: Vec<f64>,
    /// `dR/dθ`.
    pub dradius: Vec<f64>,
    /// `dz/dθ`.
    pub dheight: Vec<f64>,
    /// Principal curvature along meridians.
    pub meridian_curvature: Vec<f64>,
    /// Principal curvature along parallels.
    pub parallel_curvature: Vec<f64>,
    sqrt_rho: Vec<f64>,
    sqrt_q: Vec<f64>,
}

/// Values of a [`RevolutionProfile`] at one colatitude.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub radius: f64,
    pub height: f64,
    pub dradius: f64,
    pub dheight: f64,
    pub meridian_curvature: f64,
    pub parallel_curvature: f64,
}

impl ProfilePoint {
    pub fn mean_curvature(&self) -> f64 {
        self.meridian_curvature + self.parallel_curvature
    }

    pub fn gauss_curvature(&self) -> f64 {
        self.meridian_curvature * self.parallel_curvature
    }

    pub fn position(&self, phi: f64) -> [f64; 3] {
        [self.radius * phi.cos(), self.radius * phi.sin(), -self.height]
    }

    pub fn normal(&self, phi: f64) -> [f64; 3] {
        let s = self.dradius.hypot(self.dheight);
        [self.dheight * phi.cos() / s, self.dheight * phi.sin() / s, self.dradius / s]
    }
}

/// Chebyshev differentiation matrix on `x_k = cos(kπ/n)`.
fn cheb_matrix(n: usize) -> DMatrix<f64> {
    let x: Vec<f64> = (0..=n).map(|k| (k as f64 * PI / n as f64).cos()).collect();
    let c = |k: usize| if k == 0 || k == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// Builds the meridian for `ds² = E dθ² + G dφ²` using `nodes + 1` collocation points.
///
/// Smoothness at the poles forces `G/sin²θ → E` there; that limit is used at
/// the two pole nodes.
pub fn embed_axisymmetric<E, G>(e: E, g: G, nodes: usize) -> Result<RevolutionProfile>
where
    E: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = nodes.max(8);
    let theta: Vec<f64> = (0..=n).map(|k| PI * k as f64 / n as f64).collect();
    let t: Vec<f64> = (0..=n).map(|k| (PI * k as f64 / n as f64).cos()).collect();
    let d = cheb_matrix(n);
    let ev = DVector::from_iterator(n + 1, theta.iter().map(|&th| e(th)));
    if let Some(k) = ev.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NotRevolutionEmbeddable(theta[k]));
    }
    let rho = DVector::from_fn(n + 1, |k, _| {
        if k == 0 || k == n {
            ev[k]
        } else {
            g(theta[k]) / theta[k].sin().powi(2)
        }
    });
    if let Some(k) = rho.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NotRevolutionEmbeddable(theta[k]));
    }
    let drho = &d * &rho;
    let gap = &ev - &rho;
    let dgap = &d * &gap;
    // (E − ρ)/(1 − t²), by l'Hôpital at the poles.
    let ratio = DVector::from_fn(n + 1, |k, _| {
        if k == 0 {
            -dgap[0] / 2.0
        } else if k == n {
            dgap[n] / 2.0
        } else {
            gap[k] / (1.0 - t[k] * t[k])
        }
    });
    let mut sqrt_q = DVector::zeros(n + 1);
    for k in 0..=n {
        let w = 1.0 - t[k] * t[k];
        let q = ratio[k] + rho[k] + t[k] * drho[k] - w * drho[k] * drho[k] / (4.0 * rho[k]);
        if q < -1e-10 * ev[k] {
            return Err(Error::NotRevolutionEmbeddable(theta[k]));
        }
        sqrt_q[k] = q.max(0.0).sqrt();
    }
    let sqrt_rho = rho.map(f64::sqrt);
    // dR/dθ as a function of t.
    let dradius = DVector::from_fn(n + 1, |k, _| t[k] * sqrt_rho[k] - (1.0 - t[k] * t[k]) * drho[k] / (2.0 * sqrt_rho[k]));
    let ddradius_t = &d * &dradius;
    let dsqrt_q = &d * &sqrt_q;
    // z(t) = ∫_t^1 √Q, i.e. dz/dt = −√Q with z(1) = 0.
    let mut sys = d.clone();
    let mut rhs = -sqrt_q.clone();
    for j in 0..=n {
        sys[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
    }
    rhs[0] = 0.0;
    let height = sys.lu().solve(&rhs).ok_or(Error::NotRevolutionEmbeddable(0.0))?;
    let mut k1 = vec![0.0; n + 1];
    let mut k2 = vec![0.0; n + 1];
    for k in 0..=n {
        let w = 1.0 - t[k] * t[k];
        let e32 = ev[k].powf(1.5);
        k1[k] = (dradius[k] * (t[k] * sqrt_q[k] - w * dsqrt_q[k]) + w * sqrt_q[k] * ddradius_t[k]) / e32;
        k2[k] = sqrt_q[k] / (sqrt_rho[k] * ev[k].sqrt());
    }
    let s: Vec<f64> = theta.iter().map(|th| th.sin()).collect();
    Ok(RevolutionProfile {
        radius: (0..=n).map(|k| s[k] * sqrt_rho[k]).collect(),
        height: height.as_slice().to_vec(),
        dradius: dradius.as_slice().to_vec(),
        dheight: (0..=n).map(|k| s[k] * sqrt_q[k]).collect(),
        meridian_curvature: k1,
        parallel_curvature: k2,
        sqrt_rho: sqrt_rho.as_slice().to_vec(),
        sqrt_q: sqrt_q.as_slice().to_vec(),
        theta,
    })
}

impl RevolutionProfile {
    /// Barycentric interpolation in `t = cos θ`.
    pub fn evaluate(&self, theta: f64) -> ProfilePoint {
        let n = self.theta.len() - 1;
        let x = theta.cos();
        let s = theta.sin().abs();
        let vals = |k: usize| {
            [
                self.sqrt_rho[k],
                self.height[k],
                self.dradius[k],
                self.sqrt_q[k],
                self.meridian_curvature[k],
                self.parallel_curvature[k],
            ]
        };
        let finish = |v: [f64; 6]| point([s * v[0], v[1], v[2], s * v[3], v[4], v[5]]);
        let mut num = [0.0; 6];
        let mut den = 0.0;
        for k in 0..=n {
            let diff = x - self.theta[k].cos();
            if diff == 0.0 {
                return finish(vals(k));
            }
            let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == n {
                w *= 0.5;
            }
            let c = w / diff;
            den += c;
            let v = vals(k);
            for i in 0..6 {
                num[i] += c * v[i];
            }
        }
        finish(num.map(|v| v / den))
    }
}

fn point(v: [f64; 6]) -> ProfilePoint {
    ProfilePoint {
        radius: v[0],
        height: v[1],
        dradius: v[2],
        dheight: v[3],
        meridian_curvature: v[4],
        parallel_curvature: v[5],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_profile_is_unit_sphere() {
        let p = embed_axisymmetric(|_| 1.0, |t: f64| t.sin().powi(2), 32).unwrap();
        for t in [0.0, 0.3, 1.1, 2.0, PI] {
            let q = p.evaluate(t);
            assert!((q.radius - t.sin()).abs() < 1e-12);
            assert!((q.height - (1.0 - t.cos())).abs() < 1e-12);
            assert!((q.mean_curvature() - 2.0).abs() < 1e-10);
        }
    }

    /// Intrinsic curvature `K = −(1/√(EG)) (S′/√E)′` with `S = √G`, in closed form.
    fn intrinsic(t: f64) -> f64 {
        let (sn, c) = t.sin_cos();
        let e = 1.0 + 0.2 * sn * sn;
        let de = 0.4 * sn * c;
        let gv = g(t);
        let dg = 2.0 * sn * c + 0.4 * sn.powi(3) * c;
        let ddg = 2.0 * (c * c - sn * sn) + 0.4 * (3.0 * sn * sn * c * c - sn.powi(4));
        let sq = gv.sqrt();
        let ds = dg / (2.0 * sq);
        let dds = ddg / (2.0 * sq) - dg * dg / (4.0 * sq.powi(3));
        -(dds / (e * sq) - ds * de / (2.0 * e * e * sq))
    }

    fn g(t: f64) -> f64 {
        t.sin().powi(2) * (1.0 + 0.1 * t.sin().powi(2))
    }

    #[test]
    fn oblate_profile_gauss_curvature_matches_intrinsic() {
        let p = embed_axisymmetric(|t: f64| 1.0 + 0.2 * t.sin().powi(2), g, 64).unwrap();
        let mut worst = 0.0_f64;
        for i in 1..40 {
            let t = PI * i as f64 / 40.0;
            worst = worst.max((p.evaluate(t).gauss_curvature() - intrinsic(t)).abs());
        }
        assert!(worst < 1e-8, "{worst:e}");
    }

    #[test]
    fn non_embeddable_profile_is_rejected() {
        // Too much circumference for the meridian length.
        let r = embed_axisymmetric(|_| 1.0, |t: f64| 4.0 * t.sin().powi(2), 32);
        assert!(matches!(r, Err(Error::NotRevolutionEmbeddable(_))));
    }
}
