use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::grid::SphereGrid;
use crate::sphere::legendre::{legendre_column, lm_index, tri};

/// Real spherical-harmonic coefficients `a_lm`, `0 <= l <= L`, `|m| <= l`,
/// flat-indexed by [`lm_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoeffs {
    band_limit: usize,
    data: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn zeros(band_limit: usize) -> Self {
        HarmonicCoeffs { band_limit, data: vec![0.0; (band_limit + 1) * (band_limit + 1)] }
    }

    pub fn from_vec(band_limit: usize, data: Vec<f64>) -> Result<Self> {
        let n = (band_limit + 1) * (band_limit + 1);
        if data.len() != n {
            return Err(Error::GridMismatch { expected: n, got: data.len() });
        }
        Ok(HarmonicCoeffs { band_limit, data })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.band_limit {
            return 0.0;
        }
        self.data[lm_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        self.data[lm_index(l, m)] = v;
    }

    /// Round-sphere Laplace-Beltrami: `a_lm -> -l(l+1) a_lm`.
    pub fn laplace_beltrami(&self) -> HarmonicCoeffs {
        let mut out = self.clone();
        for l in 0..=self.band_limit {
            let lam = -((l * (l + 1)) as f64);
            for m in -(l as i64)..=(l as i64) {
                out.data[lm_index(l, m)] *= lam;
            }
        }
        out
    }

    /// L2 norm of the degree-`l` block.
    pub fn degree_norm(&self, l: usize) -> f64 {
        (-(l as i64)..=(l as i64)).map(|m| self.get(l, m).powi(2)).sum::<f64>().sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Evaluates the expansion at an arbitrary point given by angles.
    pub fn evaluate(&self, theta: f64, phi: f64) -> f64 {
        let l_max = self.band_limit;
        let s = theta.sin().abs().max(1e-300);
        let (p, _) = legendre_column(l_max, theta.cos(), s);
        let mut total = 0.0;
        for m in 0..=l_max {
            let (c, sn) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
            for l in m..=l_max {
                let pl = p[tri(l, m)];
                if m == 0 {
                    total += self.data[lm_index(l, 0)] * pl;
                } else {
                    let mi = m as i64;
                    total += SQRT_2
                        * pl
                        * (self.data[lm_index(l, mi)] * c + self.data[lm_index(l, -mi)] * sn);
                }
            }
        }
        total
    }

    /// Values on one colatitude ring at the given longitudes.
    pub fn ring_values(&self, theta: f64, phis: &[f64]) -> Vec<f64> {
        let l_max = self.band_limit;
        let s = theta.sin().abs().max(1e-300);
        let (p, _) = legendre_column(l_max, theta.cos(), s);
        let mut cm = vec![0.0; l_max + 1];
        let mut sm = vec![0.0; l_max + 1];
        for m in 0..=l_max {
            for l in m..=l_max {
                let pl = p[tri(l, m)];
                if m == 0 {
                    cm[0] += self.data[lm_index(l, 0)] * pl;
                } else {
                    let mi = m as i64;
                    cm[m] += SQRT_2 * pl * self.data[lm_index(l, mi)];
                    sm[m] += SQRT_2 * pl * self.data[lm_index(l, -mi)];
                }
            }
        }
        phis.iter()
            .map(|&phi| (0..=l_max).map(|m| {
                let (sn, c) = (m as f64 * phi).sin_cos();
                cm[m] * c + sm[m] * sn
            }).sum())
            .collect()
    }

    /// `[f, f_θ, f_φ, f_θθ, f_θφ, f_φφ]` at an arbitrary point off the poles.
    pub fn evaluate_derivatives(&self, theta: f64, phi: f64) -> [f64; 6] {
        let l_max = self.band_limit;
        let (t, s) = (theta.cos(), theta.sin());
        let (p, dp) = legendre_column(l_max, t, s);
        let mut out = [0.0; 6];
        for m in 0..=l_max {
            let mf = m as f64;
            let (c, sn) = ((mf * phi).cos(), (mf * phi).sin());
            for l in m..=l_max {
                let lf = l as f64;
                let k = tri(l, m);
                let ddp = -(t / s) * dp[k] - (lf * (lf + 1.0) - mf * mf / (s * s)) * p[k];
                // Angular part and its phi derivatives.
                let (a, a_p, a_pp) = if m == 0 {
                    (self.data[lm_index(l, 0)], 0.0, 0.0)
                } else {
                    let mi = m as i64;
                    let (cc, ss) = (self.data[lm_index(l, mi)], self.data[lm_index(l, -mi)]);
                    (
                        SQRT_2 * (cc * c + ss * sn),
                        SQRT_2 * mf * (ss * c - cc * sn),
                        -SQRT_2 * mf * mf * (cc * c + ss * sn),
                    )
                };
                out[0] += p[k] * a;
                out[1] += dp[k] * a;
                out[2] += p[k] * a_p;
                out[3] += ddp * a;
                out[4] += dp[k] * a_p;
                out[5] += p[k] * a_pp;
            }
        }
        out
    }

    /// Evaluates at a unit vector.
    pub fn evaluate_at(&self, x: [f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let theta = (x[2] / r).clamp(-1.0, 1.0).acos();
        let phi = x[1].atan2(x[0]);
        self.evaluate(theta, phi)
    }
}

/// Which theta-profile of the Legendre table to use during synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Radial {
    P,
    Dp,
    Ddp,
}

impl SphereGrid {
    /// Spectral analysis by exact quadrature: `a_lm = sum_w f Y_lm`.
    pub fn analyze(&self, f: &[f64]) -> Result<HarmonicCoeffs> {
        self.check_len(f.len())?;
        let lmax = self.band_limit();
        let nm = lmax + 1;
        let (c, s) = self.ring_fourier(f);
        let mut out = HarmonicCoeffs::zeros(lmax);
        let t = self.table();
        for p in 0..self.nlat() {
            let w = self.weight(p * self.nlon());
            for m in 0..=lmax {
                let (cm, sm) = (c[p * nm + m] * w, s[p * nm + m] * w);
                for l in m..=lmax {
                    let pl = t.p(l, m, p);
                    if m == 0 {
                        out.data[lm_index(l, 0)] += pl * cm;
                    } else {
                        let mi = m as i64;
                        out.data[lm_index(l, mi)] += SQRT_2 * pl * cm;
                        out.data[lm_index(l, -mi)] += SQRT_2 * pl * sm;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn synthesize(&self, a: &HarmonicCoeffs) -> Vec<f64> {
        self.synth(a, Radial::P, 0)
    }

    /// `d f / d theta` at the nodes.
    pub fn synthesize_dtheta(&self, a: &HarmonicCoeffs) -> Vec<f64> {
        self.synth(a, Radial::Dp, 0)
    }

    /// `d f / d phi` at the nodes.
    pub fn synthesize_dphi(&self, a: &HarmonicCoeffs) -> Vec<f64> {
        self.synth(a, Radial::P, 1)
    }

    /// Generic synthesis with a theta profile and `dphi_order` phi derivatives.
    pub(crate) fn synth(&self, a: &HarmonicCoeffs, radial: Radial, dphi_order: u32) -> Vec<f64> {
        let lmax = self.band_limit().min(a.band_limit());
        let nm = self.band_limit() + 1;
        let nlat = self.nlat();
        let t = self.table();
        let mut ca = vec![0.0; nlat * nm];
        let mut sa = vec![0.0; nlat * nm];
        for m in 0..=lmax {
            for l in m..=lmax {
                let (cl, sl) = if m == 0 {
                    (a.data[lm_index(l, 0)], 0.0)
                } else {
                    let mi = m as i64;
                    (SQRT_2 * a.data[lm_index(l, mi)], SQRT_2 * a.data[lm_index(l, -mi)])
                };
                if cl == 0.0 && sl == 0.0 {
                    continue;
                }
                for p in 0..nlat {
                    let v = match radial {
                        Radial::P => t.p(l, m, p),
                        Radial::Dp => t.dp(l, m, p),
                        Radial::Ddp => t.ddp(l, m, p),
                    };
                    ca[p * nm + m] += cl * v;
                    sa[p * nm + m] += sl * v;
                }
            }
        }
        for _ in 0..dphi_order {
            for p in 0..nlat {
                for m in 0..nm {
                    let mf = m as f64;
                    let (c, s) = (ca[p * nm + m], sa[p * nm + m]);
                    ca[p * nm + m] = mf * s;
                    sa[p * nm + m] = -mf * c;
                }
            }
        }
        self.ring_synthesis(&ca, &sa)
    }

    /// Quadrature transpose of [`SphereGrid::synth`]: returns
    /// `c_lm = sum_n w_n f_n B_lm(n)` where `B_lm` is the synthesized basis
    /// function with the given theta profile and phi derivative order.
    pub(crate) fn synth_adjoint(&self, f: &[f64], radial: Radial, dphi_order: u32) -> HarmonicCoeffs {
        let lmax = self.band_limit();
        let nm = lmax + 1;
        let weighted: Vec<f64> = f.iter().enumerate().map(|(n, v)| v * self.weight(n)).collect();
        let (mut c, mut s) = self.ring_fourier(&weighted);
        for _ in 0..dphi_order {
            for i in 0..c.len() {
                let mf = (i % nm) as f64;
                let (a, b) = (c[i], s[i]);
                c[i] = -mf * b;
                s[i] = mf * a;
            }
        }
        let t = self.table();
        let mut out = HarmonicCoeffs::zeros(lmax);
        for p in 0..self.nlat() {
            for m in 0..=lmax {
                let (cm, sm) = (c[p * nm + m], s[p * nm + m]);
                for l in m..=lmax {
                    let v = match radial {
                        Radial::P => t.p(l, m, p),
                        Radial::Dp => t.dp(l, m, p),
                        Radial::Ddp => t.ddp(l, m, p),
                    };
                    if m == 0 {
                        out.data[lm_index(l, 0)] += v * cm;
                    } else {
                        let mi = m as i64;
                        out.data[lm_index(l, mi)] += SQRT_2 * v * cm;
                        out.data[lm_index(l, -mi)] += SQRT_2 * v * sm;
                    }
                }
            }
        }
        out
    }

    /// All first and second angular derivatives of a band-limited expansion:
    /// `(f, f_theta, f_phi, f_thetatheta, f_thetaphi, f_phiphi)`.
    pub fn derivatives(&self, a: &HarmonicCoeffs) -> AngularDerivatives {
        AngularDerivatives {
            f: self.synth(a, Radial::P, 0),
            t: self.synth(a, Radial::Dp, 0),
            p: self.synth(a, Radial::P, 1),
            tt: self.synth(a, Radial::Ddp, 0),
            tp: self.synth(a, Radial::Dp, 1),
            pp: self.synth(a, Radial::P, 2),
        }
    }

    /// Analyze-then-differentiate convenience for grid fields.
    pub fn field_derivatives(&self, f: &[f64]) -> Result<AngularDerivatives> {
        Ok(self.derivatives(&self.analyze(f)?))
    }

    /// Projects a grid field onto degrees `<= L` (removes aliasing content).
    pub fn project(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.synthesize(&self.analyze(f)?))
    }
}

#[derive(Debug, Clone)]
pub struct AngularDerivatives {
    pub f: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub tt: Vec<f64>,
    pub tp: Vec<f64>,
    pub pp: Vec<f64>,
}
