//! Fully normalized associated Legendre functions and real spherical
//! harmonics (no Condon-Shortley phase, orthonormal on the unit sphere).

use std::f64::consts::PI;

use crate::jet::Scalar;

/// Flat index of coefficient `(l, m)`, `-l <= m <= l`.
pub fn lm_index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// Inverse of [`lm_index`].
pub fn lm_of_index(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
    (l, idx as i64 - (l * l) as i64 - l as i64)
}

#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized `Pbar_lm(cos theta)` and `d/dtheta` for all `0 <= m <= l <= lmax`
/// at one colatitude (sin theta > 0), indexed by `tri(l, m)`.
pub fn legendre_column(lmax: usize, t: f64, s: f64) -> (Vec<f64>, Vec<f64>) {
    let n = tri(lmax, lmax) + 1;
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
        }
        if m < lmax {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * t * p[tri(m, m)];
        }
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[tri(l, m)] = a * (t * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    for l in 0..=lmax {
        for m in 0..=l {
            let (lf, mf) = (l as f64, m as f64);
            let prev = if l > m { p[tri(l - 1, m)] } else { 0.0 };
            let c = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt();
            let c = if l > m { c } else { 0.0 };
            dp[tri(l, m)] = (lf * t * p[tri(l, m)] - c * prev) / s;
        }
    }
    (p, dp)
}

/// Tables of `Pbar`, `dPbar/dtheta`, `d2Pbar/dtheta2` on the latitude rings
/// of a grid, laid out `[tri(l, m) * nlat + ring]`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub lmax: usize,
    pub nlat: usize,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub ddp: Vec<f64>,
}

impl LegendreTable {
    pub fn new(lmax: usize, cos_t: &[f64], sin_t: &[f64]) -> Self {
        let nlat = cos_t.len();
        let n = tri(lmax, lmax) + 1;
        let mut p = vec![0.0; n * nlat];
        let mut dp = vec![0.0; n * nlat];
        let mut ddp = vec![0.0; n * nlat];
        for ring in 0..nlat {
            let (t, s) = (cos_t[ring], sin_t[ring]);
            let (col, dcol) = legendre_column(lmax, t, s);
            for l in 0..=lmax {
                for m in 0..=l {
                    let k = tri(l, m);
                    let (lf, mf) = (l as f64, m as f64);
                    p[k * nlat + ring] = col[k];
                    dp[k * nlat + ring] = dcol[k];
                    // Associated Legendre equation in theta.
                    ddp[k * nlat + ring] =
                        -(t / s) * dcol[k] - (lf * (lf + 1.0) - mf * mf / (s * s)) * col[k];
                }
            }
        }
        LegendreTable { lmax, nlat, p, dp, ddp }
    }

    #[inline]
    pub fn p(&self, l: usize, m: usize, ring: usize) -> f64 {
        self.p[tri(l, m) * self.nlat + ring]
    }
    #[inline]
    pub fn dp(&self, l: usize, m: usize, ring: usize) -> f64 {
        self.dp[tri(l, m) * self.nlat + ring]
    }
    #[inline]
    pub fn ddp(&self, l: usize, m: usize, ring: usize) -> f64 {
        self.ddp[tri(l, m) * self.nlat + ring]
    }
}

/// Real orthonormal harmonic `Y_lm` at a unit direction given by angles.
pub fn real_ylm(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let ma = m.unsigned_abs() as usize;
    let (p, _) = legendre_column(l, theta.cos(), theta.sin().max(1e-300));
    let pl = p[tri(l, ma)];
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => pl,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * pl * (ma as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * pl * (ma as f64 * phi).sin(),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Real orthonormal harmonic `Y_lm(x / |x|)` written as a rational function
/// of the Cartesian coordinates, so it can be evaluated on derivative jets.
/// Intended for low degree (`l` up to ~20).
pub fn real_ylm_cartesian<T: Scalar>(l: usize, m: i64, x: [T; 3]) -> T {
    let ma = m.unsigned_abs() as usize;
    assert!(ma <= l, "|m| must not exceed l");
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let t = x[2] / r;
    // Q_lm(t) = d^m P_l / dt^m via the three-term recursion.
    let double_fact: f64 = (1..=ma).map(|k| (2 * k - 1) as f64).product();
    let mut q_prev = T::constant(double_fact);
    let mut q = q_prev;
    if l > ma {
        q = t * (2.0 * ma as f64 + 1.0) * double_fact;
        for ll in (ma + 2)..=l {
            let next = (t * q * (2.0 * ll as f64 - 1.0) - q_prev * (ll + ma - 1) as f64)
                / (ll - ma) as f64;
            q_prev = q;
            q = next;
        }
    }
    // Real / imaginary parts of (x + i y)^m.
    let mut re = T::constant(1.0);
    let mut im = T::constant(0.0);
    for _ in 0..ma {
        let nre = re * x[0] - im * x[1];
        let nim = re * x[1] + im * x[0];
        re = nre;
        im = nim;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - ma) / factorial(l + ma)).sqrt();
    let rm = r.powi(ma as i32);
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => q * norm,
        std::cmp::Ordering::Greater => q * re / rm * (norm * std::f64::consts::SQRT_2),
        std::cmp::Ordering::Less => q * im / rm * (norm * std::f64::consts::SQRT_2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for idx in 0..200 {
            let (l, m) = lm_of_index(idx);
            assert_eq!(lm_index(l, m), idx);
        }
    }

    #[test]
    fn cartesian_form_matches_recursion() {
        let (theta, phi) = (0.7_f64, 2.1_f64);
        let x = [theta.sin() * phi.cos() * 3.0, theta.sin() * phi.sin() * 3.0, theta.cos() * 3.0];
        for l in 0..8 {
            for m in -(l as i64)..=(l as i64) {
                let a = real_ylm(l, m, theta, phi);
                let b: f64 = real_ylm_cartesian(l, m, x);
                assert!((a - b).abs() < 1e-12, "l={l} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn degree_one_harmonics_are_coordinates() {
        let c = (3.0 / (4.0 * PI)).sqrt();
        let (theta, phi) = (1.1_f64, 0.4_f64);
        assert!((real_ylm(1, 1, theta, phi) - c * theta.sin() * phi.cos()).abs() < 1e-14);
        assert!((real_ylm(1, -1, theta, phi) - c * theta.sin() * phi.sin()).abs() < 1e-14);
        assert!((real_ylm(1, 0, theta, phi) - c * theta.cos()).abs() < 1e-14);
    }

    #[test]
    fn theta_derivative_matches_difference() {
        let h = 1e-6;
        let th: f64 = 0.9;
        let (_, d) = legendre_column(6, th.cos(), th.sin());
        let (pp, _) = legendre_column(6, (th + h).cos(), (th + h).sin());
        let (pm, _) = legendre_column(6, (th - h).cos(), (th - h).sin());
        for l in 0..=6 {
            for m in 0..=l {
                let fd = (pp[tri(l, m)] - pm[tri(l, m)]) / (2.0 * h);
                assert!((fd - d[tri(l, m)]).abs() < 1e-8);
            }
        }
    }
}
