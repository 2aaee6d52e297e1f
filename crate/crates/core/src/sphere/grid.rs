use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sphere::legendre::LegendreTable;

pub const MIN_BAND_LIMIT: usize = 4;

/// Gauss-Legendre (in cos theta) by uniform-phi product grid on the unit
/// sphere. Nodes are stored ring-major: `node = ring * nlon + q`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    band_limit: usize,
    nlat: usize,
    nlon: usize,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    phi: Vec<f64>,
    ring_weights: Vec<f64>,
    table: LegendreTable,
    cos_mphi: Vec<f64>,
    sin_mphi: Vec<f64>,
}

/// Gauss-Legendre abscissae (descending, so theta ascends) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p_and_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_p_and_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre_p_and_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

impl SphereGrid {
    pub fn new(band_limit: usize) -> Result<Self> {
        if band_limit < MIN_BAND_LIMIT {
            return Err(Error::BandLimitTooSmall(band_limit, MIN_BAND_LIMIT));
        }
        let nlat = band_limit + 1;
        let nlon = 2 * band_limit + 2;
        let (x, w) = gauss_legendre(nlat);
        let theta: Vec<f64> = x.iter().map(|t| t.acos()).collect();
        let sin_theta: Vec<f64> = x.iter().map(|t| (1.0 - t * t).sqrt()).collect();
        let phi: Vec<f64> = (0..nlon).map(|q| 2.0 * PI * q as f64 / nlon as f64).collect();
        let dphi = 2.0 * PI / nlon as f64;
        let ring_weights = w.iter().map(|wp| wp * dphi).collect();
        let table = LegendreTable::new(band_limit, &x, &sin_theta);
        let mut cos_mphi = vec![0.0; (band_limit + 1) * nlon];
        let mut sin_mphi = vec![0.0; (band_limit + 1) * nlon];
        for m in 0..=band_limit {
            for q in 0..nlon {
                let a = m as f64 * phi[q];
                cos_mphi[m * nlon + q] = a.cos();
                sin_mphi[m * nlon + q] = a.sin();
            }
        }
        Ok(SphereGrid {
            band_limit,
            nlat,
            nlon,
            theta,
            cos_theta: x,
            sin_theta,
            phi,
            ring_weights,
            table,
            cos_mphi,
            sin_mphi,
        })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }
    pub fn nlat(&self) -> usize {
        self.nlat
    }
    pub fn nlon(&self) -> usize {
        self.nlon
    }
    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn n_coeffs(&self) -> usize {
        (self.band_limit + 1) * (self.band_limit + 1)
    }
    pub fn theta(&self, ring: usize) -> f64 {
        self.theta[ring]
    }
    pub fn cos_theta(&self, ring: usize) -> f64 {
        self.cos_theta[ring]
    }
    pub fn sin_theta(&self, ring: usize) -> f64 {
        self.sin_theta[ring]
    }
    pub fn phi(&self, q: usize) -> f64 {
        self.phi[q]
    }
    pub(crate) fn table(&self) -> &LegendreTable {
        &self.table
    }
    pub fn ring_of(&self, node: usize) -> usize {
        node / self.nlon
    }

    /// Quadrature weight of a node (includes the phi spacing).
    pub fn weight(&self, node: usize) -> f64 {
        self.ring_weights[node / self.nlon]
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.weight(n)).collect()
    }

    pub fn angles(&self, node: usize) -> (f64, f64) {
        (self.theta[node / self.nlon], self.phi[node % self.nlon])
    }

    pub fn unit_vector(&self, node: usize) -> [f64; 3] {
        let p = node / self.nlon;
        let q = node % self.nlon;
        let s = self.sin_theta[p];
        let (cp, sp) = (self.cos_mphi[self.nlon + q], self.sin_mphi[self.nlon + q]);
        [s * cp, s * sp, self.cos_theta[p]]
    }

    /// Orthonormal tangent frame (theta-hat, phi-hat) of the unit sphere at a node.
    pub fn frame(&self, node: usize) -> ([f64; 3], [f64; 3]) {
        let p = node / self.nlon;
        let q = node % self.nlon;
        let (c, s) = (self.cos_theta[p], self.sin_theta[p]);
        let (cp, sp) = (self.cos_mphi[self.nlon + q], self.sin_mphi[self.nlon + q]);
        ([c * cp, c * sp, -s], [-sp, cp, 0.0])
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        let mut total = 0.0;
        for p in 0..self.nlat {
            let row: f64 = f[p * self.nlon..(p + 1) * self.nlon].iter().sum();
            total += self.ring_weights[p] * row;
        }
        total
    }

    pub fn map<F: FnMut(usize) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(f).collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::GridMismatch { expected: self.len(), got: len });
        }
        Ok(())
    }

    /// Per-ring cosine/sine Fourier sums of a grid field, `m = 0..=L`.
    /// Returns `(c, s)` indexed `[ring * (L + 1) + m]`.
    pub(crate) fn ring_fourier(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nm = self.band_limit + 1;
        let mut c = vec![0.0; self.nlat * nm];
        let mut s = vec![0.0; self.nlat * nm];
        for p in 0..self.nlat {
            let row = &f[p * self.nlon..(p + 1) * self.nlon];
            for m in 0..nm {
                let ct = &self.cos_mphi[m * self.nlon..(m + 1) * self.nlon];
                let st = &self.sin_mphi[m * self.nlon..(m + 1) * self.nlon];
                let mut a = 0.0;
                let mut b = 0.0;
                for q in 0..self.nlon {
                    a += row[q] * ct[q];
                    b += row[q] * st[q];
                }
                c[p * nm + m] = a;
                s[p * nm + m] = b;
            }
        }
        (c, s)
    }

    /// Inverse of [`ring_fourier`]: builds a grid field from per-ring
    /// Fourier amplitudes `f = sum_m a_m cos(m phi) + b_m sin(m phi)`.
    pub(crate) fn ring_synthesis(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let nm = self.band_limit + 1;
        let mut out = vec![0.0; self.len()];
        for p in 0..self.nlat {
            let row = &mut out[p * self.nlon..(p + 1) * self.nlon];
            for m in 0..nm {
                let (am, bm) = (a[p * nm + m], b[p * nm + m]);
                if am == 0.0 && bm == 0.0 {
                    continue;
                }
                let ct = &self.cos_mphi[m * self.nlon..(m + 1) * self.nlon];
                let st = &self.sin_mphi[m * self.nlon..(m + 1) * self.nlon];
                for q in 0..self.nlon {
                    row[q] += am * ct[q] + bm * st[q];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_four_pi() {
        for l in [4, 8, 16, 31] {
            let g = SphereGrid::new(l).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 4.0 * PI).abs() < 1e-13, "L={l}: {s}");
        }
    }

    #[test]
    fn l8_grid_shape() {
        let g = SphereGrid::new(8).unwrap();
        assert_eq!((g.nlat(), g.nlon()), (9, 18));
        assert_eq!(g.len(), 162);
    }

    #[test]
    fn integrates_cos_squared() {
        let g = SphereGrid::new(16).unwrap();
        let f = g.map(|n| g.unit_vector(n)[2].powi(2));
        assert!((g.integrate(&f) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_small_band_limit() {
        assert!(matches!(SphereGrid::new(3), Err(Error::BandLimitTooSmall(3, 4))));
    }

    #[test]
    fn frame_is_orthonormal() {
        let g = SphereGrid::new(6).unwrap();
        for n in 0..g.len() {
            let w = g.unit_vector(n);
            let (t, p) = g.frame(n);
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert!(dot(w, t).abs() < 1e-14 && dot(w, p).abs() < 1e-14 && dot(t, p).abs() < 1e-14);
            assert!((dot(t, t) - 1.0).abs() < 1e-14);
        }
    }
}
