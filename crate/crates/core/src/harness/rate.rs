use serde::Serialize;

use crate::error::{Error, Result};

/// Fits with an RMS log residual above this are flagged as noisy.
pub const NOISY_RESIDUAL: f64 = 0.05;

/// Least-squares power law `|m(r) − m∞| ≈ e^{intercept} r^{slope}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    pub m_inf: f64,
    pub points: usize,
    pub noisy: bool,
}

pub fn fit_rate(radii: &[f64], masses: &[f64], m_inf: f64) -> Result<RateFit> {
    if radii.len() != masses.len() {
        return Err(Error::NotFittable(format!("{} radii but {} masses", radii.len(), masses.len())));
    }
    if radii.len() < 3 {
        return Err(Error::NotFittable(format!("need at least 3 points, got {}", radii.len())));
    }
    let floor = 10.0 * f64::EPSILON * m_inf.abs().max(1.0);
    let mut pts = Vec::with_capacity(radii.len());
    for (&r, &m) in radii.iter().zip(masses) {
        let d = (m - m_inf).abs();
        if !(r > 0.0) || !d.is_finite() {
            return Err(Error::NotFittable(format!("invalid point r={r}, m={m}")));
        }
        if d <= floor {
            return Err(Error::NotFittable(format!("|m - m_inf| = {d:e} at r={r} is below the noise floor")));
        }
        pts.push((r.ln(), d.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NotFittable("all radii coincide".into()));
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit { slope, intercept, residual, m_inf, points: pts.len(), noisy: residual > NOISY_RESIDUAL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn exact_inverse_power() {
        let r: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
        let m: Vec<f64> = r.iter().map(|x| 1.0 + 5.0 / x).collect();
        let fit = fit_rate(&r, &m, 1.0).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-10);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-9);
        assert!(!fit.noisy);
    }

    #[test]
    fn standard_schwarzschild_brown_york_series() {
        let r: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
        let m: Vec<f64> = r.iter().map(|x| x * (1.0 - (1.0 - 2.0 / x).sqrt())).collect();
        let fit = fit_rate(&r, &m, 1.0).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn converged_series_is_not_fittable() {
        let r = [10.0, 20.0, 40.0];
        assert!(matches!(fit_rate(&r, &[1.0, 1.0, 1.0 + 1e-12], 1.0), Err(Error::NotFittable(_))));
        assert!(matches!(fit_rate(&r[..2], &[1.1, 1.05], 1.0), Err(Error::NotFittable(_))));
    }

    #[test]
    fn seeded_noise_is_flagged() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let r: Vec<f64> = (0..8).map(|k| 10.0 * 2f64.powi(k)).collect();
        let m: Vec<f64> = r.iter().map(|x| 1.0 + (3.0 / x) * (1.0 + rng.random_range(-0.8..0.8))).collect();
        let fit = fit_rate(&r, &m, 1.0).unwrap();
        assert!(fit.noisy && fit.residual > NOISY_RESIDUAL, "{fit:?}");
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(c in 0.01f64..100.0, p in -3.0f64..-0.2, sign in prop::bool::ANY) {
            let r: [f64; 4] = [5.0, 11.0, 23.0, 50.0];
            let s = if sign { 1.0 } else { -1.0 };
            let m: Vec<f64> = r.iter().map(|x| 2.0 + s * c * x.powf(p)).collect();
            let fit = fit_rate(&r, &m, 2.0).unwrap();
            prop_assert!((fit.slope - p).abs() < 1e-8);
            prop_assert!(fit.residual < 1e-8);
        }
    }
}
