use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::forms::{Ambient, FundamentalData};
use crate::surface::immersion::Immersion;

/// Largest log-log growth rate of a scaled quantity still treated as bounded.
pub const BOUNDED_SLOPE: f64 = 0.3;

/// Least-squares slope of `log y` against `log x`; zero entries are skipped.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// A scaled quantity tracked along a family.
#[derive(Debug, Clone, Serialize)]
pub struct ScaledSeries {
    pub values: Vec<f64>,
    pub sup: f64,
    pub slope: f64,
    pub bounded: bool,
}

impl ScaledSeries {
    pub fn new(r: &[f64], values: Vec<f64>) -> Self {
        let sup = values.iter().fold(0.0_f64, |a, b| a.max(*b));
        // Values at roundoff level cannot meaningfully grow.
        let floor = 1e-9 * sup.max(1.0);
        let slope = if sup <= 1e-9 { 0.0 } else { loglog_slope(r, &values.iter().map(|v| v.max(floor)).collect::<Vec<_>>()) };
        ScaledSeries { bounded: slope <= BOUNDED_SLOPE && sup.is_finite(), values, sup, slope }
    }
}

/// Nearly round constants of a family of surfaces.
#[derive(Debug, Clone, Serialize)]
pub struct NearlyRoundReport {
    pub radii: Vec<f64>,
    /// `r^{1+τ}(|Å| + r|∇Å|)`.
    pub umbilicity: ScaledSeries,
    /// `r_max / r_min`.
    pub radial_ratio: ScaledSeries,
    /// `diam / r`.
    pub diameter_ratio: ScaledSeries,
    /// `Area / r²`; its sup and inverse inf give the area pinching constant.
    pub area_ratio: ScaledSeries,
    pub area_pinching: f64,
    /// `r |A|`.
    pub second_form: ScaledSeries,
    pub nearly_round: bool,
}

pub fn nearly_round_diagnostics(family: &[FundamentalData], tau: f64) -> Result<NearlyRoundReport> {
    if family.len() < 3 {
        return Err(Error::InvalidSchedule("nearly round diagnostics need at least three surfaces".into()));
    }
    let radii: Vec<f64> = family.iter().map(|f| f.r_min).collect();
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSchedule("family must have increasing r_min".into()));
    }
    let series = |f: &dyn Fn(&FundamentalData, f64) -> f64| {
        ScaledSeries::new(&radii, family.iter().zip(&radii).map(|(fd, &r)| f(fd, r)).collect())
    };
    let umbilicity =
        series(&|fd, r| r.powf(1.0 + tau) * (fd.sup_traceless() + r * fd.sup_traceless_gradient()));
    let radial_ratio = series(&|fd, _| fd.r_max / fd.r_min);
    let diameter_ratio = series(&|fd, r| fd.diameter / r);
    let area_ratio = series(&|fd, r| fd.area / (r * r));
    let second_form = series(&|fd, r| r * fd.sup_second_form());
    let amin = area_ratio.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let area_pinching = area_ratio.sup.max(1.0 / amin);
    let nearly_round = umbilicity.bounded
        && radial_ratio.bounded
        && diameter_ratio.bounded
        && area_ratio.bounded
        && second_form.bounded;
    Ok(NearlyRoundReport {
        radii,
        umbilicity,
        radial_ratio,
        diameter_ratio,
        area_ratio,
        area_pinching,
        second_form,
        nearly_round,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BestFitSphere {
    pub radius: f64,
    pub center: [f64; 3],
    /// `sup |λ̂_i − 1/r₀|`.
    pub curvature_deviation: f64,
    /// `sup |(y − a) − r₀ n̂|`.
    pub position_deviation: f64,
}

/// `r₀ = 2 / mean(Ĥ)`, `a = mean(y − r₀ n̂)` (area-weighted means).
pub fn best_fit_sphere(fd: &FundamentalData, s: &Immersion) -> Result<BestFitSphere> {
    if fd.ambient != Ambient::Euclidean {
        return Err(Error::InvalidImmersion("best-fit sphere needs Euclidean fundamental data".into()));
    }
    if let Some(n) = fd.mean_curvature.iter().position(|h| !(*h > 0.0)) {
        return Err(Error::NonConvex(n));
    }
    let area = fd.area;
    let r0 = 2.0 * area / fd.total_mean_curvature();
    let mut center = [0.0; 3];
    for n in 0..fd.len() {
        let y = s.position(n);
        for i in 0..3 {
            center[i] += fd.area_weights[n] * (y[i] - r0 * fd.euclidean_normal[n][i]);
        }
    }
    for c in center.iter_mut() {
        *c /= area;
    }
    let mut curvature_deviation = 0.0_f64;
    let mut position_deviation = 0.0_f64;
    for n in 0..fd.len() {
        let (k1, k2) = fd.principal_curvatures(n);
        curvature_deviation = curvature_deviation.max((k1 - 1.0 / r0).abs()).max((k2 - 1.0 / r0).abs());
        let y = s.position(n);
        let d: f64 = (0..3)
            .map(|i| (y[i] - center[i] - r0 * fd.euclidean_normal[n][i]).powi(2))
            .sum::<f64>()
            .sqrt();
        position_deviation = position_deviation.max(d);
    }
    Ok(BestFitSphere { radius: r0, center, curvature_deviation, position_deviation })
}

/// `|∮K dσ − 4π|`.
pub fn gauss_bonnet_defect(fd: &FundamentalData) -> f64 {
    (fd.total_gauss_curvature() - 4.0 * std::f64::consts::PI).abs()
}
