//! Analytic asymptotically flat 3-metrics with exact derivative jets.
//!
//! Every family is written once over [`Scalar`] and evaluated on
//! [`Jet`] seeds, so `dg` and `ddg` are exact (up to roundoff).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::sphere::legendre::real_ylm_cartesian;
use crate::sphere::SphereGrid;

pub type Mat3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

/// A point of the asymptotic chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint(pub [f64; 3]);

impl SpacePoint {
    pub fn norm(&self) -> f64 {
        let x = self.0;
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }
}

/// Metric value with first and second coordinate derivatives:
/// `dg[i][j][k] = d_k g_ij`, `ddg[i][j][k][l] = d_k d_l g_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: Mat3,
    pub dg: Tensor3,
    pub ddg: Tensor4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricFamily {
    Euclidean,
    SchwarzschildIsotropic { m: f64 },
    SchwarzschildStandard { m: f64 },
    KerrSlice { m: f64, a: f64 },
    ConformalPerturbed { m: f64, eps: f64, l: usize, m_order: i64, tau_extra: f64 },
}

/// An asymptotically flat metric of a catalog family together with its decay
/// order and the radius inside which it must not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfMetric {
    family: MetricFamily,
    decay_order: f64,
    exclusion_radius: f64,
}

impl AfMetric {
    pub fn euclidean() -> Self {
        AfMetric { family: MetricFamily::Euclidean, decay_order: 1.0, exclusion_radius: 0.0 }
    }

    pub fn schwarzschild_isotropic(m: f64) -> Result<Self> {
        check_mass(m)?;
        // Horizon sits at rho = m/2.
        Ok(AfMetric {
            family: MetricFamily::SchwarzschildIsotropic { m },
            decay_order: 1.0,
            exclusion_radius: m,
        })
    }

    pub fn schwarzschild_standard(m: f64) -> Result<Self> {
        check_mass(m)?;
        Ok(AfMetric {
            family: MetricFamily::SchwarzschildStandard { m },
            decay_order: 1.0,
            exclusion_radius: 4.0 * m,
        })
    }

    pub fn kerr_slice(m: f64, a: f64) -> Result<Self> {
        check_mass(m)?;
        if !(a.abs() < m) && !(m == 0.0 && a == 0.0) {
            return Err(Error::InvalidMetric(format!("kerr_slice requires |a| < m (a={a}, m={m})")));
        }
        let r_plus = m + (m * m - a * a).sqrt();
        Ok(AfMetric {
            family: MetricFamily::KerrSlice { m, a },
            decay_order: 1.0,
            exclusion_radius: 2.0 * r_plus,
        })
    }

    pub fn conformal_perturbed(m: f64, eps: f64, l: usize, m_order: i64, tau_extra: f64) -> Result<Self> {
        check_mass(m)?;
        if l < 1 {
            return Err(Error::InvalidMetric("conformal_perturbed requires l >= 1".into()));
        }
        if m_order.unsigned_abs() as usize > l {
            return Err(Error::InvalidMetric(format!("|m_order| = {} exceeds l = {l}", m_order.abs())));
        }
        if !(tau_extra > 0.5) || !eps.is_finite() {
            return Err(Error::InvalidMetric("conformal_perturbed requires tau_extra > 1/2".into()));
        }
        let y_bound = std::f64::consts::SQRT_2 * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        let bump = 2.0 * (eps.abs() * y_bound).powf(1.0 / tau_extra);
        Ok(AfMetric {
            family: MetricFamily::ConformalPerturbed { m, eps, l, m_order, tau_extra },
            decay_order: tau_extra.min(1.0),
            exclusion_radius: m.max(bump),
        })
    }

    pub fn family(&self) -> MetricFamily {
        self.family
    }
    pub fn decay_order(&self) -> f64 {
        self.decay_order
    }
    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    /// ADM mass known in closed form for every catalog family.
    pub fn known_adm_mass(&self) -> f64 {
        match self.family {
            MetricFamily::Euclidean => 0.0,
            MetricFamily::SchwarzschildIsotropic { m }
            | MetricFamily::SchwarzschildStandard { m }
            | MetricFamily::KerrSlice { m, .. }
            | MetricFamily::ConformalPerturbed { m, .. } => m,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.family, MetricFamily::Euclidean)
    }

    pub fn check_point(&self, x: SpacePoint) -> Result<()> {
        let r = x.norm();
        if !(r > self.exclusion_radius) || r == 0.0 {
            return Err(Error::InsideExclusion { radius: r, exclusion: self.exclusion_radius });
        }
        Ok(())
    }

    /// Metric components over any scalar type.
    pub fn components<T: Scalar>(&self, x: [T; 3]) -> [[T; 3]; 3] {
        let one = T::constant(1.0);
        let zero = T::constant(0.0);
        let mut g = [[zero; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = one;
        }
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        match self.family {
            MetricFamily::Euclidean => g,
            MetricFamily::SchwarzschildIsotropic { m } => {
                let r = r2.sqrt();
                let phi = r.recip() * (0.5 * m) + 1.0;
                conformal(phi.powi(4))
            }
            MetricFamily::ConformalPerturbed { m, eps, l, m_order, tau_extra } => {
                let r = r2.sqrt();
                let y = real_ylm_cartesian(l, m_order, x);
                let phi = r.recip() * (0.5 * m) + y * r.powf(-tau_extra) * eps + 1.0;
                conformal(phi.powi(4))
            }
            MetricFamily::SchwarzschildStandard { m } => {
                let r = r2.sqrt();
                let c = (r2 * (r - 2.0 * m)).recip() * (2.0 * m);
                for i in 0..3 {
                    for j in 0..3 {
                        g[i][j] = g[i][j] + c * x[i] * x[j];
                    }
                }
                g
            }
            MetricFamily::KerrSlice { m, a } => {
                let r = r2.sqrt();
                let a2 = a * a;
                let n = [x[0] / r, x[1] / r, x[2] / r];
                let sigma = r2 + x[2] * x[2] / r2 * a2;
                let delta = r2 - r * (2.0 * m) + a2;
                let radial = sigma / delta - 1.0;
                // s dtheta = (z dr / r - dz) / r
                let zr = x[2] / r;
                let th = [n[0] * zr / r, n[1] * zr / r, (n[2] * zr - 1.0) / r];
                // s^2 dphi = (x dy - y dx) / r^2
                let ph = [-x[1] / r2, x[0] / r2, zero];
                let rot = r * (2.0 * m * a2) / sigma;
                let iso = r2.recip() * a2;
                for i in 0..3 {
                    for j in 0..3 {
                        let proj = if i == j { one - n[i] * n[j] } else { -(n[i] * n[j]) };
                        g[i][j] = g[i][j] + radial * n[i] * n[j] - th[i] * th[j] * a2
                            + iso * proj
                            + rot * ph[i] * ph[j];
                    }
                }
                g
            }
        }
    }

    pub fn evaluate_jet(&self, x: SpacePoint) -> Result<MetricJet> {
        self.check_point(x)?;
        Ok(self.jet_unchecked(x.0))
    }

    pub(crate) fn jet_unchecked(&self, x: [f64; 3]) -> MetricJet {
        let comps = self.components(Jet::seeds(x));
        let mut jet = MetricJet { g: [[0.0; 3]; 3], dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] };
        for i in 0..3 {
            for j in 0..3 {
                let c = comps[i][j];
                jet.g[i][j] = c.v;
                jet.dg[i][j] = c.g;
                jet.ddg[i][j] = c.h;
            }
        }
        jet
    }

    pub fn scalar_curvature(&self, x: SpacePoint) -> Result<f64> {
        Ok(scalar_curvature(&self.evaluate_jet(x)?))
    }

    /// Canonical key-value spelling, e.g. `kerr_slice m=1 a=0.5`.
    pub fn spec_string(&self) -> String {
        self.to_string()
    }
}

fn check_mass(m: f64) -> Result<()> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidMetric(format!("mass must be finite and non-negative, got {m}")));
    }
    Ok(())
}

fn conformal<T: Scalar>(f: T) -> [[T; 3]; 3] {
    let zero = T::constant(0.0);
    let mut g = [[zero; 3]; 3];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = f;
    }
    g
}

impl fmt::Display for AfMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            MetricFamily::Euclidean => write!(f, "euclidean"),
            MetricFamily::SchwarzschildIsotropic { m } => write!(f, "schwarzschild_isotropic m={m}"),
            MetricFamily::SchwarzschildStandard { m } => write!(f, "schwarzschild_standard m={m}"),
            MetricFamily::KerrSlice { m, a } => write!(f, "kerr_slice m={m} a={a}"),
            MetricFamily::ConformalPerturbed { m, eps, l, m_order, tau_extra } => write!(
                f,
                "conformal_perturbed m={m} eps={eps} l={l} m_order={m_order} tau_extra={tau_extra}"
            ),
        }
    }
}

impl FromStr for AfMetric {
    type Err = Error;

    /// Grammar: `<family> [key=value]...`, whitespace separated.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts.next().ok_or_else(|| Error::Config("empty metric spec".into()))?;
        let mut params = std::collections::BTreeMap::new();
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in metric spec, got '{kv}'")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("metric parameter {k} is not a number: '{v}'")))?;
            params.insert(k.to_string(), v);
        }
        let mut take = |k: &str, default: Option<f64>| -> Result<f64> {
            params
                .remove(k)
                .or(default)
                .ok_or_else(|| Error::Config(format!("metric {name} requires parameter {k}")))
        };
        let metric = match name {
            "euclidean" => AfMetric::euclidean(),
            "schwarzschild_isotropic" => AfMetric::schwarzschild_isotropic(take("m", None)?)?,
            "schwarzschild_standard" => AfMetric::schwarzschild_standard(take("m", None)?)?,
            "kerr_slice" => AfMetric::kerr_slice(take("m", None)?, take("a", None)?)?,
            "conformal_perturbed" => AfMetric::conformal_perturbed(
                take("m", None)?,
                take("eps", None)?,
                take("l", None)? as usize,
                take("m_order", Some(0.0))? as i64,
                take("tau_extra", Some(1.0))?,
            )?,
            other => return Err(Error::Config(format!("unknown metric family '{other}'"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(Error::Config(format!("unknown parameter '{k}' for metric {name}")));
        }
        Ok(metric)
    }
}

pub fn invert3(g: &Mat3) -> Mat3 {
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (g[1][1] * g[2][2] - g[1][2] * g[2][1]) / det;
    inv[0][1] = (g[0][2] * g[2][1] - g[0][1] * g[2][2]) / det;
    inv[0][2] = (g[0][1] * g[1][2] - g[0][2] * g[1][1]) / det;
    inv[1][0] = (g[1][2] * g[2][0] - g[1][0] * g[2][2]) / det;
    inv[1][1] = (g[0][0] * g[2][2] - g[0][2] * g[2][0]) / det;
    inv[1][2] = (g[0][2] * g[1][0] - g[0][0] * g[1][2]) / det;
    inv[2][0] = (g[1][0] * g[2][1] - g[1][1] * g[2][0]) / det;
    inv[2][1] = (g[0][1] * g[2][0] - g[0][0] * g[2][1]) / det;
    inv[2][2] = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) / det;
    inv
}

/// `Γ^k_ij`, indexed `[k][i][j]`.
pub fn christoffel(jet: &MetricJet) -> Tensor3 {
    let ginv = invert3(&jet.g);
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += ginv[k][l] * (jet.dg[i][l][j] + jet.dg[j][l][i] - jet.dg[i][j][l]);
                }
                gamma[k][i][j] = 0.5 * s;
                gamma[k][j][i] = 0.5 * s;
            }
        }
    }
    gamma
}

/// `d_m Γ^k_ij`, indexed `[k][i][j][m]`.
pub fn christoffel_derivative(jet: &MetricJet) -> Tensor4 {
    let ginv = invert3(&jet.g);
    let mut dginv = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            for m in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s -= ginv[k][a] * jet.dg[a][b][m] * ginv[b][l];
                    }
                }
                dginv[k][l][m] = s;
            }
        }
    }
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..3 {
                    let mut s = 0.0;
                    for l in 0..3 {
                        let first = jet.dg[i][l][j] + jet.dg[j][l][i] - jet.dg[i][j][l];
                        let second = jet.ddg[i][l][j][m] + jet.ddg[j][l][i][m] - jet.ddg[i][j][l][m];
                        s += dginv[k][l][m] * first + ginv[k][l] * second;
                    }
                    out[k][i][j][m] = 0.5 * s;
                }
            }
        }
    }
    out
}

/// `R^i_jkl` with `R(d_k, d_l) d_j = R^i_jkl d_i`, indexed `[i][j][k][l]`.
pub fn riemann(jet: &MetricJet) -> Tensor4 {
    let gam = christoffel(jet);
    let dgam = christoffel_derivative(jet);
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut s = dgam[i][l][j][k] - dgam[i][k][j][l];
                    for m in 0..3 {
                        s += gam[i][k][m] * gam[m][l][j] - gam[i][l][m] * gam[m][k][j];
                    }
                    r[i][j][k][l] = s;
                }
            }
        }
    }
    r
}

/// `Rm(X, Y, Y, X)` for ambient vectors.
pub fn curvature_form(jet: &MetricJet, riem: &Tensor4, x: [f64; 3], y: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let mut ri = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    ri += riem[i][j][k][l] * y[j] * x[k] * y[l];
                }
            }
        }
        for p in 0..3 {
            s += jet.g[i][p] * ri * x[p];
        }
    }
    s
}

pub fn scalar_curvature(jet: &MetricJet) -> f64 {
    let riem = riemann(jet);
    let ginv = invert3(&jet.g);
    let mut s = 0.0;
    for j in 0..3 {
        for l in 0..3 {
            let ric: f64 = (0..3).map(|k| riem[k][j][k][l]).sum();
            s += ginv[j][l] * ric;
        }
    }
    s
}

/// `(1/16π) ∮_{S_r} (g_ij,i − g_ii,j) ν^j dσ⁰` over the Euclidean coordinate sphere.
pub fn adm_surface_integral(metric: &AfMetric, r: f64, grid: &SphereGrid) -> Result<f64> {
    metric.check_point(SpacePoint([r, 0.0, 0.0]))?;
    let f = grid.map(|n| {
        let w = grid.unit_vector(n);
        let x = [r * w[0], r * w[1], r * w[2]];
        let jet = metric.jet_unchecked(x);
        let mut s = 0.0;
        for j in 0..3 {
            let mut t = 0.0;
            for i in 0..3 {
                t += jet.dg[i][j][i] - jet.dg[i][i][j];
            }
            s += t * w[j];
        }
        s
    });
    Ok(grid.integrate(&f) * r * r / (16.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxValue {
    pub value: f64,
    pub refined: f64,
    pub underresolved: bool,
}

/// Flux at band limit `L`, cross-checked at `2L`.
pub fn adm_flux_checked(metric: &AfMetric, r: f64, band_limit: usize, tol: f64) -> Result<FluxValue> {
    let value = adm_surface_integral(metric, r, &SphereGrid::new(band_limit)?)?;
    let refined = adm_surface_integral(metric, r, &SphereGrid::new(2 * band_limit)?)?;
    let underresolved = (value - refined).abs() > tol * refined.abs().max(1e-300) && (value - refined).abs() > tol;
    if underresolved {
        log::warn!("ADM flux at r={r} underresolved at L={band_limit}: {value} vs {refined}");
    }
    Ok(FluxValue { value, refined, underresolved })
}

/// Richardson-extrapolated limit of a series `f(r) ≈ c0 + c1 r^{-p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub error_estimate: f64,
    pub exponent: f64,
    pub residual: f64,
    pub monotone_tail: bool,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (icpt, slope, (rss / n).sqrt())
}

pub fn richardson(radii: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if radii.len() < 3 || radii.len() != values.len() {
        return Err(Error::InvalidSchedule("need at least three (r, value) pairs".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSchedule("radii must be strictly increasing".into()));
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone_tail = diffs.windows(2).all(|d| d[0] * d[1] >= 0.0 && d[1].abs() <= d[0].abs());
    if !monotone_tail {
        log::warn!("flux series does not approach a limit monotonically: {values:?}");
    }
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
    let spread = values.iter().fold(0.0_f64, |a, v| a.max((v - values[0]).abs()));
    if spread <= 1e-14 * scale || spread < 1e-300 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        return Ok(Extrapolation { value: mean, error_estimate: spread, exponent: 0.0, residual: 0.0, monotone_tail });
    }
    let fit_at = |p: f64| {
        let xs: Vec<f64> = radii.iter().map(|r| r.powf(-p)).collect();
        linear_fit(&xs, values)
    };
    // Coarse scan followed by golden-section refinement of the exponent.
    let mut best = (0.05, f64::INFINITY);
    let mut p = 0.05;
    while p <= 6.0 {
        let (_, _, res) = fit_at(p);
        if res < best.1 {
            best = (p, res);
        }
        p += 0.05;
    }
    let (mut a, mut b) = ((best.0 - 0.05).max(0.01), best.0 + 0.05);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if fit_at(c).2 < fit_at(d).2 {
            b = d;
        } else {
            a = c;
        }
    }
    let p = 0.5 * (a + b);
    let (c0, _, residual) = fit_at(p);
    let last = *values.last().unwrap();
    let ratio = (radii[radii.len() - 1] / radii[0]).powf(-p);
    let power_error = residual + (c0 - last).abs() * ratio;
    // Analytic tails in 1/r are captured exactly by polynomial extrapolation;
    // the estimate compares it with the same scheme on one point fewer.
    let h: Vec<f64> = radii.iter().map(|r| r.recip()).collect();
    let poly = neville_at_zero(&h, values);
    let poly_error = (poly - neville_at_zero(&h[1..], &values[1..])).abs();
    let (value, error_estimate) = if poly_error < power_error { (poly, poly_error) } else { (c0, power_error) };
    Ok(Extrapolation { value, error_estimate, exponent: p, residual, monotone_tail })
}

/// Value at `x = 0` of the interpolating polynomial through `(x_i, y_i)`.
fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// ADM mass from fluxes over a radius schedule, Richardson-extrapolated.
pub fn adm_mass(metric: &AfMetric, schedule: &[f64], band_limit: usize) -> Result<Extrapolation> {
    if schedule.len() < 3 {
        return Err(Error::InvalidSchedule("adm_mass needs at least three radii".into()));
    }
    let grid = SphereGrid::new(band_limit)?;
    let fluxes = schedule
        .iter()
        .map(|&r| adm_surface_integral(metric, r, &grid))
        .collect::<Result<Vec<_>>>()?;
    richardson(schedule, &fluxes)
}

/// Sup over random samples in `[r, 2r)` of `|σ| r^τ`, `|∂σ| r^{1+τ}`, `|∂∂σ| r^{2+τ}`.
pub fn decay_constants(metric: &AfMetric, r: f64, samples: usize, seed: u64) -> Result<[f64; 3]> {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tau = metric.decay_order();
    let mut out = [0.0_f64; 3];
    for _ in 0..samples {
        let z: f64 = rng.random_range(-1.0..1.0);
        let ph: f64 = rng.random_range(0.0..2.0 * PI);
        let rad: f64 = rng.random_range(r..2.0 * r);
        let s = (1.0 - z * z).sqrt();
        let x = SpacePoint([rad * s * ph.cos(), rad * s * ph.sin(), rad * z]);
        let jet = metric.evaluate_jet(x)?;
        let (mut a, mut b, mut c) = (0.0_f64, 0.0_f64, 0.0_f64);
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                a = a.max((jet.g[i][j] - delta).abs());
                for k in 0..3 {
                    b = b.max(jet.dg[i][j][k].abs());
                    for l in 0..3 {
                        c = c.max(jet.ddg[i][j][k][l].abs());
                    }
                }
            }
        }
        out[0] = out[0].max(a * rad.powf(tau));
        out[1] = out[1].max(b * rad.powf(1.0 + tau));
        out[2] = out[2].max(c * rad.powf(2.0 + tau));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_metrics() -> Vec<AfMetric> {
        vec![
            AfMetric::euclidean(),
            AfMetric::schwarzschild_isotropic(1.0).unwrap(),
            AfMetric::schwarzschild_standard(1.0).unwrap(),
            AfMetric::kerr_slice(1.0, 0.5).unwrap(),
            AfMetric::conformal_perturbed(1.0, 0.1, 2, 1, 1.0).unwrap(),
        ]
    }

    #[test]
    fn euclidean_jet_is_trivial() {
        let jet = AfMetric::euclidean().evaluate_jet(SpacePoint([3.0, -1.0, 2.0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(jet.g[i][j], if i == j { 1.0 } else { 0.0 });
                assert!(jet.dg[i][j].iter().all(|v| *v == 0.0));
            }
        }
        let gam = christoffel(&jet);
        assert!(gam.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn isotropic_conformal_factor() {
        let jet = AfMetric::schwarzschild_isotropic(2.0).unwrap().evaluate_jet(SpacePoint([10.0, 0.0, 0.0])).unwrap();
        assert!((jet.g[0][0] - 1.4641).abs() < 1e-12);
    }

    #[test]
    fn isotropic_christoffel_matches_symbolic_form() {
        // Γ^k_ij = (2/φ)(δ_ki ∂_jφ + δ_kj ∂_iφ − δ_ij ∂_kφ) for g = φ⁴δ.
        let m = 1.0;
        let x = [5.0, 0.0, 0.0];
        let jet = AfMetric::schwarzschild_isotropic(m).unwrap().evaluate_jet(SpacePoint(x)).unwrap();
        let gam = christoffel(&jet);
        let r: f64 = 5.0;
        let phi = 1.0 + m / (2.0 * r);
        let dphi = [-m / (2.0 * r * r) * x[0] / r, 0.0, 0.0];
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let expect = 2.0 / phi * (d(k, i) * dphi[j] + d(k, j) * dphi[i] - d(i, j) * dphi[k]);
                    let err = (gam[k][i][j] - expect).abs();
                    assert!(err <= 1e-12 * expect.abs().max(1e-300) || err < 1e-16, "{k}{i}{j}");
                }
                assert_eq!(gam[k][i][0], gam[k][0][i]);
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let x = [13.0, -7.0, 9.0];
        for metric in all_metrics() {
            let jet = metric.jet_unchecked(x);
            for h in [1e-2, 5e-3] {
                for k in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    let mut xp2 = x;
                    let mut xm2 = x;
                    xp[k] += h;
                    xm[k] -= h;
                    xp2[k] += 2.0 * h;
                    xm2[k] -= 2.0 * h;
                    let (gp, gm, gp2, gm2) = (
                        metric.jet_unchecked(xp),
                        metric.jet_unchecked(xm),
                        metric.jet_unchecked(xp2),
                        metric.jet_unchecked(xm2),
                    );
                    for i in 0..3 {
                        for j in 0..3 {
                            let fd = (8.0 * (gp.g[i][j] - gm.g[i][j]) - (gp2.g[i][j] - gm2.g[i][j])) / (12.0 * h);
                            assert!((fd - jet.dg[i][j][k]).abs() < 1e-9, "{metric} dg {i}{j}{k}");
                            for l in 0..3 {
                                let fd2 = (8.0 * (gp.dg[i][j][l] - gm.dg[i][j][l])
                                    - (gp2.dg[i][j][l] - gm2.dg[i][j][l]))
                                    / (12.0 * h);
                                assert!((fd2 - jet.ddg[i][j][l][k]).abs() < 1e-9, "{metric} ddg");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn kerr_reduces_to_standard_schwarzschild() {
        let k = AfMetric::kerr_slice(1.0, 0.0).unwrap();
        let s = AfMetric::schwarzschild_standard(1.0).unwrap();
        let x = [6.0, 8.0, -3.0];
        let (a, b) = (k.jet_unchecked(x), s.jet_unchecked(x));
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.g[i][j] - b.g[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn kerr_matches_boyer_lindquist_components() {
        // Independent check: pull the Cartesian metric back to (r, θ, φ).
        let (m, a) = (1.0, 0.5);
        let metric = AfMetric::kerr_slice(m, a).unwrap();
        let (r, th, ph): (f64, f64, f64) = (12.0, 0.8, 1.3);
        let x = [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
        let g = metric.jet_unchecked(x).g;
        let e_r = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let e_t = [r * th.cos() * ph.cos(), r * th.cos() * ph.sin(), -r * th.sin()];
        let e_p = [-r * th.sin() * ph.sin(), r * th.sin() * ph.cos(), 0.0];
        let form = |u: [f64; 3], v: [f64; 3]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += g[i][j] * u[i] * v[j];
                }
            }
            s
        };
        let sigma = r * r + a * a * th.cos().powi(2);
        let delta = r * r - 2.0 * m * r + a * a;
        let gpp = th.sin().powi(2) / sigma * ((r * r + a * a).powi(2) - a * a * delta * th.sin().powi(2));
        assert!((form(e_r, e_r) - sigma / delta).abs() < 1e-12);
        assert!((form(e_t, e_t) - sigma).abs() < 1e-10);
        assert!((form(e_p, e_p) - gpp).abs() < 1e-10);
        assert!(form(e_r, e_t).abs() < 1e-12 && form(e_r, e_p).abs() < 1e-12 && form(e_t, e_p).abs() < 1e-10);
    }

    #[test]
    fn kerr_sigma_decays_like_inverse_radius() {
        let metric = AfMetric::kerr_slice(1.0, 0.5).unwrap();
        let c: Vec<f64> = [20.0, 40.0, 80.0]
            .iter()
            .map(|&r| decay_constants(&metric, r, 50, 3).unwrap()[0])
            .collect();
        assert!(c.iter().all(|v| *v < 5.0), "{c:?}");
        assert!(c[2] <= 1.2 * c[0]);
    }

    #[test]
    fn decay_audit_bounded_on_dyadic_shells() {
        for metric in all_metrics() {
            let shells: Vec<[f64; 3]> = [16.0, 32.0, 64.0, 128.0]
                .iter()
                .map(|&r| decay_constants(&metric, r, 100, 11).unwrap())
                .collect();
            for k in 0..3 {
                let hi = shells.iter().map(|s| s[k]).fold(0.0, f64::max);
                let last = shells[3][k];
                assert!(hi < 50.0, "{metric}: {shells:?}");
                assert!(last <= 1.5 * shells[0][k] + 1e-12, "{metric} not decaying: {shells:?}");
            }
        }
    }

    #[test]
    fn scalar_curvature_of_isotropic_slice_vanishes() {
        let metric = AfMetric::schwarzschild_isotropic(1.0).unwrap();
        for x in [[3.0, 1.0, -2.0], [10.0, 0.0, 0.0], [0.5, 4.0, 7.0]] {
            assert!(metric.scalar_curvature(SpacePoint(x)).unwrap().abs() < 1e-10);
        }
        assert_eq!(AfMetric::euclidean().scalar_curvature(SpacePoint([1.0, 2.0, 3.0])).unwrap(), 0.0);
    }

    #[test]
    fn scalar_curvature_sign_on_three_sphere() {
        // g = 4/(1+r²)² δ is the unit round 3-sphere: R = 6.
        let x = [0.3, -0.2, 0.5];
        let comps = {
            let s = Jet::seeds(x);
            let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
            let f = (r2 + 1.0).powi(-2) * 4.0;
            conformal(f)
        };
        let mut jet = MetricJet { g: [[0.0; 3]; 3], dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] };
        for i in 0..3 {
            for j in 0..3 {
                jet.g[i][j] = comps[i][j].v;
                jet.dg[i][j] = comps[i][j].g;
                jet.ddg[i][j] = comps[i][j].h;
            }
        }
        assert!((scalar_curvature(&jet) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn kerr_scalar_curvature_decays() {
        let metric = AfMetric::kerr_slice(1.0, 0.5).unwrap();
        let vals: Vec<f64> = [20.0_f64, 40.0, 80.0]
            .iter()
            .map(|&r| {
                let x = SpacePoint([r * 0.6, 0.0, r * 0.8]);
                metric.scalar_curvature(x).unwrap().abs() * r.powi(4)
            })
            .collect();
        assert!(vals.iter().all(|v| *v < 100.0), "{vals:?}");
    }

    #[test]
    fn metric_compatibility_through_the_jet() {
        // ∂_k g_ij = Γ^l_ki g_lj + Γ^l_kj g_il
        let metric = AfMetric::kerr_slice(1.0, 0.5).unwrap();
        let jet = metric.jet_unchecked([7.0, -4.0, 5.0]);
        let gam = christoffel(&jet);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut rhs = 0.0;
                    for l in 0..3 {
                        rhs += gam[l][k][i] * jet.g[l][j] + gam[l][k][j] * jet.g[i][l];
                    }
                    assert!((rhs - jet.dg[i][j][k]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn exclusion_radius_enforced() {
        let metric = AfMetric::schwarzschild_standard(1.0).unwrap();
        assert!(matches!(
            metric.evaluate_jet(SpacePoint([3.0, 0.0, 0.0])),
            Err(Error::InsideExclusion { .. })
        ));
        assert!(AfMetric::kerr_slice(1.0, 1.0).is_err());
        assert!(AfMetric::conformal_perturbed(1.0, 0.1, 0, 0, 1.0).is_err());
    }

    #[test]
    fn spec_string_roundtrip() {
        for metric in all_metrics() {
            let parsed: AfMetric = metric.spec_string().parse().unwrap();
            assert_eq!(parsed, metric);
        }
        assert!("kerr_slice m=1".parse::<AfMetric>().is_err());
        assert!("warp_drive".parse::<AfMetric>().is_err());
        assert!("euclidean q=1".parse::<AfMetric>().is_err());
    }

    #[test]
    fn flux_euclidean_is_zero() {
        let g = SphereGrid::new(8).unwrap();
        assert_eq!(adm_surface_integral(&AfMetric::euclidean(), 10.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn flux_isotropic_closed_form() {
        let g = SphereGrid::new(16).unwrap();
        let metric = AfMetric::schwarzschild_isotropic(1.0).unwrap();
        let f = adm_surface_integral(&metric, 100.0, &g).unwrap();
        assert!((f - 1.005f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn flux_invariant_under_chart_rotation() {
        // Rotating the chart is the same as evaluating the flux of the
        // rotated perturbation; compare m_order = 1 against m_order = -1
        // (a 90 degree rotation about z of Y_{2,±1}... up to sign).
        let g = SphereGrid::new(24).unwrap();
        let a = AfMetric::conformal_perturbed(1.0, 0.1, 2, 1, 1.0).unwrap();
        let b = AfMetric::conformal_perturbed(1.0, 0.1, 2, -1, 1.0).unwrap();
        let fa = adm_surface_integral(&a, 30.0, &g).unwrap();
        let fb = adm_surface_integral(&b, 30.0, &g).unwrap();
        assert!((fa - fb).abs() < 1e-12);
    }

    #[test]
    fn richardson_exact_power_law() {
        let r = [50.0, 100.0, 200.0];
        let v: Vec<f64> = r.iter().map(|x| 2.0 + 3.0 * x.powf(-1.5)).collect();
        let e = richardson(&r, &v).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9);
        assert!((e.exponent - 1.5).abs() < 1e-5);
    }

    #[test]
    fn richardson_is_exact_on_polynomials_in_inverse_radius() {
        let r = [10.0, 20.0, 40.0, 80.0];
        let v: Vec<f64> = r.iter().map(|x| (1.0 + 0.5 / x).powi(3)).collect();
        assert!((richardson(&r, &v).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_flags_oscillating_tail() {
        let r = [10.0, 20.0, 40.0, 80.0];
        let v = [1.0, 1.1, 0.95, 1.2];
        assert!(!richardson(&r, &v).unwrap().monotone_tail);
    }
}
