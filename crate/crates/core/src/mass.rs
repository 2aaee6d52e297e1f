//! Hawking and Brown–York masses of closed surfaces.

use std::f64::consts::PI;

use serde::Serialize;

use crate::embedding::{embed, EmbedOptions, IsometricEmbedding};
use crate::error::{Error, Result};
use crate::metric::AfMetric;
use crate::surface::{fundamental_forms, Ambient, FundamentalData, Immersion};

/// `√Area (16π − ∮H²) / (16π)^{3/2}`.
pub fn hawking_mass(fd: &FundamentalData) -> f64 {
    let c = 16.0 * PI;
    fd.area.sqrt() * (c - fd.willmore()) / c.powf(1.5)
}

/// `(1/8π) ∮ (H₀ − H) dσ` with both curvatures on the shared grid.
pub fn brown_york_mass(fd: &FundamentalData, e: &IsometricEmbedding) -> Result<f64> {
    if let Some(n) = fd.gauss_curvature.iter().position(|k| !(*k > 0.0)) {
        return Err(Error::NonPositiveCurvature(n));
    }
    if e.mean_curvature.len() != fd.len() {
        return Err(Error::GridMismatch { expected: fd.len(), got: e.mean_curvature.len() });
    }
    Ok(fd.integrate_with(|k| e.mean_curvature[k] - fd.mean_curvature[k]) / (8.0 * PI))
}

/// One row of a mass table.
#[derive(Debug, Clone, Serialize)]
pub struct MassValues {
    pub r_label: f64,
    pub area: f64,
    pub hawking: f64,
    pub brown_york: Option<f64>,
    pub adm_reference: f64,
    pub embed_residual: Option<f64>,
    /// Markers such as `embedding-failed` or `curvature-threshold`.
    pub flags: Vec<String>,
}

/// Fundamental forms, embedding and both masses of one surface.
pub fn assemble_mass_row(
    s: &Immersion,
    metric: &AfMetric,
    r_label: f64,
    adm_reference: f64,
    opts: &EmbedOptions,
) -> Result<(MassValues, Option<IsometricEmbedding>)> {
    s.check_outside(metric)?;
    let fd = fundamental_forms(s, Ambient::Af(*metric))?;
    let hawking = hawking_mass(&fd);
    let mut flags = Vec::new();
    let (brown_york, embedding) = match embed(s, &fd, opts) {
        Ok(e) => match brown_york_mass(&fd, &e) {
            Ok(m) => (Some(m), Some(e)),
            Err(err) => {
                flags.push(flag_for(&err));
                (None, Some(e))
            }
        },
        Err(err) => {
            flags.push(flag_for(&err));
            (None, None)
        }
    };
    if let Some(e) = &embedding {
        if e.uniformization.is_none() {
            flags.push("uniformization-diagnostic-unavailable".into());
        }
    }
    let row = MassValues {
        r_label,
        area: fd.area,
        hawking,
        brown_york,
        adm_reference,
        embed_residual: embedding.as_ref().map(|e| e.metric_residual),
        flags,
    };
    Ok((row, embedding))
}

fn flag_for(err: &Error) -> String {
    match err {
        Error::RegimeViolation { .. } => "curvature-threshold".into(),
        Error::NonPositiveCurvature(_) => "nonpositive-curvature".into(),
        Error::NonConvex(_) => "not-convex".into(),
        Error::SelfIntersection => "self-intersection".into(),
        _ => "embedding-failed".into(),
    }
}
