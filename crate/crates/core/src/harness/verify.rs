use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{FaultInjection, StudyConfig};
use super::report::{Check, CheckStatus, Metadata, VerifyReport};
use super::{adm_reference, embed_options, seeded_index};
use crate::embedding::{embed, IsometricEmbedding};
use crate::error::Result;
use crate::mass::{brown_york_mass, hawking_mass};
use crate::metric::{adm_flux_checked, decay_constants, MetricFamily};
use crate::sphere::SphereGrid;
use crate::surface::diagnostics::ScaledSeries;
use crate::surface::identities::{expansion_from, integral_from, second_form_relation_from};
use crate::surface::{fundamental_forms, lemma24_residual, nearly_round_diagnostics, Ambient, FundamentalData};

/// Samples per radius for the metric decay constants.
const DECAY_SAMPLES: usize = 64;

/// Everything measured on one surface at one band limit.
struct Sample {
    curved: FundamentalData,
    gauss_bonnet: f64,
    algebraic: f64,
    second_form: f64,
    divergence: f64,
    expansion: f64,
    integral: f64,
    hawking: f64,
    brown_york: Option<f64>,
    embedding: std::result::Result<IsometricEmbedding, String>,
}

fn measure(cfg: &StudyConfig, grid: &SphereGrid, r: f64) -> Result<Sample> {
    let s = cfg.family.surface(grid, r, &cfg.metric)?;
    let hat = fundamental_forms(&s, Ambient::Euclidean)?;
    let curved = fundamental_forms(&s, Ambient::Af(cfg.metric))?;
    let integral = integral_from(&hat, &curved, &cfg.metric);
    let embedding = embed(&s, &curved, &embed_options(cfg)).map_err(|e| e.to_string());
    let brown_york = embedding.as_ref().ok().and_then(|e| brown_york_mass(&curved, e).ok());
    Ok(Sample {
        hawking: hawking_mass(&curved),
        brown_york,
        gauss_bonnet: (curved.total_gauss_curvature() - 4.0 * PI).abs(),
        algebraic: lemma24_residual(&s)?.algebraic,
        second_form: second_form_relation_from(&hat, &curved, &cfg.metric),
        divergence: integral.divergence_residual,
        expansion: expansion_from(&hat, &curved, &cfg.metric),
        integral: integral.scaled_residual,
        embedding,
        curved,
    })
}

fn minkowski(s: &Sample) -> std::result::Result<f64, String> {
    s.embedding.as_ref().map(|e| {
        let m = e.minkowski_residuals();
        m.rho1.max(m.rho2)
    }).map_err(Clone::clone)
}

fn threshold(name: String, value: f64, refined: f64, tol: f64) -> Check {
    let status = if value <= tol {
        CheckStatus::Pass
    } else if refined <= tol {
        CheckStatus::Underresolved
    } else {
        CheckStatus::Fail
    };
    Check { name, value, tolerance: tol, status, note: format!("refined {refined:e}") }
}

/// Residual must shrink by `factor` on doubling the band limit unless both
/// sit at the roundoff floor.
fn refinement(name: String, coarse: f64, fine: f64, factor: f64, floor: f64) -> Check {
    let ok = fine <= coarse / factor || (fine <= floor && coarse <= floor);
    let ratio = if coarse > 0.0 { fine / coarse } else { 0.0 };
    Check {
        name,
        value: ratio,
        tolerance: 1.0 / factor,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        note: format!("coarse {coarse:e} fine {fine:e}"),
    }
}

/// Change of a quantity between `L` and `2L`.
fn resolution(name: String, gap: f64, tol: f64) -> Check {
    Check {
        name,
        value: gap,
        tolerance: tol,
        status: if gap <= tol { CheckStatus::Pass } else { CheckStatus::Underresolved },
        note: "change under band-limit doubling".into(),
    }
}

fn bounded(name: &str, radii: &[f64], values: Vec<f64>, slope_tol: f64) -> Check {
    let series = ScaledSeries::new(radii, values);
    Check {
        name: name.to_string(),
        value: series.slope,
        tolerance: slope_tol,
        status: if series.slope <= slope_tol && series.sup.is_finite() { CheckStatus::Pass } else { CheckStatus::Fail },
        note: format!("sup {:e}", series.sup),
    }
}

/// Runs every check on the family at `L` and `2L`.
pub fn run_verify(cfg: &StudyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let tol = cfg.tolerances;
    let coarse_grid = SphereGrid::new(cfg.band_limit)?;
    let fine_grid = SphereGrid::new(2 * cfg.band_limit)?;
    let adm = adm_reference(cfg)?;
    let samples: Vec<(Sample, Sample)> = cfg
        .schedule
        .par_iter()
        .map(|&r| Ok((measure(cfg, &coarse_grid, r)?, measure(cfg, &fine_grid, r)?)))
        .collect::<Result<Vec<_>>>()?;
    let radii = &cfg.schedule;
    let mut checks = Vec::new();

    for (&r, (c, f)) in radii.iter().zip(&samples) {
        checks.push(threshold(format!("gauss_bonnet r={r}"), c.gauss_bonnet, f.gauss_bonnet, tol.gauss_bonnet));
        checks.push(threshold(format!("distance_hessian_algebraic r={r}"), c.algebraic, f.algebraic, tol.algebraic));
        checks.push(refinement(
            format!("second_form_comparison_refinement r={r}"),
            c.second_form,
            f.second_form,
            tol.refinement_factor,
            tol.roundoff_floor,
        ));
        checks.push(refinement(
            format!("divergence_identity_refinement r={r}"),
            c.divergence,
            f.divergence,
            tol.refinement_factor,
            tol.roundoff_floor,
        ));
        match (minkowski(c), minkowski(f)) {
            (Ok(a), Ok(b)) => checks.push(threshold(format!("minkowski r={r}"), a, b, tol.minkowski)),
            (Err(e), refined) => checks.push(Check {
                name: format!("minkowski r={r}"),
                value: f64::NAN,
                tolerance: tol.minkowski,
                status: if refined.is_ok_and(|b| b <= tol.minkowski) { CheckStatus::Underresolved } else { CheckStatus::Fail },
                note: format!("embedding failed: {e}"),
            }),
            (Ok(a), Err(e)) => checks.push(Check {
                name: format!("minkowski r={r}"),
                value: a,
                tolerance: tol.minkowski,
                status: CheckStatus::Fail,
                note: format!("refined embedding failed: {e}"),
            }),
        }
        let hawking_gap = (c.hawking - f.hawking).abs();
        checks.push(resolution(format!("hawking_resolved r={r}"), hawking_gap, tol.mass_resolution));
        if let (Some(a), Some(b)) = (c.brown_york, f.brown_york) {
            checks.push(resolution(format!("brown_york_resolved r={r}"), (a - b).abs(), tol.mass_resolution));
        }
        let flux = adm_flux_checked(&cfg.metric, r, cfg.band_limit, 1e-10)?;
        checks.push(Check {
            name: format!("adm_flux_resolved r={r}"),
            value: (flux.value - flux.refined).abs(),
            tolerance: 1e-10,
            status: if flux.underresolved { CheckStatus::Underresolved } else { CheckStatus::Pass },
            note: format!("flux {} refined {}", flux.value, flux.refined),
        });
    }

    let coarse: Vec<&Sample> = samples.iter().map(|p| &p.0).collect();
    let fds: Vec<FundamentalData> = coarse.iter().map(|s| s.curved.clone()).collect();
    let tau = cfg.metric.decay_order();
    let slope = tol.bounded_slope;
    match nearly_round_diagnostics(&fds, tau) {
        Ok(rep) => {
            for (name, s) in [
                ("nearly_round.umbilicity", &rep.umbilicity),
                ("nearly_round.radial_ratio", &rep.radial_ratio),
                ("nearly_round.diameter_ratio", &rep.diameter_ratio),
                ("nearly_round.area_ratio", &rep.area_ratio),
                ("nearly_round.second_form", &rep.second_form),
            ] {
                checks.push(Check {
                    name: name.into(),
                    value: s.slope,
                    tolerance: slope,
                    status: if s.bounded && s.slope <= slope { CheckStatus::Pass } else { CheckStatus::Fail },
                    note: format!("sup {:e}", s.sup),
                });
            }
        }
        Err(e) => checks.push(Check {
            name: "nearly_round".into(),
            value: f64::NAN,
            tolerance: slope,
            status: CheckStatus::Fail,
            note: e.to_string(),
        }),
    }
    let r_in: Vec<f64> = fds.iter().map(|f| f.r_min).collect();
    checks.push(bounded("expansion_residual_bounded", &r_in, coarse.iter().map(|s| s.expansion).collect(), slope));
    checks.push(bounded("integral_identity_bounded", &r_in, coarse.iter().map(|s| s.integral).collect(), slope));

    let decay = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| decay_constants(&cfg.metric, r, DECAY_SAMPLES, cfg.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    for (k, name) in ["metric_decay_c0", "metric_decay_c1", "metric_decay_c2"].iter().enumerate() {
        checks.push(bounded(name, radii, decay.iter().map(|d| d[k]).collect(), slope));
    }

    let bounds: Vec<_> = coarse.iter().filter_map(|s| s.embedding.as_ref().ok().map(|e| (e.r_label, e.bounds))).collect();
    if bounds.len() == coarse.len() {
        let rb: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        checks.push(bounded("embedding_mean_curvature_bound", &rb, bounds.iter().map(|b| b.1.mean_curvature).collect(), slope));
        checks.push(bounded("embedding_support_bound", &rb, bounds.iter().map(|b| b.1.support).collect(), slope));
    }

    if cfg.family.is_centered_sphere() {
        let h = coarse
            .iter()
            .zip(radii)
            .map(|(s, &r)| r * r * s.curved.mean_curvature.iter().fold(0.0_f64, |a, h| a.max((h - 2.0 / r).abs())))
            .collect();
        checks.push(bounded("mean_curvature_leading_order", radii, h, slope));
        if matches!(cfg.metric.family(), MetricFamily::KerrSlice { .. }) {
            let a: Vec<f64> = coarse.iter().zip(radii).map(|(s, &r)| r.powi(3) * s.curved.sup_traceless()).collect();
            let hi = a.iter().cloned().fold(0.0_f64, f64::max);
            let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
            checks.push(Check {
                name: "kerr_traceless_decay".into(),
                value: spread,
                tolerance: tol.decay_spread,
                status: if spread <= tol.decay_spread { CheckStatus::Pass } else { CheckStatus::Fail },
                note: format!("sup r^3|traceless| = {hi:e}"),
            });
        }
    }

    let adm_gap = (adm.value - adm.closed_form).abs();
    checks.push(Check {
        name: "adm_extrapolation".into(),
        value: adm_gap,
        tolerance: tol.adm,
        status: if adm_gap <= tol.adm { CheckStatus::Pass } else { CheckStatus::Fail },
        note: format!("extrapolated {} closed form {}", adm.value, adm.closed_form),
    });

    if cfg.fault == FaultInjection::Check {
        let i = seeded_index(cfg.seed, checks.len());
        checks[i].status = CheckStatus::Fail;
        checks[i].note = format!("injected fault; {}", checks[i].note);
    }
    Ok(VerifyReport { metadata: Metadata::new("verify", cfg, &adm), checks })
}

#[cfg(test)]
mod tests {
    use super::super::ConfigMap;
    use super::*;

    fn cfg(text: &str) -> StudyConfig {
        ConfigMap::parse(text).unwrap().build().unwrap()
    }

    #[test]
    fn euclidean_family_passes_everything() {
        let rep = run_verify(&cfg("metric = euclidean\nschedule = 10,20,40\nband_limit = 8")).unwrap();
        assert!(rep.all_pass(), "{}", rep.to_csv());
    }

    #[test]
    fn kerr_family_reports_traceless_decay() {
        let rep = run_verify(&cfg("metric = kerr_slice m=1 a=0.5\nfamily = axisym-kerr\nschedule = 20,40,80\nband_limit = 16"))
            .unwrap();
        let c = rep.find("kerr_traceless_decay").unwrap();
        assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
        assert!(rep.all_pass(), "{}", rep.to_csv());
    }

    #[test]
    fn check_fault_fails_the_run() {
        let rep = run_verify(&cfg("metric = euclidean\nschedule = 10,20,40\nband_limit = 8\ninject_fault = check\nseed = 5"))
            .unwrap();
        assert!(!rep.all_pass());
        assert_eq!(rep.checks.iter().filter(|c| c.status != CheckStatus::Pass).count(), 1);
    }

    #[test]
    fn non_decaying_perturbation_is_flagged() {
        let rep = run_verify(&cfg(
            "metric = schwarzschild_isotropic m=1\nfamily = radial-perturbed amplitude=0.1 l=2 m_order=1 decay=0\n\
             schedule = 10,20,40\nband_limit = 12",
        ))
        .unwrap();
        assert_eq!(rep.find("nearly_round.umbilicity").unwrap().status, CheckStatus::Fail);
    }
}
