//! Batch studies over a radius schedule: mass tables, verification suites,
//! ADM flux series and convergence-rate fits.
//!
//! Rows run concurrently but reports are always assembled in schedule order,
//! so identical configurations give byte-identical output.

pub mod config;
pub mod rate;
pub mod report;
pub mod verify;

use rand::{RngExt, SeedableRng};
use rayon::prelude::*;

pub use config::{ConfigMap, FaultInjection, ReportFormat, StudyConfig, SurfaceFamily, Tolerances};
pub use rate::{fit_rate, RateFit};
pub use report::{
    AdmReference, AdmReport, Check, CheckStatus, FluxRow, MassReport, MassRow, Metadata, RateEntry, RateReport,
    VerifyReport,
};
pub use verify::run_verify;

use crate::embedding::EmbedOptions;
use crate::error::{Error, Result};
use crate::mass::assemble_mass_row;
use crate::metric::{adm_flux_checked, adm_mass};
use crate::sphere::SphereGrid;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_SOLVER_FAILURE: i32 = 3;

/// Exit status for an error that aborted a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidSchedule(_)
        | Error::InvalidMetric(_)
        | Error::BandLimitTooSmall(..)
        | Error::InsideExclusion { .. }
        | Error::Io(_) => EXIT_CONFIG_ERROR,
        Error::NotFittable(_) => EXIT_CHECK_FAILURE,
        _ => EXIT_SOLVER_FAILURE,
    }
}

pub fn embed_options(cfg: &StudyConfig) -> EmbedOptions {
    let mut o = EmbedOptions::default();
    o.curvature_threshold = cfg.tolerances.curvature_threshold;
    o.solver.tolerance = cfg.tolerances.embedding;
    o
}

/// Index selected by the fault seed.
pub(crate) fn seeded_index(seed: u64, n: usize) -> usize {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed).random_range(0..n)
}

/// Flux-extrapolated ADM mass over the schedule.
pub fn adm_reference(cfg: &StudyConfig) -> Result<AdmReference> {
    let ex = adm_mass(&cfg.metric, &cfg.schedule, cfg.band_limit)?;
    Ok(AdmReference { value: ex.value, closed_form: cfg.metric.known_adm_mass(), error_estimate: ex.error_estimate })
}

pub fn run_masses(cfg: &StudyConfig) -> Result<MassReport> {
    cfg.validate()?;
    let grid = SphereGrid::new(cfg.band_limit)?;
    let adm = adm_reference(cfg)?;
    let faulty = (cfg.fault == FaultInjection::Solver).then(|| seeded_index(cfg.seed, cfg.schedule.len()));
    let axisym = cfg.family == SurfaceFamily::AxisymKerr;
    let results: Vec<(MassRow, Option<f64>)> = cfg
        .schedule
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut opts = embed_options(cfg);
            opts.cross_validate = axisym && i == 0;
            if faulty == Some(i) {
                opts.use_revolution = false;
                opts.solver.max_iterations = 0;
            }
            log::info!("row r={r}");
            let out = cfg
                .family
                .surface(&grid, r, &cfg.metric)
                .and_then(|s| assemble_mass_row(&s, &cfg.metric, r, adm.value, &opts));
            match out {
                Ok((values, emb)) => {
                    let mut row = MassRow::from_values(r, values);
                    if faulty == Some(i) {
                        row.flags.push("injected-fault".into());
                    }
                    (row, emb.and_then(|e| e.cross_validation))
                }
                Err(e) => {
                    log::warn!("row r={r} failed: {e}");
                    (MassRow::failed(r, adm.value, format!("error: {e}")), None)
                }
            }
        })
        .collect();
    let cross_validation = results.first().and_then(|r| r.1);
    Ok(MassReport {
        metadata: Metadata::new("masses", cfg, &adm),
        columns: report::MASS_COLUMNS.to_vec(),
        rows: results.into_iter().map(|r| r.0).collect(),
        cross_validation,
    })
}

pub fn run_adm(cfg: &StudyConfig) -> Result<AdmReport> {
    cfg.validate()?;
    let rows = cfg
        .schedule
        .par_iter()
        .map(|&r| {
            let f = adm_flux_checked(&cfg.metric, r, cfg.band_limit, 1e-10)?;
            Ok(FluxRow { r, flux: f.value, refined: f.refined, underresolved: f.underresolved })
        })
        .collect::<Result<Vec<_>>>()?;
    let fluxes: Vec<f64> = rows.iter().map(|r| r.flux).collect();
    let ex = crate::metric::richardson(&cfg.schedule, &fluxes)?;
    let adm = AdmReference { value: ex.value, closed_form: cfg.metric.known_adm_mass(), error_estimate: ex.error_estimate };
    Ok(AdmReport {
        metadata: Metadata::new("adm", cfg, &adm),
        rows,
        exponent: ex.exponent,
        fit_residual: ex.residual,
        monotone_tail: ex.monotone_tail,
    })
}

/// Mass table plus power-law fits of both masses against `m_inf`
/// (the catalog ADM mass when not given).
pub fn run_rate(cfg: &StudyConfig, m_inf: Option<f64>) -> Result<RateReport> {
    let masses = run_masses(cfg)?;
    let m_inf = m_inf.unwrap_or(masses.metadata.adm_closed_form);
    let column = |quantity: &'static str, pick: fn(&MassRow) -> Option<f64>| {
        let pts: Vec<(f64, f64)> = masses.rows.iter().filter_map(|r| pick(r).map(|m| (r.r, m))).collect();
        let (rs, ms): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        match fit_rate(&rs, &ms, m_inf) {
            Ok(fit) => RateEntry { quantity, fit: Some(fit), error: None },
            Err(e) => RateEntry { quantity, fit: None, error: Some(e.to_string()) },
        }
    };
    let rates = vec![column("hawking", |r| r.hawking), column("brown_york", |r| r.brown_york)];
    let mut metadata = masses.metadata.clone();
    metadata.command = "rate".into();
    Ok(RateReport { metadata, rates, masses: masses.rows })
}
