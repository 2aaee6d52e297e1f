//! C interface to `qlmass`.
//!
//! Every function returns a [`QlmStatus`]. On failure a description is kept
//! per thread and can be read with [`qlm_last_error_message`]. Metrics are
//! opaque handles released with [`qlm_metric_free`]; strings returned by the
//! library are released with [`qlm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qlmass::embedding::EmbedOptions;
use qlmass::harness::{run_masses, ConfigMap};
use qlmass::mass::assemble_mass_row;
use qlmass::metric::{adm_mass, adm_surface_integral, AfMetric, SpacePoint};
use qlmass::sphere::SphereGrid;
use qlmass::surface::coordinate_sphere;
use qlmass::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsideExclusion = 3,
    NoConvergence = 4,
    Geometry = 5,
    Config = 6,
    Panic = 7,
}

/// Opaque asymptotically flat metric.
pub struct QlmMetric {
    inner: AfMetric,
}

/// Masses of one centered coordinate sphere.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QlmMassRow {
    pub r: f64,
    pub area: f64,
    pub hawking: f64,
    /// Valid only when `has_brown_york` is nonzero.
    pub brown_york: f64,
    pub has_brown_york: i32,
    pub adm_reference: f64,
    /// Negative when no embedding was produced.
    pub embed_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> QlmStatus {
    match err {
        Error::InsideExclusion { .. } => QlmStatus::InsideExclusion,
        Error::NoConvergence { .. } => QlmStatus::NoConvergence,
        Error::Config(_) | Error::InvalidSchedule(_) | Error::Io(_) => QlmStatus::Config,
        Error::InvalidMetric(_) | Error::BandLimitTooSmall(..) | Error::NotFittable(_) => QlmStatus::InvalidArgument,
        _ => QlmStatus::Geometry,
    }
}

fn guard<F: FnOnce() -> Result<(), (QlmStatus, String)>>(f: F) -> QlmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QlmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QlmStatus::Panic
        }
    }
}

fn lib(err: Error) -> (QlmStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (QlmStatus, String) {
    (QlmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QlmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (QlmStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Parses a metric such as `"kerr_slice m=1 a=0.5"` into a new handle.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_metric_new(spec: *const c_char, out: *mut *mut QlmMetric) -> QlmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = read_str(spec, "spec")?;
        let inner: AfMetric = s.parse().map_err(lib)?;
        *out = Box::into_raw(Box::new(QlmMetric { inner }));
        Ok(())
    })
}

/// Releases a handle from [`qlm_metric_new`]; null is ignored.
///
/// # Safety
/// `metric` must come from [`qlm_metric_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qlm_metric_free(metric: *mut QlmMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Closed-form ADM mass of the metric's family.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qlm_metric_known_adm_mass(metric: *const QlmMetric, out: *mut f64) -> QlmStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.inner.known_adm_mass();
        Ok(())
    })
}

/// Row-major components `g_ij` at `x`.
///
/// # Safety
/// `x` must point to 3 doubles and `out` to 9.
#[no_mangle]
pub unsafe extern "C" fn qlm_metric_components(metric: *const QlmMetric, x: *const f64, out: *mut f64) -> QlmStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        if x.is_null() || out.is_null() {
            return Err(null("x or out"));
        }
        let p = [*x, *x.add(1), *x.add(2)];
        let jet = m.inner.evaluate_jet(SpacePoint(p)).map_err(lib)?;
        for i in 0..3 {
            for j in 0..3 {
                *out.add(3 * i + j) = jet.g[i][j];
            }
        }
        Ok(())
    })
}

/// ADM flux through the coordinate sphere of radius `r`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qlm_adm_flux(metric: *const QlmMetric, r: f64, band_limit: usize, out: *mut f64) -> QlmStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let grid = SphereGrid::new(band_limit).map_err(lib)?;
        *out = adm_surface_integral(&m.inner, r, &grid).map_err(lib)?;
        Ok(())
    })
}

/// ADM mass extrapolated from fluxes at `n >= 3` increasing radii.
///
/// # Safety
/// `radii` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qlm_adm_mass(
    metric: *const QlmMetric,
    radii: *const f64,
    n: usize,
    band_limit: usize,
    out: *mut f64,
) -> QlmStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if radii.is_null() {
            return Err(null("radii"));
        }
        let schedule = std::slice::from_raw_parts(radii, n);
        *out = adm_mass(&m.inner, schedule, band_limit).map_err(lib)?.value;
        Ok(())
    })
}

/// Hawking and Brown–York masses of the centered coordinate sphere `|x| = r`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qlm_mass_row(
    metric: *const QlmMetric,
    r: f64,
    band_limit: usize,
    out: *mut QlmMassRow,
) -> QlmStatus {
    guard(|| {
        let m = metric.as_ref().ok_or_else(|| null("metric"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let grid = SphereGrid::new(band_limit).map_err(lib)?;
        let s = coordinate_sphere(&grid, [0.0; 3], r, Some(&m.inner)).map_err(lib)?;
        let adm = m.inner.known_adm_mass();
        let (row, _) = assemble_mass_row(&s, &m.inner, r, adm, &EmbedOptions::default()).map_err(lib)?;
        *out = QlmMassRow {
            r,
            area: row.area,
            hawking: row.hawking,
            brown_york: row.brown_york.unwrap_or(f64::NAN),
            has_brown_york: row.brown_york.is_some() as i32,
            adm_reference: row.adm_reference,
            embed_residual: row.embed_residual.unwrap_or(-1.0),
        };
        Ok(())
    })
}

/// Runs a mass study from key-value configuration text and returns its CSV
/// report in `*out`, to be released with [`qlm_string_free`].
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_masses_csv(config: *const c_char, out: *mut *mut c_char) -> QlmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(config, "config")?;
        let cfg = ConfigMap::parse(text).and_then(|m| m.build()).map_err(lib)?;
        let csv = run_masses(&cfg).map_err(lib)?.to_csv();
        *out = CString::new(csv).map_err(|_| (QlmStatus::Panic, "report contains NUL".into()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qlm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Description of the last failure on this thread; empty after success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn qlm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
