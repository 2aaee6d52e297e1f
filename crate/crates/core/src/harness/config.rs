use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{AfMetric, MetricFamily};
use crate::sphere::legendre::real_ylm_cartesian;
use crate::sphere::SphereGrid;
use crate::surface::{immerse_radial, Immersion};

/// Surfaces swept by a study, one per scheduled radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceFamily {
    /// `|x − center| = r`.
    CoordinateSpheres { center: [f64; 3] },
    /// `R(w) = r (1 + amplitude r^{−decay} Y_lm(w))` about the origin.
    RadialPerturbed { amplitude: f64, l: usize, m_order: i64, decay: f64 },
    /// Centered coordinate spheres of a Kerr slice, embedded as surfaces of revolution.
    AxisymKerr,
}

impl SurfaceFamily {
    pub fn surface(&self, grid: &SphereGrid, r: f64, metric: &AfMetric) -> Result<Immersion> {
        match *self {
            SurfaceFamily::CoordinateSpheres { center } => {
                immerse_radial(grid, center, &vec![r; grid.len()], Some(metric))
            }
            SurfaceFamily::AxisymKerr => immerse_radial(grid, [0.0; 3], &vec![r; grid.len()], Some(metric)),
            SurfaceFamily::RadialPerturbed { amplitude, l, m_order, decay } => {
                let scale = amplitude * r.powf(-decay);
                let profile = grid.map(|n| r * (1.0 + scale * real_ylm_cartesian(l, m_order, grid.unit_vector(n))));
                immerse_radial(grid, [0.0; 3], &profile, Some(metric))
            }
        }
    }

    /// Whether every member is a centered round coordinate sphere.
    pub fn is_centered_sphere(&self) -> bool {
        match self {
            SurfaceFamily::CoordinateSpheres { center } => *center == [0.0; 3],
            SurfaceFamily::AxisymKerr => true,
            SurfaceFamily::RadialPerturbed { amplitude, .. } => *amplitude == 0.0,
        }
    }
}

impl fmt::Display for SurfaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceFamily::CoordinateSpheres { center: [x, y, z] } => {
                write!(f, "coordinate-spheres cx={x} cy={y} cz={z}")
            }
            SurfaceFamily::RadialPerturbed { amplitude, l, m_order, decay } => {
                write!(f, "radial-perturbed amplitude={amplitude} l={l} m_order={m_order} decay={decay}")
            }
            SurfaceFamily::AxisymKerr => write!(f, "axisym-kerr"),
        }
    }
}

impl FromStr for SurfaceFamily {
    type Err = Error;

    /// `<kind> [key=value]...`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts.next().ok_or_else(|| Error::Config("empty family spec".into()))?;
        let mut params = BTreeMap::new();
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in family spec, got '{kv}'")))?;
            let v: f64 = v.parse().map_err(|_| Error::Config(format!("family parameter {k} is not a number: '{v}'")))?;
            params.insert(k.to_string(), v);
        }
        let mut take = |k: &str, default: Option<f64>| {
            params
                .remove(k)
                .or(default)
                .ok_or_else(|| Error::Config(format!("family {name} requires parameter {k}")))
        };
        let family = match name {
            "coordinate-spheres" => SurfaceFamily::CoordinateSpheres {
                center: [take("cx", Some(0.0))?, take("cy", Some(0.0))?, take("cz", Some(0.0))?],
            },
            "radial-perturbed" => {
                let l = take("l", None)?;
                let m_order = take("m_order", Some(0.0))?;
                if l < 0.0 || l.fract() != 0.0 || m_order.fract() != 0.0 || m_order.abs() > l {
                    return Err(Error::Config(format!("radial-perturbed needs integers |m_order| <= l, got l={l} m_order={m_order}")));
                }
                SurfaceFamily::RadialPerturbed {
                    amplitude: take("amplitude", None)?,
                    l: l as usize,
                    m_order: m_order as i64,
                    decay: take("decay", Some(1.0))?,
                }
            }
            "axisym-kerr" => SurfaceFamily::AxisymKerr,
            other => return Err(Error::Config(format!("unknown surface family '{other}'"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(Error::Config(format!("unknown parameter '{k}' for family {name}")));
        }
        Ok(family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format '{other}' (csv|json)"))),
        }
    }
}

/// Deliberate failure used to exercise the exit-status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultInjection {
    None,
    /// One seeded row has its embedding solver starved of iterations.
    Solver,
    /// One seeded verification check is forced to fail.
    Check,
}

impl FromStr for FaultInjection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(FaultInjection::None),
            "solver" => Ok(FaultInjection::Solver),
            "check" => Ok(FaultInjection::Check),
            other => Err(Error::Config(format!("unknown fault '{other}' (none|solver|check)"))),
        }
    }
}

/// Thresholds used by `verify` and the embedding pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub gauss_bonnet: f64,
    /// Pointwise algebraic identity for the distance Hessian.
    pub algebraic: f64,
    pub minkowski: f64,
    /// Required improvement factor per band-limit doubling.
    pub refinement_factor: f64,
    /// Residuals below this are treated as converged to roundoff.
    pub roundoff_floor: f64,
    /// Largest log-log growth of a scaled constant still called bounded.
    pub bounded_slope: f64,
    /// Allowed relative spread of `r³ sup|Å|` over a Kerr sweep.
    pub decay_spread: f64,
    pub adm: f64,
    /// Largest change of either mass under band-limit doubling.
    pub mass_resolution: f64,
    /// Embedding solver tolerance on the projected residual.
    pub embedding: f64,
    /// Perturbative threshold on `sup |K − 1|` of the normalized metric.
    pub curvature_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gauss_bonnet: 1e-8,
            algebraic: 1e-10,
            minkowski: 1e-6,
            refinement_factor: 10.0,
            roundoff_floor: 1e-12,
            bounded_slope: crate::surface::diagnostics::BOUNDED_SLOPE,
            decay_spread: 0.2,
            adm: 1e-2,
            mass_resolution: 1e-10,
            embedding: 1e-10,
            curvature_threshold: crate::embedding::uniformize::DEFAULT_CURVATURE_THRESHOLD,
        }
    }
}

impl Tolerances {
    fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "gauss_bonnet" => &mut self.gauss_bonnet,
            "algebraic" => &mut self.algebraic,
            "minkowski" => &mut self.minkowski,
            "refinement_factor" => &mut self.refinement_factor,
            "roundoff_floor" => &mut self.roundoff_floor,
            "bounded_slope" => &mut self.bounded_slope,
            "decay_spread" => &mut self.decay_spread,
            "adm" => &mut self.adm,
            "mass_resolution" => &mut self.mass_resolution,
            "embedding" => &mut self.embedding,
            "curvature_threshold" => &mut self.curvature_threshold,
            other => return Err(Error::Config(format!("unknown tolerance 'tol.{other}'"))),
        };
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!("tolerance tol.{key} must be positive, got {value}")));
        }
        *slot = value;
        Ok(())
    }
}

/// A fully validated study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub metric: AfMetric,
    pub family: SurfaceFamily,
    pub schedule: Vec<f64>,
    pub band_limit: usize,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub seed: u64,
    pub fault: FaultInjection,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            metric: AfMetric::schwarzschild_isotropic(1.0).expect("valid default metric"),
            family: SurfaceFamily::CoordinateSpheres { center: [0.0; 3] },
            schedule: vec![10.0, 20.0, 40.0],
            band_limit: 16,
            tolerances: Tolerances::default(),
            out: None,
            format: ReportFormat::Csv,
            seed: 0,
            fault: FaultInjection::None,
        }
    }
}

/// Raw `key = value` pairs in file order of precedence (later wins).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap(pub BTreeMap<String, String>);

impl ConfigMap {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{raw}'", i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigMap(map))
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override must be key=value, got '{assignment}'")))?;
        self.0.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn build(&self) -> Result<StudyConfig> {
        let mut cfg = StudyConfig::default();
        for (k, v) in &self.0 {
            match k.as_str() {
                "metric" => cfg.metric = v.parse()?,
                "family" => cfg.family = v.parse()?,
                "schedule" => cfg.schedule = parse_schedule(v)?,
                "band_limit" => cfg.band_limit = parse_num(k, v)?,
                "out" => cfg.out = (!v.is_empty()).then(|| PathBuf::from(v)),
                "format" => cfg.format = v.parse()?,
                "seed" => cfg.seed = parse_num(k, v)?,
                "inject_fault" => cfg.fault = v.parse()?,
                _ => match k.strip_prefix("tol.") {
                    Some(t) => cfg.tolerances.set(t, parse_num(k, v)?)?,
                    None => return Err(Error::Config(format!("unknown configuration key '{k}'"))),
                },
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

/// Comma- or whitespace-separated radii.
pub fn parse_schedule(v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num("schedule", s))
        .collect()
}

pub const MIN_STUDY_BAND_LIMIT: usize = 8;

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schedule.len() < 3 {
            return Err(Error::InvalidSchedule(format!("need at least 3 radii, got {}", self.schedule.len())));
        }
        if self.schedule.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidSchedule("radii must be positive and finite".into()));
        }
        if self.schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSchedule("radii must be strictly increasing".into()));
        }
        if self.band_limit < MIN_STUDY_BAND_LIMIT {
            return Err(Error::Config(format!(
                "band_limit must be at least {MIN_STUDY_BAND_LIMIT}, got {}",
                self.band_limit
            )));
        }
        if self.family == SurfaceFamily::AxisymKerr && !matches!(self.metric.family(), MetricFamily::KerrSlice { .. }) {
            return Err(Error::Config("family axisym-kerr requires a kerr_slice metric".into()));
        }
        Ok(())
    }

    /// Key-value echo used in report headers.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("metric".into(), self.metric.to_string());
        m.insert("family".into(), self.family.to_string());
        m.insert(
            "schedule".into(),
            self.schedule.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        );
        m.insert("band_limit".into(), self.band_limit.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert(
            "inject_fault".into(),
            match self.fault {
                FaultInjection::None => "none",
                FaultInjection::Solver => "solver",
                FaultInjection::Check => "check",
            }
            .into(),
        );
        m
    }
}
