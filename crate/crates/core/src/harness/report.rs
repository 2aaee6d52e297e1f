use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::config::{StudyConfig, Tolerances};
use crate::mass::MassValues;

pub const MASS_COLUMNS: [&str; 7] = ["r", "area", "hawking", "brown_york", "adm_reference", "embed_residual", "flags"];

/// Header shared by all reports.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    pub adm_reference: f64,
    pub adm_closed_form: f64,
    pub adm_error_estimate: f64,
}

impl Metadata {
    pub fn new(command: &str, cfg: &StudyConfig, adm: &AdmReference) -> Self {
        Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: cfg.echo(),
            tolerances: cfg.tolerances,
            adm_reference: adm.value,
            adm_closed_form: adm.closed_form,
            adm_error_estimate: adm.error_estimate,
        }
    }

    fn csv_comment(&self) -> String {
        let mut s = format!("# {} {} {}\n", self.tool, self.version, self.command);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

/// ADM mass attached to every row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmReference {
    /// Extrapolated from fluxes over the schedule.
    pub value: f64,
    pub closed_form: f64,
    pub error_estimate: f64,
}

/// One scheduled radius: values or the failure that prevented them.
#[derive(Debug, Clone, Serialize)]
pub struct MassRow {
    pub r: f64,
    pub area: Option<f64>,
    pub hawking: Option<f64>,
    pub brown_york: Option<f64>,
    pub adm_reference: f64,
    pub embed_residual: Option<f64>,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub solver_failure: bool,
}

impl MassRow {
    pub fn from_values(r: f64, v: MassValues) -> Self {
        let solver_failure = v.flags.iter().any(|f| f == "embedding-failed" || f == "self-intersection");
        MassRow {
            r,
            area: Some(v.area),
            hawking: Some(v.hawking),
            brown_york: v.brown_york,
            adm_reference: v.adm_reference,
            embed_residual: v.embed_residual,
            flags: v.flags,
            solver_failure,
        }
    }

    pub fn failed(r: f64, adm_reference: f64, flag: String) -> Self {
        MassRow {
            r,
            area: None,
            hawking: None,
            brown_york: None,
            adm_reference,
            embed_residual: None,
            flags: vec![flag],
            solver_failure: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub metadata: Metadata,
    pub columns: Vec<&'static str>,
    pub rows: Vec<MassRow>,
    /// Gap between the two embedding paths on the first row, when compared.
    pub cross_validation: Option<f64>,
}

/// Shortest round-trip spelling; exponent form outside `[1e-3, 1e7)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e7).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub(crate) fn num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

impl MassReport {
    pub fn solver_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.solver_failure).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.metadata.csv_comment();
        if let Some(x) = self.cross_validation {
            let _ = writeln!(s, "# cross_validation = {}", fmt_num(x));
        }
        s.push_str(&MASS_COLUMNS.join(","));
        s.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                fmt_num(row.r),
                num(row.area),
                num(row.hawking),
                num(row.brown_york),
                fmt_num(row.adm_reference),
                num(row.embed_residual),
                row.flags.join(";").replace(',', " ")
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Name, measured value, threshold and verdict of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Fails at the configured band limit but passes after refinement.
    Underresolved,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Underresolved => "underresolved",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub metadata: Metadata,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.metadata.csv_comment();
        s.push_str("check,value,tolerance,status,note\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.name,
                fmt_num(c.value),
                fmt_num(c.tolerance),
                c.status.as_str(),
                c.note.replace(',', " ")
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxRow {
    pub r: f64,
    pub flux: f64,
    pub refined: f64,
    pub underresolved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmReport {
    pub metadata: Metadata,
    pub rows: Vec<FluxRow>,
    pub exponent: f64,
    pub fit_residual: f64,
    pub monotone_tail: bool,
}

impl AdmReport {
    pub fn to_csv(&self) -> String {
        let mut s = self.metadata.csv_comment();
        let _ = writeln!(
            s,
            "# extrapolated = {} +- {}",
            fmt_num(self.metadata.adm_reference),
            fmt_num(self.metadata.adm_error_estimate)
        );
        s.push_str("r,flux,refined,underresolved\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", fmt_num(r.r), fmt_num(r.flux), fmt_num(r.refined), r.underresolved);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// A fitted convergence rate or the reason none could be fitted.
#[derive(Debug, Clone, Serialize)]
pub struct RateEntry {
    pub quantity: &'static str,
    pub fit: Option<super::rate::RateFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub metadata: Metadata,
    pub rates: Vec<RateEntry>,
    pub masses: Vec<MassRow>,
}

impl RateReport {
    pub fn acceptable(&self) -> bool {
        self.rates.iter().all(|e| e.fit.is_some_and(|f| !f.noisy))
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.metadata.csv_comment();
        s.push_str("quantity,slope,intercept,residual,m_inf,points,noisy,error\n");
        for e in &self.rates {
            match &e.fit {
                Some(f) => {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},",
                        e.quantity,
                        fmt_num(f.slope),
                        fmt_num(f.intercept),
                        fmt_num(f.residual),
                        fmt_num(f.m_inf),
                        f.points,
                        f.noisy
                    );
                }
                None => {
                    let msg = e.error.clone().unwrap_or_default().replace(',', " ");
                    let _ = writeln!(s, "{},,,,,,,{msg}", e.quantity);
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
