use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qlmass::embedding::{embed, EmbeddingBounds, EmbeddingMethod, MinkowskiResiduals};
use qlmass::harness::{
    embed_options, exit_code, report::fmt_num, run_adm, run_masses, run_rate, run_verify, ConfigMap, ReportFormat, StudyConfig,
    EXIT_CHECK_FAILURE, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_SOLVER_FAILURE,
};
use qlmass::sphere::SphereGrid;
use qlmass::surface::{fundamental_forms, Ambient};
use qlmass::{Error, Result};

#[derive(Parser)]
#[command(name = "qlmass", version, about = "Hawking and Brown-York masses of nearly round surfaces")]
struct Cli {
    /// Key-value configuration file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set band_limit=24.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Spherical-harmonic band limit, at least 8.
    #[arg(short = 'L', long, global = true)]
    band_limit: Option<usize>,
    /// csv or json.
    #[arg(short, long, global = true)]
    format: Option<String>,
    /// Report file; standard output when absent.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mass table over the radius schedule.
    Masses,
    /// Identity, decay and embedding checks with pass/fail verdicts.
    Verify,
    /// Embed one surface and export its image.
    Embed {
        /// Family parameter of the surface; the first scheduled radius by default.
        #[arg(long)]
        radius: Option<f64>,
        /// Also write the image as a Wavefront OBJ mesh.
        #[arg(long)]
        obj: Option<PathBuf>,
    },
    /// ADM flux over the schedule and its extrapolation.
    Adm,
    /// Convergence-rate fits of both masses.
    Rate {
        /// Limit to fit against; the catalog ADM mass by default.
        #[arg(long)]
        m_inf: Option<f64>,
    },
}

fn load(cli: &Cli) -> Result<StudyConfig> {
    let mut map = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::default(),
    };
    for s in &cli.overrides {
        map.set(s)?;
    }
    if let Some(l) = cli.band_limit {
        map.insert("band_limit", l.to_string());
    }
    if let Some(f) = &cli.format {
        map.insert("format", f.as_str());
    }
    if let Some(o) = &cli.out {
        map.insert("out", o.to_string_lossy());
    }
    map.build()
}

fn emit(cfg: &StudyConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn render<T>(cfg: &StudyConfig, report: &T, csv: fn(&T) -> String, json: fn(&T) -> String) -> Result<()> {
    emit(
        cfg,
        &match cfg.format {
            ReportFormat::Csv => csv(report),
            ReportFormat::Json => json(report),
        },
    )
}

#[derive(Serialize)]
struct EmbedSummary {
    r: f64,
    method: EmbeddingMethod,
    iterations: usize,
    metric_residual: f64,
    r0: f64,
    area: f64,
    volume: f64,
    tetrahedron_volume: f64,
    minkowski: MinkowskiResiduals,
    bounds: EmbeddingBounds,
    cross_validation: Option<f64>,
    uniformization_residual: Option<f64>,
}

fn run(cli: &Cli, cfg: &StudyConfig) -> Result<i32> {
    match &cli.command {
        Command::Masses => {
            let rep = run_masses(cfg)?;
            render(cfg, &rep, |r| r.to_csv(), |r| r.to_json())?;
            Ok(if rep.solver_failures() > 0 { EXIT_SOLVER_FAILURE } else { EXIT_OK })
        }
        Command::Verify => {
            let rep = run_verify(cfg)?;
            render(cfg, &rep, |r| r.to_csv(), |r| r.to_json())?;
            for c in rep.checks.iter().filter(|c| c.status.as_str() != "pass") {
                log::warn!("{} {}: {} (tolerance {})", c.status.as_str(), c.name, fmt_num(c.value), fmt_num(c.tolerance));
            }
            Ok(if rep.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILURE })
        }
        Command::Embed { radius, obj } => {
            let r = radius.unwrap_or(cfg.schedule[0]);
            let grid = SphereGrid::new(cfg.band_limit)?;
            let s = cfg.family.surface(&grid, r, &cfg.metric)?;
            let fd = fundamental_forms(&s, Ambient::Af(cfg.metric))?;
            let mut opts = embed_options(cfg);
            opts.cross_validate = true;
            let e = embed(&s, &fd, &opts)?;
            if let Some(p) = obj {
                fs::write(p, e.to_obj()).map_err(|err| Error::Io(format!("{}: {err}", p.display())))?;
            }
            match cfg.format {
                ReportFormat::Csv => emit(cfg, &e.to_csv())?,
                ReportFormat::Json => {
                    let summary = EmbedSummary {
                        r,
                        method: e.method,
                        iterations: e.iterations,
                        metric_residual: e.metric_residual,
                        r0: e.r0,
                        area: e.area(),
                        volume: e.volume,
                        tetrahedron_volume: e.tetrahedron_volume(),
                        minkowski: e.minkowski_residuals(),
                        bounds: e.bounds,
                        cross_validation: e.cross_validation,
                        uniformization_residual: e.uniformization.as_ref().map(|u| u.diagnostics.galerkin_residual),
                    };
                    emit(cfg, &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"))?
                }
            }
            Ok(EXIT_OK)
        }
        Command::Adm => {
            let rep = run_adm(cfg)?;
            render(cfg, &rep, |r| r.to_csv(), |r| r.to_json())?;
            Ok(if rep.rows.iter().any(|r| r.underresolved) { EXIT_CHECK_FAILURE } else { EXIT_OK })
        }
        Command::Rate { m_inf } => {
            let rep = run_rate(cfg, *m_inf)?;
            render(cfg, &rep, |r| r.to_csv(), |r| r.to_json())?;
            Ok(if rep.acceptable() { EXIT_OK } else { EXIT_CHECK_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG_ERROR as u8 } else { EXIT_OK as u8 });
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    let code = match load(&cli) {
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG_ERROR
        }
        Ok(cfg) => match run(&cli, &cfg) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    };
    ExitCode::from(code as u8)
}
