//! End-to-end acceptance suite. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line; exits nonzero on any failure.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use qlmass::embedding::{embed, uniformize, EmbedOptions};
use qlmass::harness::{fit_rate, run_masses, ConfigMap, StudyConfig};
use qlmass::mass::hawking_mass;
use qlmass::metric::{adm_mass, adm_surface_integral, AfMetric};
use qlmass::sphere::{center_gauge, HarmonicCoeffs, SphereGrid};
use qlmass::surface::diagnostics::ScaledSeries;
use qlmass::surface::{
    coordinate_sphere, fundamental_forms, immerse_radial, integral_identity_residual, lemma23_residual,
    lemma24_residual, mean_curvature_expansion_residual, nearly_round_diagnostics, Ambient, Immersion,
};
use qlmass::sphere::legendre::real_ylm_cartesian;

type Outcome = Result<String, String>;

fn study(text: &str) -> StudyConfig {
    ConfigMap::parse(text).and_then(|m| m.build()).expect("valid study config")
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sup_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn kerr() -> AfMetric {
    AfMetric::kerr_slice(1.0, 0.5).unwrap()
}

fn hawking_exactness() -> Outcome {
    let start = Instant::now();
    let metric = AfMetric::schwarzschild_isotropic(1.0).unwrap();
    let grid = SphereGrid::new(16).unwrap();
    let mut worst = 0.0_f64;
    for r in [10.0, 20.0, 40.0] {
        let s = coordinate_sphere(&grid, [0.0; 3], r, Some(&metric)).map_err(|e| e.to_string())?;
        let fd = fundamental_forms(&s, Ambient::Af(metric)).map_err(|e| e.to_string())?;
        worst = worst.max((hawking_mass(&fd) - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-8 && secs < 5.0, format!("max |m_H - 1| = {worst:.2e}, {secs:.2} s"))
}

fn brown_york_closed_form() -> Outcome {
    let rep = run_masses(&study("metric = schwarzschild_standard m=1\nschedule = 10,20,40,80\nband_limit = 16"))
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    let (mut radii, mut masses) = (vec![], vec![]);
    for row in &rep.rows {
        let by = row.brown_york.ok_or(format!("no Brown-York mass at r = {}", row.r))?;
        let exact = row.r * (1.0 - (1.0 - 2.0 / row.r).sqrt());
        worst = worst.max(((by - exact) / exact).abs());
        radii.push(row.r);
        masses.push(by);
    }
    let fit = fit_rate(&radii, &masses, 1.0).map_err(|e| e.to_string())?;
    ensure(
        worst <= 1e-6 && (fit.slope + 1.0).abs() <= 0.05,
        format!("max relative error {worst:.2e}, slope {:.4}", fit.slope),
    )
}

fn adm_flux() -> Outcome {
    let iso = AfMetric::schwarzschild_isotropic(1.0).unwrap();
    let grid = SphereGrid::new(16).unwrap();
    let mut flux_err = 0.0_f64;
    for r in [10.0, 20.0, 40.0, 80.0] {
        let flux = adm_surface_integral(&iso, r, &grid).map_err(|e| e.to_string())?;
        flux_err = flux_err.max((flux - (1.0 + 0.5 / r).powi(3)).abs());
    }
    let schedule = [10.0, 20.0, 40.0, 80.0];
    let m_iso = adm_mass(&iso, &schedule, 16).map_err(|e| e.to_string())?.value;
    let m_kerr = adm_mass(&kerr(), &schedule, 16).map_err(|e| e.to_string())?.value;
    ensure(
        flux_err <= 1e-6 && (m_iso - 1.0).abs() <= 1e-4 && (m_kerr - 1.0).abs() <= 1e-2,
        format!("flux error {flux_err:.2e}, isotropic {m_iso:.8}, kerr {m_kerr:.6}"),
    )
}

fn kerr_decay() -> Outcome {
    let metric = kerr();
    let grid = SphereGrid::new(16).unwrap();
    let radii = [20.0, 40.0, 80.0];
    let (mut traceless, mut mean) = (vec![], vec![]);
    for &r in &radii {
        let s = coordinate_sphere(&grid, [0.0; 3], r, Some(&metric)).map_err(|e| e.to_string())?;
        let fd = fundamental_forms(&s, Ambient::Af(metric)).map_err(|e| e.to_string())?;
        traceless.push(r.powi(3) * fd.sup_traceless());
        mean.push(r * r * sup_abs(fd.mean_curvature.iter().map(|h| h - 2.0 / r)));
    }
    let hi = traceless.iter().cloned().fold(0.0, f64::max);
    let lo = traceless.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi;
    let h = ScaledSeries::new(&radii, mean);
    ensure(
        spread <= 0.2 && h.bounded,
        format!("r^3 sup|traceless| in [{lo:.4}, {hi:.4}] (spread {spread:.3}), r^2 sup|H - 2/r| slope {:.3}", h.slope),
    )
}

fn kerr_convergence() -> Outcome {
    let start = Instant::now();
    let rep = run_masses(&study("metric = kerr_slice m=1 a=0.5\nfamily = axisym-kerr\nschedule = 20,40,80\nband_limit = 16"))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let radii: Vec<f64> = rep.rows.iter().map(|r| r.r).collect();
    let mut detail = vec![];
    let mut ok = secs < 120.0;
    for (name, values) in [
        ("hawking", rep.rows.iter().map(|r| r.hawking).collect::<Option<Vec<_>>>()),
        ("brown_york", rep.rows.iter().map(|r| r.brown_york).collect::<Option<Vec<_>>>()),
    ] {
        let values = values.ok_or(format!("{name} missing"))?;
        let gaps: Vec<f64> = values.iter().map(|m| (m - 1.0).abs()).collect();
        let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
        let fit = fit_rate(&radii, &values, 1.0).map_err(|e| e.to_string())?;
        ok &= monotone && fit.slope <= -0.8;
        detail.push(format!("{name} slope {:.3}{}", fit.slope, if monotone { "" } else { " (not monotone)" }));
    }
    detail.push(format!("{secs:.1} s"));
    ensure(ok, detail.join(", "))
}

fn uniformization() -> Outcome {
    let mut detail = vec![];
    let mut ok = true;
    for lmax in [16, 24] {
        let grid = SphereGrid::new(lmax).unwrap();
        let mut a = HarmonicCoeffs::zeros(lmax);
        for (l, m, v) in [(0, 0, 0.04), (1, -1, 0.03), (2, 1, 0.05), (3, 0, -0.04), (5, 4, 0.01)] {
            a.set(l, m, v);
        }
        let u = grid.synthesize(&a);
        let lap = grid.synthesize(&a.laplace_beltrami());
        let k: Vec<f64> = (0..grid.len()).map(|n| (1.0 - lap[n]) * (-2.0 * u[n]).exp()).collect();
        let sol = uniformize(&grid, &k, 0.5).map_err(|e| e.to_string())?;
        let target = center_gauge(&grid, &u).map_err(|e| e.to_string())?;
        let err = sup_abs(sol.u.iter().zip(&target.u).map(|(x, y)| x - y));
        let res = sol.diagnostics.pde_residual;
        ok &= res <= 1e-10 && err <= 1e-8;
        detail.push(format!("L={lmax}: residual {res:.1e}, recovery {err:.1e}"));
    }
    ensure(ok, detail.join("; "))
}

/// Off-center, perturbed and centered members across the three curved metrics.
fn test_family(grid: &SphereGrid) -> Vec<(String, AfMetric, Immersion)> {
    let std = AfMetric::schwarzschild_standard(1.0).unwrap();
    let iso = AfMetric::schwarzschild_isotropic(1.0).unwrap();
    let k = kerr();
    let bumpy: Vec<f64> = grid.map(|n| 10.0 * (1.0 + 0.05 * real_ylm_cartesian(3, 2, grid.unit_vector(n))));
    vec![
        ("kerr centered r=20".into(), k, coordinate_sphere(grid, [0.0; 3], 20.0, Some(&k)).unwrap()),
        ("kerr off-center r=10".into(), k, coordinate_sphere(grid, [3.0, 0.0, 2.0], 10.0, Some(&k)).unwrap()),
        ("standard off-center r=10".into(), std, coordinate_sphere(grid, [4.0, 1.0, 0.0], 10.0, Some(&std)).unwrap()),
        ("isotropic perturbed r=10".into(), iso, immerse_radial(grid, [0.0; 3], &bumpy, Some(&iso)).unwrap()),
    ]
}

fn minkowski() -> Outcome {
    let measure = |lmax: usize| -> Result<Vec<(String, f64)>, String> {
        let grid = SphereGrid::new(lmax).unwrap();
        test_family(&grid)
            .into_iter()
            .map(|(name, metric, s)| {
                let fd = fundamental_forms(&s, Ambient::Af(metric)).map_err(|e| e.to_string())?;
                let e = embed(&s, &fd, &EmbedOptions::default()).map_err(|e| format!("{name}: {e}"))?;
                let m = e.minkowski_residuals();
                Ok((name, m.rho1.max(m.rho2)))
            })
            .collect()
    };
    let (coarse, fine) = (measure(12)?, measure(24)?);
    let mut ok = true;
    let mut detail = vec![];
    for ((name, c), (_, f)) in coarse.iter().zip(&fine) {
        let at_floor = *c <= 1e-12 && *f <= 1e-12;
        ok &= *f <= 1e-6 && (*f * 10.0 <= *c || at_floor);
        detail.push(format!("{name}: {c:.1e} -> {f:.1e}"));
    }
    ensure(ok, detail.join("; "))
}

fn exact_identities() -> Outcome {
    const FLOOR: f64 = 1e-12;
    let std = AfMetric::schwarzschild_standard(1.0).unwrap();
    let k = kerr();
    let cases = [("standard", std, [4.0, 1.0, 0.0], 10.0), ("kerr", k, [3.0, 0.0, 2.0], 10.0)];
    let mut ok = true;
    let mut detail = vec![];
    for (name, metric, center, r) in cases {
        let mut relation = vec![];
        let mut div = vec![];
        for lmax in [8, 16, 32] {
            let grid = SphereGrid::new(lmax).unwrap();
            let s = coordinate_sphere(&grid, center, r, Some(&metric)).map_err(|e| e.to_string())?;
            relation.push(lemma23_residual(&s, &metric).map_err(|e| e.to_string())?);
            div.push(integral_identity_residual(&s, &metric).map_err(|e| e.to_string())?.divergence_residual);
        }
        for series in [&relation, &div] {
            ok &= series.windows(2).all(|w| w[1] * 10.0 <= w[0] || (w[0] <= FLOOR && w[1] <= FLOOR));
        }
        detail.push(format!(
            "{name} second-form {:.0e}/{:.0e}/{:.0e} divergence {:.0e}/{:.0e}/{:.0e}",
            relation[0], relation[1], relation[2], div[0], div[1], div[2]
        ));
    }
    let (mut algebraic, mut gauss_bonnet) = (0.0_f64, 0.0_f64);
    for lmax in [16, 24, 32] {
        let grid = SphereGrid::new(lmax).unwrap();
        for (_, metric, s) in test_family(&grid) {
            algebraic = algebraic.max(lemma24_residual(&s).map_err(|e| e.to_string())?.algebraic);
            let fd = fundamental_forms(&s, Ambient::Af(metric)).map_err(|e| e.to_string())?;
            gauss_bonnet = gauss_bonnet.max((fd.total_gauss_curvature() - 4.0 * PI).abs());
        }
    }
    ok &= algebraic <= 1e-10 && gauss_bonnet <= 1e-8;
    detail.push(format!("algebraic {algebraic:.1e}, Gauss-Bonnet {gauss_bonnet:.1e}"));
    ensure(ok, detail.join("; "))
}

fn boundedness() -> Outcome {
    let radii = [10.0, 20.0, 40.0, 80.0];
    let grid = &SphereGrid::new(16).unwrap();
    let iso = AfMetric::schwarzschild_isotropic(1.0).unwrap();
    let conformal = AfMetric::conformal_perturbed(1.0, 0.5, 2, 1, 1.0).unwrap();
    let radial = |amp: f64, decay: f64| {
        move |r: f64, metric: &AfMetric| {
            let profile = grid.map(|n| r * (1.0 + amp * r.powf(-decay) * real_ylm_cartesian(2, 0, grid.unit_vector(n))));
            immerse_radial(grid, [0.0; 3], &profile, Some(metric))
        }
    };
    let sphere = |r: f64, metric: &AfMetric| coordinate_sphere(grid, [0.0; 3], r, Some(metric));
    let shifted = |r: f64, metric: &AfMetric| coordinate_sphere(grid, [2.0, -1.0, 1.0], r, Some(metric));
    type Build<'a> = Box<dyn Fn(f64, &AfMetric) -> qlmass::Result<Immersion> + 'a>;
    let families: Vec<(&str, AfMetric, Build)> = vec![
        ("standard spheres", AfMetric::schwarzschild_standard(1.0).unwrap(), Box::new(sphere)),
        ("kerr spheres", kerr(), Box::new(sphere)),
        ("kerr shifted", kerr(), Box::new(shifted)),
        ("conformal spheres", conformal, Box::new(sphere)),
        ("isotropic perturbed", iso, Box::new(radial(0.5, 1.0))),
    ];
    let mut ok = true;
    let mut detail = vec![];
    for (name, metric, build) in &families {
        let (mut exp, mut int, mut forms) = (vec![], vec![], vec![]);
        for &r in &radii {
            let s = build(r, metric).map_err(|e| e.to_string())?;
            exp.push(mean_curvature_expansion_residual(&s, metric).map_err(|e| e.to_string())?);
            int.push(integral_identity_residual(&s, metric).map_err(|e| e.to_string())?.scaled_residual);
            forms.push(fundamental_forms(&s, Ambient::Af(*metric)).map_err(|e| e.to_string())?);
        }
        let (e, i) = (ScaledSeries::new(&radii, exp), ScaledSeries::new(&radii, int));
        let round = nearly_round_diagnostics(&forms, metric.decay_order()).map_err(|e| e.to_string())?;
        ok &= e.bounded && i.bounded && round.nearly_round;
        detail.push(format!("{name}: slopes {:.2}/{:.2} round={}", e.slope, i.slope, round.nearly_round));
    }
    let violating = radial(0.2, 0.0);
    let forms = radii
        .iter()
        .map(|&r| fundamental_forms(&violating(r, &iso)?, Ambient::Af(iso)))
        .collect::<qlmass::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let flagged = !nearly_round_diagnostics(&forms, 1.0).map_err(|e| e.to_string())?.nearly_round;
    ok &= flagged;
    detail.push(format!("non-decaying perturbation flagged={flagged}"));
    ensure(ok, detail.join("; "))
}

fn cli(args: &[&str], threads: Option<&str>) -> Result<(i32, Vec<u8>), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qlmass"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn determinism() -> Outcome {
    let base = ["--set", "metric=kerr_slice m=1 a=0.5", "--set", "schedule=10,20,40", "-L", "8"];
    let with = |extra: &[&str]| -> Vec<String> { extra.iter().chain(base.iter()).map(|s| s.to_string()).collect() };
    let mut ok = true;
    let mut detail = vec![];
    for sub in [vec!["masses"], vec!["masses", "-f", "json"], vec!["verify"], vec!["adm"], vec!["rate"]] {
        let args = with(&sub);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let runs = [cli(&args, None)?, cli(&args, None)?, cli(&args, Some("1"))?];
        let same = runs.iter().all(|r| r == &runs[0]);
        ok &= same && !runs[0].1.is_empty();
        detail.push(format!("{} identical={same}", sub.join(" ")));
    }
    let solver = cli(&with(&["masses", "--set", "inject_fault=solver", "--set", "seed=7"]).iter().map(String::as_str).collect::<Vec<_>>(), None)?.0;
    let check = cli(&with(&["verify", "--set", "inject_fault=check", "--set", "seed=7"]).iter().map(String::as_str).collect::<Vec<_>>(), None)?.0;
    let config = cli(&["masses", "--set", "schedule=40,20,10"], None)?.0;
    ok &= solver != 0 && check != 0 && config != 0;
    detail.push(format!("exit codes: solver fault {solver}, check fault {check}, bad schedule {config}"));
    ensure(ok, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hawking mass exact on isotropic Schwarzschild spheres", hawking_exactness),
        ("Brown-York mass matches closed form with unit rate", brown_york_closed_form),
        ("ADM flux and extrapolated mass", adm_flux),
        ("Kerr traceless and mean curvature decay", kerr_decay),
        ("Kerr quasi-local masses converge to the ADM mass", kerr_convergence),
        ("uniformization recovers a manufactured solution", uniformization),
        ("Minkowski identities converge spectrally", minkowski),
        ("exact identities converge and hold", exact_identities),
        ("scaled residuals bounded and violating family flagged", boundedness),
        ("deterministic output and exit-status contract", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failures += outcome.is_err() as usize;
        println!("{tag} criterion {:>2}: {name} [{detail}] ({secs:.1} s)", i + 1);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
