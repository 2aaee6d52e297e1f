//! Isometric embedding of nearly round surfaces into Euclidean space.

pub mod newton;
pub mod revolution;
pub mod uniformize;

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::{HarmonicCoeffs, SphereGrid};
use crate::surface::{best_fit_sphere, fundamental_forms, Ambient, FundamentalData, Immersion, Sym2};

pub use newton::{solve_embedding, unknown_count, EmbeddingOptions, EmbeddingSolution};
pub use revolution::{embed_axisymmetric, ProfilePoint, RevolutionProfile};
pub use uniformize::{uniformize, Uniformization, UniformizationDiagnostics, DEFAULT_CURVATURE_THRESHOLD};

/// Relative tolerance for detecting a `φ`-independent induced metric.
pub const AXISYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EmbedOptions {
    /// Perturbative threshold on `sup |K − 1|` of the normalized metric.
    pub curvature_threshold: f64,
    pub solver: EmbeddingOptions,
    /// Collocation intervals for the surface-of-revolution path.
    pub revolution_nodes: usize,
    /// Take the surface-of-revolution path when the metric is axisymmetric.
    pub use_revolution: bool,
    /// Also run the general solver on axisymmetric input and record the gap.
    pub cross_validate: bool,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            curvature_threshold: DEFAULT_CURVATURE_THRESHOLD,
            solver: EmbeddingOptions::default(),
            revolution_nodes: 64,
            use_revolution: true,
            cross_validate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EmbeddingMethod {
    Newton,
    Revolution,
}

/// Continuous description of the image, used for refined triangulations.
#[derive(Debug, Clone)]
enum ImageSurface {
    Spectral([HarmonicCoeffs; 3], [f64; 3]),
    Revolution(RevolutionProfile, f64, [f64; 3]),
}

impl ImageSurface {
    fn ring(&self, theta: f64, phis: &[f64]) -> Vec<[f64; 3]> {
        match self {
            ImageSurface::Spectral(c, shift) => {
                let v: Vec<Vec<f64>> = c.iter().map(|ci| ci.ring_values(theta, phis)).collect();
                (0..phis.len()).map(|q| [v[0][q] - shift[0], v[1][q] - shift[1], v[2][q] - shift[2]]).collect()
            }
            ImageSurface::Revolution(p, scale, shift) => {
                let pt = p.evaluate(theta);
                phis.iter()
                    .map(|&phi| {
                        let x = pt.position(phi);
                        [scale * x[0] - shift[0], scale * x[1] - shift[1], scale * x[2] - shift[2]]
                    })
                    .collect()
            }
        }
    }
}

/// Bounds whose boundedness along a family is the near-sphere embedding estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmbeddingBounds {
    /// `r₀^{1+τ} sup |H₀ − 2/r₀|`.
    pub mean_curvature: f64,
    /// `r₀^{τ−1} sup |X·n₀ − r₀|`.
    pub support: f64,
    /// `sup |X·n₀/r₀ − 1|`.
    pub normalized_support: f64,
    /// `sup |r₀H₀ − 2|`.
    pub normalized_mean_curvature: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinkowskiResiduals {
    pub rho1: f64,
    pub rho2: f64,
    /// `|∮H₀ − 4πr₀ − Area/r₀| r^{2τ−1}`.
    pub claim_residual: f64,
}

/// Euclidean image of a nearly round surface sharing the source parametrization.
#[derive(Debug, Clone)]
pub struct IsometricEmbedding {
    pub grid: SphereGrid,
    /// Inner radius of the source surface, used for scaling.
    pub r_label: f64,
    pub decay_order: f64,
    pub r0: f64,
    /// Conformal factor diagnostics; absent when the prescribed-curvature
    /// problem on the source chart has no solution near zero.
    pub uniformization: Option<Uniformization>,
    pub uniformization_error: Option<Error>,
    /// Image nodes with zero area-weighted centroid.
    pub image: [Vec<f64>; 3],
    pub mean_curvature: Vec<f64>,
    pub gauss_curvature: Vec<f64>,
    pub normal: Vec<[f64; 3]>,
    pub support: Vec<f64>,
    pub area_weights: Vec<f64>,
    pub volume: f64,
    pub metric_residual: f64,
    pub method: EmbeddingMethod,
    pub iterations: usize,
    /// Sup distance to the general solver after rigid alignment, when requested.
    pub cross_validation: Option<f64>,
    pub bounds: EmbeddingBounds,
    surface: ImageSurface,
}

fn frame_norm(grid: &SphereGrid, k: usize, t: Sym2) -> f64 {
    let s = grid.sin_theta(grid.ring_of(k));
    (t[0] * t[0] + 2.0 * (t[1] / s).powi(2) + (t[2] / (s * s)).powi(2)).sqrt()
}

fn relative_mismatch(grid: &SphereGrid, target: &[Sym2], got: &[Sym2]) -> f64 {
    (0..grid.len())
        .map(|k| {
            let d = [got[k][0] - target[k][0], got[k][1] - target[k][1], got[k][2] - target[k][2]];
            frame_norm(grid, k, d) / frame_norm(grid, k, target[k])
        })
        .fold(0.0, f64::max)
}

/// True when the chart metric is `φ`-independent with no cross term.
pub fn is_axisymmetric(grid: &SphereGrid, metric: &[Sym2]) -> bool {
    let nlon = grid.nlon();
    let scale = metric.iter().map(|h| h[0].abs()).fold(0.0, f64::max);
    for p in 0..grid.nlat() {
        let first = metric[p * nlon];
        for q in 0..nlon {
            let h = metric[p * nlon + q];
            if h[1].abs() > AXISYMMETRY_TOLERANCE * scale
                || (h[0] - first[0]).abs() > AXISYMMETRY_TOLERANCE * scale
                || (h[2] - first[2]).abs() > AXISYMMETRY_TOLERANCE * scale
            {
                return false;
            }
        }
    }
    true
}

/// Surface-of-revolution path on the normalized metric; returns a unit-scale profile.
fn revolution_path(grid: &SphereGrid, metric: &[Sym2], nodes: usize) -> Result<RevolutionProfile> {
    let e: Vec<f64> = metric.iter().map(|h| h[0]).collect();
    let rho: Vec<f64> = (0..grid.len())
        .map(|k| metric[k][2] / grid.sin_theta(grid.ring_of(k)).powi(2))
        .collect();
    let ec = grid.analyze(&e)?;
    let rc = grid.analyze(&rho)?;
    embed_axisymmetric(|t| ec.evaluate(t, 0.0), |t| t.sin().powi(2) * rc.evaluate(t, 0.0), nodes)
}

/// Optimal rigid alignment of `a` onto `b`; returns the sup node distance afterwards.
pub fn rigid_alignment_distance(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let mean = |p: &[[f64; 3]]| {
        let mut c = Vector3::zeros();
        for x in p {
            c += Vector3::from(*x);
        }
        c / n
    };
    let (ca, cb) = (mean(a), mean(b));
    let mut cov = Matrix3::zeros();
    for (x, y) in a.iter().zip(b) {
        cov += (Vector3::from(*x) - ca) * (Vector3::from(*y) - cb).transpose();
    }
    let svd = cov.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut d = Matrix3::identity();
    if (vt.transpose() * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rot = vt.transpose() * d * u.transpose();
    a.iter()
        .zip(b)
        .map(|(x, y)| (rot * (Vector3::from(*x) - ca) + cb - Vector3::from(*y)).norm())
        .fold(0.0, f64::max)
}

fn points(c: &[Vec<f64>; 3]) -> Vec<[f64; 3]> {
    (0..c[0].len()).map(|k| [c[0][k], c[1][k], c[2][k]]).collect()
}

/// Embeds the surface `s` whose fundamental data in its own ambient is `fd`.
pub fn embed(s: &Immersion, fd: &FundamentalData, opts: &EmbedOptions) -> Result<IsometricEmbedding> {
    let grid = s.grid();
    let hat = fundamental_forms(s, Ambient::Euclidean)?;
    let r0 = best_fit_sphere(&hat, s)?.radius;
    let decay_order = match fd.ambient {
        Ambient::Af(m) => m.decay_order(),
        Ambient::Euclidean => 1.0,
    };
    let metric: Vec<Sym2> = fd.induced.iter().map(|h| [h[0] / (r0 * r0), h[1] / (r0 * r0), h[2] / (r0 * r0)]).collect();
    let curvature: Vec<f64> = fd.gauss_curvature.iter().map(|k| k * r0 * r0).collect();
    let (uniformization, uniformization_error) = match uniformize(grid, &curvature, opts.curvature_threshold) {
        Ok(u) => (Some(u), None),
        Err(e @ Error::RegimeViolation { .. }) => return Err(e),
        Err(e) => (None, Some(e)),
    };

    let axisymmetric = opts.use_revolution && is_axisymmetric(grid, &metric);
    let n = grid.len();
    let (mut image, mean_curvature, gauss_curvature, normal, area_weights, metric_residual, method, iterations, surface0, cross);
    if axisymmetric {
        let prof = revolution_path(grid, &metric, opts.revolution_nodes)?;
        image = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut h0 = vec![0.0; n];
        let mut k0 = vec![0.0; n];
        let mut nr = vec![[0.0; 3]; n];
        let mut got = vec![[0.0; 3]; n];
        for p in 0..grid.nlat() {
            let pt = prof.evaluate(grid.theta(p));
            for q in 0..grid.nlon() {
                let k = p * grid.nlon() + q;
                let phi = grid.phi(q);
                let x = pt.position(phi);
                for i in 0..3 {
                    image[i][k] = r0 * x[i];
                }
                h0[k] = pt.mean_curvature() / r0;
                k0[k] = pt.gauss_curvature() / (r0 * r0);
                nr[k] = pt.normal(phi);
                got[k] = [pt.dradius.powi(2) + pt.dheight.powi(2), 0.0, pt.radius.powi(2)];
            }
        }
        metric_residual = relative_mismatch(grid, &metric, &got);
        cross = if opts.cross_validate {
            let sol = solve_embedding(grid, &metric, &opts.solver)?;
            let unit: Vec<[f64; 3]> = points(&image).iter().map(|x| x.map(|v| v / r0)).collect();
            Some(r0 * rigid_alignment_distance(&points(&sol.positions), &unit))
        } else {
            None
        };
        mean_curvature = h0;
        gauss_curvature = k0;
        normal = nr;
        area_weights = fd.area_weights.clone();
        method = EmbeddingMethod::Revolution;
        iterations = 0;
        surface0 = ImageSurface::Revolution(prof, r0, [0.0; 3]);
    } else {
        let sol = solve_embedding(grid, &metric, &opts.solver)?;
        image = [0, 1, 2].map(|i| sol.positions[i].iter().map(|v| v * r0).collect::<Vec<f64>>());
        let img = Immersion::from_components(grid, image.clone())?;
        let efd = fundamental_forms(&img, Ambient::Euclidean)?;
        let phys: Vec<Sym2> = fd.induced.clone();
        metric_residual = relative_mismatch(grid, &phys, &efd.induced);
        mean_curvature = efd.mean_curvature;
        gauss_curvature = efd.gauss_curvature;
        normal = efd.euclidean_normal;
        area_weights = efd.area_weights;
        method = EmbeddingMethod::Newton;
        iterations = sol.iterations;
        cross = None;
        let coeffs = [0, 1, 2].map(|i| grid.analyze(&image[i]).expect("grid-sized field"));
        surface0 = ImageSurface::Spectral(coeffs, [0.0; 3]);
    }
    if let Some(k) = mean_curvature.iter().position(|h| !(*h > 0.0)) {
        return Err(Error::NonConvex(k));
    }
    let area: f64 = area_weights.iter().sum();
    let mut centroid = [0.0; 3];
    for i in 0..3 {
        centroid[i] = image[i].iter().zip(&area_weights).map(|(a, w)| a * w).sum::<f64>() / area;
        for v in image[i].iter_mut() {
            *v -= centroid[i];
        }
    }
    let surface = match surface0 {
        ImageSurface::Spectral(c, _) => ImageSurface::Spectral(c, centroid),
        ImageSurface::Revolution(p, s, _) => ImageSurface::Revolution(p, s, centroid),
    };
    let support: Vec<f64> = (0..n).map(|k| (0..3).map(|i| image[i][k] * normal[k][i]).sum()).collect();
    if support.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::SelfIntersection);
    }
    let volume = support.iter().zip(&area_weights).map(|(s, w)| s * w).sum::<f64>() / 3.0;
    let tau = decay_order;
    let sup = |f: &dyn Fn(usize) -> f64| (0..n).map(f).fold(0.0, f64::max);
    let bounds = EmbeddingBounds {
        mean_curvature: r0.powf(1.0 + tau) * sup(&|k| (mean_curvature[k] - 2.0 / r0).abs()),
        support: r0.powf(tau - 1.0) * sup(&|k| (support[k] - r0).abs()),
        normalized_support: sup(&|k| (support[k] / r0 - 1.0).abs()),
        normalized_mean_curvature: sup(&|k| (mean_curvature[k] * r0 - 2.0).abs()),
    };
    Ok(IsometricEmbedding {
        grid: grid.clone(),
        r_label: fd.r_min,
        decay_order,
        r0,
        uniformization,
        uniformization_error,
        image,
        mean_curvature,
        gauss_curvature,
        normal,
        support,
        area_weights,
        volume,
        metric_residual,
        method,
        iterations,
        cross_validation: cross,
        bounds,
        surface,
    })
}

impl IsometricEmbedding {
    pub fn area(&self) -> f64 {
        self.area_weights.iter().sum()
    }

    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.area_weights.iter().enumerate().map(|(k, w)| f(k) * w).sum()
    }

    pub fn total_mean_curvature(&self) -> f64 {
        self.integrate(|k| self.mean_curvature[k])
    }

    pub fn minkowski_residuals(&self) -> MinkowskiResiduals {
        let ih = self.total_mean_curvature();
        let ik = self.integrate(|k| self.gauss_curvature[k] * self.support[k]);
        let ihs = self.integrate(|k| self.mean_curvature[k] * self.support[k]);
        let area = self.area();
        let tau = self.decay_order;
        MinkowskiResiduals {
            rho1: (ih - 2.0 * ik).abs() / ih,
            rho2: (2.0 * area - ihs).abs() / (2.0 * area),
            claim_residual: (ih - 4.0 * PI * self.r0 - area / self.r0).abs() * self.r_label.powf(2.0 * tau - 1.0),
        }
    }

    /// Signed volume of the polyhedron on an `n × 2n` longitude-latitude mesh with poles.
    pub fn triangulated_volume(&self, n: usize) -> f64 {
        let phis: Vec<f64> = (0..2 * n).map(|q| PI * q as f64 / n as f64).collect();
        let rings: Vec<Vec<[f64; 3]>> = (0..=n).map(|p| self.surface.ring(PI * p as f64 / n as f64, &phis)).collect();
        let det = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| {
            a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
        };
        let mut v = 0.0;
        for p in 0..n {
            for q in 0..2 * n {
                let q1 = (q + 1) % (2 * n);
                let (a, b, c, d) = (rings[p][q], rings[p + 1][q], rings[p + 1][q1], rings[p][q1]);
                v += det(a, b, d) + det(b, c, d);
            }
        }
        v / 6.0
    }

    /// Tetrahedron-sum volume extrapolated in the mesh size (`O(h²)` leading error).
    pub fn tetrahedron_volume(&self) -> f64 {
        let coarse = self.triangulated_volume(128);
        let fine = self.triangulated_volume(256);
        (4.0 * fine - coarse) / 3.0
    }

    pub fn image_points(&self) -> Vec<[f64; 3]> {
        points(&self.image)
    }

    /// Node table `theta,phi,x,y,z,mean_curvature,support`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,phi,x,y,z,mean_curvature,support\n");
        for k in 0..self.grid.len() {
            let (t, p) = self.grid.angles(k);
            let _ = writeln!(
                s,
                "{t:.17e},{p:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.image[0][k], self.image[1][k], self.image[2][k], self.mean_curvature[k], self.support[k]
            );
        }
        s
    }

    /// Triangle mesh over the grid nodes plus the two poles.
    pub fn to_obj(&self) -> String {
        let (nlat, nlon) = (self.grid.nlat(), self.grid.nlon());
        let mut s = String::new();
        for k in 0..self.grid.len() {
            let _ = writeln!(s, "v {:.12e} {:.12e} {:.12e}", self.image[0][k], self.image[1][k], self.image[2][k]);
        }
        for theta in [0.0, PI] {
            let x = self.surface.ring(theta, &[0.0])[0];
            let _ = writeln!(s, "v {:.12e} {:.12e} {:.12e}", x[0], x[1], x[2]);
        }
        let north = self.grid.len() + 1;
        let south = self.grid.len() + 2;
        let idx = |p: usize, q: usize| p * nlon + (q % nlon) + 1;
        for q in 0..nlon {
            let _ = writeln!(s, "f {} {} {}", north, idx(0, q), idx(0, q + 1));
            let _ = writeln!(s, "f {} {} {}", south, idx(nlat - 1, q + 1), idx(nlat - 1, q));
        }
        for p in 0..nlat - 1 {
            for q in 0..nlon {
                let _ = writeln!(s, "f {} {} {}", idx(p, q), idx(p + 1, q), idx(p, q + 1));
                let _ = writeln!(s, "f {} {} {}", idx(p + 1, q), idx(p + 1, q + 1), idx(p, q + 1));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::AfMetric;
    use crate::surface::{coordinate_sphere, immerse_radial};

    #[test]
    fn schwarzschild_standard_sphere_is_round() {
        let g = SphereGrid::new(12).unwrap();
        let m = AfMetric::schwarzschild_standard(1.0).unwrap();
        let s = coordinate_sphere(&g, [0.0; 3], 10.0, Some(&m)).unwrap();
        let fd = fundamental_forms(&s, Ambient::Af(m)).unwrap();
        let e = embed(&s, &fd, &EmbedOptions::default()).unwrap();
        assert_eq!(e.method, EmbeddingMethod::Revolution);
        assert!(e.mean_curvature.iter().all(|h| (h - 0.2).abs() < 1e-10));
        assert!(e.support.iter().all(|p| (p - 10.0).abs() < 1e-9));
        assert!((e.volume - 4.0 * PI / 3.0 * 1000.0).abs() < 1e-8 * 1000.0);
    }

    #[test]
    fn general_and_revolution_paths_agree() {
        let g = SphereGrid::new(16).unwrap();
        let m = AfMetric::kerr_slice(1.0, 0.5).unwrap();
        let s = coordinate_sphere(&g, [0.0; 3], 10.0, Some(&m)).unwrap();
        let fd = fundamental_forms(&s, Ambient::Af(m)).unwrap();
        let opts = EmbedOptions { cross_validate: true, ..EmbedOptions::default() };
        let e = embed(&s, &fd, &opts).unwrap();
        let gap = e.cross_validation.unwrap();
        assert!(gap <= 1e-7 * 10.0, "{gap:e}");
        let newton = embed(&s, &fd, &EmbedOptions { use_revolution: false, ..EmbedOptions::default() }).unwrap();
        assert_eq!(newton.method, EmbeddingMethod::Newton);
        assert!(newton.metric_residual <= 1e-8);
        for k in 0..g.len() {
            assert!((newton.mean_curvature[k] - e.mean_curvature[k]).abs() < 1e-8 / 10.0);
        }
    }

    #[test]
    fn tetrahedra_match_divergence_volume() {
        let g = SphereGrid::new(16).unwrap();
        let y20 = |w: [f64; 3]| 3.0 * w[2] * w[2] - 1.0;
        let prof = g.map(|k| {
            let w = g.unit_vector(k);
            5.0 * (1.0 + 0.05 * y20(w) + 0.03 * w[0] * w[1])
        });
        let s = immerse_radial(&g, [0.0; 3], &prof, None).unwrap();
        let fd = fundamental_forms(&s, Ambient::Euclidean).unwrap();
        let e = embed(&s, &fd, &EmbedOptions::default()).unwrap();
        assert_eq!(e.method, EmbeddingMethod::Newton);
        let tv = e.tetrahedron_volume();
        assert!((tv - e.volume).abs() <= 1e-6 * e.volume, "{tv} {}", e.volume);
        let mk = e.minkowski_residuals();
        assert!(mk.rho1 < 1e-6 && mk.rho2 < 1e-6, "{mk:?}");
    }

    fn bumpy_surface(g: &SphereGrid) -> Immersion {
        let prof = g.map(|k| {
            let w = g.unit_vector(k);
            4.0 * (1.0 + 0.04 * (3.0 * w[2] * w[2] - 1.0) + 0.02 * w[0] * w[1] - 0.01 * w[1])
        });
        immerse_radial(g, [0.5, -0.2, 0.1], &prof, None).unwrap()
    }

    #[test]
    fn euclidean_surface_is_recovered_up_to_rigid_motion() {
        let g = SphereGrid::new(16).unwrap();
        let s = bumpy_surface(&g);
        let fd = fundamental_forms(&s, Ambient::Euclidean).unwrap();
        let e = embed(&s, &fd, &EmbedOptions::default()).unwrap();
        let source: Vec<[f64; 3]> = (0..g.len()).map(|k| s.position(k)).collect();
        let d = rigid_alignment_distance(&e.image_points(), &source);
        assert!(d <= 1e-6, "{d:e}");
    }

    #[test]
    fn perturbed_initial_guess_reaches_the_same_image() {
        use rand::{RngExt, SeedableRng};
        let g = SphereGrid::new(12).unwrap();
        let s = bumpy_surface(&g);
        let fd = fundamental_forms(&s, Ambient::Euclidean).unwrap();
        let base = embed(&s, &fd, &EmbedOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2 {
            let start: Vec<f64> = (0..unknown_count(12)).map(|_| rng.random_range(-1e-3..1e-3)).collect();
            let mut opts = EmbedOptions::default();
            opts.solver.initial = Some(start);
            let other = embed(&s, &fd, &opts).unwrap();
            let d = rigid_alignment_distance(&other.image_points(), &base.image_points());
            assert!(d <= 1e-6, "{d:e}");
        }
    }

    #[test]
    fn alignment_removes_rigid_motion() {
        let a: Vec<[f64; 3]> = (0..20).map(|i| [i as f64, (i * i) as f64 * 0.1, (i as f64).sin()]).collect();
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let b: Vec<[f64; 3]> = a.iter().map(|x| [c * x[0] - s * x[1] + 1.0, s * x[0] + c * x[1] - 2.0, x[2] + 0.5]).collect();
        assert!(rigid_alignment_distance(&a, &b) < 1e-12);
    }

    #[test]
    fn exports_have_expected_shape() {
        let g = SphereGrid::new(8).unwrap();
        let s = coordinate_sphere(&g, [0.0; 3], 3.0, None).unwrap();
        let fd = fundamental_forms(&s, Ambient::Euclidean).unwrap();
        let e = embed(&s, &fd, &EmbedOptions::default()).unwrap();
        assert_eq!(e.to_csv().lines().count(), g.len() + 1);
        let obj = e.to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), g.len() + 2);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * g.nlon() * g.nlat());
    }
}
