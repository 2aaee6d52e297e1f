use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::metric::{christoffel, curvature_form, invert3, riemann, AfMetric, Mat3, MetricJet, Tensor3};
use crate::sphere::SphereGrid;
use crate::surface::immersion::{norm, Immersion};

/// Ambient metric a surface is measured in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ambient {
    Euclidean,
    Af(AfMetric),
}

/// Symmetric 2-tensor on the `(theta, phi)` chart stored as `[t11, t12, t22]`.
pub type Sym2 = [f64; 3];

/// First and second fundamental forms and derived curvature of an immersion.
/// Per-node vectors are indexed like the grid.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    pub ambient: Ambient,
    pub positions: Vec<[f64; 3]>,
    /// `(d_theta y, d_phi y)`.
    pub tangents: Vec<[[f64; 3]; 2]>,
    pub induced: Vec<Sym2>,
    /// Quadrature weight times area density: `∮ f dσ = Σ f_n area_weights_n`.
    pub area_weights: Vec<f64>,
    /// Outward Euclidean unit normal (also the covector `∂ρ/∂x`).
    pub euclidean_normal: Vec<[f64; 3]>,
    /// Outward unit normal in the ambient metric.
    pub normal: Vec<[f64; 3]>,
    /// `|∇_g ρ| = (g^{ij} n̂_i n̂_j)^{1/2}`.
    pub distance_gradient: Vec<f64>,
    pub second_form: Vec<Sym2>,
    pub mean_curvature: Vec<f64>,
    pub traceless: Vec<Sym2>,
    pub traceless_norm: Vec<f64>,
    pub traceless_gradient_norm: Vec<f64>,
    pub second_form_norm: Vec<f64>,
    pub gauss_curvature: Vec<f64>,
    pub area: f64,
    pub diameter: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl FundamentalData {
    pub fn len(&self) -> usize {
        self.area_weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.area_weights.is_empty()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.area_weights).map(|(a, w)| a * w).sum()
    }

    pub fn integrate_with<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        (0..self.len()).map(|n| f(n) * self.area_weights[n]).sum()
    }

    pub fn total_mean_curvature(&self) -> f64 {
        self.integrate(&self.mean_curvature)
    }

    pub fn willmore(&self) -> f64 {
        self.integrate_with(|n| self.mean_curvature[n].powi(2))
    }

    pub fn total_gauss_curvature(&self) -> f64 {
        self.integrate(&self.gauss_curvature)
    }

    /// Principal curvatures `H/2 ± |Å|/√2`.
    pub fn principal_curvatures(&self, node: usize) -> (f64, f64) {
        let half = 0.5 * self.mean_curvature[node];
        let d = self.traceless_norm[node] / std::f64::consts::SQRT_2;
        (half - d, half + d)
    }

    pub fn sup_traceless(&self) -> f64 {
        sup(&self.traceless_norm)
    }
    pub fn sup_traceless_gradient(&self) -> f64 {
        sup(&self.traceless_gradient_norm)
    }
    pub fn sup_second_form(&self) -> f64 {
        sup(&self.second_form_norm)
    }

    /// Euclidean dual frame `ē^a_i = h^{ab} e_b^i` (valid for the Euclidean ambient).
    pub(crate) fn dual_frame(&self, node: usize) -> [[f64; 3]; 2] {
        let hi = inverse2(self.induced[node]);
        let e = self.tangents[node];
        let mut out = [[0.0; 3]; 2];
        for i in 0..3 {
            out[0][i] = hi[0] * e[0][i] + hi[1] * e[1][i];
            out[1][i] = hi[1] * e[0][i] + hi[2] * e[1][i];
        }
        out
    }

    /// A chart 2-tensor lifted to a Cartesian tensor through the Euclidean dual frame.
    pub(crate) fn lift(&self, node: usize, t: Sym2) -> Mat3 {
        let d = self.dual_frame(node);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = t[0] * d[0][i] * d[0][j]
                    + t[1] * (d[0][i] * d[1][j] + d[1][i] * d[0][j])
                    + t[2] * d[1][i] * d[1][j];
            }
        }
        out
    }
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
}

pub(crate) fn det2(h: Sym2) -> f64 {
    h[0] * h[2] - h[1] * h[1]
}

pub(crate) fn inverse2(h: Sym2) -> Sym2 {
    let d = det2(h);
    [h[2] / d, -h[1] / d, h[0] / d]
}

/// `h^{ab} t_ab`.
pub(crate) fn trace2(hi: Sym2, t: Sym2) -> f64 {
    hi[0] * t[0] + 2.0 * hi[1] * t[1] + hi[2] * t[2]
}

/// `|t|² = h^{ac} h^{bd} t_ab t_cd`.
pub(crate) fn norm2_sq(hi: Sym2, t: Sym2) -> f64 {
    let m = [[hi[0], hi[1]], [hi[1], hi[2]]];
    let tt = [[t[0], t[1]], [t[1], t[2]]];
    let mut s = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    s += m[a][c] * m[b][d] * tt[a][b] * tt[c][d];
                }
            }
        }
    }
    s
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn gdot(g: &Mat3, a: [f64; 3], b: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += g[i][j] * a[i] * b[j];
        }
    }
    s
}

fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// `Γ^k_ij a^i b^j`.
fn contract_gamma(gamma: &Tensor3, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                *o += gamma[k][i][j] * a[i] * b[j];
            }
        }
    }
    out
}

/// Spectral `(d_theta f, d_phi f)` of a grid field.
pub(crate) fn first_derivatives(grid: &SphereGrid, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = grid.analyze(f)?;
    Ok((grid.synthesize_dtheta(&c), grid.synthesize_dphi(&c)))
}

struct AmbientPoint {
    g: Mat3,
    ginv: Mat3,
    gamma: Tensor3,
    jet: Option<MetricJet>,
}

fn ambient_point(ambient: &Ambient, y: [f64; 3]) -> AmbientPoint {
    match ambient {
        Ambient::Euclidean => {
            let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            AmbientPoint { g: id, ginv: id, gamma: [[[0.0; 3]; 3]; 3], jet: None }
        }
        Ambient::Af(metric) => {
            let jet = metric.jet_unchecked(y);
            AmbientPoint { g: jet.g, ginv: invert3(&jet.g), gamma: christoffel(&jet), jet: Some(jet) }
        }
    }
}

/// Fundamental forms of `s` in the given ambient metric.
///
/// Tangents come from spectral derivatives of the Cartesian component fields;
/// the second fundamental form is `A(X, Y) = g(∇_X ν, Y)` with `∇_X ν`
/// assembled from spectral derivatives of the normal field and the ambient
/// Christoffel symbols.
pub fn fundamental_forms(s: &Immersion, ambient: Ambient) -> Result<FundamentalData> {
    if let Ambient::Af(m) = &ambient {
        s.check_outside(m)?;
    }
    let grid = s.grid();
    let n_nodes = grid.len();
    let comps = s.components();
    let mut dy = Vec::with_capacity(3);
    for c in comps.iter() {
        dy.push(first_derivatives(grid, c)?);
    }
    let positions: Vec<[f64; 3]> = (0..n_nodes).map(|n| s.position(n)).collect();
    let tangents: Vec<[[f64; 3]; 2]> = (0..n_nodes)
        .map(|n| {
            [
                [dy[0].0[n], dy[1].0[n], dy[2].0[n]],
                [dy[0].1[n], dy[1].1[n], dy[2].1[n]],
            ]
        })
        .collect();
    let amb: Vec<AmbientPoint> = positions.iter().map(|&y| ambient_point(&ambient, y)).collect();

    let mut induced = Vec::with_capacity(n_nodes);
    let mut area_weights = Vec::with_capacity(n_nodes);
    let mut euclidean_normal = Vec::with_capacity(n_nodes);
    let mut normal = Vec::with_capacity(n_nodes);
    let mut distance_gradient = Vec::with_capacity(n_nodes);
    for n in 0..n_nodes {
        let [et, ep] = tangents[n];
        let a = &amb[n];
        let h = [gdot(&a.g, et, et), gdot(&a.g, et, ep), gdot(&a.g, ep, ep)];
        let det = det2(h);
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateMetric(n));
        }
        induced.push(h);
        let ring = grid.ring_of(n);
        area_weights.push(grid.weight(n) * det.sqrt() / grid.sin_theta(ring));
        let c = cross(et, ep);
        let cn = norm(c);
        let nh = [c[0] / cn, c[1] / cn, c[2] / cn];
        euclidean_normal.push(nh);
        let up = mat_vec(&a.ginv, nh);
        let grad = dot(up, nh).sqrt();
        distance_gradient.push(grad);
        normal.push([up[0] / grad, up[1] / grad, up[2] / grad]);
    }

    let mut dnu = Vec::with_capacity(3);
    for i in 0..3 {
        let f: Vec<f64> = normal.iter().map(|v| v[i]).collect();
        dnu.push(first_derivatives(grid, &f)?);
    }

    let mut second_form = Vec::with_capacity(n_nodes);
    let mut mean_curvature = Vec::with_capacity(n_nodes);
    let mut traceless = Vec::with_capacity(n_nodes);
    let mut traceless_norm = Vec::with_capacity(n_nodes);
    let mut second_form_norm = Vec::with_capacity(n_nodes);
    let mut gauss_curvature = Vec::with_capacity(n_nodes);
    for n in 0..n_nodes {
        let a = &amb[n];
        let e = tangents[n];
        let nu = normal[n];
        let mut cov = [[0.0; 3]; 2];
        for (c, row) in cov.iter_mut().enumerate() {
            let gam = contract_gamma(&a.gamma, e[c], nu);
            for k in 0..3 {
                let d = if c == 0 { dnu[k].0[n] } else { dnu[k].1[n] };
                row[k] = d + gam[k];
            }
        }
        let raw = |x: usize, y: usize| gdot(&a.g, cov[x], e[y]);
        let am = [raw(0, 0), 0.5 * (raw(0, 1) + raw(1, 0)), raw(1, 1)];
        let h = induced[n];
        let hi = inverse2(h);
        let hm = trace2(hi, am);
        let tf = [am[0] - 0.5 * hm * h[0], am[1] - 0.5 * hm * h[1], am[2] - 0.5 * hm * h[2]];
        let mut k = det2(am) / det2(h);
        if let Some(jet) = &a.jet {
            let riem = riemann(jet);
            k += curvature_form(jet, &riem, e[0], e[1]) / det2(h);
        }
        second_form.push(am);
        mean_curvature.push(hm);
        traceless_norm.push(norm2_sq(hi, tf).max(0.0).sqrt());
        second_form_norm.push(norm2_sq(hi, am).max(0.0).sqrt());
        traceless.push(tf);
        gauss_curvature.push(k);
    }

    let traceless_gradient_norm = traceless_gradient(grid, &tangents, &induced, &amb, &traceless)?;
    let area: f64 = area_weights.iter().sum();
    let diameter = graph_diameter(grid, &positions, &amb);
    let radii: Vec<f64> = positions.iter().map(|&y| norm(y)).collect();
    Ok(FundamentalData {
        ambient,
        positions,
        tangents,
        induced,
        area_weights,
        euclidean_normal,
        normal,
        distance_gradient,
        second_form,
        mean_curvature,
        traceless,
        traceless_norm,
        traceless_gradient_norm,
        second_form_norm,
        gauss_curvature,
        area,
        diameter,
        r_min: radii.iter().cloned().fold(f64::INFINITY, f64::min),
        r_max: radii.iter().cloned().fold(0.0, f64::max),
    })
}

/// `|∇Å|` through the Cartesian tensor `T_ij = Å_ab ē^a_i ē^b_j`, whose
/// components are smooth across the poles and can be differentiated spectrally.
fn traceless_gradient(
    grid: &SphereGrid,
    tangents: &[[[f64; 3]; 2]],
    induced: &[Sym2],
    amb: &[AmbientPoint],
    traceless: &[Sym2],
) -> Result<Vec<f64>> {
    let n_nodes = grid.len();
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let mut tfield = vec![vec![0.0; n_nodes]; 6];
    let mut tnode = Vec::with_capacity(n_nodes);
    for n in 0..n_nodes {
        let hi = inverse2(induced[n]);
        let e = tangents[n];
        let g = &amb[n].g;
        // ē^a_i = h^{ab} g_ij e_b^j
        let low = [mat_vec(g, e[0]), mat_vec(g, e[1])];
        let mut d = [[0.0; 3]; 2];
        for i in 0..3 {
            d[0][i] = hi[0] * low[0][i] + hi[1] * low[1][i];
            d[1][i] = hi[1] * low[0][i] + hi[2] * low[1][i];
        }
        let t = traceless[n];
        let mut tm = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                tm[i][j] = t[0] * d[0][i] * d[0][j]
                    + t[1] * (d[0][i] * d[1][j] + d[1][i] * d[0][j])
                    + t[2] * d[1][i] * d[1][j];
            }
        }
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            tfield[k][n] = tm[i][j];
        }
        tnode.push(tm);
    }
    let mut dt = Vec::with_capacity(6);
    for f in &tfield {
        dt.push(first_derivatives(grid, f)?);
    }
    let mut out = Vec::with_capacity(n_nodes);
    for n in 0..n_nodes {
        let e = tangents[n];
        let tm = tnode[n];
        let bil = |m: &Mat3, x: [f64; 3], y: [f64; 3]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += m[i][j] * x[i] * y[j];
                }
            }
            s
        };
        // [c][a][b]
        let mut grad = [[[0.0; 2]; 2]; 2];
        for c in 0..2 {
            let mut dm = [[0.0; 3]; 3];
            for (k, &(i, j)) in PAIRS.iter().enumerate() {
                let v = if c == 0 { dt[k].0[n] } else { dt[k].1[n] };
                dm[i][j] = v;
                dm[j][i] = v;
            }
            let ge = [
                contract_gamma(&amb[n].gamma, e[c], e[0]),
                contract_gamma(&amb[n].gamma, e[c], e[1]),
            ];
            for a in 0..2 {
                for b in 0..2 {
                    grad[c][a][b] = bil(&dm, e[a], e[b]) - bil(&tm, ge[a], e[b]) - bil(&tm, e[a], ge[b]);
                }
            }
        }
        let hi = inverse2(induced[n]);
        let m = [[hi[0], hi[1]], [hi[1], hi[2]]];
        let mut s = 0.0;
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    for f in 0..2 {
                        for d in 0..2 {
                            for ee in 0..2 {
                                s += m[c][f] * m[a][d] * m[b][ee] * grad[c][a][b] * grad[f][d][ee];
                            }
                        }
                    }
                }
            }
        }
        out.push(s.max(0.0).sqrt());
    }
    Ok(out)
}

#[derive(PartialEq)]
struct Visit(f64, usize);
impl Eq for Visit {}
impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn grid_neighbours(grid: &SphereGrid, node: usize) -> Vec<usize> {
    let (nlat, nlon) = (grid.nlat(), grid.nlon());
    let p = node / nlon;
    let q = node % nlon;
    let at = |p: usize, q: i64| p * nlon + q.rem_euclid(nlon as i64) as usize;
    let qi = q as i64;
    let mut out = vec![at(p, qi - 1), at(p, qi + 1)];
    for dq in -1..=1 {
        if p > 0 {
            out.push(at(p - 1, qi + dq));
        }
        if p + 1 < nlat {
            out.push(at(p + 1, qi + dq));
        }
        if p == 0 || p + 1 == nlat {
            out.push(at(p, qi + nlon as i64 / 2 + dq));
        }
    }
    out
}

/// Double-sweep graph-geodesic diameter over grid edges measured in the
/// ambient metric (average of the endpoint metrics).
fn graph_diameter(grid: &SphereGrid, positions: &[[f64; 3]], amb: &[AmbientPoint]) -> f64 {
    let edge = |a: usize, b: usize| {
        let d = [
            positions[b][0] - positions[a][0],
            positions[b][1] - positions[a][1],
            positions[b][2] - positions[a][2],
        ];
        0.5 * (gdot(&amb[a].g, d, d).sqrt() + gdot(&amb[b].g, d, d).sqrt())
    };
    let sweep = |start: usize| -> (usize, f64) {
        let mut dist = vec![f64::INFINITY; grid.len()];
        let mut heap = BinaryHeap::new();
        dist[start] = 0.0;
        heap.push(Visit(0.0, start));
        while let Some(Visit(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for v in grid_neighbours(grid, u) {
                let nd = d + edge(u, v);
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Visit(nd, v));
                }
            }
        }
        dist.iter()
            .enumerate()
            .fold((start, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc })
    };
    let (far, _) = sweep(0);
    sweep(far).1
}
