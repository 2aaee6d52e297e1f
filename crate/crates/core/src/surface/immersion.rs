use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::AfMetric;
use crate::sphere::SphereGrid;

/// Radial description `y = center + profile * w` of an immersion.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialForm {
    pub center: [f64; 3],
    pub profile: Vec<f64>,
}

/// A closed surface sampled on the nodes of a sphere grid.
#[derive(Debug, Clone)]
pub struct Immersion {
    grid: SphereGrid,
    positions: [Vec<f64>; 3],
    radial: Option<RadialForm>,
}

impl Immersion {
    /// Builds an immersion from Cartesian component fields.
    pub fn from_components(grid: &SphereGrid, positions: [Vec<f64>; 3]) -> Result<Self> {
        for c in &positions {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch { expected: grid.len(), got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidImmersion("non-finite node position".into()));
            }
        }
        Ok(Immersion { grid: grid.clone(), positions, radial: None })
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.positions
    }

    pub fn radial(&self) -> Option<&RadialForm> {
        self.radial.as_ref()
    }

    pub fn position(&self, node: usize) -> [f64; 3] {
        [self.positions[0][node], self.positions[1][node], self.positions[2][node]]
    }

    pub fn min_radius(&self) -> f64 {
        (0..self.grid.len()).map(|n| norm(self.position(n))).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        (0..self.grid.len()).map(|n| norm(self.position(n))).fold(0.0, f64::max)
    }

    pub fn check_outside(&self, metric: &AfMetric) -> Result<()> {
        let r = self.min_radius();
        if !(r > metric.exclusion_radius()) {
            return Err(Error::InsideExclusion { radius: r, exclusion: metric.exclusion_radius() });
        }
        Ok(())
    }

    /// Applies a rigid motion `y -> R y + t`.
    pub fn transformed(&self, rotation: [[f64; 3]; 3], translation: [f64; 3]) -> Immersion {
        let mut out = self.clone();
        for n in 0..self.grid.len() {
            let y = self.position(n);
            for i in 0..3 {
                out.positions[i][n] =
                    rotation[i][0] * y[0] + rotation[i][1] * y[1] + rotation[i][2] * y[2] + translation[i];
            }
        }
        out.radial = None;
        out
    }

    /// Node table `theta,phi,y1,y2,y3`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,phi,y1,y2,y3\n");
        for n in 0..self.grid.len() {
            let (t, p) = self.grid.angles(n);
            let y = self.position(n);
            let _ = writeln!(s, "{t:.17e},{p:.17e},{:.17e},{:.17e},{:.17e}", y[0], y[1], y[2]);
        }
        s
    }
}

/// `y = center + R(w) w` on every node.
pub fn immerse_radial(
    grid: &SphereGrid,
    center: [f64; 3],
    profile: &[f64],
    metric: Option<&AfMetric>,
) -> Result<Immersion> {
    if profile.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: profile.len() });
    }
    if profile.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidImmersion("radial profile must be positive".into()));
    }
    let mut positions = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for n in 0..grid.len() {
        let w = grid.unit_vector(n);
        for i in 0..3 {
            positions[i][n] = center[i] + profile[n] * w[i];
        }
    }
    let imm = Immersion {
        grid: grid.clone(),
        positions,
        radial: Some(RadialForm { center, profile: profile.to_vec() }),
    };
    if let Some(m) = metric {
        imm.check_outside(m)?;
    }
    Ok(imm)
}

/// Coordinate sphere `|x - center| = r`.
pub fn coordinate_sphere(grid: &SphereGrid, center: [f64; 3], r: f64, metric: Option<&AfMetric>) -> Result<Immersion> {
    immerse_radial(grid, center, &vec![r; grid.len()], metric)
}

pub(crate) fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}
