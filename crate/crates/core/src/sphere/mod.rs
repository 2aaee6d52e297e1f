//! Spectral substrate on the unit sphere: quadrature grid, real spherical
//! harmonic transforms, the round Laplacian and conformal dilations.

pub mod grid;
pub mod harmonics;
pub mod legendre;
pub mod mobius;
pub mod tensor;

pub use grid::SphereGrid;
pub use harmonics::{AngularDerivatives, HarmonicCoeffs};
pub use mobius::{apply_mobius, center_gauge, GaugeResult};

/// Grid values, one per node in ring-major order.
pub type ScalarField = Vec<f64>;
