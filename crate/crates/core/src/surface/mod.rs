//! Discretized closed surfaces, their fundamental forms in Euclidean and
//! curved ambients, nearly round diagnostics and identity checks.

pub mod diagnostics;
pub mod forms;
pub mod identities;
pub mod immersion;

pub use diagnostics::{best_fit_sphere, gauss_bonnet_defect, nearly_round_diagnostics, BestFitSphere, NearlyRoundReport};
pub use forms::{fundamental_forms, Ambient, FundamentalData, Sym2};
pub use identities::{
    distance_hessian, integral_identity_residual, lemma23_residual, lemma24_residual,
    mean_curvature_expansion_residual, IntegralIdentityReport, DistanceHessianReport,
};
pub use immersion::{coordinate_sphere, immerse_radial, Immersion, RadialForm};
