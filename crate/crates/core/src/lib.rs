pub mod embedding;
pub mod error;
pub mod harness;
pub mod jet;
pub mod linalg;
pub mod mass;
pub mod metric;
pub mod sphere;
pub mod surface;

pub use error::{Error, Result};
