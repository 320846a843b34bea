//! Random iterated function systems of rational maps on the Riemann sphere.

pub mod chart;
pub mod error;
pub mod lambda_class;
pub mod output;
pub mod rds;
pub mod series;
pub mod stats;
pub mod sphere;
pub mod systems;

pub use error::{Error, Result};
pub use sphere::{chordal_distance, RationalMap, SpherePoint};
pub use systems::{Family, IfsSystem};
