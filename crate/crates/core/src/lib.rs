//! Lipschitz quotient maps built from complex polynomials.

pub mod basemaps;
pub mod chain;
pub mod critical;
pub mod demos;
pub mod error;
pub mod homeo;
pub mod params;
pub mod planemap;
pub mod poly;
pub mod quotient;
pub mod report;
pub mod roots;
pub mod sampling;
pub mod suite;
pub mod verify;

pub use critical::{critical_points, CriticalPoint};
pub use error::{Error, Result};
pub use poly::{Complex, Polynomial};
pub use roots::{Root, RootFinder};
