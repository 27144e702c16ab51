//! Numerical toolkit for compact genus-2 hyperbolic surfaces glued from
//! right-angled hexagons: holomorphic 1-forms, period matrices, Riemann theta
//! functions, harmonic bases with prescribed poles and a method of particular
//! solutions for the Laplace equation on perforated surfaces.

pub mod abeljacobi;
pub mod basis;
pub mod error;
pub mod hyperbolic;
pub mod mps;
pub mod numerics;
pub mod oneforms;
pub mod surface;
pub mod theta;

pub use error::{Error, Result};
