//! Ricci soliton checks for hypersurfaces of four-dimensional Minkowski space
//! whose potential field is the tangential part of the position vector.
//!
//! The pipeline is: an [`hypersurface::Immersion`] evaluated on Taylor
//! [`jet::Jet`]s gives exact derivatives at each chart point,
//! [`hypersurface::sample`] turns them into extrinsic and intrinsic curvature,
//! and [`soliton`] fits the soliton constant over a grid. The
//! [`canonical`] module solves the same soliton condition algebraically for
//! each canonical form of the shape operator.

pub mod analysis;
pub mod canonical;
pub mod catalog;
pub mod expr;
pub mod frame_ode;
pub mod hypersurface;
pub mod jet;
pub mod lorentz;
pub mod soliton;
pub mod tolerances;

pub use hypersurface::{Immersion, HypersurfaceSample};
pub use jet::Jet;
pub use lorentz::{Mat3, MinkVector, ShapeOperatorForm};
