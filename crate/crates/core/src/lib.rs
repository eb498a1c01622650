//! Flat surfaces built by slit constructions, truncated to a finite window,
//! with a geodesic tracer, cone and saddle-connection analysis, and checks
//! of the structural properties of the constructions.

pub mod algebra;
pub mod constructions;
pub mod surface;
pub mod tolerance;
pub mod verifier;
