//! Constant-mean-curvature slices of the Kruskal extension of Schwarzschild
//! spacetime, and foliations assembled from them.
//!
//! The layers build on each other: [`numerics`] (roots, singular quadrature,
//! an adaptive Runge-Kutta integrator), [`geometry`] (coordinates, envelopes,
//! the CMC equation), [`slice`] (individual T-axisymmetric slices by two
//! independent generators), [`foliation`] (the monotone curve `y(r)` and the
//! leaf family), and [`verify`] (reports over all of the above).

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod foliation;
pub mod geometry;
pub mod numerics;
pub mod slice;
pub mod verify;

pub use error::{Error, Result};
pub use foliation::{FoliationCurve, LeafBranch, LeafParams};
pub use geometry::{KruskalPoint, Region, SliceParams};
pub use numerics::Tolerances;
pub use slice::{Branch, Hypersurface, Sample, SliceKind, SliceOptions};
pub use verify::{CheckRecord, Suite, VerificationReport, VerifyConfig};
