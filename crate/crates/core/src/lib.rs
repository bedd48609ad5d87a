//! Thin-wire method-of-moments toolkit for curved HF monopoles and linear
//! arrays of them over a perfectly conducting ground.
//!
//! * [`geometry`] builds the wire models.
//! * [`mom`] fills and solves the Galerkin system.
//! * [`rf`] turns impedances into S11, return loss and bandwidth.
//! * [`farfield`] integrates patterns, directivity and realized gain.
//! * [`array`] drives steered arrays and the array-factor cross-check.

// negated float comparisons are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod error;
pub mod farfield;
pub mod format;
pub mod geometry;
pub mod linalg;
pub mod mom;
pub mod nec;
pub mod quadrature;
pub mod rf;

pub use error::{Error, Result};
pub use farfield::{AngularGrid, Direction, FarFieldPattern};
pub use geometry::{
    build_curved_monopole, build_linear_array, ArrayLayout, CurvedMonopoleParams, FeedPort, Vec3,
    WireModel, WireSegment,
};
pub use mom::{Frequency, GroundModel, SolveResult};
pub use rf::{BandwidthReport, FrequencyResponse};

pub use num_complex::Complex64;
