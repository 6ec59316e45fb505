//! Spectral stability and bifurcation toolkit for pressure-driven flow in a
//! narrow curved channel (the Dean problem).
//!
//! The crate computes, in order of dependency:
//!
//! * the laminar swirl profile between the two cylinder walls and the
//!   narrow-gap reduction of its coupling coefficients ([`geometry`]);
//! * a divergence-free trigonometric vector basis for axisymmetric
//!   disturbances under free boundary conditions ([`basis`], [`quad`]);
//! * the modal growth rates, the critical curve and its minimiser, and the
//!   exchange-of-stabilities sign pattern ([`stability`]);
//! * the quadratic interaction tensor, the slaved-mode corrections, the
//!   bifurcation coefficient gamma and the post-critical equilibria
//!   ([`reduction`]);
//! * a truncated Galerkin system with exponential / RK4 time stepping,
//!   steady-state detection and basin-of-attraction experiments
//!   ([`dynamics`]);
//! * physical-space evaluation, streamfunction, vortex-cell counting and
//!   CSV/SVG export ([`fields`]).
//!
//! All heavy sweeps (tensor assembly, seed ensembles, eigen scans) run on
//! rayon when the `parallel` feature (default) is enabled and fall back to
//! plain loops without it; either way results are merged in a fixed order,
//! so outputs are bit-identical.

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod par;
pub mod quad;
pub mod reduction;
pub mod stability;

mod svg;

pub use basis::{Branch, ModeIndex, SpectralField, Truncation, VectorMode};
pub use error::{Error, Result};
pub use geometry::{FluidParameters, ProfileConstants};
pub use par::ExecMode;
pub use quad::QuadratureGrid;
