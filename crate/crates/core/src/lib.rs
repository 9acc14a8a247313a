//! Exact disc-union geometry on the flat torus, outer-contour analytics,
//! auxiliary-process samplers and estimators for critical droplets in a
//! continuum particle model whose energy is the area of a union of discs.
//!
//! Modules are layered bottom-up: [`model_constants`] holds closed-form
//! constants and the renewal law, [`torus_geometry`] the exact halo and
//! erosion geometry, [`contours`] the boundary-point analytics,
//! [`processes`] the angular Poisson process and bridge samplers, and
//! [`estimators`] the Monte Carlo and series estimators built on top.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contours;
pub mod error;
pub mod estimators;
pub mod io;
pub mod model_constants;
pub mod numerics;
pub mod processes;
pub mod rng;
pub mod tolerances;
pub mod torus_geometry;

pub use contours::{Functionals, OuterContour};
pub use error::{Error, Result};
pub use model_constants::{DerivedConstants, ModelParams, RenewalLaw};
pub use processes::{AngularSample, SurfaceStatistics, TiltWeight, ZConfiguration};
pub use torus_geometry::{ArcSegment, Configuration, Halo, TorusPoint};
