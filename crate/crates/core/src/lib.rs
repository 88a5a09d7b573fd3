//! Simulation and numerical verification of the planar random walk that
//! avoids the interior of the convex hull of its past positions.
//!
//! Module map:
//! - [`geom`]: points, directions, orientation and projection.
//! - [`hull`]: incremental convex hull, interior cones, diameter.
//! - [`walk`]: step samplers and trajectories.
//! - [`observables`]: ladder epochs, lens frames, good steps, supermartingale.
//! - [`drift`]: exact drift integrals and derived constants.
//! - [`montecarlo`]: ensembles and the empirical estimators.
//! - [`io`]: configuration, trajectory CSV, stats JSON and SVG output.
//! - [`cli`]: the `rancher` command.

pub mod cli;
pub mod drift;
pub mod error;
pub mod geom;
pub mod hull;
pub mod io;
pub mod montecarlo;
pub mod observables;
pub mod quadrature;
pub mod walk;

pub use error::*;
