//! Numerical coarse Ricci curvature on weighted model manifolds.
//!
//! The crate provides the four layers needed to measure curvature through
//! optimal transport at small scales:
//!
//! - [`manifold`]: closed-form geometry (exp/log/distance/transport and
//!   curvature oracles) for the three constant-curvature families, plus
//!   smooth weight potentials with exact gradients and Hessians.
//! - [`measure`]: exact rejection samplers and a deterministic polar-grid
//!   quadrature for weighted geodesic-ball measures.
//! - [`ot`]: an exact discrete 1-Wasserstein solver with dual certificates
//!   and a small-instance brute-force oracle.
//! - [`coarse`]: the transport-map machinery (transport vector, tangent map
//!   and its inverse, signed projection distance) and the Monte-Carlo /
//!   quadrature curvature estimators built on it.
//! - [`rgg`]: Poisson point processes, rooted random geometric graphs, graph
//!   ball measures and the graph-curvature convergence experiment.
//!
//! Everything is `no_std` (with `alloc`): all operations are pure functions
//! of their inputs and a seed, so results are reproducible bit-for-bit on a
//! given platform.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coarse;
pub mod manifold;
pub mod measure;
pub mod ot;
pub mod rgg;
pub mod rng;
pub mod stats;

mod math;

pub use manifold::{GeometryError, Kind, ModelManifold, Point, Potential, TangentVector};
pub use measure::{BallMeasureSpec, MeasureError, MeasureVariant, WeightedPointCloud};
pub use ot::{brute_force_w1, solve_w1, w1_lower_bound_via_lipschitz, CostMatrix, OtError, TransportPlan};
