//! Numerics for nonautonomous integrodifference equations on an interval.
//!
//! The crate simulates recursions `u_{t+1} = F_t(u_t)` whose right-hand side
//! is a Hammerstein integral operator (dispersal kernel times a growth
//! nonlinearity), spatially discretized by spline collocation of degree 1-3
//! with trapezoidal quadrature. On top of the time stepper it provides
//! pullback-limit approximation, fixed points of autonomous limits, absorbing
//! radii from linear growth bounds, discretization-error bookkeeping and an
//! empirical convergence-rate experiment.
//!
//! Module map:
//! * [`model`] — kernels, growth laws, linear growth and Lipschitz bounds
//! * [`grid`] / [`quadrature`] — spatial grids and the trapezoidal rule
//! * [`splines`] — B-spline bases and the three collocation projections
//! * [`dynamics`] — time stepping, pullback states, distances, fixed points
//! * [`analysis`] — absorbing radii, error bounds, rate tables, forward limits
//! * [`checks`] — randomized invariant suites used by the CLI

pub mod analysis;
pub mod banded;
pub mod checks;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod model;
pub mod quadrature;
pub mod splines;

pub use error::{Error, Result};
pub use grid::{sample_points, Grid};
pub use model::{
    GrowthBounds, GrowthSpec, Habitat, IdeModel, Inhomogeneity, KernelSpec, SupScheme, TimeDomain,
};
pub use quadrature::{trapezoid_rule, QuadratureRule};
pub use splines::{
    lebesgue_estimate, project, sup_samples, ProjectionFamily, SplineFunction, SplineSpace,
};
