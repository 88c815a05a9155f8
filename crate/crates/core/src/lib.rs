//! Boundary feedback stabilization of the Chafee–Infante equation
//!
//! ```text
//! y_t = ν y_xx + α y − δ y³   on (0,1),   y(t,0) = 0,
//! ε y_x(t,1) + y(t,1) = u(t),  u(t) = −r ∫₀¹ x y(t,x) dx
//! ```
//!
//! The Dirichlet feedback condition `y(t,1) = u(t)` is replaced by the Robin
//! condition above (penalty parameter `ε`), discretized with continuous P1
//! elements vanishing at `x = 0` and stepped with backward Euler + Newton.
//!
//! Module map:
//!
//! - [`params`]: model coefficients, admissibility check and decay-rate bounds
//! - [`mesh`], [`fem`]: partition of `[0,1]`, assembled P1 operators, nonlinear
//!   terms and norms
//! - [`linalg`]: symmetric tridiagonal storage, Thomas solve and the
//!   Sherman–Morrison rank-one correction
//! - [`solver`]: residual/Jacobian of the fully discrete scheme, Newton and the
//!   time loop
//! - [`analysis`]: decay fits, energy monitor, errors against reference
//!   solutions, observed orders, Cauchy-in-ε studies
//! - [`harness`]: JSON experiment configs, CSV/SVG output, experiment drivers
//! - [`exec`]: ordered map over independent runs, rayon-backed when the
//!   `parallel` feature is on

pub mod analysis;
pub mod error;
pub mod exec;
pub mod fem;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod params;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use fem::{AssembledSystem, Norms, Projection, StateVector};
pub use mesh::MeshPartition;
pub use params::{ModelParams, RateReport};
pub use solver::{NewtonOptions, StateTrajectory, TimeGrid, Variant};
