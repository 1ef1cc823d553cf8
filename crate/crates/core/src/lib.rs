//! Periodic solutions of semilinear parabolic problems on fractional power
//! spaces, at desk scale.
//!
//! The library builds the whole chain for u' = -A u + F(t, u) with a positive
//! diagonal operator A on a Galerkin span of N modes:
//!
//! * `spectral`: the operator model; semigroup, fractional powers,
//!   resolvents, phi-1 weights, and the smoothing constant
//!   sup_t t^alpha ||A^alpha S(t)||.
//! * `field`: time-periodic nonlinearities with declared growth envelopes
//!   and asymptotic slopes; averaging and homotopy blending.
//! * `nemytskii`: the collocation realization of reaction terms
//!   f(t, xi, u, u_xi) on the Dirichlet sine basis.
//! * `solver`: exponential integrators for the mild formulation, the
//!   translation (Poincare) operator and its Jacobian, and a computable
//!   a priori growth bound.
//! * `degree`: Brouwer degree by Jacobian-sign summation with boundary
//!   certificates, the stationary degree through the resolvent composition,
//!   and the fixed-point index of the translation operator.
//! * `continuation`: averaged solves, resonance screening, the
//!   Krasnosel'skii and averaging comparisons, and natural-parameter
//!   continuation of the periodic fixed point up to lambda = 1.
//!
//! Everything is generic over the working precision through [`Scalar`];
//! the `*64` aliases fix f64, the precision the shipped tolerances are
//! calibrated for.

pub mod continuation;
pub mod degree;
pub mod error;
pub mod field;
pub mod linalg;
pub mod nemytskii;
pub mod newton;
pub mod sampling;
pub mod solver;
pub mod spectral;

mod scalar;

pub use error::{Error, Result};
pub use scalar::{approx_f64, real, Scalar};

pub type Operator64 = spectral::SpectralOperator<f64>;
pub type State64 = spectral::State<f64>;
pub type Field64 = field::Field<f64>;
pub type IntegratorConfig64 = solver::IntegratorConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type Ball64 = degree::Ball<f64>;
pub type Branch64 = continuation::Branch<f64>;
