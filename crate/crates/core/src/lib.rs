//! Matrix quasi-representations of differentiation and the Lax flows built on them.
//!
//! The crate is organised bottom-up:
//!
//! - [`calogero`]: interpolation meshes, the Calogero matrices `X`, `Z`, and the
//!   operations that act on Lagrange coefficient vectors.
//! - [`markov`]: the splitting `gl(N) = M ⊕ E` into zero-column-sum and diagonal
//!   matrices, its R-map and the finite-dimensional Lie-Poisson brackets.
//! - [`loopalg`]: matrix Laurent polynomials with the residue-trace pairing and the
//!   `±` splitting inherited from [`markov`].
//! - [`aks`]: Casimir functionals, their gradients and AKS generators, the Riemann-type
//!   state, and [`aks::integrate_flow`] with conservation diagnostics.
//! - [`ode`]: the embedded Runge-Kutta 5(4) integrator used by the flows.

pub mod aks;
pub mod calogero;
mod error;
pub mod loopalg;
pub mod markov;
pub mod matrix;
pub mod ode;

pub use error::{Error, Result};
pub use matrix::Matrix;
