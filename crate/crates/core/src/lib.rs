//! Poisson kernels and Green functions of Euclidean balls for hyperbolic
//! Brownian motion on the ball model of hyperbolic space.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: Pochhammer symbols, Gauss hypergeometric series, the radial
//!   solutions `F_k`/`G_k`, Gegenbauer polynomials and the complex gamma
//!   function.
//! - [`geometry`]: points of the ball model, hyperbolic distance, sphere areas.
//! - [`quadrature`]: Gauss–Legendre rules and adaptive Gauss–Kronrod
//!   integration on finite and semi-infinite intervals.
//! - [`kernels`]: Gegenbauer-spectral series for the Poisson kernel and the
//!   Green function of a ball.
//! - [`closedform`]: Laplace-weight integral representations (n = 4, 6),
//!   closed-form Green functions and numerical probes of the two conjectures
//!   about the entire function `f_z(k)`.
//! - [`mc_sim`]: Euler–Maruyama simulation of the exit law, the Feynman–Kac
//!   gauge and the comparison against the analytic coefficients.

// `!(a > b)` is used on purpose throughout: it rejects NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod kernels;
pub mod mc_sim;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{BallDomain, Point};
pub use specfun::Dimension;
