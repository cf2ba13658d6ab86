//! Entropy solutions of multi-dimensional scalar balance laws
//!
//! ```text
//! ∂ₜu + Div f(t, x, u) = F(t, x, u),    u(0, ·) = u₀,
//! ```
//!
//! together with numerical evaluation of the total-variation and
//! L¹-stability estimates satisfied by those solutions.
//!
//! - [`constants`]: Wallis integrals, unit-ball volumes, the radial mollifier
//!   family and its constants `C₁`, `M₁`.
//! - [`fields`]: uniform-grid scalar fields, total variation, shifted L¹
//!   differences, supports, snapshot dumps.
//! - [`models`]: flux/source definitions with derivative bundles, sampled
//!   sup norms and the growth coefficients built from them.
//! - [`solver`]: first-order local Lax–Friedrichs finite-volume solver and
//!   exact-solution catalog.
//! - [`estimates`]: both sides of every estimate, with term-by-term reports.
//! - [`harness`]: scenario configs, suites and convergence tables.

pub mod constants;
pub mod error;
pub mod estimates;
pub mod fields;
pub mod harness;
pub mod models;
pub mod quadrature;
pub mod solver;
pub mod sum;

pub use error::{Error, Result};
