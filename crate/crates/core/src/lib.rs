//! Last-iterate dynamics of no-regret learning in smooth monotone games.
//!
//! - [`operators`]: monotone operator families and the games inducing them.
//! - [`dynamics`]: optimistic gradient, extragradient, gradient descent,
//!   stationary p-step linear iterations and online regret environments.
//! - [`diagnostics`]: gradient and total gaps, best-iterate and last-iterate
//!   bound checks, rate fits.
//! - [`potential`]: the backward-built adaptive potential along an
//!   optimistic run.
//! - [`scli`]: companion matrices, polynomial spectral radii and
//!   lower-bound instances.
//! - [`cli`]: the config-driven experiment harness behind the binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod potential;
pub mod quadrature;
pub mod scli;

pub use error::{Error, Result};
