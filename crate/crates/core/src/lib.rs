//! Bulk-surface reaction-diffusion model of a catalytic cylindrical pore.
//!
//! Species advect and diffuse in the pore `disk(R) x (0, h)`, adsorb on and desorb
//! from the lateral wall, and react on the wall through one reversible mass-action
//! reaction. The crate discretizes the model with cell-centred finite volumes,
//! assembles the operator linearized at a constant equilibrium, checks the
//! Poincare-type stability criterion `max |a||b| <= 1/C_P` against the computed
//! spectrum, and integrates the nonlinear system in time.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mesh;
pub mod model;
pub mod operators;
pub mod sparse;
pub mod spectral;
pub mod state;
pub mod time;

pub use error::{Error, Result};

/// First line of every CSV file written by this crate and the CLI.
pub const CSV_HEADER: &str = "# porestab-csv v1";

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
