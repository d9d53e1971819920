//! Guess-free fitting of exponential decay models.
//!
//! The nonlinear decay rates are located by sampling a (quasi)convex error
//! function on a mesh and refining brackets around its minimum ([`tac`]).
//! For every candidate rate the linear coefficients are eliminated exactly,
//! either by an orthogonal projection ([`projection`]) or by a best max-norm
//! approximation in the plane spanned by the exponential and the constant
//! vector ([`chebyshev`]).
//!
//! ```
//! use tacfit::{fit, synth, ModelSpec};
//!
//! let obs = synth::single_exp_series();
//! let report = fit::fit_exp1(&obs, &ModelSpec::exp1()).unwrap();
//! assert!((report.params.rates[0] + 1.12345678).abs() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebyshev;
pub mod error;
pub mod fit;
pub mod io;
pub mod model;
pub mod oracles;
pub mod projection;
pub mod synth;
pub mod tac;

pub use error::{Error, Result};
pub use model::{validate_observations, FitReport, Interval, ModelKind, ModelSpec, Norm, Observations, ParamSet};
