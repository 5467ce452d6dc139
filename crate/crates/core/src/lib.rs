//! Risk differences for a binary treatment `A`, binary confounder `C` and a
//! binary proxy `D` of the confounder, with outcome `Y`.
//!
//! The joint distribution factorizes as `p(C) p(D|C) p(A|C) p(Y|A,C)`, so
//! `D` is a non-differential proxy: it carries information about `C` only.
//! Three average effects are compared:
//!
//! - `rd_true`, adjusted for `C` (what we want),
//! - `rd_obs`, adjusted for `D` (what we can compute),
//! - `rd_crude`, unadjusted.
//!
//! ```
//! use proxybound::{model::DiscreteModel, exact::risk_differences};
//!
//! let m = DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [1.0, 0.0, 0.5, 0.2])
//!     .validate()?;
//! let rd = risk_differences(&m)?;
//! assert!((rd.rd_true - 0.15).abs() < 1e-12);
//! assert!((rd.rd_crude - 0.41).abs() < 1e-12);
//! assert!(rd.rd_true < rd.rd_obs && rd.rd_obs < rd.rd_crude);
//! # Ok::<(), proxybound::Error>(())
//! ```
//!
//! Modules: [`model`] (parameters and premise sets), [`exact`] (closed-form
//! inference), [`conditions`] (which orderings are predicted, and checking
//! them), [`sampler`] (simulation studies), [`search`] (counterexample
//! search), [`sem`] (linear path model), [`estimate`] (plug-in estimates
//! from data) and [`cli`].

pub mod cli;
pub mod conditions;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod search;
pub mod sem;

pub use error::{Error, Result};
