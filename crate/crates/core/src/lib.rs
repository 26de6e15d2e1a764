//! Certified bounds on photon-number statistics from the click statistics of
//! a balanced multiplexed on/off detector.
//!
//! The click statistics of an `M`-channel detector constrain, but do not fix,
//! the photon-number distribution. For any observable linear in `p_n` the
//! set of compatible values is an interval whose endpoints are the optima of
//! a pair of linear programs; [`bounds`] assembles and solves them with the
//! simplex solver in [`lp`] and checks the resulting duality certificates.

#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod analytic;
pub mod bounds;
pub mod dd;
pub mod detector;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod report;
pub mod states;

pub use error::{Error, Result};
