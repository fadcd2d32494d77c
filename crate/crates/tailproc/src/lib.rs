//! Estimation of the spectral tail process of heavy-tailed stationary time series.
//!
//! A regularly varying stationary series has a spectral tail process `Theta`
//! describing the shape of its extreme clusters. This crate provides
//!
//! * finite-support path and discrete spectral-law types ([`spectral`]),
//! * the shift-and-rescale transform whose fixed points are exactly the valid
//!   spectral tail laws, together with invariance and time-change checks ([`rs`]),
//! * the forward, backward, Hill and projection estimators computed from an
//!   observed series ([`estimators`]),
//! * seedable simulators for three heavy-tailed benchmark models and samplers
//!   of their tail processes ([`models`]),
//! * exact asymptotic variances of the estimators for discrete laws ([`asymvar`]),
//! * a reproducible Monte Carlo benchmark harness ([`bench`]).
//!
//! The `tailproc` binary exposes all of it behind
//! `simulate | estimate | hill | benchmark | asymvar | verify` subcommands.

pub mod asymvar;
pub mod bench;
pub mod cli;
mod error;
pub mod estimators;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod rs;
pub mod spectral;

pub use error::{Error, Result};
