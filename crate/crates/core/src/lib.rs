//! Additive normal tempered stable (ATS) option-pricing toolkit.
//!
//! The crate covers the full chain used to study whether the skew
//! parameter `eta_t` of an ATS model is constant in time: characteristic
//! functions ([`model`]), the tempered stable additive subordinator and
//! its analytic checks ([`subordination`]), Fourier and Black pricing
//! ([`pricing`]), Monte Carlo oracles ([`sampling`]), quote handling and
//! synthetic surfaces ([`market_data`]), per-maturity calibration
//! ([`calibration`]), the weighted power-law test ([`inference`]) and
//! report builders ([`report`]).

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod inference;
pub mod market_data;
pub mod model;
pub mod par;
pub mod pricing;
pub mod quad;
pub mod report;
pub mod sampling;
pub mod subordination;

pub use error::{Error, Result};
pub use model::{CurveSpec, ModelParams, TenorParams};
pub use par::Execution;
