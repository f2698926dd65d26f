//! Sample-splitting goodness-of-fit diagnostics for time-series models.
//!
//! Fit a model on the first `f_n` observations (the analysis split),
//! reconstruct residuals over the last `l_n` time points (the assessment
//! split), and test those residuals for serial independence with the ACF,
//! the squared-residual ACF, or the auto-distance correlation function
//! (ADCF). With the half split `f_n = n/2`, `l_n = n` the residual
//! statistics behave asymptotically as if the true iid noise were observed,
//! so plain chi-squared bands and iid-calibrated ADCF quantiles apply
//! without dependence corrections.
//!
//! The crate provides:
//! - [`noise`]: innovation distributions, characteristic functions and the
//!   tau diagnostic functions;
//! - [`models`]: ARMA/GARCH simulation and truncated residual machinery;
//! - [`estimators`]: AR least squares, ARMA pseudo-MLE, GARCH QMLE;
//! - [`splitting`]: the (f_n, l_n) splitting contract;
//! - [`acf`] / [`adcf`]: the residual statistics and portmanteau tests;
//! - [`harness`]: a deterministic parallel Monte Carlo engine.

pub mod acf;
pub mod adcf;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod models;
pub mod noise;
pub mod optim;
pub mod poly;
pub mod rng;
pub mod series_io;
pub mod special;
pub mod splitting;

pub use error::{Error, Result};
