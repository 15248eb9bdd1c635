//! Covert (low-probability-of-detection) capacity of the MIMO AWGN channel.
//!
//! The crate computes the delta-PD constrained rate of a multi-antenna
//! Gaussian channel observed by an optimal-detector adversary:
//!
//! - [`channel`]: channel and Gram matrices, the compound adversary class,
//!   and random/structured channel factories;
//! - [`divergence`]: relative entropy at the adversary and the
//!   detection-theoretic bounds that tie it to detector error;
//! - [`optimizer`]: the constrained covariance solvers (with and without a
//!   shared secret) plus the closed-form achievable schemes;
//! - [`scaling`]: square-root-law bounds, power-threshold formulas, and the
//!   normalized scaling estimators;
//! - [`geometry`]: high-dimensional sphere geometry and null-steering
//!   beamforming;
//! - [`detection`]: Monte Carlo simulation of the adversary's optimal
//!   likelihood-ratio test.
//!
//! The crate is `no_std` (with `alloc`); IO, configuration and file formats
//! live in the companion CLI crate.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod detection;
pub mod divergence;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod optimizer;
pub mod rng;
pub mod scaling;

pub use channel::{
    make_unit_rank, random_unit_vector, worst_case_willie, worst_case_willie_channel,
    ChannelMatrix, CompoundWillieSet, GramMatrix, SystemConfig, UnitRankChannel,
};
pub use divergence::{
    kl_isotropic, kl_monotone_check, kl_willie, kl_willie_gram, pinsker_bound, sum_error_floor,
    DivergenceBreakdown, GaussianPair,
};
pub use error::{Error, Result};
pub use optimizer::{
    achievable_scheme_nosecret, achievable_scheme_secret, kkt_residual, solve_nosecret,
    solve_secret, standard_waterfill, CovarianceSolution, CovertnessMode, KktReport,
    OptimizerSettings,
};
