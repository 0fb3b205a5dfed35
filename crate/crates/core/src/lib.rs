//! Discrimination of M-ary symmetric phase shifts with optimal and
//! conventional quantum probes.
//!
//! The error probability of the square-root measurement depends on a probe
//! only through its photon-number distribution folded modulo M, so most of
//! this crate works with that folded distribution and the circulant Gram
//! matrix it generates. [`bpsk`] models a lossy dual-rail receiver for M = 2.

// Input checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpsk;
pub mod cli;
pub mod compensated;
pub mod distributions;
pub mod error;
pub mod gram;
pub mod optimizer;
pub mod probes;
pub mod specfun;

pub use distributions::{MeanEnergy, ModMDistribution, PhotonDistribution};
pub use error::{Error, Result};
pub use gram::{
    binary_error_from_overlap, eigenvalues, error_probability, error_probability_band,
    EigenvalueSpectrum, GramRow,
};
pub use optimizer::{
    optimal_error_curve, optimize_squeeze, solve_optimal, OptimalSolution, SqueezeOptimum,
};
pub use probes::{ProbeSpec, Sign, SqueezeParams};
