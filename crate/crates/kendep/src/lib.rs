//! Dependence measurement for a d-dimensional random vector via the area
//! under the Kendall curve (AUK), together with a total-independence test.
//!
//! The probability integral transform T = F(X) of a random vector under its
//! own joint cdf has a distribution function K(t) (the Kendall distribution
//! function). Under total independence K equals the closed-form law of a
//! product of d independent uniforms, and the area under the Kendall curve
//! equals 1/2. This crate estimates the AUK for every sign rotation of the
//! data, turns the 2^d-vector of areas into a normalized index of mutual
//! dependence, standardizes the index against the equicorrelated normal
//! family, and calibrates a z-statistic test of total independence by Monte
//! Carlo.
//!
//! Modules map to the pipeline stages:
//!
//! - [`sample`]: the validated n x d observation matrix.
//! - [`kendall`]: the product-uniform Kendall law, pseudo-observations,
//!   the empirical Kendall cdf and the AUK estimator.
//! - [`orthant`]: sign rotations, the one-pass orthant dominance counter,
//!   the AUK vector, the index I and dependence levels.
//! - [`standardize`]: monotone polynomial standardizers mapping I to I*.
//! - [`independence`]: the z_n statistic, its null standard deviation and
//!   small-sample critical-value calibration.
//! - [`distributions`]: seeded samplers for the simulation families.
//! - [`diagnostics`]: Kendall curves per rotation and the class-membership
//!   check for the domains where the index is a measure of dependence.
//!
//! All estimators are rank-based: strictly increasing per-coordinate
//! transforms of the data leave every statistic bit-identical. All samplers
//! and Monte Carlo routines are deterministic functions of their seeds,
//! independent of thread count.

pub mod diagnostics;
pub mod distributions;
mod error;
pub mod independence;
pub mod kendall;
pub mod numeric;
pub mod orthant;
pub mod rng;
pub mod sample;
pub mod special;
pub mod standardize;

pub use error::{Error, Result};
pub use kendall::{
    auk_estimate, empirical_kendall_cdf, kendall_tau_pairwise, multivariate_ecdf_at_points,
    pseudo_obs_excluding_self, ProductKendallLaw, PseudoObservations,
};
pub use orthant::{
    auk_vector, classify_level, dependence_report, index_i, normalizing_constant,
    orthant_pseudo_obs_all_rotations, sign_patterns, AukVector, DependenceLevel, DependenceReport,
    SignPattern,
};
pub use sample::Sample;
pub use standardize::{
    calibrate_phi, fit_monotone_polynomial, index_i_star, mc_index_for_equicorrelated_normal,
    phi_builtin, PhiProvenance, StandardizerPhi,
};
