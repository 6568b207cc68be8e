//! Certified bounds on the nuclear norm of dense real tensors.
//!
//! The tensor nuclear norm is NP-hard to compute, but the nuclear norms of
//! the matrix flattenings are not. This crate computes
//!
//! * lower bounds `‖A_(m)‖_*` from every mode-m flattening,
//! * refined upper bounds from the singular vectors of each flattening, and
//!   the coarse dimension-dependent bounds they imply,
//! * the mean flattening norm `‖A‖_#` and a Hilbert–Schmidt bound,
//! * tightness certificates when the interval provably collapses,
//!
//! plus small-scale independent estimators ([`oracle`]) for validating all of
//! the above. See the `examples/` directory for one runnable program per
//! capability.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod tensor;

pub use bounds::{
    analyze_mode, certify_tightness, coarse_upper_bound, full_report, hash_norm, hs_upper_bound,
    lower_bound, upper_bound, BoundsReport, ModeAnalysis, TightnessCertificate, DEFAULT_CERT_TOL,
};
pub use error::{Error, Result};
pub use linalg::Svd;
pub use oracle::{OracleConfig, OracleEstimate, RankOneTerm};
pub use tensor::{DenseTensor, Matrix};
