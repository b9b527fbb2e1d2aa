//! Tissue stiffness sensing with a buckling, FBG-instrumented composite beam.
//!
//! The pipeline runs from the beam cross-section ([`cross_section`]) through
//! the fixed-pinned post-buckling elastica ([`elastica`]) and the grating
//! strain/wavelength model ([`fbg`]) to synthetic indentation trials
//! ([`trials`]) and modulus estimation from sensor traces ([`estimator`]).
//! [`cli`] wires the stages to config and CSV files.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod cross_section;
pub mod elastica;
pub mod error;
pub mod estimator;
pub mod fbg;
pub mod io;
pub mod parallel;
pub mod trials;

pub use cross_section::{BeamSpec, SectionGeometry, SectionOffsets};
pub use elastica::{ForceDisplacementCurve, NormalizedSolution, PostBuckleSolution, SolverConfig};
pub use error::{Error, Result};
pub use estimator::{EstimatorConfig, StiffnessEstimate};
pub use fbg::GratingLayout;
pub use parallel::Execution;
pub use trials::{Protocol, TissueSpec, TrialTrace};

/// `μ²` for the fixed-pinned column, `μ ≈ 4.4934` the first positive root of `tan μ = μ`.
pub const FIXED_PINNED_CRITICAL_FACTOR: f64 = 20.190_728_556_426_63;
