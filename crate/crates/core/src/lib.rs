//! Synchronization-free network delay tomography.
//!
//! End-to-end delays measured between a source and a receiver whose clocks
//! are offset by an unknown constant cannot be used directly to infer link
//! delays. Subtracting a reference path's measurement from every other path
//! cancels the offset, at the cost of one equation; sparse recovery still
//! identifies the few congested links. This crate provides:
//!
//! * [`topology`]: networks, path enumeration and path selection;
//! * [`matrix`]: routing and differential matrices, exact mutual coherence,
//!   and a checker for the coherence dichotomy of differential matrices;
//! * [`measurement`]: simulated link delays, clock offsets and differential
//!   measurements;
//! * [`solver`]: l1-regularised recovery and an exhaustive oracle;
//! * [`evaluation`]: k-identifiability ratio experiments.
//!
//! Numeric code is generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! it to `f64`.

pub mod combinations;
pub mod error;
pub mod evaluation;
pub mod format;
pub mod matrix;
pub mod measurement;
pub mod scalar;
pub mod solver;
pub mod topology;

pub use evaluation::{
    k_identifiability_ratio, reference_sweep, results_csv, row_count_comparison, DeltaMode,
    RatioReport, ReferenceChoice, Scheme,
};
pub use error::{Result, TomoError};
pub use matrix::{
    build_differential_matrix, build_routing_matrix, find_complementary_pair, lp_norm,
    mutual_coherence, verify_coherence_theorem, CoherenceReport, DifferentialRoutingMatrix,
    IntMatrix, RoutingMatrix, TheoremReport,
};
pub use scalar::Real;
pub use topology::{enumerate_simple_paths, select_paths, Path, PathSet, SelectionStrategy, Topology};

pub type DelayParams = measurement::DelayParams<f64>;
pub type LinkDelayVector = measurement::LinkDelayVector<f64>;
pub type MeasurementSet = measurement::MeasurementSet<f64>;
pub type SolveOptions = solver::SolveOptions<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type ExperimentConfig = evaluation::ExperimentConfig<f64>;

pub type DelayParams32 = measurement::DelayParams<f32>;
pub type SolveOptions32 = solver::SolveOptions<f32>;
pub type SolveResult32 = solver::SolveResult<f32>;
