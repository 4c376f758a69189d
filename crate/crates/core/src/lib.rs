//! Age of information for slotted random access with power-domain NOMA and successive
//! interference cancellation.
//!
//! Closed-form average AoI for the no-retransmission and retransmission schemes, the
//! combinatorics of SIC decoding outcomes, a buffer-occupancy Markov chain, a slot-level
//! Monte Carlo simulator, and experiment drivers that regenerate the reference grids.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod math;
pub mod model;
pub mod nrt;
pub mod report;
pub mod rt;
pub mod sim;
pub mod stationary;

pub use analysis::{
    analyze, average_aoi, ptx_grid, ptx_grid_argmin, GridOptimum, Scheme, SchemeAnalysis,
};
pub use combinatorics::{beta_any, beta_u1, brute_force_success_dist, SuccessDistribution};
pub use error::{AoiError, Result};
pub use model::{
    configure_snr_ladder, db_to_linear, linear_to_db, snr_levels, SnrLadder, SystemConfig,
    Violation,
};
pub use nrt::{average_aoi_nrt, optimal_ptx_nrt_k2, NrtResult, TwoLevelOptimum};
pub use report::{format_sig, CsvTable};
pub use rt::{average_aoi_rt, AbsorbingMoments, BufferChain, RtResult};
pub use sim::{
    run_replications, run_simulation, Delivery, ReplicationSummary, SimResult, Simulator,
};
