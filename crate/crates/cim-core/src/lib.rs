//! Copula-based index of dependence and monotonicity between pairs of
//! variables, with tie-corrected Kendall estimators for continuous,
//! discrete, and hybrid data, an incremental tau kernel, monotonicity-region
//! detection over the unit square, calibrated null distributions for
//! significance testing, synthetic benchmark generators, and Markov-network
//! reconstruction on top of the index.

pub mod error;
pub mod inference;
pub mod network;
pub mod power;
pub mod scan;
pub mod stats;
pub mod stream;
pub mod synth;

pub use error::{CimError, Result};
pub use inference::{
    calibrate_null, hellinger_distance, p_value, tau_null_sd, tau_to_gaussian_rho,
    theoretical_cim_null_sampler, NullFit, NullModel, Statistic,
};
pub use network::{
    aupr_top_k, monotonicity_census, mrmr_scores, mrnet, pairwise_matrix, CensusSummary,
    Dataset, DependencyMatrix, Network, NetworkEdge, NullRegistry,
};
pub use scan::{
    compute_cim, region_count, scan_unit_square, CimResult, Orientation, Region, ScanConfig,
};
pub use stats::{
    classify_dimension, classify_pair, count_concordance, pseudo_observations, tau_b_hat,
    tau_hat, tau_kl_hat, tau_kl_hat_auto, tau_n_hat, ConcordanceCounts, DimensionKind, Estimator,
    PseudoObservations, SamplePairs, TauResult,
};
pub use stream::TauStream;
