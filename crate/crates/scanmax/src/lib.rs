//! Simulation harness, file formats and command-line front end for
//! [`scanmax_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod harness;
pub mod rng;

pub use error::{Error, Result};
pub use harness::{
    gumbel_ks, ks_distance, ks_distance_sorted, mc_p_inf, mc_pickands_f, mc_tail_exceedance,
    replicate, run_ensemble, sample_path, shao_ratio_trend, EmpiricalDistribution, EnsembleConfig,
    OracleEstimate, PickandsOracle, RatioPoint, ReplicationRecord, ScanEngine, Statistic,
};
pub use rng::{derive_stream, NormalStream, SeedSpec};
