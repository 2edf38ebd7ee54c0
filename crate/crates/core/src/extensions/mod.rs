//! Spread-spectrum protected aggregation and multi-antenna beamforming.

mod beam;
mod dsss;

pub use beam::{
    aggregation_beamformer, aggregation_objective, beam_pattern, random_channels, sdma_beamformer, write_beam_pattern, AggregationBeam,
    BeamProblem, SdmaBeam, SdmaOutcome,
};
pub use dsss::{
    adversary_suppression_trial, despread, dsss_latency, protected_aggregate, spread, suppression_experiment, SpreadingCode,
    SuppressionReport, SuppressionTrial,
};
