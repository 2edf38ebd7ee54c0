//! Experiment harness: configuration, reproducible command runners and
//! CSV/JSON result tables with a provenance manifest.

mod commands;
mod config;
mod output;

pub use commands::{
    compare_report, extensions_report, latency_table, load_datasets, mc_expected_snr, montecarlo_checks, r_in_grid,
    repetition_seed, run, train_rows, tradeoff_tables, BeamRow, CheckRow, Command, CompareReport, DsssRow,
    ExtensionsReport, GainRow, GridRow, LatencyRow, PatternRow, RoundRow, SnrRow, SummaryRow,
};
pub use config::{
    AggregationKind, CompareConfig, DataConfig, DataSource, ExperimentConfig, ExtensionsConfig, LatencyConfig,
    MonteCarloConfig, PartitionConfig, ScenarioConfig, SchemeConfig, SchemeKind, SystemConfig, TradeoffConfig,
    TrainSection,
};
pub use output::{FileEntry, Format, Manifest, TableWriter, SCHEMA_VERSION};
