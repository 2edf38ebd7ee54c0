use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{dbm_to_watts, ScenarioParams, SystemParams};
use crate::error::{Error, Result};
use crate::learning::{Aggregation, PartitionMode, PartitionSpec, TrainConfig};
use crate::network::{Mobility, Scheme};
use crate::phy::{BaaOptions, DigitalOptions, Fading, Receiver};

/// Physical layer and cell. Powers are given in the units engineers quote
/// (W and dBm) and converted to watts on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub p0_w: f64,
    pub subchannels: usize,
    pub bandwidth_hz: f64,
    pub alpha: f64,
    pub r_cell_m: f64,
    pub g_th: f64,
    pub n0_dbm: f64,
    pub q_bits: u32,
    pub ber: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let r = SystemParams::reference();
        Self {
            p0_w: r.p0,
            subchannels: r.m,
            bandwidth_hz: r.b,
            alpha: r.alpha,
            r_cell_m: r.r_cell,
            g_th: r.g_th,
            n0_dbm: -80.0,
            q_bits: r.q_bits,
            ber: r.ber,
        }
    }
}

impl SystemConfig {
    pub fn params(&self) -> SystemParams {
        SystemParams {
            p0: self.p0_w,
            m: self.subchannels,
            b: self.bandwidth_hz,
            alpha: self.alpha,
            r_cell: self.r_cell_m,
            g_th: self.g_th,
            n0: dbm_to_watts(self.n0_dbm),
            q_bits: self.q_bits,
            ber: self.ber,
        }
    }
}

/// Analytic scenario: population size, interior radius, rounds and model size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub k_devices: usize,
    pub r_in_m: f64,
    pub n_cr: usize,
    pub q_dim: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { k_devices: 200, r_in_m: 50.0, n_cr: 20, q_dim: 582_026 }
    }
}

impl ScenarioConfig {
    pub fn params(&self) -> ScenarioParams {
        ScenarioParams { k_devices: self.k_devices, r_in: self.r_in_m, n_cr: self.n_cr, q_dim: self.q_dim }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Synthetic,
    Mnist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub source: DataSource,
    pub classes: usize,
    pub dim: usize,
    /// Pairwise distance between class means, in noise standard deviations.
    pub separation: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Data seed; the run seed is used when absent.
    pub seed: Option<u64>,
    pub mnist_train_images: Option<PathBuf>,
    pub mnist_train_labels: Option<PathBuf>,
    pub mnist_test_images: Option<PathBuf>,
    pub mnist_test_labels: Option<PathBuf>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Synthetic,
            classes: 10,
            dim: 20,
            separation: 5.0,
            n_train: 2000,
            n_test: 2000,
            seed: None,
            mnist_train_images: None,
            mnist_train_labels: None,
            mnist_test_images: None,
            mnist_test_labels: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationKind {
    Ideal,
    Baa,
    Digital,
}

impl AggregationKind {
    pub fn name(&self) -> &'static str {
        match self {
            AggregationKind::Ideal => "ideal",
            AggregationKind::Baa => "baa",
            AggregationKind::Digital => "digital",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub k_devices: usize,
    pub eta: f64,
    pub tau: usize,
    pub n_cr: usize,
    pub batch_size: usize,
    pub aggregation: AggregationKind,
    pub fading: Fading,
    pub noise: bool,
    pub receiver: Receiver,
    pub bit_flips: bool,
    pub mobility: Mobility,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            k_devices: 20,
            eta: 0.1,
            tau: 5,
            n_cr: 40,
            batch_size: 20,
            aggregation: AggregationKind::Baa,
            fading: Fading::Rayleigh,
            noise: true,
            receiver: Receiver::Scheduled,
            bit_flips: false,
            mobility: Mobility::Static,
        }
    }
}

impl TrainSection {
    pub fn aggregation_for(&self, kind: AggregationKind) -> Aggregation {
        match kind {
            AggregationKind::Ideal => Aggregation::Ideal,
            AggregationKind::Baa => {
                Aggregation::Baa(BaaOptions { fading: self.fading, noise: self.noise, receiver: self.receiver })
            }
            AggregationKind::Digital => Aggregation::Digital(DigitalOptions { bit_flips: self.bit_flips }),
        }
    }

    pub fn train_config(&self, kind: AggregationKind) -> TrainConfig {
        TrainConfig {
            eta: self.eta,
            tau: self.tau,
            n_cr: self.n_cr,
            batch_size: self.batch_size,
            aggregation: self.aggregation_for(kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionConfig {
    pub mode: PartitionMode,
    pub shards_total: usize,
    pub shard_size: usize,
    pub shards_per_device: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { mode: PartitionMode::NonIidShards, shards_total: 40, shard_size: 50, shards_per_device: 2 }
    }
}

impl PartitionConfig {
    pub fn spec(&self) -> PartitionSpec {
        PartitionSpec {
            mode: self.mode,
            shards_total: self.shards_total,
            shard_size: self.shard_size,
            shards_per_device: self.shards_per_device,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    AllInclusive,
    CellInterior,
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub r_in_m: f64,
    /// Rounds per phase of the alternating scheme.
    pub period: u64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { kind: SchemeKind::AllInclusive, r_in_m: 60.0, period: 1 }
    }
}

impl SchemeConfig {
    pub fn scheme_for(&self, kind: SchemeKind) -> Scheme {
        match kind {
            SchemeKind::AllInclusive => Scheme::AllInclusive,
            SchemeKind::CellInterior => Scheme::CellInterior { r_in: self.r_in_m },
            SchemeKind::Alternating => Scheme::Alternating { r_in: self.r_in_m, period: self.period },
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme_for(self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TradeoffConfig {
    pub alphas: Vec<f64>,
    pub r_max_m: Vec<f64>,
    /// Points of the truncation-ratio grid on (0, 1).
    pub zeta_points: usize,
    /// Points of the data-fraction grid on (0, 1].
    pub f_dat_points: usize,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self { alphas: vec![2.5, 3.0, 3.5, 4.0], r_max_m: vec![25.0, 50.0, 100.0], zeta_points: 99, f_dat_points: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub k_values: Vec<usize>,
    pub ratios: Vec<f64>,
    pub snr_k_values: Vec<usize>,
    /// Rounds used for the all-devices-exploited probability.
    pub n_cr: usize,
    /// Adds a deliberately mis-specified check that must fail.
    pub negative_control: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { k_values: vec![5, 20], ratios: vec![0.3, 0.5, 0.8], snr_k_values: vec![10, 20], n_cr: 20, negative_control: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatencyConfig {
    pub k_values: Vec<usize>,
    pub q_values: Vec<usize>,
    pub ber_values: Vec<f64>,
    pub r_max_m: Vec<f64>,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            k_values: vec![16, 64, 200, 256, 1024],
            q_values: vec![1000, 10_000, 100_000, 582_026],
            ber_values: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            r_max_m: vec![25.0, 50.0, 75.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub aggregations: Vec<AggregationKind>,
    pub schemes: Vec<SchemeKind>,
    /// Independent training seeds per comparison.
    pub seeds: usize,
    /// Grid of `r_in / R` for the accuracy sweep (empty disables it).
    pub r_in_fractions: Vec<f64>,
    pub g_th_values: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            aggregations: vec![AggregationKind::Ideal, AggregationKind::Baa, AggregationKind::Digital],
            schemes: vec![SchemeKind::AllInclusive, SchemeKind::CellInterior, SchemeKind::Alternating],
            seeds: 1,
            r_in_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            g_th_values: vec![0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtensionsConfig {
    pub gammas: Vec<usize>,
    pub adversary_power: f64,
    pub k_legit: usize,
    pub n_symbols: usize,
    pub n_antennas: Vec<usize>,
    pub k_users: Vec<usize>,
    pub instances: usize,
    pub beam_rank: usize,
    /// Receiver noise power for the beamforming objectives (W).
    pub beam_n0: f64,
    pub pattern_angles: usize,
}

impl Default for ExtensionsConfig {
    fn default() -> Self {
        Self {
            gammas: vec![1, 4, 16, 64],
            adversary_power: 1.0,
            k_legit: 2,
            n_symbols: 4,
            n_antennas: vec![2, 4, 8],
            k_users: vec![1, 2, 3],
            instances: 5,
            beam_rank: 1,
            beam_n0: 1.0,
            pattern_angles: 181,
        }
    }
}

/// One experiment file. Every section is optional and falls back to the
/// reference cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: u64,
    /// Default output directory; `--out` takes precedence. Not part of the hash.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub system: SystemConfig,
    pub scenario: ScenarioConfig,
    pub data: DataConfig,
    pub train: TrainSection,
    pub partition: PartitionConfig,
    pub scheme: SchemeConfig,
    pub tradeoff: TradeoffConfig,
    pub montecarlo: MonteCarloConfig,
    pub latency: LatencyConfig,
    pub compare: CompareConfig,
    pub extensions: ExtensionsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100_000,
            output_dir: None,
            system: SystemConfig::default(),
            scenario: ScenarioConfig::default(),
            data: DataConfig::default(),
            train: TrainSection::default(),
            partition: PartitionConfig::default(),
            scheme: SchemeConfig::default(),
            tradeoff: TradeoffConfig::default(),
            montecarlo: MonteCarloConfig::default(),
            latency: LatencyConfig::default(),
            compare: CompareConfig::default(),
            extensions: ExtensionsConfig::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fail-fast checks on everything the commands rely on.
    pub fn validate(&self) -> Result<()> {
        let params = self.system.params();
        params.validate().map_err(|e| config_err(e.to_string()))?;
        if self.system.ber >= 0.2 {
            return Err(config_err(format!("ber must be below 0.2 for the QAM gap model, got {}", self.system.ber)));
        }
        if let Some(&b) = self.latency.ber_values.iter().find(|&&b| !(b > 0.0 && b < 0.2)) {
            return Err(config_err(format!("latency.ber_values must lie in (0, 0.2), got {b}")));
        }
        self.scenario.params().validate(params.r_cell).map_err(|e| config_err(e.to_string()))?;
        self.scheme.scheme().validate(params.r_cell).map_err(|e| config_err(e.to_string()))?;
        if self.scheme.period == 0 {
            return Err(config_err("scheme.period must be at least 1"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        let t = &self.train;
        if t.k_devices == 0 || t.n_cr == 0 || t.batch_size == 0 || !(t.eta >= 0.0) {
            return Err(config_err("train needs k_devices, n_cr, batch_size >= 1 and eta >= 0"));
        }
        let p = &self.partition;
        if p.shards_total != t.k_devices * p.shards_per_device {
            return Err(config_err(format!(
                "partition.shards_total ({}) must equal train.k_devices ({}) x shards_per_device ({})",
                p.shards_total, t.k_devices, p.shards_per_device
            )));
        }
        if self.data.source == DataSource::Synthetic && p.shards_total * p.shard_size > self.data.n_train {
            return Err(config_err("partition uses more samples than data.n_train"));
        }
        if let Some(&f) = self.compare.r_in_fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(config_err(format!("compare.r_in_fractions must lie in (0, 1], got {f}")));
        }
        if let Some(&r) = self.montecarlo.ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(config_err(format!("montecarlo.ratios must lie in (0, 1], got {r}")));
        }
        if self.extensions.gammas.contains(&0) {
            return Err(config_err("spreading factors must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_cell() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg.system.params(), SystemParams::reference());
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn dbm_converted_on_load() {
        let cfg = ExperimentConfig::from_toml("[system]\nn0_dbm = -50.0\n").unwrap();
        assert!((cfg.system.params().n0 - 1e-8).abs() < 1e-22);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("sede = 3\n"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_toml("[system]\nalpah = 3.0\n"), Err(Error::Config(_))));
    }

    #[test]
    fn ber_bound_is_a_config_error() {
        assert!(matches!(ExperimentConfig::from_toml("[system]\nber = 0.3\n"), Err(Error::Config(_))));
    }

    #[test]
    fn hash_tracks_content_not_output_dir() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
