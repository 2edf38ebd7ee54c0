use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{partition, LabeledDataset, PartitionSpec, Shard};
use super::model::{global_average, local_sgd, ModelParams, SoftmaxRegression};
use crate::analytics::{linear_to_db, SystemParams};
use crate::error::{domain, Result};
use crate::network::{advance_round, sample_topology, schedule, Mobility, Scheme};
use crate::phy::{baa_round, denormalize, digital_round, normalize_updates, BaaOptions, DigitalOptions, NormalizationSpec};
use crate::rng::{self, SimRng};

/// How the scheduled local models reach the server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Aggregation {
    /// Noise-free exact averaging.
    Ideal,
    /// Analog over-the-air aggregation.
    Baa(BaaOptions),
    /// Quantised OFDMA uploads.
    Digital(DigitalOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub eta: f64,
    /// Local SGD steps per round.
    pub tau: usize,
    /// Communication rounds.
    pub n_cr: usize,
    pub batch_size: usize,
    pub aggregation: Aggregation,
}

/// Everything one training run depends on.
#[derive(Debug, Clone)]
pub struct FederatedSetup<'a> {
    pub train: &'a LabeledDataset,
    pub test: &'a LabeledDataset,
    pub partition: PartitionSpec,
    pub config: TrainConfig,
    pub system: SystemParams,
    pub scheme: Scheme,
    pub mobility: Mobility,
    pub k_devices: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub scheduled: usize,
    /// Test accuracy after the round.
    pub accuracy: f64,
    /// Test cross-entropy after the round.
    pub loss: f64,
    /// Upload latency (s); 0 for ideal aggregation and skipped rounds.
    pub latency_s: f64,
    /// Aligned receive SNR in dB (analog rounds only, NaN otherwise).
    pub rho0_db: f64,
    /// Mean fraction of truncated entries over scheduled devices (analog only).
    pub truncation_frac: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub records: Vec<RoundRecord>,
    /// Global model after each round (index 0 is after round 1).
    pub models: Vec<ModelParams>,
    pub shards: Vec<Shard>,
}

impl TrainTrace {
    pub fn final_model(&self) -> Option<&ModelParams> {
        self.models.last()
    }

    pub fn total_latency(&self) -> f64 {
        self.records.iter().map(|r| r.latency_s).sum()
    }
}

/// Local-SGD stream of `device` in `round`.
pub fn local_sgd_stream(seed: u64, round: usize, device: usize) -> SimRng {
    rng::stream2(seed, "local-sgd", round as u64, device as u64)
}

/// Federated averaging: schedule, local SGD, aggregate, evaluate.
///
/// Every random draw comes from a stream keyed by the run seed and the
/// round/device counters, so local training parallelises without changing
/// results. Rounds with no scheduled device leave the model unchanged.
pub fn federated_train(setup: &FederatedSetup<'_>) -> Result<TrainTrace> {
    let cfg = &setup.config;
    if cfg.batch_size == 0 || cfg.n_cr == 0 {
        return Err(domain("batch size and round count must be positive"));
    }
    if setup.train.dim != setup.test.dim || setup.train.classes != setup.test.classes {
        return Err(domain("train and test sets disagree on shape"));
    }
    setup.system.validate()?;
    setup.scheme.validate(setup.system.r_cell)?;

    let arch = SoftmaxRegression::for_dataset(setup.train);
    let shards = partition(setup.train, &setup.partition, setup.k_devices, &mut rng::stream(setup.seed, "partition", 0))?;
    let mut net = sample_topology(setup.k_devices, setup.system.r_cell, setup.seed)?.with_mobility(setup.mobility);
    let mut mobility_rng = rng::stream(setup.seed, "mobility", 0);

    let mut global = ModelParams::zeros(arch.q());
    let mut records = Vec::with_capacity(cfg.n_cr);
    let mut models = Vec::with_capacity(cfg.n_cr);

    for round in 1..=cfg.n_cr {
        if round > 1 {
            net = advance_round(net, &mut mobility_rng);
        }
        let decision = schedule(&net, setup.scheme, round as u64 - 1);
        let mut record = RoundRecord {
            round,
            scheduled: decision.len(),
            accuracy: 0.0,
            loss: 0.0,
            latency_s: 0.0,
            rho0_db: f64::NAN,
            truncation_frac: f64::NAN,
            skipped: decision.is_empty(),
        };
        if decision.is_empty() {
            log::info!("round {round}: empty schedule, model carried over");
        } else {
            let locals = decision
                .scheduled_ids
                .par_iter()
                .map(|&dev| {
                    let mut r = local_sgd_stream(setup.seed, round, dev);
                    local_sgd(&arch, &global, setup.train, &shards[dev], cfg.eta, cfg.tau, cfg.batch_size, &mut r)
                })
                .collect::<Result<Vec<_>>>()?;
            let distances: Vec<f64> = decision.scheduled_ids.iter().map(|&d| net.positions[d].radius).collect();
            let mut channel_rng = rng::stream(setup.seed, "channel", round as u64);
            global = match cfg.aggregation {
                Aggregation::Ideal => global_average(&locals)?,
                Aggregation::Baa(opts) => {
                    let spec = NormalizationSpec::from_model(&global.weights);
                    let raw: Vec<Vec<f64>> = locals.into_iter().map(|m| m.weights).collect();
                    let out = baa_round(&normalize_updates(&raw, &spec), &distances, &setup.system, &opts, &mut channel_rng)?;
                    record.latency_s = out.diagnostics.latency_s;
                    record.rho0_db = linear_to_db(out.diagnostics.snr);
                    let fr = &out.diagnostics.truncation_fraction;
                    record.truncation_frac = fr.iter().sum::<f64>() / fr.len() as f64;
                    ModelParams { weights: denormalize(&out.aggregate, &spec) }
                }
                Aggregation::Digital(opts) => {
                    let raw: Vec<Vec<f64>> = locals.into_iter().map(|m| m.weights).collect();
                    let out = digital_round(&raw, &distances, &setup.system, &opts, &mut channel_rng)?;
                    record.latency_s = out.round_latency;
                    ModelParams { weights: out.aggregate }
                }
            };
        }
        record.accuracy = arch.accuracy(&global, setup.test);
        let all: Vec<usize> = (0..setup.test.n()).collect();
        record.loss = arch.loss(&global, setup.test, &all)?;
        log::debug!("round {round}: acc {:.4} loss {:.4}", record.accuracy, record.loss);
        records.push(record);
        models.push(global.clone());
    }
    Ok(TrainTrace { records, models, shards })
}
