use std::path::Path;

use serde::Serialize;

use super::config::{AggregationKind, DataSource, ExperimentConfig};
use super::output::{Format, Manifest, TableWriter, SCHEMA_VERSION};
use crate::analytics::{
    self, expected_snr_all_inclusive, expected_snr_cell_interior, fraction_exploited, k_in_distribution,
    latency_reduction_closed_form, latency_reduction_ratio, linear_to_db, max_distance_moments, p_all_exploited,
    receive_snr, reliability_quantity_curve, snr_truncation_curve, ScenarioParams, SystemParams,
};
use crate::error::{Error, Result};
use crate::extensions::{
    aggregation_beamformer, aggregation_objective, beam_pattern, random_channels, sdma_beamformer, dsss_latency,
    suppression_experiment, BeamProblem, SdmaOutcome,
};
use crate::learning::{federated_train, load_mnist_idx, synth_gaussian_mixture, FederatedSetup, LabeledDataset, TrainTrace};
use crate::network::{montecarlo, Scheme};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Tradeoff,
    MonteCarlo,
    Latency,
    Train,
    Compare,
    Extensions,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Tradeoff, Command::MonteCarlo, Command::Latency, Command::Train, Command::Compare, Command::Extensions];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Tradeoff => "tradeoff",
            Command::MonteCarlo => "montecarlo",
            Command::Latency => "latency",
            Command::Train => "train",
            Command::Compare => "compare",
            Command::Extensions => "extensions",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// Runs one command, writing its tables and `manifest.json` into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<Manifest> {
    cfg.validate()?;
    let mut w = TableWriter::new(out, format, cfg.seed)?;
    match command {
        Command::Tradeoff => {
            let (snr, gain) = tradeoff_tables(cfg)?;
            w.write("snr_truncation", &snr)?;
            w.write("reliability_quantity", &gain)?;
        }
        Command::MonteCarlo => {
            let rows = montecarlo_checks(cfg)?;
            w.write("montecarlo", &rows)?;
        }
        Command::Latency => {
            w.write("latency", &latency_table(cfg)?)?;
        }
        Command::Train => {
            let kind = cfg.train.aggregation;
            let rows = train_rows(cfg, cfg.seed, kind, cfg.scheme.scheme(), cfg.system.params())?.0;
            w.write("train", &rows)?;
        }
        Command::Compare => {
            let report = compare_report(cfg)?;
            w.write("compare_rounds", &report.rounds)?;
            w.write("compare_summary", &report.summary)?;
            if !report.grid.is_empty() {
                w.write("compare_grid", &report.grid)?;
            }
        }
        Command::Extensions => {
            let report = extensions_report(cfg)?;
            w.write("dsss", &report.dsss)?;
            w.write("beamforming", &report.beams)?;
            w.write("beam_pattern", &report.pattern)?;
        }
    }
    let manifest = Manifest {
        tool: "airfeel",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name().to_string(),
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        trials: cfg.trials,
        format,
        config_sha256: cfg.hash(),
        files: w.files().to_vec(),
    };
    manifest.write(w.dir())?;
    Ok(manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct SnrRow {
    pub seed: u64,
    pub alpha: f64,
    pub r_max_m: f64,
    pub g_th: f64,
    pub zeta: f64,
    pub snr: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GainRow {
    pub seed: u64,
    pub alpha: f64,
    pub k_devices: usize,
    pub f_dat: f64,
    pub r_in_m: f64,
    pub gain: f64,
    pub gain_db: f64,
}

pub fn tradeoff_tables(cfg: &ExperimentConfig) -> Result<(Vec<SnrRow>, Vec<GainRow>)> {
    let base = cfg.system.params();
    let t = &cfg.tradeoff;
    let zetas: Vec<f64> = (1..=t.zeta_points).map(|i| i as f64 / (t.zeta_points + 1) as f64).collect();
    let f_grid: Vec<f64> = (1..=t.f_dat_points).map(|i| i as f64 / t.f_dat_points as f64).collect();
    let mut snr_rows = Vec::new();
    let mut gain_rows = Vec::new();
    for &alpha in &t.alphas {
        let params = SystemParams { alpha, ..base };
        for &r_max in &t.r_max_m {
            let curve = snr_truncation_curve(&params, r_max, &zetas)?;
            for &(zeta, snr) in curve.points() {
                snr_rows.push(SnrRow {
                    seed: cfg.seed,
                    alpha,
                    r_max_m: r_max,
                    g_th: analytics::threshold_for_ratio(zeta)?,
                    zeta,
                    snr,
                    snr_db: linear_to_db(snr),
                });
            }
        }
        let k = cfg.scenario.k_devices;
        let curve = reliability_quantity_curve(&params, k, &f_grid)?;
        for &(f_dat, gain) in curve.points() {
            gain_rows.push(GainRow {
                seed: cfg.seed,
                alpha,
                k_devices: k,
                f_dat,
                r_in_m: params.r_cell * f_dat.sqrt(),
                gain,
                gain_db: linear_to_db(gain),
            });
        }
    }
    Ok((snr_rows, gain_rows))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub seed: u64,
    pub check: &'static str,
    pub k_devices: usize,
    pub ratio: f64,
    pub analytic: f64,
    pub empirical: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// A mis-specified check that a sound harness must fail.
    pub control: bool,
}

impl CheckRow {
    #[allow(clippy::too_many_arguments)]
    fn new(seed: u64, check: &'static str, k: usize, ratio: f64, analytic: f64, empirical: f64, error: f64, tol: f64) -> Self {
        Self { seed, check, k_devices: k, ratio, analytic, empirical, error, tolerance: tol, pass: error < tol, control: false }
    }
}

fn rel_err(analytic: f64, empirical: f64) -> f64 {
    ((empirical - analytic) / analytic).abs()
}

/// Mean aligned SNR over topology draws, counting only rounds with at least
/// two scheduled devices (zero otherwise).
pub fn mc_expected_snr(params: &SystemParams, k: usize, r_in: f64, trials: u64, seed: u64) -> f64 {
    let v = montecarlo::map_trials(k, params.r_cell, trials, seed, |radii| {
        let (count, r_max) = radii.iter().filter(|&&r| r <= r_in).fold((0usize, 0.0f64), |(c, m), &r| (c + 1, m.max(r)));
        if count >= 2 || (r_in >= params.r_cell && count >= 1) {
            receive_snr(params, r_max).unwrap_or(0.0)
        } else {
            0.0
        }
    });
    v.iter().sum::<f64>() / trials as f64
}

/// Analytic-versus-simulation checks of the topology and SNR statistics.
pub fn montecarlo_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let params = cfg.system.params();
    let mc = &cfg.montecarlo;
    let (seed, trials, r_cell) = (cfg.seed, cfg.trials, params.r_cell);
    let mut rows = Vec::new();
    for &k in &mc.k_values {
        for &ratio in &mc.ratios {
            let r_in = ratio * r_cell;
            let pmf = k_in_distribution(k, r_in, r_cell)?;
            let hist = montecarlo::k_in_histogram(k, r_in, r_cell, trials, seed);
            let tv = montecarlo::total_variation(&pmf, &hist);
            rows.push(CheckRow::new(seed, "k_in_distribution_tv", k, ratio, 0.0, tv, tv, 0.01));
        }
        let mean = max_distance_moments(k, r_cell)?.mean();
        let emp = montecarlo::mean_max_radius(k, r_cell, trials, seed);
        rows.push(CheckRow::new(seed, "max_distance_mean", k, 1.0, mean, emp, rel_err(mean, emp), 0.005));
    }
    for &k in &mc.snr_k_values {
        let analytic = expected_snr_all_inclusive(&params, k)?;
        let emp = mc_expected_snr(&params, k, r_cell, trials, seed);
        rows.push(CheckRow::new(seed, "expected_snr_all_inclusive", k, 1.0, analytic, emp, rel_err(analytic, emp), 0.02));
        for &ratio in &mc.ratios {
            let scen = ScenarioParams { k_devices: k, r_in: ratio * r_cell, n_cr: 1, q_dim: 1 };
            let interior = expected_snr_cell_interior(&params, &scen)?;
            let emp = mc_expected_snr(&params, k, scen.r_in, trials, seed);
            rows.push(CheckRow::new(
                seed,
                "expected_snr_cell_interior",
                k,
                ratio,
                interior.snr,
                emp,
                rel_err(interior.snr, emp),
                0.03,
            ));
            let c = interior.c_factor;
            let outside = if c < 1.0 { 1.0 - c } else { (c - 4.0).max(0.0) };
            let mut row = CheckRow::new(seed, "c_factor_in_1_4", k, ratio, c, c, outside, f64::MIN_POSITIVE);
            row.pass = (1.0..=4.0).contains(&c);
            rows.push(row);
        }
    }
    for &k in &mc.k_values {
        for &ratio in &mc.ratios {
            let r_in = ratio * r_cell;
            let p_in = fraction_exploited(r_in, r_cell)?;
            let exact = p_all_exploited(k, mc.n_cr, p_in)?.exact;
            let emp = montecarlo::all_exploited_fraction(k, r_in, r_cell, mc.n_cr, trials, seed);
            rows.push(CheckRow::new(seed, "p_all_exploited_abs", k, ratio, exact, emp, (emp - exact).abs(), 0.01));
        }
    }
    if mc.negative_control {
        let k = mc.snr_k_values.first().copied().unwrap_or(10);
        let wrong = SystemParams { alpha: params.alpha + 0.5, ..params };
        let analytic = expected_snr_all_inclusive(&wrong, k)?;
        let emp = mc_expected_snr(&params, k, r_cell, trials, seed);
        let mut row = CheckRow::new(seed, "control_wrong_alpha", k, 1.0, analytic, emp, rel_err(analytic, emp), 0.02);
        row.control = true;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LatencyRow {
    pub seed: u64,
    pub sweep: &'static str,
    pub k_devices: usize,
    pub q_dim: usize,
    pub ber: f64,
    pub r_max_m: f64,
    pub t_analog_s: f64,
    pub t_digital_s: f64,
    pub gamma: f64,
    pub gamma_closed_form: f64,
    /// `gamma log2(K) / K`, flat when the reduction grows as K / log K.
    pub gamma_log_k_over_k: f64,
}

pub fn latency_table(cfg: &ExperimentConfig) -> Result<Vec<LatencyRow>> {
    let base = cfg.system.params();
    let scen = cfg.scenario.params();
    let r_cell = base.r_cell;
    let lc = &cfg.latency;
    let mut cases: Vec<(&'static str, usize, usize, f64, f64)> = Vec::new();
    cases.extend(lc.k_values.iter().map(|&k| ("k", k, scen.q_dim, base.ber, r_cell)));
    cases.extend(lc.q_values.iter().map(|&q| ("q", scen.k_devices, q, base.ber, r_cell)));
    cases.extend(lc.ber_values.iter().map(|&b| ("ber", scen.k_devices, scen.q_dim, b, r_cell)));
    cases.extend(lc.r_max_m.iter().map(|&r| ("r_max", scen.k_devices, scen.q_dim, base.ber, r)));
    cases
        .into_iter()
        .map(|(sweep, k, q, ber, r_max)| {
            let params = SystemParams { ber, ..base };
            let s = ScenarioParams { k_devices: k, q_dim: q, ..scen };
            let rep = latency_reduction_ratio(&params, &s, r_max)?;
            Ok(LatencyRow {
                seed: cfg.seed,
                sweep,
                k_devices: k,
                q_dim: q,
                ber,
                r_max_m: r_max,
                t_analog_s: rep.t_analog,
                t_digital_s: rep.t_digital,
                gamma: rep.ratio,
                gamma_closed_form: latency_reduction_closed_form(&params, k, r_max)?,
                gamma_log_k_over_k: rep.ratio * (k as f64).log2() / k as f64,
            })
        })
        .collect()
}

/// Train and test sets for a run seed.
pub fn load_datasets(cfg: &ExperimentConfig, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let d = &cfg.data;
    match d.source {
        DataSource::Synthetic => {
            let data_seed = d.seed.unwrap_or(seed);
            let train = synth_gaussian_mixture(d.classes, d.dim, d.n_train, d.separation, rng::child_seed(data_seed, "train-data", 0))?;
            let test = synth_gaussian_mixture(d.classes, d.dim, d.n_test, d.separation, rng::child_seed(data_seed, "test-data", 0))?;
            Ok((train, test))
        }
        DataSource::Mnist => {
            let need = |p: &Option<std::path::PathBuf>, key: &str| {
                p.clone().ok_or_else(|| Error::Config(format!("data.{key} is required for MNIST")))
            };
            let mut train = load_mnist_idx(&need(&d.mnist_train_images, "mnist_train_images")?, &need(&d.mnist_train_labels, "mnist_train_labels")?)?;
            let mut test = load_mnist_idx(&need(&d.mnist_test_images, "mnist_test_images")?, &need(&d.mnist_test_labels, "mnist_test_labels")?)?;
            for (set, n) in [(&mut train, d.n_train), (&mut test, d.n_test)] {
                let n = n.min(set.n());
                set.labels.truncate(n);
                set.features.truncate(n * set.dim);
            }
            Ok((train, test))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundRow {
    pub seed: u64,
    pub scheme: &'static str,
    pub aggregation: &'static str,
    pub r_in_m: f64,
    pub g_th: f64,
    pub round: usize,
    pub scheduled: usize,
    pub accuracy: f64,
    pub loss: f64,
    pub latency_s: f64,
    pub rho0_db: f64,
    pub truncation_frac: f64,
    pub skipped: bool,
}

fn scheme_r_in(scheme: Scheme, r_cell: f64) -> f64 {
    match scheme {
        Scheme::AllInclusive => r_cell,
        Scheme::CellInterior { r_in } | Scheme::Alternating { r_in, .. } => r_in,
    }
}

/// One federated training run, flattened to per-round rows.
pub fn train_rows(
    cfg: &ExperimentConfig,
    seed: u64,
    kind: AggregationKind,
    scheme: Scheme,
    system: SystemParams,
) -> Result<(Vec<RoundRow>, TrainTrace)> {
    let (train, test) = load_datasets(cfg, seed)?;
    let setup = FederatedSetup {
        train: &train,
        test: &test,
        partition: cfg.partition.spec(),
        config: cfg.train.train_config(kind),
        system,
        scheme,
        mobility: cfg.train.mobility,
        k_devices: cfg.train.k_devices,
        seed,
    };
    let trace = federated_train(&setup)?;
    let rows = trace
        .records
        .iter()
        .map(|r| RoundRow {
            seed,
            scheme: scheme.name(),
            aggregation: kind.name(),
            r_in_m: scheme_r_in(scheme, system.r_cell),
            g_th: system.g_th,
            round: r.round,
            scheduled: r.scheduled,
            accuracy: r.accuracy,
            loss: r.loss,
            latency_s: r.latency_s,
            rho0_db: r.rho0_db,
            truncation_frac: r.truncation_frac,
            skipped: r.skipped,
        })
        .collect();
    Ok((rows, trace))
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub comparison: &'static str,
    pub variant: &'static str,
    pub final_accuracy: f64,
    pub final_loss: f64,
    pub total_latency_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub seed: u64,
    pub r_in_fraction: f64,
    pub g_th: f64,
    pub final_accuracy: f64,
    pub final_loss: f64,
    pub mean_rho0_db: f64,
    pub mean_truncation_frac: f64,
    pub skipped_rounds: usize,
    pub total_latency_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CompareReport {
    pub rounds: Vec<RoundRow>,
    pub summary: Vec<SummaryRow>,
    pub grid: Vec<GridRow>,
}

/// Seed of the `i`-th repetition; repetition 0 uses the configured seed.
pub fn repetition_seed(seed: u64, i: usize) -> u64 {
    if i == 0 {
        seed
    } else {
        rng::child_seed(seed, "repetition", i as u64)
    }
}

fn summarize(seed: u64, comparison: &'static str, variant: &'static str, trace: &TrainTrace) -> SummaryRow {
    let last = trace.records.last();
    SummaryRow {
        seed,
        comparison,
        variant,
        final_accuracy: last.map_or(f64::NAN, |r| r.accuracy),
        final_loss: last.map_or(f64::NAN, |r| r.loss),
        total_latency_s: trace.total_latency(),
    }
}

fn mean_finite(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.filter(|v| v.is_finite()).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Aggregation and scheduling comparisons plus the interior-radius grid.
pub fn compare_report(cfg: &ExperimentConfig) -> Result<CompareReport> {
    let system = cfg.system.params();
    let mut report = CompareReport::default();
    for i in 0..cfg.compare.seeds.max(1) {
        let seed = repetition_seed(cfg.seed, i);
        for &kind in &cfg.compare.aggregations {
            let (rows, trace) = train_rows(cfg, seed, kind, cfg.scheme.scheme(), system)?;
            report.summary.push(summarize(seed, "aggregation", kind.name(), &trace));
            report.rounds.extend(rows);
        }
        for &kind in &cfg.compare.schemes {
            let scheme = cfg.scheme.scheme_for(kind);
            let (rows, trace) = train_rows(cfg, seed, cfg.train.aggregation, scheme, system)?;
            report.summary.push(summarize(seed, "scheme", scheme.name(), &trace));
            report.rounds.extend(rows);
        }
        report.grid.extend(r_in_grid(cfg, seed)?);
    }
    Ok(report)
}

/// Final accuracy of cell-interior training over the `r_in / R` and `g_th` grid.
pub fn r_in_grid(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<GridRow>> {
    let base = cfg.system.params();
    let mut rows = Vec::new();
    for &g_th in &cfg.compare.g_th_values {
        let system = SystemParams { g_th, ..base };
        for &f in &cfg.compare.r_in_fractions {
            let scheme = Scheme::CellInterior { r_in: f * base.r_cell };
            let (_, trace) = train_rows(cfg, seed, cfg.train.aggregation, scheme, system)?;
            let last = trace.records.last();
            rows.push(GridRow {
                seed,
                r_in_fraction: f,
                g_th,
                final_accuracy: last.map_or(f64::NAN, |r| r.accuracy),
                final_loss: last.map_or(f64::NAN, |r| r.loss),
                mean_rho0_db: mean_finite(trace.records.iter().map(|r| r.rho0_db)),
                mean_truncation_frac: mean_finite(trace.records.iter().map(|r| r.truncation_frac)),
                skipped_rounds: trace.records.iter().filter(|r| r.skipped).count(),
                total_latency_s: trace.total_latency(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct DsssRow {
    pub seed: u64,
    pub gamma: usize,
    pub trials: u64,
    pub k_legit: usize,
    pub n_symbols: usize,
    pub adversary_power: f64,
    pub unspread_power: f64,
    pub despread_power: f64,
    pub suppression_ratio: f64,
    pub latency_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamRow {
    pub seed: u64,
    pub instance: usize,
    pub n_antennas: usize,
    pub k_users: usize,
    pub rank: usize,
    pub aggregation_objective: f64,
    pub lambda_max_over_n0: f64,
    pub sdma_feasible: bool,
    pub sdma_colinear_users: usize,
    pub sdma_best_snr: f64,
    pub sdma_objective: f64,
    pub sdma_max_residual: f64,
    /// Aggregation objective at least the SDMA objective and best per-user SNR.
    pub ordering_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRow {
    pub seed: u64,
    pub beam: String,
    pub angle_rad: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExtensionsReport {
    pub dsss: Vec<DsssRow>,
    pub beams: Vec<BeamRow>,
    pub pattern: Vec<PatternRow>,
}

pub fn extensions_report(cfg: &ExperimentConfig) -> Result<ExtensionsReport> {
    let ec = &cfg.extensions;
    let params = cfg.system.params();
    let mut report = ExtensionsReport::default();
    for &gamma in &ec.gammas {
        let rep = suppression_experiment(gamma, cfg.trials, ec.k_legit, ec.n_symbols, ec.adversary_power, cfg.seed)?;
        report.dsss.push(DsssRow {
            seed: cfg.seed,
            gamma,
            trials: rep.trials,
            k_legit: ec.k_legit,
            n_symbols: ec.n_symbols,
            adversary_power: ec.adversary_power,
            unspread_power: rep.unspread_power,
            despread_power: rep.despread_power,
            suppression_ratio: rep.suppression_ratio,
            latency_s: dsss_latency(cfg.scenario.q_dim, &params, gamma)?,
        });
    }
    let max_n = ec.n_antennas.iter().copied().max().unwrap_or(0);
    let max_k = ec.k_users.iter().copied().max().unwrap_or(0);
    let mut stream_index = 0u64;
    for &n in &ec.n_antennas {
        for &k in &ec.k_users {
            for instance in 0..ec.instances {
                let mut r = rng::stream(cfg.seed, "beamforming", stream_index);
                stream_index += 1;
                let problem = BeamProblem::new(random_channels(n, k, &mut r), (0..k).collect(), ec.beam_n0)?;
                let rank = ec.beam_rank.min(n);
                let agg = aggregation_beamformer(&problem, rank)?;
                let lambda_max = agg.eigenvalues[0] / ec.beam_n0;
                let mut row = BeamRow {
                    seed: cfg.seed,
                    instance,
                    n_antennas: n,
                    k_users: k,
                    rank,
                    aggregation_objective: agg.objective,
                    lambda_max_over_n0: lambda_max,
                    sdma_feasible: false,
                    sdma_colinear_users: 0,
                    sdma_best_snr: f64::NAN,
                    sdma_objective: f64::NAN,
                    sdma_max_residual: f64::NAN,
                    ordering_holds: true,
                };
                let sdma = sdma_beamformer(&problem);
                if let SdmaOutcome::Beams(beams) = &sdma {
                    let usable: Vec<_> = beams.iter().filter_map(|b| b.beam.clone()).collect();
                    row.sdma_feasible = true;
                    row.sdma_colinear_users = beams.len() - usable.len();
                    row.sdma_best_snr = beams.iter().map(|b| b.snr).fold(0.0, f64::max);
                    row.sdma_max_residual = beams.iter().map(|b| b.max_residual).filter(|v| v.is_finite()).fold(0.0, f64::max);
                    if !usable.is_empty() {
                        row.sdma_objective = aggregation_objective(&problem, &usable)?;
                    }
                    let slack = 1e-12 * agg.objective;
                    row.ordering_holds = agg.objective + slack >= row.sdma_best_snr
                        && (row.sdma_objective.is_nan() || agg.objective + slack >= row.sdma_objective);
                }
                // Patterns for the first instance of the largest array and user count.
                if instance == 0 && n == max_n && k == max_k {
                    for (theta, gain) in beam_pattern(&agg.beams[0], ec.pattern_angles)? {
                        report.pattern.push(PatternRow { seed: cfg.seed, beam: "aggregation".into(), angle_rad: theta, gain });
                    }
                    if let SdmaOutcome::Beams(beams) = &sdma {
                        for b in beams {
                            if let Some(f) = &b.beam {
                                for (theta, gain) in beam_pattern(f, ec.pattern_angles)? {
                                    let beam = format!("sdma-user-{}", b.device);
                                    report.pattern.push(PatternRow { seed: cfg.seed, beam, angle_rad: theta, gain });
                                }
                            }
                        }
                    }
                }
                report.beams.push(row);
            }
        }
    }
    Ok(report)
}
