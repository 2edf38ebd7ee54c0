//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines are always printed. The process fails
//! when the set of failing criteria differs from `KNOWN_RED`, so a new
//! regression and an unexpected fix are both reported.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command as Process, ExitCode, Stdio};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use airfeel::analytics::{
    self, expected_snr_all_inclusive, expected_snr_cell_interior, interior_c_factor, k_in_distribution, latency_baa,
    latency_digital, latency_reduction_ratio, max_distance_moments, truncation_ratio, ScenarioParams, SystemParams,
};
use airfeel::experiment::{
    mc_expected_snr, r_in_grid, repetition_seed, train_rows, AggregationKind, ExperimentConfig, SchemeKind,
};
use airfeel::extensions::{
    aggregation_beamformer, despread, random_channels, sdma_beamformer, spread, suppression_experiment, BeamProblem,
    SdmaOutcome, SpreadingCode,
};
use airfeel::learning::{synth_gaussian_mixture, ModelParams, SoftmaxRegression};
use airfeel::network::{montecarlo, Scheme};
use airfeel::phy::{baa_round, digital_round, BaaOptions, DigitalOptions, Fading, Receiver};
use airfeel::rng;

/// Criteria that fail at their stated tolerance, with the reason.
const KNOWN_RED: &[(u32, &str)] = &[(
    2,
    "the k >= 2 interior sum drops the K_in < 2 mass, so c(R_in) < 1 at small R_in/R and small K; \
     the K_in = 2 term also has an infinite-variance SNR, so the sample mean converges slowly",
)];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((b - a) / a).abs()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn gaussian_updates(k: usize, q: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, "acceptance-updates", 0);
    (0..k).map(|_| (0..q).map(|_| r.sample(StandardNormal)).collect()).collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let r_cell = 100.0;
    let trials = 100_000;
    let mut worst_tv: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for k in [5, 20] {
        for ratio in [0.3, 0.5, 0.8] {
            let pmf = k_in_distribution(k, ratio * r_cell, r_cell).unwrap();
            let hist = montecarlo::k_in_histogram(k, ratio * r_cell, r_cell, trials, 1);
            worst_tv = worst_tv.max(montecarlo::total_variation(&pmf, &hist));
        }
        let mean = max_distance_moments(k, r_cell).unwrap().mean();
        assert!((mean - 2.0 * k as f64 / (2.0 * k as f64 + 1.0) * r_cell).abs() < 1e-12);
        worst_mean = worst_mean.max(rel(mean, montecarlo::mean_max_radius(k, r_cell, trials, 1)));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_tv < 0.01 && worst_mean < 0.005 && secs < 10.0,
        format!("max TV {worst_tv:.4} (<0.01), max E[r_max] error {:.3}% (<0.5%), {secs:.1}s (<10s)", 100.0 * worst_mean),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let params = SystemParams { alpha: 3.0, ..SystemParams::reference() };
    let r_cell = params.r_cell;
    let trials = 100_000;
    let mut worst_all: f64 = 0.0;
    let mut worst_interior: f64 = 0.0;
    for k in [10, 20] {
        let analytic = expected_snr_all_inclusive(&params, k).unwrap();
        worst_all = worst_all.max(rel(analytic, mc_expected_snr(&params, k, r_cell, trials, 2)));
        for ratio in [0.3, 0.5, 0.8] {
            let scen = ScenarioParams { k_devices: k, r_in: ratio * r_cell, n_cr: 1, q_dim: 1 };
            let analytic = expected_snr_cell_interior(&params, &scen).unwrap().snr;
            worst_interior = worst_interior.max(rel(analytic, mc_expected_snr(&params, k, scen.r_in, trials, 2)));
        }
    }
    let mut c_min = f64::INFINITY;
    let mut c_max: f64 = 0.0;
    let mut c_out = 0;
    for k in [5, 20, 200] {
        for i in 1..=10 {
            let c = interior_c_factor(k, 3.0, 0.1 * i as f64 * r_cell, r_cell).unwrap();
            c_min = c_min.min(c);
            c_max = c_max.max(c);
            c_out += usize::from(!(1.0..=4.0).contains(&c));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_all < 0.02 && worst_interior < 0.03 && c_out == 0 && secs < 30.0,
        format!(
            "all-inclusive {:.2}% (<2%), cell-interior {:.2}% (<3%), c in [{c_min:.3}, {c_max:.3}] with {c_out}/30 outside [1,4], {secs:.1}s (<30s)",
            100.0 * worst_all,
            100.0 * worst_interior
        ),
    )
}

fn criterion_3() -> Verdict {
    let q = 100_000;
    let k = 20;
    let dist: Vec<f64> = (1..=k).map(|i| 5.0 * i as f64).collect();
    let ups = gaussian_updates(k, q, 3);
    let opts = BaaOptions { noise: false, ..BaaOptions::default() };
    let mut worst_rel: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    for g_th in [0.2, 0.5, 1.0] {
        let params = SystemParams { g_th, ..SystemParams::reference() };
        let out = baa_round(&ups, &dist, &params, &opts, &mut rng::stream(3, "acceptance-truncation", 0)).unwrap();
        let zeta = truncation_ratio(g_th).unwrap();
        let fracs = &out.diagnostics.truncation_fraction;
        let pooled = fracs.iter().sum::<f64>() / k as f64;
        worst_rel = worst_rel.max(rel(zeta, pooled));
        worst_abs = worst_abs.max(fracs.iter().map(|f| (f - zeta).abs()).fold(0.0, f64::max));
    }
    verdict(
        worst_rel < 0.005,
        format!(
            "round-pooled truncated fraction within {:.3}% of 1-exp(-g_th) (<0.5%); worst single device {:.3} points",
            100.0 * worst_rel,
            100.0 * worst_abs
        ),
    )
}

fn criterion_4() -> Verdict {
    let params = SystemParams::reference();
    let k = 20;
    let q = 100 * params.m;
    let net = airfeel::network::sample_topology(k, params.r_cell, 4).unwrap();
    let dist: Vec<f64> = net.radii().collect();
    let far = dist.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    let out = baa_round(&gaussian_updates(k, q, 4), &dist, &params, &BaaOptions::default(), &mut rng::stream(4, "acceptance-power", 0))
        .unwrap();
    let powers = &out.diagnostics.mean_transmit_power;
    let worst = powers.iter().cloned().fold(0.0, f64::max) / params.p0;
    let furthest = powers[far] / params.p0;
    verdict(
        worst <= 1.02 && (furthest - 1.0).abs() <= 0.02,
        format!("max mean power {worst:.4} P0 (<=1.02), furthest device {furthest:.4} P0 (1 +/- 0.02)"),
    )
}

fn criterion_5() -> Verdict {
    let params = SystemParams { g_th: 0.5, ..SystemParams::reference() };
    let k = 8;
    let q = 5000;
    let ups = gaussian_updates(k, q, 5);
    let dist = [7.0, 15.0, 22.0, 38.0, 51.0, 64.0, 88.0, 99.0];
    let flat = BaaOptions { fading: Fading::Flat, noise: false, receiver: Receiver::Scheduled };
    let out = baa_round(&ups, &dist, &params, &flat, &mut rng::stream(5, "acceptance-oracle", 0)).unwrap();
    let unmasked = (0..q)
        .map(|i| (out.aggregate[i] - ups.iter().map(|u| u[i]).sum::<f64>() / k as f64).abs())
        .fold(0.0, f64::max);
    let mut masked_mismatch = 0;
    for receiver in [Receiver::Scheduled, Receiver::Genie] {
        let opts = BaaOptions { fading: Fading::Rayleigh, noise: false, receiver };
        let out = baa_round(&ups, &dist, &params, &opts, &mut rng::stream(5, "acceptance-oracle", 1)).unwrap();
        for i in 0..q {
            let (sum, count) = out
                .transmitted
                .iter()
                .zip(&ups)
                .filter(|(tx, _)| tx.truncation_mask[i])
                .fold((0.0, 0usize), |(s, c), (_, u)| (s + u[i], c + 1));
            let denom = match receiver {
                Receiver::Scheduled => k,
                Receiver::Genie => count,
            };
            let reference = if denom == 0 { 0.0 } else { sum / denom as f64 };
            masked_mismatch += usize::from(out.aggregate[i] != reference);
        }
    }
    verdict(
        unmasked <= 1e-12 && masked_mismatch == 0,
        format!("unmasked max error {unmasked:.1e} (<=1e-12), masked entries differing from reference: {masked_mismatch}"),
    )
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let params = SystemParams::reference();
    let q = 25_000;
    let mut latency_err: f64 = 0.0;
    let mut analog = Vec::new();
    for k in [2, 5, 10] {
        let dist: Vec<f64> = (1..=k).map(|i| 90.0 * i as f64 / k as f64).collect();
        let ups = gaussian_updates(k, q, 6);
        let a = baa_round(&ups, &dist, &params, &BaaOptions::default(), &mut rng::stream(6, "acceptance-latency", k as u64)).unwrap();
        latency_err = latency_err.max(rel(latency_baa(q, &params).unwrap(), a.diagnostics.latency_s));
        analog.push(a.diagnostics.latency_s);
        let d = digital_round(&ups, &dist, &params, &DigitalOptions::default(), &mut rng::stream(6, "acceptance-latency", 100)).unwrap();
        let scen = ScenarioParams { k_devices: k, r_in: params.r_cell, n_cr: 1, q_dim: q };
        latency_err = latency_err.max(rel(latency_digital(&params, &scen, 90.0).unwrap(), d.round_latency));
    }
    let constant = analog.iter().all(|&t| t == analog[0]);
    let band: Vec<f64> = [64usize, 256, 1024]
        .iter()
        .map(|&k| {
            let scen = ScenarioParams { k_devices: k, r_in: params.r_cell, n_cr: 1, q_dim: 582_026 };
            latency_reduction_ratio(&params, &scen, params.r_cell).unwrap().ratio * (k as f64).log2() / k as f64
        })
        .collect();
    let spread_ratio = band.iter().cloned().fold(0.0, f64::max) / band.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let paper = SystemParams {
        p0: 0.1,
        m: 1000,
        alpha: 3.0,
        n0: analytics::dbm_to_watts(-80.0),
        q_bits: 16,
        ber: 1e-3,
        ..SystemParams::reference()
    };
    let scen = ScenarioParams { k_devices: 200, r_in: paper.r_cell, n_cr: 1, q_dim: 582_026 };
    let gamma = latency_reduction_ratio(&paper, &scen, paper.r_cell).unwrap().ratio;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        latency_err <= 1e-9 && constant && spread_ratio <= 0.25 && (10.0..=1000.0).contains(&gamma) && secs < 1.0,
        format!(
            "round latency error {latency_err:.1e} (<=1e-9), analog latency constant in K: {constant}, \
             gamma log2K/K spread {:.1}% (<=25%), reference gamma {gamma:.1} (10..1000), {secs:.2}s (<1s)",
            100.0 * spread_ratio
        ),
    )
}

fn learning_config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(extra).unwrap()
}

const SEEDS: usize = 5;

fn final_accuracy(cfg: &ExperimentConfig, seed: u64, kind: AggregationKind, scheme: Scheme) -> f64 {
    let (rows, _) = train_rows(cfg, seed, kind, scheme, cfg.system.params()).unwrap();
    rows.last().unwrap().accuracy
}

fn criterion_7() -> Verdict {
    let start = Instant::now();

    // (a) Low-power interior-radius sweep at alpha = 3.5.
    let cfg = learning_config("[system]\np0_w = 1e-3\nalpha = 3.5\n[compare]\ng_th_values = [0.1]\n");
    let fractions = cfg.compare.r_in_fractions.clone();
    let mut by_fraction = vec![Vec::new(); fractions.len()];
    for i in 0..SEEDS {
        for (j, row) in r_in_grid(&cfg, repetition_seed(cfg.seed, i)).unwrap().into_iter().enumerate() {
            by_fraction[j].push(row.final_accuracy);
        }
    }
    let curve: Vec<f64> = by_fraction.into_iter().map(median).collect();
    let (arg, best) = curve.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let last = curve.len() - 1;
    let pass_a = arg > 0 && arg < last && best > curve[0] && best > curve[last];
    let curve_text: Vec<String> = curve.iter().map(|a| format!("{a:.3}")).collect();

    // (b) Analog versus digital at matched settings and moderate SNR.
    let cfg = learning_config("[scheme]\nkind = \"all-inclusive\"\n");
    let acc = |kind| median((0..SEEDS).map(|i| final_accuracy(&cfg, repetition_seed(cfg.seed, i), kind, Scheme::AllInclusive)).collect());
    let (baa, digital) = (acc(AggregationKind::Baa), acc(AggregationKind::Digital));
    let snr_db = analytics::linear_to_db(expected_snr_all_inclusive(&cfg.system.params(), cfg.train.k_devices).unwrap());
    let pass_b = (baa - digital).abs() <= 0.03;

    // (c) Alternating versus cell-interior, static devices.
    let cfg = learning_config("");
    let acc = |kind| {
        let scheme = cfg.scheme.scheme_for(kind);
        median((0..SEEDS).map(|i| final_accuracy(&cfg, repetition_seed(cfg.seed, i), cfg.train.aggregation, scheme)).collect())
    };
    let (interior, alternating) = (acc(SchemeKind::CellInterior), acc(SchemeKind::Alternating));
    let pass_c = alternating >= interior;

    let secs = start.elapsed().as_secs_f64();
    verdict(
        pass_a && pass_b && pass_c && secs < 600.0,
        format!(
            "(a) {} median accuracy over R_in/R 0.1..1.0 [{}], argmax {:.1}; \
             (b) {} BAA {baa:.3} vs digital {digital:.3} at {snr_db:.1} dB; \
             (c) {} alternating {alternating:.3} >= cell-interior {interior:.3}; {secs:.0}s (<600s)",
            if pass_a { "ok" } else { "no" },
            curve_text.join(" "),
            fractions[arg],
            if pass_b { "ok" } else { "no" },
            if pass_c { "ok" } else { "no" },
        ),
    )
}

fn criterion_8() -> Verdict {
    let data = synth_gaussian_mixture(4, 6, 60, 2.0, 8).unwrap();
    let arch = SoftmaxRegression::for_dataset(&data);
    let idx: Vec<usize> = (0..data.n()).collect();
    let mut r = rng::stream(8, "acceptance-gradient", 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let model = ModelParams { weights: (0..arch.q()).map(|_| 0.5 * r.sample::<f64, _>(StandardNormal)).collect() };
        let grad = arch.gradient(&model, &data, &idx).unwrap();
        let j = r.random_range(0..arch.q());
        let h = 1e-5;
        let mut plus = model.clone();
        plus.weights[j] += h;
        let mut minus = model.clone();
        minus.weights[j] -= h;
        let fd = (arch.loss(&plus, &data, &idx).unwrap() - arch.loss(&minus, &data, &idx).unwrap()) / (2.0 * h);
        worst = worst.max((fd - grad[j]).abs() / fd.abs().max(grad[j].abs()).max(1e-8));
    }
    verdict(worst < 1e-5, format!("worst relative error over 20 probes {worst:.1e} (<1e-5)"))
}

fn criterion_9() -> Verdict {
    let mut r = rng::stream(9, "acceptance-extensions", 0);
    let mut round_trip = true;
    for gamma in [1, 4, 7, 16, 64] {
        let code = SpreadingCode::random(gamma, &mut r).unwrap();
        let symbols: Vec<f64> = (0..257).map(|_| r.sample(StandardNormal)).collect();
        round_trip &= despread(&spread(&symbols, &code), &code).unwrap() == symbols;
    }
    let mut suppression = Vec::new();
    for gamma in [4, 16] {
        let rep = suppression_experiment(gamma, 10_000, 2, 4, 1.0, 9).unwrap();
        suppression.push((gamma, rep.suppression_ratio));
    }
    let suppression_ok = suppression.iter().all(|&(g, s)| (s / g as f64 - 1.0).abs() <= 0.2);

    let problem = BeamProblem::new(random_channels(8, 3, &mut r), vec![0, 1, 2], 1.0).unwrap();
    let beam = aggregation_beamformer(&problem, 1).unwrap();
    let h = DMatrix::from_fn(8, 3, |i, j| problem.channels[j][i]);
    let gram = &h * h.adjoint();
    let lambda_max = gram.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let eigen_err = rel(lambda_max / problem.n0, beam.objective);

    let mut residual: f64 = 0.0;
    let mut infeasible_flagged = true;
    for (n, k) in [(8, 3), (4, 4), (8, 8), (3, 5), (2, 3)] {
        let p = BeamProblem::new(random_channels(n, k, &mut r), (0..k).collect(), 1.0).unwrap();
        match sdma_beamformer(&p) {
            SdmaOutcome::Beams(beams) if n >= k => {
                residual = residual.max(beams.iter().map(|b| b.max_residual).fold(0.0, f64::max));
            }
            SdmaOutcome::Infeasible { .. } if n < k => {}
            _ => infeasible_flagged = false,
        }
    }
    verdict(
        round_trip && suppression_ok && eigen_err <= 1e-8 && residual < 1e-10 && infeasible_flagged,
        format!(
            "DSSS round trip exact: {round_trip}; suppression {} (within 20% of gamma); \
             beam objective vs eigen oracle {eigen_err:.1e} (<=1e-8); SDMA residual {residual:.1e} (<1e-10); N<K flagged: {infeasible_flagged}",
            suppression.iter().map(|(g, s)| format!("gamma {g}: {s:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

const SMALL_CONFIG: &str = r#"
seed = 11
trials = 2000

[montecarlo]
k_values = [5]
ratios = [0.5]
snr_k_values = [10]

[train]
n_cr = 3

[data]
n_train = 400
n_test = 200

[partition]
shards_total = 40
shard_size = 10

[compare]
seeds = 2
r_in_fractions = [0.5, 1.0]

[extensions]
gammas = [4]
n_antennas = [4]
k_users = [2, 5]
instances = 2
pattern_angles = 19
"#;

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("small.toml");
    fs::write(&config, SMALL_CONFIG).unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for command in ["tradeoff", "montecarlo", "latency", "train", "compare", "extensions"] {
        for format in ["csv", "json"] {
            let runs: Vec<_> = (0..2)
                .map(|run| {
                    let out = root.path().join(format!("{command}-{format}-{run}"));
                    let status = Process::new(env!("CARGO_BIN_EXE_airfeel"))
                        .args([command, "--config", config.to_str().unwrap(), "--format", format, "--out", out.to_str().unwrap()])
                        .env("RUST_LOG", "error")
                        .stdout(Stdio::null())
                        .status()
                        .unwrap();
                    assert!(status.success(), "{command} failed");
                    snapshot(&out)
                })
                .collect();
            files += runs[0].len();
            if runs[0] != runs[1] {
                differing.push(format!("{command}/{format}"));
            }
        }
    }
    verdict(
        differing.is_empty() && files > 0,
        format!("{files} files from 6 commands x 2 formats re-run; differing: {}", if differing.is_empty() { "none".into() } else { differing.join(", ") }),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut red = BTreeSet::new();
    let mut ran = BTreeSet::new();
    for (n, check) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let v = check();
        println!("criterion {n:>2} {}  {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        ran.insert(n);
        if !v.pass {
            red.insert(n);
        }
    }
    let expected: BTreeSet<u32> = KNOWN_RED.iter().map(|&(n, _)| n).filter(|n| ran.contains(n)).collect();
    for &(n, why) in KNOWN_RED {
        if red.contains(&n) {
            println!("criterion {n:>2} is a known failure: {why}");
        }
    }
    println!("acceptance: {} of {} criteria pass", ran.len() - red.len(), ran.len());
    if red == expected {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing set {red:?} differs from the known set {expected:?}");
        ExitCode::FAILURE
    }
}
