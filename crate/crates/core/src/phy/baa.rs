use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::channel::draw_channel;
use crate::analytics::{self, exp_integral, SystemParams};
use crate::error::{domain, Error, Result};
use crate::rng::SimRng;

/// Truncated channel inversion aligned to the furthest scheduled device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPolicy {
    /// Aligned receive power (W).
    pub rho0: f64,
    pub g_th: f64,
    pub alpha: f64,
    pub r_max: f64,
}

impl PowerPolicy {
    /// Pre-equaliser for a device at `r_k` on a sub-channel with fading `h`,
    /// or `None` when the sub-channel is cut off.
    pub fn coefficient(&self, r_k: f64, h: Complex64) -> Option<Complex64> {
        (h.norm_sqr() >= self.g_th).then(|| self.rho0.sqrt() * r_k.powf(self.alpha / 2.0) / h)
    }

    /// `E|p|^2 = rho0 r^alpha E1(g_th)` per sub-channel; equals `P0 / M` at `r_max`.
    pub fn expected_subchannel_power(&self, r_k: f64) -> f64 {
        self.rho0 * r_k.powf(self.alpha) * exp_integral(self.g_th).unwrap_or(f64::INFINITY)
    }
}

/// Aligns the receive power to the furthest of the scheduled distances.
pub fn align_rho0(distances: &[f64], params: &SystemParams) -> Result<PowerPolicy> {
    if distances.is_empty() {
        return Err(Error::Empty("scheduled set"));
    }
    if !(params.g_th > 0.0) {
        return Err(domain("truncated channel inversion needs g_th > 0"));
    }
    let r_max = distances.iter().cloned().fold(0.0, f64::max);
    Ok(PowerPolicy {
        rho0: analytics::aligned_power(params, r_max)?,
        g_th: params.g_th,
        alpha: params.alpha,
        r_max,
    })
}

/// A transmitted update after truncation; cut-off entries hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateVector {
    pub values: Vec<f64>,
    /// `true` where the entry was transmitted.
    pub truncation_mask: Vec<bool>,
}

impl UpdateVector {
    pub fn truncated_fraction(&self) -> f64 {
        let cut = self.truncation_mask.iter().filter(|&&m| !m).count();
        cut as f64 / self.truncation_mask.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fading {
    Rayleigh,
    /// All `h = 1` and no cutoff.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Receiver {
    /// Divide every entry by the scheduled count |K|.
    Scheduled,
    /// Divide each entry by its true contributor count.
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaaOptions {
    pub fading: Fading,
    pub noise: bool,
    pub receiver: Receiver,
}

impl Default for BaaOptions {
    fn default() -> Self {
        Self { fading: Fading::Rayleigh, noise: true, receiver: Receiver::Scheduled }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaaDiagnostics {
    pub rho0: f64,
    /// `rho0 / n0`.
    pub snr: f64,
    pub r_max: f64,
    pub n_symbols: usize,
    pub latency_s: f64,
    pub truncation_fraction: Vec<f64>,
    /// Time-averaged `sum_m |p_k^(m)|^2` per device (W).
    pub mean_transmit_power: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BaaOutcome {
    pub aggregate: Vec<f64>,
    pub transmitted: Vec<UpdateVector>,
    pub diagnostics: BaaDiagnostics,
}

/// One over-the-air aggregation round.
///
/// Parameter `i` rides sub-channel `i mod M` of OFDM symbol `i / M`. Channels
/// are redrawn per symbol. The receiver adds the real part of CN(0, n0)
/// noise to every superposed entry, removes the `sqrt(rho0)` alignment gain
/// and divides by the scheduled count (or the true count in genie mode).
pub fn baa_round(
    updates: &[Vec<f64>],
    distances: &[f64],
    params: &SystemParams,
    opts: &BaaOptions,
    rng: &mut SimRng,
) -> Result<BaaOutcome> {
    let k = updates.len();
    if k == 0 {
        return Err(Error::Empty("scheduled updates"));
    }
    if distances.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: distances.len() });
    }
    let q = updates[0].len();
    if q == 0 {
        return Err(Error::Empty("update vector"));
    }
    if let Some(bad) = updates.iter().find(|u| u.len() != q) {
        return Err(Error::DimensionMismatch { expected: q, got: bad.len() });
    }
    let policy = match opts.fading {
        Fading::Rayleigh => align_rho0(distances, params)?,
        Fading::Flat => {
            let r_max = distances.iter().cloned().fold(0.0, f64::max);
            // Without fading the inversion cost is r^alpha, so alignment to r_max
            // spends the whole budget there.
            let rho0 = params.p0 / (params.m as f64 * r_max.powf(params.alpha));
            PowerPolicy { rho0, g_th: 0.0, alpha: params.alpha, r_max }
        }
    };
    let m = params.m;
    let n_symbols = analytics::ofdm_symbols(q, m);
    let amp = policy.rho0.sqrt();
    let noise_std = (params.n0 / 2.0).sqrt();

    // Aligned signal sum in update units and receiver noise, kept apart so the
    // alignment gain can be removed without rounding the signal path.
    let mut aligned = vec![0.0; q];
    let mut noise = vec![0.0; q];
    let mut contributors = vec![0usize; q];
    let mut transmitted: Vec<UpdateVector> = (0..k)
        .map(|_| UpdateVector { values: vec![0.0; q], truncation_mask: vec![false; q] })
        .collect();
    let mut power_sum = vec![0.0; k];

    for t in 0..n_symbols {
        let draw = match opts.fading {
            Fading::Rayleigh => Some(draw_channel(k, m, rng)),
            Fading::Flat => None,
        };
        let block = t * m..((t + 1) * m).min(q);
        for (dev, (update, &r_k)) in updates.iter().zip(distances).enumerate() {
            let path_gain = r_k.powf(-policy.alpha / 2.0);
            for i in block.clone() {
                let h = draw.as_ref().map_or(Complex64::new(1.0, 0.0), |d| d.get(dev, i - t * m));
                let coeff = match opts.fading {
                    Fading::Rayleigh => policy.coefficient(r_k, h),
                    Fading::Flat => Some(Complex64::new(amp / path_gain, 0.0)),
                };
                if let Some(p) = coeff {
                    power_sum[dev] += p.norm_sqr();
                    // The inversion makes r^{-alpha/2} h p equal sqrt(rho0), so
                    // every surviving entry lands with the common gain `amp`.
                    aligned[i] += update[i];
                    contributors[i] += 1;
                    transmitted[dev].values[i] = update[i];
                    transmitted[dev].truncation_mask[i] = true;
                }
            }
        }
        if opts.noise {
            for z_i in &mut noise[block] {
                let z: f64 = rng.sample(StandardNormal);
                *z_i = noise_std * z;
            }
        }
    }

    // y_i = amp * aligned_i + z_i, scaled by 1 / (amp * denom).
    let aggregate = aligned
        .iter()
        .zip(&noise)
        .zip(&contributors)
        .map(|((&s, &z), &count)| {
            let denom = match opts.receiver {
                Receiver::Scheduled => k,
                Receiver::Genie => count,
            };
            if denom == 0 {
                z / (amp * k as f64)
            } else {
                s / denom as f64 + z / (amp * denom as f64)
            }
        })
        .collect();

    let diagnostics = BaaDiagnostics {
        rho0: policy.rho0,
        snr: policy.rho0 / params.n0,
        r_max: policy.r_max,
        n_symbols,
        latency_s: n_symbols as f64 * params.t_s(),
        truncation_fraction: transmitted.iter().map(UpdateVector::truncated_fraction).collect(),
        mean_transmit_power: power_sum.iter().map(|s| s / q as f64 * m as f64).collect(),
    };
    Ok(BaaOutcome { aggregate, transmitted, diagnostics })
}
