use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, SystemParams};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalOptions {
    /// Flip each delivered bit independently with probability BER.
    pub bit_flips: bool,
}

/// Uniform Q-bit codes over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub codes: Vec<u64>,
    pub lo: f64,
    pub hi: f64,
    pub bits: u32,
}

impl Quantized {
    fn step(&self) -> f64 {
        let levels = ((1u64 << self.bits) - 1) as f64;
        (self.hi - self.lo) / levels
    }

    pub fn dequantize(&self) -> Vec<f64> {
        let step = self.step();
        self.codes.iter().map(|&c| self.lo + c as f64 * step).collect()
    }
}

pub fn quantize(values: &[f64], lo: f64, hi: f64, bits: u32) -> Quantized {
    let max_code = (1u64 << bits) - 1;
    let span = hi - lo;
    let codes = values
        .iter()
        .map(|&v| {
            if span <= 0.0 {
                0
            } else {
                (((v - lo) / span * max_code as f64).round() as u64).min(max_code)
            }
        })
        .collect();
    Quantized { codes, lo, hi, bits }
}

#[derive(Debug, Clone)]
pub struct DigitalOutcome {
    pub aggregate: Vec<f64>,
    /// Expected upload latency per device (s), in input order.
    pub per_device_latency: Vec<f64>,
    /// Straggler latency: the slowest device.
    pub round_latency: f64,
    pub r_max: f64,
}

/// One OFDMA round: quantise, deliver, average.
///
/// The quantiser range is the round-wide min/max, sent as side information.
/// Every scheduled device holds `M / K` sub-channels.
pub fn digital_round(
    updates: &[Vec<f64>],
    distances: &[f64],
    params: &SystemParams,
    opts: &DigitalOptions,
    rng: &mut SimRng,
) -> Result<DigitalOutcome> {
    let k = updates.len();
    if k == 0 {
        return Err(Error::Empty("scheduled updates"));
    }
    if distances.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: distances.len() });
    }
    let q = updates[0].len();
    if let Some(bad) = updates.iter().find(|u| u.len() != q) {
        return Err(Error::DimensionMismatch { expected: q, got: bad.len() });
    }
    let (lo, hi) = updates
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let mut aggregate = vec![0.0; q];
    for update in updates {
        let mut packet = quantize(update, lo, hi, params.q_bits);
        if opts.bit_flips {
            for code in &mut packet.codes {
                for bit in 0..params.q_bits {
                    if rng.random::<f64>() < params.ber {
                        *code ^= 1 << bit;
                    }
                }
            }
        }
        for (acc, v) in aggregate.iter_mut().zip(packet.dequantize()) {
            *acc += v;
        }
    }
    aggregate.iter_mut().for_each(|a| *a /= k as f64);

    let bits = q as f64 * params.q_bits as f64;
    let per_device_latency = distances
        .iter()
        .map(|&r| Ok(bits / analytics::rate_digital_expected(params, k, r)?))
        .collect::<Result<Vec<f64>>>()?;
    let round_latency = per_device_latency.iter().cloned().fold(0.0, f64::max);
    Ok(DigitalOutcome {
        aggregate,
        per_device_latency,
        round_latency,
        r_max: distances.iter().cloned().fold(0.0, f64::max),
    })
}
