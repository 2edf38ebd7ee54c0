use serde::{Deserialize, Serialize};

use super::{exp_integral, ScenarioParams, SystemParams};
use crate::error::{domain, Result};

/// OFDM symbols needed to carry `q` analog parameters, zero-padding the last one.
pub fn ofdm_symbols(q: usize, m: usize) -> usize {
    q.div_ceil(m)
}

/// Per-round latency of analog aggregation, `ceil(q / M) Ts`. Independent of K.
pub fn latency_baa(q_dim: usize, params: &SystemParams) -> Result<f64> {
    if q_dim == 0 {
        return Err(domain("model dimension must be at least 1"));
    }
    Ok(ofdm_symbols(q_dim, params.m) as f64 * params.t_s())
}

/// MQAM SNR gap `-1.5 / ln(5 BER)`.
pub fn qam_snr_gap(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.2) {
        return Err(domain(format!("BER must lie in (0, 0.2) for the MQAM rate fit, got {ber}")));
    }
    Ok(-1.5 / (5.0 * ber).ln())
}

/// Per-device receive SNR of the OFDMA baseline, `K P0 / (M r^alpha E1(g_th))` over N0.
fn digital_snr(params: &SystemParams, k_devices: usize, r_k: f64) -> Result<f64> {
    if k_devices == 0 {
        return Err(domain("need at least one device"));
    }
    if !(r_k > 0.0) {
        return Err(domain(format!("distance must be positive, got {r_k}")));
    }
    if !(params.g_th > 0.0) {
        return Err(domain("digital rate needs g_th > 0"));
    }
    Ok(k_devices as f64 * params.p0
        / (params.m as f64 * r_k.powf(params.alpha) * exp_integral(params.g_th)? * params.n0))
}

/// Instantaneous rate (bit/s) on one sub-channel with gain `|h|^2 = gain`.
pub fn rate_digital_instant(params: &SystemParams, k_devices: usize, r_k: f64, gain: f64) -> Result<f64> {
    let gap = qam_snr_gap(params.ber)?;
    let snr = digital_snr(params, k_devices, r_k)?;
    Ok(if gain >= params.g_th { params.b_sub() * (gap * snr).ln_1p() / std::f64::consts::LN_2 } else { 0.0 })
}

/// Expected sum rate (bit/s) of a device at distance `r_k` holding `M / K` sub-channels.
pub fn rate_digital_expected(params: &SystemParams, k_devices: usize, r_k: f64) -> Result<f64> {
    let gap = qam_snr_gap(params.ber)?;
    let snr = digital_snr(params, k_devices, r_k)?;
    let m_k = params.m as f64 / k_devices as f64;
    Ok(m_k * params.b_sub() * (gap * snr).ln_1p() / std::f64::consts::LN_2 * (-params.g_th).exp())
}

/// Expected straggler latency of the OFDMA baseline,
/// `K q Q / (M log2(1 + gap rho(r_max)) exp(-g_th)) Ts`.
pub fn latency_digital(params: &SystemParams, scenario: &ScenarioParams, r_max: f64) -> Result<f64> {
    let k = scenario.k_devices;
    let gap = qam_snr_gap(params.ber)?;
    let snr = digital_snr(params, k, r_max)?;
    let log_term = (gap * snr).ln_1p() / std::f64::consts::LN_2;
    Ok(k as f64 * scenario.q_dim as f64 * params.q_bits as f64
        / (params.m as f64 * log_term * (-params.g_th).exp())
        * params.t_s())
}

/// `K Q / (log2(1 + gap rho(r_max)) exp(-g_th))`, exact when q is a multiple of M.
pub fn latency_reduction_closed_form(params: &SystemParams, k_devices: usize, r_max: f64) -> Result<f64> {
    let gap = qam_snr_gap(params.ber)?;
    let snr = digital_snr(params, k_devices, r_max)?;
    let log_term = (gap * snr).ln_1p() / std::f64::consts::LN_2;
    Ok(k_devices as f64 * params.q_bits as f64 / (log_term * (-params.g_th).exp()))
}

/// Per-round analog and digital latency for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub k_devices: usize,
    pub r_max: f64,
    pub t_analog: f64,
    pub t_digital: f64,
    /// `t_digital / t_analog`.
    pub ratio: f64,
}

pub fn latency_reduction_ratio(params: &SystemParams, scenario: &ScenarioParams, r_max: f64) -> Result<LatencyReport> {
    let t_analog = latency_baa(scenario.q_dim, params)?;
    let t_digital = latency_digital(params, scenario, r_max)?;
    Ok(LatencyReport {
        k_devices: scenario.k_devices,
        r_max,
        t_analog,
        t_digital,
        ratio: t_digital / t_analog,
    })
}
