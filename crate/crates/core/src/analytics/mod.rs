//! Closed-form expressions for broadband analog aggregation.
//!
//! Everything here is a pure function of its inputs. The Monte Carlo
//! machinery in [`crate::network`] and [`crate::phy`] is validated against
//! these values.

mod latency;
mod scheduling;
mod snr;
mod special;

pub use latency::{
    latency_baa, latency_digital, latency_reduction_closed_form, latency_reduction_ratio,
    ofdm_symbols, qam_snr_gap, rate_digital_expected, rate_digital_instant, LatencyReport,
};
pub use scheduling::{
    expected_snr_all_inclusive, expected_snr_cell_interior, fraction_exploited, interior_c_factor,
    k_in_distribution, k_in_pmf, max_distance_moments, p_all_exploited, reliability_quantity_curve,
    snr_gain, CellInteriorSnr, MaxDistance, PAllExploited,
};
pub use snr::{aligned_power, receive_snr, snr_truncation_curve, threshold_for_ratio, truncation_ratio};
pub use special::{binomial_pmf, exp_integral, ln_choose};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Physical-layer constants of the cell.
///
/// `n0` is carried in watts; SNRs are reported as aligned receive power over
/// `n0`. Setting `n0 = 1` recovers the unit-noise normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Average transmit power budget per device (W).
    pub p0: f64,
    /// Number of OFDM sub-channels.
    pub m: usize,
    /// Total bandwidth (Hz).
    pub b: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Cell radius (m).
    pub r_cell: f64,
    /// Power-cutoff threshold on |h|^2.
    pub g_th: f64,
    /// Noise power (W).
    pub n0: f64,
    /// Quantisation resolution of the digital baseline (bits/parameter).
    pub q_bits: u32,
    /// Target bit error rate of the digital baseline.
    pub ber: f64,
}

impl SystemParams {
    /// Cell defaults used throughout the experiments: R = 100 m, alpha = 3,
    /// M = 1000, P0 = 0.1 W, N0 = -80 dBm, Q = 16, BER = 1e-3.
    ///
    /// Bandwidth and cutoff threshold are not pinned by the model; 15 MHz
    /// (15 kHz spacing) and g_th = 0.1 are used.
    pub fn reference() -> Self {
        Self {
            p0: 0.1,
            m: 1000,
            b: 15.0e6,
            alpha: 3.0,
            r_cell: 100.0,
            g_th: 0.1,
            n0: dbm_to_watts(-80.0),
            q_bits: 16,
            ber: 1e-3,
        }
    }

    /// OFDM symbol duration `M / B`, the inverse of the sub-carrier spacing.
    pub fn t_s(&self) -> f64 {
        self.m as f64 / self.b
    }

    /// Sub-carrier spacing `B / M`.
    pub fn b_sub(&self) -> f64 {
        self.b / self.m as f64
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.p0, self.b, self.alpha, self.r_cell, self.g_th, self.n0, self.ber]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(domain("system parameters must be finite"));
        }
        if self.p0 <= 0.0 {
            return Err(domain(format!("p0 must be positive, got {}", self.p0)));
        }
        if self.m == 0 {
            return Err(domain("m must be at least 1"));
        }
        if self.b <= 0.0 {
            return Err(domain(format!("bandwidth must be positive, got {}", self.b)));
        }
        if self.alpha <= 0.0 {
            return Err(domain(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.r_cell <= 0.0 {
            return Err(domain(format!("r_cell must be positive, got {}", self.r_cell)));
        }
        if self.g_th < 0.0 {
            return Err(domain(format!("g_th must be non-negative, got {}", self.g_th)));
        }
        if self.n0 <= 0.0 {
            return Err(domain(format!("n0 must be positive, got {}", self.n0)));
        }
        if !(self.ber > 0.0 && self.ber < 1.0) {
            return Err(domain(format!("ber must lie in (0, 1), got {}", self.ber)));
        }
        if self.q_bits == 0 || self.q_bits > 32 {
            return Err(domain(format!("q_bits must lie in 1..=32, got {}", self.q_bits)));
        }
        Ok(())
    }
}

/// Scheduling scenario: device count, interior radius, round count and model size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub k_devices: usize,
    /// Cell-interior radius (m).
    pub r_in: f64,
    pub n_cr: usize,
    pub q_dim: usize,
}

impl ScenarioParams {
    pub fn validate(&self, r_cell: f64) -> Result<()> {
        if self.k_devices == 0 || self.n_cr == 0 || self.q_dim == 0 {
            return Err(domain("k_devices, n_cr and q_dim must all be at least 1"));
        }
        if !(self.r_in > 0.0 && self.r_in <= r_cell) {
            return Err(domain(format!(
                "r_in must lie in (0, r_cell = {r_cell}], got {}",
                self.r_in
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    TruncationRatio,
    SnrLinear,
    SnrDb,
    DataFraction,
    Gain,
}

impl Axis {
    pub fn label(&self) -> &'static str {
        match self {
            Axis::TruncationRatio => "truncation_ratio",
            Axis::SnrLinear => "snr_linear",
            Axis::SnrDb => "snr_db",
            Axis::DataFraction => "data_fraction",
            Axis::Gain => "gain",
        }
    }
}

/// A sampled tradeoff curve with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub x_axis: Axis,
    pub y_axis: Axis,
    points: Vec<(f64, f64)>,
}

impl TradeoffCurve {
    pub fn new(x_axis: Axis, y_axis: Axis, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(domain("curve abscissae must be strictly increasing"));
        }
        Ok(Self { x_axis, y_axis, points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same curve with the ordinate converted to dB.
    pub fn to_db(&self) -> Self {
        Self {
            x_axis: self.x_axis,
            y_axis: Axis::SnrDb,
            points: self.points.iter().map(|&(x, y)| (x, linear_to_db(y))).collect(),
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

pub(crate) fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(domain(format!("{what} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_params_are_valid() {
        let p = SystemParams::reference();
        p.validate().unwrap();
        assert!((p.n0 - 1e-11).abs() < 1e-24);
        assert_eq!(p.t_s() * p.b, p.m as f64);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = SystemParams::reference();
        p.ber = 1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.g_th = -0.1;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.m = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn curve_rejects_non_increasing_abscissae() {
        assert!(TradeoffCurve::new(Axis::Gain, Axis::Gain, vec![(0.1, 1.0), (0.1, 2.0)]).is_err());
    }

    #[test]
    fn scenario_rejects_r_in_beyond_cell() {
        let s = ScenarioParams { k_devices: 5, r_in: 120.0, n_cr: 1, q_dim: 10 };
        assert!(s.validate(100.0).is_err());
    }
}
