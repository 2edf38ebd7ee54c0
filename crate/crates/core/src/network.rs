//! Random disk topologies, device mobility and the scheduling schemes.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevicePosition {
    pub device_id: usize,
    /// Distance to the edge server (m).
    pub radius: f64,
    /// Polar angle (rad) in `[0, 2 pi)`.
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mobility {
    /// Positions fixed for the whole training run.
    Static,
    /// Positions redrawn i.i.d. every round.
    IidResample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub positions: Vec<DevicePosition>,
    pub round_index: u64,
    pub mobility: Mobility,
    pub r_cell: f64,
}

impl NetworkRealization {
    pub fn k_devices(&self) -> usize {
        self.positions.len()
    }

    pub fn with_mobility(mut self, mobility: Mobility) -> Self {
        self.mobility = mobility;
        self
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.iter().map(|p| p.radius)
    }

    pub fn max_radius(&self) -> f64 {
        self.radii().fold(0.0, f64::max)
    }

    /// Writes `device_id,radius_m,angle_rad` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "device_id,radius_m,angle_rad")?;
        for p in &self.positions {
            writeln!(out, "{},{},{}", p.device_id, p.radius, p.angle)?;
        }
        Ok(())
    }
}

/// Draws K positions uniform on the disk of radius `r_cell`.
///
/// Radii use the inverse CDF `R sqrt(U)` of the density `2r / R^2`.
pub fn sample_positions(k_devices: usize, r_cell: f64, rng: &mut SimRng) -> Vec<DevicePosition> {
    (0..k_devices)
        .map(|device_id| {
            let u: f64 = rng.random();
            let angle = rng.random::<f64>() * TAU;
            DevicePosition { device_id, radius: r_cell * u.sqrt(), angle }
        })
        .collect()
}

pub fn sample_topology(k_devices: usize, r_cell: f64, rng_seed: u64) -> Result<NetworkRealization> {
    if k_devices == 0 {
        return Err(domain("need at least one device"));
    }
    if !(r_cell > 0.0) {
        return Err(domain(format!("r_cell must be positive, got {r_cell}")));
    }
    let mut rng = rng::stream(rng_seed, "topology", 0);
    Ok(NetworkRealization {
        positions: sample_positions(k_devices, r_cell, &mut rng),
        round_index: 0,
        mobility: Mobility::Static,
        r_cell,
    })
}

/// Moves the network to the next round.
pub fn advance_round(net: NetworkRealization, rng: &mut SimRng) -> NetworkRealization {
    let positions = match net.mobility {
        Mobility::Static => net.positions,
        Mobility::IidResample => sample_positions(net.positions.len(), net.r_cell, rng),
    };
    NetworkRealization {
        positions,
        round_index: net.round_index + 1,
        ..net
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    AllInclusive,
    CellInterior { r_in: f64 },
    /// Cell-interior on rounds with `round mod 2 period < period`, all-inclusive otherwise.
    Alternating { r_in: f64, period: u64 },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::AllInclusive => "all-inclusive",
            Scheme::CellInterior { .. } => "cell-interior",
            Scheme::Alternating { .. } => "alternating",
        }
    }

    pub fn validate(&self, r_cell: f64) -> Result<()> {
        match *self {
            Scheme::AllInclusive => Ok(()),
            Scheme::CellInterior { r_in } | Scheme::Alternating { r_in, .. } if !(r_in > 0.0 && r_in <= r_cell) => {
                Err(domain(format!("r_in must lie in (0, {r_cell}], got {r_in}")))
            }
            Scheme::Alternating { period: 0, .. } => Err(domain("alternating period must be at least 1")),
            _ => Ok(()),
        }
    }

    fn interior_radius(&self, round_index: u64) -> Option<f64> {
        match *self {
            Scheme::AllInclusive => None,
            Scheme::CellInterior { r_in } => Some(r_in),
            Scheme::Alternating { r_in, period } => (round_index % (2 * period) < period).then_some(r_in),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    /// Scheduled device ids in ascending order.
    pub scheduled_ids: Vec<usize>,
    pub scheme: Scheme,
    /// Largest radius in the scheduled set (0 for an empty round).
    pub r_max_scheduled: f64,
    /// Devices inside `r_in` (all devices when the round is all-inclusive).
    pub k_in: usize,
}

impl ScheduleDecision {
    /// No device transmits; the caller skips aggregation for this round.
    pub fn is_empty(&self) -> bool {
        self.scheduled_ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.scheduled_ids.len()
    }
}

pub fn schedule(net: &NetworkRealization, scheme: Scheme, round_index: u64) -> ScheduleDecision {
    let scheduled: Vec<&DevicePosition> = match scheme.interior_radius(round_index) {
        None => net.positions.iter().collect(),
        Some(r_in) => net.positions.iter().filter(|p| p.radius <= r_in).collect(),
    };
    let r_max_scheduled = scheduled.iter().map(|p| p.radius).fold(0.0, f64::max);
    let mut scheduled_ids: Vec<usize> = scheduled.iter().map(|p| p.device_id).collect();
    scheduled_ids.sort_unstable();
    if scheduled_ids.is_empty() {
        log::debug!("round {round_index}: no device scheduled under {}", scheme.name());
    }
    ScheduleDecision {
        k_in: scheduled_ids.len(),
        scheduled_ids,
        scheme,
        r_max_scheduled,
    }
}

/// Monte Carlo estimators over independent topology draws.
pub mod montecarlo {
    use rayon::prelude::*;

    use super::*;

    const MODULE: &str = "network-mc";

    fn trial_radii(k_devices: usize, r_cell: f64, seed: u64, trial: u64) -> Vec<f64> {
        let mut rng = rng::stream(seed, MODULE, trial);
        (0..k_devices)
            .map(|_| {
                let u: f64 = rng.random();
                r_cell * u.sqrt()
            })
            .collect()
    }

    /// Applies `f` to each trial's radii and returns the results in trial order.
    pub fn map_trials<T, F>(k_devices: usize, r_cell: f64, trials: u64, seed: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync,
    {
        (0..trials)
            .into_par_iter()
            .map(|t| f(&trial_radii(k_devices, r_cell, seed, t)))
            .collect()
    }

    /// Empirical `K_in` histogram, normalised to a PMF over `0..=K`.
    pub fn k_in_histogram(k_devices: usize, r_in: f64, r_cell: f64, trials: u64, seed: u64) -> Vec<f64> {
        let counts = map_trials(k_devices, r_cell, trials, seed, |radii| {
            radii.iter().filter(|&&r| r <= r_in).count()
        });
        let mut hist = vec![0.0; k_devices + 1];
        for c in counts {
            hist[c] += 1.0;
        }
        hist.iter_mut().for_each(|h| *h /= trials as f64);
        hist
    }

    pub fn mean_max_radius(k_devices: usize, r_cell: f64, trials: u64, seed: u64) -> f64 {
        let v = map_trials(k_devices, r_cell, trials, seed, |radii| radii.iter().cloned().fold(0.0, f64::max));
        v.iter().sum::<f64>() / trials as f64
    }

    pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
        0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
    }

    /// Fraction of i.i.d.-mobility runs in which every device is interior in at least one round.
    pub fn all_exploited_fraction(k_devices: usize, r_in: f64, r_cell: f64, n_cr: usize, runs: u64, seed: u64) -> f64 {
        let hits: u64 = (0..runs)
            .into_par_iter()
            .map(|run| {
                let mut rng = rng::stream(seed, "network-mobility", run);
                let mut net = NetworkRealization {
                    positions: sample_positions(k_devices, r_cell, &mut rng),
                    round_index: 0,
                    mobility: Mobility::IidResample,
                    r_cell,
                };
                let mut seen = vec![false; k_devices];
                for round in 0..n_cr {
                    if round > 0 {
                        net = advance_round(net, &mut rng);
                    }
                    for p in &net.positions {
                        seen[p.device_id] |= p.radius <= r_in;
                    }
                }
                u64::from(seen.iter().all(|&s| s))
            })
            .sum();
        hits as f64 / runs as f64
    }
}
