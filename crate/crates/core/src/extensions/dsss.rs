use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, SystemParams};
use crate::error::{domain, Error, Result};
use crate::rng::{self, SimRng};

/// A ±1 pseudo-noise sequence of length `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingCode {
    chips: Vec<f64>,
}

impl SpreadingCode {
    pub fn new(chips: Vec<f64>) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::Empty("spreading code"));
        }
        if let Some(bad) = chips.iter().find(|&&c| c != 1.0 && c != -1.0) {
            return Err(domain(format!("chips must be +1 or -1, got {bad}")));
        }
        Ok(Self { chips })
    }

    /// Fair-coin chips.
    pub fn random(gamma: usize, rng: &mut SimRng) -> Result<Self> {
        Self::new((0..gamma).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
    }

    pub fn gamma(&self) -> usize {
        self.chips.len()
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }
}

/// Each symbol occupies `gamma` chip slots multiplied by the code.
pub fn spread(symbols: &[f64], code: &SpreadingCode) -> Vec<f64> {
    symbols.iter().flat_map(|&s| code.chips.iter().map(move |&c| s * c)).collect()
}

/// Correlates each block of `gamma` chips with the code and divides by `gamma`.
///
/// The mean is taken around the first de-scrambled chip so that a block of
/// identical values comes back bit-exact for every `gamma`.
pub fn despread(chips: &[f64], code: &SpreadingCode) -> Result<Vec<f64>> {
    let g = code.gamma();
    if chips.len() % g != 0 {
        return Err(Error::DimensionMismatch { expected: chips.len().div_ceil(g) * g, got: chips.len() });
    }
    Ok(chips
        .chunks(g)
        .map(|block| {
            let pivot = block[0] * code.chips[0];
            let spread: f64 = block.iter().zip(&code.chips).map(|(y, c)| y * c - pivot).sum();
            pivot + spread / g as f64
        })
        .collect())
}

/// Noiseless chip-level superposition of spread updates, despread at the server.
pub fn protected_aggregate(updates: &[Vec<f64>], code: &SpreadingCode) -> Result<Vec<f64>> {
    let first = updates.first().ok_or(Error::Empty("updates"))?;
    let mut air = vec![0.0; first.len() * code.gamma()];
    for u in updates {
        if u.len() != first.len() {
            return Err(Error::DimensionMismatch { expected: first.len(), got: u.len() });
        }
        air.iter_mut().zip(spread(u, code)).for_each(|(a, c)| *a += c);
    }
    despread(&air, code)
}

/// Airtime of a spread upload: `gamma` times the analog latency.
pub fn dsss_latency(q_dim: usize, params: &SystemParams, gamma: usize) -> Result<f64> {
    Ok(gamma as f64 * analytics::latency_baa(q_dim, params)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionTrial {
    /// Despread sum of the legitimate updates plus residual interference.
    pub aggregate: Vec<f64>,
    /// Interference energy per symbol after despreading.
    pub despread_interference: f64,
    /// Interference energy per symbol of the same attacker without spreading.
    pub unspread_interference: f64,
}

/// One attack: a code-unaware white Gaussian interferer of power
/// `adversary_power` per chip hits the superposed chips.
pub fn adversary_suppression_trial(
    legit: &[Vec<f64>],
    adversary_power: f64,
    code: &SpreadingCode,
    rng: &mut SimRng,
) -> Result<SuppressionTrial> {
    if !(adversary_power >= 0.0) {
        return Err(domain(format!("adversary power must be non-negative, got {adversary_power}")));
    }
    let first = legit.first().ok_or(Error::Empty("legitimate updates"))?;
    let n = first.len();
    let sigma = adversary_power.sqrt();
    let mut air = vec![0.0; n * code.gamma()];
    for u in legit {
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        air.iter_mut().zip(spread(u, code)).for_each(|(a, c)| *a += c);
    }
    let jam: Vec<f64> = (0..air.len()).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    air.iter_mut().zip(&jam).for_each(|(a, j)| *a += j);
    let aggregate = despread(&air, code)?;
    let residual = despread(&jam, code)?;
    let unspread: Vec<f64> = (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / n.max(1) as f64;
    Ok(SuppressionTrial {
        aggregate,
        despread_interference: energy(&residual),
        unspread_interference: energy(&unspread),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressionReport {
    pub gamma: usize,
    pub trials: u64,
    pub unspread_power: f64,
    pub despread_power: f64,
    /// `unspread_power / despread_power`; tends to `gamma`.
    pub suppression_ratio: f64,
}

/// Averages interference powers over `trials` independent attacks, each with
/// a fresh code and `n_symbols` symbols from `k_legit` unit-variance devices.
pub fn suppression_experiment(
    gamma: usize,
    trials: u64,
    k_legit: usize,
    n_symbols: usize,
    adversary_power: f64,
    seed: u64,
) -> Result<SuppressionReport> {
    if trials == 0 || k_legit == 0 || n_symbols == 0 {
        return Err(domain("suppression experiment needs trials, devices and symbols"));
    }
    let tag = format!("dsss-{gamma}");
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, &tag, t);
            let code = SpreadingCode::random(gamma, &mut r)?;
            let legit: Vec<Vec<f64>> =
                (0..k_legit).map(|_| (0..n_symbols).map(|_| r.sample::<f64, _>(StandardNormal)).collect()).collect();
            let trial = adversary_suppression_trial(&legit, adversary_power, &code, &mut r)?;
            Ok((trial.unspread_interference, trial.despread_interference))
        })
        .collect::<Result<Vec<_>>>()?;
    let (u, d) = per_trial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let count = trials as f64;
    Ok(SuppressionReport {
        gamma,
        trials,
        unspread_power: u / count,
        despread_power: d / count,
        suppression_ratio: u / d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_code_is_identity() {
        let code = SpreadingCode::new(vec![1.0]).unwrap();
        let x = vec![0.5, -2.0, 3.25];
        assert_eq!(spread(&x, &code), x);
        assert_eq!(despread(&x, &code).unwrap(), x);
    }

    #[test]
    fn round_trip_is_exact() {
        let mut r = rng::stream(0, "t", 0);
        for gamma in [1, 2, 7, 16, 64] {
            let code = SpreadingCode::random(gamma, &mut r).unwrap();
            let x: Vec<f64> = (0..1000).map(|_| r.sample::<f64, _>(StandardNormal) * 1e3).collect();
            assert_eq!(despread(&spread(&x, &code), &code).unwrap(), x);
        }
    }

    #[test]
    fn invalid_codes_and_lengths() {
        assert!(SpreadingCode::new(vec![]).is_err());
        assert!(SpreadingCode::new(vec![1.0, 0.5]).is_err());
        let code = SpreadingCode::new(vec![1.0, -1.0, 1.0]).unwrap();
        assert!(despread(&[1.0, 2.0], &code).is_err());
    }

    #[test]
    fn silent_adversary_leaves_sum() {
        let code = SpreadingCode::new(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let legit = vec![vec![1.0, 2.0], vec![-0.5, 4.0]];
        let t = adversary_suppression_trial(&legit, 0.0, &code, &mut rng::stream(0, "t", 0)).unwrap();
        assert_eq!(t.aggregate, vec![0.5, 6.0]);
        assert_eq!(protected_aggregate(&legit, &code).unwrap(), vec![0.5, 6.0]);
    }

    #[test]
    fn latency_scales_with_gamma() {
        let p = SystemParams::reference();
        let base = analytics::latency_baa(582_026, &p).unwrap();
        assert_eq!(dsss_latency(582_026, &p, 16).unwrap(), 16.0 * base);
    }

    #[test]
    fn processing_gain_is_gamma() {
        for gamma in [1, 4, 16] {
            let rep = suppression_experiment(gamma, 4000, 2, 4, 2.0, 7).unwrap();
            assert!((rep.suppression_ratio / gamma as f64 - 1.0).abs() < 0.1, "{rep:?}");
        }
    }
}
