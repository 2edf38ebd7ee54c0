use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Per-round affine map shared by every device and inverted at the server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub mean: f64,
    pub std: f64,
}

impl NormalizationSpec {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0) || !std.is_finite() || !mean.is_finite() {
            return Err(domain(format!("normalisation needs finite mean and std > 0, got ({mean}, {std})")));
        }
        Ok(Self { mean, std })
    }

    /// Mean and standard deviation of the broadcast global model.
    ///
    /// A degenerate model (all entries equal) falls back to `std = 1`.
    pub fn from_model(weights: &[f64]) -> Self {
        if weights.is_empty() {
            return Self { mean: 0.0, std: 1.0 };
        }
        let n = weights.len() as f64;
        let mean = weights.iter().sum::<f64>() / n;
        let var = weights.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std > 1e-12 * mean.abs().max(1.0) {
            Self { mean, std }
        } else {
            log::warn!("degenerate model statistics (std = {std:e}); normalising with std = 1");
            Self { mean, std: 1.0 }
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert(&self, s: f64) -> f64 {
        s * self.std + self.mean
    }
}

pub fn normalize_updates(raw: &[Vec<f64>], spec: &NormalizationSpec) -> Vec<Vec<f64>> {
    raw.iter().map(|u| u.iter().map(|&x| spec.apply(x)).collect()).collect()
}

/// Maps an aggregate of normalised updates back to model space.
pub fn denormalize(aggregate: &[f64], spec: &NormalizationSpec) -> Vec<f64> {
    aggregate.iter().map(|&s| spec.invert(s)).collect()
}
