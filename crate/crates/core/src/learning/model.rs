use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::data::{LabeledDataset, Shard};
use crate::error::{domain, Error, Result};
use crate::rng::SimRng;

/// Flat parameter vector of dimension q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub weights: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(q: usize) -> Self {
        Self { weights: vec![0.0; q] }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }
}

/// Multinomial logistic regression: a `C x d` weight matrix (row-major) followed by C biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftmaxRegression {
    pub dim: usize,
    pub classes: usize,
}

impl SoftmaxRegression {
    pub fn for_dataset(data: &LabeledDataset) -> Self {
        Self { dim: data.dim, classes: data.classes }
    }

    pub fn q(&self) -> usize {
        self.classes * (self.dim + 1)
    }

    fn check(&self, model: &ModelParams) -> Result<()> {
        if model.dim() != self.q() {
            return Err(Error::DimensionMismatch { expected: self.q(), got: model.dim() });
        }
        Ok(())
    }

    fn logits(&self, w: &[f64], x: &[f64], out: &mut [f64]) {
        let bias = &w[self.classes * self.dim..];
        for (c, o) in out.iter_mut().enumerate() {
            let row = &w[c * self.dim..(c + 1) * self.dim];
            *o = bias[c] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Softmax probabilities in place; returns log-sum-exp.
    fn softmax(z: &mut [f64]) -> f64 {
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|v| (v - max).exp()).sum();
        let lse = max + sum.ln();
        z.iter_mut().for_each(|v| *v = (*v - lse).exp());
        lse
    }

    /// Mean cross-entropy over `indices`.
    pub fn loss(&self, model: &ModelParams, data: &LabeledDataset, indices: &[usize]) -> Result<f64> {
        self.check(model)?;
        if indices.is_empty() {
            return Err(Error::Empty("shard"));
        }
        let mut z = vec![0.0; self.classes];
        let total: f64 = indices
            .iter()
            .map(|&i| {
                self.logits(&model.weights, data.row(i), &mut z);
                let y = data.labels[i];
                let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
                lse - z[y]
            })
            .sum();
        Ok(total / indices.len() as f64)
    }

    /// Gradient of [`Self::loss`].
    pub fn gradient(&self, model: &ModelParams, data: &LabeledDataset, indices: &[usize]) -> Result<Vec<f64>> {
        self.check(model)?;
        if indices.is_empty() {
            return Err(Error::Empty("shard"));
        }
        let mut grad = vec![0.0; self.q()];
        let mut z = vec![0.0; self.classes];
        let bias_off = self.classes * self.dim;
        for &i in indices {
            let x = data.row(i);
            self.logits(&model.weights, x, &mut z);
            Self::softmax(&mut z);
            z[data.labels[i]] -= 1.0;
            for (c, &err) in z.iter().enumerate() {
                let row = &mut grad[c * self.dim..(c + 1) * self.dim];
                row.iter_mut().zip(x).for_each(|(g, xv)| *g += err * xv);
                grad[bias_off + c] += err;
            }
        }
        let n = indices.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        Ok(grad)
    }

    pub fn predict(&self, model: &ModelParams, x: &[f64]) -> usize {
        let mut z = vec![0.0; self.classes];
        self.logits(&model.weights, x, &mut z);
        z.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (c, &v)| if v > best.1 { (c, v) } else { best })
            .0
    }

    pub fn accuracy(&self, model: &ModelParams, data: &LabeledDataset) -> f64 {
        let hits = (0..data.n()).filter(|&i| self.predict(model, data.row(i)) == data.labels[i]).count();
        hits as f64 / data.n().max(1) as f64
    }
}

pub fn local_loss(arch: &SoftmaxRegression, model: &ModelParams, data: &LabeledDataset, shard: &Shard) -> Result<f64> {
    arch.loss(model, data, &shard.indices)
}

/// Mean of the per-device losses; equal to the pooled loss because shards are equal-sized.
pub fn global_loss(arch: &SoftmaxRegression, model: &ModelParams, data: &LabeledDataset, shards: &[Shard]) -> Result<f64> {
    if shards.is_empty() {
        return Err(Error::Empty("shard list"));
    }
    let total = shards.iter().map(|s| local_loss(arch, model, data, s)).sum::<Result<f64>>()?;
    Ok(total / shards.len() as f64)
}

/// `tau` minibatch SGD steps from the broadcast model.
#[allow(clippy::too_many_arguments)]
pub fn local_sgd(
    arch: &SoftmaxRegression,
    model: &ModelParams,
    data: &LabeledDataset,
    shard: &Shard,
    eta: f64,
    tau: usize,
    batch_size: usize,
    rng: &mut SimRng,
) -> Result<ModelParams> {
    if !(eta >= 0.0) {
        return Err(domain(format!("step size must be non-negative, got {eta}")));
    }
    let mut w = model.clone();
    let n = shard.len();
    for _ in 0..tau {
        let grad = if batch_size >= n {
            arch.gradient(&w, data, &shard.indices)?
        } else {
            let batch: Vec<usize> = index::sample(rng, n, batch_size.max(1)).into_iter().map(|j| shard.indices[j]).collect();
            arch.gradient(&w, data, &batch)?
        };
        w.weights.iter_mut().zip(&grad).for_each(|(wi, g)| *wi -= eta * g);
    }
    Ok(w)
}

/// Coordinate-wise mean of the local models.
pub fn global_average(models: &[ModelParams]) -> Result<ModelParams> {
    let first = models.first().ok_or(Error::Empty("model list"))?;
    let q = first.dim();
    let mut acc = vec![0.0; q];
    for m in models {
        if m.dim() != q {
            return Err(Error::DimensionMismatch { expected: q, got: m.dim() });
        }
        acc.iter_mut().zip(&m.weights).for_each(|(a, w)| *a += w);
    }
    let k = models.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    Ok(ModelParams { weights: acc })
}
