use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Mnist,
    Synthetic,
}

/// Row-major feature matrix with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub dim: usize,
    pub classes: usize,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(features: Vec<f64>, labels: Vec<usize>, dim: usize, classes: usize, provenance: Provenance) -> Result<Self> {
        if dim == 0 || classes < 2 {
            return Err(domain(format!("need dim >= 1 and classes >= 2, got {dim} and {classes}")));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch { expected: labels.len() * dim, got: features.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(domain(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(Self { features, labels, dim, classes, provenance })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub dims: Vec<usize>,
    /// Byte offset of the first payload byte.
    pub payload_offset: usize,
}

const IDX_IMAGES: u32 = 0x0000_0803;
const IDX_LABELS: u32 = 0x0000_0801;

fn parse_err(path: &Path, offset: usize, reason: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), offset: offset as u64, reason: reason.into() }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| parse_err(path, offset, "truncated header"))
}

/// Parses a big-endian IDX header (unsigned-byte payloads only).
pub fn parse_idx_header(bytes: &[u8], path: &Path) -> Result<IdxHeader> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != IDX_IMAGES && magic != IDX_LABELS {
        return Err(parse_err(path, 0, format!("unexpected magic number {magic:#010x}")));
    }
    let ndim = (magic & 0xff) as usize;
    let dims = (0..ndim)
        .map(|d| be_u32(bytes, 4 + 4 * d, path).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdxHeader { magic, dims, payload_offset: 4 + 4 * ndim })
}

fn read_payload(path: &Path, magic: u32) -> Result<(IdxHeader, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let header = parse_idx_header(&bytes, path)?;
    if header.magic != magic {
        return Err(parse_err(path, 0, format!("expected magic {magic:#010x}, found {:#010x}", header.magic)));
    }
    let expected: usize = header.dims.iter().product();
    let available = bytes.len() - header.payload_offset;
    if available < expected {
        return Err(parse_err(
            path,
            bytes.len(),
            format!("payload truncated: header promises {expected} bytes, file has {available}"),
        ));
    }
    let payload = bytes[header.payload_offset..header.payload_offset + expected].to_vec();
    Ok((header, payload))
}

/// Reads an IDX image file; pixels are scaled to `[0, 1]`.
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, usize, Vec<f64>)> {
    let (header, payload) = read_payload(path, IDX_IMAGES)?;
    let (n, rows, cols) = (header.dims[0], header.dims[1], header.dims[2]);
    Ok((n, rows, cols, payload.into_iter().map(|p| p as f64 / 255.0).collect()))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<usize>> {
    let (_, payload) = read_payload(path, IDX_LABELS)?;
    Ok(payload.into_iter().map(usize::from).collect())
}

/// Loads an image/label pair of IDX files as a 10-class dataset.
pub fn load_mnist_idx(images: &Path, labels: &Path) -> Result<LabeledDataset> {
    let (n, rows, cols, features) = read_idx_images(images)?;
    let labels_v = read_idx_labels(labels)?;
    if labels_v.len() != n {
        return Err(parse_err(labels, 4, format!("{} labels for {n} images", labels_v.len())));
    }
    if let Some(pos) = labels_v.iter().position(|&y| y > 9) {
        return Err(parse_err(labels, 8 + pos, format!("label {} out of range", labels_v[pos])));
    }
    LabeledDataset::new(features, labels_v, rows * cols, 10, Provenance::Mnist)
}

/// Isotropic unit-variance Gaussian classes whose means sit pairwise
/// `separation` standard deviations apart along distinct axes.
pub fn synth_gaussian_mixture(classes: usize, dim: usize, n: usize, separation: f64, seed: u64) -> Result<LabeledDataset> {
    if classes < 2 || dim < classes {
        return Err(domain(format!("need 2 <= classes <= dim, got {classes} classes in dim {dim}")));
    }
    if !(separation >= 0.0) {
        return Err(domain(format!("separation must be non-negative, got {separation}")));
    }
    let mut rng = rng::stream(seed, "synthetic-data", 0);
    let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    labels.shuffle(&mut rng);
    let offset = separation / std::f64::consts::SQRT_2;
    let mut features = Vec::with_capacity(n * dim);
    for &y in &labels {
        for j in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(z + if j == y { offset } else { 0.0 });
        }
    }
    LabeledDataset::new(features, labels, dim, classes, Provenance::Synthetic)
}

/// Indices of the samples held by one device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub indices: Vec<usize>,
}

impl Shard {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionMode {
    Iid,
    /// Sort by label, cut into equal shards, deal shards at random.
    NonIidShards,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub mode: PartitionMode,
    pub shards_total: usize,
    pub shard_size: usize,
    pub shards_per_device: usize,
}

impl PartitionSpec {
    pub fn samples_per_device(&self) -> usize {
        self.shard_size * self.shards_per_device
    }
}

/// Splits the dataset into `k_devices` equal, disjoint shards.
pub fn partition(data: &LabeledDataset, spec: &PartitionSpec, k_devices: usize, rng: &mut SimRng) -> Result<Vec<Shard>> {
    if k_devices == 0 || spec.shard_size == 0 || spec.shards_per_device == 0 {
        return Err(domain("partition needs positive device count, shard size and shards per device"));
    }
    if spec.shards_total != k_devices * spec.shards_per_device {
        return Err(domain(format!(
            "{} shards cannot be dealt {} per device to {k_devices} devices",
            spec.shards_total, spec.shards_per_device
        )));
    }
    let used = spec.shards_total * spec.shard_size;
    if used > data.n() {
        return Err(domain(format!("partition needs {used} samples, dataset has {}", data.n())));
    }
    let mut perm: Vec<usize> = (0..data.n()).collect();
    perm.shuffle(rng);
    perm.truncate(used);
    let per_device = spec.samples_per_device();
    let shards = match spec.mode {
        PartitionMode::Iid => perm.chunks(per_device).map(|c| Shard { indices: c.to_vec() }).collect(),
        PartitionMode::NonIidShards => {
            // Stable sort keeps the random order within each class.
            perm.sort_by_key(|&i| data.labels[i]);
            let mut order: Vec<usize> = (0..spec.shards_total).collect();
            order.shuffle(rng);
            order
                .chunks(spec.shards_per_device)
                .map(|ids| Shard {
                    indices: ids.iter().flat_map(|&s| perm[s * spec.shard_size..(s + 1) * spec.shard_size].iter().copied()).collect(),
                })
                .collect()
        }
    };
    Ok(shards)
}
