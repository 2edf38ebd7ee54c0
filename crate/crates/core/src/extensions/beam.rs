use std::io::Write;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::phy::cn01;
use crate::rng::SimRng;

type CVec = Vec<Complex64>;

/// `a^H b`.
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// Removes the components of `v` along the orthonormal `basis` (two passes).
fn project_out(v: &mut [Complex64], basis: &[CVec]) {
    for _ in 0..2 {
        for b in basis {
            let c = inner(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Multi-antenna uplink: one length-N channel column per device.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamProblem {
    pub channels: Vec<CVec>,
    /// Devices served by the beam (columns of the weak-user matrix).
    pub weak_set: Vec<usize>,
    pub n0: f64,
}

impl BeamProblem {
    pub fn new(channels: Vec<CVec>, weak_set: Vec<usize>, n0: f64) -> Result<Self> {
        let n = channels.first().map(Vec::len).ok_or(Error::Empty("channel matrix"))?;
        if n == 0 {
            return Err(Error::Empty("antenna array"));
        }
        if let Some(bad) = channels.iter().find(|h| h.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        if weak_set.is_empty() {
            return Err(Error::Empty("weak set"));
        }
        if let Some(&bad) = weak_set.iter().find(|&&k| k >= channels.len()) {
            return Err(domain(format!("weak-set index {bad} out of range for {} devices", channels.len())));
        }
        if !(n0 > 0.0) {
            return Err(domain(format!("noise power must be positive, got {n0}")));
        }
        Ok(Self { channels, weak_set, n0 })
    }

    pub fn n_antennas(&self) -> usize {
        self.channels[0].len()
    }

    fn weak(&self) -> impl Iterator<Item = &CVec> {
        self.weak_set.iter().map(|&k| &self.channels[k])
    }

    /// `sum_k h_k (h_k^H v)` over the weak set.
    fn gram_apply(&self, v: &[Complex64]) -> CVec {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for h in self.weak() {
            let c = inner(h, v);
            out.iter_mut().zip(h).for_each(|(o, x)| *o += c * x);
        }
        out
    }
}

/// N x K matrix of i.i.d. CN(0, 1) entries, column per device.
pub fn random_channels(n_antennas: usize, k_devices: usize, rng: &mut SimRng) -> Vec<CVec> {
    (0..k_devices).map(|_| (0..n_antennas).map(|_| cn01(rng)).collect()).collect()
}

/// `Tr(F^H A F) / (n0 Tr(F^H F))` with `A` the weak-set Gram matrix.
pub fn aggregation_objective(problem: &BeamProblem, beams: &[CVec]) -> Result<f64> {
    let energy: f64 = beams.iter().map(|f| norm(f).powi(2)).sum();
    if !(energy > 0.0) {
        return Err(Error::Degenerate("zero beamformer".into()));
    }
    let captured: f64 = beams.iter().map(|f| problem.weak().map(|h| inner(f, h).norm_sqr()).sum::<f64>()).sum();
    Ok(captured / (problem.n0 * energy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationBeam {
    /// Orthonormal beam columns, strongest first.
    pub beams: Vec<CVec>,
    /// Matching eigenvalues of the weak-set Gram matrix.
    pub eigenvalues: Vec<f64>,
    /// Trace-averaged received SNR.
    pub objective: f64,
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 1_000_000;

/// Rank-`rank` maximiser of the aggregation SNR quotient via power iteration
/// with deflation on the weak-set Gram matrix.
pub fn aggregation_beamformer(problem: &BeamProblem, rank: usize) -> Result<AggregationBeam> {
    let n = problem.n_antennas();
    if rank == 0 || rank > n {
        return Err(domain(format!("beam rank must lie in 1..={n}, got {rank}")));
    }
    if problem.weak().all(|h| norm(h) == 0.0) {
        return Err(Error::Degenerate("all weak-set channels are zero".into()));
    }
    let mut beams: Vec<CVec> = Vec::with_capacity(rank);
    let mut eigenvalues = Vec::with_capacity(rank);
    let mut iterations = 0;
    for _ in 0..rank {
        // Start from the strongest remaining weak channel, then unit vectors.
        let starts = problem.weak().cloned().chain((0..n).map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        }));
        let mut v = starts
            .map(|mut s| {
                project_out(&mut s, &beams);
                s
            })
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .unwrap_or_default();
        let nv = norm(&v);
        if nv == 0.0 {
            return Err(Error::Degenerate("no direction left for deflation".into()));
        }
        scale(&mut v, 1.0 / nv);
        let mut lambda = 0.0;
        for it in 0..POWER_MAX_ITERS {
            let mut w = problem.gram_apply(&v);
            project_out(&mut w, &beams);
            let nw = norm(&w);
            iterations += 1;
            if nw == 0.0 {
                // Remaining spectrum is zero; any orthogonal direction is optimal.
                lambda = 0.0;
                break;
            }
            scale(&mut w, 1.0 / nw);
            let step: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            v = w;
            lambda = nw;
            if step < POWER_TOL {
                break;
            }
            if it + 1 == POWER_MAX_ITERS {
                log::warn!("power iteration stopped at {POWER_MAX_ITERS} iterations (step {step:e})");
            }
        }
        // Rayleigh quotient of the converged vector.
        if lambda > 0.0 {
            lambda = inner(&v, &problem.gram_apply(&v)).re;
        }
        beams.push(v);
        eigenvalues.push(lambda);
    }
    let objective = aggregation_objective(problem, &beams)?;
    Ok(AggregationBeam { beams, eigenvalues, objective, iterations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdmaBeam {
    pub device: usize,
    /// Unit-norm zero-forcing beam, or `None` when the channel lies in the
    /// span of the other users' channels.
    pub beam: Option<CVec>,
    /// `|f^H h_k|^2 / n0`.
    pub snr: f64,
    /// Largest `|f^H h_g|` over the other users.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SdmaOutcome {
    /// Fewer antennas than users: not enough spatial degrees of freedom.
    Infeasible { n_antennas: usize, k_users: usize },
    Beams(Vec<SdmaBeam>),
}

/// Relative size below which a projected channel counts as colinear.
const COLINEAR_TOL: f64 = 1e-9;

/// Per-user zero-forcing beams for the weak set.
pub fn sdma_beamformer(problem: &BeamProblem) -> SdmaOutcome {
    let n = problem.n_antennas();
    let k = problem.weak_set.len();
    if n < k {
        return SdmaOutcome::Infeasible { n_antennas: n, k_users: k };
    }
    let beams = problem
        .weak_set
        .iter()
        .map(|&dev| {
            let h = &problem.channels[dev];
            let mut basis: Vec<CVec> = Vec::new();
            for &g in problem.weak_set.iter().filter(|&&g| g != dev) {
                let mut b = problem.channels[g].clone();
                let scale_ref = norm(&b);
                project_out(&mut b, &basis);
                let nb = norm(&b);
                if nb > COLINEAR_TOL * scale_ref.max(f64::MIN_POSITIVE) {
                    scale(&mut b, 1.0 / nb);
                    basis.push(b);
                }
            }
            let mut f = h.clone();
            project_out(&mut f, &basis);
            let nf = norm(&f);
            if nf <= COLINEAR_TOL * norm(h) || nf == 0.0 {
                return SdmaBeam { device: dev, beam: None, snr: 0.0, max_residual: f64::NAN };
            }
            scale(&mut f, 1.0 / nf);
            let max_residual = problem
                .weak_set
                .iter()
                .filter(|&&g| g != dev)
                .map(|&g| inner(&f, &problem.channels[g]).norm())
                .fold(0.0, f64::max);
            let snr = inner(&f, h).norm_sqr() / problem.n0;
            SdmaBeam { device: dev, beam: Some(f), snr, max_residual }
        })
        .collect();
    SdmaOutcome::Beams(beams)
}

/// Far-field gain `|f^H a(theta)|^2` of a half-wavelength uniform linear
/// array over `n_angles` evenly spaced angles in `[-pi/2, pi/2]`.
pub fn beam_pattern(beam: &[Complex64], n_angles: usize) -> Result<Vec<(f64, f64)>> {
    if n_angles < 2 {
        return Err(domain("beam pattern needs at least two angles"));
    }
    let pi = std::f64::consts::PI;
    Ok((0..n_angles)
        .map(|i| {
            let theta = -pi / 2.0 + pi * i as f64 / (n_angles - 1) as f64;
            let steer: CVec = (0..beam.len()).map(|n| Complex64::from_polar(1.0, pi * n as f64 * theta.sin())).collect();
            (theta, inner(beam, &steer).norm_sqr())
        })
        .collect())
}

/// Writes [`beam_pattern`] as `angle_rad,gain` rows.
pub fn write_beam_pattern<W: Write>(beam: &[Complex64], n_angles: usize, mut out: W) -> Result<()> {
    let rows = beam_pattern(beam, n_angles)?;
    writeln!(out, "angle_rad,gain")?;
    for (theta, gain) in rows {
        writeln!(out, "{theta},{gain}")?;
    }
    Ok(())
}
