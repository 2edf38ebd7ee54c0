use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rng::SimRng;

/// Small-scale fading of K devices over M sub-channels for one OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub k_devices: usize,
    pub m: usize,
    /// Row-major `K x M`, each entry CN(0, 1).
    pub gains: Vec<Complex64>,
}

impl ChannelDraw {
    pub fn get(&self, device: usize, sub: usize) -> Complex64 {
        self.gains[device * self.m + sub]
    }

    pub fn device(&self, device: usize) -> &[Complex64] {
        &self.gains[device * self.m..(device + 1) * self.m]
    }
}

pub fn cn01(rng: &mut SimRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_channel(k_devices: usize, m: usize, rng: &mut SimRng) -> ChannelDraw {
    ChannelDraw {
        k_devices,
        m,
        gains: (0..k_devices * m).map(|_| cn01(rng)).collect(),
    }
}

/// One independent draw per OFDM symbol.
pub fn draw_channels(k_devices: usize, m: usize, n_symbols: usize, rng: &mut SimRng) -> Vec<ChannelDraw> {
    (0..n_symbols).map(|_| draw_channel(k_devices, m, rng)).collect()
}
