//! Per-round physical layer: Rayleigh channels, truncated channel inversion,
//! over-the-air analog aggregation and the quantised OFDMA baseline.

mod baa;
mod channel;
mod digital;
mod normalize;

pub use baa::{align_rho0, baa_round, BaaDiagnostics, BaaOptions, BaaOutcome, Fading, PowerPolicy, Receiver, UpdateVector};
pub use channel::{cn01, draw_channel, draw_channels, ChannelDraw};
pub use digital::{digital_round, quantize, DigitalOptions, DigitalOutcome, Quantized};
pub use normalize::{denormalize, normalize_updates, NormalizationSpec};
