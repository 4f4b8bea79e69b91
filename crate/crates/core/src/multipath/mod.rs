//! Frequency response → impulse response → power delay profile, and the
//! time-dispersion statistics derived from it.

mod idft;
mod pdp;
mod response;

pub use idft::{impulse_response, ImpulseResponse, Window};
pub use pdp::{
    classify_channel, coherence_bandwidth, mean_excess_delay, multipath_stats, power_delay_profile,
    rms_delay_spread, ChannelClass, MultipathStats, PowerDelayProfile,
};
pub use response::{path_loss_from_s21, synthesize_frequency_response, FrequencyResponse};

use thiserror::Error;

/// Default gating threshold below the strongest tap.
pub const DEFAULT_NOISE_FLOOR_DB: f64 = 30.0;
/// Default zero-padding factor of the inverse transform.
pub const DEFAULT_ZERO_PAD_FACTOR: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultipathError {
    #[error("frequency response has no samples")]
    EmptyResponse,
    #[error("frequency response needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("frequency step must be positive and finite, got {0} Hz")]
    InvalidStep(f64),
    #[error("|S21| is zero at sample {index}; band-average in dB is undefined")]
    ZeroMagnitudeSample { index: usize },
    #[error("zero-pad factor must be >= 1")]
    InvalidPadFactor,
    #[error("noise floor threshold must be positive, got {0} dB")]
    InvalidThreshold(f64),
    #[error("no taps above the noise floor")]
    AllTapsBelowFloor,
    #[error("total power of the profile is zero")]
    ZeroTotalPower,
    #[error("delay spread must be positive, got {0} s")]
    NonPositiveDelaySpread(f64),
    #[error("invalid power delay profile: {0}")]
    InvalidProfile(String),
}
