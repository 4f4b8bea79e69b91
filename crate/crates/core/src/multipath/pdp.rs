use serde::{Deserialize, Serialize};

use super::{ImpulseResponse, MultipathError};
use crate::units::db_to_power;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Received power versus excess delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    entries: Vec<(f64, f64)>,
    normalized: bool,
}

impl PowerDelayProfile {
    /// Validates `(delay_s, power_linear)` entries. When `normalized` is set
    /// the powers must already sum to 1.
    pub fn new(entries: Vec<(f64, f64)>, normalized: bool) -> Result<Self, MultipathError> {
        if entries.is_empty() {
            return Err(MultipathError::InvalidProfile("profile has no entries".into()));
        }
        for (i, &(delay, power)) in entries.iter().enumerate() {
            if !(delay >= 0.0 && delay.is_finite()) {
                return Err(MultipathError::InvalidProfile(format!("delay {delay} s at entry {i}")));
            }
            if !(power >= 0.0 && power.is_finite()) {
                return Err(MultipathError::InvalidProfile(format!("power {power} at entry {i}")));
            }
            if i > 0 && delay <= entries[i - 1].0 {
                return Err(MultipathError::InvalidProfile(
                    "delays must be strictly increasing".into(),
                ));
            }
        }
        if normalized {
            let total: f64 = entries.iter().map(|e| e.1).sum();
            if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(MultipathError::InvalidProfile(format!(
                    "normalized profile sums to {total}"
                )));
            }
        }
        Ok(Self { entries, normalized })
    }

    /// Builds a profile from raw powers, scaling them to unit total.
    pub fn normalize(entries: Vec<(f64, f64)>) -> Result<Self, MultipathError> {
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if !(total > 0.0) {
            return Err(MultipathError::ZeroTotalPower);
        }
        let scaled = entries.into_iter().map(|(d, p)| (d, p / total)).collect();
        let mut pdp = Self::new(scaled, false)?;
        pdp.normalized = true;
        Ok(pdp)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_power(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// |h|² gated at `noise_floor_db_below_peak` under the strongest tap and
/// normalized to unit power.
///
/// The delay axis of a DFT-derived response is circular, so energy leaking
/// ahead of the first arrival shows up at the end of the period. Retained taps
/// are therefore re-referenced to the tap that follows the longest run of
/// gated-out bins (for a causal response this is simply the first retained
/// tap), and that tap is placed at zero delay.
pub fn power_delay_profile(
    ir: &ImpulseResponse,
    noise_floor_db_below_peak: f64,
) -> Result<PowerDelayProfile, MultipathError> {
    if !(noise_floor_db_below_peak > 0.0) {
        return Err(MultipathError::InvalidThreshold(noise_floor_db_below_peak));
    }
    let powers: Vec<f64> = ir.taps().iter().map(|h| h.norm_sqr()).collect();
    let m = powers.len();
    if m == 0 {
        return Err(MultipathError::AllTapsBelowFloor);
    }
    let peak = powers.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(MultipathError::ZeroTotalPower);
    }
    let floor = peak * db_to_power(-noise_floor_db_below_peak);
    let kept: Vec<usize> = (0..m).filter(|&i| powers[i] >= floor).collect();
    if kept.is_empty() {
        return Err(MultipathError::AllTapsBelowFloor);
    }

    // gap before kept[j] (circular), choose the widest; ties keep the earliest
    let mut start = kept[0];
    let mut widest = kept[0] + m - kept[kept.len() - 1];
    for w in kept.windows(2) {
        let gap = w[1] - w[0];
        if gap > widest {
            widest = gap;
            start = w[1];
        }
    }

    let mut entries: Vec<(usize, f64)> = kept.iter().map(|&i| ((i + m - start) % m, powers[i])).collect();
    entries.sort_by_key(|e| e.0);
    let t = ir.t_step_s();
    PowerDelayProfile::normalize(entries.into_iter().map(|(n, p)| (n as f64 * t, p)).collect())
}

fn total(pdp: &PowerDelayProfile) -> Result<f64, MultipathError> {
    let total = pdp.total_power();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(MultipathError::ZeroTotalPower)
    }
}

/// Power-weighted mean delay, Στ·P / ΣP.
pub fn mean_excess_delay(pdp: &PowerDelayProfile) -> Result<f64, MultipathError> {
    let total = total(pdp)?;
    Ok(pdp.entries.iter().map(|&(d, p)| d * p).sum::<f64>() / total)
}

/// Power-weighted standard deviation of delay.
///
/// Evaluated as the central second moment, which equals the raw second moment
/// minus the squared mean but cannot go negative through cancellation.
pub fn rms_delay_spread(pdp: &PowerDelayProfile) -> Result<f64, MultipathError> {
    let total = total(pdp)?;
    let mean = mean_excess_delay(pdp)?;
    let var = pdp
        .entries
        .iter()
        .map(|&(d, p)| {
            let e = d - mean;
            e * e * p
        })
        .sum::<f64>()
        / total;
    Ok(var.max(0.0).sqrt())
}

/// 90%-correlation coherence bandwidth, 1/(50·σ_τ).
pub fn coherence_bandwidth(sigma_tau_s: f64) -> Result<f64, MultipathError> {
    if !(sigma_tau_s > 0.0 && sigma_tau_s.is_finite()) {
        return Err(MultipathError::NonPositiveDelaySpread(sigma_tau_s));
    }
    Ok(1.0 / (50.0 * sigma_tau_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelClass {
    Flat,
    FrequencySelective,
}

/// Flat iff the signal bandwidth is strictly below the coherence bandwidth.
pub fn classify_channel(signal_bw_hz: f64, bc_hz: f64) -> ChannelClass {
    if signal_bw_hz < bc_hz {
        ChannelClass::Flat
    } else {
        ChannelClass::FrequencySelective
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipathStats {
    pub mean_excess_delay_s: f64,
    pub rms_delay_spread_s: f64,
    /// `None` when the profile has no dispersion (σ_τ = 0).
    pub coherence_bw_hz: Option<f64>,
}

pub fn multipath_stats(pdp: &PowerDelayProfile) -> Result<MultipathStats, MultipathError> {
    let rms = rms_delay_spread(pdp)?;
    Ok(MultipathStats {
        mean_excess_delay_s: mean_excess_delay(pdp)?,
        rms_delay_spread_s: rms,
        coherence_bw_hz: if rms > 0.0 { Some(coherence_bandwidth(rms)?) } else { None },
    })
}
