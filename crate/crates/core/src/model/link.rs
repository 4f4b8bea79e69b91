use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    mean_path_loss, sample_path_loss, FrequencyBand, ModelError, PathLossParams, ShadowingProfile,
};
use crate::units::power_to_db;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaParams {
    /// Linear (not dBi) gain.
    pub gain_linear: f64,
    /// |S11| for the transmitter, |S22| for the receiver.
    pub reflection_coeff_mag: f64,
}

impl AntennaParams {
    pub fn new(gain_linear: f64, reflection_coeff_mag: f64) -> Result<Self, ModelError> {
        if !(gain_linear >= 0.0 && gain_linear.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "antenna gain must be finite and >= 0, got {gain_linear}"
            )));
        }
        if !(0.0..=1.0).contains(&reflection_coeff_mag) {
            return Err(ModelError::InvalidParameter(format!(
                "reflection coefficient magnitude must be in [0, 1], got {reflection_coeff_mag}"
            )));
        }
        Ok(Self { gain_linear, reflection_coeff_mag })
    }

    /// Unity gain, perfectly matched.
    pub fn ideal() -> Self {
        Self { gain_linear: 1.0, reflection_coeff_mag: 0.0 }
    }

    fn effective_gain(&self) -> f64 {
        self.gain_linear * (1.0 - self.reflection_coeff_mag * self.reflection_coeff_mag)
    }
}

/// Free-space received power (W) with mismatch loss on both antennas:
/// `Pt·Gt·(1−|S11|²)·Gr·(1−|S22|²)·(λ/4πR)²`.
pub fn friis_received_power(
    pt_w: f64,
    tx: &AntennaParams,
    rx: &AntennaParams,
    wavelength_m: f64,
    distance_m: f64,
) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::NonPositiveDistance(distance_m));
    }
    if !(pt_w >= 0.0) {
        return Err(ModelError::InvalidParameter(format!("transmit power must be >= 0 W, got {pt_w}")));
    }
    let spreading = wavelength_m / (4.0 * PI * distance_m);
    Ok(pt_w * tx.effective_gain() * rx.effective_gain() * spreading * spreading)
}

/// Loss of the external free-space segment in dB, i.e. −10·log10 of the
/// Friis gain factor without the transmit power. A zero distance means the
/// off-body node sits on the body surface and the segment contributes 0 dB.
pub fn external_path_loss_db(
    band: FrequencyBand,
    tx: &AntennaParams,
    rx: &AntennaParams,
    distance_m: f64,
) -> Result<f64, ModelError> {
    if distance_m == 0.0 {
        return Ok(0.0);
    }
    let gain = friis_received_power(1.0, tx, rx, band.wavelength_m(), distance_m)?;
    Ok(-power_to_db(gain))
}

/// Inputs of a two-segment (in-body, then free space) link budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetRequest {
    pub depth_mm: f64,
    pub external_distance_m: f64,
    pub band: FrequencyBand,
    pub pt_dbm: f64,
    pub tx: AntennaParams,
    pub rx: AntennaParams,
    pub sensitivity_dbm: f64,
    pub use_shadowing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetResult {
    pub in_body_pl_db: f64,
    pub external_pl_db: f64,
    pub total_pl_db: f64,
    pub rx_power_dbm: f64,
    pub margin_db: f64,
    /// σ of the shadowing draw; zero when shadowing is disabled.
    pub shadowing_sigma_db: f64,
}

pub fn concatenated_link_budget<R: Rng + ?Sized>(
    params: &PathLossParams,
    profile: &ShadowingProfile,
    req: &LinkBudgetRequest,
    rng: &mut R,
) -> Result<LinkBudgetResult, ModelError> {
    if !(req.external_distance_m >= 0.0) {
        return Err(ModelError::NonPositiveDistance(req.external_distance_m));
    }
    let (in_body_pl_db, shadowing_sigma_db) = if req.use_shadowing {
        (
            sample_path_loss(params, profile, req.depth_mm, rng)?,
            profile.sigma_at(req.depth_mm)?,
        )
    } else {
        (mean_path_loss(params, req.depth_mm)?, 0.0)
    };
    let external_pl_db = external_path_loss_db(req.band, &req.tx, &req.rx, req.external_distance_m)?;
    let total_pl_db = in_body_pl_db + external_pl_db;
    let rx_power_dbm = req.pt_dbm - total_pl_db;
    Ok(LinkBudgetResult {
        in_body_pl_db,
        external_pl_db,
        total_pl_db,
        rx_power_dbm,
        margin_db: rx_power_dbm - req.sensitivity_dbm,
        shadowing_sigma_db,
    })
}

/// Q(x) = P(Z > x) for a standard normal Z.
pub fn standard_normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// P(PL > max_pl_db) under Gaussian shadowing at `depth_mm`. With zero
/// shadowing variance this degenerates to a step at the mean.
pub fn outage_probability(
    params: &PathLossParams,
    profile: &ShadowingProfile,
    depth_mm: f64,
    max_pl_db: f64,
) -> Result<f64, ModelError> {
    let mean = mean_path_loss(params, depth_mm)?;
    let sigma = profile.sigma_at(depth_mm)?;
    if sigma == 0.0 {
        return Ok(if mean > max_pl_db { 1.0 } else { 0.0 });
    }
    Ok(standard_normal_tail((max_pl_db - mean) / sigma))
}

/// Transmit power (dBm) needed to close the link with `margin_db` to spare.
pub fn required_tx_power(total_pl_db: f64, sensitivity_dbm: f64, margin_db: f64) -> f64 {
    sensitivity_dbm + total_pl_db + margin_db
}
