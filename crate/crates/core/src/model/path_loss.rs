use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_depth, AnatomicalContext, FrequencyBand, ModelError, ShadowingProfile};
use super::{DEPTH_RANGE_MM, REFERENCE_DEPTH_MM};

/// Intercept and decay rate of the linear-in-depth path-loss model for one
/// (band, anatomical context) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pl0_db: f64,
    m_db: f64,
    band: FrequencyBand,
    context: AnatomicalContext,
}

impl PathLossParams {
    pub fn new(
        pl0_db: f64,
        m_db: f64,
        band: FrequencyBand,
        context: AnatomicalContext,
    ) -> Result<Self, ModelError> {
        if !pl0_db.is_finite() {
            return Err(ModelError::InvalidParameter(format!("PL0 must be finite, got {pl0_db}")));
        }
        if !(m_db > 0.0 && m_db.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "decay rate m must be finite and positive, got {m_db}"
            )));
        }
        Ok(Self { pl0_db, m_db, band, context })
    }

    pub fn pl0_db(&self) -> f64 {
        self.pl0_db
    }

    pub fn m_db(&self) -> f64 {
        self.m_db
    }

    pub fn band(&self) -> FrequencyBand {
        self.band
    }

    pub fn context(&self) -> AnatomicalContext {
        self.context
    }

    pub fn reference_depth_mm(&self) -> f64 {
        REFERENCE_DEPTH_MM
    }

    pub fn depth_range_mm(&self) -> (f64, f64) {
        DEPTH_RANGE_MM
    }
}

/// Mean path loss in dB at `depth_mm` (shadowing term set to zero).
pub fn mean_path_loss(params: &PathLossParams, depth_mm: f64) -> Result<f64, ModelError> {
    check_depth(depth_mm)?;
    Ok(params.pl0_db + params.m_db * (depth_mm / REFERENCE_DEPTH_MM))
}

/// One realization of the path loss: the mean plus a zero-mean Gaussian
/// shadowing draw whose variance is read from `profile` at `depth_mm`.
///
/// Exactly one standard-normal variate is consumed from `rng` per call, even
/// when the variance is zero, so streams stay aligned across profiles.
pub fn sample_path_loss<R: Rng + ?Sized>(
    params: &PathLossParams,
    profile: &ShadowingProfile,
    depth_mm: f64,
    rng: &mut R,
) -> Result<f64, ModelError> {
    let mean = mean_path_loss(params, depth_mm)?;
    let variance = profile.variance_at(depth_mm)?;
    let z: f64 = rng.sample(StandardNormal);
    if variance == 0.0 {
        return Ok(mean);
    }
    Ok(mean + variance.sqrt() * z)
}
