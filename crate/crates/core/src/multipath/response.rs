use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MultipathError;
use crate::units::magnitude_to_db;

/// Complex S21 sampled on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    f_start_hz: f64,
    f_step_hz: f64,
    samples: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(f_start_hz: f64, f_step_hz: f64, samples: Vec<Complex64>) -> Result<Self, MultipathError> {
        if !(f_step_hz > 0.0 && f_step_hz.is_finite()) {
            return Err(MultipathError::InvalidStep(f_step_hz));
        }
        match samples.len() {
            0 => Err(MultipathError::EmptyResponse),
            1 => Err(MultipathError::TooFewSamples(1)),
            _ => Ok(Self { f_start_hz, f_step_hz, samples }),
        }
    }

    pub fn f_start_hz(&self) -> f64 {
        self.f_start_hz
    }

    pub fn f_step_hz(&self) -> f64 {
        self.f_step_hz
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.f_start_hz + index as f64 * self.f_step_hz
    }

    pub fn f_stop_hz(&self) -> f64 {
        self.frequency(self.samples.len() - 1)
    }

    pub fn span_hz(&self) -> f64 {
        self.f_stop_hz() - self.f_start_hz
    }
}

/// Band-average path loss in dB: the negated mean of 20·log10|S21| over
/// all frequency points (averaging is done in the dB domain).
pub fn path_loss_from_s21(fr: &FrequencyResponse) -> Result<f64, MultipathError> {
    if fr.samples.is_empty() {
        return Err(MultipathError::EmptyResponse);
    }
    let mut acc = 0.0;
    for (index, s) in fr.samples.iter().enumerate() {
        let mag = s.norm();
        if mag == 0.0 {
            return Err(MultipathError::ZeroMagnitudeSample { index });
        }
        acc += magnitude_to_db(mag);
    }
    Ok(-acc / fr.samples.len() as f64)
}

/// Evaluates `S21(f) = Σ gᵢ·exp(−j2πf·τᵢ)` for discrete paths `(τᵢ, gᵢ)`
/// on the grid `f_start + k·f_step`, `k < n_points`.
pub fn synthesize_frequency_response(
    taps: &[(f64, Complex64)],
    f_start_hz: f64,
    f_step_hz: f64,
    n_points: usize,
) -> Result<FrequencyResponse, MultipathError> {
    if n_points < 2 {
        return Err(MultipathError::TooFewSamples(n_points));
    }
    let samples = (0..n_points)
        .map(|k| {
            let f = f_start_hz + k as f64 * f_step_hz;
            taps.iter()
                .map(|&(tau, g)| g * Complex64::from_polar(1.0, -2.0 * PI * f * tau))
                .sum()
        })
        .collect();
    FrequencyResponse::new(f_start_hz, f_step_hz, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(mag: f64, n: usize) -> FrequencyResponse {
        FrequencyResponse::new(905e6, 1e5, vec![Complex64::new(mag, 0.0); n]).unwrap()
    }

    #[test]
    fn constructor_checks() {
        assert_eq!(FrequencyResponse::new(0.0, 1.0, vec![]), Err(MultipathError::EmptyResponse));
        assert_eq!(
            FrequencyResponse::new(0.0, 1.0, vec![Complex64::new(1.0, 0.0)]),
            Err(MultipathError::TooFewSamples(1))
        );
        assert!(FrequencyResponse::new(0.0, 0.0, vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn band_average_loss() {
        assert!((path_loss_from_s21(&constant(0.1, 11)).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(path_loss_from_s21(&constant(1.0, 11)).unwrap(), 0.0);
        let two = FrequencyResponse::new(
            0.0,
            1.0,
            vec![Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.001)],
        )
        .unwrap();
        assert!((path_loss_from_s21(&two).unwrap() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn zero_magnitude_rejected() {
        let fr = FrequencyResponse::new(0.0, 1.0, vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)])
            .unwrap();
        assert_eq!(path_loss_from_s21(&fr), Err(MultipathError::ZeroMagnitudeSample { index: 1 }));
    }

    #[test]
    fn synthesized_single_tap() {
        let flat = synthesize_frequency_response(&[(0.0, Complex64::new(1.0, 0.0))], 905e6, 1e5, 16).unwrap();
        assert!(flat.samples().iter().all(|s| (s - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let tau = 25e-9;
        let fr = synthesize_frequency_response(&[(tau, Complex64::new(1.0, 0.0))], 905e6, 1e5, 16).unwrap();
        for k in 0..fr.len() {
            let s = fr.samples()[k];
            assert!((s.norm() - 1.0).abs() < 1e-12);
            // phase slope: arg(S(k+1)/S(k)) = −2π·Δf·τ
            if k + 1 < fr.len() {
                let step = (fr.samples()[k + 1] / s).arg();
                assert!((step + 2.0 * PI * 1e5 * tau).abs() < 1e-9);
            }
        }
    }
}
