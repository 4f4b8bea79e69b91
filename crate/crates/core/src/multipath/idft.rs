use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{FrequencyResponse, MultipathError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rect" | "rectangular" | "none" => Ok(Window::Rectangular),
            "hann" | "hanning" => Ok(Window::Hann),
            _ => Err(format!("unknown window '{s}' (expected rectangular or hann)")),
        }
    }
}

impl Window {
    fn coefficient(self, k: usize, n: usize) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos(),
        }
    }
}

/// Channel impulse response on a uniform delay grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    t_step_s: f64,
    taps: Vec<Complex64>,
}

impl ImpulseResponse {
    pub fn new(t_step_s: f64, taps: Vec<Complex64>) -> Self {
        Self { t_step_s, taps }
    }

    pub fn t_step_s(&self) -> f64 {
        self.t_step_s
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    /// Σ|h|².
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(Complex64::norm_sqr).sum()
    }
}

/// Windowed, zero-padded inverse DFT of the sweep.
///
/// With N measured points padded to M = N·pad, taps are scaled by
/// 1/√(N·M), so for the rectangular window `Σ|h|² = Σ|S21|²/N` regardless of
/// padding. Tap n sits at delay n/(M·Δf); the delay axis is periodic with
/// period 1/Δf.
pub fn impulse_response(
    fr: &FrequencyResponse,
    window: Window,
    zero_pad_factor: usize,
) -> Result<ImpulseResponse, MultipathError> {
    if zero_pad_factor == 0 {
        return Err(MultipathError::InvalidPadFactor);
    }
    let n = fr.len();
    if n == 0 {
        return Err(MultipathError::EmptyResponse);
    }
    let m = n * zero_pad_factor;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (k, (slot, s)) in buf.iter_mut().zip(fr.samples()).enumerate() {
        *slot = s * window.coefficient(k, n);
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / ((n * m) as f64).sqrt();
    for h in &mut buf {
        *h *= scale;
    }
    Ok(ImpulseResponse { t_step_s: 1.0 / (m as f64 * fr.f_step_hz()), taps: buf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipath::synthesize_frequency_response;

    /// Direct O(N·M) inverse DFT with the same scaling.
    fn naive_idft(samples: &[Complex64], m: usize) -> Vec<Complex64> {
        let n = samples.len();
        let scale = 1.0 / ((n * m) as f64).sqrt();
        (0..m)
            .map(|t| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(k, s)| s * Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / m as f64))
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }

    #[test]
    fn flat_spectrum_is_a_delta() {
        let fr = FrequencyResponse::new(905e6, 1e5, vec![Complex64::new(1.0, 0.0); 64]).unwrap();
        let ir = impulse_response(&fr, Window::Rectangular, 1).unwrap();
        assert_eq!(ir.taps().len(), 64);
        assert!((ir.taps()[0].norm_sqr() - 1.0).abs() < 1e-12);
        assert!(ir.taps()[1..].iter().all(|h| h.norm() < 1e-12));
        assert!((ir.t_step_s() - 1.0 / (64.0 * 1e5)).abs() < 1e-24);
    }

    #[test]
    fn shift_theorem() {
        let n = 100;
        let df = 1e5;
        // exact grid delay: 7 taps of 1/(N·Δf)
        let tau = 7.0 / (n as f64 * df);
        let fr = synthesize_frequency_response(&[(tau, Complex64::new(1.0, 0.0))], 0.0, df, n).unwrap();
        let ir = impulse_response(&fr, Window::Rectangular, 1).unwrap();
        let peak = (0..ir.taps().len())
            .max_by(|&a, &b| ir.taps()[a].norm().total_cmp(&ir.taps()[b].norm()))
            .unwrap();
        assert_eq!(peak, 7);
        assert!((peak as f64 * ir.t_step_s() - tau).abs() < 1e-18);
    }

    #[test]
    fn parseval_rectangular() {
        let taps = [
            (0.0, Complex64::new(1.0, 0.0)),
            (310e-9, Complex64::new(0.3, -0.5)),
            (770e-9, Complex64::new(-0.2, 0.1)),
        ];
        let fr = synthesize_frequency_response(&taps, 905e6, 1e5, 201).unwrap();
        let lhs: f64 = fr.samples().iter().map(Complex64::norm_sqr).sum::<f64>() / fr.len() as f64;
        for pad in [1, 3, 8] {
            let ir = impulse_response(&fr, Window::Rectangular, pad).unwrap();
            assert!(((ir.energy() - lhs) / lhs).abs() < 1e-12, "pad {pad}");
        }
    }

    #[test]
    fn matches_naive_idft() {
        let taps = [(12e-9, Complex64::new(0.7, 0.2)), (40e-9, Complex64::new(0.1, 0.3))];
        let fr = synthesize_frequency_response(&taps, 1e9, 2e6, 37).unwrap();
        for window in [Window::Rectangular, Window::Hann] {
            let ir = impulse_response(&fr, window, 3).unwrap();
            let windowed: Vec<_> = fr
                .samples()
                .iter()
                .enumerate()
                .map(|(k, s)| s * window.coefficient(k, fr.len()))
                .collect();
            let expected = naive_idft(&windowed, fr.len() * 3);
            for (a, b) in ir.taps().iter().zip(&expected) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pad_factor_zero_rejected() {
        let fr = FrequencyResponse::new(0.0, 1.0, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        assert_eq!(impulse_response(&fr, Window::Hann, 0), Err(MultipathError::InvalidPadFactor));
    }
}
