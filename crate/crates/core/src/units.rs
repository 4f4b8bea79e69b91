//! Decibel conversions and parsing of unit-suffixed quantities used at the
//! command-line boundary (`50mm`, `915MHz`, `-90dBm`, ...).
//!
//! Internally everything is SI: seconds, hertz, meters, watts. Depths are the
//! one exception and stay in millimeters because the path-loss model is
//! defined on a millimeter grid.

use std::fmt;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Power ratio to dB (10·log10).
pub fn power_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Field (voltage / S-parameter) magnitude to dB (20·log10).
pub fn magnitude_to_db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

pub fn db_to_magnitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    power_to_db(w * 1e3)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_power(dbm) * 1e-3
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitError {
    pub input: String,
    pub expected: &'static str,
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse '{}' as {}", self.input, self.expected)
    }
}

impl std::error::Error for UnitError {}

fn split_number(s: &str) -> Option<(f64, &str)> {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || ((c == '-' || c == '+') && (i == 0 || matches!(s.as_bytes()[i - 1], b'e' | b'E')))
                || ((c == 'e' || c == 'E')
                    && i > 0
                    && s[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let value: f64 = s[..end].parse().ok()?;
    Some((value, s[end..].trim()))
}

fn scaled(s: &str, expected: &'static str, table: &[(&str, f64)], bare: Option<f64>) -> Result<f64, UnitError> {
    let err = || UnitError { input: s.to_string(), expected };
    let (value, unit) = split_number(s).ok_or_else(err)?;
    if unit.is_empty() {
        return bare.map(|k| value * k).ok_or_else(err);
    }
    table
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(unit))
        .map(|&(_, k)| value * k)
        .ok_or_else(err)
}

/// Frequency with a mandatory unit suffix, returned in Hz.
pub fn parse_frequency(s: &str) -> Result<f64, UnitError> {
    scaled(
        s,
        "frequency (e.g. 915MHz, 2.4GHz)",
        &[("hz", 1.0), ("khz", 1e3), ("mhz", 1e6), ("ghz", 1e9)],
        None,
    )
}

/// Depth in mm; a bare number is taken as millimeters.
pub fn parse_depth_mm(s: &str) -> Result<f64, UnitError> {
    scaled(
        s,
        "depth (e.g. 50mm, 5cm)",
        &[("mm", 1.0), ("cm", 10.0), ("m", 1000.0)],
        Some(1.0),
    )
}

/// Distance in meters; a bare number is taken as meters.
pub fn parse_distance_m(s: &str) -> Result<f64, UnitError> {
    scaled(
        s,
        "distance (e.g. 1m, 50cm)",
        &[("m", 1.0), ("cm", 1e-2), ("mm", 1e-3)],
        Some(1.0),
    )
}

/// Power level in dBm; a bare number is taken as dBm.
pub fn parse_dbm(s: &str) -> Result<f64, UnitError> {
    scaled(s, "power (e.g. -90dBm)", &[("dbm", 1.0)], Some(1.0))
}

/// Relative level in dB; a bare number is taken as dB.
pub fn parse_db(s: &str) -> Result<f64, UnitError> {
    scaled(s, "level in dB (e.g. 30dB)", &[("db", 1.0)], Some(1.0))
}

/// Time interval in seconds; unit suffix required.
pub fn parse_duration_s(s: &str) -> Result<f64, UnitError> {
    scaled(
        s,
        "delay (e.g. 2.76ns)",
        &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("ps", 1e-12)],
        None,
    )
}
