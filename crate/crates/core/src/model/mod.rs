//! Statistical in-body path-loss model.
//!
//! Path loss in dB grows linearly with implant depth:
//!
//! ```text
//! PL(d) = PL0 + m · (d / d0) + S,    10 mm ≤ d ≤ 100 mm,  d0 = 10 mm
//! ```
//!
//! where `S` is zero-mean Gaussian shadowing whose variance may depend on
//! depth. The external (body surface to off-body node) segment is treated as
//! free space and evaluated with the Friis equation including antenna
//! mismatch.

mod link;
mod path_loss;
mod shadowing;

pub use link::{
    concatenated_link_budget, external_path_loss_db, friis_received_power, outage_probability,
    required_tx_power, standard_normal_tail, AntennaParams, LinkBudgetRequest, LinkBudgetResult,
};
pub use path_loss::{mean_path_loss, sample_path_loss, PathLossParams};
pub use shadowing::{Interpolation, ShadowingProfile};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::SPEED_OF_LIGHT;

/// Reference depth of the model in millimeters.
pub const REFERENCE_DEPTH_MM: f64 = 10.0;
/// Inclusive depth range over which the model is valid.
pub const DEPTH_RANGE_MM: (f64, f64) = (10.0, 100.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("depth {depth_mm} mm is outside the model validity range [10, 100] mm")]
    DepthOutOfRange { depth_mm: f64 },
    #[error("shadowing profile has no bins")]
    EmptyProfile,
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub fn check_depth(depth_mm: f64) -> Result<(), ModelError> {
    if depth_mm.is_finite() && (DEPTH_RANGE_MM.0..=DEPTH_RANGE_MM.1).contains(&depth_mm) {
        Ok(())
    } else {
        Err(ModelError::DepthOutOfRange { depth_mm })
    }
}

/// ISM band the model is parameterized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrequencyBand {
    #[serde(rename = "915MHz")]
    Ism915,
    #[serde(rename = "2.4GHz")]
    Ism2400,
}

impl FrequencyBand {
    pub const ALL: [FrequencyBand; 2] = [FrequencyBand::Ism915, FrequencyBand::Ism2400];

    pub fn carrier_hz(self) -> f64 {
        match self {
            FrequencyBand::Ism915 => 915e6,
            FrequencyBand::Ism2400 => 2.4e9,
        }
    }

    pub fn wavelength_m(self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz()
    }

    pub fn label(self) -> &'static str {
        match self {
            FrequencyBand::Ism915 => "915MHz",
            FrequencyBand::Ism2400 => "2.4GHz",
        }
    }

    /// Band whose carrier is closest to `hz`, if within 10%.
    pub fn from_hz(hz: f64) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|b| ((hz - b.carrier_hz()) / b.carrier_hz()).abs() < 0.1)
    }
}

impl fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FrequencyBand {
    type Err = String;

    /// Accepts `915MHz`, `2.4GHz`, `2400MHz`, and bare `915` / `2400` / `2.4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let hz = match crate::units::parse_frequency(t) {
            Ok(hz) => Some(hz),
            Err(_) => match t.to_ascii_lowercase().as_str() {
                "915" | "ism915" => Some(915e6),
                "2400" | "2.4" | "ism2400" => Some(2.4e9),
                _ => None,
            },
        };
        hz.and_then(FrequencyBand::from_hz)
            .ok_or_else(|| format!("unknown frequency band '{s}' (expected 915MHz or 2.4GHz)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Heart,
    Stomach,
    Kidneys,
    Intestine,
    WholeTorso,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Heart => "heart",
            Region::Stomach => "stomach",
            Region::Kidneys => "kidneys",
            Region::Intestine => "intestine",
            Region::WholeTorso => "torso",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "heart" => Ok(Region::Heart),
            "stomach" => Ok(Region::Stomach),
            "kidney" | "kidneys" => Ok(Region::Kidneys),
            "intestine" | "intestines" => Ok(Region::Intestine),
            "torso" | "whole_torso" | "wholetorso" => Ok(Region::WholeTorso),
            _ => Err(format!("unknown anatomical region '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Anterior,
    Posterior,
    LeftLateral,
    RightLateral,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Anterior => "anterior",
            Direction::Posterior => "posterior",
            Direction::LeftLateral => "left",
            Direction::RightLateral => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "anterior" | "front" => Ok(Direction::Anterior),
            "posterior" | "back" => Ok(Direction::Posterior),
            "left" | "left_lateral" => Ok(Direction::LeftLateral),
            "right" | "right_lateral" => Ok(Direction::RightLateral),
            _ => Err(format!("unknown anatomical direction '{s}'")),
        }
    }
}

/// Where the implant sits. Region-keyed and direction-keyed parameter sets
/// are alternative groupings of the same measurements: a context with a
/// direction selects the direction-keyed set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnatomicalContext {
    pub region: Region,
    pub direction: Option<Direction>,
}

impl AnatomicalContext {
    pub fn region(region: Region) -> Self {
        Self { region, direction: None }
    }

    pub fn direction(direction: Direction) -> Self {
        Self { region: Region::WholeTorso, direction: Some(direction) }
    }
}

impl fmt::Display for AnatomicalContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Some(d) => write!(f, "{}/{}", self.region, d),
            None => write!(f, "{}", self.region),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_wavelength() {
        let b = FrequencyBand::Ism915;
        assert_eq!(b.wavelength_m(), SPEED_OF_LIGHT / 915e6);
        assert!((FrequencyBand::Ism2400.wavelength_m() - 0.124913524).abs() < 1e-8);
    }

    #[test]
    fn band_parsing() {
        for s in ["915MHz", "915", "0.915GHz", "915 MHz"] {
            assert_eq!(s.parse::<FrequencyBand>().unwrap(), FrequencyBand::Ism915, "{s}");
        }
        for s in ["2.4GHz", "2400MHz", "2400", "2.45GHz"] {
            assert_eq!(s.parse::<FrequencyBand>().unwrap(), FrequencyBand::Ism2400, "{s}");
        }
        assert!("5.8GHz".parse::<FrequencyBand>().is_err());
    }

    #[test]
    fn labels_parse_back() {
        for r in [Region::Heart, Region::Stomach, Region::Kidneys, Region::Intestine, Region::WholeTorso] {
            assert_eq!(r.label().parse::<Region>().unwrap(), r);
        }
        for d in [Direction::Anterior, Direction::Posterior, Direction::LeftLateral, Direction::RightLateral] {
            assert_eq!(d.label().parse::<Direction>().unwrap(), d);
        }
        assert_eq!("left-lateral".parse::<Direction>().unwrap(), Direction::LeftLateral);
    }

    #[test]
    fn depth_validity() {
        assert!(check_depth(10.0).is_ok());
        assert!(check_depth(100.0).is_ok());
        assert!(check_depth(9.999).is_err());
        assert!(check_depth(100.5).is_err());
        assert!(check_depth(f64::NAN).is_err());
    }
}
