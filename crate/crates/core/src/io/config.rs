use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, IngestError, ReportFormat};
use crate::multipath::{Window, DEFAULT_NOISE_FLOOR_DB, DEFAULT_ZERO_PAD_FACTOR};

/// Run-wide defaults, loadable from a TOML file. Every field is optional in
/// the file; command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub window: Window,
    pub zero_pad_factor: usize,
    pub noise_floor_db: f64,
    pub params_path: Option<String>,
    pub format: ReportFormat,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window: Window::default(),
            zero_pad_factor: DEFAULT_ZERO_PAD_FACTOR,
            noise_floor_db: DEFAULT_NOISE_FLOOR_DB,
            params_path: None,
            format: ReportFormat::Json,
            seed: None,
        }
    }
}

pub const MAX_ZERO_PAD_FACTOR: usize = 1024;

impl RunConfig {
    /// Checks documented ranges: zero-pad factor in 1..=1024, noise floor in
    /// (0, 300] dB.
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(1..=MAX_ZERO_PAD_FACTOR).contains(&self.zero_pad_factor) {
            return Err(IngestError::InvalidValue {
                line: 0,
                column: "zero_pad_factor".into(),
                message: format!("must be in 1..={MAX_ZERO_PAD_FACTOR}, got {}", self.zero_pad_factor),
            });
        }
        if !(self.noise_floor_db > 0.0 && self.noise_floor_db <= 300.0) {
            return Err(IngestError::InvalidValue {
                line: 0,
                column: "noise_floor_db".into(),
                message: format!("must be in (0, 300] dB, got {}", self.noise_floor_db),
            });
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, IngestError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| IngestError::Syntax {
            line: e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let bytes = read_file(path)?;
        Self::from_toml(&String::from_utf8_lossy(&bytes))
    }
}
