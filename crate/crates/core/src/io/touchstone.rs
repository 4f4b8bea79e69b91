//! Touchstone v1 two-port (`.s2p`) reader and writer.
//!
//! Data rows carry `freq S11 S21 S12 S22`, each parameter as a pair in the
//! format named on the option line (`RI`, `MA` or `DB`, angles in degrees).
//! Values are stored as complex RI internally; the writer converts back to
//! the sweep's own format and prints every number in shortest round-trip
//! form, so reparsing reproduces the stored values.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{IngestError, Location};
use crate::multipath::FrequencyResponse;
use crate::units::{db_to_magnitude, magnitude_to_db};

const VALUES_PER_ROW: usize = 9;
const GRID_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    #[default]
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    RealImaginary,
    #[default]
    MagnitudeAngle,
    DecibelAngle,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::RealImaginary => "RI",
            DataFormat::MagnitudeAngle => "MA",
            DataFormat::DecibelAngle => "DB",
        }
    }

    fn to_complex(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::RealImaginary => Complex64::new(a, b),
            DataFormat::MagnitudeAngle => Complex64::from_polar(a, b.to_radians()),
            DataFormat::DecibelAngle => Complex64::from_polar(db_to_magnitude(a), b.to_radians()),
        }
    }

    fn to_pair(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::RealImaginary => (z.re, z.im),
            DataFormat::MagnitudeAngle => (z.norm(), z.arg().to_degrees()),
            DataFormat::DecibelAngle => (magnitude_to_db(z.norm()), z.arg().to_degrees()),
        }
    }
}

/// Contents of the `#` option line. Only S-parameters are accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchstoneOptions {
    pub freq_unit: FrequencyUnit,
    pub format: DataFormat,
    pub reference_ohms: f64,
}

impl Default for TouchstoneOptions {
    fn default() -> Self {
        Self { freq_unit: FrequencyUnit::GHz, format: DataFormat::MagnitudeAngle, reference_ohms: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortPoint {
    pub freq_hz: f64,
    /// S11, S21, S12, S22.
    pub s: [Complex64; 4],
}

impl TwoPortPoint {
    pub fn s21(&self) -> Complex64 {
        self.s[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneSweep {
    pub options: TouchstoneOptions,
    pub points: Vec<TwoPortPoint>,
}

impl TouchstoneSweep {
    /// S21 as a uniformly gridded frequency response.
    pub fn s21(&self) -> Result<FrequencyResponse, IngestError> {
        let n = self.points.len();
        if n == 0 {
            return Err(IngestError::NoData);
        }
        let f0 = self.points[0].freq_hz;
        let step = if n > 1 { (self.points[n - 1].freq_hz - f0) / (n - 1) as f64 } else { 0.0 };
        let samples = self.points.iter().map(TwoPortPoint::s21).collect();
        Ok(FrequencyResponse::new(f0, step, samples)?)
    }
}

fn parse_option_line(body: &str, line: usize, offset: usize) -> Result<TouchstoneOptions, IngestError> {
    let mut opts = TouchstoneOptions::default();
    let mut tokens = tokens(body, offset).peekable();
    while let Some((col, tok)) = tokens.next() {
        let at = Location { line, column: col };
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.freq_unit = FrequencyUnit::Hz,
            "KHZ" => opts.freq_unit = FrequencyUnit::KHz,
            "MHZ" => opts.freq_unit = FrequencyUnit::MHz,
            "GHZ" => opts.freq_unit = FrequencyUnit::GHz,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(IngestError::MalformedOptionLine {
                    at,
                    message: format!("parameter type {tok} is not supported; expected S"),
                })
            }
            "RI" => opts.format = DataFormat::RealImaginary,
            "MA" => opts.format = DataFormat::MagnitudeAngle,
            "DB" => opts.format = DataFormat::DecibelAngle,
            "R" => {
                let (vcol, v) = tokens.next().ok_or_else(|| IngestError::MalformedOptionLine {
                    at,
                    message: "R must be followed by a reference resistance".into(),
                })?;
                opts.reference_ohms = v.parse().map_err(|_| IngestError::MalformedOptionLine {
                    at: Location { line, column: vcol },
                    message: format!("invalid reference resistance '{v}'"),
                })?;
            }
            _ => {
                return Err(IngestError::MalformedOptionLine { at, message: format!("unknown token '{tok}'") })
            }
        }
    }
    Ok(opts)
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(s: &str, offset: usize) -> impl Iterator<Item = (usize, &str)> {
    s.split(|c: char| c.is_whitespace()).scan(0usize, move |pos, tok| {
        let col = *pos;
        *pos += tok.len() + 1;
        Some((offset + col + 1, tok))
    })
    .filter(|(_, t)| !t.is_empty())
}

/// Parses Touchstone v1 two-port text. Comment text after `!` is ignored,
/// the first option line applies (defaults `GHZ S MA R 50`), and the
/// frequency grid must be strictly increasing and uniform.
pub fn parse_touchstone(bytes: &[u8]) -> Result<TouchstoneSweep, IngestError> {
    let text = String::from_utf8_lossy(bytes);
    let mut options: Option<TouchstoneOptions> = None;
    let mut points: Vec<TwoPortPoint> = Vec::new();
    let mut grid_step: Option<f64> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("");
        let trimmed = content.trim_start();
        let indent = content.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') {
            return Err(IngestError::UnsupportedVersion { at: Location { line, column: indent + 1 } });
        }
        if let Some(body) = trimmed.strip_prefix('#') {
            if !points.is_empty() {
                return Err(IngestError::MalformedOptionLine {
                    at: Location { line, column: indent + 1 },
                    message: "option line must precede the data".into(),
                });
            }
            // repeated option lines are ignored per v1
            if options.is_none() {
                options = Some(parse_option_line(body, line, indent + 1)?);
            }
            continue;
        }

        let opts = *options.get_or_insert_with(TouchstoneOptions::default);
        let toks: Vec<(usize, &str)> = tokens(trimmed, indent).collect();
        if toks.len() != VALUES_PER_ROW {
            return Err(IngestError::RowArityError {
                at: Location { line, column: indent + 1 },
                expected: VALUES_PER_ROW,
                found: toks.len(),
            });
        }
        let mut values = [0.0; VALUES_PER_ROW];
        for (slot, &(column, tok)) in values.iter_mut().zip(&toks) {
            *slot = tok.parse().map_err(|_| IngestError::InvalidNumber {
                at: Location { line, column },
                token: tok.to_string(),
            })?;
        }
        let at = Location { line, column: toks[0].0 };
        let freq_hz = values[0] * opts.freq_unit.scale();
        if !freq_hz.is_finite() || freq_hz < 0.0 {
            return Err(IngestError::InvalidNumber { at, token: toks[0].1.to_string() });
        }
        if let Some(prev) = points.last() {
            let step = freq_hz - prev.freq_hz;
            if step <= 0.0 {
                return Err(IngestError::NonMonotonicFrequency { at, freq_hz });
            }
            match grid_step {
                None => grid_step = Some(step),
                Some(expected) if (step - expected).abs() > GRID_TOLERANCE * expected => {
                    return Err(IngestError::NonUniformGrid { at, expected_hz: expected, found_hz: step });
                }
                Some(_) => {}
            }
        }
        let mut s = [Complex64::new(0.0, 0.0); 4];
        for (k, z) in s.iter_mut().enumerate() {
            *z = opts.format.to_complex(values[1 + 2 * k], values[2 + 2 * k]);
        }
        points.push(TwoPortPoint { freq_hz, s });
    }

    if points.is_empty() {
        return Err(IngestError::NoData);
    }
    Ok(TouchstoneSweep { options: options.unwrap_or_default(), points })
}

/// Serializes a sweep as Touchstone v1 text in its own unit and format.
pub fn write_touchstone(sweep: &TouchstoneSweep) -> String {
    let o = &sweep.options;
    let mut out = String::new();
    let _ = writeln!(out, "! two-port sweep, {} points", sweep.points.len());
    let _ = writeln!(out, "# {} S {} R {:?}", o.freq_unit.keyword(), o.format.keyword(), o.reference_ohms);
    for p in &sweep.points {
        let _ = write!(out, "{:e}", p.freq_hz / o.freq_unit.scale());
        for z in p.s {
            let (a, b) = o.format.to_pair(z);
            let _ = write!(out, " {a:e} {b:e}");
        }
        out.push('\n');
    }
    out
}

/// Wraps an S21 response as a matched, reciprocal two-port
/// (S11 = S22 = 0, S12 = S21).
pub fn sweep_from_response(fr: &FrequencyResponse, options: TouchstoneOptions) -> TouchstoneSweep {
    let zero = Complex64::new(0.0, 0.0);
    let points = fr
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &s21)| TwoPortPoint { freq_hz: fr.frequency(k), s: [zero, s21, s21, zero] })
        .collect();
    TouchstoneSweep { options, points }
}
