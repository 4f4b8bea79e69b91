//! Fitting the depth-linear path-loss model to measurement records and
//! summarizing the residual shadowing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    check_depth, AnatomicalContext, Direction, FrequencyBand, Interpolation, ModelError, Region,
    ShadowingProfile, DEPTH_RANGE_MM, REFERENCE_DEPTH_MM,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("group {key}: need at least 2 records, got {count}")]
    InsufficientData { key: String, count: usize },
    #[error("group {key}: all records share depth {depth_mm} mm")]
    DegenerateDepths { key: String, depth_mm: f64 },
    #[error("group {key}: no depth bin has 2 or more records")]
    InsufficientBinData { key: String },
    #[error("decay rate of the reference fit is zero")]
    ZeroSlopeDenominator,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Simulation,
    Experiment,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Simulation => "simulation",
            Source::Experiment => "experiment",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simulation" | "sim" => Ok(Source::Simulation),
            "experiment" | "exp" | "measurement" => Ok(Source::Experiment),
            _ => Err(format!("unknown source '{s}' (expected simulation or experiment)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub context: AnatomicalContext,
    pub band: FrequencyBand,
    pub depth_mm: f64,
    pub pl_db: f64,
    pub source: Source,
}

impl MeasurementRecord {
    pub fn new(
        context: AnatomicalContext,
        band: FrequencyBand,
        depth_mm: f64,
        pl_db: f64,
        source: Source,
    ) -> Result<Self, ModelError> {
        check_depth(depth_mm)?;
        if !pl_db.is_finite() {
            return Err(ModelError::InvalidParameter(format!("path loss must be finite, got {pl_db}")));
        }
        Ok(Self { context, band, depth_mm, pl_db, source })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub file: Option<String>,
    pub date: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDataset {
    pub records: Vec<MeasurementRecord>,
    pub provenance: Provenance,
}

impl MeasurementDataset {
    pub fn new(records: Vec<MeasurementRecord>) -> Self {
        Self { records, provenance: Provenance::default() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Which record attributes partition a dataset into fit groups.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Grouping {
    pub band: bool,
    pub region: bool,
    pub direction: bool,
    pub source: bool,
}

impl Grouping {
    /// band × region (anatomical-region parameter sets)
    pub const BAND_REGION: Grouping = Grouping { band: true, region: true, direction: false, source: false };
    /// band × direction (anatomical-direction parameter sets)
    pub const BAND_DIRECTION: Grouping = Grouping { band: true, region: false, direction: true, source: false };
    /// band × region × source (simulation vs experiment comparison)
    pub const BAND_REGION_SOURCE: Grouping = Grouping { band: true, region: true, direction: false, source: true };

    pub fn key(&self, r: &MeasurementRecord) -> GroupKey {
        GroupKey {
            band: self.band.then_some(r.band),
            region: self.region.then_some(r.context.region),
            direction: if self.direction { r.context.direction } else { None },
            source: self.source.then_some(r.source),
            grouping: *self,
        }
    }
}

/// Identity of one fit group: the attribute values selected by `grouping`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub band: Option<FrequencyBand>,
    pub region: Option<Region>,
    pub direction: Option<Direction>,
    pub source: Option<Source>,
    pub grouping: Grouping,
}

impl GroupKey {
    pub fn matches(&self, r: &MeasurementRecord) -> bool {
        self.grouping.key(r) == *self
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(b) = self.band {
            parts.push(format!("band={b}"));
        }
        if let Some(r) = self.region {
            parts.push(format!("region={r}"));
        }
        if self.grouping.direction {
            parts.push(format!("direction={}", self.direction.map_or("none", Direction::label)));
        }
        if let Some(s) = self.source {
            parts.push(format!("source={s}"));
        }
        if parts.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub key: GroupKey,
    pub pl0_db: f64,
    pub m_db: f64,
    pub r_squared: f64,
    pub n_samples: usize,
    pub residual_profile: ShadowingProfile,
}

impl FitResult {
    pub fn predict(&self, depth_mm: f64) -> f64 {
        self.pl0_db + self.m_db * (depth_mm / REFERENCE_DEPTH_MM)
    }
}

/// Bin centre (10 mm grid) that a depth falls into.
pub fn depth_bin(depth_mm: f64) -> f64 {
    ((depth_mm / REFERENCE_DEPTH_MM).round() * REFERENCE_DEPTH_MM).clamp(DEPTH_RANGE_MM.0, DEPTH_RANGE_MM.1)
}

/// Totally ordered f64 wrapper for bin keys.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bin(f64);

impl Eq for Bin {}

impl PartialOrd for Bin {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bin {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn group<'a>(
    dataset: &'a MeasurementDataset,
    grouping: &Grouping,
) -> BTreeMap<GroupKey, Vec<&'a MeasurementRecord>> {
    let mut groups: BTreeMap<GroupKey, Vec<&MeasurementRecord>> = BTreeMap::new();
    for r in &dataset.records {
        groups.entry(grouping.key(r)).or_default().push(r);
    }
    groups
}

/// Slope and intercept of the ordinary least-squares line y = a + b·x.
struct Line {
    intercept: f64,
    slope: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Line { intercept, slope, r_squared }
}

fn fit_group(key: GroupKey, records: &[&MeasurementRecord]) -> Result<FitResult, EstimationError> {
    if records.len() < 2 {
        return Err(EstimationError::InsufficientData { key: key.to_string(), count: records.len() });
    }
    let first = records[0].depth_mm;
    if records.iter().all(|r| r.depth_mm == first) {
        return Err(EstimationError::DegenerateDepths { key: key.to_string(), depth_mm: first });
    }
    let xs: Vec<f64> = records.iter().map(|r| r.depth_mm / REFERENCE_DEPTH_MM).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.pl_db).collect();
    let line = least_squares(&xs, &ys);
    let mut fit = FitResult {
        key,
        pl0_db: line.intercept,
        m_db: line.slope,
        r_squared: line.r_squared,
        n_samples: records.len(),
        residual_profile: ShadowingProfile::empty(),
    };
    fit.residual_profile = binned_variance(records, &fit).0;
    Ok(fit)
}

/// Ordinary least-squares fit of `pl_db` against `depth/d0` for every group
/// the selector produces. Results are ordered by group key.
pub fn fit_path_loss(
    dataset: &MeasurementDataset,
    grouping: &Grouping,
) -> Result<Vec<FitResult>, EstimationError> {
    group(dataset, grouping)
        .into_iter()
        .map(|(key, records)| fit_group(key, &records))
        .collect()
}

/// A depth bin left out of a shadowing profile for lack of data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinWarning {
    pub depth_mm: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowingEstimate {
    pub profile: ShadowingProfile,
    pub skipped: Vec<BinWarning>,
}

fn binned_variance(records: &[&MeasurementRecord], fit: &FitResult) -> (ShadowingProfile, Vec<BinWarning>) {
    let mut bins: BTreeMap<Bin, Vec<f64>> = BTreeMap::new();
    for r in records {
        bins.entry(Bin(depth_bin(r.depth_mm))).or_default().push(r.pl_db - fit.predict(r.depth_mm));
    }
    let mut table = Vec::new();
    let mut skipped = Vec::new();
    for (Bin(depth), mut residuals) in bins {
        if residuals.len() < 2 {
            skipped.push(BinWarning { depth_mm: depth, count: residuals.len() });
            continue;
        }
        // fixed summation order makes the result independent of record order
        residuals.sort_by(f64::total_cmp);
        let n = residuals.len() as f64;
        let mean = residuals.iter().sum::<f64>() / n;
        let ss: f64 = residuals.iter().map(|r| (r - mean) * (r - mean)).sum();
        table.push((depth, ss / (n - 1.0)));
    }
    let profile = ShadowingProfile::new(table, Interpolation::LinearInVariance)
        .expect("bin centres are increasing and within the model range");
    (profile, skipped)
}

/// Unbiased per-depth variance of the residuals of `fit` over the records of
/// its group. Bins with fewer than two records are reported in `skipped`.
pub fn shadowing_variance_by_depth(
    dataset: &MeasurementDataset,
    fit: &FitResult,
) -> Result<ShadowingEstimate, EstimationError> {
    let records: Vec<&MeasurementRecord> = dataset.records.iter().filter(|r| fit.key.matches(r)).collect();
    let (profile, skipped) = binned_variance(&records, fit);
    if profile.is_empty() {
        return Err(EstimationError::InsufficientBinData { key: fit.key.to_string() });
    }
    Ok(ShadowingEstimate { profile, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: FitResult,
    pub b: FitResult,
    pub decay_rate_ratio: f64,
    pub delta_pl0_db: f64,
    /// (depth_mm, mean PL of a − mean PL of b) on the 10 mm grid.
    pub depth_deltas: Vec<(f64, f64)>,
}

pub fn compare_models(fit_a: &FitResult, fit_b: &FitResult) -> Result<ComparisonReport, EstimationError> {
    if fit_b.m_db == 0.0 {
        return Err(EstimationError::ZeroSlopeDenominator);
    }
    let depth_deltas = (1..=10)
        .map(|k| {
            let d = k as f64 * REFERENCE_DEPTH_MM;
            (d, fit_a.predict(d) - fit_b.predict(d))
        })
        .collect();
    Ok(ComparisonReport {
        a: fit_a.clone(),
        b: fit_b.clone(),
        decay_rate_ratio: fit_a.m_db / fit_b.m_db,
        delta_pl0_db: fit_a.pl0_db - fit_b.pl0_db,
        depth_deltas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthMean {
    pub key: GroupKey,
    pub depth_mm: f64,
    pub mean_pl_db: f64,
    pub count: usize,
}

/// Arithmetic mean path loss per (group, 10 mm depth bin).
pub fn empirical_mean_pl_by_depth(dataset: &MeasurementDataset, grouping: &Grouping) -> Vec<DepthMean> {
    let mut cells: BTreeMap<(GroupKey, Bin), (f64, usize)> = BTreeMap::new();
    for r in &dataset.records {
        let cell = cells.entry((grouping.key(r), Bin(depth_bin(r.depth_mm)))).or_insert((0.0, 0));
        cell.0 += r.pl_db;
        cell.1 += 1;
    }
    cells
        .into_iter()
        .map(|((key, Bin(depth_mm)), (sum, count))| DepthMean {
            key,
            depth_mm,
            mean_pl_db: sum / count as f64,
            count,
        })
        .collect()
}
