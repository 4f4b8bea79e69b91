//! Flat report rows. Field names carry their unit.

use serde::{Deserialize, Serialize};

use crate::estimation::{DepthMean, FitResult, GroupKey};
use crate::model::AnatomicalContext;

fn opt_label<T: ToString>(v: Option<T>) -> Option<String> {
    v.map(|v| v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupColumns {
    pub band: Option<String>,
    pub region: Option<String>,
    pub direction: Option<String>,
    pub source: Option<String>,
}

impl From<&GroupKey> for GroupColumns {
    fn from(k: &GroupKey) -> Self {
        Self {
            band: opt_label(k.band),
            region: opt_label(k.region),
            direction: opt_label(k.direction),
            source: opt_label(k.source),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub band: Option<String>,
    pub region: Option<String>,
    pub direction: Option<String>,
    pub source: Option<String>,
    pub pl0_db: f64,
    pub m_db: f64,
    pub r_squared: f64,
    pub n_samples: usize,
}

impl From<&FitResult> for FitRow {
    fn from(f: &FitResult) -> Self {
        let g = GroupColumns::from(&f.key);
        Self {
            band: g.band,
            region: g.region,
            direction: g.direction,
            source: g.source,
            pl0_db: f.pl0_db,
            m_db: f.m_db,
            r_squared: f.r_squared,
            n_samples: f.n_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowingRow {
    pub band: Option<String>,
    pub region: Option<String>,
    pub direction: Option<String>,
    pub source: Option<String>,
    pub depth_mm: f64,
    pub variance_db2: f64,
    pub sigma_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthMeanRow {
    pub band: Option<String>,
    pub region: Option<String>,
    pub direction: Option<String>,
    pub source: Option<String>,
    pub depth_mm: f64,
    pub mean_pl_db: f64,
    pub count: usize,
}

impl From<&DepthMean> for DepthMeanRow {
    fn from(d: &DepthMean) -> Self {
        let g = GroupColumns::from(&d.key);
        Self {
            band: g.band,
            region: g.region,
            direction: g.direction,
            source: g.source,
            depth_mm: d.depth_mm,
            mean_pl_db: d.mean_pl_db,
            count: d.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub model_a: String,
    pub model_b: String,
    pub decay_rate_ratio: f64,
    pub delta_pl0_db: f64,
    pub depth_mm: f64,
    pub delta_mean_pl_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextColumns {
    pub band: String,
    pub region: String,
    pub direction: Option<String>,
}

impl ContextColumns {
    pub fn new(band: crate::model::FrequencyBand, ctx: AnatomicalContext) -> Self {
        Self { band: band.to_string(), region: ctx.region.to_string(), direction: opt_label(ctx.direction) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRow {
    pub band: String,
    pub region: String,
    pub direction: Option<String>,
    pub depth_mm: f64,
    pub mean_pl_db: f64,
    pub sigma_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub trial: u64,
    pub depth_mm: f64,
    pub pl_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageRow {
    pub band: String,
    pub region: String,
    pub direction: Option<String>,
    pub depth_mm: f64,
    pub mean_pl_db: f64,
    pub sigma_db: f64,
    pub max_pl_db: f64,
    pub outage_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    pub band: String,
    pub region: String,
    pub direction: Option<String>,
    pub depth_mm: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub mean_pl_db: f64,
    pub variance_pl_db2: f64,
    pub threshold_db: f64,
    pub outage_count: u64,
    pub outage_rate: f64,
    pub closed_form_outage_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetRow {
    pub band: String,
    pub region: String,
    pub direction: Option<String>,
    pub depth_mm: f64,
    pub external_distance_m: f64,
    pub pt_dbm: f64,
    pub sensitivity_dbm: f64,
    pub in_body_pl_db: f64,
    pub external_pl_db: f64,
    pub total_pl_db: f64,
    pub rx_power_dbm: f64,
    pub margin_db: f64,
    pub shadowing_sigma_db: f64,
    pub required_margin_db: f64,
    pub required_tx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpRow {
    pub delay_ns: f64,
    pub power_linear: f64,
    pub power_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub f_start_mhz: f64,
    pub f_stop_mhz: f64,
    pub points: usize,
    pub band_average_pl_db: f64,
    pub pdp_taps: usize,
    pub mean_excess_delay_ns: f64,
    pub rms_delay_spread_ns: f64,
    pub coherence_bandwidth_defined: bool,
    pub coherence_bandwidth_mhz: Option<f64>,
    pub signal_bw_mhz: Option<f64>,
    pub channel_class: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRow {
    pub signal_bw_mhz: f64,
    pub coherence_bandwidth_mhz: f64,
    pub channel_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRow {
    pub input: String,
    pub kind: String,
    pub records: usize,
    pub skipped: usize,
    pub skipped_lines: String,
    pub f_start_mhz: Option<f64>,
    pub f_stop_mhz: Option<f64>,
    pub band_average_pl_db: Option<f64>,
}
