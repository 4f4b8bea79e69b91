use std::collections::BTreeMap;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{IngestError, RunConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format '{s}' (expected json or csv)")),
        }
    }
}

/// Everything needed to reproduce a report: the subcommand, its effective
/// parameters, the input files, the seed, and the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub config: RunConfig,
}

impl RunInfo {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            seed: None,
            config: config.clone(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(mut self, path: impl ToString) -> Self {
        self.inputs.push(path.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub run: RunInfo,
    pub records: Vec<T>,
}

/// Serializes records with the run provenance.
///
/// JSON: `{"run": {...}, "records": [...]}`, pretty-printed. CSV: the run
/// provenance as `# key: value` comment lines followed by a header row and
/// one row per record; records must be flat. Output is deterministic: field
/// order follows the record type and maps are sorted.
pub fn write_report<T: Serialize>(run: &RunInfo, records: &[T], format: ReportFormat) -> Result<Vec<u8>, IngestError> {
    match format {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Borrowed<'a, T> {
                run: &'a RunInfo,
                records: &'a [T],
            }
            let mut out = serde_json::to_vec_pretty(&Borrowed { run, records })
                .map_err(|e| IngestError::Syntax { line: 0, message: e.to_string() })?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut out = Vec::new();
            let run_json = serde_json::to_value(run).map_err(|e| IngestError::Syntax { line: 0, message: e.to_string() })?;
            if let serde_json::Value::Object(fields) = run_json {
                for (k, v) in fields {
                    out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
                }
            }
            let mut w = csv::Writer::from_writer(&mut out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush().map_err(|source| IngestError::Io { path: "<report>".into(), source })?;
            drop(w);
            Ok(out)
        }
    }
}

pub fn read_json_report<T: DeserializeOwned>(bytes: &[u8]) -> Result<Report<T>, IngestError> {
    serde_json::from_slice(bytes).map_err(|e| IngestError::Syntax { line: e.line(), message: e.to_string() })
}
