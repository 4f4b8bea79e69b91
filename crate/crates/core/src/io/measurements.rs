use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::estimation::{MeasurementDataset, MeasurementRecord, Source};
use crate::model::{check_depth, AnatomicalContext, Direction, FrequencyBand, Region};

/// Header names of the CSV columns holding each record field. `direction`
/// and `source` may be left unmapped; unmapped directions are absent and
/// unmapped sources default to simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvMeasurementSchema {
    pub region: String,
    pub direction: Option<String>,
    pub depth_mm: String,
    pub band: String,
    pub pl_db: String,
    pub source: Option<String>,
}

impl Default for CsvMeasurementSchema {
    fn default() -> Self {
        Self {
            region: "region".into(),
            direction: Some("direction".into()),
            depth_mm: "depth_mm".into(),
            band: "band".into(),
            pl_db: "pl_db".into(),
            source: Some("source".into()),
        }
    }
}

impl CsvMeasurementSchema {
    /// Default column names, with `direction`/`source` unmapped when the
    /// header does not contain them.
    pub fn for_header(header: &[u8]) -> Self {
        let mut schema = Self::default();
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(header);
        let names: Vec<String> = rdr
            .records()
            .next()
            .and_then(Result::ok)
            .map(|r| r.iter().map(|s| s.trim().to_string()).collect())
            .unwrap_or_default();
        let has = |c: &Option<String>| c.as_ref().is_some_and(|c| names.iter().any(|n| n == c));
        if !has(&schema.direction) {
            schema.direction = None;
        }
        if !has(&schema.source) {
            schema.source = None;
        }
        schema
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    /// First invalid row aborts the parse.
    #[default]
    Strict,
    /// Invalid rows are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestedDataset {
    pub dataset: MeasurementDataset,
    pub skipped: Vec<RowIssue>,
}

struct Columns {
    region: usize,
    direction: Option<usize>,
    depth: usize,
    band: usize,
    pl: usize,
    source: Option<usize>,
}

fn locate(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| IngestError::MissingColumn { column: name.to_string() })
}

fn parse_row(row: &csv::StringRecord, cols: &Columns, line: usize, schema: &CsvMeasurementSchema) -> Result<MeasurementRecord, IngestError> {
    let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");
    let invalid = |column: &str, message: String| IngestError::InvalidValue { line, column: column.to_string(), message };

    let region: Region = field(cols.region).parse().map_err(|e| invalid(&schema.region, e))?;
    let direction = match (cols.direction, schema.direction.as_deref()) {
        (Some(i), Some(name)) if !field(i).is_empty() => {
            Some(field(i).parse::<Direction>().map_err(|e| invalid(name, e))?)
        }
        _ => None,
    };
    let band: FrequencyBand = field(cols.band).parse().map_err(|e| invalid(&schema.band, e))?;
    let depth_mm: f64 = field(cols.depth)
        .parse()
        .map_err(|_| invalid(&schema.depth_mm, format!("'{}' is not a number", field(cols.depth))))?;
    check_depth(depth_mm).map_err(|e| IngestError::ValueOutOfRange {
        line,
        column: schema.depth_mm.clone(),
        message: e.to_string(),
    })?;
    let pl_db: f64 = field(cols.pl)
        .parse()
        .map_err(|_| invalid(&schema.pl_db, format!("'{}' is not a number", field(cols.pl))))?;
    if !pl_db.is_finite() {
        return Err(IngestError::ValueOutOfRange {
            line,
            column: schema.pl_db.clone(),
            message: format!("path loss must be finite, got {pl_db}"),
        });
    }
    let source = match (cols.source, schema.source.as_deref()) {
        (Some(i), Some(name)) if !field(i).is_empty() => field(i).parse::<Source>().map_err(|e| invalid(name, e))?,
        _ => Source::Simulation,
    };
    let context = AnatomicalContext { region, direction };
    Ok(MeasurementRecord::new(context, band, depth_mm, pl_db, source)?)
}

/// Parses a CSV path-loss table. The header row is required; each data row
/// is validated against the model's depth range. Line numbers in errors and
/// skip reports are 1-based file lines.
pub fn parse_csv_measurements(
    bytes: &[u8],
    schema: &CsvMeasurementSchema,
    mode: ValidationMode,
) -> Result<IngestedDataset, IngestError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(IngestError::EmptyFile);
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let cols = Columns {
        region: locate(&headers, &schema.region)?,
        direction: schema.direction.as_deref().map(|c| locate(&headers, c)).transpose()?,
        depth: locate(&headers, &schema.depth_mm)?,
        band: locate(&headers, &schema.band)?,
        pl: locate(&headers, &schema.pl_db)?,
        source: schema.source.as_deref().map(|c| locate(&headers, c)).transpose()?,
    };

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        match parse_row(&row, &cols, line, schema) {
            Ok(r) => records.push(r),
            Err(e) if mode == ValidationMode::Lenient => skipped.push(RowIssue { line, message: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    Ok(IngestedDataset { dataset: MeasurementDataset::new(records), skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "region,direction,depth_mm,band,pl_db,source\n";

    fn parse(body: &str, mode: ValidationMode) -> Result<IngestedDataset, IngestError> {
        parse_csv_measurements(format!("{HEADER}{body}").as_bytes(), &CsvMeasurementSchema::default(), mode)
    }

    #[test]
    fn single_valid_row() {
        let ds = parse("heart,,20,915MHz,41.5,simulation\n", ValidationMode::Strict).unwrap();
        assert_eq!(ds.dataset.len(), 1);
        let r = ds.dataset.records[0];
        assert_eq!(r.context, AnatomicalContext::region(Region::Heart));
        assert_eq!(r.band, FrequencyBand::Ism915);
        assert_eq!((r.depth_mm, r.pl_db), (20.0, 41.5));
    }

    #[test]
    fn strict_reports_line_of_bad_depth() {
        let e = parse("heart,,20,915MHz,41.5,simulation\nheart,,5,915MHz,30,simulation\n", ValidationMode::Strict)
            .unwrap_err();
        assert!(matches!(e, IngestError::ValueOutOfRange { line: 3, .. }), "{e}");
    }

    #[test]
    fn lenient_skips_bad_rows() {
        let ds = parse("heart,,20,915MHz,41.5,simulation\nheart,,5,915MHz,30,simulation\n", ValidationMode::Lenient)
            .unwrap();
        assert_eq!(ds.dataset.len(), 1);
        assert_eq!(ds.skipped.len(), 1);
        assert_eq!(ds.skipped[0].line, 3);
    }

    #[test]
    fn out_of_range_and_bad_values() {
        assert!(matches!(
            parse("heart,,150,915MHz,41.5,simulation\n", ValidationMode::Strict),
            Err(IngestError::ValueOutOfRange { .. })
        ));
        assert!(matches!(
            parse("spleen,,50,915MHz,41.5,simulation\n", ValidationMode::Strict),
            Err(IngestError::InvalidValue { line: 2, .. })
        ));
        assert!(matches!(
            parse("heart,,50,5.8GHz,41.5,simulation\n", ValidationMode::Strict),
            Err(IngestError::InvalidValue { .. })
        ));
    }

    #[test]
    fn missing_column_and_empty() {
        let e = parse_csv_measurements(b"region,depth_mm\nheart,10\n", &CsvMeasurementSchema::default(), ValidationMode::Strict)
            .unwrap_err();
        assert!(matches!(e, IngestError::MissingColumn { .. }));
        assert!(matches!(
            parse_csv_measurements(b"", &CsvMeasurementSchema::default(), ValidationMode::Strict),
            Err(IngestError::EmptyFile)
        ));
    }

    #[test]
    fn optional_columns_follow_header() {
        let text = "band,region,depth_mm,pl_db\n2.4GHz,torso,30,55\n";
        let schema = CsvMeasurementSchema::for_header(text.as_bytes());
        assert_eq!(schema.direction, None);
        let ds = parse_csv_measurements(text.as_bytes(), &schema, ValidationMode::Strict).unwrap();
        assert_eq!(ds.dataset.records[0].source, Source::Simulation);
        assert_eq!(ds.dataset.records[0].band, FrequencyBand::Ism2400);
    }

    #[test]
    fn direction_column() {
        let ds = parse("torso,posterior,40,915MHz,50,experiment\n", ValidationMode::Strict).unwrap();
        let r = ds.dataset.records[0];
        assert_eq!(r.context.direction, Some(Direction::Posterior));
        assert_eq!(r.source, Source::Experiment);
    }
}
