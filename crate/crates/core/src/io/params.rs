//! Plain-text parameter files.
//!
//! ```text
//! # comment
//! [shadowing torso-915]
//! interpolation = linear          # or: nearest
//! bins = 10:0.9, 20:1.6, 30:2.8   # depth_mm:variance_db2
//!
//! [model 915MHz heart]            # band and region
//! pl0_db = 27.2
//! m_db = 3.9
//! sigma_db = 2.6                  # or: shadowing = <table name>
//!
//! [model 915MHz torso posterior]  # band, region and direction
//! ...
//! ```
//!
//! Section order is free; a `shadowing` reference may name a table defined
//! later in the file.

use std::collections::BTreeMap;
use std::path::Path;

use super::{read_file, IngestError};
use crate::model::{
    AnatomicalContext, Direction, FrequencyBand, Interpolation, ModelError, PathLossParams, Region,
    ShadowingProfile,
};

/// Parameter file shipped with the crate.
pub const BUNDLED_PARAMS: &str = include_str!("../../data/params.ini");

#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEntry {
    pub params: PathLossParams,
    pub profile: ShadowingProfile,
    /// Name of the referenced shadowing table, if any.
    pub shadowing_table: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamRegistry {
    entries: BTreeMap<(FrequencyBand, AnatomicalContext), RegistryEntry>,
    tables: BTreeMap<String, ShadowingProfile>,
}

impl ParamRegistry {
    pub fn bundled() -> Self {
        parse_params(BUNDLED_PARAMS).expect("bundled parameter file is valid")
    }

    pub fn get(&self, band: FrequencyBand, context: AnatomicalContext) -> Option<&RegistryEntry> {
        self.entries.get(&(band, context))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(FrequencyBand, AnatomicalContext), &RegistryEntry)> {
        self.entries.iter()
    }

    pub fn shadowing_table(&self, name: &str) -> Option<&ShadowingProfile> {
        self.tables.get(name)
    }

    pub fn shadowing_tables(&self) -> impl Iterator<Item = (&String, &ShadowingProfile)> {
        self.tables.iter()
    }
}

enum SectionKind {
    Model { band: FrequencyBand, context: AnatomicalContext },
    Shadowing { name: String },
}

struct Section {
    line: usize,
    header: String,
    kind: SectionKind,
    fields: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn require(&self, field: &str) -> Result<(usize, &str), IngestError> {
        self.fields.get(field).map(|(l, v)| (*l, v.as_str())).ok_or_else(|| IngestError::MissingRequiredField {
            line: self.line,
            section: self.header.clone(),
            field: field.into(),
        })
    }

    fn number(&self, field: &str) -> Result<Option<f64>, IngestError> {
        self.fields
            .get(field)
            .map(|(line, v)| {
                v.parse().map_err(|_| IngestError::InvalidValue {
                    line: *line,
                    column: field.into(),
                    message: format!("'{v}' is not a number"),
                })
            })
            .transpose()
    }
}

fn parse_header(header: &str, line: usize) -> Result<SectionKind, IngestError> {
    let parts: Vec<&str> = header.split_whitespace().collect();
    let syntax = |message: String| IngestError::Syntax { line, message };
    match parts.as_slice() {
        ["shadowing", name] => Ok(SectionKind::Shadowing { name: name.to_string() }),
        ["model", band, region, rest @ ..] if rest.len() <= 1 => {
            let band: FrequencyBand = band.parse().map_err(syntax)?;
            let region: Region = region.parse().map_err(syntax)?;
            let direction = rest.first().map(|d| d.parse::<Direction>()).transpose().map_err(syntax)?;
            Ok(SectionKind::Model { band, context: AnatomicalContext { region, direction } })
        }
        _ => Err(syntax(format!(
            "unrecognized section [{header}]; expected [model <band> <region> [direction]] or [shadowing <name>]"
        ))),
    }
}

fn parse_bins(text: &str, line: usize) -> Result<Vec<(f64, f64)>, IngestError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let bad = || IngestError::InvalidValue {
                line,
                column: "bins".into(),
                message: format!("'{pair}' is not depth_mm:variance_db2"),
            };
            let (d, v) = pair.split_once(':').ok_or_else(bad)?;
            Ok((d.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn model_error(line: usize, column: &str, e: ModelError) -> IngestError {
    IngestError::InvalidValue { line, column: column.into(), message: e.to_string() }
}

/// Parses parameter-file text into a registry.
pub fn parse_params(text: &str) -> Result<ParamRegistry, IngestError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let header = inner
                .strip_suffix(']')
                .ok_or_else(|| IngestError::Syntax { line, message: "unterminated section header".into() })?
                .trim()
                .to_string();
            let kind = parse_header(&header, line)?;
            sections.push(Section { line, header, kind, fields: BTreeMap::new() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| IngestError::Syntax { line, message: format!("expected key = value, got '{content}'") })?;
        let section = sections
            .last_mut()
            .ok_or_else(|| IngestError::Syntax { line, message: "field outside of any section".into() })?;
        let key = key.trim().to_string();
        if section.fields.contains_key(&key) {
            return Err(IngestError::DuplicateKey { line, key: format!("{} in [{}]", key, section.header) });
        }
        section.fields.insert(key, (line, value.trim().to_string()));
    }

    let mut registry = ParamRegistry::default();
    for s in &sections {
        if let SectionKind::Shadowing { name } = &s.kind {
            let (line, bins) = s.require("bins")?;
            let interpolation = match s.fields.get("interpolation").map(|(l, v)| (*l, v.as_str())) {
                None | Some((_, "linear")) => Interpolation::LinearInVariance,
                Some((_, "nearest")) => Interpolation::NearestBin,
                Some((l, other)) => {
                    return Err(IngestError::InvalidValue {
                        line: l,
                        column: "interpolation".into(),
                        message: format!("'{other}' is not linear or nearest"),
                    })
                }
            };
            let profile = ShadowingProfile::new(parse_bins(bins, line)?, interpolation)
                .map_err(|e| model_error(line, "bins", e))?;
            if registry.tables.insert(name.clone(), profile).is_some() {
                return Err(IngestError::DuplicateKey { line: s.line, key: format!("shadowing table {name}") });
            }
        }
    }

    for s in &sections {
        let SectionKind::Model { band, context } = s.kind else { continue };
        let (pl0_line, _) = s.require("pl0_db")?;
        let pl0 = s.number("pl0_db")?.expect("required above");
        let (m_line, _) = s.require("m_db")?;
        let m = s.number("m_db")?.expect("required above");
        let params = PathLossParams::new(pl0, m, band, context)
            .map_err(|e| if m > 0.0 { model_error(pl0_line, "pl0_db", e) } else { model_error(m_line, "m_db", e) })?;

        let (profile, shadowing_table) = match (s.number("sigma_db")?, s.fields.get("shadowing")) {
            (Some(sigma), None) => {
                let line = s.fields["sigma_db"].0;
                (ShadowingProfile::constant(sigma).map_err(|e| model_error(line, "sigma_db", e))?, None)
            }
            (None, Some((line, name))) => {
                let table = registry.tables.get(name).ok_or_else(|| IngestError::InvalidValue {
                    line: *line,
                    column: "shadowing".into(),
                    message: format!("no [shadowing {name}] section"),
                })?;
                (table.clone(), Some(name.clone()))
            }
            (Some(_), Some((line, _))) => {
                return Err(IngestError::InvalidValue {
                    line: *line,
                    column: "shadowing".into(),
                    message: "give either sigma_db or shadowing, not both".into(),
                })
            }
            (None, None) => {
                return Err(IngestError::MissingRequiredField {
                    line: s.line,
                    section: s.header.clone(),
                    field: "sigma_db or shadowing".into(),
                })
            }
        };
        let entry = RegistryEntry { params, profile, shadowing_table };
        if registry.entries.insert((band, context), entry).is_some() {
            return Err(IngestError::DuplicateKey { line: s.line, key: format!("({band}, {context})") });
        }
    }
    Ok(registry)
}

pub fn load_params(path: &Path) -> Result<ParamRegistry, IngestError> {
    let bytes = read_file(path)?;
    parse_params(&String::from_utf8_lossy(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = "[model 915MHz heart]\npl0_db = 30\nm_db = 4\nsigma_db = 2\n";

    #[test]
    fn minimal_file() {
        let reg = parse_params(ONE).unwrap();
        assert_eq!(reg.len(), 1);
        let e = reg.get(FrequencyBand::Ism915, AnatomicalContext::region(Region::Heart)).unwrap();
        assert_eq!(e.params.pl0_db(), 30.0);
        assert_eq!(e.profile.variance_at(50.0).unwrap(), 4.0);
    }

    #[test]
    fn duplicate_entry() {
        let text = format!("{ONE}\n[model 915 heart]\npl0_db = 31\nm_db = 4\nsigma_db = 2\n");
        let e = parse_params(&text).unwrap_err();
        assert!(matches!(e, IngestError::DuplicateKey { line: 6, .. }), "{e}");
    }

    #[test]
    fn duplicate_field() {
        let e = parse_params("[model 915MHz heart]\npl0_db = 30\npl0_db = 31\n").unwrap_err();
        assert!(matches!(e, IngestError::DuplicateKey { line: 3, .. }));
    }

    #[test]
    fn missing_fields() {
        let e = parse_params("[model 915MHz heart]\npl0_db = 30\nsigma_db = 1\n").unwrap_err();
        assert!(matches!(e, IngestError::MissingRequiredField { line: 1, ref field, .. } if field == "m_db"));
        let e = parse_params("[model 915MHz heart]\npl0_db = 30\nm_db = 3\n").unwrap_err();
        assert!(matches!(e, IngestError::MissingRequiredField { .. }));
    }

    #[test]
    fn table_reference_and_direction() {
        let text = "[model 2.4GHz torso anterior]\npl0_db = 30\nm_db = 8\nshadowing = t\n\n\
                    [shadowing t]\ninterpolation = nearest\nbins = 10:1, 50:4, 100:9\n";
        let reg = parse_params(text).unwrap();
        let e = reg.get(FrequencyBand::Ism2400, AnatomicalContext::direction(Direction::Anterior)).unwrap();
        assert_eq!(e.shadowing_table.as_deref(), Some("t"));
        assert_eq!(e.profile.interpolation(), Interpolation::NearestBin);
        assert_eq!(e.profile.variance_at(60.0).unwrap(), 4.0);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(parse_params("pl0_db = 3\n"), Err(IngestError::Syntax { line: 1, .. })));
        assert!(matches!(parse_params("[model 915MHz liver]\n"), Err(IngestError::Syntax { .. })));
        assert!(matches!(
            parse_params("[model 915MHz heart]\npl0_db = x\nm_db = 3\nsigma_db = 1\n"),
            Err(IngestError::InvalidValue { line: 2, .. })
        ));
        assert!(matches!(
            parse_params("[model 915MHz heart]\npl0_db = 3\nm_db = 3\nshadowing = nope\n"),
            Err(IngestError::InvalidValue { line: 4, .. })
        ));
        assert!(matches!(
            parse_params("[shadowing t]\nbins = 20:1, 10:2\n"),
            Err(IngestError::InvalidValue { line: 2, .. })
        ));
    }
}
