//! Parsing, validation, canonicalization and deduplication of hire records.
//!
//! The input is a delimited text file with a header row, one row per doctoral
//! graduate entering a first teaching post. Institution names are resolved
//! against an [`InstitutionRegistry`] which aliases spelling variants,
//! aggregates every overseas awarding unit into a single node, and carries
//! free-form tags used downstream (e.g. `tsinghua`, `peking`,
//! `always_include`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Earliest year accepted in any record.
pub const MIN_YEAR: i32 = 1900;
/// Latest year accepted in any record.
pub const MAX_YEAR: i32 = 2100;

/// Default canonical id of the aggregated overseas node.
pub const DEFAULT_OVERSEAS_ID: &str = "OVERSEAS";

/// Tag marking registry entries that belong in every network node set.
pub const ALWAYS_INCLUDE_TAG: &str = "always_include";

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// A structurally valid row, before year-rule validation and name resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 0-based data-row index in the source file (header excluded).
    pub row_index: usize,
    pub person_key: Option<String>,
    pub degree_unit: String,
    pub employer_unit: String,
    pub graduation_year: i32,
    pub employment_year: i32,
}

/// An admitted hire record with canonical institution ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HireRecord {
    pub person_key: Option<String>,
    /// Canonical id of the doctoral awarding unit (the trainer).
    pub degree_unit: String,
    /// Canonical id of the hiring unit (the employer).
    pub employer_unit: String,
    pub graduation_year: i32,
    pub employment_year: i32,
}

/// Admission rule relating employment year to graduation year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YearRule {
    /// Employment strictly after graduation.
    #[default]
    Strict,
    /// Employment in or after the graduation year.
    Inclusive,
}

/// Outcome of validating one record. Rejection is a value, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Admitted,
    Rejected(String),
}

/// One rejected row with the reason it was dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub row_index: usize,
    pub reason: String,
}

/// Bookkeeping for a full ingest run.
///
/// Invariant after the pipeline completes:
/// `admitted + rejected.len() + deduplicated == total_rows`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestDiagnostics {
    pub total_rows: usize,
    pub admitted: usize,
    pub rejected: Vec<Rejection>,
    pub deduplicated: usize,
    /// Names absent from the registry, auto-registered as fresh canonical ids.
    pub unknown_institutions: Vec<String>,
}

// ---------------------------------------------------------------------------
// Parse configuration
// ---------------------------------------------------------------------------

/// Maps the five required record fields to column names in the input header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub person: String,
    pub degree_unit: String,
    pub employer_unit: String,
    pub graduation_year: String,
    pub employment_year: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            person: "person".into(),
            degree_unit: "degree_unit".into(),
            employer_unit: "employer_unit".into(),
            graduation_year: "graduation_year".into(),
            employment_year: "employment_year".into(),
        }
    }
}

/// Options for [`parse_records`]. Input is always UTF-8.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub schema: ColumnSchema,
    pub delimiter: u8,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { schema: ColumnSchema::default(), delimiter: b',' }
    }
}

// ---------------------------------------------------------------------------
// Institution registry
// ---------------------------------------------------------------------------

/// One canonical institution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Institution {
    pub canonical_id: String,
    pub display_name: String,
    pub aliases: Vec<String>,
    pub is_overseas: bool,
    pub tags: BTreeSet<String>,
}

/// Canonical institution identities.
///
/// The registry always contains exactly one synthetic entry for the
/// aggregated overseas node; every entry flagged `is_overseas` resolves to it.
/// Unknown names looked up through [`InstitutionRegistry::canonicalize_name`]
/// are auto-registered under their own name so that partial registries still
/// produce a network.
#[derive(Debug, Clone)]
pub struct InstitutionRegistry {
    overseas_id: String,
    entries: BTreeMap<String, Institution>,
    // alias or display name or canonical id -> canonical id
    lookup: HashMap<String, String>,
}

impl InstitutionRegistry {
    pub fn new() -> Self {
        Self::with_overseas_id(DEFAULT_OVERSEAS_ID)
    }

    pub fn with_overseas_id(overseas_id: impl Into<String>) -> Self {
        let overseas_id = overseas_id.into();
        let mut reg = Self {
            overseas_id: overseas_id.clone(),
            entries: BTreeMap::new(),
            lookup: HashMap::new(),
        };
        reg.insert(Institution {
            canonical_id: overseas_id.clone(),
            display_name: "Aggregated overseas awarding units".into(),
            aliases: Vec::new(),
            is_overseas: true,
            tags: BTreeSet::new(),
        })
        .expect("fresh registry cannot conflict");
        reg
    }

    /// Canonical id of the aggregated overseas node.
    pub fn overseas_id(&self) -> &str {
        &self.overseas_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Institution> {
        self.entries.values()
    }

    pub fn get(&self, canonical_id: &str) -> Option<&Institution> {
        self.entries.get(canonical_id)
    }

    /// Adds an institution, rejecting duplicate ids and ambiguous aliases.
    pub fn insert(&mut self, inst: Institution) -> Result<()> {
        if inst.canonical_id == self.overseas_id && self.entries.contains_key(&self.overseas_id) {
            // Allow the input file to re-describe the overseas node.
            let existing = self.entries.get_mut(&self.overseas_id).expect("present");
            existing.display_name = inst.display_name;
            for alias in inst.aliases {
                Self::add_lookup(&mut self.lookup, &alias, &self.overseas_id)?;
                existing.aliases.push(alias);
            }
            existing.tags.extend(inst.tags);
            return Ok(());
        }
        if self.entries.contains_key(&inst.canonical_id) {
            return Err(Error::Config(format!(
                "duplicate canonical_id `{}` in registry",
                inst.canonical_id
            )));
        }
        Self::add_lookup(&mut self.lookup, &inst.canonical_id, &inst.canonical_id)?;
        if inst.display_name != inst.canonical_id {
            Self::add_lookup(&mut self.lookup, &inst.display_name, &inst.canonical_id)?;
        }
        for alias in &inst.aliases {
            Self::add_lookup(&mut self.lookup, alias, &inst.canonical_id)?;
        }
        self.entries.insert(inst.canonical_id.clone(), inst);
        Ok(())
    }

    fn add_lookup(lookup: &mut HashMap<String, String>, key: &str, id: &str) -> Result<()> {
        match lookup.get(key) {
            Some(existing) if existing != id => Err(Error::Config(format!(
                "alias `{key}` maps to both `{existing}` and `{id}`"
            ))),
            _ => {
                lookup.insert(key.to_string(), id.to_string());
                Ok(())
            }
        }
    }

    /// Resolves a name to its registry entry without registering anything.
    pub fn resolve(&self, name: &str) -> Option<&Institution> {
        self.lookup.get(name).and_then(|id| self.entries.get(id))
    }

    /// Resolves a name to a canonical id, auto-registering unknown names.
    ///
    /// Overseas entries all map to the single aggregated overseas node.
    /// Returns the id and whether the name was previously unknown.
    pub fn canonicalize_name(&mut self, name: &str) -> (String, bool) {
        if let Some(inst) = self.resolve(name) {
            let id = if inst.is_overseas { self.overseas_id.clone() } else { inst.canonical_id.clone() };
            return (id, false);
        }
        self.insert(Institution {
            canonical_id: name.to_string(),
            display_name: name.to_string(),
            aliases: Vec::new(),
            is_overseas: false,
            tags: BTreeSet::new(),
        })
        .expect("unknown name cannot conflict with lookup");
        (name.to_string(), true)
    }

    /// Canonical ids of entries carrying `tag`, in id order.
    pub fn tagged(&self, tag: &str) -> Vec<String> {
        self.entries
            .values()
            .filter(|e| e.tags.contains(tag))
            .map(|e| e.canonical_id.clone())
            .collect()
    }

    /// Entries that must be present in every network node set.
    pub fn always_include_ids(&self) -> Vec<String> {
        self.tagged(ALWAYS_INCLUDE_TAG)
    }

    /// Loads a registry from CSV with columns
    /// `canonical_id,display_name,aliases,is_overseas,tags`
    /// where `aliases` and `tags` are pipe-separated.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut registry = Self::new();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let id_col = col("canonical_id")?;
        let name_col = col("display_name")?;
        let alias_col = col("aliases")?;
        let overseas_col = col("is_overseas")?;
        let tags_col = col("tags")?;

        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let field = |idx: usize| row.get(idx).unwrap_or("").to_string();
            let canonical_id = field(id_col);
            if canonical_id.is_empty() {
                return Err(Error::Config(format!("registry row {i}: empty canonical_id")));
            }
            let split = |s: String| -> Vec<String> {
                s.split('|').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
            };
            let is_overseas = match field(overseas_col).to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" | "" => false,
                other => {
                    return Err(Error::Config(format!(
                        "registry row {i}: is_overseas must be true/false, got `{other}`"
                    )))
                }
            };
            let display_name = match field(name_col) {
                s if s.is_empty() => canonical_id.clone(),
                s => s,
            };
            registry.insert(Institution {
                canonical_id,
                display_name,
                aliases: split(field(alias_col)),
                is_overseas,
                tags: split(field(tags_col)).into_iter().collect(),
            })?;
        }
        Ok(registry)
    }
}

impl Default for InstitutionRegistry {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses a delimited UTF-8 stream into raw records.
///
/// Malformed rows (missing field, non-integer or out-of-range year) are
/// recorded in the diagnostics with a reason instead of failing the run.
/// A header column named in the schema but absent from the stream is fatal.
/// Lines starting with `#` are comments, so generated files with provenance
/// headers feed straight back in.
pub fn parse_records<R: Read>(
    reader: R,
    options: &ParseOptions,
) -> Result<(Vec<RawRecord>, IngestDiagnostics)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .delimiter(options.delimiter)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &String| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))
    };
    let schema = &options.schema;
    let person_col = col(&schema.person)?;
    let degree_col = col(&schema.degree_unit)?;
    let employer_col = col(&schema.employer_unit)?;
    let grad_col = col(&schema.graduation_year)?;
    let emp_col = col(&schema.employment_year)?;

    let mut records = Vec::new();
    let mut diagnostics = IngestDiagnostics::default();

    for (row_index, row) in rdr.records().enumerate() {
        let row = row.map_err(Error::Csv)?;
        diagnostics.total_rows += 1;

        let reject = |reason: String, diagnostics: &mut IngestDiagnostics| {
            diagnostics.rejected.push(Rejection { row_index, reason });
        };

        let text = |idx: usize| row.get(idx).unwrap_or("").trim().to_string();
        let year = |idx: usize, name: &str| -> std::result::Result<i32, String> {
            let raw = row.get(idx).unwrap_or("").trim();
            if raw.is_empty() {
                return Err(format!("missing {name}"));
            }
            let value: i32 = raw.parse().map_err(|_| format!("non-integer {name}"))?;
            if !(MIN_YEAR..=MAX_YEAR).contains(&value) {
                return Err(format!("{name} out of range: {value}"));
            }
            Ok(value)
        };

        let degree_unit = text(degree_col);
        if degree_unit.is_empty() {
            reject(format!("missing {}", schema.degree_unit), &mut diagnostics);
            continue;
        }
        let employer_unit = text(employer_col);
        if employer_unit.is_empty() {
            reject(format!("missing {}", schema.employer_unit), &mut diagnostics);
            continue;
        }
        let graduation_year = match year(grad_col, &schema.graduation_year) {
            Ok(y) => y,
            Err(reason) => {
                reject(reason, &mut diagnostics);
                continue;
            }
        };
        let employment_year = match year(emp_col, &schema.employment_year) {
            Ok(y) => y,
            Err(reason) => {
                reject(reason, &mut diagnostics);
                continue;
            }
        };
        let person = text(person_col);
        records.push(RawRecord {
            row_index,
            person_key: if person.is_empty() { None } else { Some(person) },
            degree_unit,
            employer_unit,
            graduation_year,
            employment_year,
        });
    }
    diagnostics.admitted = records.len();
    Ok((records, diagnostics))
}

/// Applies the year rule deciding whether a record is a first teaching post.
pub fn validate_record(record: &RawRecord, rule: YearRule) -> Verdict {
    let ok = match rule {
        YearRule::Strict => record.employment_year > record.graduation_year,
        YearRule::Inclusive => record.employment_year >= record.graduation_year,
    };
    if ok {
        Verdict::Admitted
    } else {
        let relation = match rule {
            YearRule::Strict => "not later than",
            YearRule::Inclusive => "earlier than",
        };
        Verdict::Rejected(format!(
            "employment_year {} {} graduation_year {}",
            record.employment_year, relation, record.graduation_year
        ))
    }
}

/// Replaces institution names with canonical ids.
///
/// Returns the canonical record plus any names that were unknown to the
/// registry and got auto-registered (0, 1 or 2 entries).
pub fn canonicalize(
    record: RawRecord,
    registry: &mut InstitutionRegistry,
) -> (HireRecord, Vec<String>) {
    let mut unknown = Vec::new();
    let (degree_unit, fresh) = registry.canonicalize_name(&record.degree_unit);
    if fresh {
        unknown.push(record.degree_unit.clone());
    }
    let (employer_unit, fresh) = registry.canonicalize_name(&record.employer_unit);
    if fresh {
        unknown.push(record.employer_unit.clone());
    }
    (
        HireRecord {
            person_key: record.person_key,
            degree_unit,
            employer_unit,
            graduation_year: record.graduation_year,
            employment_year: record.employment_year,
        },
        unknown,
    )
}

/// Collapses records identical on `(person_key, employer_unit,
/// employment_year)`, keeping the first occurrence. Records without a person
/// key cannot establish identity and are never collapsed.
pub fn deduplicate(records: Vec<HireRecord>) -> (Vec<HireRecord>, usize) {
    let mut seen: BTreeSet<(String, String, i32)> = BTreeSet::new();
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped = 0usize;
    for record in records {
        match &record.person_key {
            Some(person) => {
                let key = (person.clone(), record.employer_unit.clone(), record.employment_year);
                if seen.insert(key) {
                    kept.push(record);
                } else {
                    dropped += 1;
                }
            }
            None => kept.push(record),
        }
    }
    (kept, dropped)
}

/// Full ingest pipeline: parse, validate, canonicalize, deduplicate.
pub fn ingest_records<R: Read>(
    reader: R,
    options: &ParseOptions,
    rule: YearRule,
    registry: &mut InstitutionRegistry,
) -> Result<(Vec<HireRecord>, IngestDiagnostics)> {
    let (raw, mut diagnostics) = parse_records(reader, options)?;

    let mut canonical = Vec::with_capacity(raw.len());
    for record in raw {
        match validate_record(&record, rule) {
            Verdict::Admitted => {
                let (hire, unknown) = canonicalize(record, registry);
                for name in unknown {
                    if !diagnostics.unknown_institutions.contains(&name) {
                        diagnostics.unknown_institutions.push(name);
                    }
                }
                canonical.push(hire);
            }
            Verdict::Rejected(reason) => {
                diagnostics.rejected.push(Rejection { row_index: record.row_index, reason });
            }
        }
    }

    let (records, deduplicated) = deduplicate(canonical);
    diagnostics.deduplicated = deduplicated;
    diagnostics.admitted = records.len();
    debug_assert_eq!(
        diagnostics.admitted + diagnostics.rejected.len() + diagnostics.deduplicated,
        diagnostics.total_rows
    );
    Ok((records, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(grad: i32, emp: i32) -> RawRecord {
        RawRecord {
            row_index: 0,
            person_key: Some("p".into()),
            degree_unit: "A".into(),
            employer_unit: "B".into(),
            graduation_year: grad,
            employment_year: emp,
        }
    }

    #[test]
    fn parse_maps_fields_directly() {
        let csv = "person,degree_unit,employer_unit,graduation_year,employment_year\n\
                   a,Tsinghua,Nankai,2005,2006\n";
        let (records, diagnostics) = parse_records(csv.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.degree_unit, "Tsinghua");
        assert_eq!(r.employer_unit, "Nankai");
        assert_eq!(r.graduation_year, 2005);
        assert_eq!(r.employment_year, 2006);
        assert_eq!(r.person_key.as_deref(), Some("a"));
        assert_eq!(diagnostics.total_rows, 1);
        assert!(diagnostics.rejected.is_empty());
    }

    #[test]
    fn parse_rejects_non_integer_year() {
        let csv = "person,degree_unit,employer_unit,graduation_year,employment_year\n\
                   b,Tsinghua,Nankai,2005,abc\n";
        let (records, diagnostics) = parse_records(csv.as_bytes(), &ParseOptions::default()).unwrap();
        assert!(records.is_empty());
        assert_eq!(diagnostics.rejected.len(), 1);
        assert_eq!(diagnostics.rejected[0].reason, "non-integer employment_year");
    }

    #[test]
    fn parse_counts_over_fixture_with_two_bad_rows() {
        // 10 data rows, rows 3 and 7 malformed.
        let mut csv = String::from("person,degree_unit,employer_unit,graduation_year,employment_year\n");
        for i in 0..10 {
            match i {
                3 => csv.push_str("p3,U,V,2001,\n"),
                7 => csv.push_str("p7,U,,2001,2002\n"),
                _ => csv.push_str(&format!("p{i},U,V,2001,2002\n")),
            }
        }
        let (records, diagnostics) = parse_records(csv.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(diagnostics.total_rows, 10);
        assert_eq!(records.len(), 8);
        assert_eq!(diagnostics.admitted, 8);
        assert_eq!(diagnostics.rejected.len(), 2);
        assert_eq!(diagnostics.rejected[0].row_index, 3);
        assert_eq!(diagnostics.rejected[1].row_index, 7);
    }

    #[test]
    fn parse_rejects_out_of_range_year() {
        let csv = "person,degree_unit,employer_unit,graduation_year,employment_year\n\
                   a,U,V,1850,1855\n";
        let (_, diagnostics) = parse_records(csv.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(diagnostics.rejected[0].reason, "graduation_year out of range: 1850");
    }

    #[test]
    fn parse_fails_fast_on_missing_schema_column() {
        let csv = "person,degree_unit,employer_unit,graduation_year\na,U,V,2001\n";
        let err = parse_records(csv.as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "employment_year"));
    }

    #[test]
    fn parse_supports_custom_delimiter_and_schema() {
        let csv = "who;from;to;grad;emp\nx;U;V;2000;2001\n";
        let options = ParseOptions {
            schema: ColumnSchema {
                person: "who".into(),
                degree_unit: "from".into(),
                employer_unit: "to".into(),
                graduation_year: "grad".into(),
                employment_year: "emp".into(),
            },
            delimiter: b';',
        };
        let (records, _) = parse_records(csv.as_bytes(), &options).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].degree_unit, "U");
    }

    #[test]
    fn strict_rule_admits_later_employment() {
        assert_eq!(validate_record(&raw(2005, 2006), YearRule::Strict), Verdict::Admitted);
    }

    #[test]
    fn strict_rule_rejects_same_year() {
        match validate_record(&raw(2006, 2006), YearRule::Strict) {
            Verdict::Rejected(reason) => {
                assert_eq!(reason, "employment_year 2006 not later than graduation_year 2006")
            }
            Verdict::Admitted => panic!("boundary case must be rejected under strict rule"),
        }
    }

    #[test]
    fn inclusive_rule_admits_same_year() {
        assert_eq!(validate_record(&raw(2006, 2006), YearRule::Inclusive), Verdict::Admitted);
    }

    #[test]
    fn canonicalize_aggregates_overseas() {
        let mut registry = InstitutionRegistry::new();
        registry
            .insert(Institution {
                canonical_id: "harvard".into(),
                display_name: "Harvard".into(),
                aliases: vec![],
                is_overseas: true,
                tags: BTreeSet::new(),
            })
            .unwrap();
        let mut record = raw(2000, 2001);
        record.degree_unit = "Harvard".into();
        let (hire, unknown) = canonicalize(record, &mut registry);
        assert_eq!(hire.degree_unit, DEFAULT_OVERSEAS_ID);
        // employer "B" was unknown and got auto-registered
        assert_eq!(unknown, vec!["B".to_string()]);
    }

    #[test]
    fn canonicalize_resolves_alias() {
        let mut registry = InstitutionRegistry::new();
        registry
            .insert(Institution {
                canonical_id: "tsinghua_u".into(),
                display_name: "Tsinghua University".into(),
                aliases: vec!["清华大学".into()],
                is_overseas: false,
                tags: BTreeSet::new(),
            })
            .unwrap();
        let mut record = raw(2000, 2001);
        record.degree_unit = "清华大学".into();
        let (hire, _) = canonicalize(record, &mut registry);
        assert_eq!(hire.degree_unit, "tsinghua_u");
    }

    #[test]
    fn canonicalize_registers_unknown_names() {
        let mut registry = InstitutionRegistry::new();
        let mut record = raw(2000, 2001);
        record.degree_unit = "Unknown College".into();
        let (hire, unknown) = canonicalize(record, &mut registry);
        assert_eq!(hire.degree_unit, "Unknown College");
        assert!(unknown.contains(&"Unknown College".to_string()));
        assert!(registry.get("Unknown College").is_some());
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut registry = InstitutionRegistry::new();
        registry
            .insert(Institution {
                canonical_id: "nk".into(),
                display_name: "Nankai".into(),
                aliases: vec!["NKU".into()],
                is_overseas: false,
                tags: BTreeSet::new(),
            })
            .unwrap();
        let mut record = raw(2000, 2001);
        record.degree_unit = "NKU".into();
        record.employer_unit = "Mystery U".into();
        let (once, _) = canonicalize(record.clone(), &mut registry);
        let again = RawRecord {
            row_index: 0,
            person_key: once.person_key.clone(),
            degree_unit: once.degree_unit.clone(),
            employer_unit: once.employer_unit.clone(),
            graduation_year: once.graduation_year,
            employment_year: once.employment_year,
        };
        let (twice, unknown) = canonicalize(again, &mut registry);
        assert_eq!(once, twice);
        assert!(unknown.is_empty());
    }

    #[test]
    fn duplicate_rows_collapse_to_first() {
        let record = HireRecord {
            person_key: Some("p1".into()),
            degree_unit: "A".into(),
            employer_unit: "B".into(),
            graduation_year: 2000,
            employment_year: 2001,
        };
        let (kept, dropped) = deduplicate(vec![record.clone(), record.clone()]);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped, 1);
    }

    #[test]
    fn different_employment_years_are_not_duplicates() {
        let a = HireRecord {
            person_key: Some("p1".into()),
            degree_unit: "A".into(),
            employer_unit: "B".into(),
            graduation_year: 2000,
            employment_year: 2001,
        };
        let mut b = a.clone();
        b.employment_year = 2002;
        let (kept, dropped) = deduplicate(vec![a, b]);
        assert_eq!(kept.len(), 2);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn empty_input_deduplicates_to_empty() {
        let (kept, dropped) = deduplicate(Vec::new());
        assert!(kept.is_empty());
        assert_eq!(dropped, 0);
    }

    #[test]
    fn records_without_person_key_skip_dedup() {
        let record = HireRecord {
            person_key: None,
            degree_unit: "A".into(),
            employer_unit: "B".into(),
            graduation_year: 2000,
            employment_year: 2001,
        };
        let (kept, dropped) = deduplicate(vec![record.clone(), record]);
        assert_eq!(kept.len(), 2);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn pipeline_counts_reconcile() {
        let csv = "person,degree_unit,employer_unit,graduation_year,employment_year\n\
                   a,U,V,2000,2001\n\
                   a,U,V,2000,2001\n\
                   b,U,V,2003,2002\n\
                   c,U,V,2001,oops\n\
                   d,W,V,2004,2005\n";
        let mut registry = InstitutionRegistry::new();
        let (records, diagnostics) =
            ingest_records(csv.as_bytes(), &ParseOptions::default(), YearRule::Strict, &mut registry)
                .unwrap();
        assert_eq!(diagnostics.total_rows, 5);
        assert_eq!(records.len(), 2);
        assert_eq!(diagnostics.admitted, 2);
        assert_eq!(diagnostics.rejected.len(), 2);
        assert_eq!(diagnostics.deduplicated, 1);
        assert_eq!(
            diagnostics.admitted + diagnostics.rejected.len() + diagnostics.deduplicated,
            diagnostics.total_rows
        );
        assert_eq!(diagnostics.unknown_institutions, vec!["U", "V", "W"]);
    }

    #[test]
    fn strict_pipeline_never_admits_non_later_employment() {
        let csv = "person,degree_unit,employer_unit,graduation_year,employment_year\n\
                   a,U,V,2001,2001\n\
                   b,U,V,2001,2000\n\
                   c,U,V,2001,2002\n";
        let mut registry = InstitutionRegistry::new();
        let (records, _) =
            ingest_records(csv.as_bytes(), &ParseOptions::default(), YearRule::Strict, &mut registry)
                .unwrap();
        assert!(records.iter().all(|r| r.employment_year > r.graduation_year));
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn registry_round_trips_from_csv() {
        let csv = "canonical_id,display_name,aliases,is_overseas,tags\n\
                   tsinghua_u,Tsinghua University,清华大学|THU,false,tsinghua|always_include\n\
                   harvard,Harvard University,,true,\n";
        let registry = InstitutionRegistry::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(registry.len(), 3); // includes the overseas aggregate
        assert_eq!(registry.resolve("THU").unwrap().canonical_id, "tsinghua_u");
        assert!(registry.resolve("Harvard University").unwrap().is_overseas);
        assert_eq!(registry.tagged("tsinghua"), vec!["tsinghua_u".to_string()]);
        assert_eq!(registry.always_include_ids(), vec!["tsinghua_u".to_string()]);
    }

    #[test]
    fn registry_rejects_ambiguous_alias() {
        let csv = "canonical_id,display_name,aliases,is_overseas,tags\n\
                   a,A,shared,false,\n\
                   b,B,shared,false,\n";
        let err = InstitutionRegistry::from_csv(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn registry_rejects_duplicate_canonical_id() {
        let csv = "canonical_id,display_name,aliases,is_overseas,tags\n\
                   a,A,,false,\n\
                   a,A again,,false,\n";
        assert!(InstitutionRegistry::from_csv(csv.as_bytes()).is_err());
    }
}
