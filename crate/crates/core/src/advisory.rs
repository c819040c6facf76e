//! OSV advisory ingestion.
//!
//! Only `id`, `aliases`, `affected[].package.{ecosystem,name}` and
//! `affected[].versions` are read. Affected blocks that list version ranges
//! without explicit versions are not resolved.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::coordinate::{Coordinate, InvalidCoordinate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdvisoryError {
    #[error("malformed advisory {source_name}: {reason}")]
    MalformedAdvisory { source_name: String, reason: String },
    #[error("cannot read advisory directory {path}: {reason}")]
    Unreadable { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityRecord {
    pub advisory_id: String,
    pub cve_ids: BTreeSet<String>,
    pub affected: BTreeSet<Coordinate>,
}

impl VulnerabilityRecord {
    /// CVE ids, or the advisory id when there are none.
    pub fn effective_ids(&self) -> BTreeSet<String> {
        if self.cve_ids.is_empty() {
            BTreeSet::from([self.advisory_id.clone()])
        } else {
            self.cve_ids.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    /// No affected block in the Maven ecosystem.
    NotMaven,
    /// Maven blocks exist, but none lists explicit versions.
    RangesOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Record(VulnerabilityRecord),
    Skip(SkipReason),
}

#[derive(Deserialize)]
struct OsvDocument {
    id: String,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(default)]
    affected: Vec<OsvAffected>,
}

#[derive(Deserialize)]
struct OsvAffected {
    package: Option<OsvPackage>,
    #[serde(default)]
    versions: Vec<String>,
}

#[derive(Deserialize)]
struct OsvPackage {
    ecosystem: String,
    name: String,
}

/// `^CVE-\d{4}-\d{4,}$`
pub fn is_cve_id(s: &str) -> bool {
    let Some(rest) = s.strip_prefix("CVE-") else { return false };
    let Some((year, number)) = rest.split_once('-') else { return false };
    let digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    year.len() == 4 && digits(year) && number.len() >= 4 && digits(number)
}

/// Parses one OSV document given as JSON text.
pub fn parse_advisory_str(text: &str, source_name: &str) -> Result<Parsed, AdvisoryError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| AdvisoryError::MalformedAdvisory {
        source_name: source_name.to_string(),
        reason: e.to_string(),
    })?;
    parse_advisory(&value, source_name)
}

pub fn parse_advisory(doc: &serde_json::Value, source_name: &str) -> Result<Parsed, AdvisoryError> {
    let malformed = |reason: String| AdvisoryError::MalformedAdvisory { source_name: source_name.to_string(), reason };
    let doc = OsvDocument::deserialize(doc).map_err(|e| malformed(e.to_string()))?;
    if doc.id.trim().is_empty() {
        return Err(malformed("empty id".into()));
    }

    let mut affected = BTreeSet::new();
    let mut saw_maven = false;
    for block in &doc.affected {
        let Some(pkg) = &block.package else { continue };
        if pkg.ecosystem != "Maven" {
            continue;
        }
        saw_maven = true;
        let (group, artifact) =
            pkg.name.split_once(':').ok_or_else(|| malformed(format!("Maven package name {:?}", pkg.name)))?;
        for version in &block.versions {
            let c = Coordinate::new(group, artifact, version).map_err(|e| malformed(e.to_string()))?;
            affected.insert(c);
        }
    }
    if affected.is_empty() {
        return Ok(Parsed::Skip(if saw_maven { SkipReason::RangesOnly } else { SkipReason::NotMaven }));
    }

    let cve_ids = std::iter::once(&doc.id).chain(&doc.aliases).filter(|s| is_cve_id(s)).cloned().collect();
    Ok(Parsed::Record(VulnerabilityRecord { advisory_id: doc.id, cve_ids, affected }))
}

/// Merges records into coordinate → vulnerability ids.
pub fn collect_affected(records: &[VulnerabilityRecord]) -> BTreeMap<Coordinate, BTreeSet<String>> {
    let mut map: BTreeMap<Coordinate, BTreeSet<String>> = BTreeMap::new();
    for r in records {
        let ids = r.effective_ids();
        for c in &r.affected {
            map.entry(c.clone()).or_default().extend(ids.iter().cloned());
        }
    }
    map
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AdvisoryStats {
    pub files: usize,
    pub records: usize,
    pub skipped_not_maven: usize,
    pub skipped_ranges_only: usize,
    pub malformed: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AdvisoryCorpus {
    /// Sorted by advisory id.
    pub records: Vec<VulnerabilityRecord>,
    pub stats: AdvisoryStats,
}

/// Reads every `*.json` file below `dir`. Malformed documents are counted and
/// logged, not fatal.
pub fn load_advisories(dir: &Path) -> Result<AdvisoryCorpus, AdvisoryError> {
    let unreadable = |reason: String| AdvisoryError::Unreadable { path: dir.display().to_string(), reason };
    if !dir.is_dir() {
        return Err(unreadable("not a directory".into()));
    }
    let mut corpus = AdvisoryCorpus::default();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| unreadable(e.to_string()))?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        corpus.stats.files += 1;
        let name = path.display().to_string();
        let parsed = std::fs::read_to_string(path)
            .map_err(|e| AdvisoryError::MalformedAdvisory { source_name: name.clone(), reason: e.to_string() })
            .and_then(|text| parse_advisory_str(&text, &name));
        match parsed {
            Ok(Parsed::Record(r)) => corpus.records.push(r),
            Ok(Parsed::Skip(SkipReason::NotMaven)) => corpus.stats.skipped_not_maven += 1,
            Ok(Parsed::Skip(SkipReason::RangesOnly)) => {
                log::warn!("{name}: Maven versions given only as ranges, skipped");
                corpus.stats.skipped_ranges_only += 1;
            }
            Err(e) => {
                log::warn!("{e}");
                corpus.stats.malformed += 1;
            }
        }
    }
    corpus.records.sort_by(|a, b| a.advisory_id.cmp(&b.advisory_id));
    corpus.stats.records = corpus.records.len();
    Ok(corpus)
}
