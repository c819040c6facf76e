//! The scan report and its text and JSON renderings.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use unshade_core::matcher::{GroupedMatch, MatchKind};
use unshade_core::Coordinate;

/// Bumped whenever a JSON field is renamed, removed or changes meaning.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DependencyStatus {
    Scanned,
    /// The archive holds no fingerprintable classes.
    Empty,
    /// Not found, or the repository could not be reached.
    Unfetchable,
    /// Not a readable archive.
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyReport {
    pub coordinate: Coordinate,
    pub status: DependencyStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub class_count: usize,
    pub matches: Vec<GroupedMatch>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ScanCounters {
    pub dependencies_scanned: usize,
    pub unscannable: usize,
    pub matches_rebundled: usize,
    pub matches_repackaged: usize,
    pub vulnerability_ids: usize,
}

/// Wall-clock milliseconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Durations {
    pub load: u64,
    pub fetch: u64,
    pub fingerprint: u64,
    #[serde(rename = "match")]
    pub matching: u64,
    pub augment: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub report_version: u32,
    pub tool_version: String,
    /// Unix seconds; zero under `--reproducible`.
    pub generated: u64,
    pub min_classes: usize,
    pub nested_depth: usize,
    pub counters: ScanCounters,
    pub dependencies: Vec<DependencyReport>,
    /// Distinct ids over all matches, sorted.
    pub vulnerability_ids: Vec<String>,
    pub durations_ms: Durations,
}

impl ScanReport {
    /// Derives the counters and id list from `dependencies`.
    pub fn new(dependencies: Vec<DependencyReport>, min_classes: usize, nested_depth: usize) -> Self {
        let all = || dependencies.iter().flat_map(|d| &d.matches);
        let ids: BTreeSet<&String> = all().flat_map(|m| &m.vulnerability_ids).collect();
        let counters = ScanCounters {
            dependencies_scanned: dependencies.iter().filter(|d| d.status == DependencyStatus::Scanned).count(),
            unscannable: dependencies.iter().filter(|d| d.status != DependencyStatus::Scanned).count(),
            matches_rebundled: all().filter(|m| m.kind == MatchKind::Rebundled).count(),
            matches_repackaged: all().filter(|m| m.kind == MatchKind::Repackaged).count(),
            vulnerability_ids: ids.len(),
        };
        ScanReport {
            report_version: REPORT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated: 0,
            min_classes,
            nested_depth,
            counters,
            vulnerability_ids: ids.into_iter().cloned().collect(),
            dependencies,
            durations_ms: Durations::default(),
        }
    }

    pub fn matches(&self) -> impl Iterator<Item = &GroupedMatch> {
        self.dependencies.iter().flat_map(|d| &d.matches)
    }

    /// Matches on coordinates the SBOM does not already declare.
    pub fn hidden_matches(&self) -> usize {
        self.matches().filter(|m| !m.already_declared).count()
    }

    pub fn has_unscannable_failures(&self) -> bool {
        self.dependencies
            .iter()
            .any(|d| matches!(d.status, DependencyStatus::Unfetchable | DependencyStatus::Malformed))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let c = &self.counters;
        let mut s = String::new();
        let _ = writeln!(s, "unshade scan report (report_version {})", self.report_version);
        let _ = writeln!(s, "dependencies: {} scanned, {} unscannable", c.dependencies_scanned, c.unscannable);
        let _ = writeln!(
            s,
            "matches: {} rebundled, {} repackaged, {} vulnerability ids",
            c.matches_rebundled, c.matches_repackaged, c.vulnerability_ids
        );
        for d in self.dependencies.iter().filter(|d| !d.matches.is_empty()) {
            let _ = writeln!(s, "\n{} ({} classes)", d.coordinate, d.class_count);
            for m in &d.matches {
                let ids: Vec<&str> = m.vulnerability_ids.iter().map(String::as_str).collect();
                let _ = writeln!(
                    s,
                    "  {:<10} {}:{} [{}] classes={}{} {}",
                    m.kind.as_str(),
                    m.group,
                    m.artifact,
                    m.versions.join(", "),
                    m.matched_class_count,
                    if m.already_declared { " (declared)" } else { "" },
                    ids.join(" ")
                );
            }
        }
        let failed: Vec<&DependencyReport> =
            self.dependencies.iter().filter(|d| d.status != DependencyStatus::Scanned).collect();
        if !failed.is_empty() {
            let _ = writeln!(s, "\nunscannable:");
            for d in failed {
                let _ = writeln!(s, "  {} {}", d.coordinate, d.reason.as_deref().unwrap_or(""));
            }
        }
        let t = &self.durations_ms;
        let _ = writeln!(
            s,
            "\ndurations (ms): load={} fetch={} fingerprint={} match={} augment={} total={}",
            t.load, t.fetch, t.fingerprint, t.matching, t.augment, t.total
        );
        s
    }
}
