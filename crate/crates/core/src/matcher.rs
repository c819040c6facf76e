//! Subset matching of scanned dependencies against the knowledge base.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::coordinate::Coordinate;
use crate::fingerprint::{Hash128, ScanSets};
use crate::kb::KnowledgeBase;

pub use crate::fingerprint::{scan_sets, scan_sets_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    /// Every original class file is present byte for byte.
    Rebundled,
    /// Only the package-free forms are all present.
    Repackaged,
}

impl MatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchKind::Rebundled => "rebundled",
            MatchKind::Repackaged => "repackaged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MatchResult {
    pub container: Coordinate,
    pub matched: Coordinate,
    pub kind: MatchKind,
    pub vulnerability_ids: BTreeSet<String>,
    /// Size of the hash set whose containment was established.
    pub matched_class_count: usize,
    /// The matched coordinate is itself a declared component of the SBOM.
    pub already_declared: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GroupedMatch {
    pub container: Coordinate,
    pub group: String,
    pub artifact: String,
    /// Sorted, deduplicated.
    pub versions: Vec<String>,
    pub kind: MatchKind,
    pub vulnerability_ids: BTreeSet<String>,
    pub matched_class_count: usize,
    /// True when every version in the group is declared in the SBOM.
    pub already_declared: bool,
}

impl GroupedMatch {
    pub fn coordinates(&self) -> impl Iterator<Item = Coordinate> + '_ {
        self.versions.iter().map(|v| Coordinate {
            group: self.group.clone(),
            artifact: self.artifact.clone(),
            version: v.clone(),
        })
    }
}

/// Number of index hits per artifact, for the artifacts hit at least once.
fn count_hits<'a>(
    kb: &KnowledgeBase,
    scan: impl IntoIterator<Item = &'a Hash128>,
    entries: impl Fn(&KnowledgeBase, Hash128) -> &[(Hash128, u32)],
) -> BTreeMap<u32, u32> {
    let mut counts = BTreeMap::new();
    for h in scan {
        for (_, id) in entries(kb, *h) {
            *counts.entry(*id).or_insert(0) += 1;
        }
    }
    counts
}

/// Finds every knowledge-base artifact wholly contained in `scan`.
///
/// Each hash of the scan increments a counter per artifact it indexes; an
/// artifact is contained once its counter reaches its stored set size.
/// `min_classes` below 1 is treated as 1.
pub fn match_sets(kb: &KnowledgeBase, scan: &ScanSets, min_classes: usize) -> Vec<MatchResult> {
    let min = min_classes.max(1) as u32;
    let q_hits = count_hits(kb, &scan.qualified, KnowledgeBase::qualified_entries);
    let u_hits = count_hits(kb, &scan.unqualified, KnowledgeBase::unqualified_entries);

    let q_full = |id: &u32, n: &u32| {
        let a = kb.artifact(*id);
        (*n == a.qualified_count && a.qualified_count >= min).then_some((*id, MatchKind::Rebundled, a.qualified_count))
    };
    let u_full = |id: &u32, n: &u32| {
        let a = kb.artifact(*id);
        (*n == a.unqualified_count && a.unqualified_count >= min)
            .then_some((*id, MatchKind::Repackaged, a.unqualified_count))
    };

    let mut found: BTreeMap<u32, (MatchKind, u32)> = BTreeMap::new();
    for (id, kind, count) in u_hits.iter().filter_map(|(i, n)| u_full(i, n)) {
        found.insert(id, (kind, count));
    }
    for (id, kind, count) in q_hits.iter().filter_map(|(i, n)| q_full(i, n)) {
        found.insert(id, (kind, count));
    }

    found
        .into_iter()
        .map(|(id, (kind, count))| (kb.artifact(id), kind, count))
        .filter(|(a, _, _)| a.coordinate != scan.coordinate)
        .map(|(a, kind, count)| MatchResult {
            container: scan.coordinate.clone(),
            matched: a.coordinate.clone(),
            kind,
            vulnerability_ids: a.vulnerabilities.iter().cloned().collect(),
            matched_class_count: count as usize,
            already_declared: false,
        })
        .collect()
}

/// Sets `already_declared` on matches whose coordinate is in `declared`.
pub fn mark_declared(matches: &mut [MatchResult], declared: &BTreeSet<Coordinate>) {
    for m in matches {
        m.already_declared = declared.contains(&m.matched);
    }
}

/// Collapses matches of several versions of one artifact into a single group
/// when the versions have identical hash sets in the knowledge base.
pub fn group_matches(matches: &[MatchResult], kb: &KnowledgeBase) -> Vec<GroupedMatch> {
    let ids: BTreeSet<u32> = matches.iter().filter_map(|m| kb.id_of(&m.matched)).collect();
    let sets = kb.hash_sets(&ids);
    let empty = (BTreeSet::new(), BTreeSet::new());

    type Key<'a> = (&'a Coordinate, &'a str, &'a str, MatchKind, &'a (BTreeSet<Hash128>, BTreeSet<Hash128>));
    let mut groups: BTreeMap<Key, Vec<&MatchResult>> = BTreeMap::new();
    for m in matches {
        let hashes = kb.id_of(&m.matched).and_then(|id| sets.get(&id)).unwrap_or(&empty);
        let key = (&m.container, m.matched.group.as_str(), m.matched.artifact.as_str(), m.kind, hashes);
        groups.entry(key).or_default().push(m);
    }

    let mut out: Vec<GroupedMatch> = groups
        .into_iter()
        .map(|((container, group, artifact, kind, _), members)| {
            let versions: BTreeSet<&str> = members.iter().map(|m| m.matched.version.as_str()).collect();
            GroupedMatch {
                container: container.clone(),
                group: group.to_string(),
                artifact: artifact.to_string(),
                versions: versions.into_iter().map(String::from).collect(),
                kind,
                vulnerability_ids: members.iter().flat_map(|m| m.vulnerability_ids.iter().cloned()).collect(),
                matched_class_count: members.iter().map(|m| m.matched_class_count).max().unwrap_or(0),
                already_declared: members.iter().all(|m| m.already_declared),
            }
        })
        .collect();
    out.sort();
    out
}
