//! On-disk knowledge base of vulnerable-artifact fingerprints.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! "UNSHKB01"  u8 hash algorithm  u64 created (unix seconds)
//! u32 N, then N × { u16-len group, artifact, version; u32 |Q|; u32 |U|;
//!                   u16 count × u16-len vulnerability id }
//! u64 M, then M × { 16-byte big-endian hash, u32 artifact id }   qualified
//! u64 K, then K × { 16-byte big-endian hash, u32 artifact id }   unqualified
//! ```
//!
//! Artifact ids are positions in the artifact table, which is sorted by
//! coordinate. Index entries are sorted by (hash, id).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::coordinate::Coordinate;
use crate::fingerprint::{Fingerprint, Hash128};

pub const MAGIC: &[u8; 8] = b"UNSHKB01";
const MAGIC_FAMILY: &[u8; 6] = b"UNSHKB";
/// XXH3-128, seed 0.
pub const HASH_XXH3_128: u8 = 1;
const ENTRY_SIZE: usize = 20;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("knowledge base is corrupt: {0}")]
    CorruptKb(String),
    #[error("unsupported knowledge base: {0}")]
    VersionMismatch(String),
    #[error("{0} fingerprinted twice with different hash sets")]
    DuplicateCoordinate(Coordinate),
    #[error("{0} has no vulnerability ids")]
    Unmapped(Coordinate),
    #[error("{0} has an empty hash set")]
    EmptyFingerprint(Coordinate),
    #[error("{0} does not fit the file format")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KbHeader {
    pub hash_algorithm: u8,
    pub created: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactEntry {
    pub coordinate: Coordinate,
    pub qualified_count: u32,
    pub unqualified_count: u32,
    /// Sorted and deduplicated.
    pub vulnerabilities: Vec<String>,
}

/// Artifacts left out of a knowledge base during import.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SkipCounts {
    pub empty: usize,
    pub unresolved: usize,
    pub malformed: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KbStats {
    pub artifacts: usize,
    /// Distinct vulnerability ids over all artifacts.
    pub vulnerabilities: usize,
    pub qualified_entries: usize,
    pub unqualified_entries: usize,
    /// Import-time counters; the file does not record them, so a freshly
    /// opened knowledge base reports zeros here.
    pub skipped: SkipCounts,
}

/// A loaded, validated knowledge base. Immutable and safe to share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub header: KbHeader,
    artifacts: Vec<ArtifactEntry>,
    qualified: Vec<(Hash128, u32)>,
    unqualified: Vec<(Hash128, u32)>,
}

impl KnowledgeBase {
    /// Builds the in-memory form; artifact ids follow coordinate order.
    pub fn from_fingerprints(
        fingerprints: &[Fingerprint],
        vulns: &BTreeMap<Coordinate, BTreeSet<String>>,
        created: u64,
    ) -> Result<Self, KbError> {
        let mut by_coord: BTreeMap<&Coordinate, &Fingerprint> = BTreeMap::new();
        for f in fingerprints {
            if f.qualified.is_empty() || f.unqualified.is_empty() {
                return Err(KbError::EmptyFingerprint(f.coordinate.clone()));
            }
            if let Some(prev) = by_coord.insert(&f.coordinate, f) {
                if prev.qualified != f.qualified || prev.unqualified != f.unqualified {
                    return Err(KbError::DuplicateCoordinate(f.coordinate.clone()));
                }
            }
        }
        if by_coord.len() > u32::MAX as usize {
            return Err(KbError::TooLarge("artifact count".into()));
        }
        let mut artifacts = Vec::with_capacity(by_coord.len());
        let (mut qualified, mut unqualified) = (Vec::new(), Vec::new());
        for (id, (coord, f)) in by_coord.into_iter().enumerate() {
            let ids = vulns.get(coord).filter(|v| !v.is_empty()).ok_or_else(|| KbError::Unmapped(coord.clone()))?;
            let count = |n: usize, what: &str| u32::try_from(n).map_err(|_| KbError::TooLarge(format!("{what} of {coord}")));
            artifacts.push(ArtifactEntry {
                coordinate: coord.clone(),
                qualified_count: count(f.qualified.len(), "qualified set")?,
                unqualified_count: count(f.unqualified.len(), "unqualified set")?,
                vulnerabilities: ids.iter().cloned().collect(),
            });
            let id = id as u32;
            qualified.extend(f.qualified.iter().map(|h| (*h, id)));
            unqualified.extend(f.unqualified.iter().map(|h| (*h, id)));
        }
        qualified.sort_unstable();
        unqualified.sort_unstable();
        Ok(KnowledgeBase { header: KbHeader { hash_algorithm: HASH_XXH3_128, created }, artifacts, qualified, unqualified })
    }

    pub fn artifacts(&self) -> &[ArtifactEntry] {
        &self.artifacts
    }

    pub fn artifact(&self, id: u32) -> &ArtifactEntry {
        &self.artifacts[id as usize]
    }

    pub fn id_of(&self, c: &Coordinate) -> Option<u32> {
        self.artifacts.binary_search_by(|a| a.coordinate.cmp(c)).ok().map(|i| i as u32)
    }

    pub fn qualified_index(&self) -> &[(Hash128, u32)] {
        &self.qualified
    }

    pub fn unqualified_index(&self) -> &[(Hash128, u32)] {
        &self.unqualified
    }

    /// Index entries for `h`, by binary search.
    pub fn qualified_entries(&self, h: Hash128) -> &[(Hash128, u32)] {
        equal_range(&self.qualified, h)
    }

    pub fn unqualified_entries(&self, h: Hash128) -> &[(Hash128, u32)] {
        equal_range(&self.unqualified, h)
    }

    pub fn lookup_qualified(&self, h: Hash128) -> Vec<u32> {
        self.qualified_entries(h).iter().map(|e| e.1).collect()
    }

    pub fn lookup_unqualified(&self, h: Hash128) -> Vec<u32> {
        self.unqualified_entries(h).iter().map(|e| e.1).collect()
    }

    /// Recovers the hash sets of the given artifacts with one pass over each index.
    pub fn hash_sets(&self, ids: &BTreeSet<u32>) -> BTreeMap<u32, (BTreeSet<Hash128>, BTreeSet<Hash128>)> {
        let mut out: BTreeMap<u32, (BTreeSet<Hash128>, BTreeSet<Hash128>)> =
            ids.iter().map(|id| (*id, Default::default())).collect();
        for (h, id) in &self.qualified {
            if let Some(e) = out.get_mut(id) {
                e.0.insert(*h);
            }
        }
        for (h, id) in &self.unqualified {
            if let Some(e) = out.get_mut(id) {
                e.1.insert(*h);
            }
        }
        out
    }

    pub fn stats(&self) -> KbStats {
        let vulns: BTreeSet<&String> = self.artifacts.iter().flat_map(|a| &a.vulnerabilities).collect();
        KbStats {
            artifacts: self.artifacts.len(),
            vulnerabilities: vulns.len(),
            qualified_entries: self.qualified.len(),
            unqualified_entries: self.unqualified.len(),
            skipped: SkipCounts::default(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, KbError> {
        let mut out = Vec::with_capacity(64 + ENTRY_SIZE * (self.qualified.len() + self.unqualified.len()));
        out.extend_from_slice(MAGIC);
        out.push(self.header.hash_algorithm);
        out.extend_from_slice(&self.header.created.to_le_bytes());
        out.extend_from_slice(&(self.artifacts.len() as u32).to_le_bytes());
        for a in &self.artifacts {
            for s in [&a.coordinate.group, &a.coordinate.artifact, &a.coordinate.version] {
                put_str(&mut out, s)?;
            }
            out.extend_from_slice(&a.qualified_count.to_le_bytes());
            out.extend_from_slice(&a.unqualified_count.to_le_bytes());
            let n = u16::try_from(a.vulnerabilities.len())
                .map_err(|_| KbError::TooLarge(format!("vulnerability list of {}", a.coordinate)))?;
            out.extend_from_slice(&n.to_le_bytes());
            for v in &a.vulnerabilities {
                put_str(&mut out, v)?;
            }
        }
        for index in [&self.qualified, &self.unqualified] {
            out.extend_from_slice(&(index.len() as u64).to_le_bytes());
            for (h, id) in index {
                out.extend_from_slice(&h.to_be_bytes());
                out.extend_from_slice(&id.to_le_bytes());
            }
        }
        Ok(out)
    }

    /// Parses and validates a serialized knowledge base.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KbError> {
        let mut r = Cursor { bytes, pos: 0 };
        let magic = r.take(8)?;
        if magic != MAGIC {
            return Err(if magic.starts_with(MAGIC_FAMILY) {
                KbError::VersionMismatch(format!("format {:?}", String::from_utf8_lossy(&magic[6..])))
            } else {
                KbError::CorruptKb("bad magic".into())
            });
        }
        let hash_algorithm = r.u8()?;
        if hash_algorithm != HASH_XXH3_128 {
            return Err(KbError::VersionMismatch(format!("hash algorithm {hash_algorithm}")));
        }
        let created = r.u64()?;

        let n = r.u32()? as usize;
        // Each record takes at least 16 bytes, which bounds a hostile count.
        if n > r.remaining() / 16 {
            return Err(KbError::CorruptKb(format!("artifact count {n} exceeds file size")));
        }
        let mut artifacts = Vec::with_capacity(n);
        for _ in 0..n {
            let (g, a, v) = (r.string()?, r.string()?, r.string()?);
            let coordinate = Coordinate::new(&g, &a, &v).map_err(|e| KbError::CorruptKb(e.to_string()))?;
            let qualified_count = r.u32()?;
            let unqualified_count = r.u32()?;
            let vn = r.u16()? as usize;
            let vulnerabilities = (0..vn).map(|_| r.string()).collect::<Result<Vec<_>, _>>()?;
            if vulnerabilities.is_empty() || vulnerabilities.windows(2).any(|w| w[0] >= w[1]) {
                return Err(KbError::CorruptKb(format!("vulnerability list of {coordinate}")));
            }
            if artifacts.last().is_some_and(|p: &ArtifactEntry| p.coordinate >= coordinate) {
                return Err(KbError::CorruptKb("artifact table out of order".into()));
            }
            artifacts.push(ArtifactEntry { coordinate, qualified_count, unqualified_count, vulnerabilities });
        }
        let qualified = r.index(artifacts.len())?;
        let unqualified = r.index(artifacts.len())?;
        if r.remaining() != 0 {
            return Err(KbError::CorruptKb(format!("{} trailing bytes", r.remaining())));
        }

        for (index, name, expected) in [
            (&qualified, "qualified", artifacts.iter().map(|a| a.qualified_count).collect::<Vec<_>>()),
            (&unqualified, "unqualified", artifacts.iter().map(|a| a.unqualified_count).collect()),
        ] {
            let mut counts = vec![0u32; artifacts.len()];
            index.iter().for_each(|(_, id)| counts[*id as usize] += 1);
            if let Some(i) = (0..artifacts.len()).find(|&i| counts[i] != expected[i] || expected[i] == 0) {
                return Err(KbError::CorruptKb(format!(
                    "{} lists {} {name} hashes but the index holds {}",
                    artifacts[i].coordinate, expected[i], counts[i]
                )));
            }
        }
        Ok(KnowledgeBase { header: KbHeader { hash_algorithm, created }, artifacts, qualified, unqualified })
    }
}

fn equal_range(index: &[(Hash128, u32)], h: Hash128) -> &[(Hash128, u32)] {
    let start = index.partition_point(|e| e.0 < h);
    let end = start + index[start..].partition_point(|e| e.0 == h);
    &index[start..end]
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<(), KbError> {
    let n = u16::try_from(s.len()).map_err(|_| KbError::TooLarge(format!("string {s:.32}...")))?;
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], KbError> {
        if n > self.remaining() {
            return Err(KbError::CorruptKb(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, KbError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, KbError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, KbError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, KbError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, KbError> {
        let n = self.u16()? as usize;
        let at = self.pos;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| KbError::CorruptKb(format!("invalid UTF-8 at byte {at}")))
    }

    fn index(&mut self, artifacts: usize) -> Result<Vec<(Hash128, u32)>, KbError> {
        let n = self.u64()?;
        if n > (self.remaining() / ENTRY_SIZE) as u64 {
            return Err(KbError::CorruptKb(format!("index count {n} exceeds file size")));
        }
        let mut out = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let h = Hash128::from_be_bytes(self.take(16)?.try_into().unwrap());
            let id = self.u32()?;
            if id as usize >= artifacts {
                return Err(KbError::CorruptKb(format!("artifact id {id} out of range")));
            }
            if out.last().is_some_and(|p| *p >= (h, id)) {
                return Err(KbError::CorruptKb("index out of order".into()));
            }
            out.push((h, id));
        }
        Ok(out)
    }
}

/// Builds and writes a knowledge base, stamped with the current time or
/// `SOURCE_DATE_EPOCH` when set.
pub fn build(
    fingerprints: &[Fingerprint],
    vulns: &BTreeMap<Coordinate, BTreeSet<String>>,
    out: &Path,
) -> Result<KbStats, KbError> {
    build_with_time(fingerprints, vulns, out, creation_time())
}

pub fn build_with_time(
    fingerprints: &[Fingerprint],
    vulns: &BTreeMap<Coordinate, BTreeSet<String>>,
    out: &Path,
    created: u64,
) -> Result<KbStats, KbError> {
    let kb = KnowledgeBase::from_fingerprints(fingerprints, vulns, created)?;
    let bytes = kb.to_bytes()?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, &bytes)?;
    tmp.persist(out).map_err(|e| e.error)?;
    Ok(kb.stats())
}

pub fn open(path: &Path) -> Result<KnowledgeBase, KbError> {
    KnowledgeBase::from_bytes(&std::fs::read(path)?)
}

pub fn stats(kb: &KnowledgeBase) -> KbStats {
    kb.stats()
}

fn creation_time() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()).unwrap_or_else(|| {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    })
}
