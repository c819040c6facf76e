//! Per-class hashes and per-artifact fingerprints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Cursor, Read};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_128;

use crate::classfile::{parse_class, ClassFile};
use crate::coordinate::Coordinate;
use crate::unqualify::{canonical_encode, UnqualifyError};

/// Entries larger than this are skipped rather than inflated.
const MAX_ENTRY_SIZE: u64 = 256 << 20;

/// A 128-bit hash, ordered as a big-endian number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Hash128(pub u128);

impl Hash128 {
    pub fn to_be_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }

    pub fn from_be_bytes(b: [u8; 16]) -> Self {
        Hash128(u128::from_be_bytes(b))
    }
}

impl fmt::Display for Hash128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl FromStr for Hash128 {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u128::from_str_radix(s, 16).map(Hash128)
    }
}

impl Serialize for Hash128 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hash128 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// XXH3-128 with seed 0 over the exact class-file bytes.
pub fn qualified_hash(raw: &[u8]) -> Hash128 {
    Hash128(xxh3_128(raw))
}

/// XXH3-128 with seed 0 over the canonical, package-free encoding.
pub fn unqualified_hash(class: &ClassFile) -> Result<Hash128, UnqualifyError> {
    Ok(Hash128(xxh3_128(&canonical_encode(class)?.bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("not a readable ZIP archive: {0}")]
    MalformedArchive(String),
    #[error("{0} contains no hashable classes")]
    EmptyArtifact(Coordinate),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub coordinate: Coordinate,
    pub qualified: BTreeSet<Hash128>,
    pub unqualified: BTreeSet<Hash128>,
    pub class_count: usize,
}

/// Hash sets of a dependency under scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSets {
    pub coordinate: Coordinate,
    pub qualified: BTreeSet<Hash128>,
    pub unqualified: BTreeSet<Hash128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// How many levels of nested `.jar`/`.war` entries to open.
    pub nested_depth: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { nested_depth: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassHashes {
    /// Entry path; nested entries are written `outer.jar!/inner/Path.class`.
    pub path: String,
    pub qualified: Hash128,
    pub unqualified: Hash128,
    pub major_version: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedEntry {
    pub path: String,
    pub reason: String,
}

/// Everything learned from one archive, before reduction to sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ArchiveScan {
    /// Sorted by path.
    pub classes: Vec<ClassHashes>,
    pub skipped: Vec<SkippedEntry>,
}

impl ArchiveScan {
    pub fn qualified(&self) -> BTreeSet<Hash128> {
        self.classes.iter().map(|c| c.qualified).collect()
    }

    pub fn unqualified(&self) -> BTreeSet<Hash128> {
        self.classes.iter().map(|c| c.unqualified).collect()
    }

    /// Number of classes per class-file major version.
    pub fn versions(&self) -> BTreeMap<u16, usize> {
        let mut m = BTreeMap::new();
        for c in &self.classes {
            *m.entry(c.major_version).or_default() += 1;
        }
        m
    }
}

fn excluded(path: &str) -> bool {
    let file = path.rsplit('/').next().unwrap_or(path);
    file == "module-info.class" || file == "package-info.class"
}

fn is_nested_archive(path: &str) -> bool {
    let lower = path.to_ascii_lowercase();
    lower.ends_with(".jar") || lower.ends_with(".war")
}

/// Hashes a single class file.
pub fn hash_class(path: &str, bytes: &[u8]) -> Result<ClassHashes, String> {
    let class = parse_class(bytes).map_err(|e| e.to_string())?;
    let unqualified = unqualified_hash(&class).map_err(|e| e.to_string())?;
    Ok(ClassHashes {
        path: path.to_string(),
        qualified: qualified_hash(bytes),
        unqualified,
        major_version: class.major_version,
    })
}

/// Hashes every class in a ZIP archive. Malformed classes and unreadable
/// nested archives are recorded in [`ArchiveScan::skipped`] and logged.
pub fn scan_archive(archive: &[u8], options: &ScanOptions) -> Result<ArchiveScan, FingerprintError> {
    let mut scan = ArchiveScan::default();
    walk(archive, "", options.nested_depth, &mut scan)
        .map_err(|e| FingerprintError::MalformedArchive(e.to_string()))?;
    scan.classes.sort_by(|a, b| a.path.cmp(&b.path));
    scan.skipped.sort_by(|a, b| a.path.cmp(&b.path));
    for s in &scan.skipped {
        log::warn!("skipping {}: {}", s.path, s.reason);
    }
    Ok(scan)
}

fn walk(archive: &[u8], prefix: &str, depth: usize, scan: &mut ArchiveScan) -> zip::result::ZipResult<()> {
    let mut zip = zip::ZipArchive::new(Cursor::new(archive))?;
    for i in 0..zip.len() {
        let mut entry = zip.by_index(i)?;
        let name = entry.name().to_string();
        let path = format!("{prefix}{name}");
        let wanted_class = name.ends_with(".class") && !excluded(&name);
        let wanted_nested = depth > 0 && is_nested_archive(&name);
        if entry.is_dir() || !(wanted_class || wanted_nested) {
            continue;
        }
        if entry.size() > MAX_ENTRY_SIZE {
            scan.skipped.push(SkippedEntry { path, reason: format!("entry exceeds {MAX_ENTRY_SIZE} bytes") });
            continue;
        }
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        if let Err(e) = (&mut entry).take(MAX_ENTRY_SIZE).read_to_end(&mut bytes) {
            scan.skipped.push(SkippedEntry { path, reason: e.to_string() });
            continue;
        }
        drop(entry);
        if wanted_class {
            match hash_class(&path, &bytes) {
                Ok(h) => scan.classes.push(h),
                Err(reason) => scan.skipped.push(SkippedEntry { path, reason }),
            }
        } else if let Err(e) = walk(&bytes, &format!("{path}!/"), depth - 1, scan) {
            scan.skipped.push(SkippedEntry { path, reason: format!("nested archive: {e}") });
        }
    }
    Ok(())
}

pub fn fingerprint_archive(archive: &[u8], coordinate: &Coordinate) -> Result<Fingerprint, FingerprintError> {
    fingerprint_archive_with(archive, coordinate, &ScanOptions::default())
}

pub fn fingerprint_archive_with(
    archive: &[u8],
    coordinate: &Coordinate,
    options: &ScanOptions,
) -> Result<Fingerprint, FingerprintError> {
    let scan = scan_archive(archive, options)?;
    fingerprint_of_scan(&scan, coordinate)
}

pub fn fingerprint_of_scan(scan: &ArchiveScan, coordinate: &Coordinate) -> Result<Fingerprint, FingerprintError> {
    if scan.classes.is_empty() {
        return Err(FingerprintError::EmptyArtifact(coordinate.clone()));
    }
    Ok(Fingerprint {
        coordinate: coordinate.clone(),
        qualified: scan.qualified(),
        unqualified: scan.unqualified(),
        class_count: scan.classes.len(),
    })
}

/// Scan-side sets; an archive with no classes yields empty sets.
pub fn scan_sets(archive: &[u8], coordinate: &Coordinate) -> Result<ScanSets, FingerprintError> {
    scan_sets_with(archive, coordinate, &ScanOptions::default())
}

pub fn scan_sets_with(
    archive: &[u8],
    coordinate: &Coordinate,
    options: &ScanOptions,
) -> Result<ScanSets, FingerprintError> {
    let scan = scan_archive(archive, options)?;
    Ok(ScanSets { coordinate: coordinate.clone(), qualified: scan.qualified(), unqualified: scan.unqualified() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_text_form() {
        let h = Hash128(0x0123);
        assert_eq!(h.to_string(), "00000000000000000000000000000123");
        assert_eq!(h.to_string().parse::<Hash128>().unwrap(), h);
        assert_eq!(Hash128::from_be_bytes(h.to_be_bytes()), h);
        assert_eq!(h.to_be_bytes()[15], 0x23);
    }

    #[test]
    fn ordering_is_numeric() {
        assert!(Hash128(1) < Hash128(1 << 64));
        assert!(Hash128(u128::MAX) > Hash128(u128::MAX >> 1));
    }

    #[test]
    fn exclusions() {
        assert!(excluded("module-info.class"));
        assert!(excluded("META-INF/versions/9/module-info.class"));
        assert!(excluded("com/x/package-info.class"));
        assert!(!excluded("com/x/Info.class"));
        assert!(!excluded("com/x/my-module-info.class"));
    }
}
