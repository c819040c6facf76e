use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use unshade_core::kb::{self, build_with_time, KbError, KnowledgeBase, MAGIC};
use unshade_core::{Coordinate, Fingerprint, Hash128};

fn coord(s: &str) -> Coordinate {
    s.parse().unwrap()
}

fn fp(c: &str, q: &[u128], u: &[u128]) -> Fingerprint {
    Fingerprint {
        coordinate: coord(c),
        qualified: q.iter().map(|h| Hash128(*h)).collect(),
        unqualified: u.iter().map(|h| Hash128(*h)).collect(),
        class_count: q.len(),
    }
}

fn vulns(pairs: &[(&str, &[&str])]) -> BTreeMap<Coordinate, BTreeSet<String>> {
    pairs.iter().map(|(c, ids)| (coord(c), ids.iter().map(|s| s.to_string()).collect())).collect()
}

#[test]
fn two_disjoint_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.bin");
    let fps = [fp("g:a:1", &[1, 2, 3], &[11, 12, 13]), fp("g:b:1", &[4, 5, 6], &[14, 15, 16])];
    let v = vulns(&[("g:a:1", &["CVE-2020-0001"]), ("g:b:1", &["CVE-2020-0002", "GHSA-x"])]);
    let stats = build_with_time(&fps, &v, &path, 42).unwrap();
    assert_eq!(stats.qualified_entries, 6);
    assert_eq!(stats.artifacts, 2);
    assert_eq!(stats.vulnerabilities, 3);
    let opened = kb::open(&path).unwrap();
    assert_eq!(kb::stats(&opened), stats);
    assert_eq!(opened.header.created, 42);
    assert_eq!(opened.lookup_qualified(Hash128(5)), vec![1]);
    assert_eq!(opened.lookup_unqualified(Hash128(11)), vec![0]);
    assert!(opened.lookup_qualified(Hash128(99)).is_empty());
}

#[test]
fn one_artifact_two_cves() {
    let kb = KnowledgeBase::from_fingerprints(
        &[fp("g:a:1", &[1], &[1])],
        &vulns(&[("g:a:1", &["CVE-2021-0001", "CVE-2021-0002"])]),
        0,
    )
    .unwrap();
    assert_eq!(kb.stats().vulnerabilities, 2);
}

#[test]
fn empty_knowledge_base() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.kb");
    let stats = build_with_time(&[], &BTreeMap::new(), &path, 7).unwrap();
    assert_eq!(stats, Default::default());
    let kb = kb::open(&path).unwrap();
    assert_eq!(kb.stats(), Default::default());
    assert_eq!(kb.header.created, 7);
    assert_eq!(std::fs::read(&path).unwrap().len(), 8 + 1 + 8 + 4 + 8 + 8);
}

#[test]
fn exact_byte_layout() {
    let kb = KnowledgeBase::from_fingerprints(
        &[fp("g:a:1", &[0x0102], &[0x0304])],
        &vulns(&[("g:a:1", &["CVE-2020-0001"])]),
        0x0a0b,
    )
    .unwrap();
    let mut expected = Vec::new();
    expected.extend_from_slice(b"UNSHKB01");
    expected.push(1);
    expected.extend_from_slice(&0x0a0bu64.to_le_bytes());
    expected.extend_from_slice(&1u32.to_le_bytes());
    for s in ["g", "a", "1"] {
        expected.extend_from_slice(&(s.len() as u16).to_le_bytes());
        expected.extend_from_slice(s.as_bytes());
    }
    expected.extend_from_slice(&1u32.to_le_bytes());
    expected.extend_from_slice(&1u32.to_le_bytes());
    expected.extend_from_slice(&1u16.to_le_bytes());
    expected.extend_from_slice(&13u16.to_le_bytes());
    expected.extend_from_slice(b"CVE-2020-0001");
    for h in [0x0102u128, 0x0304] {
        expected.extend_from_slice(&1u64.to_le_bytes());
        expected.extend_from_slice(&h.to_be_bytes());
        expected.extend_from_slice(&0u32.to_le_bytes());
    }
    assert_eq!(kb.to_bytes().unwrap(), expected);
}

#[test]
fn duplicate_coordinates() {
    let v = vulns(&[("g:a:1", &["X"])]);
    let same = [fp("g:a:1", &[1], &[2]), fp("g:a:1", &[1], &[2])];
    assert_eq!(KnowledgeBase::from_fingerprints(&same, &v, 0).unwrap().artifacts().len(), 1);
    let differing = [fp("g:a:1", &[1], &[2]), fp("g:a:1", &[1, 3], &[2])];
    assert!(matches!(KnowledgeBase::from_fingerprints(&differing, &v, 0), Err(KbError::DuplicateCoordinate(_))));
}

#[test]
fn unmapped_and_empty_fingerprints() {
    let err = KnowledgeBase::from_fingerprints(&[fp("g:a:1", &[1], &[1])], &BTreeMap::new(), 0).unwrap_err();
    assert!(matches!(err, KbError::Unmapped(_)));
    let err = KnowledgeBase::from_fingerprints(&[fp("g:a:1", &[], &[])], &vulns(&[("g:a:1", &["X"])]), 0).unwrap_err();
    assert!(matches!(err, KbError::EmptyFingerprint(_)));
}

fn sample_bytes() -> Vec<u8> {
    KnowledgeBase::from_fingerprints(
        &[fp("g:a:1", &[1, 2], &[3]), fp("g:b:2", &[2, 9], &[3, 4])],
        &vulns(&[("g:a:1", &["CVE-2020-0001"]), ("g:b:2", &["GHSA-1"])]),
        1,
    )
    .unwrap()
    .to_bytes()
    .unwrap()
}

#[test]
fn corruption_is_detected() {
    let good = sample_bytes();
    assert!(KnowledgeBase::from_bytes(&good).is_ok());

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert!(matches!(KnowledgeBase::from_bytes(&bad_magic), Err(KbError::CorruptKb(_))));

    let mut future = good.clone();
    future[6..8].copy_from_slice(b"02");
    assert!(matches!(KnowledgeBase::from_bytes(&future), Err(KbError::VersionMismatch(_))));

    let mut other_hash = good.clone();
    other_hash[8] = 2;
    assert!(matches!(KnowledgeBase::from_bytes(&other_hash), Err(KbError::VersionMismatch(_))));

    for len in 0..good.len() {
        assert!(KnowledgeBase::from_bytes(&good[..len]).is_err(), "prefix {len}");
    }
    let mut trailing = good.clone();
    trailing.push(0);
    assert!(matches!(KnowledgeBase::from_bytes(&trailing), Err(KbError::CorruptKb(_))));

    // Last index entry points at artifact 0 instead of 1: counts no longer agree.
    let mut recount = good.clone();
    let n = recount.len();
    recount[n - 4] = 0;
    assert!(KnowledgeBase::from_bytes(&recount).is_err());
}

#[test]
fn missing_file() {
    assert!(matches!(kb::open(std::path::Path::new("/nonexistent/kb.bin")), Err(KbError::Io(_))));
    assert_eq!(&MAGIC[..6], b"UNSHKB");
}

fn arb_instance() -> impl Strategy<Value = Vec<Fingerprint>> {
    proptest::collection::btree_map(
        ("[a-d]", "[p-s]", "[1-3]"),
        (proptest::collection::btree_set(0u128..40, 1..8), proptest::collection::btree_set(0u128..30, 1..8)),
        0..12,
    )
    .prop_map(|m| {
        m.into_iter()
            .map(|((g, a, v), (q, u))| Fingerprint {
                coordinate: Coordinate::new(&g, &a, &v).unwrap(),
                class_count: q.len(),
                qualified: q.into_iter().map(Hash128).collect(),
                unqualified: u.into_iter().map(Hash128).collect(),
            })
            .collect()
    })
}

fn vuln_map(fps: &[Fingerprint]) -> BTreeMap<Coordinate, BTreeSet<String>> {
    fps.iter()
        .map(|f| (f.coordinate.clone(), BTreeSet::from([format!("CVE-2020-{:04}", f.qualified.len()), "GHSA-x".into()])))
        .collect()
}

proptest! {
    #[test]
    fn round_trip_re_enumerates_inputs(fps in arb_instance()) {
        let v = vuln_map(&fps);
        let kb = KnowledgeBase::from_fingerprints(&fps, &v, 5).unwrap();
        let reopened = KnowledgeBase::from_bytes(&kb.to_bytes().unwrap()).unwrap();
        prop_assert_eq!(&reopened, &kb);
        prop_assert_eq!(reopened.artifacts().len(), fps.len());
        let ids: BTreeSet<u32> = (0..fps.len() as u32).collect();
        let sets = reopened.hash_sets(&ids);
        for f in &fps {
            let id = reopened.id_of(&f.coordinate).unwrap();
            let a = reopened.artifact(id);
            prop_assert_eq!(a.qualified_count as usize, f.qualified.len());
            prop_assert_eq!(a.unqualified_count as usize, f.unqualified.len());
            prop_assert_eq!(a.vulnerabilities.iter().cloned().collect::<BTreeSet<_>>(), v[&f.coordinate].clone());
            prop_assert_eq!(&sets[&id].0, &f.qualified);
            prop_assert_eq!(&sets[&id].1, &f.unqualified);
        }
    }

    #[test]
    fn permuted_input_gives_identical_bytes(fps in arb_instance(), seed in any::<u64>()) {
        let v = vuln_map(&fps);
        let mut shuffled = fps.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize);
        }
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        build_with_time(&fps, &v, &a, 99).unwrap();
        build_with_time(&shuffled, &v, &b, 99).unwrap();
        prop_assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn lookup_equals_linear_scan(fps in arb_instance(), probe in 0u128..45) {
        let kb = KnowledgeBase::from_fingerprints(&fps, &vuln_map(&fps), 0).unwrap();
        let linear = |idx: &[(Hash128, u32)]| -> Vec<u32> {
            idx.iter().filter(|(h, _)| *h == Hash128(probe)).map(|(_, id)| *id).collect()
        };
        prop_assert_eq!(kb.lookup_qualified(Hash128(probe)), linear(kb.qualified_index()));
        prop_assert_eq!(kb.lookup_unqualified(Hash128(probe)), linear(kb.unqualified_index()));
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let mut with_magic = MAGIC.to_vec();
        with_magic.push(1);
        with_magic.extend_from_slice(&bytes);
        let _ = KnowledgeBase::from_bytes(&bytes);
        let _ = KnowledgeBase::from_bytes(&with_magic);
    }
}
