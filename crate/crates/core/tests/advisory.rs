use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use proptest::prelude::*;
use serde_json::json;
use unshade_core::advisory::{
    collect_affected, load_advisories, parse_advisory, AdvisoryError, Parsed, SkipReason, VulnerabilityRecord,
};
use unshade_core::Coordinate;

fn coord(s: &str) -> Coordinate {
    s.parse().unwrap()
}

fn record(doc: serde_json::Value) -> VulnerabilityRecord {
    match parse_advisory(&doc, "test").unwrap() {
        Parsed::Record(r) => r,
        other => panic!("expected a record, got {other:?}"),
    }
}

#[test]
fn log4j_advisory() {
    let r = record(json!({
        "id": "GHSA-jfh8-c2jp-5v3q",
        "aliases": ["CVE-2021-44228"],
        "affected": [{
            "package": {"ecosystem": "Maven", "name": "org.apache.logging.log4j:log4j-core"},
            "versions": ["2.14.1"]
        }]
    }));
    assert_eq!(r.advisory_id, "GHSA-jfh8-c2jp-5v3q");
    assert_eq!(r.cve_ids, BTreeSet::from(["CVE-2021-44228".to_string()]));
    assert_eq!(r.affected, BTreeSet::from([coord("org.apache.logging.log4j:log4j-core:2.14.1")]));
}

#[test]
fn non_maven_is_skipped() {
    let doc = json!({"id": "PYSEC-1", "affected": [{"package": {"ecosystem": "PyPI", "name": "x"}, "versions": ["1"]}]});
    assert_eq!(parse_advisory(&doc, "t").unwrap(), Parsed::Skip(SkipReason::NotMaven));
}

#[test]
fn ranges_only_is_skipped() {
    let doc = json!({
        "id": "GHSA-x",
        "affected": [{
            "package": {"ecosystem": "Maven", "name": "a:b"},
            "versions": [],
            "ranges": [{"type": "ECOSYSTEM", "events": [{"introduced": "0"}]}]
        }]
    });
    assert_eq!(parse_advisory(&doc, "t").unwrap(), Parsed::Skip(SkipReason::RangesOnly));
}

#[test]
fn cve_id_as_primary_id() {
    let r = record(json!({
        "id": "CVE-2022-1111",
        "aliases": ["GHSA-a", "CVE-2022-2222", "not-a-cve"],
        "affected": [{"package": {"ecosystem": "Maven", "name": "a:b"}, "versions": ["1"]}]
    }));
    assert_eq!(r.cve_ids, BTreeSet::from(["CVE-2022-1111".to_string(), "CVE-2022-2222".to_string()]));
}

#[test]
fn schema_violations_are_malformed() {
    for doc in [
        json!({"affected": []}),
        json!({"id": ""}),
        json!({"id": 5}),
        json!({"id": "X", "affected": [{"package": {"ecosystem": "Maven", "name": "no-colon"}, "versions": ["1"]}]}),
        json!({"id": "X", "affected": [{"package": {"ecosystem": "Maven", "name": "a:b"}, "versions": [""]}]}),
        json!({"id": "X", "affected": [{"package": {"ecosystem": "Maven", "name": "a:b"}, "versions": "1"}]}),
    ] {
        assert!(matches!(parse_advisory(&doc, "t"), Err(AdvisoryError::MalformedAdvisory { .. })), "{doc}");
    }
}

#[test]
fn collect_unions_ids() {
    let a = VulnerabilityRecord {
        advisory_id: "GHSA-1".into(),
        cve_ids: BTreeSet::from(["CVE-2020-0001".into()]),
        affected: BTreeSet::from([coord("g:a:1"), coord("g:a:2")]),
    };
    let b = VulnerabilityRecord {
        advisory_id: "GHSA-2".into(),
        cve_ids: BTreeSet::new(),
        affected: BTreeSet::from([coord("g:a:2")]),
    };
    let map = collect_affected(&[a.clone(), b.clone()]);
    assert_eq!(map[&coord("g:a:1")], BTreeSet::from(["CVE-2020-0001".to_string()]));
    assert_eq!(map[&coord("g:a:2")], BTreeSet::from(["CVE-2020-0001".to_string(), "GHSA-2".to_string()]));
    assert!(collect_affected(&[]).is_empty());
}

#[test]
fn three_versions_three_coordinates() {
    let r = record(json!({
        "id": "GHSA-v",
        "affected": [{"package": {"ecosystem": "Maven", "name": "g:a"}, "versions": ["1", "2", "3"]}]
    }));
    assert_eq!(collect_affected(&[r]).len(), 3);
}

#[test]
fn corpus_directory() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/osv");
    let corpus = load_advisories(&dir).unwrap();
    assert_eq!(corpus.stats.files, 6);
    assert_eq!(corpus.stats.records, 2);
    assert_eq!(corpus.stats.skipped_not_maven, 1);
    assert_eq!(corpus.stats.skipped_ranges_only, 1);
    assert_eq!(corpus.stats.malformed, 2);
    let ids: Vec<&str> = corpus.records.iter().map(|r| r.advisory_id.as_str()).collect();
    assert_eq!(ids, ["CVE-2022-1111", "GHSA-jfh8-c2jp-5v3q"]);
    let map = collect_affected(&corpus.records);
    assert_eq!(map.len(), 4);
    assert_eq!(map[&coord("com.example:lib:1.1")], BTreeSet::from(["CVE-2022-1111".to_string()]));
}

#[test]
fn missing_directory() {
    assert!(matches!(load_advisories(Path::new("/nonexistent/advisories")), Err(AdvisoryError::Unreadable { .. })));
}

fn arb_record() -> impl Strategy<Value = VulnerabilityRecord> {
    (
        "GHSA-[a-z]{2}",
        proptest::collection::btree_set("CVE-20[0-9]{2}-[0-9]{4}", 0..3),
        proptest::collection::btree_set(("[a-c]", "[x-z]", "[1-3]"), 1..4),
    )
        .prop_map(|(advisory_id, cve_ids, affected)| VulnerabilityRecord {
            advisory_id,
            cve_ids,
            affected: affected.into_iter().map(|(g, a, v)| Coordinate::new(&g, &a, &v).unwrap()).collect(),
        })
}

proptest! {
    #[test]
    fn collect_is_order_independent_and_idempotent(mut records in proptest::collection::vec(arb_record(), 0..8)) {
        let map = collect_affected(&records);
        let doubled: Vec<_> = records.iter().chain(records.iter()).cloned().collect();
        prop_assert_eq!(&collect_affected(&doubled), &map);
        records.reverse();
        prop_assert_eq!(&collect_affected(&records), &map);
        prop_assert!(map.values().all(|ids| !ids.is_empty()));
        let expected: BTreeMap<Coordinate, BTreeSet<String>> = records.iter().fold(BTreeMap::new(), |mut m, r| {
            for c in &r.affected {
                m.entry(c.clone()).or_default().extend(r.effective_ids());
            }
            m
        });
        prop_assert_eq!(map, expected);
    }
}
