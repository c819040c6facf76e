use std::collections::BTreeSet;
use std::path::Path;

use jsonschema::JSONSchema;
use serde_json::{json, Value};
use unshade_core::matcher::{GroupedMatch, MatchKind};
use unshade_core::sbom::{
    augment, coordinate_of_purl, parse_sbom, parse_sbom_str, purl_of, serialize_sbom, Origin, SbomError,
    PROP_BUNDLED_BY, PROP_DETECTION, PROP_MATCHED_CLASSES,
};
use unshade_core::Coordinate;

fn coord(s: &str) -> Coordinate {
    s.parse().unwrap()
}

fn bom(version: &str, components: Value) -> Value {
    json!({
        "bomFormat": "CycloneDX",
        "specVersion": version,
        "serialNumber": "urn:uuid:3e671687-395b-41f5-a30f-a58921a69b79",
        "version": 1,
        "metadata": {"component": {"type": "application", "name": "app"}},
        "components": components,
    })
}

fn maven(g: &str, a: &str, v: &str) -> Value {
    json!({"type": "library", "bom-ref": format!("pkg:maven/{g}/{a}@{v}"), "group": g, "name": a, "version": v,
           "purl": format!("pkg:maven/{g}/{a}@{v}")})
}

fn grouped(container: &str, g: &str, a: &str, versions: &[&str], kind: MatchKind) -> GroupedMatch {
    GroupedMatch {
        container: coord(container),
        group: g.into(),
        artifact: a.into(),
        versions: versions.iter().map(|v| v.to_string()).collect(),
        kind,
        vulnerability_ids: BTreeSet::from(["CVE-2021-44228".to_string()]),
        matched_class_count: 12,
        already_declared: false,
    }
}

#[test]
fn parses_maven_and_foreign_components() {
    let doc = bom(
        "1.5",
        json!([
            maven("org.app", "web", "1.0"),
            maven("org.lib", "core", "2.1"),
            {"type": "library", "name": "left-pad", "version": "1.3.0", "purl": "pkg:npm/left-pad@1.3.0"},
            {"type": "library", "name": "no-purl"},
        ]),
    );
    let sbom = parse_sbom(&doc).unwrap();
    assert_eq!(sbom.spec_version, "1.5");
    assert_eq!(sbom.components.len(), 4);
    assert_eq!(sbom.scannable(), [coord("org.app:web:1.0"), coord("org.lib:core:2.1")]);
    assert!(!sbom.components[2].is_scannable());
    assert!(sbom.components.iter().all(|c| c.origin == Origin::Declared));
    assert_eq!(serialize_sbom(&sbom), doc);
}

#[test]
fn empty_and_missing_components() {
    let empty = parse_sbom(&bom("1.4", json!([]))).unwrap();
    assert!(empty.scannable().is_empty());
    let mut doc = bom("1.6", json!([]));
    doc.as_object_mut().unwrap().remove("components");
    let missing = parse_sbom(&doc).unwrap();
    assert!(missing.components.is_empty());
    assert_eq!(serialize_sbom(&missing), doc);
}

#[test]
fn spdx_and_garbage_are_rejected() {
    let spdx = json!({"spdxVersion": "SPDX-2.3", "SPDXID": "SPDXRef-DOCUMENT", "name": "x"});
    assert_eq!(parse_sbom(&spdx), Err(SbomError::Spdx));
    assert!(matches!(parse_sbom_str("SPDXVersion: SPDX-2.3\n"), Err(SbomError::Spdx | SbomError::MalformedSbom(_))));
    assert!(matches!(parse_sbom(&json!({"bomFormat": "Other"})), Err(SbomError::MalformedSbom(_))));
    assert!(matches!(parse_sbom(&json!([1, 2])), Err(SbomError::MalformedSbom(_))));
    assert!(matches!(parse_sbom_str("{"), Err(SbomError::MalformedSbom(_))));
}

#[test]
fn nested_components_count_as_declared() {
    let mut outer = maven("org.app", "web", "1.0");
    outer["components"] = json!([maven("org.inner", "x", "3")]);
    let sbom = parse_sbom(&bom("1.5", json!([outer]))).unwrap();
    assert!(sbom.declared_coordinates().contains(&coord("org.inner:x:3")));
    let added = augment(&sbom, &[grouped("org.app:web:1.0", "org.inner", "x", &["3"], MatchKind::Rebundled)]);
    assert_eq!(added.components.len(), 1);
}

#[test]
fn augment_adds_one_component_per_version() {
    let sbom = parse_sbom(&bom("1.5", json!([maven("org.app", "web", "1.0")]))).unwrap();
    let m = grouped("org.app:web:1.0", "org.apache.logging.log4j", "log4j-core", &["2.14.0", "2.14.1"], MatchKind::Repackaged);
    let out = augment(&sbom, &[m]);
    assert_eq!(out.components.len(), 3);
    let added = &out.components[1..];
    assert_eq!(
        added.iter().map(|c| c.purl.clone().unwrap()).collect::<Vec<_>>(),
        ["pkg:maven/org.apache.logging.log4j/log4j-core@2.14.0", "pkg:maven/org.apache.logging.log4j/log4j-core@2.14.1"]
    );
    for c in added {
        assert_eq!(c.origin, Origin::UnshadeAdded);
        assert_eq!(
            c.properties,
            [
                (PROP_DETECTION.to_string(), "repackaged".to_string()),
                (PROP_BUNDLED_BY.to_string(), "pkg:maven/org.app/web@1.0".to_string()),
                (PROP_MATCHED_CLASSES.to_string(), "12".to_string()),
            ]
        );
        assert_eq!(c.raw["bom-ref"], c.raw["purl"]);
    }
    assert_eq!(out.scannable(), [coord("org.app:web:1.0")]);
}

#[test]
fn declared_versions_are_not_duplicated() {
    let sbom = parse_sbom(&bom("1.5", json!([maven("org.app", "web", "1.0"), maven("g", "lib", "1")]))).unwrap();
    let out = augment(&sbom, &[grouped("org.app:web:1.0", "g", "lib", &["1", "2"], MatchKind::Rebundled)]);
    assert_eq!(out.components.len(), 3);
    assert_eq!(out.components[2].coordinate, Some(coord("g:lib:2")));
}

#[test]
fn one_component_for_several_containers() {
    let sbom = parse_sbom(&bom("1.5", json!([maven("a", "x", "1"), maven("a", "y", "1")]))).unwrap();
    let out = augment(
        &sbom,
        &[
            grouped("a:y:1", "v", "lib", &["9"], MatchKind::Rebundled),
            grouped("a:x:1", "v", "lib", &["9"], MatchKind::Repackaged),
        ],
    );
    assert_eq!(out.components.len(), 3);
    let props = &out.components[2].properties;
    let values = |k: &str| props.iter().filter(|(n, _)| n == k).map(|(_, v)| v.as_str()).collect::<Vec<_>>();
    assert_eq!(values(PROP_BUNDLED_BY), ["pkg:maven/a/x@1", "pkg:maven/a/y@1"]);
    assert_eq!(values(PROP_DETECTION), ["rebundled", "repackaged"]);
}

#[test]
fn augment_is_idempotent_and_ordered() {
    let sbom = parse_sbom(&bom("1.6", json!([maven("org.app", "web", "1.0")]))).unwrap();
    let matches = [
        grouped("org.app:web:1.0", "z.last", "q", &["1"], MatchKind::Rebundled),
        grouped("org.app:web:1.0", "a.first", "q", &["1"], MatchKind::Repackaged),
    ];
    let once = augment(&sbom, &matches);
    let twice = augment(&once, &matches);
    assert_eq!(serialize_sbom(&once), serialize_sbom(&twice));
    let reparsed = parse_sbom(&serialize_sbom(&once)).unwrap();
    assert_eq!(serialize_sbom(&augment(&reparsed, &matches)), serialize_sbom(&once));
    assert!(reparsed.components[1].purl < reparsed.components[2].purl);
    assert_eq!(reparsed.scannable(), [coord("org.app:web:1.0")]);
    assert_eq!(serialize_sbom(&augment(&sbom, &[])), serialize_sbom(&sbom));
}

#[test]
fn purl_examples() {
    let c = coord("org.apache.logging.log4j:log4j-core:2.14.1");
    assert_eq!(purl_of(&c), "pkg:maven/org.apache.logging.log4j/log4j-core@2.14.1");
    assert_eq!(coordinate_of_purl("pkg:maven/org.apache.logging.log4j/log4j-core@2.14.1?type=jar").unwrap(), c);
}

fn validator(version: &str) -> JSONSchema {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cyclonedx");
    let load = |name: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap() };
    let schema = load(&format!("bom-{version}.SNAPSHOT.schema.json"));
    JSONSchema::options()
        .with_document("http://cyclonedx.org/schema/spdx.SNAPSHOT.schema.json".into(), load("spdx.SNAPSHOT.schema.json"))
        .with_document(
            "http://cyclonedx.org/schema/jsf-0.82.SNAPSHOT.schema.json".into(),
            load("jsf-0.82.SNAPSHOT.schema.json"),
        )
        .compile(&schema)
        .unwrap()
}

#[test]
fn augmented_documents_validate() {
    for version in ["1.4", "1.5", "1.6"] {
        let schema = validator(version);
        let input = bom(version, json!([maven("org.app", "web", "1.0")]));
        assert!(schema.is_valid(&input), "input {version}");
        let sbom = parse_sbom(&input).unwrap();
        let out = serialize_sbom(&augment(
            &sbom,
            &[grouped("org.app:web:1.0", "org.apache.logging.log4j", "log4j-core", &["2.14.1"], MatchKind::Rebundled)],
        ));
        if let Err(errors) = schema.validate(&out) {
            let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
            panic!("{version}: {msgs:?}");
        }
        let mut broken = out.clone();
        broken["components"][1]["type"] = json!("not-a-type");
        assert!(!schema.is_valid(&broken));
    }
}
