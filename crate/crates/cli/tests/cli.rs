mod common;

use common::{added, s, Workspace};
use unshade_core::unqualify::{relocate_archive, RelocationRule};
use unshade_testkit::{library, JarBuilder};

fn jar(base: &str, flavor: u32) -> Vec<u8> {
    JarBuilder::new().manifest("test").classes(&library(base, flavor)).build()
}

/// Three vulnerable artifacts under two advisories, published to the file:// repo.
fn vulnerable_world() -> Workspace {
    let ws = Workspace::new();
    ws.publish("com.example:a:1.0", &jar("com/example", 0));
    ws.publish("net.demo:c:3.0", &jar("net/demo", 2));
    ws.publish("net.demo:c:3.1", &jar("net/demo", 2));
    ws.advisory("GHSA-aaaa-bbbb-cccc", &["CVE-2021-0001"], "com.example:a", &["1.0"]);
    ws.advisory("CVE-2021-0002", &[], "net.demo:c", &["3.0", "3.1"]);
    ws
}

fn uber(parts: &[Vec<u8>]) -> Vec<u8> {
    let mut b = JarBuilder::new().manifest("test").classes(&library("org/app", 7));
    for (i, p) in parts.iter().enumerate() {
        b = b.entry(&format!("BOOT-INF/lib/dep{i}.jar"), p.clone());
    }
    b.build()
}

#[test]
fn import_builds_knowledge_base() {
    let ws = vulnerable_world();
    let o = ws.import("kb.bin");
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("artifacts: 3"), "{}", o.stdout);
    let stats = ws.run(&["kb-stats", "--kb", s(&ws.path("kb.bin")), "--format", "json"]);
    assert_eq!(stats.code, 0);
    let v: serde_json::Value = serde_json::from_str(&stats.stdout).unwrap();
    assert_eq!(v["artifacts"], 3);
    assert_eq!(v["vulnerabilities"], 2);
    assert_eq!(v["qualified_entries"], 36);
    assert_eq!(v["header"]["created"], 0);
}

#[test]
fn import_with_missing_artifact_is_partial() {
    let ws = vulnerable_world();
    ws.advisory("CVE-2021-0003", &[], "org.gone:x", &["9"]);
    let o = ws.run(&[
        "import",
        "--advisory",
        s(&ws.path("advisories")),
        "--kb",
        s(&ws.path("kb.bin")),
        "--repo",
        &ws.repo_url(),
        "--cache",
        s(&ws.path("cache")),
        "--format",
        "json",
    ]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["kb"]["skipped"]["unresolved"], 1);
    assert_eq!(v["kb"]["artifacts"], 3);
    assert_eq!(v["unresolved"][0]["coordinate"], "org.gone:x:9");
}

#[test]
fn import_of_empty_directory() {
    let ws = Workspace::new();
    let o = ws.import("kb.bin");
    assert_eq!(o.code, 0);
    assert!(o.stderr.contains("empty"), "{}", o.stderr);
    let stats = ws.run(&["kb-stats", "--kb", s(&ws.path("kb.bin"))]);
    assert_eq!(stats.code, 0);
    assert!(stats.stdout.contains("artifacts: 0"));
    assert!(stats.stdout.contains("qualified entries: 0"));
}

#[test]
fn import_fatal_errors() {
    let ws = Workspace::new();
    let missing = ws.run(&["import", "--advisory", s(&ws.path("nope")), "--kb", s(&ws.path("kb.bin"))]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("error"));
    let unwritable =
        ws.run(&["import", "--advisory", s(&ws.path("advisories")), "--kb", s(&ws.path("no/such/dir/kb.bin"))]);
    assert_eq!(unwritable.code, 1);
}

#[test]
fn scan_finds_rebundled_artifact() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    let app = JarBuilder::new().classes(library("org/app", 7).iter().chain(&library("com/example", 0))).build();
    ws.publish("org.app:uber:1.0", &app);
    let sbom = ws.sbom("bom.json", &["org.app:uber:1.0"]);
    let (o, out, report) = ws.scan(&sbom, "kb.bin", &["--reproducible"]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    assert_eq!(added(&out), [("pkg:maven/com.example/a@1.0".to_string(), "rebundled".to_string())]);
    assert_eq!(report["report_version"], 1);
    assert_eq!(report["counters"]["matches_rebundled"], 1);
    assert_eq!(report["counters"]["matches_repackaged"], 0);
    assert_eq!(report["vulnerability_ids"], serde_json::json!(["CVE-2021-0001"]));
    assert_eq!(report["dependencies"][0]["matches"][0]["container"], "org.app:uber:1.0");
}

#[test]
fn scan_finds_repackaged_artifact_and_groups_versions() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    let shaded = relocate_archive(&jar("net/demo", 2), &[RelocationRule::new("net/demo", "org/app/shaded").unwrap()])
        .unwrap();
    ws.publish("org.app:svc:2.0", &uber(&[shaded]));
    let sbom = ws.sbom("bom.json", &["org.app:svc:2.0"]);
    let (o, out, report) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    assert_eq!(
        added(&out),
        [
            ("pkg:maven/net.demo/c@3.0".to_string(), "repackaged".to_string()),
            ("pkg:maven/net.demo/c@3.1".to_string(), "repackaged".to_string()),
        ]
    );
    let matches = report["dependencies"][0]["matches"].as_array().unwrap();
    assert_eq!(matches.len(), 1);
    assert_eq!(matches[0]["versions"], serde_json::json!(["3.0", "3.1"]));
    assert_eq!(matches[0]["kind"], "repackaged");
}

#[test]
fn declared_matches_do_not_fail_the_build() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:uber:1.0", &uber(&[jar("com/example", 0)]));
    let sbom = ws.sbom("bom.json", &["org.app:uber:1.0", "com.example:a:1.0"]);
    let (o, out, report) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(added(&out).is_empty());
    assert_eq!(report["dependencies"][0]["matches"][0]["already_declared"], true);
}

#[test]
fn scan_without_scannable_components_is_identity() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    let sbom = ws.sbom("bom.json", &[]);
    let (o, out, _) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 0);
    let input: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sbom).unwrap()).unwrap();
    assert_eq!(out, input);
}

#[test]
fn unfetchable_dependency_is_partial() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:fine:1", &jar("org/app", 7));
    let sbom = ws.sbom("bom.json", &["org.app:fine:1", "org.app:gone:1"]);
    let (o, _, report) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    assert_eq!(report["counters"]["dependencies_scanned"], 1);
    assert_eq!(report["counters"]["unscannable"], 1);
    assert_eq!(report["dependencies"][1]["status"], "unfetchable");
}

#[test]
fn empty_jar_is_unscannable_but_not_an_error() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:empty:1", &JarBuilder::new().manifest("t").build());
    let (o, _, report) = ws.scan(&ws.sbom("bom.json", &["org.app:empty:1"]), "kb.bin", &[]);
    assert_eq!(o.code, 0);
    assert_eq!(report["dependencies"][0]["status"], "empty");
}

#[test]
fn offline_scan_uses_only_the_cache() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:uber:1.0", &uber(&[jar("com/example", 0)]));
    let sbom = ws.sbom("bom.json", &["org.app:uber:1.0"]);
    let (o, _, _) = ws.scan(&sbom, "kb.bin", &["--offline"]);
    assert_eq!(o.code, 2);
    let (o, _, _) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 3);
    let (o, _, _) = ws.scan(&sbom, "kb.bin", &["--offline"]);
    assert_eq!(o.code, 3);
}

#[test]
fn scan_fatal_errors() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    let sbom = ws.sbom("bom.json", &[]);
    let o = ws.run(&["scan", "--sbom", s(&sbom), "--out", s(&ws.path("out.json"))]);
    assert_eq!(o.code, 1, "missing --kb is a usage error");
    let (o, _, _) = ws.scan(&ws.path("missing.json"), "kb.bin", &[]);
    assert_eq!(o.code, 1);
    let (o, _, _) = ws.scan(&sbom, "missing.kb", &[]);
    assert_eq!(o.code, 1);
    let spdx = ws.path("spdx.json");
    std::fs::write(&spdx, r#"{"spdxVersion": "SPDX-2.3", "SPDXID": "SPDXRef-DOCUMENT"}"#).unwrap();
    let (o, _, _) = ws.scan(&spdx, "kb.bin", &[]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("SPDX"), "{}", o.stderr);
}

#[test]
fn reproducible_scans_are_byte_identical() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:uber:1.0", &uber(&[jar("com/example", 0), jar("net/demo", 2)]));
    let sbom = ws.sbom("bom.json", &["org.app:uber:1.0"]);
    let read = |p: &str| std::fs::read(ws.path(p)).unwrap();
    ws.scan(&sbom, "kb.bin", &["--reproducible"]);
    let (out1, rep1) = (read("out.json"), read("report.json"));
    ws.scan(&sbom, "kb.bin", &["--reproducible", "--jobs", "1"]);
    assert_eq!(read("out.json"), out1);
    assert_eq!(read("report.json"), rep1);
}

#[test]
fn report_counters_match_lists() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:one:1", &uber(&[jar("com/example", 0)]));
    ws.publish("org.app:two:1", &uber(&[jar("net/demo", 2), jar("com/example", 0)]));
    let sbom = ws.sbom("bom.json", &["org.app:one:1", "org.app:two:1", "org.app:gone:1"]);
    let (o, _, r) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 3);
    let deps = r["dependencies"].as_array().unwrap();
    let matches: Vec<&serde_json::Value> = deps.iter().flat_map(|d| d["matches"].as_array().unwrap()).collect();
    let kind = |k: &str| matches.iter().filter(|m| m["kind"] == k).count();
    assert_eq!(r["counters"]["matches_rebundled"], kind("rebundled"));
    assert_eq!(r["counters"]["matches_repackaged"], kind("repackaged"));
    assert_eq!(r["counters"]["matches_rebundled"], 3);
    assert_eq!(r["counters"]["vulnerability_ids"], r["vulnerability_ids"].as_array().unwrap().len());
    assert_eq!(r["counters"]["unscannable"], 1);
    for d in r["durations_ms"].as_object().unwrap().values() {
        assert!(d.as_u64().is_some());
    }
    let text = ws.run(&[
        "scan",
        "--sbom",
        s(&sbom),
        "--kb",
        s(&ws.path("kb.bin")),
        "--out",
        s(&ws.path("o.json")),
        "--report",
        s(&ws.path("report.txt")),
        "--repo",
        &ws.repo_url(),
        "--cache",
        s(&ws.path("cache")),
    ]);
    assert_eq!(text.code, 3);
    let body = std::fs::read_to_string(ws.path("report.txt")).unwrap();
    assert!(body.contains("report_version 1"));
    assert!(body.contains("rebundled  com.example:a [1.0]"), "{body}");
}

#[test]
fn fingerprint_command() {
    let ws = Workspace::new();
    let p = ws.path("three.jar");
    std::fs::write(&p, JarBuilder::new().classes(&library("com/example", 0)[..3]).build()).unwrap();
    let o = ws.run(&["fingerprint", s(&p)]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[..3].iter().all(|l| l.split(' ').count() == 3 && l.ends_with(|c: char| c.is_ascii_hexdigit())));
    assert_eq!(lines[3], "classes=3 |Q|=3 |U|=3");
    let json = ws.run(&["fingerprint", s(&p), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(v["qualified_count"], 3);
    assert_eq!(v["classes"].as_array().unwrap().len(), 3);
    assert_eq!(ws.run(&["fingerprint", s(&ws.path("absent.jar"))]).code, 1);
    std::fs::write(ws.path("junk.jar"), b"junk").unwrap();
    assert_eq!(ws.run(&["fingerprint", s(&ws.path("junk.jar"))]).code, 1);
}

#[test]
fn match_command() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    let moved = relocate_archive(&jar("com/example", 0), &[RelocationRule::new("com/example", "org/modified").unwrap()])
        .unwrap();
    let p = ws.path("moved.jar");
    std::fs::write(&p, moved).unwrap();
    let o = ws.run(&["match", s(&p), "--kb", s(&ws.path("kb.bin"))]);
    assert_eq!(o.code, 3);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines, ["repackaged com.example:a:1.0 classes=12 CVE-2021-0001"]);
    let own = ws.path("own.jar");
    std::fs::write(&own, jar("com/example", 0)).unwrap();
    let o = ws.run(&["match", s(&own), "--kb", s(&ws.path("kb.bin")), "--coordinate", "com.example:a:1.0"]);
    assert_eq!((o.code, o.stdout.as_str()), (0, ""));
    let json = ws.run(&["match", s(&p), "--kb", s(&ws.path("kb.bin")), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(v[0]["kind"], "repackaged");
}

#[test]
fn usage_errors_exit_one() {
    let ws = Workspace::new();
    assert_eq!(ws.run(&[]).code, 1);
    assert_eq!(ws.run(&["frobnicate"]).code, 1);
    assert_eq!(ws.run(&["kb-stats"]).code, 1);
    assert_eq!(ws.run(&["kb-stats", "--kb", s(&ws.path("nope"))]).code, 1);
    assert_eq!(ws.run(&["--help"]).code, 0);
}

#[test]
fn report_conforms_to_documented_schema() {
    let ws = vulnerable_world();
    assert_eq!(ws.import("kb.bin").code, 0);
    ws.publish("org.app:one:1", &uber(&[jar("com/example", 0), jar("net/demo", 2)]));
    let sbom = ws.sbom("bom.json", &["org.app:one:1", "org.app:gone:1", "com.example:a:1.0"]);
    let (o, _, report) = ws.scan(&sbom, "kb.bin", &[]);
    assert_eq!(o.code, 3);
    let schema_path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let msgs: Vec<String> = match compiled.validate(&report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{msgs:?}");
}
