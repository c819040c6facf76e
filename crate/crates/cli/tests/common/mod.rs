//! Hermetic workspaces: a file:// Maven repository, an advisory directory and
//! SBOMs, all inside one temporary directory.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use unshade_core::repo::artifact_path;
use unshade_core::Coordinate;

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Workspace {
    pub fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        for d in ["repo", "cache", "advisories"] {
            std::fs::create_dir_all(ws.path(d)).unwrap();
        }
        ws
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn repo_url(&self) -> String {
        format!("file://{}", self.path("repo").display())
    }

    pub fn publish(&self, coordinate: &str, jar: &[u8]) {
        let c: Coordinate = coordinate.parse().unwrap();
        let p = self.path("repo").join(artifact_path(&c));
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, jar).unwrap();
    }

    /// One OSV advisory affecting explicit versions of `package` ("g:a").
    pub fn advisory(&self, id: &str, aliases: &[&str], package: &str, versions: &[&str]) {
        let doc = json!({
            "schema_version": "1.6.0",
            "id": id,
            "aliases": aliases,
            "affected": [{"package": {"ecosystem": "Maven", "name": package}, "versions": versions}],
        });
        std::fs::write(self.path("advisories").join(format!("{id}.json")), doc.to_string()).unwrap();
    }

    /// A CycloneDX 1.5 SBOM declaring the given coordinates.
    pub fn sbom(&self, name: &str, coordinates: &[&str]) -> PathBuf {
        let components: Vec<Value> = coordinates
            .iter()
            .map(|s| {
                let c: Coordinate = s.parse().unwrap();
                json!({"type": "library", "bom-ref": c.purl(), "group": c.group, "name": c.artifact,
                       "version": c.version, "purl": c.purl()})
            })
            .collect();
        let doc = json!({
            "bomFormat": "CycloneDX",
            "specVersion": "1.5",
            "version": 1,
            "metadata": {"component": {"type": "application", "name": "app"}},
            "components": components,
        });
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
        p
    }

    pub fn run(&self, args: &[&str]) -> Outcome {
        let out = Command::new(env!("CARGO_BIN_EXE_unshade"))
            .args(args)
            .env_remove("UNSHADE_CACHE")
            .env_remove("UNSHADE_OFFLINE")
            .env_remove("RUST_LOG")
            .env("HOME", self.dir.path())
            .output()
            .unwrap();
        Outcome {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }
    }

    pub fn import(&self, kb: &str) -> Outcome {
        let repo = self.repo_url();
        let (adv, kb, cache) = (self.path("advisories"), self.path(kb), self.path("cache"));
        self.run(&[
            "import",
            "--advisory",
            s(&adv),
            "--kb",
            s(&kb),
            "--repo",
            &repo,
            "--cache",
            s(&cache),
            "--reproducible",
        ])
    }

    /// `scan` with a JSON report next to the output; returns (outcome, augmented SBOM, report).
    pub fn scan(&self, sbom: &Path, kb: &str, extra: &[&str]) -> (Outcome, Value, Value) {
        let repo = self.repo_url();
        let (kb, cache, out, report) = (self.path(kb), self.path("cache"), self.path("out.json"), self.path("report.json"));
        let mut args = vec![
            "scan", "--sbom", s(sbom), "--kb", s(&kb), "--out", s(&out), "--report", s(&report), "--repo", &repo,
            "--cache", s(&cache),
        ];
        args.extend_from_slice(extra);
        let o = self.run(&args);
        let read = |p: &Path| std::fs::read_to_string(p).ok().and_then(|t| serde_json::from_str(&t).ok()).unwrap_or(Value::Null);
        let (sbom_out, report_out) = (read(&out), read(&report));
        (o, sbom_out, report_out)
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Added components of an augmented SBOM, as (purl, detection) pairs.
pub fn added(sbom: &Value) -> Vec<(String, String)> {
    sbom["components"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|c| {
            let detection = c["properties"]
                .as_array()?
                .iter()
                .find(|p| p["name"] == "unshade:detection")?["value"]
                .as_str()?
                .to_string();
            Some((c["purl"].as_str()?.to_string(), detection))
        })
        .collect()
}
