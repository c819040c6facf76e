use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use unshade_core::fingerprint::{scan_archive, ClassHashes, ScanOptions, SkippedEntry};
use unshade_core::kb::{self, KbHeader, KbStats};
use unshade_core::matcher::{match_sets, MatchResult};
use unshade_core::{Coordinate, ScanSets};

use super::write_json;
use crate::{Cli, FingerprintArgs, Format, KbStatsArgs, MatchArgs, EXIT_MATCHES, EXIT_OK};

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct FingerprintOutput<'a> {
    classes: &'a [ClassHashes],
    skipped: &'a [SkippedEntry],
    class_count: usize,
    qualified_count: usize,
    unqualified_count: usize,
}

pub fn fingerprint(args: &FingerprintArgs, cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let bytes = read(&args.jar)?;
    let scan = scan_archive(&bytes, &ScanOptions { nested_depth: args.nested_depth })
        .with_context(|| format!("reading {}", args.jar.display()))?;
    let (q, u) = (scan.qualified().len(), scan.unqualified().len());
    match cli.format {
        Format::Json => write_json(
            out,
            &FingerprintOutput {
                classes: &scan.classes,
                skipped: &scan.skipped,
                class_count: scan.classes.len(),
                qualified_count: q,
                unqualified_count: u,
            },
        )?,
        Format::Text => {
            for c in &scan.classes {
                writeln!(out, "{} {} {}", c.path, c.qualified, c.unqualified)?;
            }
            for s in &scan.skipped {
                writeln!(out, "skipped {} ({})", s.path, s.reason)?;
            }
            writeln!(out, "classes={} |Q|={q} |U|={u}", scan.classes.len())?;
        }
    }
    Ok(EXIT_OK)
}

pub fn matches(args: &MatchArgs, cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let kb = kb::open(&args.kb).with_context(|| format!("opening knowledge base {}", args.kb.display()))?;
    let container: Coordinate = match &args.coordinate {
        Some(c) => c.parse().with_context(|| format!("invalid coordinate {c:?}"))?,
        None => {
            let stem = args.jar.file_stem().map(|s| s.to_string_lossy().replace(':', "_")).unwrap_or_default();
            Coordinate::new("local", if stem.is_empty() { "archive" } else { &stem }, "0")?
        }
    };
    let bytes = read(&args.jar)?;
    let scan = scan_archive(&bytes, &ScanOptions { nested_depth: args.nested_depth })
        .with_context(|| format!("reading {}", args.jar.display()))?;
    let sets = ScanSets { coordinate: container, qualified: scan.qualified(), unqualified: scan.unqualified() };
    let found: Vec<MatchResult> = match_sets(&kb, &sets, args.min_classes);
    match cli.format {
        Format::Json => write_json(out, &found)?,
        Format::Text => {
            for m in &found {
                let ids: Vec<&str> = m.vulnerability_ids.iter().map(String::as_str).collect();
                writeln!(out, "{} {} classes={} {}", m.kind.as_str(), m.matched, m.matched_class_count, ids.join(" "))?;
            }
        }
    }
    Ok(if found.is_empty() { EXIT_OK } else { EXIT_MATCHES })
}

#[derive(Serialize)]
struct KbStatsOutput {
    header: KbHeader,
    #[serde(flatten)]
    stats: KbStats,
}

pub fn kb_stats(args: &KbStatsArgs, cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let kb = kb::open(&args.kb).with_context(|| format!("opening knowledge base {}", args.kb.display()))?;
    let stats = kb::stats(&kb);
    match cli.format {
        Format::Json => write_json(out, &KbStatsOutput { header: kb.header, stats })?,
        Format::Text => {
            writeln!(out, "created: {}", kb.header.created)?;
            write_stats_text(out, &stats)?;
        }
    }
    Ok(EXIT_OK)
}

pub(super) fn write_stats_text(out: &mut dyn Write, s: &KbStats) -> std::io::Result<()> {
    writeln!(out, "artifacts: {}", s.artifacts)?;
    writeln!(out, "vulnerabilities: {}", s.vulnerabilities)?;
    writeln!(out, "qualified entries: {}", s.qualified_entries)?;
    writeln!(out, "unqualified entries: {}", s.unqualified_entries)?;
    writeln!(
        out,
        "skipped: {} empty, {} unresolved, {} malformed",
        s.skipped.empty, s.skipped.unresolved, s.skipped.malformed
    )
}
