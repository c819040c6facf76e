use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use unshade_core::advisory::{collect_affected, load_advisories, AdvisoryStats};
use unshade_core::fingerprint::{fingerprint_archive, FingerprintError};
use unshade_core::kb::{self, KbStats, SkipCounts};
use unshade_core::repo::Repository;
use unshade_core::{Coordinate, Fingerprint};

use super::{elapsed_ms, write_json};
use crate::{Cli, Format, ImportArgs, EXIT_OK, EXIT_PARTIAL};

enum Outcome {
    Fingerprinted(Fingerprint),
    Empty,
    Unresolved(String),
    Malformed(String),
}

#[derive(Serialize)]
struct ImportSummary<'a> {
    advisories: &'a AdvisoryStats,
    kb: KbStats,
    unresolved: Vec<Skipped>,
    duration_ms: u64,
}

#[derive(Serialize)]
struct Skipped {
    coordinate: Coordinate,
    reason: String,
}

pub fn run(args: &ImportArgs, cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let start = Instant::now();
    let parent = args.kb.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        bail!("cannot write knowledge base {}: {} is not a directory", args.kb.display(), parent.display());
    }
    let corpus = load_advisories(&args.advisory)?;
    if corpus.records.is_empty() {
        warn!("no usable Maven advisories under {}; the knowledge base will be empty", args.advisory.display());
    }
    let affected = collect_affected(&corpus.records);
    info!("{} advisories name {} artifacts", corpus.records.len(), affected.len());

    let repo = Repository::new(args.repo.config());
    let coords: Vec<&Coordinate> = affected.keys().collect();
    let outcomes: Vec<Outcome> = args.repo.pool()?.install(|| {
        coords
            .par_iter()
            .map(|c| match repo.fetch(c) {
                Err(e) => Outcome::Unresolved(e.to_string()),
                Ok(bytes) => match fingerprint_archive(&bytes, c) {
                    Ok(fp) => Outcome::Fingerprinted(fp),
                    Err(FingerprintError::EmptyArtifact(_)) => Outcome::Empty,
                    Err(e) => Outcome::Malformed(e.to_string()),
                },
            })
            .collect()
    });

    let mut fingerprints = Vec::new();
    let mut skipped = SkipCounts::default();
    let mut unresolved = Vec::new();
    for (c, outcome) in coords.iter().zip(outcomes) {
        match outcome {
            Outcome::Fingerprinted(fp) => fingerprints.push(fp),
            Outcome::Empty => {
                info!("{c} contains no classes; skipped");
                skipped.empty += 1;
            }
            Outcome::Unresolved(reason) => {
                warn!("{reason}");
                skipped.unresolved += 1;
                unresolved.push(Skipped { coordinate: (*c).clone(), reason });
            }
            Outcome::Malformed(reason) => {
                warn!("{c}: {reason}");
                skipped.malformed += 1;
                unresolved.push(Skipped { coordinate: (*c).clone(), reason });
            }
        }
    }

    let vulns: BTreeMap<Coordinate, _> =
        fingerprints.iter().map(|f| (f.coordinate.clone(), affected[&f.coordinate].clone())).collect();
    let written = if cli.reproducible {
        kb::build_with_time(&fingerprints, &vulns, &args.kb, 0)
    } else {
        kb::build(&fingerprints, &vulns, &args.kb)
    };
    let mut stats = written.with_context(|| format!("writing knowledge base {}", args.kb.display()))?;
    stats.skipped = skipped;

    let duration_ms = if cli.reproducible { 0 } else { elapsed_ms(start) };
    match cli.format {
        Format::Json => {
            write_json(out, &ImportSummary { advisories: &corpus.stats, kb: stats, unresolved, duration_ms })?
        }
        Format::Text => {
            let a = &corpus.stats;
            writeln!(
                out,
                "advisories: {} files, {} usable, {} not Maven, {} ranges only, {} malformed",
                a.files, a.records, a.skipped_not_maven, a.skipped_ranges_only, a.malformed
            )?;
            super::inspect::write_stats_text(out, &stats)?;
            for s in &unresolved {
                writeln!(out, "unresolved: {} ({})", s.coordinate, s.reason)?;
            }
        }
    }
    Ok(if skipped.unresolved + skipped.malformed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}
