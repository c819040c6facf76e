use std::io::Write;
use std::time::Instant;

use anyhow::Context;
use log::{info, warn};
use rayon::prelude::*;
use unshade_core::fingerprint::{scan_archive, FingerprintError, ScanOptions};
use unshade_core::kb;
use unshade_core::matcher::{group_matches, mark_declared, match_sets};
use unshade_core::repo::Repository;
use unshade_core::sbom::{augment, parse_sbom_str, serialize_sbom};
use unshade_core::ScanSets;

use super::{elapsed_ms, now_unix};
use crate::report::{DependencyReport, DependencyStatus, ScanReport};
use crate::{Cli, Format, ScanArgs, EXIT_MATCHES, EXIT_OK, EXIT_PARTIAL};

pub fn run(args: &ScanArgs, cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.sbom).with_context(|| format!("reading SBOM {}", args.sbom.display()))?;
    let sbom = parse_sbom_str(&text).with_context(|| format!("reading SBOM {}", args.sbom.display()))?;
    let kb = kb::open(&args.kb).with_context(|| format!("opening knowledge base {}", args.kb.display()))?;
    let deps = sbom.scannable();
    let declared = sbom.declared_coordinates();
    info!("{} scannable dependencies, {} knowledge base artifacts", deps.len(), kb.artifacts().len());
    let load_ms = elapsed_ms(start);

    let pool = args.repo.pool()?;
    let repo = Repository::new(args.repo.config());
    let t = Instant::now();
    let fetched: Vec<_> = pool.install(|| deps.par_iter().map(|c| repo.fetch(c)).collect());
    let fetch_ms = elapsed_ms(t);

    let t = Instant::now();
    let options = ScanOptions { nested_depth: args.nested_depth };
    let scans: Vec<Result<_, (DependencyStatus, String)>> = pool.install(|| {
        fetched
            .par_iter()
            .map(|f| match f {
                Err(e) => Err((DependencyStatus::Unfetchable, e.to_string())),
                Ok(bytes) => scan_archive(bytes, &options).map_err(|e| match e {
                    FingerprintError::MalformedArchive(m) => (DependencyStatus::Malformed, m),
                    other => (DependencyStatus::Malformed, other.to_string()),
                }),
            })
            .collect()
    });
    drop(fetched);
    let fingerprint_ms = elapsed_ms(t);

    let t = Instant::now();
    let reports: Vec<DependencyReport> = pool.install(|| {
        deps.par_iter()
            .zip(scans.par_iter())
            .map(|(c, scan)| {
                let report = |status, reason: Option<String>, class_count, matches| DependencyReport {
                    coordinate: c.clone(),
                    status,
                    reason,
                    class_count,
                    matches,
                };
                match scan {
                    Err((status, reason)) => {
                        warn!("{c}: {reason}");
                        report(*status, Some(reason.clone()), 0, Vec::new())
                    }
                    Ok(s) if s.classes.is_empty() => {
                        report(DependencyStatus::Empty, Some("no classes".into()), 0, Vec::new())
                    }
                    Ok(s) => {
                        let sets =
                            ScanSets { coordinate: c.clone(), qualified: s.qualified(), unqualified: s.unqualified() };
                        let mut matches = match_sets(&kb, &sets, args.min_classes);
                        mark_declared(&mut matches, &declared);
                        report(DependencyStatus::Scanned, None, s.classes.len(), group_matches(&matches, &kb))
                    }
                }
            })
            .collect()
    });
    let match_ms = elapsed_ms(t);

    let t = Instant::now();
    let mut report = ScanReport::new(reports, args.min_classes, args.nested_depth);
    let grouped: Vec<_> = report.matches().cloned().collect();
    let augmented = augment(&sbom, &grouped);
    let mut sbom_text = serde_json::to_string_pretty(&serialize_sbom(&augmented))?;
    sbom_text.push('\n');
    std::fs::write(&args.out, sbom_text).with_context(|| format!("writing {}", args.out.display()))?;
    let augment_ms = elapsed_ms(t);

    if !cli.reproducible {
        report.generated = now_unix();
        report.durations_ms = crate::report::Durations {
            load: load_ms,
            fetch: fetch_ms,
            fingerprint: fingerprint_ms,
            matching: match_ms,
            augment: augment_ms,
            total: elapsed_ms(start),
        };
    }
    if let Some(path) = &args.report {
        let body = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            report.to_json()
        } else {
            report.to_text()
        };
        std::fs::write(path, body).with_context(|| format!("writing report {}", path.display()))?;
    }
    match cli.format {
        Format::Json => out.write_all(report.to_json().as_bytes())?,
        Format::Text => out.write_all(report.to_text().as_bytes())?,
    }

    Ok(if report.hidden_matches() > 0 {
        EXIT_MATCHES
    } else if report.has_unscannable_failures() {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    })
}
