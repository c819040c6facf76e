use std::io::Write;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::{Cli, Command};

mod import;
mod inspect;
mod scan;

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Import(args) => import::run(args, cli, out),
        Command::Scan(args) => scan::run(args, cli, out),
        Command::Fingerprint(args) => inspect::fingerprint(args, cli, out),
        Command::Match(args) => inspect::matches(args, cli, out),
        Command::KbStats(args) => inspect::kb_stats(args, cli, out),
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn elapsed_ms(since: Instant) -> u64 {
    since.elapsed().as_millis() as u64
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
