//! Command-line orchestration of the import and scan stages.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unshade_core::repo::{RepoConfig, MAVEN_CENTRAL};

mod commands;
pub mod report;

pub use report::{DependencyReport, DependencyStatus, ScanCounters, ScanReport, REPORT_VERSION};

/// Nothing matched; the run completed.
pub const EXIT_OK: i32 = 0;
/// Unusable input, output or arguments.
pub const EXIT_FATAL: i32 = 1;
/// Completed, but some artifacts or dependencies could not be processed.
pub const EXIT_PARTIAL: i32 = 2;
/// Hidden vulnerable dependencies were found.
pub const EXIT_MATCHES: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "unshade", version, about = "Find vulnerable Java code hidden inside other artifacts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Zero timestamps and durations so repeated runs produce identical output.
    #[arg(long, global = true)]
    pub reproducible: bool,
    /// More logging on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a knowledge base from a directory of OSV advisories.
    Import(ImportArgs),
    /// Scan the dependencies of a CycloneDX SBOM and write an augmented copy.
    Scan(ScanArgs),
    /// Print the class hashes of a single archive.
    Fingerprint(FingerprintArgs),
    /// Match a single archive against a knowledge base.
    Match(MatchArgs),
    /// Summarise a knowledge base.
    KbStats(KbStatsArgs),
}

#[derive(Debug, Args)]
pub struct RepoArgs {
    /// Maven repository root (http, https or file URL).
    #[arg(long, default_value = MAVEN_CENTRAL)]
    pub repo: String,
    /// Artifact cache directory [env: UNSHADE_CACHE].
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Use the cache only [env: UNSHADE_OFFLINE=1].
    #[arg(long)]
    pub offline: bool,
}

impl RepoArgs {
    /// Flags override the environment, which overrides the defaults.
    pub fn config(&self) -> RepoConfig {
        let mut cfg = RepoConfig::new(self.repo.clone(), default_cache_dir()).with_env();
        if let Some(dir) = &self.cache {
            cfg.cache_dir = dir.clone();
        }
        cfg.offline |= self.offline;
        cfg
    }

    fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        let jobs = self.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
        Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
    }
}

fn default_cache_dir() -> PathBuf {
    let base = std::env::var_os("XDG_CACHE_HOME")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
        .unwrap_or_else(std::env::temp_dir);
    base.join("unshade")
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Directory of OSV JSON advisories, searched recursively.
    #[arg(long)]
    pub advisory: PathBuf,
    /// Knowledge base file to write.
    #[arg(long)]
    pub kb: PathBuf,
    #[command(flatten)]
    pub repo: RepoArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// CycloneDX JSON SBOM to scan.
    #[arg(long)]
    pub sbom: PathBuf,
    #[arg(long)]
    pub kb: PathBuf,
    /// Where to write the augmented SBOM.
    #[arg(long)]
    pub out: PathBuf,
    /// Report file; JSON when the name ends in .json, text otherwise.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub repo: RepoArgs,
    /// Smallest artifact (in classes) that may be reported.
    #[arg(long, default_value_t = 1)]
    pub min_classes: usize,
    /// How deep to descend into archives nested in archives.
    #[arg(long, default_value_t = 1)]
    pub nested_depth: usize,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    pub jar: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub nested_depth: usize,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    pub jar: PathBuf,
    #[arg(long)]
    pub kb: PathBuf,
    /// Coordinate of the jar itself (g:a:v), used to suppress self-matches.
    #[arg(long)]
    pub coordinate: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub min_classes: usize,
    #[arg(long, default_value_t = 1)]
    pub nested_depth: usize,
}

#[derive(Debug, Args)]
pub struct KbStatsArgs {
    #[arg(long)]
    pub kb: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    run_with(args, &mut stdout.lock())
}

/// Like [`run`], writing command output to `out`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FATAL } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    match commands::dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FATAL
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}
