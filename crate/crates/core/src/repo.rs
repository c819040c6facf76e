//! Maven-layout artifact retrieval with a local cache.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use sha1::{Digest, Sha1};
use thiserror::Error;

use crate::coordinate::Coordinate;

pub const MAVEN_CENTRAL: &str = "https://repo1.maven.org/maven2";
pub const ENV_CACHE: &str = "UNSHADE_CACHE";
pub const ENV_OFFLINE: &str = "UNSHADE_OFFLINE";

/// Downloads larger than this are refused.
const MAX_DOWNLOAD: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepoError {
    #[error("{0} not found in repository")]
    NotFound(Coordinate),
    #[error("fetching {coordinate} failed after {attempts} attempt(s): {message}")]
    TransportError { coordinate: Coordinate, attempts: u32, message: String },
    #[error("checksum mismatch for {coordinate}: expected {expected}, got {actual}")]
    ChecksumMismatch { coordinate: Coordinate, expected: String, actual: String },
    #[error("cache {path}: {message}")]
    Cache { path: String, message: String },
    #[error("{0} cannot be mapped to a repository path")]
    UnsafeCoordinate(Coordinate),
    #[error("unsupported repository URL {0:?}")]
    UnsupportedUrl(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoConfig {
    /// `http://`, `https://` or `file://` root of a Maven-layout repository.
    pub base_url: String,
    pub cache_dir: PathBuf,
    pub offline: bool,
    pub timeout: Duration,
    pub retries: u32,
    /// Compare downloads against the repository's `.sha1` files.
    pub verify_checksums: bool,
}

impl RepoConfig {
    pub fn new(base_url: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        RepoConfig {
            base_url: base_url.into(),
            cache_dir: cache_dir.into(),
            offline: false,
            timeout: Duration::from_secs(30),
            retries: 3,
            verify_checksums: false,
        }
    }

    /// Applies `UNSHADE_CACHE` and `UNSHADE_OFFLINE=1`.
    pub fn with_env(mut self) -> Self {
        if let Some(dir) = std::env::var_os(ENV_CACHE).filter(|d| !d.is_empty()) {
            self.cache_dir = dir.into();
        }
        if std::env::var(ENV_OFFLINE).is_ok_and(|v| v == "1") {
            self.offline = true;
        }
        self
    }
}

/// `org.apache.commons:commons-lang3:3.9` →
/// `org/apache/commons/commons-lang3/3.9/commons-lang3-3.9.jar`.
pub fn artifact_path(c: &Coordinate) -> String {
    format!("{}/{}/{}/{}-{}.jar", c.group.replace('.', "/"), c.artifact, c.version, c.artifact, c.version)
}

/// Rejects coordinates whose path would escape the repository root.
fn layout_safe(c: &Coordinate) -> bool {
    let plain = |s: &str| !s.is_empty() && s != "." && s != ".." && !s.contains(['/', '\\']);
    c.group.split('.').all(plain) && plain(&c.artifact) && plain(&c.version)
}

pub struct Repository {
    config: RepoConfig,
    agent: ureq::Agent,
    downloads: AtomicUsize,
}

enum Source<'a> {
    File(PathBuf),
    Http(&'a str),
}

impl Repository {
    pub fn new(config: RepoConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Repository { config, agent, downloads: AtomicUsize::new(0) }
    }

    pub fn config(&self) -> &RepoConfig {
        &self.config
    }

    /// Number of artifacts retrieved from the repository rather than the cache.
    pub fn downloads(&self) -> usize {
        self.downloads.load(Ordering::Relaxed)
    }

    pub fn cache_path(&self, c: &Coordinate) -> PathBuf {
        self.config.cache_dir.join(artifact_path(c))
    }

    /// Returns the artifact's bytes, from the cache when present.
    pub fn fetch(&self, c: &Coordinate) -> Result<Vec<u8>, RepoError> {
        if !layout_safe(c) {
            return Err(RepoError::UnsafeCoordinate(c.clone()));
        }
        let cached = self.cache_path(c);
        match std::fs::read(&cached) {
            Ok(bytes) => return Ok(bytes),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(cache_error(&cached, e)),
        }
        if self.config.offline {
            return Err(RepoError::NotFound(c.clone()));
        }
        let rel = artifact_path(c);
        let bytes = self.retrieve(c, &rel)?;
        if self.config.verify_checksums {
            self.verify(c, &rel, &bytes)?;
        }
        self.downloads.fetch_add(1, Ordering::Relaxed);
        store_atomically(&cached, &bytes)?;
        Ok(bytes)
    }

    fn source(&self) -> Result<Source<'_>, RepoError> {
        let url = self.config.base_url.as_str();
        if let Some(path) = url.strip_prefix("file://") {
            Ok(Source::File(PathBuf::from(path)))
        } else if url.starts_with("http://") || url.starts_with("https://") {
            Ok(Source::Http(url.trim_end_matches('/')))
        } else {
            Err(RepoError::UnsupportedUrl(url.to_string()))
        }
    }

    fn retrieve(&self, c: &Coordinate, rel: &str) -> Result<Vec<u8>, RepoError> {
        match self.source()? {
            Source::File(root) => match std::fs::read(root.join(rel)) {
                Ok(bytes) => Ok(bytes),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(RepoError::NotFound(c.clone())),
                Err(e) => Err(RepoError::TransportError { coordinate: c.clone(), attempts: 1, message: e.to_string() }),
            },
            Source::Http(base) => self.http_get(c, &format!("{base}/{rel}")),
        }
    }

    fn http_get(&self, c: &Coordinate, url: &str) -> Result<Vec<u8>, RepoError> {
        let mut delay = Duration::from_millis(200);
        let mut attempt = 0;
        loop {
            attempt += 1;
            let message = match self.agent.get(url).call() {
                Ok(resp) => {
                    let mut bytes = Vec::new();
                    match resp.into_reader().take(MAX_DOWNLOAD).read_to_end(&mut bytes) {
                        Ok(_) => return Ok(bytes),
                        Err(e) => e.to_string(),
                    }
                }
                Err(ureq::Error::Status(404 | 410, _)) => return Err(RepoError::NotFound(c.clone())),
                Err(e) => e.to_string(),
            };
            if attempt > self.config.retries {
                return Err(RepoError::TransportError { coordinate: c.clone(), attempts: attempt, message });
            }
            log::debug!("retrying {url} in {delay:?}: {message}");
            std::thread::sleep(delay);
            delay *= 2;
        }
    }

    fn verify(&self, c: &Coordinate, rel: &str, bytes: &[u8]) -> Result<(), RepoError> {
        let sidecar = self.retrieve(c, &format!("{rel}.sha1"))?;
        let expected = String::from_utf8_lossy(&sidecar).split_whitespace().next().unwrap_or("").to_ascii_lowercase();
        let actual: String = Sha1::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        if expected == actual {
            Ok(())
        } else {
            Err(RepoError::ChecksumMismatch { coordinate: c.clone(), expected, actual })
        }
    }
}

/// Convenience wrapper for a single fetch.
pub fn fetch_artifact(config: &RepoConfig, c: &Coordinate) -> Result<Vec<u8>, RepoError> {
    Repository::new(config.clone()).fetch(c)
}

fn cache_error(path: &Path, e: impl std::fmt::Display) -> RepoError {
    RepoError::Cache { path: path.display().to_string(), message: e.to_string() }
}

/// Writes to a temporary file beside `target`, then renames it into place.
pub fn store_atomically(target: &Path, bytes: &[u8]) -> Result<(), RepoError> {
    let dir = target.parent().ok_or_else(|| cache_error(target, "no parent directory"))?;
    std::fs::create_dir_all(dir).map_err(|e| cache_error(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| cache_error(dir, e))?;
    tmp.write_all(bytes).map_err(|e| cache_error(target, e))?;
    tmp.as_file().sync_all().map_err(|e| cache_error(target, e))?;
    tmp.persist(target).map_err(|e| cache_error(target, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Coordinate {
        s.parse().unwrap()
    }

    #[test]
    fn layout() {
        assert_eq!(
            artifact_path(&c("org.apache.commons:commons-lang3:3.9")),
            "org/apache/commons/commons-lang3/3.9/commons-lang3-3.9.jar"
        );
        assert_eq!(artifact_path(&c("a:b:1")), "a/b/1/b-1.jar");
        assert!(artifact_path(&c("com.x.y:z:2")).starts_with("com/x/y/"));
    }

    #[test]
    fn traversal_is_rejected() {
        assert!(layout_safe(&c("org.example:lib:1.0")));
        for bad in ["..:x:1", "a:..:1", "a:b:../../etc", "a..b:c:1", "a:b/c:1", "a:b:1\\x"] {
            assert!(!layout_safe(&c(bad)), "{bad}");
        }
    }
}
