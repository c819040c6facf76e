//! Bytecode-level fingerprinting of Java artifacts and detection of their
//! hidden inclusion in other JARs.

pub mod advisory;
pub mod classfile;
pub mod coordinate;
pub mod fingerprint;
pub mod kb;
pub mod matcher;
pub mod repo;
pub mod sbom;
pub mod unqualify;

pub use coordinate::Coordinate;
pub use fingerprint::{Fingerprint, Hash128, ScanSets};
