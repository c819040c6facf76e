//! Maven coordinates (group, artifact, version).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid coordinate {0:?}")]
pub struct InvalidCoordinate(pub String);

/// Ordered field by field, which is the order artifact ids are assigned in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coordinate {
    pub group: String,
    pub artifact: String,
    pub version: String,
}

fn valid_field(s: &str) -> bool {
    !s.is_empty() && !s.contains(':') && !s.chars().any(char::is_control)
}

impl Coordinate {
    pub fn new(group: &str, artifact: &str, version: &str) -> Result<Self, InvalidCoordinate> {
        if [group, artifact, version].into_iter().all(valid_field) {
            Ok(Coordinate { group: group.into(), artifact: artifact.into(), version: version.into() })
        } else {
            Err(InvalidCoordinate(format!("{group}:{artifact}:{version}")))
        }
    }

    /// `group:artifact`, without the version.
    pub fn package(&self) -> String {
        format!("{}:{}", self.group, self.artifact)
    }

    pub fn purl(&self) -> String {
        crate::sbom::purl_of(self)
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.group, self.artifact, self.version)
    }
}

impl FromStr for Coordinate {
    type Err = InvalidCoordinate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(g), Some(a), Some(v), None) => Coordinate::new(g, a, v),
            _ => Err(InvalidCoordinate(s.to_string())),
        }
    }
}

impl Serialize for Coordinate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coordinate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
