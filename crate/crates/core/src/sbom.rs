//! CycloneDX SBOM reading, Maven purl handling, and augmentation with
//! detected hidden components.

use std::collections::{BTreeMap, BTreeSet};

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::coordinate::Coordinate;
use crate::matcher::GroupedMatch;

pub const PROP_DETECTION: &str = "unshade:detection";
pub const PROP_BUNDLED_BY: &str = "unshade:bundled-by";
pub const PROP_MATCHED_CLASSES: &str = "unshade:matched-classes";

const SUPPORTED_VERSIONS: &[&str] = &["1.4", "1.5", "1.6"];

/// Characters escaped in purl namespace, name and version segments.
const PURL_SEGMENT: &AsciiSet =
    &CONTROLS.add(b' ').add(b'"').add(b'#').add(b'%').add(b'/').add(b'<').add(b'>').add(b'?').add(b'@').add(b'`');

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SbomError {
    #[error("not a CycloneDX document: {0}")]
    MalformedSbom(String),
    #[error("SPDX documents are not supported; provide a CycloneDX SBOM")]
    Spdx,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PurlError {
    #[error("not a Maven package URL: {0}")]
    NotMavenPurl(String),
    #[error("malformed package URL {purl:?}: {reason}")]
    MalformedPurl { purl: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Declared,
    UnshadeAdded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbomComponent {
    pub purl: Option<String>,
    pub name: Option<String>,
    pub group: Option<String>,
    pub version: Option<String>,
    pub properties: Vec<(String, String)>,
    pub origin: Origin,
    /// Present when the purl is a valid Maven purl.
    pub coordinate: Option<Coordinate>,
    /// The component object exactly as read.
    pub raw: Map<String, Value>,
}

impl SbomComponent {
    pub fn is_scannable(&self) -> bool {
        self.coordinate.is_some()
    }

    fn from_raw(raw: Map<String, Value>) -> Self {
        let text = |k: &str| raw.get(k).and_then(Value::as_str).map(String::from);
        let properties: Vec<(String, String)> = raw
            .get("properties")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
            .filter_map(|p| Some((p.get("name")?.as_str()?.to_string(), p.get("value")?.as_str()?.to_string())))
            .collect();
        let purl = text("purl");
        let origin =
            if properties.iter().any(|(k, _)| k == PROP_DETECTION) { Origin::UnshadeAdded } else { Origin::Declared };
        SbomComponent {
            coordinate: purl.as_deref().and_then(|p| coordinate_of_purl(p).ok()),
            name: text("name"),
            group: text("group"),
            version: text("version"),
            purl,
            properties,
            origin,
            raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbomDocument {
    pub spec_version: String,
    /// Top-level components in document order.
    pub components: Vec<SbomComponent>,
    /// The whole input document; `components` is rewritten on output.
    pub raw: Map<String, Value>,
    had_components: bool,
}

impl SbomDocument {
    /// Coordinates of every component with a Maven purl, nested components included.
    pub fn declared_coordinates(&self) -> BTreeSet<Coordinate> {
        fn walk(v: &Value, out: &mut BTreeSet<Coordinate>) {
            for c in v.as_array().into_iter().flatten() {
                if let Some(coord) = c.get("purl").and_then(Value::as_str).and_then(|p| coordinate_of_purl(p).ok()) {
                    out.insert(coord);
                }
                if let Some(nested) = c.get("components") {
                    walk(nested, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        let top = Value::Array(self.components.iter().map(|c| Value::Object(c.raw.clone())).collect());
        walk(&top, &mut out);
        out
    }

    /// Declared (not unshade-added) components that can be scanned, deduplicated by coordinate.
    pub fn scannable(&self) -> Vec<Coordinate> {
        let mut seen = BTreeSet::new();
        self.components
            .iter()
            .filter(|c| c.origin == Origin::Declared)
            .filter_map(|c| c.coordinate.clone())
            .filter(|c| seen.insert(c.clone()))
            .collect()
    }
}

/// Reads a CycloneDX document. A missing `components` array is treated as empty.
pub fn parse_sbom(doc: &Value) -> Result<SbomDocument, SbomError> {
    let obj = doc.as_object().ok_or_else(|| SbomError::MalformedSbom("top level is not an object".into()))?;
    if obj.contains_key("spdxVersion") || obj.contains_key("SPDXID") {
        return Err(SbomError::Spdx);
    }
    match obj.get("bomFormat").and_then(Value::as_str) {
        Some("CycloneDX") => {}
        other => return Err(SbomError::MalformedSbom(format!("bomFormat is {other:?}"))),
    }
    let spec_version = obj
        .get("specVersion")
        .and_then(Value::as_str)
        .ok_or_else(|| SbomError::MalformedSbom("missing specVersion".into()))?
        .to_string();
    if !SUPPORTED_VERSIONS.contains(&spec_version.as_str()) {
        log::warn!("CycloneDX {spec_version} is outside the tested range 1.4-1.6");
    }
    let components = match obj.get("components") {
        None => {
            log::warn!("SBOM has no components array");
            Vec::new()
        }
        Some(Value::Array(items)) => items
            .iter()
            .map(|c| match c {
                Value::Object(m) => Ok(SbomComponent::from_raw(m.clone())),
                _ => Err(SbomError::MalformedSbom("component is not an object".into())),
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(SbomError::MalformedSbom("components is not an array".into())),
    };
    Ok(SbomDocument { spec_version, components, raw: obj.clone(), had_components: obj.contains_key("components") })
}

pub fn parse_sbom_str(text: &str) -> Result<SbomDocument, SbomError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SbomError::MalformedSbom(e.to_string()))?;
    parse_sbom(&v)
}

pub fn serialize_sbom(doc: &SbomDocument) -> Value {
    let mut out = doc.raw.clone();
    if doc.had_components || !doc.components.is_empty() {
        let comps = doc.components.iter().map(|c| Value::Object(c.raw.clone())).collect();
        out.insert("components".into(), Value::Array(comps));
    }
    Value::Object(out)
}

/// Parses `pkg:maven/<group>/<artifact>@<version>`, ignoring qualifiers and subpath.
pub fn coordinate_of_purl(purl: &str) -> Result<Coordinate, PurlError> {
    let malformed = |reason: &str| PurlError::MalformedPurl { purl: purl.to_string(), reason: reason.to_string() };
    let rest = purl
        .get(..4)
        .filter(|s| s.eq_ignore_ascii_case("pkg:"))
        .map(|_| &purl[4..])
        .ok_or_else(|| malformed("missing pkg: scheme"))?;
    let rest = rest.trim_start_matches('/');
    let (ty, rest) = rest.split_once('/').ok_or_else(|| malformed("missing type"))?;
    if !ty.eq_ignore_ascii_case("maven") {
        return Err(PurlError::NotMavenPurl(purl.to_string()));
    }
    let rest = rest.split('#').next().unwrap_or("");
    let rest = rest.split('?').next().unwrap_or("");
    let (path, version) = rest.rsplit_once('@').ok_or_else(|| malformed("missing version"))?;
    let decode = |s: &str| {
        percent_decode_str(s).decode_utf8().map(|c| c.into_owned()).map_err(|_| malformed("invalid percent-encoding"))
    };
    let mut segments: Vec<String> =
        path.split('/').filter(|s| !s.is_empty()).map(decode).collect::<Result<_, _>>()?;
    let artifact = segments.pop().ok_or_else(|| malformed("missing name"))?;
    if segments.is_empty() {
        return Err(malformed("missing namespace (groupId)"));
    }
    let group = segments.join(".");
    Coordinate::new(&group, &artifact, &decode(version)?).map_err(|e| malformed(&e.to_string()))
}

/// The Maven purl of a coordinate, without qualifiers.
pub fn purl_of(c: &Coordinate) -> String {
    let enc = |s: &str| utf8_percent_encode(s, PURL_SEGMENT).to_string();
    format!("pkg:maven/{}/{}@{}", enc(&c.group), enc(&c.artifact), enc(&c.version))
}

/// Appends a component for every matched version not already present.
///
/// A coordinate found in several containers becomes one component carrying
/// one `unshade:bundled-by` property per container. Added components are
/// sorted by purl and placed after the existing ones.
pub fn augment(sbom: &SbomDocument, grouped: &[GroupedMatch]) -> SbomDocument {
    let present = sbom.declared_coordinates();
    let present_purls: BTreeSet<&str> = sbom.components.iter().filter_map(|c| c.purl.as_deref()).collect();

    #[derive(Default)]
    struct Pending {
        detections: BTreeSet<&'static str>,
        containers: BTreeSet<String>,
        classes: usize,
    }
    let mut pending: BTreeMap<(String, Coordinate), Pending> = BTreeMap::new();
    for g in grouped {
        for c in g.coordinates() {
            let purl = purl_of(&c);
            if present.contains(&c) || present_purls.contains(purl.as_str()) {
                continue;
            }
            let p = pending.entry((purl, c)).or_default();
            p.detections.insert(g.kind.as_str());
            p.containers.insert(purl_of(&g.container));
            p.classes = p.classes.max(g.matched_class_count);
        }
    }

    let mut out = sbom.clone();
    for ((purl, c), p) in pending {
        let mut props: Vec<Value> = Vec::new();
        props.extend(p.detections.iter().map(|d| json!({"name": PROP_DETECTION, "value": d})));
        props.extend(p.containers.iter().map(|b| json!({"name": PROP_BUNDLED_BY, "value": b})));
        props.push(json!({"name": PROP_MATCHED_CLASSES, "value": p.classes.to_string()}));
        let raw = json!({
            "type": "library",
            "bom-ref": purl,
            "group": c.group,
            "name": c.artifact,
            "version": c.version,
            "purl": purl,
            "properties": props,
        });
        let Value::Object(raw) = raw else { unreachable!() };
        out.components.push(SbomComponent::from_raw(raw));
    }
    out
}
