use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RobotError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
    Free,
    Frozen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub range: [f64; 2],
}

impl Joint {
    pub fn width(&self) -> f64 {
        self.range[1] - self.range[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub id: String,
    /// `None` for the root body.
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub joints: Vec<Joint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub value: f64,
    #[serde(default)]
    pub unit: String,
}

/// A named robot: kinematic tree plus physical parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub name: String,
    pub bodies: Vec<Body>,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
    /// Local body/joint/parameter id -> canonical id. Ids not listed map to
    /// themselves.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub correspondence: BTreeMap<String, String>,
}

impl RobotSpec {
    pub fn from_json(text: &str) -> Result<RobotSpec> {
        Self::parse(text, "<memory>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RobotSpec> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RobotError::Io {
            file: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, file: &str) -> Result<RobotSpec> {
        let spec: RobotSpec = serde_json::from_str(text).map_err(|e| RobotError::InvalidSpec {
            file: file.to_string(),
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        spec.validate().map_err(|e| e.in_file(file))?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks that bodies form a rooted tree, joint ranges are ordered and
    /// finite, and parameter values are finite.
    pub fn validate(&self) -> Result<()> {
        let invalid = |path: String, message: &str| RobotError::InvalidSpec {
            file: String::new(),
            path,
            message: message.to_string(),
        };
        if self.name.is_empty() {
            return Err(invalid("name".into(), "empty robot name"));
        }
        if self.bodies.is_empty() {
            return Err(invalid("bodies".into(), "no bodies"));
        }
        let mut ids = HashMap::new();
        for (i, b) in self.bodies.iter().enumerate() {
            if ids.insert(b.id.as_str(), i).is_some() {
                return Err(invalid(format!("bodies[{i}].id"), "duplicate body id"));
            }
        }
        let roots = self.bodies.iter().filter(|b| b.parent.is_none()).count();
        if roots != 1 {
            return Err(invalid("bodies".into(), "expected exactly one root body"));
        }
        for (i, b) in self.bodies.iter().enumerate() {
            if let Some(p) = &b.parent {
                if !ids.contains_key(p.as_str()) {
                    return Err(invalid(format!("bodies[{i}].parent"), "unknown parent body"));
                }
            }
            // Walking up must reach the root within |bodies| steps.
            let mut cur = b;
            for _ in 0..=self.bodies.len() {
                match &cur.parent {
                    None => break,
                    Some(p) => cur = &self.bodies[ids[p.as_str()]],
                }
            }
            if cur.parent.is_some() {
                return Err(invalid(format!("bodies[{i}].parent"), "cyclic parent references"));
            }
            let mut names = BTreeSet::new();
            for (j, joint) in b.joints.iter().enumerate() {
                let at = format!("bodies[{i}].joints[{j}]");
                if !names.insert(joint.name.as_str()) {
                    return Err(invalid(format!("{at}.name"), "duplicate joint name"));
                }
                let [lo, hi] = joint.range;
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(invalid(format!("{at}.range"), "range must be finite with lo <= hi"));
                }
            }
        }
        for (k, p) in &self.params {
            if !p.value.is_finite() {
                return Err(invalid(format!("params.{k}"), "non-finite value"));
            }
        }
        Ok(())
    }

    /// Canonical id of a local id.
    pub fn canonical<'a>(&'a self, local: &'a str) -> &'a str {
        self.correspondence.get(local).map_or(local, String::as_str)
    }

    /// Canonical parameter key: the key itself if mapped, else a
    /// `body.<id>.` prefix rewritten through the body correspondence.
    pub fn canonical_param(&self, key: &str) -> String {
        if let Some(c) = self.correspondence.get(key) {
            return c.clone();
        }
        if let Some(rest) = key.strip_prefix("body.") {
            if let Some((body, tail)) = rest.split_once('.') {
                if let Some(c) = self.correspondence.get(body) {
                    return format!("body.{c}.{tail}");
                }
            }
        }
        key.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FINGER: &str = r#"{
        "name": "finger",
        "bodies": [
            {"id": "palm", "parent": null, "joints": []},
            {"id": "f1", "parent": "palm",
             "joints": [{"name": "f1_j", "kind": "revolute", "range": [-1.0, 1.0]}]}
        ],
        "params": {"body.f1.length": {"value": 0.1, "unit": "m"}},
        "correspondence": {"f1": "index"}
    }"#;

    #[test]
    fn parses_and_maps_ids() {
        let s = RobotSpec::from_json(FINGER).unwrap();
        assert_eq!(s.canonical("f1"), "index");
        assert_eq!(s.canonical("palm"), "palm");
        assert_eq!(s.canonical_param("body.f1.length"), "body.index.length");
        let back = RobotSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn missing_parent_is_root() {
        let s = RobotSpec::from_json(r#"{"name":"a","bodies":[{"id":"b"}]}"#).unwrap();
        assert!(s.bodies[0].parent.is_none());
    }

    #[test]
    fn rejects_cycles_and_bad_ranges() {
        let cyc = r#"{"name":"a","bodies":[{"id":"r"},{"id":"x","parent":"y"},{"id":"y","parent":"x"}]}"#;
        let err = RobotSpec::from_json(cyc).unwrap_err().to_string();
        assert!(err.contains("cyclic"), "{err}");
        let bad = r#"{"name":"a","bodies":[{"id":"r","joints":[{"name":"j","kind":"prismatic","range":[1,0]}]}]}"#;
        let err = RobotSpec::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("bodies[0].joints[0].range"), "{err}");
    }

    #[test]
    fn reports_file_and_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"name":"a","bodies":[{"id":"r"},{"id":"r"}]}"#).unwrap();
        let err = RobotSpec::load(&path).unwrap_err().to_string();
        assert!(err.contains("bad.json") && err.contains("bodies[1].id"), "{err}");
    }
}
