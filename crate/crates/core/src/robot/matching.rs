use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{JointKind, RobotError, RobotSpec, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalJoint {
    pub name: String,
    pub kind: JointKind,
    /// Range in each robot, in robot order; `None` where the robot lacks
    /// the joint.
    pub ranges: Vec<Option<[f64; 2]>>,
}

impl CanonicalJoint {
    /// Range of robot `i`; an absent joint is frozen at zero.
    pub fn range_of(&self, i: usize) -> [f64; 2] {
        self.ranges[i].unwrap_or([0.0, 0.0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalBody {
    pub id: String,
    pub parent: Option<String>,
    pub joints: Vec<CanonicalJoint>,
    /// Which robots contain this body.
    pub present: Vec<bool>,
}

/// Graph union of the robots' kinematic trees with every robot embedded as a
/// full-length parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedSpace {
    /// Robot names in input order.
    pub robots: Vec<String>,
    /// Canonical bodies sorted by id.
    pub bodies: Vec<CanonicalBody>,
    /// Canonical parameter keys, sorted.
    pub keys: Vec<String>,
    pub units: Vec<String>,
    /// `thetas[i][d]`: robot `i`'s value for `keys[d]`; zero when absent.
    pub thetas: Vec<Vec<f64>>,
}

impl MatchedSpace {
    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn robot_index(&self, name: &str) -> Option<usize> {
        self.robots.iter().position(|r| r == name)
    }

    pub fn theta_of(&self, name: &str) -> Option<&[f64]> {
        self.robot_index(name).map(|i| self.thetas[i].as_slice())
    }
}

/// Builds the canonical kinematic tree as the union of all robots' trees
/// under their correspondences.
pub fn match_kinematics(specs: &[RobotSpec]) -> Result<MatchedSpace> {
    if specs.len() < 2 {
        return Err(RobotError::InvalidInput("need at least two robots".into()));
    }
    let n = specs.len();
    let mut names = BTreeSet::new();
    for s in specs {
        s.validate()?;
        if !names.insert(s.name.as_str()) {
            return Err(RobotError::InvalidInput(format!("duplicate robot name `{}`", s.name)));
        }
    }
    let conflict = |s: &RobotSpec, message: String| RobotError::Conflict {
        robot: s.name.clone(),
        message,
    };

    struct Acc {
        parent: Option<Option<String>>,
        joints: BTreeMap<String, CanonicalJoint>,
        present: Vec<bool>,
    }
    let mut bodies: BTreeMap<String, Acc> = BTreeMap::new();
    let mut params: BTreeMap<String, (String, Vec<f64>)> = BTreeMap::new();

    for (i, s) in specs.iter().enumerate() {
        let mut seen_bodies = BTreeSet::new();
        let mut seen_joints = BTreeSet::new();
        for b in &s.bodies {
            let id = s.canonical(&b.id).to_string();
            if !seen_bodies.insert(id.clone()) {
                return Err(conflict(s, format!("two bodies map to canonical body `{id}`")));
            }
            let parent = b.parent.as_deref().map(|p| s.canonical(p).to_string());
            let acc = bodies.entry(id.clone()).or_insert_with(|| Acc {
                parent: None,
                joints: BTreeMap::new(),
                present: vec![false; n],
            });
            match &acc.parent {
                None => acc.parent = Some(parent),
                Some(p) if *p == parent => {}
                Some(p) => {
                    return Err(conflict(
                        s,
                        format!("body `{id}` has parent {parent:?} but another robot uses {p:?}"),
                    ))
                }
            }
            acc.present[i] = true;
            for j in &b.joints {
                let jid = s.canonical(&j.name).to_string();
                if !seen_joints.insert(jid.clone()) {
                    return Err(conflict(s, format!("two joints map to canonical joint `{jid}`")));
                }
                let cj = acc.joints.entry(jid.clone()).or_insert_with(|| CanonicalJoint {
                    name: jid.clone(),
                    kind: j.kind,
                    ranges: vec![None; n],
                });
                cj.kind = match (cj.kind, j.kind) {
                    (a, b) if a == b => a,
                    (JointKind::Frozen, b) => b,
                    (a, JointKind::Frozen) => a,
                    (a, b) => {
                        return Err(conflict(
                            s,
                            format!("joint `{jid}` is {b:?} here but {a:?} elsewhere"),
                        ))
                    }
                };
                cj.ranges[i] = Some(j.range);
            }
        }
        let mut seen_params = BTreeSet::new();
        for (key, p) in &s.params {
            let ck = s.canonical_param(key);
            if !seen_params.insert(ck.clone()) {
                return Err(conflict(s, format!("two parameters map to `{ck}`")));
            }
            let entry = params
                .entry(ck.clone())
                .or_insert_with(|| (p.unit.clone(), vec![0.0; n]));
            if entry.0 != p.unit {
                return Err(RobotError::MixedUnits {
                    key: ck,
                    a: entry.0.clone(),
                    b: p.unit.clone(),
                });
            }
            entry.1[i] = p.value;
        }
    }

    // A joint may share a canonical id with one on a different body.
    let mut joint_owner = BTreeMap::new();
    for (id, acc) in &bodies {
        for j in acc.joints.keys() {
            if let Some(other) = joint_owner.insert(j.clone(), id.clone()) {
                return Err(RobotError::Conflict {
                    robot: String::new(),
                    message: format!("joint `{j}` appears on bodies `{other}` and `{id}`"),
                });
            }
        }
    }
    let roots: Vec<&String> = bodies
        .iter()
        .filter(|(_, a)| matches!(a.parent, Some(None)))
        .map(|(id, _)| id)
        .collect();
    if roots.len() != 1 {
        return Err(RobotError::InvalidInput(format!(
            "matched tree must have one root, found {roots:?}"
        )));
    }

    let keys: Vec<String> = params.keys().cloned().collect();
    let units = params.values().map(|(u, _)| u.clone()).collect();
    let thetas = (0..n)
        .map(|i| params.values().map(|(_, v)| v[i]).collect())
        .collect();
    Ok(MatchedSpace {
        robots: specs.iter().map(|s| s.name.clone()).collect(),
        bodies: bodies
            .into_iter()
            .map(|(id, a)| CanonicalBody {
                id,
                parent: a.parent.flatten(),
                joints: a.joints.into_values().collect(),
                present: a.present,
            })
            .collect(),
        keys,
        units,
        thetas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::{Body, Joint, Param};

    fn hand(name: &str, fingers: &[&str], length: f64) -> RobotSpec {
        let mut bodies = vec![Body {
            id: "palm".into(),
            parent: None,
            joints: vec![],
        }];
        let mut params = BTreeMap::new();
        for f in fingers {
            bodies.push(Body {
                id: (*f).into(),
                parent: Some("palm".into()),
                joints: vec![Joint {
                    name: format!("{f}_j"),
                    kind: JointKind::Revolute,
                    range: [-1.0, 1.0],
                }],
            });
            params.insert(
                format!("body.{f}.length"),
                Param {
                    value: length,
                    unit: "m".into(),
                },
            );
        }
        RobotSpec {
            name: name.into(),
            bodies,
            params,
            correspondence: BTreeMap::new(),
        }
    }

    #[test]
    fn identical_robots_match_to_themselves() {
        let a = hand("a", &["f1"], 0.1);
        let mut b = a.clone();
        b.name = "b".into();
        let m = match_kinematics(&[a, b]).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.bodies.len(), 2);
        assert_eq!(m.thetas, vec![vec![0.1], vec![0.1]]);
    }

    #[test]
    fn missing_fingers_embed_as_zero() {
        let five = hand("five", &["f1", "f2", "f3", "f4", "f5"], 0.1);
        let two = hand("two", &["f1", "f2"], 0.2);
        let three = hand("three", &["f1", "f2", "f3"], 0.3);
        let m = match_kinematics(&[five, two, three]).unwrap();
        assert_eq!(m.bodies.len(), 6);
        assert_eq!(m.dim(), 5);
        assert_eq!(m.theta_of("two").unwrap(), &[0.2, 0.2, 0.0, 0.0, 0.0]);
        let f5 = m.bodies.iter().find(|b| b.id == "f5").unwrap();
        assert_eq!(f5.present, vec![true, false, false]);
        assert_eq!(f5.joints[0].range_of(1), [0.0, 0.0]);
    }

    #[test]
    fn correspondence_renames_bodies_and_params() {
        let a = hand("a", &["index"], 0.1);
        let mut b = hand("b", &["claw"], 0.3);
        b.correspondence.insert("claw".into(), "index".into());
        b.correspondence.insert("claw_j".into(), "index_j".into());
        let m = match_kinematics(&[a, b]).unwrap();
        assert_eq!(m.keys, vec!["body.index.length"]);
        assert_eq!(m.thetas, vec![vec![0.1], vec![0.3]]);
        assert_eq!(m.bodies.len(), 2);
    }

    #[test]
    fn two_local_bodies_onto_one_canonical_is_a_conflict() {
        let a = hand("a", &["f1"], 0.1);
        let mut b = hand("b", &["f1", "f2"], 0.1);
        b.correspondence.insert("f2".into(), "f1".into());
        assert!(matches!(match_kinematics(&[a, b]), Err(RobotError::Conflict { .. })));
    }

    #[test]
    fn mixed_units_are_rejected() {
        let a = hand("a", &["f1"], 0.1);
        let mut b = hand("b", &["f1"], 10.0);
        b.params.get_mut("body.f1.length").unwrap().unit = "cm".into();
        assert!(matches!(match_kinematics(&[a, b]), Err(RobotError::MixedUnits { .. })));
    }

    #[test]
    fn order_insensitive() {
        let specs = [
            hand("x", &["f1", "f2"], 0.1),
            hand("y", &["f1", "f3"], 0.2),
            hand("z", &["f2"], 0.3),
        ];
        let m1 = match_kinematics(&specs).unwrap();
        let rev: Vec<RobotSpec> = specs.iter().rev().cloned().collect();
        let m2 = match_kinematics(&rev).unwrap();
        assert_eq!(m1.keys, m2.keys);
        let ids = |m: &MatchedSpace| m.bodies.iter().map(|b| (b.id.clone(), b.parent.clone())).collect::<Vec<_>>();
        assert_eq!(ids(&m1), ids(&m2));
        for r in ["x", "y", "z"] {
            assert_eq!(m1.theta_of(r), m2.theta_of(r));
        }
    }

    #[test]
    fn needs_two_robots() {
        assert!(match_kinematics(&[hand("a", &["f1"], 0.1)]).is_err());
    }
}
