//! JSON interchange for trees and partial automorphisms.
//!
//! Trees: `{"elements": [...], "leq": [[lo, hi], ...], "meet": {"a,b": "r"}}`.
//! `leq` lists generators of the order; `meet` is optional and cross-checked.
//! Automorphisms: `{"tree": <tree>, "map": [[x, y], ...]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::pauto::{validate_pauto, PartialAutomorphism, PautoViolation};
use crate::tree::{validate_tree, Elem, MeetTree, RawTree, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meet: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutJson {
    pub tree: TreeJson,
    #[serde(default)]
    pub map: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("meet key {0:?} is not of the form \"a,b\" with known labels")]
    MeetKey(String),
    #[error("tree axioms violated: {}", serde_json::to_string(.0).unwrap_or_default())]
    Tree(Vec<Violation>),
    #[error("unknown label {0:?} in map")]
    MapLabel(String),
    #[error("invalid partial automorphism: {0}")]
    Pauto(PautoViolation),
}

impl TreeJson {
    /// Cover pairs plus the meets of incomparable pairs, all in label order.
    pub fn from_tree(t: &MeetTree) -> Self {
        let l = |e: Elem| t.label(e).to_string();
        let mut leq: Vec<(String, String)> = t.elements().filter_map(|e| t.parent(e).map(|p| (l(p), l(e)))).collect();
        leq.sort();
        let mut meet = BTreeMap::new();
        for a in t.elements() {
            for b in t.elements() {
                if t.label(a) < t.label(b) && !t.comparable(a, b) {
                    meet.insert(format!("{},{}", l(a), l(b)), l(t.meet(a, b)));
                }
            }
        }
        TreeJson { elements: t.labels().to_vec(), leq, meet }
    }

    pub fn to_raw(&self) -> Result<RawTree, JsonError> {
        let known: std::collections::HashSet<&str> = self.elements.iter().map(String::as_str).collect();
        let mut meet = Vec::new();
        for (k, v) in &self.meet {
            // Labels may themselves contain commas, so try every split point.
            let split = k
                .match_indices(',')
                .map(|(i, _)| (&k[..i], &k[i + 1..]))
                .find(|(a, b)| known.contains(a) && known.contains(b))
                .ok_or_else(|| JsonError::MeetKey(k.clone()))?;
            meet.push(((split.0.to_string(), split.1.to_string()), v.clone()));
        }
        Ok(RawTree { elements: self.elements.clone(), leq: self.leq.clone(), meet })
    }

    pub fn to_tree(&self) -> Result<MeetTree, JsonError> {
        validate_tree(&self.to_raw()?).map_err(JsonError::Tree)
    }
}

impl AutJson {
    pub fn from_pauto(p: &PartialAutomorphism) -> Self {
        AutJson { tree: TreeJson::from_tree(p.tree()), map: p.label_pairs() }
    }

    pub fn to_pauto(&self) -> Result<PartialAutomorphism, JsonError> {
        let t = self.tree.to_tree()?;
        map_on_tree(&t, &self.map)
    }
}

/// Resolves a labelled map against `t` and validates it.
pub fn map_on_tree(t: &MeetTree, map: &[(String, String)]) -> Result<PartialAutomorphism, JsonError> {
    let idx = |s: &String| t.index_of(s).ok_or_else(|| JsonError::MapLabel(s.clone()));
    let pairs = map.iter().map(|(x, y)| Ok((idx(x)?, idx(y)?))).collect::<Result<Vec<_>, JsonError>>()?;
    validate_pauto(t, &pairs).map_err(JsonError::Pauto)
}

pub fn parse_tree(s: &str) -> Result<MeetTree, JsonError> {
    serde_json::from_str::<TreeJson>(s)?.to_tree()
}

pub fn parse_aut(s: &str) -> Result<PartialAutomorphism, JsonError> {
    serde_json::from_str::<AutJson>(s)?.to_pauto()
}
