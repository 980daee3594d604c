//! JSON files for structures.
//!
//! ```json
//! {
//!   "vocabulary": [{"name": "E", "arity": 2}, {"name": "P", "arity": 1}],
//!   "universe": 3,
//!   "relations": {"E": [[0, 1], [1, 0]], "P": [[2]]}
//! }
//! ```
//!
//! `universe` may instead list element labels, e.g. `["a", "b", "c"]`; the
//! tuples then name elements by label and elements are numbered in list
//! order.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{Element, Structure, StructureError, Vocabulary};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid structure file")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("label `{0}` listed twice in the universe")]
    DuplicateLabel(String),
    #[error("relation `{relation}` tuple {index}: unknown element `{element}`")]
    UnknownElement {
        relation: String,
        index: usize,
        element: String,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbol {
    name: String,
    arity: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawUniverse {
    Size(usize),
    Labels(Vec<String>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawElement {
    Index(usize),
    Label(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    vocabulary: Vec<RawSymbol>,
    universe: RawUniverse,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<RawElement>>>,
}

/// A parsed structure file. `labels[i]` names element `i` when the file
/// used labels.
#[derive(Debug, Clone)]
pub struct StructureFile {
    pub structure: Structure,
    pub labels: Option<Vec<String>>,
}

impl StructureFile {
    /// Display name of an element.
    pub fn name(&self, a: Element) -> String {
        match &self.labels {
            Some(labels) => labels[a].clone(),
            None => a.to_string(),
        }
    }
}

pub fn parse_structure(text: &str) -> Result<StructureFile, IoError> {
    let raw: RawStructure = serde_json::from_str(text)?;
    let vocabulary = Vocabulary::new(raw.vocabulary.iter().map(|s| (s.name.as_str(), s.arity)))?;
    let (size, labels) = match raw.universe {
        RawUniverse::Size(n) => (n, None),
        RawUniverse::Labels(labels) => (labels.len(), Some(labels)),
    };
    let index: Option<HashMap<&str, Element>> = match &labels {
        Some(labels) => {
            let mut index = HashMap::with_capacity(labels.len());
            for (i, l) in labels.iter().enumerate() {
                if index.insert(l.as_str(), i).is_some() {
                    return Err(IoError::DuplicateLabel(l.clone()));
                }
            }
            Some(index)
        }
        None => None,
    };
    let mut relations = Vec::with_capacity(raw.relations.len());
    for (name, tuples) in &raw.relations {
        let mut resolved = Vec::with_capacity(tuples.len());
        for (i, tuple) in tuples.iter().enumerate() {
            let t = tuple
                .iter()
                .map(|e| match (e, &index) {
                    (RawElement::Index(a), None) => Ok(*a),
                    (RawElement::Label(l), Some(index)) => {
                        index.get(l.as_str()).copied().ok_or_else(|| l.clone())
                    }
                    (RawElement::Index(a), Some(_)) => Err(a.to_string()),
                    (RawElement::Label(l), None) => Err(l.clone()),
                })
                .collect::<Result<Vec<Element>, String>>()
                .map_err(|element| IoError::UnknownElement {
                    relation: name.clone(),
                    index: i,
                    element,
                })?;
            resolved.push(t);
        }
        relations.push((name.as_str(), resolved));
    }
    let structure = Structure::new(vocabulary, size, relations)?;
    Ok(StructureFile { structure, labels })
}

/// Serializes with a numeric universe; output depends only on the
/// structure, so equal structures give identical text.
pub fn structure_to_json(s: &Structure) -> String {
    let raw = RawStructure {
        vocabulary: s
            .vocabulary()
            .symbols()
            .iter()
            .map(|sym| RawSymbol {
                name: sym.name.clone(),
                arity: sym.arity,
            })
            .collect(),
        universe: RawUniverse::Size(s.universe_size()),
        relations: s
            .relations()
            .map(|(sym, rel)| {
                let tuples = rel
                    .tuples()
                    .map(|t| t.iter().map(|&a| RawElement::Index(a)).collect())
                    .collect();
                (sym.name.clone(), tuples)
            })
            .collect(),
    };
    let mut out = serde_json::to_string(&raw).expect("serializable structure");
    out.push('\n');
    out
}
