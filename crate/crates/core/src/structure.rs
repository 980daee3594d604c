//! Finite relational structures over a fixed vocabulary.
//!
//! The universe of a [`Structure`] is always `0..n`. Relations are stored as
//! sorted, deduplicated tuple lists so that membership is a binary search and
//! all tuples sharing a first entry form a contiguous run.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::gaifman::GaifmanGraph;
use crate::treewidth;

/// An element of a structure's universe.
pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("relation symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("relation symbol `{0}` has arity 0")]
    ZeroArity(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("universe must be non-empty")]
    EmptyUniverse,
    #[error("relation `{relation}` tuple {index}: expected arity {expected}, found {found}")]
    ArityMismatch {
        relation: String,
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("relation `{relation}` tuple {index} position {position}: element {element} outside universe 0..{universe}")]
    ElementOutOfRange {
        relation: String,
        index: usize,
        position: usize,
        element: usize,
        universe: usize,
    },
    #[error("element {element} outside universe 0..{universe}")]
    NoSuchElement { element: Element, universe: usize },
    #[error("induced substructure requires a non-empty element set")]
    EmptySubset,
}

/// A relation symbol with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
}

impl Vocabulary {
    pub fn new<I, S>(symbols: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for (name, arity) in symbols {
            let name = name.into();
            if arity == 0 {
                return Err(StructureError::ZeroArity(name));
            }
            if vocab.index_of(&name).is_some() {
                return Err(StructureError::DuplicateSymbol(name));
            }
            vocab.symbols.push(Symbol { name, arity });
        }
        Ok(vocab)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.symbols.iter().find(|s| s.name == name)
    }
}

/// The interpretation of one relation symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    // sorted lexicographically, no duplicates
    tuples: Vec<Box<[Element]>>,
}

impl Relation {
    fn from_tuples(arity: usize, mut tuples: Vec<Box<[Element]>>) -> Self {
        tuples.sort_unstable();
        tuples.dedup();
        Relation { arity, tuples }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[Element]> + '_ {
        self.tuples.iter().map(|t| &t[..])
    }

    pub fn contains(&self, tuple: &[Element]) -> bool {
        self.tuples
            .binary_search_by(|t| (**t).cmp(tuple))
            .is_ok()
    }

    /// Tuples whose first entry is `a`.
    pub fn starting_with(&self, a: Element) -> &[Box<[Element]>] {
        let lo = self.tuples.partition_point(|t| t[0] < a);
        let hi = self.tuples.partition_point(|t| t[0] <= a);
        &self.tuples[lo..hi]
    }
}

/// A finite relational structure with universe `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    vocabulary: Vocabulary,
    universe: usize,
    relations: Vec<Relation>,
}

/// `||A|| = |A| + sum over R of arity(R) * |R^A|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SizeReport {
    pub universe: usize,
    pub total_size: usize,
}

impl Structure {
    /// Builds a structure, validating arities and element ranges. Duplicate
    /// tuples are collapsed.
    pub fn new<I, S>(
        vocabulary: Vocabulary,
        universe: usize,
        relations: I,
    ) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (S, Vec<Vec<Element>>)>,
        S: AsRef<str>,
    {
        if universe == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        let mut raw: Vec<Vec<Box<[Element]>>> = vec![Vec::new(); vocabulary.len()];
        for (name, tuples) in relations {
            let name = name.as_ref();
            let idx = vocabulary
                .index_of(name)
                .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?;
            let arity = vocabulary.symbols[idx].arity;
            for (index, tuple) in tuples.into_iter().enumerate() {
                if tuple.len() != arity {
                    return Err(StructureError::ArityMismatch {
                        relation: name.to_string(),
                        index,
                        expected: arity,
                        found: tuple.len(),
                    });
                }
                if let Some((position, &element)) =
                    tuple.iter().enumerate().find(|(_, &e)| e >= universe)
                {
                    return Err(StructureError::ElementOutOfRange {
                        relation: name.to_string(),
                        index,
                        position,
                        element,
                        universe,
                    });
                }
                raw[idx].push(tuple.into_boxed_slice());
            }
        }
        let relations = vocabulary
            .symbols
            .iter()
            .zip(raw)
            .map(|(sym, tuples)| Relation::from_tuples(sym.arity, tuples))
            .collect();
        Ok(Structure {
            vocabulary,
            universe,
            relations,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// Number of elements `n`; the universe is `0..n`.
    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.vocabulary.index_of(name).map(|i| &self.relations[i])
    }

    pub fn relation_at(&self, index: usize) -> &Relation {
        &self.relations[index]
    }

    /// `(symbol, relation)` pairs in vocabulary order.
    pub fn relations(&self) -> impl Iterator<Item = (&Symbol, &Relation)> + '_ {
        self.vocabulary.symbols.iter().zip(&self.relations)
    }

    pub fn size(&self) -> SizeReport {
        let tuples: usize = self.relations.iter().map(|r| r.arity * r.len()).sum();
        SizeReport {
            universe: self.universe,
            total_size: self.universe + tuples,
        }
    }

    pub fn gaifman_graph(&self) -> GaifmanGraph {
        GaifmanGraph::of_structure(self)
    }

    pub fn check_element(&self, a: Element) -> Result<(), StructureError> {
        if a < self.universe {
            Ok(())
        } else {
            Err(StructureError::NoSuchElement {
                element: a,
                universe: self.universe,
            })
        }
    }

    /// The substructure induced on `subset`, together with the relabeling
    /// between old and new element ids. New ids follow the ascending order
    /// of the old ones.
    pub fn induced_substructure(
        &self,
        subset: &[Element],
    ) -> Result<(Structure, Relabeling), StructureError> {
        let relabeling = Relabeling::new(subset, self.universe)?;
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                let mut tuples = Vec::new();
                for &a in relabeling.to_global() {
                    for t in rel.starting_with(a) {
                        let mapped: Option<Box<[Element]>> =
                            t.iter().map(|&e| relabeling.local(e)).collect();
                        if let Some(mapped) = mapped {
                            tuples.push(mapped);
                        }
                    }
                }
                Relation::from_tuples(rel.arity, tuples)
            })
            .collect();
        let sub = Structure {
            vocabulary: self.vocabulary.clone(),
            universe: relabeling.len(),
            relations,
        };
        Ok((sub, relabeling))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "structure(n={}", self.universe)?;
        for (sym, rel) in self.relations() {
            write!(f, ", {}/{}: {} tuples", sym.name, sym.arity, rel.len())?;
        }
        write!(f, ")")
    }
}

/// Bijection between a subset of a universe and `0..subset.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    to_global: Vec<Element>,
    to_local: HashMap<Element, Element>,
}

impl Relabeling {
    fn new(subset: &[Element], universe: usize) -> Result<Self, StructureError> {
        let mut to_global = subset.to_vec();
        to_global.sort_unstable();
        to_global.dedup();
        if to_global.is_empty() {
            return Err(StructureError::EmptySubset);
        }
        if let Some(&bad) = to_global.last().filter(|&&a| a >= universe) {
            return Err(StructureError::NoSuchElement {
                element: bad,
                universe,
            });
        }
        let to_local = to_global
            .iter()
            .enumerate()
            .map(|(local, &global)| (global, local))
            .collect();
        Ok(Relabeling {
            to_global,
            to_local,
        })
    }

    pub fn len(&self) -> usize {
        self.to_global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_global.is_empty()
    }

    pub fn local(&self, global: Element) -> Option<Element> {
        self.to_local.get(&global).copied()
    }

    pub fn global(&self, local: Element) -> Element {
        self.to_global[local]
    }

    /// Old ids, indexed by new id.
    pub fn to_global(&self) -> &[Element] {
        &self.to_global
    }
}

/// Per-radius upper bounds on the local tree-width `ltw(r)` for `r = 0..=r_max`.
///
/// Each entry is the maximum, over all elements `a`, of a width bound for the
/// substructure induced on `N_r(a)`. Balls with at most
/// [`treewidth::EXACT_WIDTH_CAP`] elements are measured exactly, larger ones
/// with the min-degree heuristic, so the values are upper bounds.
pub fn local_tree_width_profile(s: &Structure, r_max: usize) -> Vec<usize> {
    let graph = s.gaifman_graph();
    let mut bfs = graph.bfs();
    (0..=r_max)
        .map(|r| {
            (0..s.universe_size())
                .map(|a| {
                    let ball = bfs.ball(&graph, a, r);
                    let sub = graph.induced(&ball);
                    if ball.len() <= treewidth::EXACT_WIDTH_CAP {
                        treewidth::exact_graph_width(&sub, treewidth::EXACT_WIDTH_CAP)
                            .expect("ball within exact cap")
                    } else {
                        treewidth::heuristic_graph_decomposition(&sub).width()
                    }
                })
                .max()
                .unwrap_or(0)
        })
        .collect()
}
