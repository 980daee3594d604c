//! Sentences in Gaifman normal form: Boolean combinations of basic local
//! sentences
//!
//! ```text
//! exists x1 ... xm ( /\_{i<j} dist(xi, xj) > 2r  and  /\_i psi(xi) )
//! ```
//!
//! with `psi(x)` r-local around `x`.
//!
//! On disk a sentence is a JSON tree:
//!
//! ```json
//! {"op": "and", "children": [
//!   {"op": "leaf", "leaf": {"r": 1, "m": 2, "psi": "exists y (dist(x, y) <= 1 and E(x, y))"}},
//!   {"op": "not", "children": [{"op": "leaf", "leaf": {"r": 1, "m": 1, "psi": "P(x)"}}]}
//! ]}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::{CompiledFormula, EvalContext, Quantification};
use super::formula::{Formula, Var};
use super::locality::check_r_local;
use super::parse::{parse_formula_with_free, ParseError};
use super::LogicError;
use crate::structure::{Element, Structure};

/// The distinguished free variable of local formulas, `x`.
pub fn center_var() -> Var {
    Var::new("x")
}

/// `exists x1..xm` pairwise farther apart than `2r`, each satisfying `psi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicLocalSentence {
    radius: usize,
    count: usize,
    psi: Formula,
}

impl BasicLocalSentence {
    pub fn new(radius: usize, count: usize, psi: Formula) -> Result<Self, LogicError> {
        if radius == 0 || count == 0 {
            return Err(LogicError::BadLeafParameters { radius, count });
        }
        let center = center_var();
        if let Some(found) = psi.free_vars().into_iter().find(|v| *v != center) {
            return Err(LogicError::ExtraFreeVariable { center, found });
        }
        if !check_r_local(&psi, radius, &center) {
            return Err(LogicError::NotLocal {
                formula: psi.to_string(),
                radius,
                center,
            });
        }
        Ok(BasicLocalSentence { radius, count, psi })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn psi(&self) -> &Formula {
        &self.psi
    }

    /// The sentence as a single first-order formula. Witness variables are
    /// named `w1..wm`, with underscores appended until they are fresh in `psi`.
    pub fn to_formula(&self) -> Formula {
        let used = self.psi.all_vars();
        let mut suffix = String::new();
        while (1..=self.count).any(|i| used.contains(&Var::new(&format!("w{i}{suffix}")))) {
            suffix.push('_');
        }
        let witness = |i: usize| Var::new(&format!("w{i}{suffix}"));
        let center = center_var();
        let mut parts = Vec::new();
        for i in 1..=self.count {
            for j in i + 1..=self.count {
                parts.push(Formula::DistGt(witness(i), witness(j), 2 * self.radius));
            }
        }
        for i in 1..=self.count {
            parts.push(rename_free(&self.psi, &center, &witness(i)));
        }
        let mut f = Formula::conjunction(parts).expect("count >= 1");
        for i in (1..=self.count).rev() {
            f = Formula::exists(witness(i), f);
        }
        f
    }
}

// `to` must not be bound anywhere in `f`.
fn rename_free(f: &Formula, from: &Var, to: &Var) -> Formula {
    let r = |v: &Var| if v == from { to.clone() } else { v.clone() };
    match f {
        Formula::Rel { symbol, args } => Formula::Rel {
            symbol: symbol.clone(),
            args: args.iter().map(r).collect(),
        },
        Formula::Eq(a, b) => Formula::Eq(r(a), r(b)),
        Formula::DistLe(a, b, s) => Formula::DistLe(r(a), r(b), *s),
        Formula::DistGt(a, b, s) => Formula::DistGt(r(a), r(b), *s),
        Formula::Not(g) => Formula::not(rename_free(g, from, to)),
        Formula::And(a, b) => Formula::and(rename_free(a, from, to), rename_free(b, from, to)),
        Formula::Or(a, b) => Formula::or(rename_free(a, from, to), rename_free(b, from, to)),
        Formula::Implies(a, b) => {
            Formula::implies(rename_free(a, from, to), rename_free(b, from, to))
        }
        Formula::Exists(v, _) | Formula::Forall(v, _) if v == from => f.clone(),
        Formula::Exists(v, body) => Formula::exists(v.clone(), rename_free(body, from, to)),
        Formula::Forall(v, body) => Formula::forall(v.clone(), rename_free(body, from, to)),
    }
}

/// A Boolean combination of basic local sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GaifmanSentence {
    Leaf(BasicLocalSentence),
    Not(Box<GaifmanSentence>),
    And(Vec<GaifmanSentence>),
    Or(Vec<GaifmanSentence>),
}

impl GaifmanSentence {
    pub fn leaf(radius: usize, count: usize, psi: Formula) -> Result<Self, LogicError> {
        BasicLocalSentence::new(radius, count, psi).map(GaifmanSentence::Leaf)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(g: GaifmanSentence) -> Self {
        GaifmanSentence::Not(Box::new(g))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&BasicLocalSentence> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a BasicLocalSentence>) {
        match self {
            GaifmanSentence::Leaf(l) => out.push(l),
            GaifmanSentence::Not(g) => g.collect_leaves(out),
            GaifmanSentence::And(gs) | GaifmanSentence::Or(gs) => {
                gs.iter().for_each(|g| g.collect_leaves(out))
            }
        }
    }

    /// Folds the tree given the truth value of every leaf, in
    /// [`GaifmanSentence::leaves`] order.
    pub fn fold(&self, leaf_values: &[bool]) -> bool {
        let mut it = leaf_values.iter().copied();
        let v = self.fold_with(&mut it);
        debug_assert!(it.next().is_none(), "more leaf values than leaves");
        v
    }

    fn fold_with<I: Iterator<Item = bool>>(&self, values: &mut I) -> bool {
        match self {
            GaifmanSentence::Leaf(_) => values.next().expect("one value per leaf"),
            GaifmanSentence::Not(g) => !g.fold_with(values),
            // every child consumes its leaves, no short-circuit
            GaifmanSentence::And(gs) => gs.iter().fold(true, |acc, g| g.fold_with(values) & acc),
            GaifmanSentence::Or(gs) => gs.iter().fold(false, |acc, g| g.fold_with(values) | acc),
        }
    }

    /// The whole sentence as one first-order formula.
    pub fn to_formula(&self) -> Formula {
        match self {
            GaifmanSentence::Leaf(l) => l.to_formula(),
            GaifmanSentence::Not(g) => Formula::not(g.to_formula()),
            GaifmanSentence::And(gs) => {
                Formula::conjunction(gs.iter().map(|g| g.to_formula())).expect("non-empty")
            }
            GaifmanSentence::Or(gs) => {
                Formula::disjunction(gs.iter().map(|g| g.to_formula())).expect("non-empty")
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GnfError> {
        let raw: RawNode = serde_json::from_str(text)?;
        Self::from_raw(raw, "root")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable tree")
    }

    fn from_raw(raw: RawNode, path: &str) -> Result<Self, GnfError> {
        let shape = |msg: String| GnfError::Shape {
            path: path.to_string(),
            message: msg,
        };
        match raw {
            RawNode::Leaf { leaf } => {
                let psi = parse_formula_with_free(&leaf.psi, &[center_var()]).map_err(|source| {
                    GnfError::Formula {
                        path: path.to_string(),
                        source,
                    }
                })?;
                GaifmanSentence::leaf(leaf.r, leaf.m, psi).map_err(|source| GnfError::Leaf {
                    path: path.to_string(),
                    source,
                })
            }
            RawNode::Not { children } => {
                let [child]: [RawNode; 1] = children
                    .try_into()
                    .map_err(|c: Vec<RawNode>| shape(format!("`not` needs exactly one child, found {}", c.len())))?;
                Ok(GaifmanSentence::not(Self::from_raw(child, &format!("{path}.0"))?))
            }
            RawNode::And { children } | RawNode::Or { children } if children.is_empty() => {
                Err(shape("`and`/`or` need at least one child".into()))
            }
            RawNode::And { children } => Ok(GaifmanSentence::And(Self::children(children, path)?)),
            RawNode::Or { children } => Ok(GaifmanSentence::Or(Self::children(children, path)?)),
        }
    }

    fn children(children: Vec<RawNode>, path: &str) -> Result<Vec<Self>, GnfError> {
        children
            .into_iter()
            .enumerate()
            .map(|(i, c)| Self::from_raw(c, &format!("{path}.{i}")))
            .collect()
    }

    fn to_raw(&self) -> RawNode {
        match self {
            GaifmanSentence::Leaf(l) => RawNode::Leaf {
                leaf: RawLeaf {
                    r: l.radius,
                    m: l.count,
                    psi: l.psi.to_string(),
                },
            },
            GaifmanSentence::Not(g) => RawNode::Not {
                children: vec![g.to_raw()],
            },
            GaifmanSentence::And(gs) => RawNode::And {
                children: gs.iter().map(Self::to_raw).collect(),
            },
            GaifmanSentence::Or(gs) => RawNode::Or {
                children: gs.iter().map(Self::to_raw).collect(),
            },
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
enum RawNode {
    And { children: Vec<RawNode> },
    Or { children: Vec<RawNode> },
    Not { children: Vec<RawNode> },
    Leaf { leaf: RawLeaf },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLeaf {
    r: usize,
    m: usize,
    psi: String,
}

#[derive(Debug, Error)]
pub enum GnfError {
    #[error("malformed sentence file")]
    Json(#[from] serde_json::Error),
    #[error("node {path}: {message}")]
    Shape { path: String, message: String },
    #[error("node {path}: psi")]
    Formula { path: String, source: ParseError },
    #[error("node {path}")]
    Leaf { path: String, source: LogicError },
}

/// Brute-force truth value of one basic local sentence: `psi` is evaluated
/// at every element with full-universe quantification, then all increasing
/// `m`-tuples of satisfying elements are tried against the pairwise
/// `> 2r` distance condition.
pub fn eval_leaf_naive(s: &Structure, leaf: &BasicLocalSentence) -> Result<bool, LogicError> {
    let compiled = CompiledFormula::compile(&leaf.psi, s.vocabulary(), &[center_var()])?;
    let mut ctx = EvalContext::new(s);
    let satisfying: Vec<Element> = (0..s.universe_size())
        .filter(|&a| compiled.evaluate(&mut ctx, &[a], Quantification::Full))
        .collect();
    let spread = 2 * leaf.radius;
    let graph = s.gaifman_graph();
    let mut bfs = graph.bfs();
    // close[i][j]: d(P_i, P_j) <= 2r
    let close: Vec<Vec<bool>> = satisfying
        .iter()
        .map(|&a| {
            let ball = bfs.ball(&graph, a, spread);
            satisfying
                .iter()
                .map(|b| ball.binary_search(b).is_ok())
                .collect()
        })
        .collect();
    fn extend(close: &[Vec<bool>], chosen: &mut Vec<usize>, from: usize, m: usize) -> bool {
        if chosen.len() == m {
            return true;
        }
        for i in from..close.len() {
            if chosen.iter().all(|&j| !close[i][j]) {
                chosen.push(i);
                if extend(close, chosen, i + 1, m) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    Ok(extend(&close, &mut Vec::new(), 0, leaf.count))
}

/// Brute-force truth value of a Gaifman-normal-form sentence.
pub fn eval_gnf_naive(s: &Structure, g: &GaifmanSentence) -> Result<bool, LogicError> {
    let values = g
        .leaves()
        .into_iter()
        .map(|leaf| eval_leaf_naive(s, leaf))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(g.fold(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::logic::{eval_naive, parse_formula, relativize, Assignment};

    fn has_neighbor(r: usize) -> Formula {
        relativize(&parse_formula("exists y (E(x, y))").unwrap(), r, &center_var()).unwrap()
    }

    #[test]
    fn trivial_leaf_true() {
        let g = GaifmanSentence::leaf(1, 1, parse_formula("x = x").unwrap()).unwrap();
        assert!(eval_gnf_naive(&generate::path(1), &g).unwrap());
    }

    #[test]
    fn two_far_vertices_with_neighbors_on_path() {
        let leaf = GaifmanSentence::leaf(1, 2, has_neighbor(1)).unwrap();
        assert!(eval_gnf_naive(&generate::path(6), &leaf).unwrap());
        // on a 3-path every pair is within distance 2
        assert!(!eval_gnf_naive(&generate::path(3), &leaf).unwrap());
        let neg = GaifmanSentence::not(leaf.clone());
        assert!(!eval_gnf_naive(&generate::path(6), &neg).unwrap());
    }

    #[test]
    fn leaf_validation() {
        let psi = parse_formula("exists y (E(x, y))").unwrap();
        assert!(matches!(
            BasicLocalSentence::new(1, 1, psi),
            Err(LogicError::NotLocal { .. })
        ));
        assert!(matches!(
            BasicLocalSentence::new(0, 1, parse_formula("x = x").unwrap()),
            Err(LogicError::BadLeafParameters { .. })
        ));
        assert!(matches!(
            BasicLocalSentence::new(1, 1, parse_formula("x = y").unwrap()),
            Err(LogicError::ExtraFreeVariable { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"op":"and","children":[
            {"op":"leaf","leaf":{"r":1,"m":2,"psi":"exists y (dist(x, y) <= 1 and E(x, y))"}},
            {"op":"not","children":[{"op":"leaf","leaf":{"r":1,"m":1,"psi":"x = x"}}]}]}"#;
        let g = GaifmanSentence::from_json(text).unwrap();
        assert_eq!(g.leaves().len(), 2);
        assert_eq!(GaifmanSentence::from_json(&g.to_json()).unwrap(), g);

        let bad = r#"{"op":"leaf","leaf":{"r":1,"m":1,"psi":"exists y (E(x, y))"}}"#;
        assert!(matches!(
            GaifmanSentence::from_json(bad),
            Err(GnfError::Leaf { .. })
        ));
        let bad = r#"{"op":"not","children":[]}"#;
        assert!(matches!(
            GaifmanSentence::from_json(bad),
            Err(GnfError::Shape { .. })
        ));
        let bad = r#"{"op":"leaf","leaf":{"r":1,"m":1,"psi":"E(x, y)"}}"#;
        assert!(matches!(
            GaifmanSentence::from_json(bad),
            Err(GnfError::Formula { .. })
        ));
    }

    #[test]
    fn to_formula_agrees_with_leaf_evaluation() {
        let leaf = BasicLocalSentence::new(1, 2, has_neighbor(1)).unwrap();
        for n in 2..8 {
            let s = generate::path(n);
            assert_eq!(
                eval_naive(&s, &leaf.to_formula(), &Assignment::new()).unwrap(),
                eval_leaf_naive(&s, &leaf).unwrap(),
                "path of {n}"
            );
        }
    }
}
