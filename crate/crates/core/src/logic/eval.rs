//! Formula evaluation.
//!
//! Formulas are compiled once against a vocabulary into a slot-indexed tree:
//! free variables occupy the first slots, every quantifier gets the next slot
//! below its parent's. Two quantifier strategies share that tree:
//!
//! * [`Quantification::Full`] ranges over the whole universe. This is the
//!   reference semantics.
//! * [`Quantification::Guarded`] recognizes the guards written by
//!   `relativize` (`exists y (dist(u, y) <= s and ...)`,
//!   `forall y (dist(u, y) <= s -> ...)`) and only visits `N_s(u)`, which is
//!   where the guard can hold. Unguarded quantifiers still range fully.
//!
//! Distance atoms use truncated BFS in the Gaifman graph of the structure
//! being evaluated, cut off at the largest radius mentioned in the formula.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::formula::{Formula, Var};
use super::LogicError;
use crate::gaifman::{Bfs, GaifmanGraph};
use crate::structure::{Element, Structure, Vocabulary};

/// Values for the free variables of a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<Var, Element>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<Var>, a: Element) -> Self {
        self.0.insert(var.into(), a);
        self
    }

    pub fn insert(&mut self, var: Var, a: Element) {
        self.0.insert(var, a);
    }

    pub fn get(&self, var: &Var) -> Option<Element> {
        self.0.get(var).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantification {
    Full,
    Guarded,
}

type Slot = usize;

#[derive(Debug, Clone)]
enum Node {
    Rel { relation: usize, args: Vec<Slot> },
    Eq(Slot, Slot),
    DistLe(Slot, Slot, usize),
    DistGt(Slot, Slot, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Exists(Quantifier),
    Forall(Quantifier),
}

#[derive(Debug, Clone)]
struct Quantifier {
    slot: Slot,
    /// `(u, s)` when the body is guarded by `dist(u, y) <= s`.
    guard: Option<(Slot, usize)>,
    body: Box<Node>,
}

/// A formula compiled against a vocabulary, with its free variables in a
/// fixed order.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    root: Node,
    free: Vec<Var>,
    slots: usize,
    radius_cap: usize,
}

impl CompiledFormula {
    /// Compiles `phi`; its free variables must be among `free`, which fixes
    /// the order of values passed to [`CompiledFormula::evaluate`].
    pub fn compile(phi: &Formula, vocab: &Vocabulary, free: &[Var]) -> Result<Self, LogicError> {
        if let Some(v) = phi.free_vars().into_iter().find(|v| !free.contains(v)) {
            return Err(LogicError::UnassignedVariable(v));
        }
        let mut scope: Vec<Var> = free.to_vec();
        let mut slots = scope.len();
        let root = compile_node(phi, vocab, &mut scope, &mut slots)?;
        Ok(CompiledFormula {
            root,
            free: free.to_vec(),
            slots,
            radius_cap: phi.max_radius(),
        })
    }

    pub fn free_vars(&self) -> &[Var] {
        &self.free
    }

    /// Evaluates with `values[i]` assigned to the `i`-th free variable.
    pub fn evaluate(&self, ctx: &mut EvalContext<'_>, values: &[Element], mode: Quantification) -> bool {
        debug_assert_eq!(values.len(), self.free.len());
        let mut env = vec![0; self.slots.max(1)];
        env[..values.len()].copy_from_slice(values);
        ctx.ensure_cap(self.radius_cap);
        ctx.eval(&self.root, &mut env, mode)
    }
}

fn lookup(scope: &[Var], v: &Var) -> Result<Slot, LogicError> {
    scope
        .iter()
        .rposition(|s| s == v)
        .ok_or_else(|| LogicError::UnassignedVariable(v.clone()))
}

fn compile_node(
    f: &Formula,
    vocab: &Vocabulary,
    scope: &mut Vec<Var>,
    slots: &mut usize,
) -> Result<Node, LogicError> {
    Ok(match f {
        Formula::Rel { symbol, args } => {
            let relation = vocab
                .index_of(symbol)
                .ok_or_else(|| LogicError::UnknownRelation(symbol.clone()))?;
            let expected = vocab.symbols()[relation].arity;
            if expected != args.len() {
                return Err(LogicError::ArityMismatch {
                    symbol: symbol.clone(),
                    expected,
                    found: args.len(),
                });
            }
            Node::Rel {
                relation,
                args: args.iter().map(|v| lookup(scope, v)).collect::<Result<_, _>>()?,
            }
        }
        Formula::Eq(x, y) => Node::Eq(lookup(scope, x)?, lookup(scope, y)?),
        Formula::DistLe(x, y, r) => Node::DistLe(lookup(scope, x)?, lookup(scope, y)?, *r),
        Formula::DistGt(x, y, r) => Node::DistGt(lookup(scope, x)?, lookup(scope, y)?, *r),
        Formula::Not(g) => Node::Not(Box::new(compile_node(g, vocab, scope, slots)?)),
        Formula::And(a, b) => Node::And(Box::new(compile_node(a, vocab, scope, slots)?), Box::new(compile_node(b, vocab, scope, slots)?)),
        Formula::Or(a, b) => Node::Or(Box::new(compile_node(a, vocab, scope, slots)?), Box::new(compile_node(b, vocab, scope, slots)?)),
        Formula::Implies(a, b) => Node::Implies(Box::new(compile_node(a, vocab, scope, slots)?), Box::new(compile_node(b, vocab, scope, slots)?)),
        Formula::Exists(y, body) | Formula::Forall(y, body) => {
            let slot = scope.len();
            scope.push(y.clone());
            *slots = (*slots).max(scope.len());
            let compiled = Box::new(compile_node(body, vocab, scope, slots)?);
            scope.pop();
            let guard_atom = match (f, &**body) {
                (Formula::Exists(..), Formula::And(g, _)) => Some(&**g),
                (Formula::Forall(..), Formula::Implies(g, _)) => Some(&**g),
                _ => None,
            };
            let guard = guard_atom.and_then(|g| match g {
                Formula::DistLe(u, v, s) if v == y && u != y => Some((lookup(scope, u).ok()?, *s)),
                Formula::DistLe(u, v, s) if u == y && v != y => Some((lookup(scope, v).ok()?, *s)),
                _ => None,
            });
            let q = Quantifier {
                slot,
                guard,
                body: compiled,
            };
            if matches!(f, Formula::Exists(..)) {
                Node::Exists(q)
            } else {
                Node::Forall(q)
            }
        }
    })
}

/// Per-structure evaluation state: the Gaifman graph and cached truncated
/// BFS results. Reuse one context for many evaluations on the same structure.
pub struct EvalContext<'s> {
    structure: &'s Structure,
    graph: GaifmanGraph,
    bfs: Bfs,
    cap: usize,
    // source -> (distance within cap) for each reached element
    distances: HashMap<Element, HashMap<Element, usize>>,
    balls: HashMap<(Element, usize), Arc<[Element]>>,
    tuple: Vec<Element>,
}

impl<'s> EvalContext<'s> {
    pub fn new(structure: &'s Structure) -> Self {
        let graph = structure.gaifman_graph();
        let bfs = graph.bfs();
        EvalContext {
            structure,
            graph,
            bfs,
            cap: 0,
            distances: HashMap::new(),
            balls: HashMap::new(),
            tuple: Vec::new(),
        }
    }

    pub fn structure(&self) -> &Structure {
        self.structure
    }

    pub fn graph(&self) -> &GaifmanGraph {
        &self.graph
    }

    fn ensure_cap(&mut self, cap: usize) {
        if cap > self.cap {
            self.cap = cap;
            self.distances.clear();
            self.balls.clear();
        }
    }

    fn distances_from(&mut self, a: Element) -> &HashMap<Element, usize> {
        let (graph, bfs, cap) = (&self.graph, &mut self.bfs, self.cap);
        self.distances
            .entry(a)
            .or_insert_with(|| bfs.ball_with_distances(graph, a, cap).into_iter().collect())
    }

    fn dist_le(&mut self, a: Element, b: Element, r: usize) -> bool {
        matches!(self.distances_from(a).get(&b), Some(&d) if d <= r)
    }

    fn ball(&mut self, a: Element, r: usize) -> Arc<[Element]> {
        if let Some(b) = self.balls.get(&(a, r)) {
            return b.clone();
        }
        let mut members: Vec<Element> = self
            .distances_from(a)
            .iter()
            .filter(|&(_, &d)| d <= r)
            .map(|(&b, _)| b)
            .collect();
        members.sort_unstable();
        let members: Arc<[Element]> = members.into();
        self.balls.insert((a, r), members.clone());
        members
    }

    fn eval(&mut self, node: &Node, env: &mut Vec<Element>, mode: Quantification) -> bool {
        match node {
            Node::Rel { relation, args } => {
                self.tuple.clear();
                self.tuple.extend(args.iter().map(|&s| env[s]));
                self.structure.relation_at(*relation).contains(&self.tuple)
            }
            Node::Eq(x, y) => env[*x] == env[*y],
            Node::DistLe(x, y, r) => self.dist_le(env[*x], env[*y], *r),
            Node::DistGt(x, y, r) => !self.dist_le(env[*x], env[*y], *r),
            Node::Not(f) => !self.eval(f, env, mode),
            Node::And(a, b) => self.eval(a, env, mode) && self.eval(b, env, mode),
            Node::Or(a, b) => self.eval(a, env, mode) || self.eval(b, env, mode),
            Node::Implies(a, b) => !self.eval(a, env, mode) || self.eval(b, env, mode),
            Node::Exists(q) => self.quantify(q, env, mode, true),
            Node::Forall(q) => self.quantify(q, env, mode, false),
        }
    }

    fn quantify(&mut self, q: &Quantifier, env: &mut Vec<Element>, mode: Quantification, existential: bool) -> bool {
        // existential: any body true; universal: all bodies true
        let check = |ctx: &mut Self, env: &mut Vec<Element>, b: Element| {
            env[q.slot] = b;
            ctx.eval(&q.body, env, mode) == existential
        };
        match (mode, q.guard) {
            (Quantification::Guarded, Some((center, radius))) => {
                let ball = self.ball(env[center], radius);
                let found = ball.iter().any(|&b| check(self, env, b));
                found == existential
            }
            _ => {
                let found = (0..self.structure.universe_size()).any(|b| check(self, env, b));
                found == existential
            }
        }
    }
}

/// Standard semantics, quantifiers over the whole universe.
pub fn eval_naive(s: &Structure, phi: &Formula, assignment: &Assignment) -> Result<bool, LogicError> {
    let free: Vec<Var> = phi.free_vars().into_iter().collect();
    let values = free
        .iter()
        .map(|v| {
            let a = assignment
                .get(v)
                .ok_or_else(|| LogicError::UnassignedVariable(v.clone()))?;
            s.check_element(a)
                .map_err(|_| LogicError::NoSuchElement(a))?;
            Ok(a)
        })
        .collect::<Result<Vec<_>, LogicError>>()?;
    let compiled = CompiledFormula::compile(phi, s.vocabulary(), &free)?;
    let mut ctx = EvalContext::new(s);
    Ok(compiled.evaluate(&mut ctx, &values, Quantification::Full))
}

/// Evaluates an r-local `psi(center)` at `a` inside `piece`, visiting only
/// the center's ball for guarded quantifiers. `piece` must contain the
/// center's r-ball of the ambient structure for the result to agree with the
/// ambient structure.
pub fn eval_local(piece: &Structure, psi: &Formula, center: &Var, a: Element) -> Result<bool, LogicError> {
    piece
        .check_element(a)
        .map_err(|_| LogicError::NoSuchElement(a))?;
    let compiled = CompiledFormula::compile(psi, piece.vocabulary(), std::slice::from_ref(center))?;
    let mut ctx = EvalContext::new(piece);
    Ok(compiled.evaluate(&mut ctx, &[a], Quantification::Guarded))
}
