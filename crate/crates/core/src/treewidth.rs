//! Tree decompositions: validation, a min-degree elimination heuristic, and
//! an exact width oracle for small instances.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::gaifman::GaifmanGraph;
use crate::structure::{Element, Structure};

/// Default size limit for [`exact_width`].
pub const EXACT_WIDTH_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreewidthError {
    #[error("exact width limited to {cap} elements, instance has {n}")]
    TooLarge { n: usize, cap: usize },
}

/// A tree with a bag of elements at every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    tree: Vec<Vec<usize>>,
    bags: Vec<Vec<Element>>,
}

impl TreeDecomposition {
    /// Builds a decomposition from undirected tree edges between node ids
    /// `0..bags.len()`. Bags are sorted and deduplicated; the tree shape is
    /// not checked here, see [`validate_decomposition`].
    pub fn new(bags: Vec<Vec<Element>>, edges: &[(usize, usize)]) -> Self {
        let mut tree = vec![Vec::new(); bags.len()];
        for &(a, b) in edges {
            tree[a].push(b);
            tree[b].push(a);
        }
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        TreeDecomposition { tree, bags }
    }

    pub fn bags(&self) -> &[Vec<Element>] {
        &self.bags
    }

    pub fn tree_neighbors(&self, node: usize) -> &[usize] {
        &self.tree[node]
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(1)
            .saturating_sub(1)
    }

    fn edge_list(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.tree
            .iter()
            .enumerate()
            .flat_map(|(t, ns)| ns.iter().filter(move |&&u| t < u).map(move |&u| (t, u)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("decomposition has no nodes")]
    Empty,
    #[error("underlying graph is not a tree")]
    NotATree,
    #[error("bag {node} holds element {element} outside the universe")]
    ElementOutOfRange { node: usize, element: Element },
    #[error("element {0} appears in no bag")]
    MissingElement(Element),
    #[error("bags containing element {0} are not connected in the tree")]
    DisconnectedOccurrences(Element),
    #[error("no bag contains tuple {tuple:?} of `{relation}`")]
    UncoveredTuple { relation: String, tuple: Vec<Element> },
}

fn check_tree(td: &TreeDecomposition) -> Result<(), Violation> {
    let nodes = td.node_count();
    if nodes == 0 {
        return Err(Violation::Empty);
    }
    if td.edge_list().count() != nodes - 1 || td.tree.iter().enumerate().any(|(t, ns)| ns.contains(&t)) {
        return Err(Violation::NotATree);
    }
    let mut seen = vec![false; nodes];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(t) = stack.pop() {
        for &u in &td.tree[t] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(())
    } else {
        Err(Violation::NotATree)
    }
}

fn check_occurrences(n: usize, td: &TreeDecomposition) -> Result<(), Violation> {
    let mut nodes_with = vec![0usize; n];
    for (node, bag) in td.bags.iter().enumerate() {
        for &a in bag {
            if a >= n {
                return Err(Violation::ElementOutOfRange { node, element: a });
            }
            nodes_with[a] += 1;
        }
    }
    // a vertex set of a tree is connected iff it spans |set| - 1 tree edges
    let mut edges_with = vec![0usize; n];
    for (t, u) in td.edge_list() {
        let (bt, bu) = (&td.bags[t], &td.bags[u]);
        for a in bt.iter().filter(|a| bu.binary_search(a).is_ok()) {
            edges_with[*a] += 1;
        }
    }
    for a in 0..n {
        if nodes_with[a] == 0 {
            return Err(Violation::MissingElement(a));
        }
        if edges_with[a] + 1 != nodes_with[a] {
            return Err(Violation::DisconnectedOccurrences(a));
        }
    }
    Ok(())
}

fn covered(td: &TreeDecomposition, holders: &[Vec<usize>], tuple: &[Element]) -> bool {
    holders[tuple[0]].iter().any(|&t| {
        let bag = &td.bags[t];
        tuple.iter().all(|e| bag.binary_search(e).is_ok())
    })
}

fn holders(n: usize, td: &TreeDecomposition) -> Vec<Vec<usize>> {
    let mut holders = vec![Vec::new(); n];
    for (t, bag) in td.bags.iter().enumerate() {
        for &a in bag {
            holders[a].push(t);
        }
    }
    holders
}

/// Checks that `td` is a tree decomposition of `s`: the nodes form a tree,
/// every element's bags are non-empty and connected, and every tuple lies
/// inside one bag. Returns the first violation found.
pub fn validate_decomposition(s: &Structure, td: &TreeDecomposition) -> Result<(), Violation> {
    let n = s.universe_size();
    check_tree(td)?;
    check_occurrences(n, td)?;
    let holders = holders(n, td);
    for (sym, rel) in s.relations() {
        if let Some(t) = rel.tuples().find(|t| !covered(td, &holders, t)) {
            return Err(Violation::UncoveredTuple {
                relation: sym.name.clone(),
                tuple: t.to_vec(),
            });
        }
    }
    Ok(())
}

/// As [`validate_decomposition`], with the graph's edges as the tuples.
pub fn validate_graph_decomposition(g: &GaifmanGraph, td: &TreeDecomposition) -> Result<(), Violation> {
    let n = g.len();
    check_tree(td)?;
    check_occurrences(n, td)?;
    let holders = holders(n, td);
    for (a, b) in g.edges() {
        if !covered(td, &holders, &[a, b]) {
            return Err(Violation::UncoveredTuple {
                relation: "gaifman".into(),
                tuple: vec![a, b],
            });
        }
    }
    Ok(())
}

struct Elimination {
    /// Sorted neighbour lists of the uneliminated graph.
    adj: Vec<Vec<Element>>,
    degree: Vec<usize>,
    queue: BTreeSet<(usize, Element)>,
}

impl Elimination {
    fn fill(&self, v: Element) -> usize {
        let ns = &self.adj[v];
        let mut missing = 0;
        for (i, &a) in ns.iter().enumerate() {
            for b in &ns[i + 1..] {
                if self.adj[a].binary_search(b).is_err() {
                    missing += 1;
                }
            }
        }
        missing
    }

    fn refresh(&mut self, v: Element) {
        self.queue.remove(&(self.degree[v], v));
        self.degree[v] = self.adj[v].len();
        self.queue.insert((self.degree[v], v));
    }

    /// Minimum degree, then fewest fill edges, then smallest id. Fill is
    /// only computed for vertices of minimum degree.
    fn select(&self) -> Option<Element> {
        let &(d, first) = self.queue.iter().next()?;
        let mut best = (usize::MAX, first);
        for &(_, v) in self.queue.iter().take_while(|&&(dv, _)| dv == d) {
            let f = self.fill(v);
            if f < best.0 {
                best = (f, v);
                if f == 0 {
                    break;
                }
            }
        }
        Some(best.1)
    }
}

/// Sorted union of `xs` and `ys`, leaving out `skip_a` and `skip_b`.
fn merge_without(xs: &[Element], ys: &[Element], skip_a: Element, skip_b: Element) -> Vec<Element> {
    let mut out = Vec::with_capacity(xs.len() + ys.len());
    let (mut i, mut j) = (0, 0);
    while i < xs.len() || j < ys.len() {
        let next = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (_, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next != skip_a && next != skip_b {
            out.push(next);
        }
    }
    out
}

/// Min-degree elimination ordering (ties: fewest fill edges, then smallest
/// id) on the Gaifman graph, turned into a tree decomposition.
pub fn heuristic_decomposition(s: &Structure) -> TreeDecomposition {
    heuristic_graph_decomposition(&s.gaifman_graph())
}

pub fn heuristic_graph_decomposition(g: &GaifmanGraph) -> TreeDecomposition {
    let n = g.len();
    if n == 0 {
        return TreeDecomposition::new(vec![Vec::new()], &[]);
    }
    let mut st = Elimination {
        adj: (0..n).map(|v| g.neighbors(v).to_vec()).collect(),
        degree: vec![0; n],
        queue: BTreeSet::new(),
    };
    for v in 0..n {
        st.degree[v] = st.adj[v].len();
        st.queue.insert((st.degree[v], v));
    }
    let mut position = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut higher: Vec<Vec<Element>> = vec![Vec::new(); n];
    while let Some(v) = st.select() {
        st.queue.remove(&(st.degree[v], v));
        position[v] = order.len();
        order.push(v);
        let ns = std::mem::take(&mut st.adj[v]);
        // turn ns into a clique without v
        for &a in &ns {
            let merged = merge_without(&st.adj[a], &ns, a, v);
            st.adj[a] = merged;
        }
        // only the former neighbours change degree
        for &a in &ns {
            st.refresh(a);
        }
        higher[v] = ns;
    }
    let bags: Vec<Vec<Element>> = order
        .iter()
        .map(|&v| {
            let mut bag = higher[v].clone();
            bag.push(v);
            bag
        })
        .collect();
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        match higher[v].iter().map(|&u| position[u]).min() {
            Some(parent) => edges.push((i, parent)),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition::new(bags, &edges)
}

/// Exact tree-width of `s` (of its Gaifman graph) for at most `cap`
/// elements.
pub fn exact_width(s: &Structure, cap: usize) -> Result<usize, TreewidthError> {
    exact_graph_width(&s.gaifman_graph(), cap)
}

/// Exact tree-width by search over elimination orderings.
///
/// For `k` from a degeneracy lower bound upwards, decides whether some
/// ordering has all elimination degrees at most `k`. The state is the set
/// `S` of eliminated vertices; eliminating `v` next costs `|Q(S, v)|`, the
/// number of uneliminated vertices reachable from `v` through `S`. Refuted
/// sets are memoized, and any `S` leaving at most `k + 1` vertices succeeds.
pub fn exact_graph_width(g: &GaifmanGraph, cap: usize) -> Result<usize, TreewidthError> {
    let n = g.len();
    if n > cap || n > 64 {
        return Err(TreewidthError::TooLarge { n, cap: cap.min(64) });
    }
    if n == 0 {
        return Ok(0);
    }
    let nbr: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let upper = heuristic_graph_decomposition(g).width();
    let mut k = degeneracy(&nbr, n);
    while k < upper {
        let mut search = WidthSearch {
            nbr: &nbr,
            n,
            k,
            refuted: HashSet::new(),
        };
        if search.feasible(0) {
            return Ok(k);
        }
        k += 1;
    }
    Ok(upper)
}

fn degeneracy(nbr: &[u64], n: usize) -> usize {
    let mut alive: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let mut best = 0;
    while alive != 0 {
        let (v, d) = (0..n)
            .filter(|&v| alive >> v & 1 == 1)
            .map(|v| (v, (nbr[v] & alive).count_ones() as usize))
            .min_by_key(|&(_, d)| d)
            .expect("alive is non-empty");
        best = best.max(d);
        alive &= !(1 << v);
    }
    best
}

struct WidthSearch<'a> {
    nbr: &'a [u64],
    n: usize,
    k: usize,
    refuted: HashSet<u64>,
}

impl WidthSearch<'_> {
    fn q(&self, eliminated: u64, v: usize) -> u32 {
        // flood from v through eliminated vertices; report the frontier
        let mut reach = 1u64 << v;
        let mut frontier = reach;
        let mut boundary = 0u64;
        while frontier != 0 {
            let mut next = 0u64;
            let mut f = frontier;
            while f != 0 {
                let u = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.nbr[u];
            }
            next &= !reach;
            boundary |= next & !eliminated;
            frontier = next & eliminated;
            reach |= next;
        }
        boundary.count_ones()
    }

    fn feasible(&mut self, eliminated: u64) -> bool {
        let remaining = self.n - eliminated.count_ones() as usize;
        if remaining <= self.k + 1 {
            return true;
        }
        if self.refuted.contains(&eliminated) {
            return false;
        }
        for v in 0..self.n {
            if eliminated >> v & 1 == 0 && self.q(eliminated, v) as usize <= self.k && self.feasible(eliminated | 1 << v) {
                return true;
            }
        }
        self.refuted.insert(eliminated);
        false
    }
}
