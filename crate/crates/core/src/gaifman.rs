//! Gaifman graphs and truncated breadth-first search.

use crate::structure::{Element, Structure, StructureError};

/// Undirected, loop-free graph on `0..n`; `a` and `b` are adjacent iff they
/// occur together in some tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaifmanGraph {
    adjacency: Vec<Vec<Element>>,
    edge_count: usize,
}

impl GaifmanGraph {
    pub(crate) fn of_structure(s: &Structure) -> Self {
        let mut adjacency: Vec<Vec<Element>> = vec![Vec::new(); s.universe_size()];
        for (_, rel) in s.relations() {
            for t in rel.tuples() {
                for (i, &a) in t.iter().enumerate() {
                    for &b in &t[i + 1..] {
                        if a != b {
                            adjacency[a].push(b);
                            adjacency[b].push(a);
                        }
                    }
                }
            }
        }
        Self::from_adjacency(adjacency)
    }

    fn from_adjacency(mut adjacency: Vec<Vec<Element>>) -> Self {
        let mut twice = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        GaifmanGraph {
            adjacency,
            edge_count: twice / 2,
        }
    }

    /// Builds a graph from an undirected edge list; loops are dropped.
    pub fn from_edges(n: usize, edges: &[(Element, Element)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        Self::from_adjacency(adjacency)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbors of `a`.
    pub fn neighbors(&self, a: Element) -> &[Element] {
        &self.adjacency[a]
    }

    pub fn has_edge(&self, a: Element, b: Element) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, ns)| {
            ns.iter()
                .copied()
                .filter(move |&b| a < b)
                .map(move |b| (a, b))
        })
    }

    /// Subgraph induced on `subset`, relabeled to `0..k` in ascending order of
    /// the original ids.
    pub fn induced(&self, subset: &[Element]) -> GaifmanGraph {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let adjacency = sorted
            .iter()
            .map(|&a| {
                self.adjacency[a]
                    .iter()
                    .filter_map(|b| sorted.binary_search(b).ok())
                    .collect()
            })
            .collect();
        Self::from_adjacency(adjacency)
    }

    pub fn bfs(&self) -> Bfs {
        Bfs::new(self.len())
    }

    fn check(&self, a: Element) -> Result<(), StructureError> {
        if a < self.len() {
            Ok(())
        } else {
            Err(StructureError::NoSuchElement {
                element: a,
                universe: self.len(),
            })
        }
    }

    /// `N_r(a)`, sorted.
    pub fn neighborhood(&self, a: Element, r: usize) -> Result<Vec<Element>, StructureError> {
        self.check(a)?;
        Ok(self.bfs().ball(self, a, r))
    }

    /// `N_r(B)`, the union of the balls around members of `set`, sorted.
    pub fn neighborhood_of_set(
        &self,
        set: &[Element],
        r: usize,
    ) -> Result<Vec<Element>, StructureError> {
        for &a in set {
            self.check(a)?;
        }
        Ok(self.bfs().multi_ball(self, set, r))
    }

    /// Distance between `a` and `b` if it is at most `cap`.
    pub fn distance(&self, a: Element, b: Element, cap: usize) -> Option<usize> {
        self.bfs().distance(self, a, b, cap)
    }
}

/// Reusable scratch for truncated BFS. Visited marks are epoch-stamped, so
/// consecutive searches never clear the arrays.
#[derive(Debug, Clone)]
pub struct Bfs {
    stamp: Vec<u32>,
    dist: Vec<u32>,
    epoch: u32,
    queue: Vec<Element>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs {
            stamp: vec![0; n],
            dist: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.queue.clear();
    }

    fn visit(&mut self, v: Element, d: u32) -> bool {
        if self.stamp[v] == self.epoch {
            return false;
        }
        self.stamp[v] = self.epoch;
        self.dist[v] = d;
        self.queue.push(v);
        true
    }

    /// Runs the search; afterwards `self.queue` holds the reached vertices in
    /// BFS order and `self.dist` their distances.
    fn run(&mut self, g: &GaifmanGraph, sources: &[Element], r: usize) {
        self.next_epoch();
        for &s in sources {
            self.visit(s, 0);
        }
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            let d = self.dist[v];
            if d as usize >= r {
                continue;
            }
            for &w in g.neighbors(v) {
                self.visit(w, d + 1);
            }
        }
    }

    /// `N_r(a)`, sorted.
    pub fn ball(&mut self, g: &GaifmanGraph, a: Element, r: usize) -> Vec<Element> {
        self.multi_ball(g, &[a], r)
    }

    /// `N_r(sources)`, sorted.
    pub fn multi_ball(&mut self, g: &GaifmanGraph, sources: &[Element], r: usize) -> Vec<Element> {
        self.run(g, sources, r);
        let mut out = self.queue.clone();
        out.sort_unstable();
        out
    }

    /// `(b, d(a, b))` for every `b` in `N_r(a)`, in BFS order.
    pub fn ball_with_distances(
        &mut self,
        g: &GaifmanGraph,
        a: Element,
        r: usize,
    ) -> Vec<(Element, usize)> {
        self.run(g, &[a], r);
        self.queue
            .iter()
            .map(|&v| (v, self.dist[v] as usize))
            .collect()
    }

    pub fn distance(
        &mut self,
        g: &GaifmanGraph,
        a: Element,
        b: Element,
        cap: usize,
    ) -> Option<usize> {
        self.run(g, &[a], cap);
        (self.stamp[b] == self.epoch).then(|| self.dist[b] as usize)
    }

    /// Visits `N_r(sources)` and calls `f` on each member, without allocating.
    pub fn for_each_in_ball<F: FnMut(Element)>(
        &mut self,
        g: &GaifmanGraph,
        sources: &[Element],
        r: usize,
        mut f: F,
    ) {
        self.run(g, sources, r);
        for &v in &self.queue {
            f(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Vocabulary;

    fn path(n: usize) -> GaifmanGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        GaifmanGraph::from_edges(n, &edges)
    }

    #[test]
    fn ternary_tuple_gives_triangle() {
        let vocab = Vocabulary::new([("T", 3)]).unwrap();
        let s = Structure::new(vocab, 3, [("T", vec![vec![0, 1, 2]])]).unwrap();
        let g = s.gaifman_graph();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn no_tuples_no_edges() {
        let vocab = Vocabulary::new([("E", 2)]).unwrap();
        let s = Structure::new(vocab, 4, Vec::<(&str, _)>::new()).unwrap();
        let g = s.gaifman_graph();
        assert_eq!(g.len(), 4);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn repeated_entries_add_no_loop() {
        let vocab = Vocabulary::new([("E", 2)]).unwrap();
        let s = Structure::new(vocab, 2, [("E", vec![vec![1, 1], vec![0, 1], vec![1, 0]])])
            .unwrap();
        let g = s.gaifman_graph();
        assert_eq!(g.neighbors(1), &[0]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn hypergraph_incidence_graph() {
        // F = {{0,1},{1,2}}: ground 0..3, sets 3 and 4
        let s = crate::generate::hypergraph(3, &[vec![0, 1], vec![1, 2]]);
        let g = s.gaifman_graph();
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(0, 3), (1, 3), (1, 4), (2, 4)]
        );
    }

    #[test]
    fn neighborhoods_on_paths() {
        let g = path(4);
        assert_eq!(g.neighborhood(1, 0).unwrap(), vec![1]);
        assert_eq!(g.neighborhood(1, 1).unwrap(), vec![0, 1, 2]);
        assert!(g.neighborhood(9, 1).is_err());

        let g = path(5);
        assert_eq!(g.neighborhood_of_set(&[], 2).unwrap(), Vec::<usize>::new());
        assert_eq!(g.neighborhood_of_set(&[0, 4], 1).unwrap(), vec![0, 1, 3, 4]);
        assert_eq!(
            g.neighborhood_of_set(&[2], 1).unwrap(),
            g.neighborhood(2, 1).unwrap()
        );
    }

    #[test]
    fn grid_diamond() {
        let g = crate::generate::grid(5, 5).gaifman_graph();
        let ball = g.neighborhood(12, 2).unwrap();
        assert_eq!(ball.len(), 13);
        assert_eq!(
            ball,
            vec![2, 6, 7, 8, 10, 11, 12, 13, 14, 16, 17, 18, 22]
        );
    }

    #[test]
    fn distance_is_capped() {
        let g = path(6);
        assert_eq!(g.distance(0, 5, 5), Some(5));
        assert_eq!(g.distance(0, 5, 4), None);
        assert_eq!(g.distance(3, 3, 0), Some(0));
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = path(5);
        let h = g.induced(&[4, 1, 2]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }
}
