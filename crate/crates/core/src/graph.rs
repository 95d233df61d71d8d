//! Graphs, matchings, walks and alternating distances.
//!
//! Node and edge identifiers are dense integers that stay stable across
//! derived graphs: an induced subgraph or an edge subgraph keeps the
//! identifier space of its parent and only marks nodes or edges absent.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    present: Vec<bool>,
    edges: Vec<Option<(NodeId, NodeId)>>,
    adj: Vec<Vec<EdgeId>>,
    node_count: usize,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.nodes().collect::<Vec<_>>())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds a simple connected graph on nodes `0..n`; edge `i` is `edges[i]`.
    pub fn new(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Graph> {
        if n < 2 {
            return Err(Error::Structural(format!(
                "a network needs at least two nodes, got {n}"
            )));
        }
        let g = Graph::build(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Like [`Graph::new`] but without the connectivity requirement.
    pub fn new_unchecked_connectivity(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Graph> {
        Graph::build(n, edges)
    }

    fn build(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u >= n {
                return Err(Error::UnknownNode(u));
            }
            if v >= n {
                return Err(Error::UnknownNode(v));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::ParallelEdge(u, v));
            }
            adj[u].push(id);
            adj[v].push(id);
        }
        Ok(Graph {
            present: vec![true; n],
            edges: edges.iter().map(|&e| Some(e)).collect(),
            adj,
            node_count: n,
            edge_count: edges.len(),
        })
    }

    /// Size of the node identifier space (absent nodes included).
    pub fn id_bound(&self) -> usize {
        self.present.len()
    }

    pub fn edge_id_bound(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.present.get(v).copied().unwrap_or(false)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        matches!(self.edges.get(e), Some(Some(_)))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter_map(|(v, &p)| p.then_some(v))
    }

    /// Present edges as `(id, u, v)` in id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, NodeId, NodeId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(id, e)| e.map(|(u, v)| (id, u, v)))
    }

    pub fn endpoints(&self, e: EdgeId) -> Result<(NodeId, NodeId)> {
        self.edges
            .get(e)
            .copied()
            .flatten()
            .ok_or(Error::UnknownEdge(e))
    }

    /// Endpoint of `e` opposite to `v`. Panics if `e` is not incident to `v`.
    pub fn other(&self, e: EdgeId, v: NodeId) -> NodeId {
        let (a, b) = self.edges[e].expect("edge present");
        if a == v {
            b
        } else {
            debug_assert_eq!(b, v);
            a
        }
    }

    /// Incident edges of `v`, in increasing edge id.
    pub fn incident(&self, v: NodeId) -> &[EdgeId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (EdgeId, NodeId)> + '_ {
        self.adj[v].iter().map(move |&e| (e, self.other(e, v)))
    }

    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        if !self.contains_node(u) || !self.contains_node(v) {
            return None;
        }
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].iter().copied().find(|&e| self.other(e, a) == b)
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.nodes().next() else {
            return true;
        };
        let dist = self.bfs(start);
        self.nodes().all(|v| dist[v].is_some())
    }

    /// Hop distances from `src` within this graph.
    pub fn bfs(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.id_bound()];
        let mut queue = VecDeque::from([src]);
        dist[src] = Some(0);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for (_, w) in self.neighbors(u) {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Largest hop distance between two nodes, `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for v in self.nodes() {
            let dist = self.bfs(v);
            for w in self.nodes() {
                best = best.max(dist[w]?);
            }
        }
        Some(best)
    }

    /// Subgraph induced by `keep`, with ids preserved. Connectivity is not
    /// required of the result.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> Result<Graph> {
        if let Some(&v) = keep.iter().find(|&&v| !self.contains_node(v)) {
            return Err(Error::UnknownNode(v));
        }
        let mut present = vec![false; self.id_bound()];
        for &v in keep {
            present[v] = true;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| e.filter(|&(u, v)| present[u] && present[v]))
            .collect();
        Ok(Graph::assemble(present, edges))
    }

    /// Same node set, keeping only the edges for which `keep` holds.
    pub fn edge_subgraph(&self, mut keep: impl FnMut(EdgeId) -> bool) -> Graph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| e.filter(|_| keep(id)))
            .collect();
        Graph::assemble(self.present.clone(), edges)
    }

    fn assemble(present: Vec<bool>, edges: Vec<Option<(NodeId, NodeId)>>) -> Graph {
        let mut adj = vec![Vec::new(); present.len()];
        let mut edge_count = 0;
        for (id, e) in edges.iter().enumerate() {
            if let Some((u, v)) = *e {
                adj[u].push(id);
                adj[v].push(id);
                edge_count += 1;
            }
        }
        Graph {
            node_count: present.iter().filter(|&&p| p).count(),
            present,
            edges,
            adj,
            edge_count,
        }
    }

    /// Parses the edge-list text format: `n m` then `m` lines `u v`.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = data_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing `n m` header".into()))?;
        let [n, m] = parse_pair(header)?;
        let edges = lines.map(parse_pair).collect::<Result<Vec<_>>>()?;
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Graph::new(n, &edges.into_iter().map(|[u, v]| (u, v)).collect::<Vec<_>>())
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count(), self.edge_count());
        for (_, u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_pair(line: &str) -> Result<[usize; 2]> {
    let mut it = line.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|e| Error::Parse(format!("`{line}`: {e}")))
    });
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok([a?, b?]),
        _ => Err(Error::Parse(format!("expected two integers, got `{line}`"))),
    }
}

/// A set of pairwise disjoint edges over a graph's id space.
#[derive(Clone, PartialEq, Eq)]
pub struct Matching {
    mate: Vec<Option<(EdgeId, NodeId)>>,
    edges: BTreeSet<EdgeId>,
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges.iter()).finish()
    }
}

impl Matching {
    pub fn empty(g: &Graph) -> Matching {
        Matching {
            mate: vec![None; g.id_bound()],
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(g: &Graph, edges: impl IntoIterator<Item = EdgeId>) -> Result<Matching> {
        let mut m = Matching::empty(g);
        for e in edges {
            m.insert(g, e)?;
        }
        Ok(m)
    }

    /// Builds a matching from endpoint pairs.
    pub fn from_pairs(g: &Graph, pairs: &[(NodeId, NodeId)]) -> Result<Matching> {
        let ids = pairs
            .iter()
            .map(|&(u, v)| {
                g.find_edge(u, v)
                    .ok_or_else(|| Error::Structural(format!("no edge between {u} and {v}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Matching::from_edges(g, ids)
    }

    pub fn insert(&mut self, g: &Graph, e: EdgeId) -> Result<()> {
        let (u, v) = g.endpoints(e)?;
        if self.edges.contains(&e) {
            return Ok(());
        }
        for w in [u, v] {
            if self.mate[w].is_some() {
                return Err(Error::MatchingConflict(w));
            }
        }
        self.mate[u] = Some((e, v));
        self.mate[v] = Some((e, u));
        self.edges.insert(e);
        Ok(())
    }

    pub fn remove(&mut self, g: &Graph, e: EdgeId) -> Result<()> {
        let (u, v) = g.endpoints(e)?;
        if self.edges.remove(&e) {
            self.mate[u] = None;
            self.mate[v] = None;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().copied()
    }

    pub fn mate(&self, v: NodeId) -> Option<NodeId> {
        self.mate.get(v).copied().flatten().map(|(_, w)| w)
    }

    pub fn mate_edge(&self, v: NodeId) -> Option<EdgeId> {
        self.mate.get(v).copied().flatten().map(|(e, _)| e)
    }

    pub fn is_matched(&self, v: NodeId) -> bool {
        self.mate(v).is_some()
    }

    /// Unmatched nodes of `g`.
    pub fn unmatched<'a>(&'a self, g: &'a Graph) -> impl Iterator<Item = NodeId> + 'a {
        g.nodes().filter(move |&v| !self.is_matched(v))
    }

    /// The matching `M ∩ E(g)`.
    pub fn restricted_to(&self, g: &Graph) -> Matching {
        let mut m = Matching::empty(g);
        for &e in &self.edges {
            if g.contains_edge(e) {
                m.insert(g, e).expect("restriction of a matching is a matching");
            }
        }
        m
    }

    /// True when no edge of `g` can be added.
    pub fn is_maximal(&self, g: &Graph) -> bool {
        g.edges()
            .all(|(_, u, v)| self.is_matched(u) || self.is_matched(v))
    }

    /// Parses the fixture format: one `u v` per line.
    pub fn parse(g: &Graph, text: &str) -> Result<Matching> {
        let pairs = data_lines(text)
            .map(|l| parse_pair(l).map(|[u, v]| (u, v)))
            .collect::<Result<Vec<_>>>()?;
        Matching::from_pairs(g, &pairs)
    }

    pub fn to_text(&self, g: &Graph) -> String {
        self.edges
            .iter()
            .map(|&e| {
                let (u, v) = g.endpoints(e).expect("matching edge in graph");
                format!("{u} {v}\n")
            })
            .collect()
    }
}

/// `v_0, e_1, v_1, ..., e_l, v_l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
}

impl Walk {
    pub fn new(g: &Graph, nodes: Vec<NodeId>, edges: Vec<EdgeId>) -> Result<Walk> {
        if nodes.is_empty() || edges.len() + 1 != nodes.len() {
            return Err(Error::Structural(format!(
                "walk with {} nodes and {} edges",
                nodes.len(),
                edges.len()
            )));
        }
        if let Some(&v) = nodes.iter().find(|&&v| !g.contains_node(v)) {
            return Err(Error::UnknownNode(v));
        }
        for (i, &e) in edges.iter().enumerate() {
            let (a, b) = g.endpoints(e)?;
            let (x, y) = (nodes[i], nodes[i + 1]);
            if !((a, b) == (x, y) || (a, b) == (y, x)) {
                return Err(Error::Structural(format!(
                    "edge {e} does not join {x} and {y}"
                )));
            }
        }
        Ok(Walk { nodes, edges })
    }

    pub fn from_nodes(g: &Graph, nodes: &[NodeId]) -> Result<Walk> {
        let edges = nodes
            .windows(2)
            .map(|w| {
                g.find_edge(w[0], w[1]).ok_or_else(|| {
                    Error::Structural(format!("no edge between {} and {}", w[0], w[1]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Walk::new(g, nodes.to_vec(), edges)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn first(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn last(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn reversed(&self) -> Walk {
        let mut nodes = self.nodes.clone();
        let mut edges = self.edges.clone();
        nodes.reverse();
        edges.reverse();
        Walk { nodes, edges }
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.nodes.iter().all(|v| seen.insert(*v))
    }

    /// Consecutive edges alternate between matched and unmatched.
    pub fn is_alternating(&self, m: &Matching) -> bool {
        self.edges
            .windows(2)
            .all(|w| m.contains(w[0]) != m.contains(w[1]))
    }
}

/// True iff `p` is a simple alternating path joining two unmatched nodes.
pub fn is_augmenting(g: &Graph, m: &Matching, p: &Walk) -> Result<bool> {
    // Re-validate against `g`: the walk may come from another graph.
    Walk::new(g, p.nodes.clone(), p.edges.clone())?;
    Ok(!p.is_empty()
        && p.is_simple()
        && p.is_alternating(m)
        && !m.is_matched(p.first())
        && !m.is_matched(p.last()))
}

/// Flips membership of every edge of the augmenting path `p`.
pub fn augment_along(g: &Graph, m: &Matching, p: &Walk) -> Result<Matching> {
    if !is_augmenting(g, m, p)? {
        return Err(Error::NotAugmenting);
    }
    let mut next = m.clone();
    for &e in p.edges() {
        if m.contains(e) {
            next.remove(g, e)?;
        }
    }
    for &e in p.edges() {
        if !m.contains(e) {
            next.insert(g, e)?;
        }
    }
    debug_assert_eq!(next.len(), m.len() + 1);
    Ok(next)
}

/// Length of a shortest alternating path; `None` is infinity.
pub type Dist = Option<u32>;

/// Shortest θ-alternating path lengths from a source `f`.
///
/// Sentinels at the source: `dist(f, 0) = ∞`, `dist(f, 1) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltDist {
    source: NodeId,
    dist: Vec<[Dist; 2]>,
}

impl AltDist {
    /// All entries infinite except the source sentinels.
    pub fn new(id_bound: usize, source: NodeId) -> AltDist {
        let mut dist = vec![[None, None]; id_bound];
        dist[source] = [None, Some(0)];
        AltDist { source, dist }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn id_bound(&self) -> usize {
        self.dist.len()
    }

    pub fn get(&self, v: NodeId, parity: usize) -> Dist {
        self.dist[v][parity]
    }

    pub fn set(&mut self, v: NodeId, parity: usize, d: Dist) {
        if let Some(d) = d {
            debug_assert_eq!(d as usize % 2, parity);
        }
        if v != self.source {
            self.dist[v][parity] = d;
        }
    }

    /// Parity of the shorter distance; zero when both are infinite.
    pub fn gamma(&self, v: NodeId) -> usize {
        match self.dist[v] {
            [Some(a), Some(b)] => usize::from(b < a),
            [None, Some(_)] => 1,
            _ => 0,
        }
    }

    /// `min_θ dist(v, θ)`.
    pub fn best(&self, v: NodeId) -> Dist {
        self.dist[v][self.gamma(v)]
    }

    pub fn is_reachable(&self, v: NodeId) -> bool {
        self.dist[v].iter().any(Option::is_some)
    }

    /// Copy with every entry above `limit` set to infinity.
    pub fn truncated(&self, limit: u32) -> AltDist {
        let mut out = self.clone();
        for (v, d) in out.dist.iter_mut().enumerate() {
            if v == self.source {
                continue;
            }
            for x in d.iter_mut() {
                if x.is_some_and(|x| x > limit) {
                    *x = None;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rejects_malformed_graphs() {
        assert!(matches!(Graph::new(3, &[(0, 0)]), Err(Error::SelfLoop(0))));
        assert!(matches!(
            Graph::new(2, &[(0, 1), (1, 0)]),
            Err(Error::ParallelEdge(1, 0))
        ));
        assert!(matches!(
            Graph::new(4, &[(0, 1), (2, 3)]),
            Err(Error::Disconnected)
        ));
        assert!(matches!(Graph::new(2, &[(0, 5)]), Err(Error::UnknownNode(5))));
        assert!(Graph::new(1, &[]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let fx = fixtures::blossom6();
        for (e, u, v) in fx.graph.edges() {
            assert!(fx.graph.incident(u).contains(&e));
            assert!(fx.graph.incident(v).contains(&e));
        }
    }

    #[test]
    fn augmenting_examples() {
        let p4 = fixtures::p4();
        let (g, m) = (&p4.graph, p4.matching.as_ref().unwrap());
        let full = Walk::from_nodes(g, &[0, 1, 2, 3]).unwrap();
        assert!(is_augmenting(g, m, &full).unwrap());
        let short = Walk::from_nodes(g, &[0, 1]).unwrap();
        assert!(!is_augmenting(g, m, &short).unwrap());

        let wt = fixtures::walktrap();
        // f,a,b,c,d,a
        let w = Walk::from_nodes(&wt.graph, &[0, 1, 2, 3, 4, 1]).unwrap();
        assert!(!is_augmenting(&wt.graph, wt.matching.as_ref().unwrap(), &w).unwrap());
    }

    #[test]
    fn walk_over_missing_edge_is_structural_error() {
        let p4 = fixtures::p4();
        assert!(Walk::from_nodes(&p4.graph, &[0, 2]).is_err());
        let bogus = Walk {
            nodes: vec![0, 9],
            edges: vec![0],
        };
        assert!(is_augmenting(&p4.graph, &Matching::empty(&p4.graph), &bogus).is_err());
    }

    #[test]
    fn augment_examples() {
        let p4 = fixtures::p4();
        let g = &p4.graph;
        let m = p4.matching.clone().unwrap();
        let p = Walk::from_nodes(g, &[0, 1, 2, 3]).unwrap();
        let next = augment_along(g, &m, &p).unwrap();
        assert_eq!(next, Matching::from_pairs(g, &[(0, 1), (2, 3)]).unwrap());

        let p2 = fixtures::p2();
        let p = Walk::from_nodes(&p2.graph, &[0, 1]).unwrap();
        let next = augment_along(&p2.graph, &Matching::empty(&p2.graph), &p).unwrap();
        assert_eq!(next.len(), 1);

        let b6 = fixtures::blossom6();
        let (g, m) = (&b6.graph, b6.matching.as_ref().unwrap());
        let p = Walk::from_nodes(g, &[0, 1, 2, 4, 3, 5]).unwrap();
        let next = augment_along(g, m, &p).unwrap();
        // {fa, bd, cg}
        assert_eq!(next, Matching::from_pairs(g, &[(0, 1), (2, 4), (3, 5)]).unwrap());

        let bad = Walk::from_nodes(g, &[0, 1]).unwrap();
        assert!(matches!(augment_along(g, m, &bad), Err(Error::NotAugmenting)));
    }

    #[test]
    fn induced_subgraph_examples() {
        let p4 = fixtures::p4();
        let h = p4.graph.induced_subgraph(&BTreeSet::from([0, 1, 2])).unwrap();
        assert_eq!(h.edges().map(|(_, u, v)| (u, v)).collect::<Vec<_>>(), [(0, 1), (1, 2)]);
        let h = p4.graph.induced_subgraph(&BTreeSet::from([0, 1])).unwrap();
        assert_eq!(h.edge_count(), 1);
        assert!(!h.contains_node(2));

        let b6 = fixtures::blossom6();
        let h = b6.graph.induced_subgraph(&BTreeSet::from([0, 1, 2, 4])).unwrap();
        let pairs: BTreeSet<_> = h.edges().map(|(_, u, v)| (u.min(v), u.max(v))).collect();
        assert_eq!(pairs, BTreeSet::from([(0, 1), (1, 2), (2, 4)]));
        // ids survive
        assert_eq!(h.find_edge(2, 4), b6.graph.find_edge(2, 4));

        assert!(matches!(
            p4.graph.induced_subgraph(&BTreeSet::from([7])),
            Err(Error::UnknownNode(7))
        ));
    }

    #[test]
    fn matching_rejects_shared_endpoint() {
        let p4 = fixtures::p4();
        assert!(matches!(
            Matching::from_pairs(&p4.graph, &[(0, 1), (1, 2)]),
            Err(Error::MatchingConflict(1))
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let b6 = fixtures::blossom6();
        let text = b6.graph.to_edge_list();
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), b6.graph);
        let m = b6.matching.unwrap();
        assert_eq!(Matching::parse(&b6.graph, &m.to_text(&b6.graph)).unwrap(), m);
        assert!(Graph::parse_edge_list("3 2\n0 1\n").is_err());
    }

    #[test]
    fn gamma_defaults_to_zero() {
        let d = AltDist::new(3, 0);
        assert_eq!(d.gamma(1), 0);
        assert_eq!(d.gamma(0), 1);
        assert_eq!(d.get(0, 0), None);
        assert_eq!(d.get(0, 1), Some(0));
    }
}
