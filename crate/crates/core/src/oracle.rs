//! Centralized ground truth.
//!
//! Maximum matching comes from petgraph's blossom implementation, exact
//! alternating distances from exhaustive enumeration of simple alternating
//! paths. [`find_augmenting_path`] is a separate single-root Edmonds search
//! used by algorithms that solve locally on a collected subgraph.

use std::collections::{HashMap, VecDeque};

use petgraph::graph::{NodeIndex, UnGraph};

use crate::error::{Error, Result};
use crate::graph::{AltDist, Graph, Matching, NodeId, Walk};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub enum_path_node_limit: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enum_path_node_limit: 18,
        }
    }
}

impl OracleConfig {
    pub fn new(enum_path_node_limit: usize) -> Result<OracleConfig> {
        if enum_path_node_limit < 4 {
            return Err(Error::Config(format!(
                "enumeration limit must be at least 4, got {enum_path_node_limit}"
            )));
        }
        if enum_path_node_limit > 30 {
            return Err(Error::Config(format!(
                "enumeration limit {enum_path_node_limit} exceeds the 30-node mask width"
            )));
        }
        Ok(OracleConfig {
            enum_path_node_limit,
        })
    }
}

/// Maximum-cardinality matching.
pub fn max_matching(g: &Graph) -> Matching {
    let mut pg = UnGraph::<(), ()>::with_capacity(g.id_bound(), g.edge_count());
    for _ in 0..g.id_bound() {
        pg.add_node(());
    }
    for (_, u, v) in g.edges() {
        pg.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
    }
    let found = petgraph::algo::maximum_matching(&pg);
    let mut m = Matching::empty(g);
    for (a, b) in found.edges() {
        let e = g
            .find_edge(a.index(), b.index())
            .expect("matched pair is an edge");
        m.insert(g, e).expect("petgraph returns a matching");
    }
    m
}

/// Exact alternating distances from `f` together with witness paths.
#[derive(Clone, Debug)]
pub struct ExactAltDist {
    pub dist: AltDist,
    witness: HashMap<(NodeId, usize), Walk>,
}

impl ExactAltDist {
    /// A shortest `parity`-alternating path from the source to `v`.
    pub fn witness(&self, v: NodeId, parity: usize) -> Option<&Walk> {
        self.witness.get(&(v, parity))
    }
}

/// Shortest θ-alternating simple path lengths from the unmatched node `f`,
/// by enumeration of every simple alternating path. `m` is restricted to the
/// edges of `g`.
pub fn alt_dist_exact(g: &Graph, m: &Matching, f: NodeId, cfg: &OracleConfig) -> Result<ExactAltDist> {
    if g.node_count() > cfg.enum_path_node_limit {
        return Err(Error::OracleRefused {
            nodes: g.node_count(),
            limit: cfg.enum_path_node_limit,
        });
    }
    if !g.contains_node(f) {
        return Err(Error::UnknownNode(f));
    }
    let m = m.restricted_to(g);
    if m.is_matched(f) {
        return Err(Error::Contract(format!("source {f} is matched")));
    }
    let ids: Vec<NodeId> = g.nodes().collect();
    let mut slot = vec![usize::MAX; g.id_bound()];
    for (i, &v) in ids.iter().enumerate() {
        slot[v] = i;
    }

    let mut dist = AltDist::new(g.id_bound(), f);
    let mut witness = HashMap::new();
    witness.insert((f, 1), Walk::from_nodes(g, &[f])?);
    // (mask, end) -> previous end
    let mut prev: HashMap<(u32, u8), u8> = HashMap::new();
    let start = (1u32 << slot[f], slot[f] as u8);
    prev.insert(start, u8::MAX);
    let mut frontier = vec![start];
    let mut len = 0u32;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &(mask, end) in &frontier {
            let v = ids[end as usize];
            let want_matched = len % 2 == 1;
            for (e, w) in g.neighbors(v) {
                if m.contains(e) != want_matched {
                    continue;
                }
                let bit = 1u32 << slot[w];
                if mask & bit != 0 {
                    continue;
                }
                let state = (mask | bit, slot[w] as u8);
                if prev.contains_key(&state) {
                    continue;
                }
                prev.insert(state, end);
                next.push(state);
                let parity = ((len + 1) % 2) as usize;
                if w != f && dist.get(w, parity).is_none() {
                    dist.set(w, parity, Some(len + 1));
                    witness.insert((w, parity), rebuild(g, &ids, &prev, state)?);
                }
            }
        }
        frontier = next;
        len += 1;
    }
    Ok(ExactAltDist { dist, witness })
}

fn rebuild(g: &Graph, ids: &[NodeId], prev: &HashMap<(u32, u8), u8>, mut state: (u32, u8)) -> Result<Walk> {
    let mut nodes = vec![ids[state.1 as usize]];
    loop {
        let p = prev[&state];
        if p == u8::MAX {
            break;
        }
        state = (state.0 & !(1u32 << state.1), p);
        nodes.push(ids[p as usize]);
    }
    nodes.reverse();
    Walk::from_nodes(g, &nodes)
}

/// True iff every `(v, θ)` finite in `g` is also finite in `h`.
pub fn preserves_reachability(h: &Graph, g: &Graph, m: &Matching, f: NodeId, cfg: &OracleConfig) -> Result<bool> {
    if let Some((e, _, _)) = h.edges().find(|&(e, _, _)| !g.contains_edge(e)) {
        return Err(Error::Structural(format!("edge {e} of h is not in g")));
    }
    let in_g = alt_dist_exact(g, m, f, cfg)?;
    let in_h = alt_dist_exact(h, &m.restricted_to(h), f, cfg)?;
    Ok(g.nodes().all(|v| {
        (0..2).all(|t| in_g.dist.get(v, t).is_none() || (h.contains_node(v) && in_h.dist.get(v, t).is_some()))
    }))
}

/// Length of the shortest augmenting path, by enumeration from every
/// unmatched node.
pub fn shortest_augmenting_length(g: &Graph, m: &Matching, cfg: &OracleConfig) -> Result<Option<u32>> {
    let m = m.restricted_to(g);
    let mut best: Option<u32> = None;
    for f in m.unmatched(g) {
        let d = alt_dist_exact(g, &m, f, cfg)?;
        for t in m.unmatched(g).filter(|&t| t != f) {
            if let Some(l) = d.dist.get(t, 1) {
                best = Some(best.map_or(l, |b| b.min(l)));
            }
        }
    }
    Ok(best)
}

/// Augmenting path from `root` by Edmonds' blossom search, or `None` when
/// every augmenting path avoids `root`.
pub fn find_augmenting_path(g: &Graph, m: &Matching, root: NodeId) -> Result<Option<Walk>> {
    if !g.contains_node(root) {
        return Err(Error::UnknownNode(root));
    }
    let m = m.restricted_to(g);
    if m.is_matched(root) {
        return Err(Error::Contract(format!("search root {root} is matched")));
    }
    let n = g.id_bound();
    let mate: Vec<Option<NodeId>> = (0..n).map(|v| m.mate(v)).collect();
    let mut s = Search {
        g,
        mate: &mate,
        base: (0..n).collect(),
        parent: vec![None; n],
        used: vec![false; n],
        blossom: vec![false; n],
    };
    let Some(end) = s.run(root) else {
        return Ok(None);
    };
    let mut nodes = vec![end];
    let mut v = end;
    while v != root {
        let p = s.parent[v].expect("tree parent");
        nodes.push(p);
        if p == root {
            break;
        }
        v = mate[p].expect("odd tree node is matched");
        nodes.push(v);
    }
    nodes.reverse();
    Ok(Some(Walk::from_nodes(g, &nodes)?))
}

struct Search<'a> {
    g: &'a Graph,
    mate: &'a [Option<NodeId>],
    base: Vec<NodeId>,
    parent: Vec<Option<NodeId>>,
    used: Vec<bool>,
    blossom: Vec<bool>,
}

impl Search<'_> {
    fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        let mut seen = vec![false; self.base.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            match self.mate[a] {
                None => break,
                Some(ma) => a = self.parent[ma].expect("tree parent"),
            }
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b].expect("matched")].expect("tree parent");
        }
    }

    fn mark_path(&mut self, mut v: NodeId, b: NodeId, mut child: NodeId) {
        while self.base[v] != b {
            let mv = self.mate[v].expect("matched");
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[mv]] = true;
            self.parent[v] = Some(child);
            child = mv;
            v = self.parent[mv].expect("tree parent");
        }
    }

    fn run(&mut self, root: NodeId) -> Option<NodeId> {
        self.used[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (_, to) in self.g.neighbors(v) {
                if self.base[v] == self.base[to] || self.mate[v] == Some(to) {
                    continue;
                }
                let to_outer = to == root || self.mate[to].is_some_and(|mt| self.parent[mt].is_some());
                if to_outer {
                    let cur = self.lca(v, to);
                    self.blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..self.base.len() {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to].is_none() {
                    self.parent[to] = Some(v);
                    match self.mate[to] {
                        None => return Some(to),
                        Some(mt) => {
                            self.used[mt] = true;
                            queue.push_back(mt);
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generate;
    use crate::graph::is_augmenting;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_max_matching(g: &Graph) -> usize {
        let edges: Vec<_> = g.edges().collect();
        fn go(edges: &[(usize, usize, usize)], used: &mut Vec<bool>) -> usize {
            let Some((&(_, u, v), rest)) = edges.split_first() else {
                return 0;
            };
            let skip = go(rest, used);
            if used[u] || used[v] {
                return skip;
            }
            used[u] = true;
            used[v] = true;
            let take = 1 + go(rest, used);
            used[u] = false;
            used[v] = false;
            skip.max(take)
        }
        go(&edges, &mut vec![false; g.id_bound()])
    }

    #[test]
    fn max_matching_examples() {
        assert_eq!(max_matching(&fixtures::p4().graph).len(), 2);
        assert_eq!(max_matching(&fixtures::c5().graph).len(), 2);
        assert_eq!(max_matching(&fixtures::blossom6().graph).len(), 3);
        assert_eq!(brute_max_matching(&fixtures::blossom6().graph), 3);
    }

    #[test]
    fn max_matching_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..500 {
            let n = rng.gen_range(2..=10);
            let p = [0.2, 0.35, 0.6][i % 3];
            let inst = generate::gnp(n, p, rng.gen()).unwrap();
            assert_eq!(max_matching(&inst.graph).len(), brute_max_matching(&inst.graph), "{}", inst.name);
        }
    }

    #[test]
    fn alt_dist_p4() {
        let p4 = fixtures::p4();
        let d = alt_dist_exact(&p4.graph, p4.matching.as_ref().unwrap(), 0, &OracleConfig::default()).unwrap();
        assert_eq!(d.dist.get(1, 1), Some(1));
        assert_eq!(d.dist.get(2, 0), Some(2));
        assert_eq!(d.dist.get(3, 1), Some(3));
        assert_eq!(d.dist.get(1, 0), None);
        assert_eq!(d.dist.get(0, 1), Some(0));
        assert_eq!(d.dist.get(0, 0), None);
    }

    #[test]
    fn alt_dist_walktrap() {
        let wt = fixtures::walktrap();
        let m = wt.matching.as_ref().unwrap();
        let d = alt_dist_exact(&wt.graph, m, 0, &OracleConfig::default()).unwrap();
        assert_eq!(d.dist.get(4, 0), Some(4));
        assert_eq!(d.dist.get(4, 1), None);
        for v in wt.graph.nodes() {
            for t in 0..2 {
                if let Some(l) = d.dist.get(v, t) {
                    let w = d.witness(v, t).unwrap();
                    assert_eq!(w.len() as u32, l);
                    assert!(w.is_simple() && w.is_alternating(m));
                    assert_eq!((w.first(), w.last()), (0, v));
                }
            }
        }
    }

    #[test]
    fn alt_dist_refuses_large_graphs() {
        let inst = generate::long_path(10).unwrap();
        let err = alt_dist_exact(&inst.graph, inst.matching.as_ref().unwrap(), 0, &OracleConfig::default());
        assert!(matches!(err, Err(Error::OracleRefused { nodes: 22, limit: 18 })));
        assert!(OracleConfig::new(3).is_err());
    }

    #[test]
    fn adding_edges_never_increases_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = OracleConfig::default();
        for _ in 0..60 {
            let n = rng.gen_range(4..=11);
            let g = generate::gnp(n, 0.3, rng.gen()).unwrap().graph;
            let m = generate::random_matching(&g, 0.7, &mut rng);
            let Some(f) = m.unmatched(&g).next() else { continue };
            let all: Vec<_> = g.edges().map(|(e, _, _)| e).collect();
            let drop = all[rng.gen_range(0..all.len())];
            let h = g.edge_subgraph(|e| e != drop);
            let dg = alt_dist_exact(&g, &m, f, &cfg).unwrap();
            let dh = alt_dist_exact(&h, &m, f, &cfg).unwrap();
            for v in g.nodes() {
                for t in 0..2 {
                    if let Some(x) = dh.dist.get(v, t) {
                        assert!(dg.dist.get(v, t).unwrap() <= x);
                    }
                }
            }
        }
    }

    #[test]
    fn preserves_reachability_examples() {
        let cfg = OracleConfig::default();
        let p4 = fixtures::p4();
        let m = p4.matching.as_ref().unwrap();
        assert!(preserves_reachability(&p4.graph, &p4.graph, m, 0, &cfg).unwrap());
        let ab = p4.graph.find_edge(1, 2).unwrap();
        let h = p4.graph.edge_subgraph(|e| e != ab);
        assert!(!preserves_reachability(&h, &p4.graph, m, 0, &cfg).unwrap());

        let b6 = fixtures::blossom6();
        let m = b6.matching.as_ref().unwrap();
        let bd = b6.graph.find_edge(2, 4).unwrap();
        let tree = b6.graph.edge_subgraph(|e| e != bd);
        // f,a,b,d,c,g is the only augmenting path and needs bd.
        assert!(!preserves_reachability(&tree, &b6.graph, m, 0, &cfg).unwrap());
    }

    #[test]
    fn edmonds_search_finds_paths() {
        let b6 = fixtures::blossom6();
        let m = b6.matching.as_ref().unwrap();
        let p = find_augmenting_path(&b6.graph, m, 0).unwrap().unwrap();
        assert_eq!(p.nodes(), &[0, 1, 2, 4, 3, 5]);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = OracleConfig::default();
        for _ in 0..300 {
            let n = rng.gen_range(2..=14);
            let g = generate::gnp(n, rng.gen_range(0.1..0.6), rng.gen()).unwrap().graph;
            let m = generate::random_matching(&g, 0.6, &mut rng);
            for f in m.unmatched(&g).collect::<Vec<_>>() {
                let d = alt_dist_exact(&g, &m, f, &cfg).unwrap();
                let exists = m.unmatched(&g).any(|t| t != f && d.dist.get(t, 1).is_some());
                let found = find_augmenting_path(&g, &m, f).unwrap();
                assert_eq!(found.is_some(), exists);
                if let Some(p) = found {
                    assert!(is_augmenting(&g, &m, &p).unwrap());
                    assert_eq!(p.first(), f);
                }
            }
        }
    }
}
