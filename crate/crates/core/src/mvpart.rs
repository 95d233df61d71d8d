//! Round-charged reference implementations of the two verification
//! subroutines: truncated alternating distances from a source (`mv`) and a
//! partition into parts holding one short augmenting path each (`part`).
//!
//! Both are computed centrally and exactly, and charge `2ℓ` rounds.
//!
//! Distances: a BFS over `(node, parity)` states gives shortest alternating
//! *walks*. When the walk to `(t, odd)` is simple it is a shortest path.
//! Otherwise the odd distance to `t` is recovered exactly from a maximum
//! weight perfect matching: with `t` detached from its mate and every other
//! unmatched node removed, each perfect matching `N` of the rest yields an
//! `f`–`t` path in `M ⊕ N`, and weighting matched edges 2 makes the optimum
//! keep as many of them as possible, i.e. pick the shortest such path.

use std::collections::{BTreeSet, VecDeque};

use petgraph::graph::{NodeIndex, UnGraph};

use crate::error::{Error, Result};
use crate::graph::{AltDist, EdgeId, Graph, Matching, NodeId, Walk};
use crate::sim::Session;

pub const MV_PHASE: &str = "MV";
pub const PART_PHASE: &str = "PART";

/// Shortest alternating walks from `f`, by parity of length.
struct WalkBfs {
    dist: Vec<[Option<u32>; 2]>,
    pred: Vec<[Option<(EdgeId, NodeId)>; 2]>,
}

impl WalkBfs {
    fn new(g: &Graph, m: &Matching, f: NodeId, limit: u32) -> WalkBfs {
        let n = g.id_bound();
        let mut dist = vec![[None, None]; n];
        let mut pred = vec![[None, None]; n];
        dist[f][0] = Some(0);
        let mut queue = VecDeque::from([(f, 0usize)]);
        while let Some((v, p)) = queue.pop_front() {
            let d = dist[v][p].unwrap();
            if d >= limit {
                continue;
            }
            let q = 1 - p;
            if p == 0 {
                for (e, w) in g.neighbors(v) {
                    if !m.contains(e) && dist[w][q].is_none() {
                        dist[w][q] = Some(d + 1);
                        pred[w][q] = Some((e, v));
                        queue.push_back((w, q));
                    }
                }
            } else if let (Some(e), Some(w)) = (m.mate_edge(v), m.mate(v)) {
                if dist[w][q].is_none() {
                    dist[w][q] = Some(d + 1);
                    pred[w][q] = Some((e, v));
                    queue.push_back((w, q));
                }
            }
        }
        WalkBfs { dist, pred }
    }

    fn min_dist(&self, v: NodeId) -> Option<u32> {
        match self.dist[v] {
            [Some(a), Some(b)] => Some(a.min(b)),
            [a, b] => a.or(b),
        }
    }

    fn walk_to(&self, g: &Graph, t: NodeId, parity: usize) -> Walk {
        let (mut nodes, mut edges) = (vec![t], Vec::new());
        let (mut v, mut p) = (t, parity);
        while let Some((e, u)) = self.pred[v][p] {
            edges.push(e);
            nodes.push(u);
            v = u;
            p = 1 - p;
        }
        nodes.reverse();
        edges.reverse();
        Walk::new(g, nodes, edges).expect("BFS predecessors form a walk")
    }
}

/// Shortest odd alternating path from `f` to `t` of length at most `limit`,
/// via the perfect-matching reduction.
fn exact_odd_path(g: &Graph, m: &Matching, f: NodeId, t: NodeId, limit: u32, bfs: &WalkBfs) -> Result<Option<Walk>> {
    let near = |x: NodeId| bfs.min_dist(x).is_some_and(|d| d <= limit);
    let t_mate = m.mate(t);
    let keep: Vec<NodeId> = g
        .nodes()
        .filter(|&x| {
            x == f
                || x == t
                || (Some(x) != t_mate && m.mate(x).is_some_and(|y| y != t && near(x) && near(y)))
        })
        .collect();
    let mut slot = vec![usize::MAX; g.id_bound()];
    let mut pg = UnGraph::<NodeId, u8>::with_capacity(keep.len(), 0);
    for &x in &keep {
        slot[x] = pg.add_node(x).index();
    }
    for (e, u, v) in g.edges() {
        if slot[u] != usize::MAX && slot[v] != usize::MAX {
            pg.add_edge(NodeIndex::new(slot[u]), NodeIndex::new(slot[v]), if m.contains(e) { 2 } else { 1 });
        }
    }
    let found = rustworkx_core::max_weight_matching::max_weight_matching(
        &pg,
        true,
        |e| Ok::<i128, std::convert::Infallible>(i128::from(*e.weight())),
        false,
    )
    .unwrap_or_else(|never| match never {});
    if 2 * found.len() != keep.len() {
        return Ok(None);
    }
    let mut other = vec![usize::MAX; g.id_bound()];
    for (a, b) in found {
        let (a, b) = (keep[a], keep[b]);
        other[a] = b;
        other[b] = a;
    }
    let mut nodes = vec![f];
    let mut cur = f;
    loop {
        let next = other[cur];
        nodes.push(next);
        if next == t {
            break;
        }
        cur = m
            .mate(next)
            .ok_or_else(|| Error::Internal(format!("exposed node {next} inside M ⊕ N")))?;
        nodes.push(cur);
        if nodes.len() > keep.len() {
            return Err(Error::Internal("M ⊕ N path does not reach the target".into()));
        }
    }
    let walk = Walk::from_nodes(g, &nodes)?;
    Ok((walk.len() as u32 <= limit).then_some(walk))
}

/// Exact shortest odd alternating path from `f` to `t`, if its length is at
/// most `limit`.
pub fn odd_path(g: &Graph, m: &Matching, f: NodeId, t: NodeId, limit: u32) -> Result<Option<Walk>> {
    check_source(g, m, f)?;
    let bfs = WalkBfs::new(g, m, f, limit);
    odd_path_with(g, m, f, t, limit, &bfs)
}

fn odd_path_with(g: &Graph, m: &Matching, f: NodeId, t: NodeId, limit: u32, bfs: &WalkBfs) -> Result<Option<Walk>> {
    if t == f || bfs.dist[t][1].is_none() {
        return Ok(None);
    }
    let w = bfs.walk_to(g, t, 1);
    if w.is_simple() {
        return Ok(Some(w));
    }
    exact_odd_path(g, m, f, t, limit, bfs)
}

fn check_source(g: &Graph, m: &Matching, f: NodeId) -> Result<()> {
    if !g.contains_node(f) {
        return Err(Error::UnknownNode(f));
    }
    if m.is_matched(f) {
        return Err(Error::Contract(format!("source {f} is matched")));
    }
    Ok(())
}

/// Exact alternating distances from `f`, with every value above `limit`
/// reported as infinite. `m` must be a matching of `g`.
pub fn alt_distances(g: &Graph, m: &Matching, f: NodeId, limit: u32) -> Result<AltDist> {
    check_source(g, m, f)?;
    let bfs = WalkBfs::new(g, m, f, limit);
    let mut out = AltDist::new(g.id_bound(), f);
    for t in g.nodes().filter(|&t| t != f) {
        if let Some(p) = odd_path_with(g, m, f, t, limit, &bfs)? {
            out.set(t, 1, Some(p.len() as u32));
        }
    }
    for v in g.nodes().filter(|&v| v != f) {
        if let Some(u) = m.mate(v) {
            if let Some(d) = out.get(u, 1).filter(|&d| d < limit) {
                out.set(v, 0, Some(d + 1));
            }
        }
    }
    Ok(out)
}

/// Per-node output of `mv`: the pairs `(θ, r^θ(f, v))` with `r^θ ≤ ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvOutput {
    pub limit: u32,
    pub dist: AltDist,
}

impl MvOutput {
    pub fn source(&self) -> NodeId {
        self.dist.source()
    }

    /// Reported pairs at `v`; nothing is reported at the source.
    pub fn pairs(&self, v: NodeId) -> Vec<(usize, u32)> {
        if v == self.source() {
            return Vec::new();
        }
        (0..2)
            .filter_map(|t| self.dist.get(v, t).map(|d| (t, d)))
            .collect()
    }
}

/// Truncated alternating distances from `f`; charges `2ℓ` rounds.
pub fn mv(g: &Graph, m: &Matching, ell: u32, f: NodeId, session: &mut Session) -> Result<MvOutput> {
    let dist = alt_distances(g, &m.restricted_to(g), f, ell).map_err(|e| e.in_phase(MV_PHASE))?;
    session.charge(MV_PHASE, 2 * u64::from(ell));
    Ok(MvOutput { limit: ell, dist })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub nodes: BTreeSet<NodeId>,
    /// The two unmatched nodes, `f < g`.
    pub f: NodeId,
    pub g: NodeId,
    /// Length of the augmenting path the part was grown around.
    pub path_len: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub parts: Vec<Part>,
    /// Part index per node id; `None` is unassigned.
    pub label: Vec<Option<usize>>,
}

impl Partition {
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// Checks the partition invariants against `g`, `m` and `ell`.
    pub fn validate(&self, g: &Graph, m: &Matching, ell: u32) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, p) in self.parts.iter().enumerate() {
            for &v in &p.nodes {
                if !seen.insert(v) {
                    return Err(Error::Contract(format!("node {v} is in two parts")));
                }
                if self.label[v] != Some(i) {
                    return Err(Error::Contract(format!("label of node {v} disagrees with part {i}")));
                }
            }
            let h = g.induced_subgraph(&p.nodes)?;
            let free: Vec<_> = m.restricted_to(&h).unmatched(&h).collect();
            if free != [p.f, p.g] {
                return Err(Error::Contract(format!("part {i} has unmatched nodes {free:?}")));
            }
            if p.nodes.iter().any(|&v| m.mate(v).is_some_and(|w| !p.nodes.contains(&w))) {
                return Err(Error::Contract(format!("part {i} splits a matched pair")));
            }
            let hm = m.restricted_to(&h);
            if odd_path(&h, &hm, p.f, p.g, ell)?.is_none() {
                return Err(Error::Contract(format!("part {i} has no augmenting path of length ≤ {ell}")));
            }
            match h.diameter() {
                Some(d) if d as u64 <= 8 * u64::from(ell) => {}
                d => return Err(Error::Contract(format!("part {i} has diameter {d:?} > 8ℓ"))),
            }
        }
        Ok(())
    }
}

/// Greedy partition around node-disjoint shortest augmenting paths of length
/// at most `ell`; charges `2ℓ` rounds.
pub fn part(g: &Graph, m: &Matching, ell: u32, session: &mut Session) -> Result<Partition> {
    if ell == 0 {
        return Err(Error::Contract("part needs ℓ ≥ 1".into()));
    }
    let m = m.restricted_to(g);
    let paths = peel(g, &m, ell)?;
    let mut radius = ell.div_ceil(2) as usize;
    let out = loop {
        let candidate = grow(g, &m, &paths, radius);
        let ok = candidate.parts.iter().all(|p| {
            let h = g.induced_subgraph(&p.nodes).expect("part nodes are in g");
            h.diameter().is_some_and(|d| d as u64 <= 8 * u64::from(ell))
        });
        if ok {
            break candidate;
        }
        radius -= 1;
    };
    session.charge(PART_PHASE, 2 * u64::from(ell));
    Ok(out)
}

/// Best `(length, target, path)` from one source, with the nodes its search
/// touched.
type Cached = (Option<(u32, NodeId, Walk)>, BTreeSet<NodeId>);

/// Repeatedly removes the shortest augmenting path (ties: lowest endpoint
/// pair) until none of length ≤ `ell` is left.
fn peel(g: &Graph, m: &Matching, ell: u32) -> Result<Vec<Walk>> {
    let mut alive: BTreeSet<NodeId> = g.nodes().collect();
    let mut paths = Vec::new();
    // Cached best candidate per source, invalidated when its search touched
    // a removed node.
    let mut cache: Vec<Option<Cached>> = vec![None; g.id_bound()];
    loop {
        let h = g.induced_subgraph(&alive)?;
        let hm = m.restricted_to(&h);
        let mut best: Option<(u32, NodeId, NodeId, Walk)> = None;
        let sources: Vec<NodeId> = hm.unmatched(&h).collect();
        for &f in &sources {
            if cache[f].is_none() {
                let bfs = WalkBfs::new(&h, &hm, f, ell);
                let touched: BTreeSet<NodeId> = h.nodes().filter(|&v| bfs.min_dist(v).is_some()).collect();
                let mut mine: Option<(u32, NodeId, Walk)> = None;
                for &t in sources.iter().filter(|&&t| t > f) {
                    let bound = mine.as_ref().map_or(ell, |b| b.0);
                    if bfs.dist[t][1].is_none_or(|d| d > bound) {
                        continue;
                    }
                    if let Some(p) = odd_path_with(&h, &hm, f, t, bound, &bfs)? {
                        let len = p.len() as u32;
                        if mine.as_ref().is_none_or(|b| (len, t) < (b.0, b.1)) {
                            mine = Some((len, t, p));
                        }
                    }
                }
                cache[f] = Some((mine, touched));
            }
            if let Some((Some((len, t, p)), _)) = &cache[f] {
                if best.as_ref().is_none_or(|b| (*len, f, *t) < (b.0, b.1, b.2)) {
                    best = Some((*len, f, *t, p.clone()));
                }
            }
        }
        let Some((_, _, _, p)) = best else {
            return Ok(paths);
        };
        for &v in p.nodes() {
            alive.remove(&v);
        }
        for slot in cache.iter_mut() {
            if slot.as_ref().is_some_and(|(_, touched)| p.nodes().iter().any(|v| touched.contains(v))) {
                *slot = None;
            }
        }
        paths.push(p);
    }
}

/// Parts from peeled paths; unassigned matched pairs adjacent to a part are
/// absorbed layer by layer, for at most `radius` layers.
fn grow(g: &Graph, m: &Matching, paths: &[Walk], radius: usize) -> Partition {
    let mut label: Vec<Option<usize>> = vec![None; g.id_bound()];
    let mut parts = Vec::new();
    let mut frontier: Vec<Vec<NodeId>> = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for &v in p.nodes() {
            label[v] = Some(i);
        }
        let (a, b) = (p.first().min(p.last()), p.first().max(p.last()));
        parts.push(Part {
            nodes: p.nodes().iter().copied().collect(),
            f: a,
            g: b,
            path_len: p.len() as u32,
        });
        frontier.push(p.nodes().to_vec());
    }
    for _ in 0..radius {
        for i in 0..parts.len() {
            let mut next = Vec::new();
            for &v in &frontier[i] {
                for (_, x) in g.neighbors(v) {
                    let Some(y) = m.mate(x) else { continue };
                    if label[x].is_none() && label[y].is_none() {
                        label[x] = Some(i);
                        label[y] = Some(i);
                        parts[i].nodes.extend([x, y]);
                        next.extend([x, y]);
                    }
                }
            }
            frontier[i] = next;
        }
    }
    Partition { parts, label }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generate;
    use crate::oracle::{self, OracleConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn session(g: &Graph) -> Session {
        Session::for_graph(g, 0)
    }

    #[test]
    fn mv_p4() {
        let p4 = fixtures::p4();
        let (g, m) = (&p4.graph, p4.matching.as_ref().unwrap());
        let mut s = session(g);
        let out = mv(g, m, 3, 0, &mut s).unwrap();
        assert_eq!(out.pairs(1), vec![(1, 1)]);
        assert_eq!(out.pairs(2), vec![(0, 2)]);
        assert_eq!(out.pairs(3), vec![(1, 3)]);
        assert!(out.pairs(0).is_empty());
        assert_eq!(s.report.rounds(), 6);

        let out = mv(g, m, 1, 0, &mut s).unwrap();
        assert_eq!(out.pairs(1), vec![(1, 1)]);
        assert!(out.pairs(2).is_empty() && out.pairs(3).is_empty());
    }

    #[test]
    fn mv_walktrap() {
        let wt = fixtures::walktrap();
        let (g, m) = (&wt.graph, wt.matching.as_ref().unwrap());
        let out = mv(g, m, 5, 0, &mut session(g)).unwrap();
        assert_eq!(out.pairs(4), vec![(0, 4)]);
    }

    #[test]
    fn mv_rejects_matched_source() {
        let p4 = fixtures::p4();
        let err = mv(&p4.graph, p4.matching.as_ref().unwrap(), 3, 1, &mut session(&p4.graph));
        assert!(matches!(err.unwrap_err().root(), Error::Contract(_)));
    }

    #[test]
    fn mv_matches_enumeration() {
        let cfg = OracleConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        let mut fixtures_checked = 0;
        for fx in fixtures::all() {
            let m = fx.matching_or_empty();
            for f in m.unmatched(&fx.graph).collect::<Vec<_>>() {
                let truth = oracle::alt_dist_exact(&fx.graph, &m, f, &cfg).unwrap().dist;
                for ell in 0..fx.graph.node_count() as u32 {
                    assert_eq!(alt_distances(&fx.graph, &m, f, ell).unwrap(), truth.truncated(ell));
                }
                fixtures_checked += 1;
            }
        }
        assert!(fixtures_checked > 0);
        while checked < 300 {
            let n = rng.gen_range(4..=18);
            let g = generate::gnp(n, rng.gen_range(0.1..0.5), rng.gen()).unwrap().graph;
            let m = generate::random_matching(&g, rng.gen_range(0.5..1.0), &mut rng);
            let Some(f) = m.unmatched(&g).next() else { continue };
            let ell = rng.gen_range(0..n as u32);
            let truth = oracle::alt_dist_exact(&g, &m, f, &cfg).unwrap().dist;
            assert_eq!(alt_distances(&g, &m, f, ell).unwrap(), truth.truncated(ell), "n={n} f={f} ell={ell}");
            checked += 1;
        }
    }

    #[test]
    fn odd_paths_are_alternating_and_exact() {
        let cfg = OracleConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let n = rng.gen_range(4..=16);
            let g = generate::gnp(n, rng.gen_range(0.15..0.5), rng.gen()).unwrap().graph;
            let m = generate::random_matching(&g, 0.9, &mut rng);
            let Some(f) = m.unmatched(&g).next() else { continue };
            let truth = oracle::alt_dist_exact(&g, &m, f, &cfg).unwrap().dist;
            for t in g.nodes() {
                let p = odd_path(&g, &m, f, t, n as u32).unwrap();
                assert_eq!(p.as_ref().map(|p| p.len() as u32), truth.get(t, 1).filter(|_| t != f));
                if let Some(p) = p {
                    assert!(p.is_simple() && p.is_alternating(&m) && p.first() == f && p.last() == t);
                }
            }
        }
    }

    #[test]
    fn part_examples() {
        let p4 = fixtures::p4();
        let (g, m) = (&p4.graph, p4.matching.as_ref().unwrap());
        let mut s = session(g);
        let pt = part(g, m, 3, &mut s).unwrap();
        assert_eq!(pt.len(), 1);
        assert_eq!(pt.parts[0].nodes, BTreeSet::from([0, 1, 2, 3]));
        assert_eq!((pt.parts[0].f, pt.parts[0].g), (0, 3));
        pt.validate(g, m, 3).unwrap();
        assert_eq!(s.report.rounds(), 6);

        assert!(part(g, m, 1, &mut s).unwrap().is_empty());

        let twin = fixtures::twin_p4();
        let (g, m) = (&twin.graph, twin.matching.as_ref().unwrap());
        let pt = part(g, m, 3, &mut session(g)).unwrap();
        assert_eq!(pt.len(), 2);
        pt.validate(g, m, 3).unwrap();
        assert_eq!((pt.parts[0].f, pt.parts[0].g), (0, 3));
        assert_eq!((pt.parts[1].f, pt.parts[1].g), (4, 7));

        let c6 = fixtures::c6();
        let perfect = oracle::max_matching(&c6.graph);
        assert!(part(&c6.graph, &perfect, 5, &mut session(&c6.graph)).unwrap().is_empty());
    }

    #[test]
    fn part_invariants_hold_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..150 {
            let n = rng.gen_range(4..=40);
            let g = generate::gnp(n, rng.gen_range(0.05..0.3), rng.gen()).unwrap().graph;
            let m = generate::random_matching(&g, rng.gen_range(0.3..1.0), &mut rng);
            let ell = rng.gen_range(1..=n as u32);
            let pt = part(&g, &m, ell, &mut session(&g)).unwrap();
            pt.validate(&g, &m, ell).unwrap();
            let short = (0..g.id_bound())
                .filter(|&f| !m.is_matched(f))
                .any(|f| m.unmatched(&g).any(|t| t != f && odd_path(&g, &m, f, t, ell).unwrap().is_some()));
            assert_eq!(short, !pt.is_empty());
        }
    }
}
