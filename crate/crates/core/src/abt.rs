//! Alternating base trees and LCA depths of non-tree edges.
//!
//! Every node other than the root picks as parent a neighbour `u` such that
//! the edge to `u` is the last edge of a shortest alternating path from the
//! root: `I_M(v, u) = 1 − γ(v)` and `r^{γ(v)}(v) = r^{1−γ(v)}(u) + 1`.
//! Ties go to the lowest neighbour id.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{AltDist, EdgeId, Graph, Matching, NodeId};
use crate::sim::{Ctx, Message, NodeProgram, Session, Status, Widths};

pub const ABT_PHASE: &str = "ABT";
pub const LCA_PHASE: &str = "LCA";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltBaseTree {
    pub root: NodeId,
    /// `(par(v), ep(v))` per node; `None` at the root and at absent nodes.
    pub parent: Vec<Option<(NodeId, EdgeId)>>,
    pub children: Vec<Vec<(NodeId, EdgeId)>>,
    pub depth: Vec<Option<u32>>,
    pub height: u32,
}

impl AltBaseTree {
    pub fn is_tree_edge(&self, e: EdgeId) -> bool {
        self.parent.iter().flatten().any(|&(_, pe)| pe == e)
    }

    pub fn tree_edges(&self) -> Vec<EdgeId> {
        let mut out: Vec<_> = self.parent.iter().flatten().map(|&(_, e)| e).collect();
        out.sort_unstable();
        out
    }

    /// Nodes of the subtree `T_v`.
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children[out[i]].iter().map(|c| c.0));
            i += 1;
        }
        out
    }
}

#[derive(Clone, Debug, Hash)]
enum AbtMsg {
    Dist(Option<u32>, Option<u32>),
    Child,
}

impl Message for AbtMsg {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(2)
            + match self {
                AbtMsg::Dist(..) => 2 * w.count,
                AbtMsg::Child => 0,
            }
    }
}

struct AbtNode {
    root: bool,
    mine: [Option<u32>; 2],
    matched_port: Option<EdgeId>,
    parent: Option<(NodeId, EdgeId)>,
    children: Vec<(NodeId, EdgeId)>,
    stuck: bool,
}

impl NodeProgram for AbtNode {
    type Msg = AbtMsg;
    type Output = (Option<(NodeId, EdgeId)>, Vec<(NodeId, EdgeId)>, bool);

    fn step(&mut self, ctx: &mut Ctx<'_, AbtMsg>) -> Status {
        match ctx.round() {
            1 => {
                // The root announces its length-zero path as even.
                let even = if self.root { Some(0) } else { self.mine[0] };
                for (e, _) in ctx.view().ports.clone() {
                    ctx.send(e, AbtMsg::Dist(even, self.mine[1]));
                }
                Status::Running
            }
            2 => {
                if self.root {
                    return Status::Halted;
                }
                let gamma = match self.mine {
                    [Some(a), Some(b)] => usize::from(b < a),
                    [None, Some(_)] => 1,
                    _ => 0,
                };
                let Some(d) = self.mine[gamma] else {
                    self.stuck = true;
                    return Status::Halted;
                };
                let want_matched = gamma == 0;
                let mut best: Option<(NodeId, EdgeId)> = None;
                for (e, msg) in ctx.inbox() {
                    let AbtMsg::Dist(even, odd) = msg else { continue };
                    if (Some(*e) == self.matched_port) != want_matched {
                        continue;
                    }
                    let other = if gamma == 1 { *even } else { *odd };
                    if other.is_some_and(|x| x + 1 == d) {
                        let u = ctx.view().neighbor(*e).expect("incident");
                        if best.is_none_or(|b| u < b.0) {
                            best = Some((u, *e));
                        }
                    }
                }
                match best {
                    Some((u, e)) => {
                        self.parent = Some((u, e));
                        ctx.send(e, AbtMsg::Child);
                    }
                    None => self.stuck = true,
                }
                Status::Halted
            }
            _ => {
                for (e, msg) in ctx.inbox() {
                    if matches!(msg, AbtMsg::Child) {
                        self.children.push((ctx.view().neighbor(*e).expect("incident"), *e));
                    }
                }
                self.children.sort_unstable();
                Status::Halted
            }
        }
    }

    fn output(self) -> Self::Output {
        (self.parent, self.children, self.stuck)
    }
}

/// Builds the alternating base tree of `g` rooted at `f`. Every node of `g`
/// must be reachable from `f`; `dist` holds the exact distances.
pub fn build_abt(g: &Graph, m: &Matching, f: NodeId, dist: &AltDist, session: &mut Session) -> Result<AltBaseTree> {
    let m = m.restricted_to(g);
    if let Some(v) = g.nodes().find(|&v| v != f && !dist.is_reachable(v)) {
        return Err(Error::Contract(format!("node {v} is unreachable from {f}")));
    }
    let out = session.run(ABT_PHASE, g, |view| AbtNode {
        root: view.id == f,
        mine: [dist.get(view.id, 0), dist.get(view.id, 1)],
        matched_port: m.mate_edge(view.id),
        parent: None,
        children: Vec::new(),
        stuck: false,
    })?;
    let mut parent = vec![None; g.id_bound()];
    let mut children = vec![Vec::new(); g.id_bound()];
    for v in g.nodes() {
        let (p, c, stuck) = out[v].clone().expect("present node ran");
        if stuck {
            return Err(Error::Contract(format!("node {v} has no eligible parent edge")));
        }
        parent[v] = p;
        children[v] = c;
    }
    let mut depth = vec![None; g.id_bound()];
    depth[f] = Some(0);
    let mut queue = VecDeque::from([f]);
    let mut height = 0;
    while let Some(v) = queue.pop_front() {
        let d = depth[v].unwrap();
        height = height.max(d);
        for &(c, _) in &children[v] {
            depth[c] = Some(d + 1);
            queue.push_back(c);
        }
    }
    if let Some(v) = g.nodes().find(|&v| depth[v].is_none()) {
        return Err(Error::Internal(format!("node {v} is not below the root")));
    }
    Ok(AltBaseTree {
        root: f,
        parent,
        children,
        depth,
        height,
    })
}

/// Checks the defining equalities of an alternating base tree.
pub fn check_abt(t: &AltBaseTree, g: &Graph, m: &Matching, dist: &AltDist) -> Result<()> {
    for v in g.nodes().filter(|&v| v != t.root) {
        let Some((u, e)) = t.parent[v] else {
            return Err(Error::Contract(format!("node {v} has no parent")));
        };
        let (a, b) = g.endpoints(e)?;
        if !((a, b) == (u, v) || (a, b) == (v, u)) {
            return Err(Error::Contract(format!("ep({v}) does not join {v} and {u}")));
        }
        let gamma = dist.gamma(v);
        if usize::from(m.contains(e)) != 1 - gamma {
            return Err(Error::Contract(format!("ep({v}) has the wrong matching status")));
        }
        let up = if u == t.root && gamma == 1 { Some(0) } else { dist.get(u, 1 - gamma) };
        if dist.get(v, gamma).is_none() || up.map(|x| x + 1) != dist.get(v, gamma) {
            return Err(Error::Contract(format!("ep({v}) is not the last edge of a shortest path")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LcaTable {
    pub depth: Vec<Option<u32>>,
    pub root_path: Vec<Vec<NodeId>>,
    /// Depth of the lowest common ancestor per non-tree edge.
    pub lca: BTreeMap<EdgeId, u32>,
}

#[derive(Clone, Debug, Hash)]
enum LcaMsg {
    /// An ancestor id travelling down the tree; `last` marks the sender.
    Anc { id: NodeId, last: bool },
    /// One id of the sender's root path across a non-tree edge.
    Path { id: NodeId, last: bool },
}

impl Message for LcaMsg {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(2) + w.id + 1
    }
}

#[derive(Default)]
struct Stream {
    sent: usize,
    recv: Vec<(NodeId, bool)>,
    lca: Option<u32>,
    /// Index at which the comparison was settled; the peer needs our id at
    /// that index too.
    upto: usize,
}

impl Stream {
    fn finished(&self, len: usize) -> bool {
        self.lca.is_some() && (self.sent > self.upto || self.sent == len)
    }
}

struct LcaNode {
    parent: Option<EdgeId>,
    children: Vec<EdgeId>,
    others: BTreeMap<EdgeId, Stream>,
    heard: Vec<NodeId>,
    path: Option<Vec<NodeId>>,
    queue: VecDeque<(NodeId, bool)>,
}

impl LcaNode {
    fn decide(&mut self) {
        let Some(path) = &self.path else { return };
        for s in self.others.values_mut() {
            if s.lca.is_some() {
                continue;
            }
            for (j, &(id, last)) in s.recv.iter().enumerate() {
                if id != path[j] {
                    s.lca = Some(j as u32 - 1);
                    s.upto = j;
                    break;
                }
                if last || j + 1 == path.len() {
                    s.lca = Some(j as u32);
                    s.upto = j;
                    break;
                }
            }
        }
    }
}

impl NodeProgram for LcaNode {
    type Msg = LcaMsg;
    type Output = (u32, Vec<NodeId>, BTreeMap<EdgeId, u32>);

    fn step(&mut self, ctx: &mut Ctx<'_, LcaMsg>) -> Status {
        let me = ctx.id();
        if ctx.round() == 1 && self.parent.is_none() {
            self.path = Some(vec![me]);
            self.queue.push_back((me, true));
        }
        for (e, msg) in ctx.inbox() {
            match *msg {
                LcaMsg::Anc { id, last } => {
                    self.heard.push(id);
                    self.queue.push_back((id, false));
                    if last {
                        let mut p = self.heard.clone();
                        p.push(me);
                        self.path = Some(p);
                        self.queue.push_back((me, true));
                    }
                }
                LcaMsg::Path { id, last } => {
                    if let Some(s) = self.others.get_mut(e) {
                        s.recv.push((id, last));
                    }
                }
            }
        }
        self.decide();
        if let Some((id, last)) = self.queue.pop_front() {
            for &c in &self.children {
                ctx.send(c, LcaMsg::Anc { id, last });
            }
        }
        if let Some(path) = &self.path {
            for (&e, s) in self.others.iter_mut() {
                if !s.finished(path.len()) && s.sent < path.len() {
                    ctx.send(e, LcaMsg::Path { id: path[s.sent], last: s.sent + 1 == path.len() });
                    s.sent += 1;
                }
            }
        }
        let done = self.path.as_ref().is_some_and(|p| {
            self.queue.is_empty() && self.others.values().all(|s| s.finished(p.len()))
        });
        if done {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn output(self) -> Self::Output {
        let path = self.path.unwrap_or_default();
        let lca = self.others.into_iter().map(|(e, s)| (e, s.lca.expect("decided"))).collect();
        (path.len() as u32 - 1, path, lca)
    }
}

/// Depths, root paths and non-tree edge LCA depths, computed by pipelined
/// downward broadcast of ancestor ids followed by root-path exchange across
/// every non-tree edge.
pub fn lca_preprocess(t: &AltBaseTree, g: &Graph, session: &mut Session) -> Result<LcaTable> {
    let out = session.run(LCA_PHASE, g, |view| {
        let v = view.id;
        let children: Vec<EdgeId> = t.children[v].iter().map(|c| c.1).collect();
        let parent = t.parent[v].map(|p| p.1);
        let others = view
            .ports
            .iter()
            .filter(|(e, _)| Some(*e) != parent && !children.contains(e))
            .map(|&(e, _)| (e, Stream::default()))
            .collect();
        LcaNode {
            parent,
            children,
            others,
            heard: Vec::new(),
            path: None,
            queue: VecDeque::new(),
        }
    })?;
    let mut table = LcaTable {
        depth: vec![None; g.id_bound()],
        root_path: vec![Vec::new(); g.id_bound()],
        lca: BTreeMap::new(),
    };
    for v in g.nodes() {
        let (d, path, lca) = out[v].clone().expect("present node ran");
        table.depth[v] = Some(d);
        table.root_path[v] = path;
        for (e, x) in lca {
            if let Some(prev) = table.lca.insert(e, x) {
                if prev != x {
                    return Err(Error::Internal(format!("endpoints of edge {e} disagree on lca")));
                }
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generate;
    use crate::mvpart::alt_distances;
    use crate::oracle::{alt_dist_exact, OracleConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn tree_for(g: &Graph, m: &Matching, f: NodeId) -> (AltBaseTree, AltDist, Session) {
        let dist = alt_dist_exact(g, m, f, &OracleConfig::default()).unwrap().dist;
        let mut s = Session::for_graph(g, 0);
        let t = build_abt(g, m, f, &dist, &mut s).unwrap();
        (t, dist, s)
    }

    fn naive_lca_depth(t: &AltBaseTree, mut a: NodeId, mut b: NodeId) -> u32 {
        while t.depth[a] > t.depth[b] {
            a = t.parent[a].unwrap().0;
        }
        while t.depth[b] > t.depth[a] {
            b = t.parent[b].unwrap().0;
        }
        while a != b {
            a = t.parent[a].unwrap().0;
            b = t.parent[b].unwrap().0;
        }
        t.depth[a].unwrap()
    }

    #[test]
    fn p4_tree_is_the_path() {
        let p4 = fixtures::p4();
        let (t, _, s) = tree_for(&p4.graph, p4.matching.as_ref().unwrap(), 0);
        assert_eq!(t.parent[1].unwrap().0, 0);
        assert_eq!(t.parent[2].unwrap().0, 1);
        assert_eq!(t.parent[3].unwrap().0, 2);
        assert_eq!(s.report.rounds(), 2);
        let mut s = Session::for_graph(&p4.graph, 0);
        let table = lca_preprocess(&t, &p4.graph, &mut s).unwrap();
        assert!(table.lca.is_empty());
        assert!(s.report.rounds() <= 3 * 3 + 2);
    }

    #[test]
    fn blossom6_tree() {
        let b6 = fixtures::blossom6();
        let (g, m) = (&b6.graph, b6.matching.as_ref().unwrap());
        let (t, dist, _) = tree_for(g, m, 0);
        let parents: Vec<_> = (1..6).map(|v| t.parent[v].unwrap().0).collect();
        // a←f, b←a, c←b, d←b, g←c
        assert_eq!(parents, vec![0, 1, 2, 2, 3]);
        check_abt(&t, g, m, &dist).unwrap();
        let table = lca_preprocess(&t, g, &mut Session::for_graph(g, 0)).unwrap();
        let cd = g.find_edge(3, 4).unwrap();
        assert_eq!(table.lca, BTreeMap::from([(cd, 2)]));
        assert_eq!(table.lca.len(), g.edge_count() - (g.node_count() - 1));
    }

    #[test]
    fn star_with_leaf_edge_has_root_lca() {
        let g = Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        let m = Matching::empty(&g);
        let (t, _, _) = tree_for(&g, &m, 0);
        let table = lca_preprocess(&t, &g, &mut Session::for_graph(&g, 0)).unwrap();
        assert_eq!(table.lca[&3], 0);
    }

    #[test]
    fn tie_break_is_lowest_id_and_repeatable() {
        // f–a=b–e and f–c=d–e: e has eligible parents b and d.
        let g = Graph::new(6, &[(0, 1), (0, 3), (1, 2), (3, 4), (2, 5), (4, 5)]).unwrap();
        let m = Matching::from_pairs(&g, &[(1, 2), (3, 4)]).unwrap();
        let (t1, _, _) = tree_for(&g, &m, 0);
        let (t2, _, _) = tree_for(&g, &m, 0);
        assert_eq!(t1.parent[5].unwrap().0, 2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn random_trees_satisfy_definition_and_lca() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut done = 0;
        while done < 300 {
            let n = rng.gen_range(3..=40);
            let g = generate::gnp(n, rng.gen_range(0.05..0.4), rng.gen()).unwrap().graph;
            let m = generate::random_matching(&g, rng.gen_range(0.3..1.0), &mut rng);
            let Some(f) = m.unmatched(&g).next() else { continue };
            let dist = alt_distances(&g, &m, f, n as u32).unwrap();
            let keep: BTreeSet<_> = g.nodes().filter(|&v| v == f || dist.is_reachable(v)).collect();
            let h = g.induced_subgraph(&keep).unwrap();
            let mut s = Session::for_graph(&g, 0);
            let t = build_abt(&h, &m, f, &dist, &mut s).unwrap();
            check_abt(&t, &h, &m.restricted_to(&h), &dist).unwrap();
            for v in h.nodes().filter(|&v| v != f) {
                let p = t.parent[v].unwrap().0;
                assert!(dist.best(v).unwrap() > if p == f { 0 } else { dist.best(p).unwrap() });
            }
            let before = s.report.rounds();
            let table = lca_preprocess(&t, &h, &mut s).unwrap();
            assert!(s.report.rounds() - before <= 3 * u64::from(t.height) + 3);
            for (e, u, w) in h.edges() {
                if t.is_tree_edge(e) {
                    assert!(!table.lca.contains_key(&e));
                } else {
                    assert_eq!(table.lca[&e], naive_lca_depth(&t, u, w));
                }
            }
            for v in h.nodes() {
                assert_eq!(table.depth[v], t.depth[v]);
            }
            done += 1;
        }
    }
}
