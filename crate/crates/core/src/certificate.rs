//! Level edge sets, the pipelined minimum-outgoing-edge aggregation, and the
//! sparse certificate `H = T + F^c`.
//!
//! An unmatched edge `(u, w)` has level `max(r⁰(u), r⁰(w))`, a matched edge
//! `max(r¹(u), r¹(w))`; an infinite value leaves the edge without a level.
//! For a level `k`, every node `v` learns the minimum `(lca, u, w)` over
//! level-`k` non-tree edges `u < w` touching `T_v`; it is an outgoing edge of `T_v`
//! exactly when its lca depth is below `d_v`. Each node adds the outgoing
//! edge of the first level that has one.

use std::collections::{BTreeMap, BTreeSet};

use crate::abt::{AltBaseTree, LcaTable};
use crate::error::Result;
use crate::graph::{AltDist, EdgeId, Graph, Matching, NodeId};
use crate::sim::{Ctx, Message, NodeProgram, Session, Status, Widths};

pub const CONSTF_PHASE: &str = "ConstF";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSets {
    /// Level per edge id; `None` for levelless or absent edges.
    pub level: Vec<Option<u32>>,
}

impl LevelSets {
    /// `F_k`; `F_0` is empty.
    pub fn f_k(&self, k: u32) -> Vec<EdgeId> {
        if k == 0 {
            return Vec::new();
        }
        (0..self.level.len()).filter(|&e| self.level[e] == Some(k)).collect()
    }

    pub fn max_level(&self) -> u32 {
        self.level.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn compute_levels(g: &Graph, m: &Matching, dist: &AltDist) -> LevelSets {
    let mut level = vec![None; g.edge_id_bound()];
    for (e, u, w) in g.edges() {
        let t = usize::from(m.contains(e));
        level[e] = match (dist.get(u, t), dist.get(w, t)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    LevelSets { level }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseCertificate {
    pub tree: BTreeSet<EdgeId>,
    /// `F^c` with the level each edge was added at.
    pub fc: BTreeMap<EdgeId, u32>,
    /// The edge and level each node contributed.
    pub chosen: BTreeMap<NodeId, (EdgeId, u32)>,
}

impl SparseCertificate {
    pub fn graph(&self, g: &Graph) -> Graph {
        g.edge_subgraph(|e| self.tree.contains(&e) || self.fc.contains_key(&e))
    }

    /// Tree edges as `u v` lines, then `level u v` per added edge.
    pub fn dump(&self, g: &Graph) -> String {
        let mut out = String::new();
        for &e in &self.tree {
            let (u, v) = g.endpoints(e).expect("tree edge in g");
            out.push_str(&format!("{u} {v}\n"));
        }
        for (&e, &k) in &self.fc {
            let (u, v) = g.endpoints(e).expect("certificate edge in g");
            out.push_str(&format!("{k} {u} {v}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, Hash)]
enum ConstFMsg {
    /// Largest level present in the sender's subtree.
    Ready(u32),
    /// The sender's subtree minimum for the level implied by the round.
    Min { lca: u32, u: NodeId, w: NodeId },
}

impl Message for ConstFMsg {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(2)
            + match self {
                ConstFMsg::Ready(_) => w.count,
                ConstFMsg::Min { .. } => w.count + 2 * w.id,
            }
    }
}

struct ConstFNode {
    depth: u32,
    parent: Option<EdgeId>,
    /// Child edge → round its `Ready` was sent and its level bound.
    children: BTreeMap<EdgeId, Option<(u64, u32)>>,
    own: BTreeMap<u32, Rec>,
    heard: BTreeMap<u32, Rec>,
    start: Option<(u64, u32)>,
    out: BTreeMap<u32, (NodeId, NodeId)>,
}

/// `(lca, u, w)` with `u < w`.
type Rec = (u32, NodeId, NodeId);

impl NodeProgram for ConstFNode {
    type Msg = ConstFMsg;
    type Output = BTreeMap<u32, (NodeId, NodeId)>;

    fn step(&mut self, ctx: &mut Ctx<'_, ConstFMsg>) -> Status {
        let r = ctx.round();
        for (e, msg) in ctx.inbox() {
            match *msg {
                ConstFMsg::Ready(k) => {
                    self.children.insert(*e, Some((r - 1, k)));
                }
                ConstFMsg::Min { lca, u, w } => {
                    let (sent, _) = self.children[e].expect("Ready precedes records");
                    let k = (r - 1 - sent) as u32;
                    let slot = self.heard.entry(k).or_insert((lca, u, w));
                    *slot = (*slot).min((lca, u, w));
                }
            }
        }
        if self.start.is_none() {
            if self.children.values().any(Option::is_none) {
                return Status::Running;
            }
            let own_max = self.own.keys().next_back().copied().unwrap_or(0);
            let bound = self.children.values().flatten().map(|c| c.1).max().unwrap_or(0).max(own_max);
            self.start = Some((r, bound));
            if let Some(p) = self.parent {
                ctx.send(p, ConstFMsg::Ready(bound));
            }
            return if bound == 0 { Status::Halted } else { Status::Running };
        }
        let (start, bound) = self.start.unwrap();
        let k = (r - start) as u32;
        let best = [self.own.get(&k), self.heard.get(&k)].into_iter().flatten().min().copied();
        if let Some((lca, u, w)) = best {
            if lca < self.depth {
                self.out.insert(k, (u, w));
            }
            if let Some(p) = self.parent {
                ctx.send(p, ConstFMsg::Min { lca, u, w });
            }
        }
        if k >= bound {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn output(self) -> BTreeMap<u32, (NodeId, NodeId)> {
        self.out
    }
}

/// Per node, the outgoing edge of `T_v` chosen at each level that has one.
/// With `only = Some(k)` just level `k` is aggregated.
pub fn constf(
    g: &Graph,
    t: &AltBaseTree,
    lca: &LcaTable,
    levels: &LevelSets,
    only: Option<u32>,
    session: &mut Session,
) -> Result<Vec<BTreeMap<u32, EdgeId>>> {
    let out = session.run(CONSTF_PHASE, g, |view| {
        let v = view.id;
        let mut own: BTreeMap<u32, Rec> = BTreeMap::new();
        for &(e, w) in &view.ports {
            let (Some(k), Some(&x)) = (levels.level[e], lca.lca.get(&e)) else { continue };
            if only.is_some_and(|o| o != k) {
                continue;
            }
            let rec = (x, v.min(w), v.max(w));
            let slot = own.entry(k).or_insert(rec);
            *slot = (*slot).min(rec);
        }
        ConstFNode {
            depth: lca.depth[v].expect("node has a depth"),
            parent: t.parent[v].map(|p| p.1),
            children: t.children[v].iter().map(|c| (c.1, None)).collect(),
            own,
            heard: BTreeMap::new(),
            start: None,
            out: BTreeMap::new(),
        }
    })?;
    Ok(out
        .into_iter()
        .map(|o| {
            o.unwrap_or_default()
                .into_iter()
                .map(|(k, (u, w))| (k, g.find_edge(u, w).expect("reported edge exists")))
                .collect()
        })
        .collect())
}

pub fn build_certificate(
    g: &Graph,
    t: &AltBaseTree,
    lca: &LcaTable,
    levels: &LevelSets,
    session: &mut Session,
) -> Result<SparseCertificate> {
    let outs = constf(g, t, lca, levels, None, session)?;
    let mut fc = BTreeMap::new();
    let mut chosen = BTreeMap::new();
    for v in g.nodes().filter(|&v| v != t.root) {
        if let Some((&k, &e)) = outs[v].iter().next() {
            fc.insert(e, k);
            chosen.insert(v, (e, k));
        }
    }
    Ok(SparseCertificate {
        tree: t.tree_edges().into_iter().collect(),
        fc,
        chosen,
    })
}

/// `G_k = T + F_{≤k}`.
pub fn level_subgraph(g: &Graph, t: &AltBaseTree, levels: &LevelSets, k: u32) -> Graph {
    g.edge_subgraph(|e| t.is_tree_edge(e) || levels.level[e].is_some_and(|x| x <= k))
}

/// Tree edges `ep(v)` that are bridges of `G_k`, by direct subtree scan.
pub fn bridges(g: &Graph, t: &AltBaseTree, levels: &LevelSets, k: u32) -> BTreeSet<EdgeId> {
    let mut out = BTreeSet::new();
    for v in g.nodes().filter(|&v| v != t.root) {
        let inside: BTreeSet<NodeId> = t.subtree(v).into_iter().collect();
        let covered = g.edges().any(|(e, a, b)| {
            !t.is_tree_edge(e)
                && levels.level[e].is_some_and(|x| x <= k)
                && inside.contains(&a) != inside.contains(&b)
        });
        if !covered {
            out.insert(t.parent[v].unwrap().1);
        }
    }
    out
}
