//! Augmenting path in a linear number of rounds through a sparse
//! certificate: distances, alternating base tree, LCA depths and the
//! certificate `H = T + F^c` are built in the network, `H` is collected at
//! `f` over the tree, `f` solves locally, and the path is sent back down.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::abt::{build_abt, lca_preprocess, AltBaseTree, LcaTable};
use crate::certificate::{build_certificate, compute_levels, LevelSets, SparseCertificate};
use crate::error::{Error, Result};
use crate::graph::{is_augmenting, AltDist, EdgeId, Graph, Matching, NodeId, Walk};
use crate::mvpart::mv;
use crate::oracle::find_augmenting_path;
use crate::sim::{Ctx, Message, NodeProgram, Session, Status, Widths};

pub const UPCAST_PHASE: &str = "upcast";
pub const DOWNCAST_PHASE: &str = "downcast";

/// Everything built on the way to the certificate.
#[derive(Clone, Debug)]
pub struct Certified {
    /// Subgraph induced by the nodes reachable from `f`.
    pub reach: Graph,
    pub dist: AltDist,
    pub tree: AltBaseTree,
    pub lca: LcaTable,
    pub levels: LevelSets,
    pub cert: SparseCertificate,
}

/// Builds the sparse certificate of `(g, m)` for source `f`.
pub fn certify(g: &Graph, m: &Matching, f: NodeId, session: &mut Session) -> Result<Certified> {
    let m = m.restricted_to(g);
    let out = mv(g, &m, g.node_count() as u32, f, session)?;
    let keep: BTreeSet<NodeId> = g.nodes().filter(|&v| v == f || out.dist.is_reachable(v)).collect();
    let reach = g.induced_subgraph(&keep)?;
    let rm = m.restricted_to(&reach);
    let tree = build_abt(&reach, &rm, f, &out.dist, session)?;
    let lca = lca_preprocess(&tree, &reach, session)?;
    let levels = compute_levels(&reach, &rm, &out.dist);
    let cert = build_certificate(&reach, &tree, &lca, &levels, session)?;
    Ok(Certified {
        reach,
        dist: out.dist,
        tree,
        lca,
        levels,
        cert,
    })
}

#[derive(Clone, Debug, Hash)]
enum Up {
    Edge { u: NodeId, w: NodeId, matched: bool },
    Done,
}

impl Message for Up {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(2)
            + match self {
                Up::Edge { .. } => 2 * w.id + 1,
                Up::Done => 0,
            }
    }
}

struct Collect {
    parent: Option<EdgeId>,
    waiting: usize,
    queue: VecDeque<(NodeId, NodeId, bool)>,
    got: Vec<(NodeId, NodeId, bool)>,
}

impl NodeProgram for Collect {
    type Msg = Up;
    type Output = Vec<(NodeId, NodeId, bool)>;

    fn step(&mut self, ctx: &mut Ctx<'_, Up>) -> Status {
        for (_, msg) in ctx.inbox() {
            match *msg {
                Up::Edge { u, w, matched } => match self.parent {
                    Some(_) => self.queue.push_back((u, w, matched)),
                    None => self.got.push((u, w, matched)),
                },
                Up::Done => self.waiting -= 1,
            }
        }
        let Some(p) = self.parent else {
            return if self.waiting == 0 { Status::Halted } else { Status::Running };
        };
        if let Some((u, w, matched)) = self.queue.pop_front() {
            ctx.send(p, Up::Edge { u, w, matched });
            Status::Running
        } else if self.waiting == 0 {
            ctx.send(p, Up::Done);
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn output(self) -> Vec<(NodeId, NodeId, bool)> {
        self.got
    }
}

#[derive(Clone, Debug, Hash)]
enum Down {
    Edge { u: NodeId, w: NodeId },
    Done,
}

impl Message for Down {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(2)
            + match self {
                Down::Edge { .. } => 2 * w.id,
                Down::Done => 0,
            }
    }
}

struct Spread {
    children: Vec<EdgeId>,
    queue: VecDeque<Option<(NodeId, NodeId)>>,
    mine: Vec<(NodeId, NodeId)>,
}

impl NodeProgram for Spread {
    type Msg = Down;
    type Output = Vec<(NodeId, NodeId)>;

    fn step(&mut self, ctx: &mut Ctx<'_, Down>) -> Status {
        let me = ctx.id();
        for (_, msg) in ctx.inbox() {
            self.queue.push_back(match *msg {
                Down::Edge { u, w } => Some((u, w)),
                Down::Done => None,
            });
        }
        let Some(front) = self.queue.pop_front() else {
            return Status::Running;
        };
        for &c in &self.children {
            ctx.send(c, front.map_or(Down::Done, |(u, w)| Down::Edge { u, w }));
        }
        match front {
            Some((u, w)) => {
                if u == me || w == me {
                    self.mine.push((u, w));
                }
                Status::Running
            }
            None => Status::Halted,
        }
    }

    fn output(self) -> Vec<(NodeId, NodeId)> {
        self.mine
    }
}

/// An augmenting path from `f` in `g`, where `f` and `gnode` are the only
/// unmatched nodes.
pub fn linear_augpath(g: &Graph, m: &Matching, f: NodeId, gnode: NodeId, session: &mut Session) -> Result<Walk> {
    let m = m.restricted_to(g);
    let free: Vec<_> = m.unmatched(g).collect();
    if free.len() != 2 || !free.contains(&f) || !free.contains(&gnode) || f == gnode {
        return Err(Error::Contract(format!(
            "linear_augpath needs exactly the two unmatched nodes {f} and {gnode}, found {free:?}"
        )));
    }
    let c = certify(g, &m, f, session)?;
    if !c.reach.contains_node(gnode) {
        return Err(Error::NoPath(format!("{gnode} is unreachable from {f}")));
    }
    let rm = m.restricted_to(&c.reach);

    let key = |e: EdgeId| (c.levels.level[e].unwrap_or(u32::MAX), e);
    let collected = session.run(UPCAST_PHASE, &c.reach, |view| {
        let v = view.id;
        let mut own: Vec<(u32, EdgeId, (NodeId, NodeId, bool))> = Vec::new();
        if let Some((p, e)) = c.tree.parent[v] {
            own.push((key(e).0, e, (v, p, rm.contains(e))));
        }
        if let Some(&(e, k)) = c.cert.chosen.get(&v) {
            let (a, b) = c.reach.endpoints(e).expect("certificate edge");
            // Matched edges sit on odd levels, unmatched on even.
            own.push((k, e, (a, b, k % 2 == 1)));
        }
        own.sort_unstable_by_key(|r| (r.0, r.1));
        Collect {
            parent: c.tree.parent[v].map(|p| p.1),
            waiting: c.tree.children[v].len(),
            queue: own.into_iter().map(|r| r.2).collect(),
            got: Vec::new(),
        }
    })?;
    let records = collected[f].clone().expect("root ran");
    if records.len() > 2 * (c.reach.node_count() - 1) {
        return Err(Error::Internal(format!("root collected {} records", records.len())));
    }

    let solved = solve_at_root(f, &records)?;
    if solved.last() != Some(&gnode) {
        return Err(Error::Internal(format!(
            "path found at the root ends at {:?}, not at {gnode}",
            solved.last()
        )));
    }

    let pairs: Vec<(NodeId, NodeId)> = solved.windows(2).map(|w| (w[0], w[1])).collect();
    let marks = session.run(DOWNCAST_PHASE, &c.reach, |view| {
        let v = view.id;
        let mut queue = VecDeque::new();
        if v == f {
            queue.extend(pairs.iter().map(|&p| Some(p)));
            queue.push_back(None);
        }
        Spread {
            children: c.tree.children[v].iter().map(|x| x.1).collect(),
            queue,
            mine: Vec::new(),
        }
    })?;
    let labelled: BTreeSet<EdgeId> = c
        .reach
        .nodes()
        .flat_map(|v| marks[v].clone().unwrap_or_default())
        .map(|(a, b)| g.find_edge(a, b).expect("path edge exists"))
        .collect();
    let walk = Walk::from_nodes(g, &solved)?;
    if labelled != walk.edges().iter().copied().collect() {
        return Err(Error::Internal("downcast labels disagree with the path".into()));
    }
    if !is_augmenting(g, &m, &walk)? {
        return Err(Error::Internal(format!("linear path {:?} is not augmenting", walk.nodes())));
    }
    Ok(walk)
}

/// Rebuilds `H` from the collected records and searches it from `f`.
fn solve_at_root(f: NodeId, records: &[(NodeId, NodeId, bool)]) -> Result<Vec<NodeId>> {
    let mut ids: BTreeMap<NodeId, usize> = BTreeMap::from([(f, 0)]);
    for &(u, w, _) in records {
        for x in [u, w] {
            let next = ids.len();
            ids.entry(x).or_insert(next);
        }
    }
    let back: Vec<NodeId> = {
        let mut b = vec![0; ids.len()];
        for (&x, &i) in &ids {
            b[i] = x;
        }
        b
    };
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    let mut matched = Vec::new();
    for &(u, w, is_m) in records {
        let (a, b) = (ids[&u], ids[&w]);
        if seen.insert((a.min(b), a.max(b))) {
            edges.push((a, b));
            if is_m {
                matched.push((a, b));
            }
        }
    }
    let h = Graph::new_unchecked_connectivity(ids.len(), &edges)?;
    let hm = Matching::from_pairs(&h, &matched)?;
    let path = find_augmenting_path(&h, &hm, 0)?
        .ok_or_else(|| Error::Internal("the certificate holds no augmenting path from the root".into()))?;
    Ok(path.nodes().iter().map(|&i| back[i]).collect())
}
