//! Augmenting path construction by backward predecessor discovery.
//!
//! Starting from the far unmatched node `g`, the path is grown one edge per
//! iteration toward `f`. On odd iterations the distances are recomputed on
//! the subgraph left after the partial path's nodes quit, and the current
//! target picks a neighbour over an unmatched edge whose even distance is
//! exactly the remaining length; on even iterations the target hands over to
//! its mate.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{is_augmenting, Graph, Matching, NodeId, Walk};
use crate::mvpart::mv;
use crate::sim::{Ctx, Message, NodeProgram, Session, Status, Widths};

pub const SELECT_PHASE: &str = "CAP-select";

#[derive(Clone, Debug, Hash)]
enum CapMsg {
    /// Sender's even distance, or `None` for infinity.
    Even(Option<u32>),
    Select,
}

impl Message for CapMsg {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(2)
            + match self {
                CapMsg::Even(_) => w.count,
                CapMsg::Select => 0,
            }
    }
}

/// One predecessor step. Odd steps: everyone announces its even distance,
/// then the target selects. Even steps: the target selects its mate.
struct Step {
    odd: bool,
    target: bool,
    even: Option<u32>,
    want: u32,
    mate_port: Option<usize>,
    selected: bool,
}

impl NodeProgram for Step {
    type Msg = CapMsg;
    type Output = bool;

    fn step(&mut self, ctx: &mut Ctx<'_, CapMsg>) -> Status {
        if ctx.inbox().iter().any(|(_, m)| matches!(m, CapMsg::Select)) {
            self.selected = true;
        }
        if !self.odd {
            if ctx.round() == 1 && self.target {
                if let Some(e) = self.mate_port {
                    ctx.send(e, CapMsg::Select);
                }
            }
            return Status::Halted;
        }
        match ctx.round() {
            1 => {
                if self.even.is_some_and(|d| d == self.want) {
                    for (e, _) in ctx.view().ports.clone() {
                        ctx.send(e, CapMsg::Even(self.even));
                    }
                }
                Status::Running
            }
            2 if self.target => {
                let mut best: Option<(NodeId, usize)> = None;
                for (e, m) in ctx.inbox() {
                    if Some(*e) == self.mate_port {
                        continue;
                    }
                    if let CapMsg::Even(Some(d)) = m {
                        let w = ctx.view().neighbor(*e).expect("incident");
                        if *d == self.want && best.is_none_or(|b| w < b.0) {
                            best = Some((w, *e));
                        }
                    }
                }
                if let Some((_, e)) = best {
                    ctx.send(e, CapMsg::Select);
                }
                Status::Halted
            }
            _ => Status::Halted,
        }
    }

    fn output(self) -> bool {
        self.selected
    }
}

/// Shortest augmenting path between the only two unmatched nodes `f` and
/// `gnode` of `g`, provided one of length at most `ell` exists.
pub fn cap(g: &Graph, m: &Matching, f: NodeId, gnode: NodeId, ell: u32, session: &mut Session) -> Result<Walk> {
    let m = m.restricted_to(g);
    let free: Vec<_> = m.unmatched(g).collect();
    if free.len() != 2 || !free.contains(&f) || !free.contains(&gnode) || f == gnode {
        return Err(Error::Contract(format!(
            "cap needs exactly the two unmatched nodes {f} and {gnode}, found {free:?}"
        )));
    }
    let first = mv(g, &m, ell, f, session)?;
    let Some(len) = first.dist.get(gnode, 1) else {
        return Err(Error::NoPath(format!("no augmenting path of length ≤ {ell} between {f} and {gnode}")));
    };

    let mut path = vec![gnode];
    let mut quit: BTreeSet<NodeId> = BTreeSet::new();
    let mut target = gnode;
    for i in 1..=len {
        let alive: BTreeSet<NodeId> = g.nodes().filter(|v| !quit.contains(v)).collect();
        let h = g.induced_subgraph(&alive)?;
        let odd = i % 2 == 1;
        let want = len - i;
        let even: Vec<Option<u32>> = if odd {
            let out = mv(&h, &m, want, f, session)?;
            (0..g.id_bound())
                .map(|v| if v == f { Some(0) } else { out.dist.get(v, 0) })
                .collect()
        } else {
            vec![None; g.id_bound()]
        };
        let chosen = session.run(SELECT_PHASE, &h, |view| Step {
            odd,
            target: view.id == target,
            even: even[view.id],
            want,
            mate_port: m.mate(view.id).and_then(|w| view.port_to(w)),
            selected: false,
        })?;
        let next: Vec<NodeId> = h.nodes().filter(|&v| chosen[v] == Some(true)).collect();
        let [next] = next[..] else {
            return Err(Error::Internal(format!(
                "step {i} from target {target}: {} nodes selected",
                next.len()
            )));
        };
        quit.insert(target);
        path.push(next);
        target = next;
    }
    path.reverse();
    let walk = Walk::from_nodes(g, &path)?;
    if walk.first() != f || !is_augmenting(g, &m, &walk)? || walk.len() as u32 != len {
        return Err(Error::Internal(format!("cap produced an invalid path {:?}", walk.nodes())));
    }
    Ok(walk)
}
