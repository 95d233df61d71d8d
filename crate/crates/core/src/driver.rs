//! The phased maximum-matching driver.
//!
//! Preprocessing computes a maximal matching `M*` and broadcasts
//! `ŝ = 2|M*|`. Phase A then runs the short-path wrapper with growing
//! length bounds on a Hopcroft–Karp schedule, and phase B finishes with the
//! linear wrapper. Every iteration runs for a fixed number of rounds, so the
//! unused part of each budget is charged as padding.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::cap::cap;
use crate::error::{Error, Result};
use crate::graph::{augment_along, EdgeId, Graph, Matching, NodeId, Walk};
use crate::linear::linear_augpath;
use crate::mvpart::{part, Partition};
use crate::sim::{Ctx, Message, NodeProgram, RoundReport, Session, SimConfig, Status, Widths};
use rand::Rng;

pub const MAXIMAL_PHASE: &str = "maximal";
pub const COUNT_PHASE: &str = "s-hat";
pub const ELECT_PHASE: &str = "ELECT";
pub const PAD_PHASE: &str = "pad";

/// Rounds per phase-A iteration are capped at `A_BUDGET_C·ℓ² + A_BUDGET_D`.
pub const A_BUDGET_C: u64 = 8;
pub const A_BUDGET_D: u64 = 16;
/// Rounds per phase-B iteration are capped at `B_BUDGET_C·(ŝ + 1)`.
pub const B_BUDGET_C: u64 = 48;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    #[default]
    Hybrid,
    SquareOnly,
    LinearOnly,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Hybrid, Variant::SquareOnly, Variant::LinearOnly];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Hybrid => "hybrid",
            Variant::SquareOnly => "square-only",
            Variant::LinearOnly => "linear-only",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}; expected hybrid, square-only or linear-only")))
    }
}

/// The iteration plan derived from `ŝ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub s_hat: u32,
    /// Length bound of each phase-A iteration.
    pub phase_a: Vec<u32>,
    /// Upper bound on phase-B iterations.
    pub phase_b: u32,
}

impl Schedule {
    pub fn new(s_hat: u32, variant: Variant) -> Schedule {
        let s = u64::from(s_hat);
        let root = s_hat.isqrt() + u32::from(s_hat.isqrt().pow(2) < s_hat);
        let ell = |i: u32| (2 * s).div_ceil(s - u64::from(i)) as u32;
        match variant {
            Variant::Hybrid => Schedule {
                s_hat,
                phase_a: (1..=s_hat - root).map(ell).collect(),
                phase_b: root,
            },
            Variant::SquareOnly => Schedule {
                s_hat,
                phase_a: (1..=s_hat).map(|i| if i < s_hat { ell(i) } else { 2 * s_hat + 1 }).collect(),
                phase_b: 0,
            },
            // Every productive iteration grows the matching, so one more
            // than the largest possible deficit always ends on an empty one.
            Variant::LinearOnly => Schedule {
                s_hat,
                phase_a: Vec::new(),
                phase_b: s_hat + 1,
            },
        }
    }
}

#[derive(Clone, Debug, Hash)]
enum Mm {
    Propose,
    Accept,
    Matched,
}

impl Message for Mm {
    fn bits(&self, _: &Widths) -> u32 {
        Widths::tag(3)
    }
}

/// Randomized proposal matching in three-round phases: a proposer picks a
/// random live port, an acceptor takes one proposal at random, and both
/// ends then tell their other neighbours to drop them.
struct Proposal {
    live: Vec<EdgeId>,
    proposed: Option<EdgeId>,
    mate: Option<EdgeId>,
    announced: bool,
}

impl NodeProgram for Proposal {
    type Msg = Mm;
    type Output = Option<EdgeId>;

    fn step(&mut self, ctx: &mut Ctx<'_, Mm>) -> Status {
        let inbox: Vec<(EdgeId, Mm)> = ctx.inbox().to_vec();
        for (e, msg) in &inbox {
            if matches!(msg, Mm::Matched) {
                self.live.retain(|x| x != e);
            }
        }
        if self.announced {
            return Status::Halted;
        }
        match (ctx.round() - 1) % 3 {
            0 => {
                self.proposed = None;
                if self.live.is_empty() {
                    return Status::Halted;
                }
                if ctx.rng().gen_bool(0.5) {
                    let e = self.live[ctx.rng().gen_range(0..self.live.len())];
                    self.proposed = Some(e);
                    ctx.send(e, Mm::Propose);
                }
            }
            1 => {
                if self.proposed.is_none() {
                    let offers: Vec<EdgeId> = inbox
                        .iter()
                        .filter(|(_, m)| matches!(m, Mm::Propose))
                        .map(|x| x.0)
                        .collect();
                    if !offers.is_empty() {
                        let e = offers[ctx.rng().gen_range(0..offers.len())];
                        self.mate = Some(e);
                        ctx.send(e, Mm::Accept);
                    }
                }
            }
            _ => {
                if let Some(e) = self.proposed {
                    if inbox.iter().any(|(x, m)| *x == e && matches!(m, Mm::Accept)) {
                        self.mate = Some(e);
                    }
                }
                if let Some(mate) = self.mate {
                    for &e in self.live.iter().filter(|&&e| e != mate) {
                        ctx.send(e, Mm::Matched);
                    }
                    self.announced = true;
                    return Status::Halted;
                }
            }
        }
        Status::Running
    }

    fn output(self) -> Option<EdgeId> {
        self.mate
    }
}

/// A maximal matching of `g` by the randomized proposal algorithm.
pub fn maximal_matching(g: &Graph, session: &mut Session) -> Result<Matching> {
    let out = session.run(MAXIMAL_PHASE, g, |view| Proposal {
        live: view.ports.iter().map(|p| p.0).collect(),
        proposed: None,
        mate: None,
        announced: false,
    })?;
    let edges: BTreeSet<EdgeId> = out.into_iter().flatten().flatten().collect();
    let m = Matching::from_edges(g, edges)
        .map_err(|e| e.in_phase(session.label(MAXIMAL_PHASE)))?;
    if !m.is_maximal(g) {
        return Err(Error::Internal("proposal matching is not maximal".into()).in_phase(session.label(MAXIMAL_PHASE)));
    }
    Ok(m)
}

#[derive(Clone, Debug, Hash)]
enum Flood {
    Explore(NodeId),
    Echo(NodeId, u32),
    Result(u32),
}

impl Message for Flood {
    fn bits(&self, w: &Widths) -> u32 {
        Widths::tag(3)
            + match self {
                Flood::Explore(_) => w.id,
                Flood::Echo(..) => w.id + w.count,
                Flood::Result(_) => w.count,
            }
    }
}

/// Max-id flooding with echo: the surviving wave builds a BFS-like tree
/// rooted at the largest id, echoes carry subtree counts of matched nodes,
/// and the root floods the total.
struct Census {
    me: NodeId,
    ports: Vec<EdgeId>,
    matched: bool,
    leader: NodeId,
    parent: Option<EdgeId>,
    pending: BTreeSet<EdgeId>,
    count: u32,
    echoed: bool,
    result: Option<u32>,
}

impl Census {
    fn adopt(&mut self, leader: NodeId, parent: Option<EdgeId>, ctx: &mut Ctx<'_, Flood>) {
        self.leader = leader;
        self.parent = parent;
        self.count = u32::from(self.matched);
        self.echoed = false;
        self.pending = self.ports.iter().copied().filter(|&e| Some(e) != parent).collect();
        for &e in &self.pending {
            ctx.send(e, Flood::Explore(leader));
        }
    }
}

impl NodeProgram for Census {
    type Msg = Flood;
    type Output = Option<u32>;

    fn step(&mut self, ctx: &mut Ctx<'_, Flood>) -> Status {
        if self.result.is_some() {
            return Status::Halted;
        }
        let inbox: Vec<(EdgeId, Flood)> = ctx.inbox().to_vec();
        if ctx.round() == 1 {
            self.adopt(self.me, None, ctx);
        }
        let best = inbox
            .iter()
            .filter_map(|(e, m)| match m {
                Flood::Explore(l) => Some((*l, std::cmp::Reverse(*e))),
                _ => None,
            })
            .max();
        if let Some((l, std::cmp::Reverse(e))) = best {
            if l > self.leader {
                self.adopt(l, Some(e), ctx);
            }
        }
        for (e, msg) in &inbox {
            match *msg {
                // A neighbour exploring the same wave has its own parent.
                Flood::Explore(l) if l == self.leader => {
                    self.pending.remove(e);
                }
                Flood::Echo(l, c) if l == self.leader && self.pending.remove(e) => self.count += c,
                Flood::Result(s) => {
                    for &p in self.ports.iter().filter(|&p| p != e) {
                        ctx.send(p, Flood::Result(s));
                    }
                    self.result = Some(s);
                    return Status::Halted;
                }
                _ => {}
            }
        }
        if self.pending.is_empty() && !self.echoed {
            self.echoed = true;
            match self.parent {
                Some(p) => ctx.send(p, Flood::Echo(self.leader, self.count)),
                None => {
                    for &p in &self.ports {
                        ctx.send(p, Flood::Result(self.count));
                    }
                    self.result = Some(self.count);
                    return Status::Halted;
                }
            }
        }
        Status::Running
    }

    fn output(self) -> Option<u32> {
        self.result
    }
}

/// Counts the nodes covered by `m` and makes the total known everywhere.
pub fn broadcast_count(g: &Graph, m: &Matching, session: &mut Session) -> Result<u32> {
    let out = session.run(COUNT_PHASE, g, |view| Census {
        me: view.id,
        ports: view.ports.iter().map(|p| p.0).collect(),
        matched: m.is_matched(view.id),
        leader: view.id,
        parent: None,
        pending: BTreeSet::new(),
        count: 0,
        echoed: false,
        result: None,
    })?;
    let values: BTreeSet<u32> = out.into_iter().flatten().map(|r| r.unwrap_or(u32::MAX)).collect();
    match values.into_iter().collect::<Vec<_>>()[..] {
        [s] if s != u32::MAX => Ok(s),
        ref other => Err(Error::Internal(format!("count broadcast disagreed: {other:?}")).in_phase(session.label(COUNT_PHASE))),
    }
}

/// Runs `body` once per part, side by side, each on the part's induced
/// subgraph and its own forked session.
fn per_part(
    g: &Graph,
    m: &Matching,
    parts: &Partition,
    session: &mut Session,
    mut body: impl FnMut(&Graph, &Matching, NodeId, NodeId, &mut Session) -> Result<Walk>,
) -> Result<Vec<Walk>> {
    let mut forks = Vec::with_capacity(parts.len());
    let mut paths = Vec::with_capacity(parts.len());
    for p in &parts.parts {
        let h = g.induced_subgraph(&p.nodes)?;
        let hm = m.restricted_to(&h);
        let mut fork = session.fork();
        paths.push(body(&h, &hm, p.f, p.g, &mut fork)?);
        forks.push(fork);
    }
    session.join(forks);
    Ok(paths)
}

/// Vertex-disjoint augmenting paths; nonempty whenever one of length at
/// most `ell` exists.
pub fn wrapper_a(g: &Graph, m: &Matching, ell: u32, session: &mut Session) -> Result<Vec<Walk>> {
    let parts = part(g, m, ell, session)?;
    parts.validate(g, m, ell)?;
    session.charge(ELECT_PHASE, u64::from(ell));
    per_part(g, m, &parts, session, |h, hm, f, t, s| cap(h, hm, f, t, ell, s))
}

/// Vertex-disjoint augmenting paths; nonempty whenever any exists.
pub fn wrapper_b(g: &Graph, m: &Matching, session: &mut Session) -> Result<Vec<Walk>> {
    // No simple alternating path is longer than 2|M| + 1.
    let ell = 2 * m.len() as u32 + 1;
    let parts = part(g, m, ell, session)?;
    parts.validate(g, m, ell)?;
    per_part(g, m, &parts, session, linear_augpath)
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub variant: Variant,
    pub sim: SimConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            variant: Variant::Hybrid,
            sim: SimConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub matching: Matching,
    pub report: RoundReport,
    pub s_hat: u32,
    pub schedule: Schedule,
    /// Matching size after preprocessing and after phase A.
    pub initial: usize,
    pub after_a: usize,
    /// Phase-B iterations actually run.
    pub b_iterations: u32,
    pub trace: Option<Vec<String>>,
}

/// Maximum matching with the hybrid schedule.
pub fn solve(g: &Graph, seed: u64) -> Result<(Matching, RoundReport)> {
    let cfg = SolveConfig {
        sim: SimConfig { seed, ..SimConfig::default() },
        ..SolveConfig::default()
    };
    let s = solve_with(g, &cfg)?;
    Ok((s.matching, s.report))
}

fn apply(g: &Graph, m: Matching, paths: &[Walk]) -> Result<Matching> {
    paths.iter().try_fold(m, |m, p| augment_along(g, &m, p))
}

/// Runs one iteration under `scope`, then pads it to exactly `budget`.
fn padded(
    session: &mut Session,
    scope: String,
    budget: u64,
    body: impl FnOnce(&mut Session) -> Result<Vec<Walk>>,
) -> Result<Vec<Walk>> {
    let before = session.report.rounds();
    session.scoped(scope.clone(), |s| {
        let paths = body(s).map_err(|e| e.in_phase(scope.clone()))?;
        let used = s.report.rounds() - before;
        if used > budget {
            return Err(Error::BudgetExceeded { phase: scope, used, budget });
        }
        s.charge(PAD_PHASE, budget - used);
        Ok(paths)
    })
}

pub fn solve_with(g: &Graph, cfg: &SolveConfig) -> Result<Solution> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut session = Session::new(g.id_bound(), &cfg.sim)?;
    let (mut m, s_hat) = session.scoped("pre", |s| -> Result<_> {
        let m = maximal_matching(g, s)?;
        let s_hat = broadcast_count(g, &m, s)?;
        Ok((m, s_hat))
    })?;
    let schedule = Schedule::new(s_hat, cfg.variant);
    let initial = m.len();

    for (i, &ell) in schedule.phase_a.iter().enumerate() {
        let budget = A_BUDGET_C * u64::from(ell).pow(2) + A_BUDGET_D;
        let paths = padded(&mut session, format!("A/{:04}", i + 1), budget, |s| wrapper_a(g, &m, ell, s))?;
        m = apply(g, m, &paths)?;
    }
    let after_a = m.len();

    let mut b_iterations = 0;
    for i in 0..schedule.phase_b {
        let budget = B_BUDGET_C * (u64::from(s_hat) + 1);
        let paths = padded(&mut session, format!("B/{:04}", i + 1), budget, |s| wrapper_b(g, &m, s))?;
        b_iterations += 1;
        // An empty answer certifies that no augmenting path is left.
        if paths.is_empty() {
            break;
        }
        m = apply(g, m, &paths)?;
    }

    Ok(Solution {
        matching: m,
        trace: session.trace_lines().map(<[String]>::to_vec),
        report: session.report,
        s_hat,
        schedule,
        initial,
        after_a,
        b_iterations,
    })
}
