//! Synchronous CONGEST round simulator.
//!
//! In every round each running node (or halted node with mail) is stepped in
//! node-id order with the messages sent to it in the previous round, and may
//! put at most one message on each incident edge. A run ends once every node
//! has halted and nothing is in flight; the round in which a node only
//! consumes the last deliveries is not counted.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

/// 64-bit FNV-1a.
#[derive(Clone, Copy, Debug)]
pub struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

pub fn fnv_of(value: &impl Hash) -> u64 {
    let mut h = Fnv::default();
    value.hash(&mut h);
    h.finish()
}

fn mix(x: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Field widths used to size messages for a network of `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Widths {
    pub n: usize,
    /// `⌈log₂ n⌉`, with `n` floored at 4.
    pub log_n: u32,
    /// Bits of a node identifier.
    pub id: u32,
    /// Bits of a count or distance in `0..=n` (infinity included).
    pub count: u32,
    /// Per-edge, per-direction, per-round budget `B`.
    pub bandwidth: u32,
}

impl Widths {
    pub fn new(n: usize, c: u32, override_bits: Option<u32>) -> Result<Widths> {
        if c == 0 {
            return Err(Error::Config("bandwidth constant must be positive".into()));
        }
        let log_n = ceil_log2(n.max(4));
        let bandwidth = override_bits.unwrap_or(c * log_n);
        if bandwidth < ceil_log2(n) + 3 {
            return Err(Error::Config(format!(
                "bandwidth {bandwidth} below ⌈log₂ n⌉ + 3 = {}",
                ceil_log2(n) + 3
            )));
        }
        Ok(Widths {
            n,
            log_n,
            id: log_n,
            count: ceil_log2(n + 1).max(1),
            bandwidth,
        })
    }

    /// Bits needed to tell `variants` message kinds apart.
    pub fn tag(variants: usize) -> u32 {
        ceil_log2(variants)
    }
}

pub trait Message: Clone + Debug + Hash {
    /// Serialized size under `w`.
    fn bits(&self, w: &Widths) -> u32;
}

/// What a node knows at start-up: its id and its incident edges with the
/// neighbour at the other end.
#[derive(Clone, Debug)]
pub struct LocalView {
    pub id: NodeId,
    pub ports: Vec<(EdgeId, NodeId)>,
    pub widths: Widths,
}

impl LocalView {
    pub fn neighbor(&self, e: EdgeId) -> Option<NodeId> {
        self.ports.iter().find(|p| p.0 == e).map(|p| p.1)
    }

    pub fn port_to(&self, w: NodeId) -> Option<EdgeId> {
        self.ports.iter().find(|p| p.1 == w).map(|p| p.0)
    }
}

pub struct Ctx<'a, M> {
    round: u64,
    view: &'a LocalView,
    inbox: &'a [(EdgeId, M)],
    outbox: Vec<(EdgeId, M)>,
    rng: &'a mut ChaCha8Rng,
}

impl<M> Ctx<'_, M> {
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn view(&self) -> &LocalView {
        self.view
    }

    pub fn id(&self) -> NodeId {
        self.view.id
    }

    pub fn inbox(&self) -> &[(EdgeId, M)] {
        self.inbox
    }

    pub fn send(&mut self, e: EdgeId, msg: M) {
        self.outbox.push((e, msg));
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
}

pub trait NodeProgram {
    type Msg: Message;
    type Output;

    fn step(&mut self, ctx: &mut Ctx<'_, Self::Msg>) -> Status;

    fn output(self) -> Self::Output;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseRounds {
    pub simulated: u64,
    pub charged: u64,
}

impl PhaseRounds {
    pub fn total(&self) -> u64 {
        self.simulated + self.charged
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundReport {
    pub phases: BTreeMap<String, PhaseRounds>,
    pub messages: u64,
    pub max_bits: u32,
    pub trace_hash: u64,
}

impl RoundReport {
    pub fn rounds(&self) -> u64 {
        self.phases.values().map(PhaseRounds::total).sum()
    }

    pub fn simulated(&self) -> u64 {
        self.phases.values().map(|p| p.simulated).sum()
    }

    pub fn charged(&self) -> u64 {
        self.phases.values().map(|p| p.charged).sum()
    }

    /// Adds `rounds` of contract cost to `phase` without traffic.
    pub fn charge(&mut self, phase: &str, rounds: u64) {
        if rounds == 0 {
            return;
        }
        self.phases.entry(phase.to_string()).or_default().charged += rounds;
        self.absorb_hash(fnv_of(&("charge", phase, rounds)));
    }

    fn absorb_hash(&mut self, h: u64) {
        self.trace_hash = fnv_of(&(self.trace_hash, h));
    }

    /// Rounds under phases whose label starts with `prefix`.
    pub fn rounds_under(&self, prefix: &str) -> u64 {
        self.phases
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, p)| p.total())
            .sum()
    }

    /// Merges reports of executions that ran side by side: rounds take the
    /// per-phase maximum, traffic adds up.
    pub fn join_parallel(&mut self, others: impl IntoIterator<Item = RoundReport>) {
        let mut merged: BTreeMap<String, PhaseRounds> = BTreeMap::new();
        for other in others {
            for (k, p) in other.phases {
                let e = merged.entry(k).or_default();
                e.simulated = e.simulated.max(p.simulated);
                e.charged = e.charged.max(p.charged);
            }
            self.messages += other.messages;
            self.max_bits = self.max_bits.max(other.max_bits);
            self.absorb_hash(other.trace_hash);
        }
        for (k, p) in merged {
            let e = self.phases.entry(k).or_default();
            e.simulated += p.simulated;
            e.charged += p.charged;
        }
    }

    /// Folds phase labels into the part before the first `/` after `depth`
    /// separators, summing rounds.
    pub fn coarse(&self, depth: usize) -> BTreeMap<String, PhaseRounds> {
        let mut out: BTreeMap<String, PhaseRounds> = BTreeMap::new();
        for (k, p) in &self.phases {
            let key: Vec<_> = k.split('/').take(depth).collect();
            let e = out.entry(key.join("/")).or_default();
            e.simulated += p.simulated;
            e.charged += p.charged;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub bandwidth_c: u32,
    pub bandwidth_bits: Option<u32>,
    /// Defaults to `50 n²`.
    pub max_rounds: Option<u64>,
    pub seed: u64,
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            bandwidth_c: 4,
            bandwidth_bits: None,
            max_rounds: None,
            seed: 0,
            trace: false,
        }
    }
}

/// One network's simulation context: configuration, accumulated report,
/// optional trace, and a scope prefix for phase labels.
#[derive(Debug)]
pub struct Session {
    widths: Widths,
    max_rounds: u64,
    seed: u64,
    runs: u64,
    scope: Vec<String>,
    trace: Option<Vec<String>>,
    pub report: RoundReport,
}

impl Session {
    pub fn new(n: usize, cfg: &SimConfig) -> Result<Session> {
        let widths = Widths::new(n, cfg.bandwidth_c, cfg.bandwidth_bits)?;
        let max_rounds = cfg.max_rounds.unwrap_or(50 * (n as u64) * (n as u64));
        if max_rounds == 0 {
            return Err(Error::Config("max_rounds must be positive".into()));
        }
        Ok(Session {
            widths,
            max_rounds,
            seed: cfg.seed,
            runs: 0,
            scope: Vec::new(),
            trace: cfg.trace.then(Vec::new),
            report: RoundReport::default(),
        })
    }

    /// Session for `g` with default settings and the given seed.
    pub fn for_graph(g: &Graph, seed: u64) -> Session {
        Session::new(g.id_bound(), &SimConfig { seed, ..SimConfig::default() }).expect("default config is valid")
    }

    pub fn widths(&self) -> &Widths {
        &self.widths
    }

    pub fn label(&self, phase: &str) -> String {
        let mut parts = self.scope.clone();
        parts.push(phase.to_string());
        parts.join("/")
    }

    pub fn push_scope(&mut self, s: impl Into<String>) {
        self.scope.push(s.into());
    }

    pub fn pop_scope(&mut self) {
        self.scope.pop();
    }

    /// Runs `body` with `s` appended to the phase scope.
    pub fn scoped<T>(&mut self, s: impl Into<String>, body: impl FnOnce(&mut Session) -> T) -> T {
        self.push_scope(s);
        let out = body(self);
        self.pop_scope();
        out
    }

    pub fn charge(&mut self, phase: &str, rounds: u64) {
        let label = self.label(phase);
        self.report.charge(&label, rounds);
    }

    pub fn trace_lines(&self) -> Option<&[String]> {
        self.trace.as_deref()
    }

    /// A session for one of several executions that proceed in parallel;
    /// merge back with [`Session::join`].
    pub fn fork(&mut self) -> Session {
        self.runs += 1;
        Session {
            widths: self.widths,
            max_rounds: self.max_rounds,
            seed: mix(self.seed ^ mix(self.runs)),
            runs: 0,
            scope: self.scope.clone(),
            trace: self.trace.as_ref().map(|_| Vec::new()),
            report: RoundReport::default(),
        }
    }

    pub fn join(&mut self, forks: Vec<Session>) {
        let mut reports = Vec::with_capacity(forks.len());
        for f in forks {
            if let (Some(mine), Some(theirs)) = (self.trace.as_mut(), f.trace) {
                mine.extend(theirs);
            }
            reports.push(f.report);
        }
        self.report.join_parallel(reports);
    }

    /// Executes one program per present node of `g` until quiescence; the
    /// simulated rounds are booked under `phase`. Outputs are indexed by
    /// node id.
    pub fn run<P, F>(&mut self, phase: &str, g: &Graph, mut make: F) -> Result<Vec<Option<P::Output>>>
    where
        P: NodeProgram,
        F: FnMut(&LocalView) -> P,
    {
        self.runs += 1;
        let label = self.label(phase);
        let run_seed = mix(self.seed ^ mix(self.runs));
        let nodes: Vec<NodeId> = g.nodes().collect();
        let mut views = Vec::with_capacity(nodes.len());
        let mut programs = Vec::with_capacity(nodes.len());
        let mut rngs = Vec::with_capacity(nodes.len());
        let mut index = vec![usize::MAX; g.id_bound()];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = i;
            let view = LocalView {
                id: v,
                ports: g.neighbors(v).collect(),
                widths: self.widths,
            };
            programs.push(make(&view));
            views.push(view);
            rngs.push(ChaCha8Rng::seed_from_u64(mix(run_seed ^ mix(v as u64))));
        }
        if let Some(t) = self.trace.as_mut() {
            t.push(format!("# run {label}"));
        }

        let mut inbox: Vec<Vec<(EdgeId, P::Msg)>> = vec![Vec::new(); nodes.len()];
        let mut halted = vec![false; nodes.len()];
        let mut hash = Fnv::default();
        label.hash(&mut hash);
        let mut round = 1u64;
        loop {
            if round > self.max_rounds {
                return Err(Error::NonTermination {
                    max_rounds: self.max_rounds,
                }
                .in_phase(label));
            }
            let mut outgoing: Vec<(usize, EdgeId, P::Msg)> = Vec::new();
            for i in 0..nodes.len() {
                if halted[i] && inbox[i].is_empty() {
                    continue;
                }
                let mut ctx = Ctx {
                    round,
                    view: &views[i],
                    inbox: &inbox[i],
                    outbox: Vec::new(),
                    rng: &mut rngs[i],
                };
                halted[i] = programs[i].step(&mut ctx) == Status::Halted;
                let sent = ctx.outbox;
                let mut used: Vec<EdgeId> = Vec::with_capacity(sent.len());
                for (e, msg) in sent {
                    let node = nodes[i];
                    if views[i].neighbor(e).is_none() {
                        return Err(Error::NotIncident { node, edge: e, round }.in_phase(label));
                    }
                    if used.contains(&e) {
                        return Err(Error::DuplicateSend { node, edge: e, round }.in_phase(label));
                    }
                    used.push(e);
                    let bits = msg.bits(&self.widths);
                    if bits > self.widths.bandwidth {
                        return Err(Error::BandwidthViolation {
                            node,
                            edge: e,
                            round,
                            bits,
                            limit: self.widths.bandwidth,
                        }
                        .in_phase(label));
                    }
                    let payload = fnv_of(&msg);
                    (round, node, e, bits, payload).hash(&mut hash);
                    if let Some(t) = self.trace.as_mut() {
                        t.push(format!("{round} {node} {e} {bits} {payload:016x}"));
                    }
                    self.report.messages += 1;
                    self.report.max_bits = self.report.max_bits.max(bits);
                    outgoing.push((i, e, msg));
                }
            }
            if outgoing.is_empty() && halted.iter().all(|&h| h) {
                break;
            }
            inbox.iter_mut().for_each(Vec::clear);
            for (i, e, msg) in outgoing {
                let w = views[i].neighbor(e).expect("checked above");
                inbox[index[w]].push((e, msg));
            }
            round += 1;
        }
        let rounds = round - 1;
        self.report.phases.entry(label).or_default().simulated += rounds;
        self.report.absorb_hash(hash.finish());

        let mut out: Vec<Option<P::Output>> = (0..g.id_bound()).map(|_| None).collect();
        for (i, p) in programs.into_iter().enumerate() {
            out[nodes[i]] = Some(p.output());
        }
        Ok(out)
    }
}
