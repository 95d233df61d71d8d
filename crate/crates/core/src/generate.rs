//! Deterministic instance generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::graph::{Graph, Matching, NodeId, Walk};
use crate::oracle;

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub graph: Graph,
    pub matching: Option<Matching>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Gnp { n: usize, p: f64 },
    LongPath { k: usize },
    Cycle { n: usize },
    BlossomChain { k: usize },
    Fixture { name: String },
}

impl Kind {
    pub fn parse(kind: &str, n: Option<usize>, p: Option<f64>, k: Option<usize>, name: Option<&str>) -> Result<Kind> {
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| Error::Config(format!("`{kind}` needs --{flag}")))
        };
        Ok(match kind {
            "gnp" => Kind::Gnp {
                n: need(n, "n")?,
                p: p.ok_or_else(|| Error::Config("`gnp` needs --p".into()))?,
            },
            "long-path" => Kind::LongPath { k: need(k, "k")? },
            "cycle" => Kind::Cycle { n: need(n, "n")? },
            "blossom-chain" => Kind::BlossomChain { k: need(k, "k")? },
            "fixture" => Kind::Fixture {
                name: name
                    .ok_or_else(|| Error::Config("`fixture` needs a fixture name".into()))?
                    .to_string(),
            },
            other => return Err(Error::Config(format!("unknown generator `{other}`"))),
        })
    }
}

pub fn generate(kind: &Kind, seed: u64) -> Result<Instance> {
    match kind {
        Kind::Gnp { n, p } => gnp(*n, *p, seed),
        Kind::LongPath { k } => long_path(*k),
        Kind::Cycle { n } => cycle(*n),
        Kind::BlossomChain { k } => blossom_chain(*k),
        Kind::Fixture { name } => {
            let fx = fixtures::by_name(name)
                .ok_or_else(|| Error::Config(format!("unknown fixture `{name}`")))?;
            Ok(Instance {
                name: fx.name.to_string(),
                graph: fx.graph,
                matching: fx.matching,
            })
        }
    }
}

/// `G(n, p)`, made connected by joining each extra component to a random
/// node of the components before it.
pub fn gnp(n: usize, p: f64, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Config(format!("gnp needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("gnp needs p in [0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        let mut x = x;
        while c[x] != r {
            let next = c[x];
            c[x] = r;
            x = next;
        }
        r
    }
    for &(u, v) in &edges {
        let (a, b) = (find(&mut comp, u), find(&mut comp, v));
        comp[a.max(b)] = a.min(b);
    }
    for v in 1..n {
        let (a, b) = (find(&mut comp, 0), find(&mut comp, v));
        if a != b {
            // `v` is the smallest node of a new component; attach it behind.
            let target = loop {
                let t = rng.gen_range(0..v);
                if find(&mut comp, t) == a {
                    break t;
                }
            };
            edges.push((target, v));
            comp[a.max(b)] = a.min(b);
        }
    }
    Ok(Instance {
        name: format!("gnp(n={n},p={p},seed={seed})"),
        graph: Graph::new(n, &edges)?,
        matching: None,
    })
}

/// `P_{2k+2}` with `M = {(1,2), (3,4), ..., (2k-1,2k)}`.
pub fn long_path(k: usize) -> Result<Instance> {
    let n = 2 * k + 2;
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let graph = Graph::new(n, &edges)?;
    let pairs: Vec<_> = (0..k).map(|i| (2 * i + 1, 2 * i + 2)).collect();
    let matching = Matching::from_pairs(&graph, &pairs)?;
    Ok(Instance {
        name: format!("long-path(k={k})"),
        graph,
        matching: Some(matching),
    })
}

pub fn cycle(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Config(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Ok(Instance {
        name: format!("cycle(n={n})"),
        graph: Graph::new(n, &edges)?,
        matching: None,
    })
}

/// `k` BLOSSOM6 gadgets `f a b c d g`, each followed by a matched pair
/// `x–y` with edges `c–x` and `y–a` of the next gadget. Node `8i + j` is
/// slot `j` of gadget `i`. The matching is `{ab, cd, xy}` per gadget.
pub fn blossom_chain(k: usize) -> Result<Instance> {
    if k == 0 {
        return Err(Error::Config("blossom-chain needs k >= 1".into()));
    }
    let mut edges = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..k {
        let b = 8 * i;
        let [f, a, bb, c, d, g, x, y] = [b, b + 1, b + 2, b + 3, b + 4, b + 5, b + 6, b + 7];
        edges.extend([(f, a), (a, bb), (bb, c), (c, d), (bb, d), (c, g), (c, x), (x, y)]);
        if i + 1 < k {
            edges.push((y, 8 * (i + 1) + 1));
        }
        pairs.extend([(a, bb), (c, d), (x, y)]);
    }
    let graph = Graph::new(8 * k, &edges)?;
    let matching = Matching::from_pairs(&graph, &pairs)?;
    Ok(Instance {
        name: format!("blossom-chain(k={k})"),
        graph,
        matching: Some(matching),
    })
}

/// Random maximal matching built by scanning edges in shuffled order.
pub fn random_maximal_matching(g: &Graph, rng: &mut impl Rng) -> Matching {
    let mut ids: Vec<_> = g.edges().map(|(e, _, _)| e).collect();
    ids.shuffle(rng);
    let mut m = Matching::empty(g);
    for e in ids {
        let _ = m.insert(g, e);
    }
    m
}

/// Random matching: a random maximal matching with each edge kept with
/// probability `keep`.
pub fn random_matching(g: &Graph, keep: f64, rng: &mut impl Rng) -> Matching {
    let full = random_maximal_matching(g, rng);
    let kept: Vec<_> = full.edges().filter(|_| rng.gen_bool(keep)).collect();
    Matching::from_edges(g, kept).expect("subset of a matching")
}

/// A random connected graph with a matching that leaves exactly two nodes
/// unmatched and has an augmenting path between them. Returns the instance
/// and the two unmatched nodes in increasing order.
pub fn two_unmatched(n: usize, p: f64, seed: u64) -> Result<(Instance, NodeId, NodeId)> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Config(format!("two_unmatched needs even n >= 2, got {n}")));
    }
    for attempt in 0u64.. {
        let inst = gnp(n, p, seed.wrapping_mul(1_000_003).wrapping_add(attempt))?;
        let g = &inst.graph;
        let perfect = oracle::max_matching(g);
        if 2 * perfect.len() != n {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ attempt.rotate_left(17));
        // Random alternating path that starts and ends with a perfect-matching
        // edge; flipping it leaves its endpoints exposed.
        let start = rng.gen_range(0..n);
        let mut path = vec![start, perfect.mate(start).unwrap()];
        let mut used: BTreeSet<NodeId> = path.iter().copied().collect();
        let want = rng.gen_range(0..n / 2);
        while path.len() / 2 <= want {
            let tail = *path.last().unwrap();
            let options: Vec<_> = g
                .neighbors(tail)
                .map(|(_, w)| w)
                .filter(|&w| !used.contains(&w) && !used.contains(&perfect.mate(w).unwrap()))
                .collect();
            let Some(&w) = options.choose(&mut rng) else {
                break;
            };
            let w2 = perfect.mate(w).unwrap();
            path.extend([w, w2]);
            used.extend([w, w2]);
        }
        let walk = Walk::from_nodes(g, &path)?;
        let mut m = perfect.clone();
        for &e in walk.edges() {
            if perfect.contains(e) {
                m.remove(g, e)?;
            }
        }
        for &e in walk.edges() {
            if !perfect.contains(e) {
                m.insert(g, e)?;
            }
        }
        let (f, t) = (path[0].min(*path.last().unwrap()), path[0].max(*path.last().unwrap()));
        let inst = Instance {
            name: format!("two-unmatched(n={n},p={p},seed={seed})"),
            matching: Some(m),
            ..inst
        };
        return Ok((inst, f, t));
    }
    unreachable!()
}
