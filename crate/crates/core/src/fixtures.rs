//! Small named instances used throughout the tests.

use crate::graph::{Graph, Matching, NodeId};

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub graph: Graph,
    pub matching: Option<Matching>,
    /// Display label per node id.
    pub labels: Vec<&'static str>,
}

impl Fixture {
    fn new(
        name: &'static str,
        labels: &[&'static str],
        edges: &[(NodeId, NodeId)],
        matched: &[(NodeId, NodeId)],
    ) -> Fixture {
        let graph = Graph::new(labels.len(), edges).expect("fixture graph");
        let matching = Some(Matching::from_pairs(&graph, matched).expect("fixture matching"));
        Fixture {
            name,
            graph,
            matching,
            labels: labels.to_vec(),
        }
    }

    pub fn matching_or_empty(&self) -> Matching {
        self.matching
            .clone()
            .unwrap_or_else(|| Matching::empty(&self.graph))
    }

    pub fn node(&self, label: &str) -> NodeId {
        self.labels
            .iter()
            .position(|&l| l == label)
            .unwrap_or_else(|| panic!("fixture {} has no node {label}", self.name))
    }
}

/// `f–g`, empty matching.
pub fn p2() -> Fixture {
    Fixture::new("P2", &["f", "g"], &[(0, 1)], &[])
}

/// `f–a–b–g` with `M = {ab}`.
pub fn p4() -> Fixture {
    Fixture::new("P4", &["f", "a", "b", "g"], &[(0, 1), (1, 2), (2, 3)], &[(1, 2)])
}

/// `fa, ab, bc, cd, da` with `M = {ab, cd}`: closed alternating walks reach
/// `d` with odd length, simple paths do not.
pub fn walktrap() -> Fixture {
    Fixture::new(
        "WALKTRAP",
        &["f", "a", "b", "c", "d"],
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 1)],
        &[(1, 2), (3, 4)],
    )
}

/// `fa, ab, bc, cd, bd, cg` with `M = {ab, cd}`.
pub fn blossom6() -> Fixture {
    Fixture::new(
        "BLOSSOM6",
        &["f", "a", "b", "c", "d", "g"],
        &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 4), (3, 5)],
        &[(1, 2), (3, 4)],
    )
}

pub fn c5() -> Fixture {
    Fixture::new(
        "C5",
        &["v0", "v1", "v2", "v3", "v4"],
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)],
        &[],
    )
}

pub fn c6() -> Fixture {
    Fixture::new(
        "C6",
        &["v0", "v1", "v2", "v3", "v4", "v5"],
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)],
        &[],
    )
}

/// Two copies of P4 whose inner matched nodes are joined through a matched
/// pair `x–y`: `b–x, x–y, y–a'`.
pub fn twin_p4() -> Fixture {
    Fixture::new(
        "TWIN_P4",
        &["f", "a", "b", "g", "f'", "a'", "b'", "g'", "x", "y"],
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (4, 5),
            (5, 6),
            (6, 7),
            (2, 8),
            (8, 9),
            (9, 5),
        ],
        &[(1, 2), (5, 6), (8, 9)],
    )
}

/// Star `K_{1,5}` centred at node 0.
pub fn star5() -> Fixture {
    Fixture::new(
        "STAR5",
        &["c", "l1", "l2", "l3", "l4", "l5"],
        &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)],
        &[],
    )
}

pub fn all() -> Vec<Fixture> {
    vec![p2(), p4(), walktrap(), blossom6(), c5(), c6(), twin_p4(), star5()]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name.eq_ignore_ascii_case(name))
}
