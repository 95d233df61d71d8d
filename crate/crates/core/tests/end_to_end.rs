use std::collections::BTreeSet;

use congest_matching::driver::{solve_with, wrapper_a, wrapper_b, SolveConfig, Variant};
use congest_matching::generate::{blossom_chain, long_path};
use congest_matching::oracle::max_matching;
use congest_matching::sim::{Session, SimConfig};
use congest_matching::{augment_along, fixtures, is_augmenting, Matching};

#[test]
fn blossom_chain_paths_come_out_together() {
    let inst = blossom_chain(3).unwrap();
    let (g, m) = (&inst.graph, inst.matching.as_ref().unwrap());
    let mut s = Session::for_graph(g, 0);
    let paths = wrapper_a(g, m, 5, &mut s).unwrap();
    assert_eq!(paths.len(), 3);
    let mut seen = BTreeSet::new();
    for p in &paths {
        assert!(is_augmenting(g, m, p).unwrap());
        assert!(p.nodes().iter().all(|&v| seen.insert(v)));
    }
}

#[test]
fn wrapper_b_rounds_grow_linearly_on_long_paths() {
    let mut per_k = Vec::new();
    for k in [8, 16, 32] {
        let inst = long_path(k).unwrap();
        let (g, m) = (&inst.graph, inst.matching.as_ref().unwrap());
        let mut s = Session::for_graph(g, 0);
        let paths = wrapper_b(g, m, &mut s).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 2 * k + 1);
        per_k.push(s.report.rounds() as f64 / k as f64);
    }
    // Rounds per unit of k stay within a constant band.
    let (lo, hi) = per_k.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 1.5, "{per_k:?}");
}

#[test]
fn wrapper_b_on_maximum_matching_is_empty() {
    for fx in fixtures::all() {
        let m = max_matching(&fx.graph);
        let mut s = Session::for_graph(&fx.graph, 0);
        assert!(wrapper_b(&fx.graph, &m, &mut s).unwrap().is_empty(), "{}", fx.name);
    }
}

#[test]
fn every_variant_is_exact_on_fixtures_and_families() {
    let mut graphs: Vec<_> = fixtures::all().into_iter().map(|f| f.graph).collect();
    graphs.extend((1..6).map(|k| long_path(k).unwrap().graph));
    graphs.extend((1..4).map(|k| blossom_chain(k).unwrap().graph));
    for g in &graphs {
        let want = max_matching(g).len();
        for v in Variant::ALL {
            let cfg = SolveConfig {
                variant: v,
                sim: SimConfig { seed: 5, ..SimConfig::default() },
            };
            let sol = solve_with(g, &cfg).unwrap();
            assert_eq!(sol.matching.len(), want, "{v}");
            assert!(sol.report.rounds_under("pre/") > 0);
        }
    }
}

#[test]
fn p4_needs_only_phase_a() {
    let g = fixtures::p4().graph;
    let sol = solve_with(&g, &SolveConfig::default()).unwrap();
    assert_eq!(sol.matching.len(), 2);
    assert_eq!(sol.after_a, 2);
}

#[test]
fn augmenting_grows_the_matching_by_one() {
    let inst = long_path(4).unwrap();
    let (g, m) = (&inst.graph, inst.matching.as_ref().unwrap());
    let mut s = Session::for_graph(g, 0);
    let p = wrapper_a(g, m, 9, &mut s).unwrap().remove(0);
    let bigger: Matching = augment_along(g, m, &p).unwrap();
    assert_eq!(bigger.len(), m.len() + 1);
}
