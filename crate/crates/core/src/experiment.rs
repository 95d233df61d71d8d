//! Experiment harness: run records, spec files and log-log fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::driver::{solve_with, SolveConfig, Variant};
use crate::error::{Error, Result};
use crate::generate::{generate, Instance, Kind};
use crate::oracle::max_matching;
use crate::sim::SimConfig;

/// Instances above this many nodes are not checked against the oracle.
pub const DEFAULT_ORACLE_LIMIT: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub instance: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    /// Oracle size; `None` when the oracle was skipped.
    pub s_max: Option<usize>,
    pub oracle: String,
    pub matching: usize,
    pub s_hat: u32,
    pub after_a: usize,
    pub rounds: u64,
    pub rounds_sim: u64,
    pub rounds_charged: u64,
    pub messages: u64,
    pub max_bits: u32,
    pub bandwidth: u32,
    pub trace_hash: String,
    pub variant: String,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub variant: Variant,
    pub sim: SimConfig,
    pub oracle_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            variant: Variant::Hybrid,
            sim: SimConfig::default(),
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

fn family_of(name: &str) -> String {
    name.split('(').next().unwrap_or(name).to_string()
}

/// Solves one instance and describes the run.
pub fn run_instance(inst: &Instance, opts: &RunOptions) -> Result<(Record, Option<Vec<String>>)> {
    let cfg = SolveConfig {
        variant: opts.variant,
        sim: opts.sim.clone(),
    };
    let sol = solve_with(&inst.graph, &cfg).map_err(|e| e.in_phase(inst.name.clone()))?;
    let n = inst.graph.node_count();
    let s_max = (n <= opts.oracle_limit).then(|| max_matching(&inst.graph).len());
    let bandwidth = crate::sim::Widths::new(inst.graph.id_bound(), opts.sim.bandwidth_c, opts.sim.bandwidth_bits)?.bandwidth;
    let rec = Record {
        instance: inst.name.clone(),
        family: family_of(&inst.name),
        n,
        m: inst.graph.edge_count(),
        s_max,
        oracle: match s_max {
            None => "oracle-skipped".into(),
            Some(s) if s == sol.matching.len() => "match".into(),
            Some(_) => "mismatch".into(),
        },
        matching: sol.matching.len(),
        s_hat: sol.s_hat,
        after_a: sol.after_a,
        rounds: sol.report.rounds(),
        rounds_sim: sol.report.simulated(),
        rounds_charged: sol.report.charged(),
        messages: sol.report.messages,
        max_bits: sol.report.max_bits,
        bandwidth,
        trace_hash: format!("{:016x}", sol.report.trace_hash),
        variant: opts.variant.name().into(),
        seed: opts.sim.seed,
    };
    Ok((rec, sol.trace))
}

/// Least-squares slope of `ln y` against `ln x`; needs two distinct `x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub family: String,
    pub variant: String,
    pub points: usize,
    /// Exponent of rounds against `s_max`.
    pub slope: Option<f64>,
}

/// Rounds-vs-`s_max` exponents per (family, variant).
pub fn fits(records: &[Record]) -> Vec<Fit> {
    let mut groups: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if let Some(s) = r.s_max {
            groups
                .entry((r.family.clone(), r.variant.clone()))
                .or_default()
                .push((s as f64, r.rounds as f64));
        }
    }
    groups
        .into_iter()
        .map(|((family, variant), pts)| Fit {
            family,
            variant,
            points: pts.len(),
            slope: loglog_slope(&pts),
        })
        .collect()
}

/// One generator family in a spec file; list-valued sizes expand to one
/// instance each.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: String,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    pub p: Option<f64>,
    pub name: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_c")]
    pub bandwidth_c: u32,
    pub max_rounds: Option<u64>,
    #[serde(default = "default_oracle_limit")]
    pub oracle_limit: usize,
    #[serde(default, rename = "family")]
    pub families: Vec<FamilySpec>,
}

fn default_variants() -> Vec<String> {
    vec![Variant::Hybrid.name().into()]
}

fn default_c() -> u32 {
    SimConfig::default().bandwidth_c
}

fn default_oracle_limit() -> usize {
    DEFAULT_ORACLE_LIMIT
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<ExperimentSpec> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("experiment spec: {e}")))
    }

    pub fn kinds(&self) -> Result<Vec<Kind>> {
        let mut out = Vec::new();
        for f in &self.families {
            let name = f.name.as_deref();
            match (f.n.is_empty(), f.k.is_empty()) {
                (true, true) => out.push(Kind::parse(&f.kind, None, f.p, None, name)?),
                (false, _) => {
                    for &n in &f.n {
                        out.push(Kind::parse(&f.kind, Some(n), f.p, f.k.first().copied(), name)?);
                    }
                }
                (true, false) => {
                    for &k in &f.k {
                        out.push(Kind::parse(&f.kind, None, f.p, Some(k), name)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs every (instance, variant, seed) combination in the spec, in order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Record>> {
    let variants = spec
        .variants
        .iter()
        .map(|v| v.parse::<Variant>())
        .collect::<Result<Vec<_>>>()?;
    let kinds = spec.kinds()?;
    let mut out = Vec::new();
    for &seed in &spec.seeds {
        for kind in &kinds {
            let inst = generate(kind, seed)?;
            for &variant in &variants {
                let opts = RunOptions {
                    variant,
                    sim: SimConfig {
                        bandwidth_c: spec.bandwidth_c,
                        max_rounds: spec.max_rounds,
                        seed,
                        ..SimConfig::default()
                    },
                    oracle_limit: spec.oracle_limit,
                };
                out.push(run_instance(&inst, &opts)?.0);
            }
        }
    }
    Ok(out)
}

/// Records as JSON lines followed by one `fits` line.
pub fn to_json_lines(records: &[Record]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Internal(e.to_string()))?);
        out.push('\n');
    }
    let summary = serde_json::json!({ "fits": fits(records) });
    out.push_str(&summary.to_string());
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (f64::from(i), 3.0 * f64::from(i).powf(1.5))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.5).abs() < 1e-9);
        assert_eq!(loglog_slope(&[(2.0, 3.0)]), None);
    }

    #[test]
    fn long_path_spec() {
        let spec = ExperimentSpec::parse(
            r#"
            seeds = [0]
            [[family]]
            kind = "long-path"
            k = [4, 8, 16, 32]
            "#,
        )
        .unwrap();
        let recs = run_experiment(&spec).unwrap();
        assert_eq!(recs.len(), 4);
        for (r, k) in recs.iter().zip([4, 8, 16, 32]) {
            assert_eq!(r.matching, k + 1);
            assert_eq!(r.oracle, "match");
            assert!(r.max_bits <= r.bandwidth);
        }
        assert!(recs.windows(2).all(|w| w[0].rounds < w[1].rounds));
        let text = to_json_lines(&recs).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().last().unwrap().starts_with("{\"fits\""));
    }

    #[test]
    fn empty_seed_list_is_an_empty_report() {
        let spec = ExperimentSpec::parse("[[family]]\nkind = \"cycle\"\nn = [6]\n").unwrap();
        assert!(run_experiment(&spec).unwrap().is_empty());
    }

    #[test]
    fn oracle_skip_is_recorded() {
        let inst = generate(&Kind::Cycle { n: 8 }, 0).unwrap();
        let opts = RunOptions {
            oracle_limit: 4,
            ..RunOptions::default()
        };
        let (r, _) = run_instance(&inst, &opts).unwrap();
        assert_eq!((r.s_max, r.oracle.as_str()), (None, "oracle-skipped"));
        assert_eq!(r.matching, 4);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentSpec::parse("seedz = [1]").is_err());
    }
}
