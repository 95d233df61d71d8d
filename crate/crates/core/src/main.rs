use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use congest_matching::driver::Variant;
use congest_matching::experiment::{run_experiment, run_instance, to_json_lines, ExperimentSpec, RunOptions};
use congest_matching::generate::{generate, Instance, Kind};
use congest_matching::sim::SimConfig;
use congest_matching::{Error, Graph, Matching, Result};

const MATCHING_MARKER: &str = "# matching\n";

#[derive(Parser)]
#[command(name = "congest-mm", version, about = "Exact distributed maximum matching on a CONGEST simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and print its record.
    Run(RunArgs),
    /// Run every combination listed in a TOML spec.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an instance as an edge list, followed by its matching if any.
    Generate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// gnp, long-path, cycle, blossom-chain or fixture.
    #[arg(long, default_value = "gnp")]
    kind: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Fixture name for `--kind fixture`.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read the graph from an edge-list file instead of generating it.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "hybrid")]
    variant: Variant,
    #[arg(long, default_value_t = 4)]
    bandwidth_c: u32,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write the per-message trace next to the record.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn instance(a: &InstanceArgs) -> Result<Instance> {
    if let Some(path) = &a.graph_file {
        let text = fs::read_to_string(path)?;
        // `generate` output may end with a `# matching` section.
        let (edges, matching) = match text.split_once(MATCHING_MARKER) {
            Some((e, m)) => (e, Some(m)),
            None => (text.as_str(), None),
        };
        let graph = Graph::parse_edge_list(edges)?;
        let matching = matching.map(|m| Matching::parse(&graph, m)).transpose()?;
        return Ok(Instance {
            name: path.display().to_string(),
            graph,
            matching,
        });
    }
    generate(&Kind::parse(&a.kind, a.n, a.p, a.k, a.name.as_deref())?, a.seed)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run(a) => {
            let inst = instance(&a.instance)?;
            let opts = RunOptions {
                variant: a.variant,
                sim: SimConfig {
                    bandwidth_c: a.bandwidth_c,
                    max_rounds: a.max_rounds,
                    seed: a.instance.seed,
                    trace: a.trace.is_some(),
                    ..SimConfig::default()
                },
                ..RunOptions::default()
            };
            let (rec, trace) = run_instance(&inst, &opts)?;
            if let (Some(path), Some(lines)) = (&a.trace, trace) {
                fs::write(path, lines.join("\n") + "\n")?;
            }
            let line = serde_json::to_string(&rec).map_err(|e| Error::Internal(e.to_string()))?;
            emit(a.out.as_ref(), &(line + "\n"))
        }
        Cmd::Experiment { spec, out } => {
            let spec = ExperimentSpec::parse(&fs::read_to_string(spec)?)?;
            emit(out.as_ref(), &to_json_lines(&run_experiment(&spec)?)?)
        }
        Cmd::Generate { instance: a, out } => {
            let inst = instance(&a)?;
            let mut text = inst.graph.to_edge_list();
            if let Some(m) = &inst.matching {
                text.push_str(MATCHING_MARKER);
                text.push_str(&m.to_text(&inst.graph));
            }
            emit(out.as_ref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
