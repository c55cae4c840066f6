// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `echoscope` command-line tool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use echoscope_core::config::{Analyses, InputConfig, RunConfig, Seeds, Thresholds};
use echoscope_core::pipeline::{self, AnalysisInputs, Artifacts};
use echoscope_core::synth::{self, SynthParams};
use echoscope_core::{community, ingest, io, netgraph, polarity, Error, Result};

#[derive(Parser)]
#[command(name = "echoscope", version, about = "Echo-chamber analysis of retweet networks")]
struct Cli {
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, keyword-filter and join tweets with their polarity triples.
    Ingest(IngestArgs),
    /// Per-tweet scores and per-user profiles from joined tweets.
    Score(ScoreArgs),
    #[command(subcommand)]
    Graph(GraphCommand),
    #[command(subcommand)]
    Community(CommunityCommand),
    /// Full pipeline or a single analysis.
    Run(RunArgs),
    /// Synthetic dataset with planted echo chambers.
    Synth(SynthArgs),
    /// Redraw figures from a results directory.
    Render {
        #[arg(long)]
        results: PathBuf,
    },
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    tweets: PathBuf,
    #[arg(long)]
    probs: PathBuf,
    /// `default`, `none` or a keyword file.
    #[arg(long, default_value = "default")]
    filter: String,
    /// Field-name schema file.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Joined tweets written by `ingest`.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    bipartisan_share: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Retweet graph from joined tweets, plus its active part.
    Build {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_edge_weight: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Activity filter on a stored graph.
    Filter {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_edge_weight: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CommunityCommand {
    /// Louvain communities of a stored graph.
    Detect {
        #[arg(long)]
        graph: PathBuf,
        /// Profiles CSV for community polarity.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        #[arg(long, default_value_t = 10)]
        min_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    All,
    Rq1,
    Rq2,
    Rq3,
    Rq4,
}

#[derive(Args)]
struct RunArgs {
    stage: Stage,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Results directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stored active graph (single analyses).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Profiles CSV (single analyses).
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Joined tweets, needed by rq3.
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML parameter file; missing keys take defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, required_unless_present = "print_defaults")]
    out: Option<PathBuf>,
    /// Print the default parameters and exit.
    #[arg(long)]
    print_defaults: bool,
}

#[derive(Subcommand)]
enum ConfigCommand {
    /// Print (or write) the default run configuration.
    Init {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Score(a) => cmd_score(a),
        Command::Graph(g) => cmd_graph(g),
        Command::Community(c) => cmd_community(c, cli.seed.unwrap_or(0)),
        Command::Run(a) => cmd_run(a, cli.seed),
        Command::Synth(a) => cmd_synth(a, cli.seed),
        Command::Render { results } => {
            let report = pipeline::render_figures(results)?;
            println!("{} figures written, {} skipped", report.written.len(), report.skipped.len());
            Ok(())
        }
        Command::Config(ConfigCommand::Init { out }) => {
            let text = RunConfig::default().to_toml();
            match out {
                Some(path) => io::write_atomic(path, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let input = InputConfig {
        tweets: a.tweets.clone(),
        probs: a.probs.clone(),
        keyword_filter: a.filter.clone(),
        schema: a.schema.clone().unwrap_or_default(),
    };
    let ingested = pipeline::ingest(&input)?;
    let mut art = Artifacts::new(&a.out)?;
    art.json("report.json", &ingested.report)?;
    art.csv("malformed.csv", &ingested.malformed)?;
    art.bytes("pairs.jsonl", ingest::pairs_to_jsonl(&ingested.pairs).as_bytes())?;
    let r = &ingested.report;
    println!(
        "{} parsed, {} malformed, {} filtered, {} unmatched, {} joined",
        r.parsed, r.malformed, r.keyword_filtered, r.unmatched, r.joined
    );
    Ok(())
}

fn cmd_score(a: &ScoreArgs) -> Result<()> {
    let pairs = ingest::read_pairs(&a.pairs)?;
    let thresholds = Thresholds {
        bipartisan_share: a.bipartisan_share,
        ..Thresholds::default()
    };
    let profiles = pipeline::score(&pairs, &thresholds)?;
    let mut art = Artifacts::new(&a.out)?;
    art.csv("tweet_scores.csv", polarity::tweet_score_rows(&pairs))?;
    art.csv("profiles.csv", profiles.values())?;
    println!("{} tweets scored, {} users profiled", pairs.len(), profiles.len());
    Ok(())
}

fn cmd_graph(g: &GraphCommand) -> Result<()> {
    match g {
        GraphCommand::Build {
            pairs,
            min_edge_weight,
            out,
        } => {
            let pairs = ingest::read_pairs(pairs)?;
            let (active, report) = pipeline::active_graph(&pairs, *min_edge_weight)?;
            let mut art = Artifacts::new(out)?;
            art.graph("active", &active)?;
            art.json("report.json", &report)?;
            println!(
                "{} users, {} edges; {} active users, {} active edges",
                report.full.nodes, report.full.edges, report.active.nodes, report.active.edges
            );
            Ok(())
        }
        GraphCommand::Filter {
            graph,
            min_edge_weight,
            out,
        } => {
            let g = netgraph::read_graph(graph)?;
            let active = netgraph::filter_active(&g, *min_edge_weight);
            netgraph::write_graph(&active, out)?;
            println!("{} of {} users kept", active.node_count(), g.node_count());
            Ok(())
        }
    }
}

fn cmd_community(c: &CommunityCommand, seed: u64) -> Result<()> {
    let CommunityCommand::Detect {
        graph,
        profiles,
        resolution,
        min_size,
        out,
    } = c;
    let g = netgraph::read_graph(graph)?;
    let scores = match profiles {
        Some(p) => polarity::score_map(&polarity::read_profiles(p)?),
        None => Default::default(),
    };
    let thresholds = Thresholds {
        resolution: *resolution,
        community_min_size: *min_size,
        ..Thresholds::default()
    };
    let (partition, summary) = pipeline::baseline_partition(&g, &scores, &thresholds, seed)?;
    let mut art = Artifacts::new(out)?;
    community::write_partition(
        &partition,
        &art.path("community_assignment.csv"),
        &art.path("communities_all.csv"),
    )?;
    art.csv(
        "communities.csv",
        community::summary_rows(&community::filter_communities(&partition, *min_size)),
    )?;
    art.json("louvain.json", &summary)?;
    println!(
        "{} communities, {} with at least {} members, modularity {:.4}",
        summary.community_count,
        summary.reported_communities,
        min_size,
        summary.level_modularity.last().copied().unwrap_or(0.0)
    );
    Ok(())
}

fn load_config(path: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seeds = Seeds::all(s);
    }
    if let Some(o) = out {
        cfg.output_dir = o.to_path_buf();
    }
    Ok(cfg)
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::validation(format!("--{flag} is required")))
}

fn cmd_run(a: &RunArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg = load_config(a.config.as_deref(), seed, a.out.as_deref())?;
    let rq = match a.stage {
        Stage::All => {
            let manifest = pipeline::run_pipeline(&cfg)?;
            println!(
                "{} artifacts in {}",
                manifest.artifacts.len(),
                cfg.output_dir.display()
            );
            return Ok(());
        }
        Stage::Rq1 => 1,
        Stage::Rq2 => 2,
        Stage::Rq3 => 3,
        Stage::Rq4 => 4,
    };
    cfg.analyses = Analyses::only(rq);
    let inputs = AnalysisInputs {
        graph: netgraph::read_graph(required(&a.graph, "graph")?)?,
        profiles: polarity::read_profiles(required(&a.profiles, "profiles")?)?,
        pairs: match &a.pairs {
            Some(p) => Some(ingest::read_pairs(p)?),
            None => None,
        },
    };
    let mut art = Artifacts::new(&cfg.output_dir)?;
    let result = pipeline::run_analyses(&inputs, &cfg, &mut art);
    let manifest = art.finish(cfg.seeds, result.as_ref().err())?;
    result?;
    println!("{} artifacts in {}", manifest.artifacts.len(), cfg.output_dir.display());
    Ok(())
}

fn cmd_synth(a: &SynthArgs, seed: Option<u64>) -> Result<()> {
    let mut params = match &a.params {
        Some(p) => SynthParams::load(p)?,
        None => SynthParams::default(),
    };
    if a.print_defaults {
        print!("{}", SynthParams::default().to_toml());
        return Ok(());
    }
    if let Some(s) = seed {
        params.seed = s;
    }
    let out = required(&a.out, "out")?;
    let data = synth::generate(&params)?;
    synth::write_dataset(&data, out)?;
    let summary = synth::describe(&data.truth);
    println!(
        "{} tweets from {} users ({} bridges) written to {}",
        data.tweets.len(),
        data.truth.roles.len(),
        summary.n_bridges,
        out.display()
    );
    Ok(())
}
