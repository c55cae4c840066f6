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

//! End-to-end orchestration: ingest, score, graph, the four analyses and
//! figures, with every output listed in a hashed manifest.
//!
//! Output layout under the results directory:
//!
//! ```text
//! ingest/  report.json malformed.csv pairs.jsonl
//! score/   tweet_scores.csv profiles.csv
//! graph/   edges.csv nodes.csv report.json
//! rq1/     homophily_points.csv density_grid.json pearson.json
//!          community_assignment.csv communities.csv communities_all.csv louvain.json
//! rq2/     census.json categories.csv tweet_count_ecdf.csv
//! rq3/     influence_records.csv influence_tests.json influence_ecdf.csv
//!          neighbor_profile.json neighbor_summary.csv neighbor_polarity_ecdf.csv
//! rq4/     removal.json removal_rounds.csv round_polarity.csv controls.csv
//! figures/ *.svg
//! manifest.json
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::community::{self, community_polarity, filter_communities, louvain, symmetrize, CommunityPartition, PolarityCoverage};
use crate::config::{InputConfig, RunConfig, Seeds, Thresholds};
use crate::error::StageExt;
use crate::experiments::{self, ecdf_rows, EcdfRow, EcdfSeries, RemovalOptions, RemovalRound};
use crate::ingest::{self, FieldSchema, KeywordFilter, PolarizedTweet};
use crate::netgraph::{self, BuildReport, RetweetGraph};
use crate::polarity::{self, Profiles, ShareThreshold};
use crate::stats::{self, DensityGrid};
use crate::svg::{self, Series};
use crate::{io, Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Path relative to the results directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub seeds: Seeds,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn artifact(&self, path: &str) -> Option<&ArtifactEntry> {
        self.artifacts.iter().find(|a| a.path == path)
    }
}

/// Writes files under a root and remembers what was written.
pub struct Artifacts {
    root: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Artifacts {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn note(&mut self, rel: &str) {
        if !self.written.iter().any(|w| w == rel) {
            self.written.push(rel.to_string());
        }
    }

    pub fn bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        io::write_atomic(&self.path(rel), bytes)?;
        self.note(rel);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        io::write_json(&self.path(rel), value)?;
        self.note(rel);
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, rel: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        io::write_csv(&self.path(rel), rows)?;
        self.note(rel);
        Ok(())
    }

    pub fn graph(&mut self, dir: &str, g: &RetweetGraph) -> Result<()> {
        netgraph::write_graph(g, &self.path(dir))?;
        self.note(&format!("{dir}/{}", netgraph::EDGES_FILE));
        self.note(&format!("{dir}/{}", netgraph::NODES_FILE));
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Hashes every written file and writes the manifest.
    pub fn finish(&self, seeds: Seeds, failure: Option<&Error>) -> Result<Manifest> {
        let mut paths = self.written.clone();
        paths.sort();
        let mut artifacts = Vec::with_capacity(paths.len());
        for rel in paths {
            let full = self.path(&rel);
            let bytes = std::fs::read(&full).map_err(|e| Error::io(&full, e))?;
            artifacts.push(ArtifactEntry {
                sha256: io::sha256_hex(&bytes),
                bytes: bytes.len() as u64,
                path: rel,
            });
        }
        let manifest = Manifest {
            complete: failure.is_none(),
            failed_stage: failure.and_then(stage_of).map(str::to_string),
            error: failure.map(ToString::to_string),
            seeds,
            artifacts,
        };
        io::write_json(&self.path(MANIFEST_FILE), &manifest)?;
        Ok(manifest)
    }
}

fn stage_of(e: &Error) -> Option<&'static str> {
    match e {
        Error::Stage { stage, .. } => Some(stage),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Ingest, score, graph

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub tweets_sha256: String,
    pub probs_sha256: String,
    pub parsed: usize,
    pub malformed: usize,
    pub lang_skipped: usize,
    pub keyword_filtered: usize,
    pub unmatched: usize,
    pub joined: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MalformedRow {
    pub line: usize,
    pub reason: String,
}

pub struct Ingested {
    pub pairs: Vec<PolarizedTweet>,
    pub report: IngestReport,
    pub malformed: Vec<MalformedRow>,
}

pub fn keyword_filter(choice: &str) -> Result<Option<KeywordFilter>> {
    match choice {
        "none" => Ok(None),
        "default" => Ok(Some(KeywordFilter::default())),
        path => KeywordFilter::load(Path::new(path)).map(Some),
    }
}

/// Parses tweets, applies the keyword filter and joins the polarity file.
pub fn ingest(input: &InputConfig) -> Result<Ingested> {
    let schema = if input.schema.as_os_str().is_empty() {
        FieldSchema::default()
    } else {
        FieldSchema::load(&input.schema).stage("ingest.schema")?
    };
    let parsed = ingest::parse_tweets(&input.tweets, &schema).stage("ingest.parse_tweets")?;
    let tweets_sha256 = io::sha256_file(&input.tweets).stage("ingest.parse_tweets")?;
    let n_parsed = parsed.records.len();
    let records = match keyword_filter(&input.keyword_filter).stage("ingest.filter_keywords")? {
        Some(f) => ingest::filter_keywords(parsed.records, &f),
        None => parsed.records,
    };
    let kept = records.len();
    let probs = ingest::parse_probs(&input.probs).stage("ingest.join_polarity")?;
    let probs_sha256 = io::sha256_file(&input.probs).stage("ingest.join_polarity")?;
    let joined = ingest::join_polarity(records, &probs).stage("ingest.join_polarity")?;
    if joined.unmatched > 0 {
        log::warn!("{} tweets have no polarity triple and were dropped", joined.unmatched);
    }
    let report = IngestReport {
        tweets_sha256,
        probs_sha256,
        parsed: n_parsed,
        malformed: parsed.malformed.len(),
        lang_skipped: parsed.lang_skipped,
        keyword_filtered: n_parsed - kept,
        unmatched: joined.unmatched,
        joined: joined.pairs.len(),
    };
    let malformed = parsed
        .malformed
        .into_iter()
        .map(|m| MalformedRow {
            line: m.line,
            reason: m.reason,
        })
        .collect();
    Ok(Ingested {
        pairs: joined.pairs,
        report,
        malformed,
    })
}

pub fn score(pairs: &[PolarizedTweet], thresholds: &Thresholds) -> Result<Profiles> {
    let share = ShareThreshold::from_fraction(thresholds.bipartisan_share).stage("score.profile_users")?;
    Ok(polarity::profile_users_with(pairs, share))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSize {
    pub nodes: usize,
    pub edges: usize,
    pub total_weight: u64,
}

impl GraphSize {
    pub fn of(g: &RetweetGraph) -> Self {
        GraphSize {
            nodes: g.node_count(),
            edges: g.edge_count(),
            total_weight: g.total_weight(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphReport {
    pub build: BuildReport,
    pub full: GraphSize,
    pub active: GraphSize,
    pub min_edge_weight: u64,
}

/// Retweet graph over the joined records, reduced to active users.
pub fn active_graph(pairs: &[PolarizedTweet], min_edge_weight: u64) -> Result<(RetweetGraph, GraphReport)> {
    let records: Vec<ingest::TweetRecord> = pairs.iter().map(|p| p.tweet.clone()).collect();
    let (full, build) = netgraph::build_graph(&records, &netgraph::tweet_authors(&records));
    full.check_invariants().stage("graph.build")?;
    let active = netgraph::filter_active(&full, min_edge_weight);
    active.check_invariants().stage("graph.filter_active")?;
    let report = GraphReport {
        build,
        full: GraphSize::of(&full),
        active: GraphSize::of(&active),
        min_edge_weight,
    };
    Ok((active, report))
}

// ---------------------------------------------------------------------------
// Analyses

/// Inputs shared by the analyses.
pub struct AnalysisInputs {
    /// Active retweet graph.
    pub graph: RetweetGraph,
    pub profiles: Profiles,
    /// Joined tweets; needed by the influence and neighbour analyses.
    pub pairs: Option<Vec<PolarizedTweet>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainSummary {
    pub resolution: f64,
    pub seed: u64,
    pub level_modularity: Vec<f64>,
    pub community_count: usize,
    pub reported_communities: usize,
    pub community_min_size: usize,
    pub coverage: PolarityCoverage,
}

/// Louvain on the symmetrised graph with member-mean polarity filled in.
pub fn baseline_partition(
    g: &RetweetGraph,
    scores: &BTreeMap<String, f64>,
    thresholds: &Thresholds,
    seed: u64,
) -> Result<(CommunityPartition, LouvainSummary)> {
    let outcome = louvain(&symmetrize(g), thresholds.resolution, seed)?;
    let mut partition = outcome.partition;
    let coverage = community_polarity(&mut partition, scores);
    let reported = filter_communities(&partition, thresholds.community_min_size).len();
    let summary = LouvainSummary {
        resolution: thresholds.resolution,
        seed,
        level_modularity: outcome.level_modularity,
        community_count: partition.len(),
        reported_communities: reported,
        community_min_size: thresholds.community_min_size,
        coverage,
    };
    Ok((partition, summary))
}

/// Homophily and communities.
pub fn rq1(inputs: &AnalysisInputs, cfg: &RunConfig, art: &mut Artifacts) -> Result<CommunityPartition> {
    let scores = polarity::score_map(&inputs.profiles);
    let h = experiments::homophily_analysis(&inputs.graph, &scores, cfg.thresholds.min_in_neighbors)
        .stage("rq1.homophily")?;
    art.csv("rq1/homophily_points.csv", &h.points)?;
    art.json("rq1/density_grid.json", &h.grid)?;
    art.json("rq1/pearson.json", &h.pearson)?;
    let (partition, summary) =
        baseline_partition(&inputs.graph, &scores, &cfg.thresholds, cfg.seeds.louvain).stage("rq1.communities")?;
    let reported = filter_communities(&partition, cfg.thresholds.community_min_size);
    community::write_partition(
        &partition,
        &art.path("rq1/community_assignment.csv"),
        &art.path("rq1/communities_all.csv"),
    )?;
    art.note("rq1/community_assignment.csv");
    art.note("rq1/communities_all.csv");
    art.csv("rq1/communities.csv", community::summary_rows(&reported))?;
    art.json("rq1/louvain.json", &summary)?;
    log::info!(
        "rq1: r = {:.3} over {} users, {} communities ({} reported)",
        h.pearson.statistic,
        h.points.len(),
        summary.community_count,
        summary.reported_communities
    );
    Ok(partition)
}

/// Category census.
pub fn rq2(inputs: &AnalysisInputs, partition: Option<&CommunityPartition>, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let reported = partition.map(|p| filter_communities(p, cfg.thresholds.community_min_size));
    let census = experiments::community_census(reported.as_ref(), &inputs.profiles).stage("rq2.census")?;
    art.json("rq2/census.json", &census)?;
    art.csv("rq2/categories.csv", &census.categories)?;
    art.csv("rq2/tweet_count_ecdf.csv", ecdf_rows(&census.tweet_count_ecdfs))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeighborSummaryRow {
    pub group: polarity::Category,
    pub group_size: usize,
    pub predecessors: usize,
    pub successors: usize,
    pub predecessor_fraction: f64,
    pub successor_fraction: f64,
    pub retweeted_pro_russia: u64,
    pub retweeted_not_sure: u64,
    pub retweeted_pro_ukraine: u64,
    pub retweeted_pro_russia_share: f64,
    pub retweeted_not_sure_share: f64,
    pub retweeted_pro_ukraine_share: f64,
}

/// Influence and bipartisan neighbourhoods.
pub fn rq3(inputs: &AnalysisInputs, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let pairs = inputs
        .pairs
        .as_deref()
        .ok_or_else(|| Error::validation("influence analysis needs the joined tweets"))
        .stage("rq3.influence")?;
    let records: Vec<ingest::TweetRecord> = pairs.iter().map(|p| p.tweet.clone()).collect();
    let influence =
        experiments::influence_analysis(&inputs.profiles, &records, cfg.stats.adjustment).stage("rq3.influence")?;
    art.csv("rq3/influence_records.csv", &influence.records)?;
    #[derive(Serialize)]
    struct Tests<'a> {
        groups: &'a [polarity::Category],
        excluded_zero_followers: usize,
        excluded_other_category: usize,
        comparisons: &'a [experiments::GroupComparison],
    }
    art.json(
        "rq3/influence_tests.json",
        &Tests {
            groups: &influence.groups,
            excluded_zero_followers: influence.excluded_zero_followers,
            excluded_other_category: influence.excluded_other_category,
            comparisons: &influence.comparisons,
        },
    )?;
    art.csv("rq3/influence_ecdf.csv", ecdf_rows(&influence.ecdfs))?;

    let profile = experiments::bipartisan_neighbor_profile(&inputs.graph, &inputs.profiles, pairs);
    art.json("rq3/neighbor_profile.json", &profile)?;
    let rows = profile.groups.iter().map(|g| {
        let c = g.retweeted_content;
        let (r, n, u) = c.fractions();
        NeighborSummaryRow {
            group: g.group,
            group_size: g.group_size,
            predecessors: g.predecessors,
            successors: g.successors,
            predecessor_fraction: g.predecessor_fraction,
            successor_fraction: g.successor_fraction,
            retweeted_pro_russia: c.pro_russia,
            retweeted_not_sure: c.not_sure,
            retweeted_pro_ukraine: c.pro_ukraine,
            retweeted_pro_russia_share: r,
            retweeted_not_sure_share: n,
            retweeted_pro_ukraine_share: u,
        }
    });
    art.csv("rq3/neighbor_summary.csv", rows)?;
    let mut series = Vec::new();
    for g in &profile.groups {
        for (role, values) in [
            ("all", &g.group_polarity),
            ("predecessors", &g.predecessor_polarity),
            ("successors", &g.successor_polarity),
        ] {
            if !values.is_empty() {
                series.push(EcdfSeries {
                    metric: role.to_string(),
                    group: g.group.as_str().to_string(),
                    points: stats::ecdf(values).stage("rq3.neighbor_profile")?,
                });
            }
        }
    }
    art.csv("rq3/neighbor_polarity_ecdf.csv", ecdf_rows(&series))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemovalRoundRow {
    pub arm: String,
    pub round: usize,
    pub removed_so_far: usize,
    pub node_count: usize,
    pub community_count: usize,
    pub largest_share: f64,
    pub singleton_fraction: f64,
    pub polarized_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundPolarityRow {
    pub arm: String,
    pub round: usize,
    pub mean_polarity: f64,
}

/// Node-removal counterfactual on one community.
pub fn rq4(
    inputs: &AnalysisInputs,
    partition: Option<&CommunityPartition>,
    cfg: &RunConfig,
    art: &mut Artifacts,
) -> Result<()> {
    let scores = polarity::score_map(&inputs.profiles);
    let owned;
    let partition = match partition {
        Some(p) => p,
        None => {
            owned = baseline_partition(&inputs.graph, &scores, &cfg.thresholds, cfg.seeds.louvain)
                .stage("rq4.removal")?
                .0;
            &owned
        }
    };
    let target = match cfg.removal.target_community {
        -1 => partition.community(0),
        id => partition.community(id as usize),
    }
    .ok_or_else(|| Error::validation(format!("community {} does not exist", cfg.removal.target_community)))
    .stage("rq4.removal")?;
    let opts = RemovalOptions {
        rounds: cfg.removal.rounds,
        resolution: cfg.thresholds.resolution,
        polar_threshold: cfg.thresholds.polarized,
        seed: cfg.seeds.louvain,
        weighted_degree: cfg.removal.weighted_degree,
    };
    let cmp = experiments::removal_comparison(
        &inputs.graph,
        target.id,
        &target.members,
        &inputs.profiles,
        &scores,
        &opts,
        cfg.seeds.controls,
    )
    .stage("rq4.removal")?;
    art.json("rq4/removal.json", &cmp)?;
    let arms: [(&str, &Vec<RemovalRound>); 2] = [("bipartisan", &cmp.bipartisan_trace), ("control", &cmp.control_trace)];
    let rows = arms.iter().flat_map(|(arm, trace)| {
        trace.iter().map(move |r| RemovalRoundRow {
            arm: arm.to_string(),
            round: r.round,
            removed_so_far: r.removed_so_far,
            node_count: r.node_count,
            community_count: r.community_count,
            largest_share: r.largest_share,
            singleton_fraction: r.singleton_fraction,
            polarized_count: r.polarized_count,
        })
    });
    art.csv("rq4/removal_rounds.csv", rows)?;
    let pol = arms.iter().flat_map(|(arm, trace)| {
        trace.iter().flat_map(move |r| {
            r.polarity_values.iter().map(move |&v| RoundPolarityRow {
                arm: arm.to_string(),
                round: r.round,
                mean_polarity: v,
            })
        })
    });
    art.csv("rq4/round_polarity.csv", pol)?;
    art.csv("rq4/controls.csv", &cmp.controls.matches)?;
    let last = |t: &[RemovalRound]| t.last().map_or(0, |r| r.polarized_count);
    log::info!(
        "rq4: community {} ({} users), polarised communities after removal: bipartisan {} vs control {}",
        target.id,
        target.size(),
        last(&cmp.bipartisan_trace),
        last(&cmp.control_trace)
    );
    Ok(())
}

/// Runs the enabled analyses on prepared inputs.
pub fn run_analyses(inputs: &AnalysisInputs, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let a = cfg.analyses;
    let partition = if a.rq1 { Some(rq1(inputs, cfg, art)?) } else { None };
    if a.rq2 {
        rq2(inputs, partition.as_ref(), cfg, art)?;
    }
    if a.rq3 {
        rq3(inputs, cfg, art)?;
    }
    if a.rq4 {
        rq4(inputs, partition.as_ref(), cfg, art)?;
    }
    Ok(())
}

fn run_stages(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let ingested = ingest(&cfg.input)?;
    art.json("ingest/report.json", &ingested.report)?;
    art.csv("ingest/malformed.csv", &ingested.malformed)?;
    art.bytes("ingest/pairs.jsonl", ingest::pairs_to_jsonl(&ingested.pairs).as_bytes())?;

    let profiles = score(&ingested.pairs, &cfg.thresholds)?;
    art.csv("score/tweet_scores.csv", polarity::tweet_score_rows(&ingested.pairs))?;
    art.csv("score/profiles.csv", profiles.values())?;

    let (graph, report) = active_graph(&ingested.pairs, cfg.thresholds.min_edge_weight)?;
    art.graph("graph", &graph)?;
    art.json("graph/report.json", &report)?;
    log::info!(
        "graph: {} users and {} edges, {} active users",
        report.full.nodes,
        report.full.edges,
        report.active.nodes
    );

    let inputs = AnalysisInputs {
        graph,
        profiles,
        pairs: Some(ingested.pairs),
    };
    run_analyses(&inputs, cfg, art)?;
    if cfg.analyses.figures {
        let figures = render_figures(art.root()).stage("figures.render")?;
        for f in &figures.written {
            art.note(f);
        }
    }
    Ok(())
}

/// Runs every enabled stage and writes the manifest. On failure the
/// manifest is still written, marked incomplete, and the error returned.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Manifest> {
    cfg.validate()?;
    let mut art = Artifacts::new(&cfg.output_dir)?;
    match run_stages(cfg, &mut art) {
        Ok(()) => art.finish(cfg.seeds, None),
        Err(e) => {
            if let Err(m) = art.finish(cfg.seeds, Some(&e)) {
                log::error!("could not write the incomplete manifest: {m}");
            }
            Err(e)
        }
    }
}

// ---------------------------------------------------------------------------
// Figures

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureReport {
    /// Written figures, relative to the results directory.
    pub written: Vec<String>,
    /// `(figure, reason)` for each skipped figure.
    pub skipped: Vec<(String, String)>,
}

fn series_by(rows: &[EcdfRow], keep: impl Fn(&EcdfRow) -> bool, name: impl Fn(&EcdfRow) -> String) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows.iter().filter(|r| keep(r)) {
        let n = name(r);
        match out.iter_mut().find(|s| s.name == n) {
            Some(s) => s.points.push((r.x, r.cdf)),
            None => out.push(Series {
                name: n,
                points: vec![(r.x, r.cdf)],
            }),
        }
    }
    out
}

type Figure = fn(&Path) -> Result<Option<String>>;

fn fig1a(root: &Path) -> Result<Option<String>> {
    let grid: DensityGrid = io::read_json(&root.join("rq1/density_grid.json"))?;
    if grid.total() == 0 {
        return Ok(None);
    }
    Ok(Some(svg::heatmap_with_marginals(
        &grid,
        "Individual against neighbourhood polarity",
        "user polarity",
        "neighbourhood polarity",
    )))
}

fn fig1b(root: &Path) -> Result<Option<String>> {
    let rows: Vec<community::CommunityRow> = io::read_csv(&root.join("rq1/communities.csv"))?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.mean_polarity.map(|p| (p, r.size as f64)))
        .collect();
    if points.is_empty() {
        return Ok(None);
    }
    Ok(Some(svg::scatter(&points, "Community size against polarity", "mean polarity", "size", true)))
}

fn ecdf_figure(root: &Path, file: &str, metric: Option<&str>, heading: &str, x_label: &str) -> Result<Option<String>> {
    let rows: Vec<EcdfRow> = io::read_csv(&root.join(file))?;
    let series = series_by(
        &rows,
        |r| metric.is_none_or(|m| r.metric == m),
        |r| if metric.is_some() { r.group.clone() } else { format!("{} {}", r.group, r.metric) },
    );
    if series.is_empty() {
        return Ok(None);
    }
    Ok(Some(svg::cdf_chart(&series, heading, x_label)))
}

fn fig2(root: &Path) -> Result<Option<String>> {
    ecdf_figure(root, "rq2/tweet_count_ecdf.csv", Some("tweets_per_user"), "Tweets per user", "log10(tweets + 1)")
}

fn fig3a(root: &Path) -> Result<Option<String>> {
    ecdf_figure(root, "rq3/influence_ecdf.csv", Some("normalized_retweets"), "Retweets per tweet per follower", "log10(x + 1)")
}

fn fig3b(root: &Path) -> Result<Option<String>> {
    ecdf_figure(root, "rq3/influence_ecdf.csv", Some("normalized_likes"), "Likes per tweet per follower", "log10(x + 1)")
}

fn fig4(root: &Path) -> Result<Option<String>> {
    ecdf_figure(root, "rq3/neighbor_polarity_ecdf.csv", None, "Polarity of bipartisan neighbours", "polarity")
}

fn removal_rows(root: &Path) -> Result<Vec<RemovalRoundRow>> {
    io::read_csv(&root.join("rq4/removal_rounds.csv"))
}

fn trace_chart(root: &Path, value: fn(&RemovalRoundRow) -> f64, heading: &str, y_label: &str, log_y: bool) -> Result<Option<String>> {
    let rows = removal_rows(root)?;
    let mut series: Vec<Series> = Vec::new();
    for r in &rows {
        let p = (r.round as f64, value(r));
        match series.iter_mut().find(|s| s.name == r.arm) {
            Some(s) => s.points.push(p),
            None => series.push(Series {
                name: r.arm.clone(),
                points: vec![p],
            }),
        }
    }
    if series.is_empty() {
        return Ok(None);
    }
    Ok(Some(svg::line_chart(&series, heading, "removal round", y_label, log_y)))
}

fn fig6a(root: &Path) -> Result<Option<String>> {
    trace_chart(root, |r| r.community_count as f64, "Communities after removal", "communities", true)
}

fn fig6b(root: &Path) -> Result<Option<String>> {
    trace_chart(root, |r| r.polarized_count as f64, "Polarised communities after removal", "polarised communities", false)
}

fn fig6c(root: &Path) -> Result<Option<String>> {
    let rows: Vec<RoundPolarityRow> = io::read_csv(&root.join("rq4/round_polarity.csv"))?;
    let mut groups: Vec<(String, usize, Vec<f64>)> = Vec::new();
    let mut arms: Vec<String> = Vec::new();
    for r in &rows {
        let colour = match arms.iter().position(|a| *a == r.arm) {
            Some(i) => i,
            None => {
                arms.push(r.arm.clone());
                arms.len() - 1
            }
        };
        let label = format!("{} {}", r.arm, r.round);
        match groups.iter_mut().find(|g| g.0 == label) {
            Some(g) => g.2.push(r.mean_polarity),
            None => groups.push((label, colour, vec![r.mean_polarity])),
        }
    }
    if groups.is_empty() {
        return Ok(None);
    }
    Ok(Some(svg::box_chart(&groups, "Community polarity by removal round", "arm and round", "mean polarity")))
}

pub const FIGURES: [(&str, Figure); 9] = [
    ("fig1a_homophily.svg", fig1a),
    ("fig1b_communities.svg", fig1b),
    ("fig2_tweet_counts.svg", fig2),
    ("fig3a_retweet_influence.svg", fig3a),
    ("fig3b_like_influence.svg", fig3b),
    ("fig4_neighbor_polarity.svg", fig4),
    ("fig6a_removal_communities.svg", fig6a),
    ("fig6b_removal_polarized.svg", fig6b),
    ("fig6c_removal_polarity.svg", fig6c),
];

/// Draws every figure whose source table exists in `results`. Missing or
/// empty tables skip their figure with a warning.
pub fn render_figures(results: &Path) -> Result<FigureReport> {
    let mut report = FigureReport::default();
    for (name, draw) in FIGURES {
        let rel = format!("figures/{name}");
        match draw(results) {
            Ok(Some(doc)) => {
                io::write_atomic(&results.join(&rel), doc.as_bytes())?;
                report.written.push(rel);
            }
            Ok(None) => {
                log::warn!("{name} skipped: source table is empty");
                report.skipped.push((name.to_string(), "empty table".into()));
            }
            Err(e @ (Error::Io { .. } | Error::Parse { .. })) => {
                log::warn!("{name} skipped: {e}");
                report.skipped.push((name.to_string(), e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{self, SynthParams};

    fn small_synth(dir: &Path) -> RunConfig {
        let params = SynthParams {
            n_per_block: 80,
            n_bridges: 12,
            n_neutral: 10,
            p_intra: 0.08,
            p_inter: 0.003,
            p_bridge: 0.05,
            p_neutral: 0.02,
            seed: 11,
            ..SynthParams::default()
        };
        let data = synth::generate(&params).unwrap();
        synth::write_dataset(&data, dir).unwrap();
        RunConfig {
            input: InputConfig {
                tweets: dir.join(synth::TWEETS_FILE),
                probs: dir.join(synth::PROBS_FILE),
                ..InputConfig::default()
            },
            output_dir: dir.join("out"),
            ..RunConfig::default()
        }
    }

    #[test]
    fn end_to_end_and_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_synth(dir.path());
        let first = run_pipeline(&cfg).unwrap();
        assert!(first.complete);
        assert!(first.artifacts.len() >= 10);
        for f in FIGURES {
            assert!(first.artifact(&format!("figures/{}", f.0)).is_some(), "{}", f.0);
        }
        let second = run_pipeline(&RunConfig {
            output_dir: dir.path().join("again"),
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(first, second);
        let text = std::fs::read_to_string(cfg.output_dir.join(MANIFEST_FILE)).unwrap();
        assert!(!text.contains(dir.path().to_str().unwrap()));
    }

    #[test]
    fn missing_probs_names_the_join_stage() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_synth(dir.path());
        cfg.input.probs = dir.path().join("absent.jsonl");
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(err.to_string().starts_with("ingest.join_polarity"), "{err}");
        assert_ne!(err.exit_code(), 0);
        let m: Manifest = io::read_json(&cfg.output_dir.join(MANIFEST_FILE)).unwrap();
        assert!(!m.complete);
        assert_eq!(m.failed_stage.as_deref(), Some("ingest.join_polarity"));
    }

    #[test]
    fn empty_community_table_skips_that_figure() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("rq1")).unwrap();
        std::fs::write(dir.path().join("rq1/communities.csv"), "community_id,size,mean_polarity\n").unwrap();
        let report = render_figures(dir.path()).unwrap();
        assert!(report.written.is_empty());
        assert!(report.skipped.iter().any(|(n, r)| n == "fig1b_communities.svg" && r == "empty table"));
        assert_eq!(report.skipped.len(), FIGURES.len());
    }

    #[test]
    fn removal_trace_line_has_one_point_per_round() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<RemovalRoundRow> = (0..11)
            .map(|round| RemovalRoundRow {
                arm: "bipartisan".into(),
                round,
                removed_so_far: round,
                node_count: 20 - round,
                community_count: 1 + round,
                largest_share: 1.0,
                singleton_fraction: 0.0,
                polarized_count: round / 3,
            })
            .collect();
        io::write_csv(&dir.path().join("rq4/removal_rounds.csv"), &rows).unwrap();
        let doc = fig6a(dir.path()).unwrap().unwrap();
        assert_eq!(doc.matches(r#"class="point""#).count(), 11);
    }
}
