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

//! The four analyses: polarity homophily and communities, the category
//! census, influence and neighbour profiling of bipartisan users, and the
//! node-removal counterfactual.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::community::{community_polarity, louvain, symmetrize, CommunityPartition};
use crate::ingest::{PolarizedTweet, TweetRecord};
use crate::netgraph::{neighborhood_polarity, RetweetGraph};
use crate::polarity::{tweet_label, Category, PolarityLabel, Profiles};
use crate::stats::{self, density2d, dunn_posthoc, kruskal_wallis, Adjustment, Bounds, DensityGrid, DunnResult, TestResult};
use crate::{Error, Result};

pub const HOMOPHILY_BINS: usize = 50;

/// Named ECDF, x on the transformed axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfSeries {
    pub metric: String,
    pub group: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfRow {
    pub metric: String,
    pub group: String,
    pub x: f64,
    pub cdf: f64,
}

pub fn ecdf_rows(series: &[EcdfSeries]) -> Vec<EcdfRow> {
    series
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |&(x, cdf)| EcdfRow {
                metric: s.metric.clone(),
                group: s.group.clone(),
                x,
                cdf,
            })
        })
        .collect()
}

fn log_ecdf(metric: &str, group: &str, values: &[f64]) -> Result<Option<EcdfSeries>> {
    if values.is_empty() {
        return Ok(None);
    }
    Ok(Some(EcdfSeries {
        metric: metric.to_string(),
        group: group.to_string(),
        points: stats::ecdf_log1p10(values)?,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyPoint {
    pub user_id: String,
    pub g_u: f64,
    pub u_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyResult {
    pub points: Vec<HomophilyPoint>,
    pub grid: DensityGrid,
    pub pearson: TestResult,
}

/// Pairs every node's own polarity with its neighbourhood polarity and
/// correlates the two.
pub fn homophily_analysis(
    g: &RetweetGraph,
    scores: &BTreeMap<String, f64>,
    min_in_neighbors: usize,
) -> Result<HomophilyResult> {
    let neighborhood = neighborhood_polarity(g, scores, min_in_neighbors)?;
    let points: Vec<HomophilyPoint> = neighborhood
        .into_iter()
        .filter_map(|(user_id, u_n)| {
            scores.get(&user_id).map(|&g_u| HomophilyPoint { user_id, g_u, u_n })
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "homophily needs at least 3 nodes with a neighbourhood polarity, found {}",
            points.len()
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.g_u).collect();
    let y: Vec<f64> = points.iter().map(|p| p.u_n).collect();
    let pearson = stats::pearson(&x, &y)?;
    let grid = density2d(&x, &y, HOMOPHILY_BINS, HOMOPHILY_BINS, Bounds::POLARITY)?;
    Ok(HomophilyResult { points, grid, pearson })
}

/// Same keys, values shuffled among them.
pub fn permute_scores(scores: &BTreeMap<String, f64>, seed: u64) -> BTreeMap<String, f64> {
    let mut values: Vec<f64> = scores.values().copied().collect();
    values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    scores.keys().cloned().zip(values).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: Category,
    pub users: usize,
    pub user_share: f64,
    pub tweets: u64,
    pub tweet_share: f64,
    pub verified_users: usize,
    pub verified_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPoint {
    pub community_id: usize,
    pub size: usize,
    pub mean_polarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub total_users: usize,
    pub total_tweets: u64,
    pub categories: Vec<CategoryCount>,
    /// Scored communities, for the size against polarity scatter.
    pub communities: Vec<CommunityPoint>,
    /// Tweets per user by category, on `log10(x + 1)`.
    pub tweet_count_ecdfs: Vec<EcdfSeries>,
}

fn share<T: Into<f64>>(part: T, whole: T) -> f64 {
    let whole = whole.into();
    if whole > 0.0 {
        part.into() / whole
    } else {
        0.0
    }
}

/// Users, tweets and verified accounts per category, plus the community
/// size and polarity table.
pub fn community_census(partition: Option<&CommunityPartition>, profiles: &Profiles) -> Result<Census> {
    let total_users = profiles.len();
    let total_tweets: u64 = profiles.values().map(|p| p.n_tweets).sum();
    let mut categories = Vec::new();
    let mut tweet_count_ecdfs = Vec::new();
    for category in Category::ALL {
        let members: Vec<_> = profiles.values().filter(|p| p.category == category).collect();
        let tweets: u64 = members.iter().map(|p| p.n_tweets).sum();
        let verified_users = members.iter().filter(|p| p.verified).count();
        categories.push(CategoryCount {
            category,
            users: members.len(),
            user_share: share(members.len() as f64, total_users as f64),
            tweets,
            tweet_share: share(tweets as f64, total_tweets as f64),
            verified_users,
            verified_fraction: share(verified_users as f64, members.len() as f64),
        });
        let counts: Vec<f64> = members.iter().map(|p| p.n_tweets as f64).collect();
        if let Some(s) = log_ecdf("tweets_per_user", category.as_str(), &counts)? {
            tweet_count_ecdfs.push(s);
        }
    }
    let communities = partition
        .map(|p| {
            p.communities()
                .iter()
                .filter_map(|c| {
                    c.mean_polarity.map(|mean_polarity| CommunityPoint {
                        community_id: c.id,
                        size: c.size(),
                        mean_polarity,
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(Census {
        total_users,
        total_tweets,
        categories,
        communities,
        tweet_count_ecdfs,
    })
}

/// Groups compared for influence, in this order.
pub const INFLUENCE_GROUPS: [Category; 3] = [
    Category::ProRussiaPartisan,
    Category::ProUkrainePartisan,
    Category::Bipartisan,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRecord {
    pub user_id: String,
    pub category: Category,
    pub n_tweets: u64,
    pub followers: u64,
    pub mean_retweets_per_tweet: f64,
    pub mean_likes_per_tweet: f64,
    pub normalized_retweets: f64,
    pub normalized_likes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub metric: String,
    pub group_sizes: Vec<usize>,
    pub kruskal_wallis: Option<TestResult>,
    pub dunn: Option<DunnResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub groups: Vec<Category>,
    pub records: Vec<InfluenceRecord>,
    pub excluded_zero_followers: usize,
    pub excluded_other_category: usize,
    pub comparisons: Vec<GroupComparison>,
    pub ecdfs: Vec<EcdfSeries>,
}

pub const INFLUENCE_METRICS: [&str; 4] = [
    "normalized_retweets",
    "normalized_likes",
    "mean_retweets_per_tweet",
    "mean_likes_per_tweet",
];

impl InfluenceRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "normalized_retweets" => Some(self.normalized_retweets),
            "normalized_likes" => Some(self.normalized_likes),
            "mean_retweets_per_tweet" => Some(self.mean_retweets_per_tweet),
            "mean_likes_per_tweet" => Some(self.mean_likes_per_tweet),
            _ => None,
        }
    }
}

/// Engagement per tweet, divided by followers, for the partisan and
/// bipartisan users with at least one follower, compared across groups.
/// Engagement is summed over every record the user authored.
pub fn influence_analysis(
    profiles: &Profiles,
    tweets: &[TweetRecord],
    adjustment: Adjustment,
) -> Result<InfluenceReport> {
    let mut sums: HashMap<&str, (u64, u64)> = HashMap::new();
    for t in tweets {
        let e = sums.entry(t.author_id.as_str()).or_default();
        e.0 += t.retweet_count;
        e.1 += t.like_count;
    }
    let mut records = Vec::new();
    let (mut excluded_zero_followers, mut excluded_other_category) = (0, 0);
    for p in profiles.values() {
        if !INFLUENCE_GROUPS.contains(&p.category) {
            excluded_other_category += 1;
            continue;
        }
        if p.followers == 0 {
            excluded_zero_followers += 1;
            continue;
        }
        if p.n_tweets == 0 {
            continue;
        }
        let (rt, likes) = sums.get(p.user_id.as_str()).copied().unwrap_or_default();
        let n = p.n_tweets as f64;
        let (mrt, mlk) = (rt as f64 / n, likes as f64 / n);
        records.push(InfluenceRecord {
            user_id: p.user_id.clone(),
            category: p.category,
            n_tweets: p.n_tweets,
            followers: p.followers,
            mean_retweets_per_tweet: mrt,
            mean_likes_per_tweet: mlk,
            normalized_retweets: mrt / p.followers as f64,
            normalized_likes: mlk / p.followers as f64,
        });
    }

    let mut comparisons = Vec::new();
    let mut ecdfs = Vec::new();
    for metric in INFLUENCE_METRICS {
        let groups: Vec<Vec<f64>> = INFLUENCE_GROUPS
            .iter()
            .map(|c| {
                records
                    .iter()
                    .filter(|r| r.category == *c)
                    .filter_map(|r| r.metric(metric))
                    .collect()
            })
            .collect();
        for (c, vals) in INFLUENCE_GROUPS.iter().zip(&groups) {
            if let Some(s) = log_ecdf(metric, c.as_str(), vals)? {
                ecdfs.push(s);
            }
        }
        let group_sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        let comparison = if let Some(i) = group_sizes.iter().position(|&n| n < 2) {
            let reason = format!(
                "group {} has {} member(s), at least 2 needed",
                INFLUENCE_GROUPS[i],
                group_sizes[i]
            );
            log::warn!("influence test on {metric} skipped: {reason}");
            GroupComparison {
                metric: metric.to_string(),
                group_sizes,
                kruskal_wallis: None,
                dunn: None,
                skipped: Some(reason),
            }
        } else {
            GroupComparison {
                metric: metric.to_string(),
                group_sizes,
                kruskal_wallis: Some(kruskal_wallis(&groups)?),
                dunn: Some(dunn_posthoc(&groups, adjustment)?),
                skipped: None,
            }
        };
        comparisons.push(comparison);
    }
    Ok(InfluenceReport {
        groups: INFLUENCE_GROUPS.to_vec(),
        records,
        excluded_zero_followers,
        excluded_other_category,
        comparisons,
        ecdfs,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ContentBreakdown {
    pub pro_russia: u64,
    pub not_sure: u64,
    pub pro_ukraine: u64,
}

impl ContentBreakdown {
    pub fn total(&self) -> u64 {
        self.pro_russia + self.not_sure + self.pro_ukraine
    }

    /// `(pro-Russia, not sure, pro-Ukraine)` shares, zeros when empty.
    pub fn fractions(&self) -> (f64, f64, f64) {
        let t = self.total() as f64;
        if t == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        (
            self.pro_russia as f64 / t,
            self.not_sure as f64 / t,
            self.pro_ukraine as f64 / t,
        )
    }

    fn add(&mut self, label: PolarityLabel) {
        match label {
            PolarityLabel::ProRussia => self.pro_russia += 1,
            PolarityLabel::NotSure => self.not_sure += 1,
            PolarityLabel::ProUkraine => self.pro_ukraine += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupNeighborProfile {
    pub group: Category,
    /// Group members present in the graph.
    pub group_size: usize,
    /// Members retweeted by at least one bipartisan user.
    pub predecessors: usize,
    /// Members that retweeted at least one bipartisan user.
    pub successors: usize,
    pub predecessor_fraction: f64,
    pub successor_fraction: f64,
    pub group_polarity: Vec<f64>,
    pub predecessor_polarity: Vec<f64>,
    pub successor_polarity: Vec<f64>,
    /// Labels of the bipartisan-authored tweets the members retweeted.
    pub retweeted_content: ContentBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborProfile {
    pub bipartisan_nodes: usize,
    pub groups: Vec<GroupNeighborProfile>,
}

pub const PARTISAN_GROUPS: [Category; 2] = [Category::ProRussiaPartisan, Category::ProUkrainePartisan];

/// How the partisan groups sit around bipartisan users: who they retweet,
/// who retweets them, and which of their tweets get retweeted.
pub fn bipartisan_neighbor_profile(
    g: &RetweetGraph,
    profiles: &Profiles,
    pairs: &[PolarizedTweet],
) -> NeighborProfile {
    let category = |id: &str| profiles.get(id).map(|p| p.category);
    let bipartisan: Vec<&str> = g
        .ids()
        .iter()
        .map(String::as_str)
        .filter(|id| category(id) == Some(Category::Bipartisan))
        .collect();
    let mut is_pred = vec![false; g.node_count()];
    let mut is_succ = vec![false; g.node_count()];
    for b in &bipartisan {
        let i = g.index_of(b).expect("node of g");
        for &(j, _) in g.in_edges(i) {
            is_pred[j as usize] = true;
        }
        for &(j, _) in g.out_edges(i) {
            is_succ[j as usize] = true;
        }
    }

    let by_id: HashMap<&str, &PolarizedTweet> = pairs.iter().map(|p| (p.tweet.tweet_id.as_str(), p)).collect();
    let mut content: HashMap<Category, ContentBreakdown> = HashMap::new();
    for p in pairs {
        let Some(reference) = &p.tweet.referenced_tweet_id else {
            continue;
        };
        let source = by_id.get(reference.as_str());
        let Some(author) = source.map(|s| s.tweet.author_id.as_str()) else {
            continue;
        };
        let retweeter = p.tweet.author_id.as_str();
        if author == retweeter
            || category(author) != Some(Category::Bipartisan)
            || !g.contains(author)
            || !g.contains(retweeter)
        {
            continue;
        }
        let Some(group) = category(retweeter).filter(|c| PARTISAN_GROUPS.contains(c)) else {
            continue;
        };
        let triple = source.map(|s| &s.polarity).unwrap_or(&p.polarity);
        content.entry(group).or_default().add(tweet_label(triple));
    }

    let groups = PARTISAN_GROUPS
        .iter()
        .map(|&group| {
            let mut out = GroupNeighborProfile {
                group,
                group_size: 0,
                predecessors: 0,
                successors: 0,
                predecessor_fraction: 0.0,
                successor_fraction: 0.0,
                group_polarity: Vec::new(),
                predecessor_polarity: Vec::new(),
                successor_polarity: Vec::new(),
                retweeted_content: content.get(&group).copied().unwrap_or_default(),
            };
            for (i, id) in g.ids().iter().enumerate() {
                let Some(p) = profiles.get(id).filter(|p| p.category == group) else {
                    continue;
                };
                out.group_size += 1;
                out.group_polarity.push(p.g_u);
                if is_pred[i] {
                    out.predecessors += 1;
                    out.predecessor_polarity.push(p.g_u);
                }
                if is_succ[i] {
                    out.successors += 1;
                    out.successor_polarity.push(p.g_u);
                }
            }
            out.predecessor_fraction = share(out.predecessors as f64, out.group_size as f64);
            out.successor_fraction = share(out.successors as f64, out.group_size as f64);
            out
        })
        .collect();
    NeighborProfile {
        bipartisan_nodes: bipartisan.len(),
        groups,
    }
}

fn degree_of(g: &RetweetGraph, id: &str, weighted: bool) -> Result<u64> {
    let i = g
        .index_of(id)
        .ok_or_else(|| Error::domain(format!("{id} is not a node of the graph")))?;
    Ok(g.total_degree(i, weighted))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlMatch {
    pub target: String,
    pub control: String,
    pub target_degree: u64,
    pub control_degree: u64,
    pub difference: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSet {
    pub matches: Vec<ControlMatch>,
    pub max_difference: u64,
    pub exact_matches: usize,
    /// `difference → number of matches`.
    pub difference_histogram: BTreeMap<u64, usize>,
}

impl ControlSet {
    pub fn controls(&self) -> Vec<String> {
        self.matches.iter().map(|m| m.control.clone()).collect()
    }
}

/// Greedy nearest-degree matching without replacement, targets taken in
/// descending degree order. Pool nodes that are also targets are ignored.
pub fn degree_matched_controls(
    g: &RetweetGraph,
    targets: &[String],
    pool: &[String],
    seed: u64,
    weighted: bool,
) -> Result<ControlSet> {
    let mut ordered: Vec<(u64, &str)> = targets
        .iter()
        .map(|t| Ok((degree_of(g, t, weighted)?, t.as_str())))
        .collect::<Result<_>>()?;
    ordered.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    ordered.dedup_by(|a, b| a.1 == b.1);

    let excluded: std::collections::HashSet<&str> = ordered.iter().map(|t| t.1).collect();
    let mut by_degree: BTreeMap<u64, Vec<&str>> = BTreeMap::new();
    let mut pool_ids: Vec<&str> = pool.iter().map(String::as_str).filter(|p| !excluded.contains(p)).collect();
    pool_ids.sort_unstable();
    pool_ids.dedup();
    for p in &pool_ids {
        by_degree.entry(degree_of(g, p, weighted)?).or_default().push(p);
    }
    if pool_ids.len() < ordered.len() {
        return Err(Error::domain(format!(
            "control pool has {} nodes for {} targets",
            pool_ids.len(),
            ordered.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matches = Vec::with_capacity(ordered.len());
    for (d, target) in ordered {
        let below = by_degree.range(..=d).next_back().map(|(k, _)| *k);
        let above = by_degree.range(d..).next().map(|(k, _)| *k);
        let best = match (below, above) {
            (Some(b), Some(a)) => (d - b).min(a - d),
            (Some(b), None) => d - b,
            (None, Some(a)) => a - d,
            (None, None) => return Err(Error::domain("control pool exhausted")),
        };
        let mut keys = vec![];
        if let Some(b) = below.filter(|b| d - b == best) {
            keys.push(b);
        }
        if let Some(a) = above.filter(|a| a - d == best && Some(*a) != below) {
            keys.push(a);
        }
        let sizes: Vec<usize> = keys.iter().map(|k| by_degree[k].len()).collect();
        let mut pick = rng.random_range(0..sizes.iter().sum::<usize>());
        let mut key = keys[0];
        for (k, s) in keys.iter().zip(&sizes) {
            if pick < *s {
                key = *k;
                break;
            }
            pick -= s;
        }
        let bucket = by_degree.get_mut(&key).expect("key present");
        let control = bucket.swap_remove(pick);
        if bucket.is_empty() {
            by_degree.remove(&key);
        }
        matches.push(ControlMatch {
            target: target.to_string(),
            control: control.to_string(),
            target_degree: d,
            control_degree: key,
            difference: best,
        });
    }
    let mut difference_histogram = BTreeMap::new();
    for m in &matches {
        *difference_histogram.entry(m.difference).or_insert(0) += 1;
    }
    Ok(ControlSet {
        max_difference: matches.iter().map(|m| m.difference).max().unwrap_or(0),
        exact_matches: matches.iter().filter(|m| m.difference == 0).count(),
        matches,
        difference_histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovalOptions {
    pub rounds: usize,
    pub resolution: f64,
    pub polar_threshold: f64,
    pub seed: u64,
    pub weighted_degree: bool,
}

impl Default for RemovalOptions {
    fn default() -> Self {
        RemovalOptions {
            rounds: 10,
            resolution: 0.1,
            polar_threshold: 0.5,
            seed: 0,
            weighted_degree: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalRound {
    pub round: usize,
    pub removed_so_far: usize,
    pub node_count: usize,
    pub community_count: usize,
    pub largest_share: f64,
    pub singleton_fraction: f64,
    /// Mean polarity of every scored community.
    pub polarity_values: Vec<f64>,
    pub polarized_count: usize,
}

pub type RemovalTrace = Vec<RemovalRound>;

/// Removes `removal` from the subgraph induced by `community` in rounds of
/// ascending degree, re-detecting communities after each round. Round 0 is
/// the untouched subgraph.
pub fn removal_experiment(
    g: &RetweetGraph,
    community: &[String],
    removal: &[String],
    scores: &BTreeMap<String, f64>,
    opts: &RemovalOptions,
) -> Result<RemovalTrace> {
    if opts.rounds < 1 {
        return Err(Error::domain("removal needs at least one round"));
    }
    let sub = g.subgraph_of(community.iter().map(String::as_str));
    if sub.node_count() != {
        let mut c: Vec<&String> = community.iter().collect();
        c.sort();
        c.dedup();
        c.len()
    } {
        return Err(Error::domain("community contains nodes outside the graph"));
    }
    let mut order: Vec<(u64, &str)> = Vec::with_capacity(removal.len());
    for r in removal {
        if !sub.contains(r) {
            return Err(Error::domain(format!("removal node {r} is outside the community")));
        }
        order.push((degree_of(g, r, opts.weighted_degree)?, r.as_str()));
    }
    order.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    order.dedup_by(|a, b| a.1 == b.1);
    let per_round = order.len().div_ceil(opts.rounds);

    let mut keep = vec![true; sub.node_count()];
    let mut removed = 0;
    let mut trace = Vec::with_capacity(opts.rounds + 1);
    for round in 0..=opts.rounds {
        if round > 0 {
            let take = per_round.min(order.len() - removed);
            for &(_, id) in &order[removed..removed + take] {
                keep[sub.index_of(id).expect("checked above")] = false;
            }
            removed += take;
        }
        let surviving = sub.induced_subgraph(&keep);
        let outcome = louvain(&symmetrize(&surviving), opts.resolution, opts.seed)?;
        let mut partition = outcome.partition;
        community_polarity(&mut partition, scores);
        let n = surviving.node_count();
        let k = partition.len();
        let largest = partition.communities().first().map_or(0, |c| c.size());
        let singletons = partition.communities().iter().filter(|c| c.size() == 1).count();
        let polarity_values: Vec<f64> = partition.communities().iter().filter_map(|c| c.mean_polarity).collect();
        trace.push(RemovalRound {
            round,
            removed_so_far: removed,
            node_count: n,
            community_count: k,
            largest_share: share(largest as f64, n as f64),
            singleton_fraction: share(singletons as f64, k as f64),
            polarized_count: polarity_values.iter().filter(|v| v.abs() > opts.polar_threshold).count(),
            polarity_values,
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalComparison {
    pub community_id: usize,
    pub community_size: usize,
    pub bipartisan_trace: RemovalTrace,
    pub control_trace: RemovalTrace,
    pub controls: ControlSet,
}

/// Runs the removal experiment on the bipartisan members of `community`
/// and on degree-matched controls drawn from its other members. The two
/// arms run concurrently.
pub fn removal_comparison(
    g: &RetweetGraph,
    community_id: usize,
    community: &[String],
    profiles: &Profiles,
    scores: &BTreeMap<String, f64>,
    opts: &RemovalOptions,
    control_seed: u64,
) -> Result<RemovalComparison> {
    let (bipartisan, pool): (Vec<String>, Vec<String>) = community
        .iter()
        .cloned()
        .partition(|id| profiles.get(id).map(|p| p.category) == Some(Category::Bipartisan));
    let controls = degree_matched_controls(g, &bipartisan, &pool, control_seed, opts.weighted_degree)?;
    let control_ids = controls.controls();
    let (bip, ctl) = rayon::join(
        || removal_experiment(g, community, &bipartisan, scores, opts),
        || removal_experiment(g, community, &control_ids, scores, opts),
    );
    Ok(RemovalComparison {
        community_id,
        community_size: community.len(),
        bipartisan_trace: bip?,
        control_trace: ctl?,
        controls,
    })
}
