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

//! Synthetic retweet datasets with planted echo chambers.
//!
//! Two opposed blocks of partisan users retweet mostly inside their own
//! block; bridge users tweet on both sides and exchange retweets with both
//! blocks; neutral users tweet not-sure content. The generator emits the
//! same files the ingest stage reads, plus the planted role of every user.
//!
//! Guarantees that hold for every seed:
//!
//! - every polarity triple sums to one and its argmax is the intended label;
//! - bridge users are categorised `Bipartisan` and no other user is, counting
//!   retweets (which inherit the polarity of the retweeted tweet); extra
//!   original tweets are appended to a user when needed to keep this true;
//! - identical parameters produce identical output.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::ingest::{self, PolarityTriple, TweetRecord};
use crate::polarity::{categorize_user, Category, LabelCounts, PolarityLabel};
use crate::{Error, Result};

/// Log-scale engagement multipliers per planted role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngagementShift {
    pub pro_russia: f64,
    pub pro_ukraine: f64,
    pub bridge: f64,
    pub neutral: f64,
}

impl Default for EngagementShift {
    fn default() -> Self {
        EngagementShift {
            pro_russia: 0.0,
            pro_ukraine: 0.5,
            bridge: 1.0,
            neutral: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub n_per_block: usize,
    pub n_bridges: usize,
    pub n_neutral: usize,
    /// Retweet-edge probability between two users of the same block.
    pub p_intra: f64,
    /// Retweet-edge probability between users of opposite blocks.
    pub p_inter: f64,
    /// Retweet-edge probability between a bridge and any block or bridge user.
    pub p_bridge: f64,
    /// Retweet-edge probability between a neutral user and anyone.
    pub p_neutral: f64,
    /// Success probability of the geometric retweet multiplicity (mean 1/q).
    pub weight_law: f64,
    /// Mean absolute tweet score of partisan content.
    pub polarity_center: f64,
    pub polarity_noise: f64,
    pub min_tweets_per_user: usize,
    pub max_tweets_per_user: usize,
    /// Pareto shape of the original-tweet count; smaller is heavier.
    pub tweets_per_user_tail: f64,
    /// Probability that a partisan retweeter of a bridge picks a bridge
    /// tweet of its own side.
    pub bridge_content_preference: f64,
    pub engagement_shift: EngagementShift,
    /// Expected retweets per follower per original tweet.
    pub engagement_rate: f64,
    /// Expected likes per expected retweet.
    pub like_ratio: f64,
    pub zero_follower_share: f64,
    pub verified_share: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_per_block: 1500,
            n_bridges: 150,
            n_neutral: 300,
            p_intra: 0.004,
            p_inter: 0.0002,
            p_bridge: 0.002,
            p_neutral: 0.001,
            weight_law: 0.6,
            polarity_center: 0.8,
            polarity_noise: 0.1,
            min_tweets_per_user: 5,
            max_tweets_per_user: 200,
            tweets_per_user_tail: 2.0,
            bridge_content_preference: 0.75,
            engagement_shift: EngagementShift::default(),
            engagement_rate: 0.01,
            like_ratio: 3.0,
            zero_follower_share: 0.02,
            verified_share: 0.02,
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let params: SynthParams = toml::from_str(&text)
            .map_err(|e| Error::parse(path.display().to_string(), e))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("params serialise")
    }

    /// True when the blocks are denser inside than across.
    pub fn is_echo_chamber(&self) -> bool {
        self.p_intra > self.p_inter
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("p_intra", self.p_intra),
            ("p_inter", self.p_inter),
            ("p_bridge", self.p_bridge),
            ("p_neutral", self.p_neutral),
            ("bridge_content_preference", self.bridge_content_preference),
            ("zero_follower_share", self.zero_follower_share),
            ("verified_share", self.verified_share),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} = {p} is not a probability")));
            }
        }
        if self.n_per_block == 0 {
            return Err(Error::domain("n_per_block must be positive"));
        }
        if !(self.weight_law > 0.0 && self.weight_law <= 1.0) {
            return Err(Error::domain("weight_law must lie in (0, 1]"));
        }
        if !(self.polarity_center > 0.0 && self.polarity_center <= 1.0) {
            return Err(Error::domain("polarity_center must lie in (0, 1]"));
        }
        if !(self.polarity_noise >= 0.0 && self.polarity_noise.is_finite()) {
            return Err(Error::domain("polarity_noise must be a nonnegative number"));
        }
        if self.min_tweets_per_user == 0 || self.max_tweets_per_user < self.min_tweets_per_user {
            return Err(Error::domain("tweet count bounds must satisfy 1 <= min <= max"));
        }
        if self.n_bridges > 0 && self.min_tweets_per_user < BRIDGE_CYCLE.len() {
            return Err(Error::domain(format!(
                "bridge users need at least {} tweets to guarantee 20% on each side, min_tweets_per_user = {}",
                BRIDGE_CYCLE.len(),
                self.min_tweets_per_user
            )));
        }
        if self.tweets_per_user_tail.is_nan() || self.tweets_per_user_tail <= 0.0 {
            return Err(Error::domain("tweets_per_user_tail must be positive"));
        }
        if !(self.engagement_rate >= 0.0 && self.like_ratio >= 0.0) {
            return Err(Error::domain("engagement rates must be nonnegative"));
        }
        Ok(())
    }
}

/// Label pattern of a bridge user's original tweets.
const BRIDGE_CYCLE: [PolarityLabel; 5] = [
    PolarityLabel::ProRussia,
    PolarityLabel::ProUkraine,
    PolarityLabel::NotSure,
    PolarityLabel::ProRussia,
    PolarityLabel::ProUkraine,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    ProRussiaBlock,
    ProUkraineBlock,
    Bridge,
    Neutral,
}

impl Role {
    fn side(self) -> Option<PolarityLabel> {
        match self {
            Role::ProRussiaBlock => Some(PolarityLabel::ProRussia),
            Role::ProUkraineBlock => Some(PolarityLabel::ProUkraine),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: SynthParams,
    pub roles: BTreeMap<String, Role>,
    /// Planted retweet edges `(retweetee, retweeter)` by role pair.
    pub edges_by_roles: BTreeMap<String, usize>,
    /// Original tweets appended to keep the category guarantees.
    pub top_up_tweets: usize,
}

impl GroundTruth {
    pub fn members(&self, role: Role) -> impl Iterator<Item = &str> {
        self.roles
            .iter()
            .filter(move |(_, r)| **r == role)
            .map(|(u, _)| u.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub tweets: Vec<TweetRecord>,
    pub probs: BTreeMap<String, PolarityTriple>,
    pub truth: GroundTruth,
}

struct User {
    id: String,
    role: Role,
    followers: u64,
    verified: bool,
    /// Mean absolute score of this user's partisan tweets.
    strength: f64,
    originals: Vec<usize>,
    counts: LabelCounts,
}

struct Original {
    label: PolarityLabel,
}

struct Builder<'a> {
    params: &'a SynthParams,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    tweets: Vec<TweetRecord>,
    probs: BTreeMap<String, PolarityTriple>,
    originals: Vec<Original>,
}

impl Builder<'_> {
    fn gauss(&mut self) -> f64 {
        self.noise.sample(&mut self.rng)
    }

    /// Gamma-Poisson (negative binomial) count with the given mean.
    fn overdispersed(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let lambda = Gamma::new(2.0, mean / 2.0)
            .expect("positive shape and scale")
            .sample(&mut self.rng);
        if lambda <= 0.0 {
            return 0;
        }
        Poisson::new(lambda).expect("positive rate").sample(&mut self.rng) as u64
    }

    fn score_for(&mut self, label: PolarityLabel, strength: f64) -> f64 {
        let p = self.params;
        match label {
            PolarityLabel::NotSure => (p.polarity_noise * self.gauss()).clamp(-0.3, 0.3),
            side => {
                let magnitude = (strength + 0.5 * p.polarity_noise * self.gauss()).clamp(0.05, 1.0);
                magnitude * side.value() as f64
            }
        }
    }

    /// Triple with `p_ukraine − p_russia = score` and argmax `label`.
    fn triple_for(&mut self, label: PolarityLabel, score: f64) -> PolarityTriple {
        let s = score.abs();
        let (low, high) = match label {
            PolarityLabel::NotSure => (0.0, (1.0 - 2.0 * s) / 3.0),
            _ => ((1.0 - 2.0 * s).max(0.0) / 3.0, (1.0 - s) / 2.0),
        };
        let u: f64 = self.rng.random();
        let x = match label {
            PolarityLabel::NotSure => high * 0.8 * u,
            _ => low + (high - low) * (0.1 + 0.8 * u),
        };
        let (p_minor, p_major) = (x, s + x);
        let (p_russia, p_ukraine) = if score >= 0.0 {
            (p_minor, p_major)
        } else {
            (p_major, p_minor)
        };
        let p_notsure = (1.0 - p_russia - p_ukraine).max(0.0);
        PolarityTriple {
            p_russia,
            p_notsure,
            p_ukraine,
        }
    }

    fn text_for(label: PolarityLabel, n: usize) -> String {
        match label {
            PolarityLabel::ProRussia => format!("Russia has every right to act #IStandwithRussia note {n}"),
            PolarityLabel::ProUkraine => format!("Stand with Ukraine against the invasion #StopRussia note {n}"),
            PolarityLabel::NotSure => format!("Reading more news about Russia and Ukraine today note {n}"),
        }
    }

    fn shift(&self, role: Role) -> f64 {
        let s = &self.params.engagement_shift;
        match role {
            Role::ProRussiaBlock => s.pro_russia,
            Role::ProUkraineBlock => s.pro_ukraine,
            Role::Bridge => s.bridge,
            Role::Neutral => s.neutral,
        }
    }

    fn add_original(&mut self, user: &mut User, label: PolarityLabel) {
        let n = self.originals.len();
        let score = self.score_for(label, user.strength);
        let triple = self.triple_for(label, score);
        let mean = user.followers.max(1) as f64 * self.params.engagement_rate * self.shift(user.role).exp();
        let retweet_count = self.overdispersed(mean);
        let like_count = self.overdispersed(mean * self.params.like_ratio);
        let id = format!("t{n:08}");
        self.probs.insert(id.clone(), triple);
        self.tweets.push(TweetRecord {
            tweet_id: id,
            author_id: user.id.clone(),
            text: Self::text_for(label, n),
            retweet_count,
            like_count,
            referenced_tweet_id: None,
            author_followers: user.followers,
            verified: user.verified,
            timestamp: None,
        });
        self.originals.push(Original { label });
        user.originals.push(n);
        user.counts.add(label);
    }

    fn original_tweet_index(&self, orig: usize) -> usize {
        // originals are pushed to `tweets` in the same order as `originals`
        orig
    }
}

/// Index positions of `0..size × 0..size'` cells hit with probability `p`,
/// by geometric skipping; cost is proportional to the number of hits.
fn sample_cells(rng: &mut ChaCha8Rng, cells: u64, p: f64, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || cells == 0 {
        return;
    }
    if p >= 1.0 {
        (0..cells).for_each(hit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut idx: i128 = -1;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        idx += 1 + skip.min(cells as f64) as i128;
        if idx >= cells as i128 {
            break;
        }
        hit(idx as u64);
    }
}

fn pair_probability(p: &SynthParams, a: Role, b: Role) -> f64 {
    use Role::*;
    match (a, b) {
        (Neutral, _) | (_, Neutral) => p.p_neutral,
        (Bridge, _) | (_, Bridge) => p.p_bridge,
        (x, y) if x == y => p.p_intra,
        _ => p.p_inter,
    }
}

/// Generates a dataset. Fully determined by `params` (including the seed).
pub fn generate(params: &SynthParams) -> Result<SynthDataset> {
    params.validate()?;
    let p = params;
    let mut b = Builder {
        params: p,
        rng: ChaCha8Rng::seed_from_u64(p.seed),
        noise: Normal::new(0.0, 1.0).expect("unit normal"),
        tweets: Vec::new(),
        probs: BTreeMap::new(),
        originals: Vec::new(),
    };

    let groups: [(Role, usize); 4] = [
        (Role::ProRussiaBlock, p.n_per_block),
        (Role::ProUkraineBlock, p.n_per_block),
        (Role::Bridge, p.n_bridges),
        (Role::Neutral, p.n_neutral),
    ];
    let total_users: usize = groups.iter().map(|g| g.1).sum();
    let width = total_users.to_string().len().max(6);
    let mut users: Vec<User> = Vec::with_capacity(total_users);
    let mut ranges = Vec::new();
    for &(role, size) in &groups {
        let start = users.len();
        for _ in 0..size {
            let idx = users.len();
            let followers = if b.rng.random::<f64>() < p.zero_follower_share {
                0
            } else {
                (5.0 + 1.5 * b.gauss()).exp().round() as u64
            };
            let strength = (p.polarity_center + p.polarity_noise * b.gauss()).clamp(0.05, 1.0);
            users.push(User {
                id: format!("u{idx:0width$}"),
                role,
                followers,
                verified: b.rng.random::<f64>() < p.verified_share,
                strength,
                originals: Vec::new(),
                counts: LabelCounts::default(),
            });
        }
        ranges.push((role, start..users.len()));
    }

    // original tweets
    for u in users.iter_mut() {
        let tail: f64 = b.rng.random::<f64>();
        let extra = p.min_tweets_per_user as f64 * ((1.0 - tail).powf(-1.0 / p.tweets_per_user_tail) - 1.0);
        let n = (p.min_tweets_per_user + extra.floor().min(1e9) as usize).min(p.max_tweets_per_user);
        let offset = b.rng.random_range(0..BRIDGE_CYCLE.len());
        for k in 0..n {
            let label = match u.role {
                Role::Bridge => BRIDGE_CYCLE[(k + offset) % BRIDGE_CYCLE.len()],
                Role::Neutral => PolarityLabel::NotSure,
                role => {
                    if b.rng.random::<f64>() < 0.85 {
                        role.side().expect("block role")
                    } else {
                        PolarityLabel::NotSure
                    }
                }
            };
            b.add_original(u, label);
        }
    }

    // retweet edges (source = retweetee, target = retweeter)
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    let mut edges_by_roles = BTreeMap::new();
    let geo_log = (1.0 - p.weight_law).ln();
    for (src_role, src) in &ranges {
        for (dst_role, dst) in &ranges {
            let prob = pair_probability(p, *src_role, *dst_role);
            let width = dst.len() as u64;
            let cells = src.len() as u64 * width;
            let mut found = Vec::new();
            sample_cells(&mut b.rng, cells, prob, |c| {
                let s = src.start + (c / width) as usize;
                let d = dst.start + (c % width) as usize;
                if s != d {
                    found.push((s, d));
                }
            });
            let key = format!("{src_role:?}->{dst_role:?}");
            *edges_by_roles.entry(key).or_insert(0) += found.len();
            for (s, d) in found {
                let w = if p.weight_law >= 1.0 {
                    1
                } else {
                    let u: f64 = b.rng.random();
                    1 + ((1.0 - u).ln() / geo_log).floor() as u64
                };
                edges.push((s, d, w));
            }
        }
    }

    // retweet records
    let mut retweets: Vec<TweetRecord> = Vec::new();
    for &(s, d, w) in &edges {
        for _ in 0..w {
            let source = &users[s];
            let retweeter_side = users[d].role.side();
            let preferred: Vec<usize> = match (source.role, retweeter_side) {
                (Role::Bridge, Some(side)) if b.rng.random::<f64>() < p.bridge_content_preference => source
                    .originals
                    .iter()
                    .copied()
                    .filter(|&o| b.originals[o].label == side)
                    .collect(),
                _ => Vec::new(),
            };
            let pool = if preferred.is_empty() {
                &source.originals
            } else {
                &preferred
            };
            let orig = pool[b.rng.random_range(0..pool.len())];
            let label = b.originals[orig].label;
            let src_tweet = &b.tweets[b.original_tweet_index(orig)];
            let id = format!("r{:08}", retweets.len());
            let triple = b.probs[&src_tweet.tweet_id];
            let record = TweetRecord {
                tweet_id: id.clone(),
                author_id: users[d].id.clone(),
                text: format!("RT @{}: {}", source.id, src_tweet.text),
                retweet_count: 0,
                like_count: 0,
                referenced_tweet_id: Some(src_tweet.tweet_id.clone()),
                author_followers: users[d].followers,
                verified: users[d].verified,
                timestamp: None,
            };
            b.probs.insert(id, triple);
            retweets.push(record);
            users[d].counts.add(label);
        }
    }

    // keep the category guarantees despite retweeted content
    let mut top_up_tweets = 0;
    for u in users.iter_mut() {
        loop {
            let c = u.counts;
            let total = c.total();
            let need = match u.role {
                Role::Bridge if 5 * c.russia < total => Some(PolarityLabel::ProRussia),
                Role::Bridge if 5 * c.ukraine < total => Some(PolarityLabel::ProUkraine),
                Role::ProRussiaBlock if 5 * c.ukraine >= total => Some(PolarityLabel::ProRussia),
                Role::ProUkraineBlock if 5 * c.russia >= total => Some(PolarityLabel::ProUkraine),
                Role::Neutral if categorize_user(c) == Category::Bipartisan => Some(PolarityLabel::NotSure),
                _ => None,
            };
            match need {
                Some(label) => {
                    b.add_original(u, label);
                    top_up_tweets += 1;
                }
                None => break,
            }
        }
    }

    let mut tweets = b.tweets;
    tweets.extend(retweets);
    let roles = users.iter().map(|u| (u.id.clone(), u.role)).collect();
    Ok(SynthDataset {
        tweets,
        probs: b.probs,
        truth: GroundTruth {
            params: params.clone(),
            roles,
            edges_by_roles,
            top_up_tweets,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub name: String,
    pub size: usize,
    pub polarity_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub blocks: Vec<BlockSummary>,
    pub n_bridges: usize,
    pub n_neutral: usize,
    pub expected_bipartisan: usize,
    /// Expected share of a block user's retweet edges that stay in its
    /// block, from the planted probabilities.
    pub expected_intra_share: f64,
    pub planted_edges: usize,
    pub top_up_tweets: usize,
}

/// Summarises the planted structure.
pub fn describe(truth: &GroundTruth) -> SynthSummary {
    let p = &truth.params;
    let count = |role| truth.roles.values().filter(|r| **r == role).count();
    let n = p.n_per_block as f64;
    let intra = p.p_intra * (n - 1.0);
    let other = p.p_inter * n + p.p_bridge * p.n_bridges as f64 + p.p_neutral * p.n_neutral as f64;
    let expected_intra_share = if intra + other > 0.0 { intra / (intra + other) } else { 0.0 };
    SynthSummary {
        blocks: vec![
            BlockSummary {
                name: "pro-Russia".into(),
                size: count(Role::ProRussiaBlock),
                polarity_center: -p.polarity_center,
            },
            BlockSummary {
                name: "pro-Ukraine".into(),
                size: count(Role::ProUkraineBlock),
                polarity_center: p.polarity_center,
            },
        ],
        n_bridges: count(Role::Bridge),
        n_neutral: count(Role::Neutral),
        expected_bipartisan: count(Role::Bridge),
        expected_intra_share,
        planted_edges: truth.edges_by_roles.values().sum(),
        top_up_tweets: truth.top_up_tweets,
    }
}

#[derive(Serialize)]
struct RoleRow<'a> {
    user_id: &'a str,
    role: Role,
}

pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const PROBS_FILE: &str = "probs.jsonl";
pub const TRUTH_FILE: &str = "truth.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `tweets.jsonl`, `probs.jsonl`, `truth.csv` and `summary.json`.
pub fn write_dataset(data: &SynthDataset, dir: &Path) -> Result<()> {
    use crate::io::{write_atomic, write_csv, write_json};
    write_atomic(&dir.join(TWEETS_FILE), ingest::tweets_to_jsonl(&data.tweets).as_bytes())?;
    write_atomic(&dir.join(PROBS_FILE), ingest::probs_to_jsonl(&data.probs).as_bytes())?;
    write_csv(
        &dir.join(TRUTH_FILE),
        data.truth.roles.iter().map(|(u, r)| RoleRow { user_id: u, role: *r }),
    )?;
    write_json(&dir.join(SUMMARY_FILE), &describe(&data.truth))
}
