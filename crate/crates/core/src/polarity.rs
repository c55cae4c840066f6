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

//! Tweet polarity, user polarity and user categories.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingest::{PolarityTriple, PolarizedTweet};
use crate::{Error, Result};

/// Discrete stance label with its fixed numeric encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolarityLabel {
    ProRussia = -1,
    NotSure = 0,
    ProUkraine = 1,
}

impl PolarityLabel {
    pub const ALL: [PolarityLabel; 3] = [
        PolarityLabel::ProRussia,
        PolarityLabel::NotSure,
        PolarityLabel::ProUkraine,
    ];

    pub fn value(self) -> i8 {
        self as i8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Bipartisan,
    ProRussiaPartisan,
    ProUkrainePartisan,
    NotSure,
    Unclassified,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Bipartisan,
        Category::ProRussiaPartisan,
        Category::ProUkrainePartisan,
        Category::NotSure,
        Category::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Bipartisan => "Bipartisan",
            Category::ProRussiaPartisan => "ProRussiaPartisan",
            Category::ProUkrainePartisan => "ProUkrainePartisan",
            Category::NotSure => "NotSure",
            Category::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// s_t = Σ_l p_l·l = p_ukraine − p_russia.
pub fn tweet_score(p: &PolarityTriple) -> f64 {
    p.p_ukraine - p.p_russia
}

/// Argmax label. Exact ties go to `NotSure`, then to `ProRussia`.
pub fn tweet_label(p: &PolarityTriple) -> PolarityLabel {
    let best = p.p_russia.max(p.p_notsure).max(p.p_ukraine);
    if p.p_notsure == best {
        PolarityLabel::NotSure
    } else if p.p_russia == best {
        PolarityLabel::ProRussia
    } else {
        PolarityLabel::ProUkraine
    }
}

/// Arithmetic mean of tweet scores.
pub fn user_score(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::domain("user_score of an empty sequence"));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Per-label tweet counts of one user.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelCounts {
    pub russia: u64,
    pub notsure: u64,
    pub ukraine: u64,
}

impl LabelCounts {
    /// Rejects negative counts.
    pub fn new(russia: i64, notsure: i64, ukraine: i64) -> Result<Self> {
        let conv = |v: i64, name: &str| {
            u64::try_from(v).map_err(|_| Error::domain(format!("negative {name} count {v}")))
        };
        Ok(LabelCounts {
            russia: conv(russia, "pro-Russia")?,
            notsure: conv(notsure, "not-sure")?,
            ukraine: conv(ukraine, "pro-Ukraine")?,
        })
    }

    pub fn total(&self) -> u64 {
        self.russia + self.notsure + self.ukraine
    }

    pub fn add(&mut self, label: PolarityLabel) {
        match label {
            PolarityLabel::ProRussia => self.russia += 1,
            PolarityLabel::NotSure => self.notsure += 1,
            PolarityLabel::ProUkraine => self.ukraine += 1,
        }
    }
}

/// Minimum share of a user's tweets on one side, held as an exact ratio so
/// boundary cases such as 3/15 compare without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareThreshold {
    num: u64,
    den: u64,
}

impl ShareThreshold {
    /// 20 %.
    pub const DEFAULT: ShareThreshold = ShareThreshold { num: 1, den: 5 };

    /// Converts a fraction in (0, 1] to a ratio with denominator 10^6.
    pub fn from_fraction(share: f64) -> Result<Self> {
        if !(share > 0.0 && share <= 1.0) {
            return Err(Error::domain(format!("share threshold {share} outside (0, 1]")));
        }
        const DEN: u64 = 1_000_000;
        let num = (share * DEN as f64).round() as u64;
        let g = gcd(num, DEN);
        Ok(ShareThreshold {
            num: num / g,
            den: DEN / g,
        })
    }

    pub fn as_fraction(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn reached(&self, count: u64, total: u64) -> bool {
        u128::from(count) * u128::from(self.den) >= u128::from(self.num) * u128::from(total)
    }
}

impl Default for ShareThreshold {
    fn default() -> Self {
        Self::DEFAULT
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Categorises a user at the default 20 % threshold.
pub fn categorize_user(counts: LabelCounts) -> Category {
    categorize_with(counts, ShareThreshold::DEFAULT)
}

/// Users with at most one tweet are `Unclassified`. Otherwise a user whose
/// pro-Russia and pro-Ukraine shares both reach the threshold is
/// `Bipartisan`; if only one side reaches it the user is partisan for that
/// side; if neither does the user is `NotSure`.
pub fn categorize_with(counts: LabelCounts, threshold: ShareThreshold) -> Category {
    let total = counts.total();
    if total <= 1 {
        return Category::Unclassified;
    }
    match (
        threshold.reached(counts.russia, total),
        threshold.reached(counts.ukraine, total),
    ) {
        (true, true) => Category::Bipartisan,
        (true, false) => Category::ProRussiaPartisan,
        (false, true) => Category::ProUkrainePartisan,
        (false, false) => Category::NotSure,
    }
}

/// Per-user aggregate. Field order matches the profiles CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub g_u: f64,
    pub n_tweets: u64,
    pub count_russia: u64,
    pub count_notsure: u64,
    pub count_ukraine: u64,
    pub followers: u64,
    pub verified: bool,
    pub category: Category,
}

impl UserProfile {
    pub fn counts(&self) -> LabelCounts {
        LabelCounts {
            russia: self.count_russia,
            notsure: self.count_notsure,
            ukraine: self.count_ukraine,
        }
    }
}

pub type Profiles = BTreeMap<String, UserProfile>;

pub fn profile_users(pairs: &[PolarizedTweet]) -> Profiles {
    profile_users_with(pairs, ShareThreshold::DEFAULT)
}

/// Groups tweets by author. Followers and the verified flag come from the
/// author's latest record: greatest timestamp, with later input position
/// breaking ties and records without a timestamp ranking lowest.
pub fn profile_users_with(pairs: &[PolarizedTweet], threshold: ShareThreshold) -> Profiles {
    struct Acc<'a> {
        sum: f64,
        counts: LabelCounts,
        latest: &'a PolarizedTweet,
    }
    let mut acc: BTreeMap<&str, Acc> = BTreeMap::new();
    for pair in pairs {
        let score = tweet_score(&pair.polarity);
        let label = tweet_label(&pair.polarity);
        let entry = acc.entry(pair.tweet.author_id.as_str()).or_insert(Acc {
            sum: 0.0,
            counts: LabelCounts::default(),
            latest: pair,
        });
        entry.sum += score;
        entry.counts.add(label);
        if pair.tweet.timestamp >= entry.latest.tweet.timestamp {
            entry.latest = pair;
        }
    }
    acc.into_iter()
        .map(|(user, a)| {
            let n = a.counts.total();
            let profile = UserProfile {
                user_id: user.to_string(),
                g_u: (a.sum / n as f64).clamp(-1.0, 1.0),
                n_tweets: n,
                count_russia: a.counts.russia,
                count_notsure: a.counts.notsure,
                count_ukraine: a.counts.ukraine,
                followers: a.latest.tweet.author_followers,
                verified: a.latest.tweet.verified,
                category: categorize_with(a.counts, threshold),
            };
            (user.to_string(), profile)
        })
        .collect()
}

/// Extracts `user_id → g_u`.
pub fn score_map(profiles: &Profiles) -> BTreeMap<String, f64> {
    profiles
        .iter()
        .map(|(id, p)| (id.clone(), p.g_u))
        .collect()
}

pub fn write_profiles(path: &Path, profiles: &Profiles) -> Result<()> {
    crate::io::write_csv(path, profiles.values())
}

pub fn read_profiles(path: &Path) -> Result<Profiles> {
    let rows: Vec<UserProfile> = crate::io::read_csv(path)?;
    let mut out = Profiles::new();
    for p in rows {
        if p.counts().total() != p.n_tweets || !(-1.0..=1.0).contains(&p.g_u) {
            return Err(Error::validation(format!(
                "profile {} violates count or score invariants",
                p.user_id
            )));
        }
        if out.insert(p.user_id.clone(), p).is_some() {
            return Err(Error::validation("duplicate user_id in profiles"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetScoreRow {
    pub tweet_id: String,
    pub author_id: String,
    pub score: f64,
    pub label: PolarityLabel,
}

pub fn tweet_score_rows(pairs: &[PolarizedTweet]) -> Vec<TweetScoreRow> {
    pairs
        .iter()
        .map(|p| TweetScoreRow {
            tweet_id: p.tweet.tweet_id.clone(),
            author_id: p.tweet.author_id.clone(),
            score: tweet_score(&p.polarity),
            label: tweet_label(&p.polarity),
        })
        .collect()
}
