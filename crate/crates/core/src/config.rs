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

//! Run configuration, read from a sectioned TOML file.
//!
//! Relative input paths are resolved against the directory that holds the
//! configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::stats::Adjustment;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// JSON-lines or CSV tweet file.
    pub tweets: PathBuf,
    /// JSON-lines polarity probabilities keyed by tweet id.
    pub probs: PathBuf,
    /// `default` (built-in keywords), `none`, or a path to a keyword file.
    pub keyword_filter: String,
    /// Optional field-name schema; empty means the default names.
    pub schema: PathBuf,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            tweets: PathBuf::from("tweets.jsonl"),
            probs: PathBuf::from("probs.jsonl"),
            keyword_filter: "default".into(),
            schema: PathBuf::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Activity filter on weighted in- or out-degree.
    pub min_edge_weight: u64,
    /// Label share that counts as support for a side.
    pub bipartisan_share: f64,
    /// Smallest community reported in the community table.
    pub community_min_size: usize,
    /// Communities with `|mean polarity|` above this are polarised.
    pub polarized: f64,
    pub resolution: f64,
    /// Distinct retweetees needed for a neighbourhood polarity.
    pub min_in_neighbors: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_edge_weight: 2,
            bipartisan_share: 0.2,
            community_min_size: 10,
            polarized: 0.5,
            resolution: 0.1,
            min_in_neighbors: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub louvain: u64,
    pub controls: u64,
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Seeds {
            louvain: seed,
            controls: seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub rq1: bool,
    pub rq2: bool,
    pub rq3: bool,
    pub rq4: bool,
    pub figures: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses {
            rq1: true,
            rq2: true,
            rq3: true,
            rq4: true,
            figures: true,
        }
    }
}

impl Analyses {
    pub fn only(rq: u8) -> Self {
        Analyses {
            rq1: rq == 1,
            rq2: rq == 2,
            rq3: rq == 3,
            rq4: rq == 4,
            figures: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemovalConfig {
    pub rounds: usize,
    /// Community to dismantle; `-1` picks the largest baseline community.
    pub target_community: i64,
    /// Rank and match by weighted instead of unweighted total degree.
    pub weighted_degree: bool,
}

impl Default for RemovalConfig {
    fn default() -> Self {
        RemovalConfig {
            rounds: 10,
            target_community: -1,
            weighted_degree: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub adjustment: Adjustment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    pub output_dir: PathBuf,
    pub thresholds: Thresholds,
    pub seeds: Seeds,
    pub analyses: Analyses,
    pub removal: RemovalConfig,
    pub stats: StatsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: InputConfig::default(),
            output_dir: PathBuf::from("results"),
            thresholds: Thresholds::default(),
            seeds: Seeds::default(),
            analyses: Analyses::default(),
            removal: RemovalConfig::default(),
            stats: StatsConfig::default(),
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::validation(msg()))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::parse("run configuration", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Reads and validates a config file, resolving relative paths against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&crate::io::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if !p.as_os_str().is_empty() && p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input.tweets);
        fix(&mut self.input.probs);
        fix(&mut self.input.schema);
        fix(&mut self.output_dir);
        if !matches!(self.input.keyword_filter.as_str(), "default" | "none") {
            let mut p = PathBuf::from(&self.input.keyword_filter);
            fix(&mut p);
            self.input.keyword_filter = p.to_string_lossy().into_owned();
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        check(t.min_edge_weight >= 1, || "thresholds.min_edge_weight must be at least 1".into())?;
        check(t.bipartisan_share > 0.0 && t.bipartisan_share <= 0.5, || {
            format!("thresholds.bipartisan_share = {} must lie in (0, 0.5]", t.bipartisan_share)
        })?;
        check(t.community_min_size >= 1, || "thresholds.community_min_size must be at least 1".into())?;
        check((0.0..1.0).contains(&t.polarized), || {
            format!("thresholds.polarized = {} must lie in [0, 1)", t.polarized)
        })?;
        check(t.resolution > 0.0 && t.resolution <= 100.0, || {
            format!("thresholds.resolution = {} must lie in (0, 100]", t.resolution)
        })?;
        check(t.min_in_neighbors >= 1, || "thresholds.min_in_neighbors must be at least 1".into())?;
        check((1..=1000).contains(&self.removal.rounds), || {
            format!("removal.rounds = {} must lie in 1..=1000", self.removal.rounds)
        })?;
        check(self.removal.target_community >= -1, || {
            "removal.target_community must be -1 or a community id".into()
        })?;
        check(!self.input.keyword_filter.is_empty(), || {
            "input.keyword_filter must be `default`, `none` or a path".into()
        })?;
        Ok(())
    }
}
