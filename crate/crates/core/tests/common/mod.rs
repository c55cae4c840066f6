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

//! Shared helpers for the integration tests: a straightforward reference
//! implementation of the rank tests, and the synth-to-graph path.

#![allow(dead_code)]

use echoscope_core::netgraph::{self, RetweetGraph};
use echoscope_core::polarity::{self, Profiles};
use echoscope_core::synth::{self, SynthDataset, SynthParams};
use echoscope_core::ingest;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Mid-rank of every pooled value by direct counting.
pub fn reference_ranks(groups: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&v| {
                    let below = pooled.iter().filter(|&&w| w < v).count() as f64;
                    let equal = pooled.iter().filter(|&&w| w == v).count() as f64;
                    below + (equal + 1.0) / 2.0
                })
                .collect()
        })
        .collect()
}

/// `Σ (t³ − t)` over tie groups.
pub fn tie_sum(groups: &[Vec<f64>]) -> f64 {
    let mut pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        total += t * t * t - t;
        i = j;
    }
    total
}

/// Textbook form: `H = [12/(N(N+1)) Σ R²/n − 3(N+1)] / (1 − Σ(t³−t)/(N³−N))`.
pub fn reference_kruskal(groups: &[Vec<f64>]) -> (f64, f64) {
    let ranks = reference_ranks(groups);
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let raw: f64 = ranks
        .iter()
        .map(|r| r.iter().sum::<f64>().powi(2) / r.len() as f64)
        .sum::<f64>()
        * 12.0
        / (n * (n + 1.0))
        - 3.0 * (n + 1.0);
    let h = raw / (1.0 - tie_sum(groups) / (n * n * n - n));
    let df = (groups.len() - 1) as f64;
    (h, ChiSquared::new(df).unwrap().sf(h))
}

/// Dunn pairs `(i, j, z, p_raw, p_bonferroni)` for `i < j`.
pub fn reference_dunn(groups: &[Vec<f64>]) -> Vec<(usize, usize, f64, f64, f64)> {
    let ranks = reference_ranks(groups);
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let means: Vec<f64> = ranks.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
    let k = groups.len();
    let m = (k * (k - 1) / 2) as f64;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let var = (n * (n + 1.0) / 12.0 - tie_sum(groups) / (12.0 * (n - 1.0)))
                * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64);
            let z = (means[i] - means[j]) / var.sqrt();
            let p = 2.0 * normal.sf(z.abs());
            out.push((i, j, z, p, (p * m).min(1.0)));
        }
    }
    out
}

pub struct Prepared {
    pub data: SynthDataset,
    pub full: RetweetGraph,
    pub active: RetweetGraph,
    pub profiles: Profiles,
}

/// Synth dataset through join, profiling, graph build and activity filter.
pub fn prepare(params: &SynthParams) -> Prepared {
    let data = synth::generate(params).unwrap();
    let joined = ingest::join_polarity(data.tweets.clone(), &data.probs).unwrap();
    assert_eq!(joined.unmatched, 0);
    let profiles = polarity::profile_users(&joined.pairs);
    let (full, _) = netgraph::build_graph(&data.tweets, &netgraph::tweet_authors(&data.tweets));
    let active = netgraph::filter_active(&full, 2);
    Prepared {
        data,
        full,
        active,
        profiles,
    }
}
