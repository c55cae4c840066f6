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

//! Weighted directed retweet graph.
//!
//! Edge `(i → j)` with weight `w` means user `i` was retweeted `w` times by
//! user `j`. Written as a matrix, `A[i][j] = weight(j → i)`, so the weighted
//! in-degree `k_i = Σ_j A[i][j]` counts the retweets user `i` made. The
//! matrix is never materialised: the graph keeps sorted adjacency lists in
//! both directions and cached weighted degrees.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RetweetGraph {
    ids: Vec<String>,
    index: HashMap<String, u32>,
    /// `out_adj[i]` holds `(j, w)` for edges `i → j` (users who retweeted i).
    out_adj: Vec<Vec<(u32, u64)>>,
    /// `in_adj[i]` holds `(j, w)` for edges `j → i` (users i retweeted).
    in_adj: Vec<Vec<(u32, u64)>>,
    in_w: Vec<u64>,
    out_w: Vec<u64>,
    edge_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degrees {
    pub weighted_in: u64,
    pub weighted_out: u64,
    pub unweighted_total: u64,
}

impl RetweetGraph {
    /// Builds a graph from a node list and `(src, dst, weight)` triples.
    /// Repeated pairs accumulate; endpoints missing from `nodes` are added.
    /// Self-loops and zero weights are rejected.
    pub fn from_edges<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String, u64)>,
    {
        let edges: Vec<(String, String, u64)> = edges.into_iter().collect();
        let mut names: Vec<String> = nodes.into_iter().collect();
        for (s, d, _) in &edges {
            names.push(s.clone());
            names.push(d.clone());
        }
        names.sort_unstable();
        names.dedup();
        let index: HashMap<String, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        let mut acc: HashMap<(u32, u32), u64> = HashMap::with_capacity(edges.len());
        for (s, d, w) in edges {
            if s == d {
                return Err(Error::validation(format!("self-loop on {s}")));
            }
            if w == 0 {
                return Err(Error::validation(format!("zero weight on edge {s} -> {d}")));
            }
            *acc.entry((index[&s], index[&d])).or_insert(0) += w;
        }
        Ok(Self::assemble(names, index, acc.into_iter().collect()))
    }

    fn assemble(ids: Vec<String>, index: HashMap<String, u32>, mut edges: Vec<((u32, u32), u64)>) -> Self {
        edges.sort_unstable();
        let n = ids.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut in_w = vec![0u64; n];
        let mut out_w = vec![0u64; n];
        for &((s, d), w) in &edges {
            out_adj[s as usize].push((d, w));
            in_adj[d as usize].push((s, w));
            out_w[s as usize] += w;
            in_w[d as usize] += w;
        }
        // in_adj rows were filled in source order, which is already sorted
        RetweetGraph {
            ids,
            index,
            out_adj,
            in_adj,
            in_w,
            out_w,
            edge_count: edges.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn total_weight(&self) -> u64 {
        self.out_w.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Node names in index order (sorted).
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.ids[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i as usize)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::domain(format!("unknown node {id}")))
    }

    /// Edges `idx → j` as `(j, weight)`, sorted by `j`.
    pub fn out_edges(&self, idx: usize) -> &[(u32, u64)] {
        &self.out_adj[idx]
    }

    /// Edges `j → idx` as `(j, weight)`, sorted by `j`.
    pub fn in_edges(&self, idx: usize) -> &[(u32, u64)] {
        &self.in_adj[idx]
    }

    pub fn weighted_in(&self, idx: usize) -> u64 {
        self.in_w[idx]
    }

    pub fn weighted_out(&self, idx: usize) -> u64 {
        self.out_w[idx]
    }

    /// In-edge count plus out-edge count, or the weighted sums when `weighted`.
    pub fn total_degree(&self, idx: usize, weighted: bool) -> u64 {
        if weighted {
            self.in_w[idx] + self.out_w[idx]
        } else {
            (self.in_adj[idx].len() + self.out_adj[idx].len()) as u64
        }
    }

    /// All edges as `(src, dst, weight)` in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().map(move |&(d, w)| (s, d as usize, w)))
    }

    pub fn edge_weight(&self, src: &str, dst: &str) -> Option<u64> {
        let s = self.index_of(src)?;
        let d = self.index_of(dst)? as u32;
        let row = &self.out_adj[s];
        row.binary_search_by_key(&d, |&(j, _)| j)
            .ok()
            .map(|k| row[k].1)
    }

    /// Users `id` retweeted (retweetees): `{j : j → id}`.
    pub fn predecessors(&self, id: &str) -> Result<BTreeSet<&str>> {
        let i = self.require(id)?;
        Ok(self.in_adj[i].iter().map(|&(j, _)| self.id(j as usize)).collect())
    }

    /// Users who retweeted `id` (retweeters): `{j : id → j}`.
    pub fn successors(&self, id: &str) -> Result<BTreeSet<&str>> {
        let i = self.require(id)?;
        Ok(self.out_adj[i].iter().map(|&(j, _)| self.id(j as usize)).collect())
    }

    pub fn degrees(&self, id: &str) -> Result<Degrees> {
        let i = self.require(id)?;
        Ok(Degrees {
            weighted_in: self.in_w[i],
            weighted_out: self.out_w[i],
            unweighted_total: self.total_degree(i, false),
        })
    }

    /// Subgraph induced by the nodes with `keep[idx] == true`.
    pub fn induced_subgraph(&self, keep: &[bool]) -> RetweetGraph {
        assert_eq!(keep.len(), self.node_count(), "mask length must match node count");
        let mut remap = vec![u32::MAX; self.node_count()];
        let mut ids = Vec::new();
        for (i, id) in self.ids.iter().enumerate() {
            if keep[i] {
                remap[i] = ids.len() as u32;
                ids.push(id.clone());
            }
        }
        let edges: Vec<((u32, u32), u64)> = self
            .edges()
            .filter(|&(s, d, _)| keep[s] && keep[d])
            .map(|(s, d, w)| ((remap[s], remap[d]), w))
            .collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Self::assemble(ids, index, edges)
    }

    pub fn subgraph_of<'a>(&self, nodes: impl IntoIterator<Item = &'a str>) -> RetweetGraph {
        let mut keep = vec![false; self.node_count()];
        for n in nodes {
            if let Some(i) = self.index_of(n) {
                keep[i] = true;
            }
        }
        self.induced_subgraph(&keep)
    }

    /// Recomputes adjacency-derived quantities and compares them with the
    /// cached ones.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.node_count();
        let mut in_w = vec![0u64; n];
        let mut out_w = vec![0u64; n];
        let mut count = 0;
        for (s, d, w) in self.edges() {
            if s == d || w == 0 {
                return Err(Error::Invariant(format!("bad edge {s} -> {d} ({w})")));
            }
            out_w[s] += w;
            in_w[d] += w;
            count += 1;
        }
        let in_count: usize = self.in_adj.iter().map(Vec::len).sum();
        if in_w != self.in_w || out_w != self.out_w || count != self.edge_count || in_count != count {
            return Err(Error::Invariant("degree caches out of sync".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    /// Retweet records turned into edge weight.
    pub retweets_used: usize,
    pub self_retweets: usize,
    /// Retweets whose referenced tweet has no known author.
    pub unresolved: usize,
}

/// `tweet_id → author_id` for every record.
pub fn tweet_authors(records: &[TweetRecord]) -> HashMap<String, String> {
    records
        .iter()
        .map(|r| (r.tweet_id.clone(), r.author_id.clone()))
        .collect()
}

/// Each retweet by `j` of a tweet authored by `i ≠ j` adds one to the
/// weight of `i → j`. Every record author becomes a node.
pub fn build_graph(
    records: &[TweetRecord],
    tweet_author: &HashMap<String, String>,
) -> (RetweetGraph, BuildReport) {
    let mut report = BuildReport::default();
    let mut edges = Vec::new();
    for r in records {
        let Some(reference) = &r.referenced_tweet_id else {
            continue;
        };
        match tweet_author.get(reference) {
            None => report.unresolved += 1,
            Some(src) if *src == r.author_id => report.self_retweets += 1,
            Some(src) => {
                report.retweets_used += 1;
                edges.push((src.clone(), r.author_id.clone(), 1));
            }
        }
    }
    let nodes = records.iter().map(|r| r.author_id.clone());
    let g = RetweetGraph::from_edges(nodes, edges).expect("self-loops filtered, weights are 1");
    (g, report)
}

/// Keeps users with weighted in-degree or weighted out-degree at least
/// `min_weight`, measured once on the input graph.
pub fn filter_active(g: &RetweetGraph, min_weight: u64) -> RetweetGraph {
    let keep: Vec<bool> = (0..g.node_count())
        .map(|i| g.weighted_in(i) >= min_weight || g.weighted_out(i) >= min_weight)
        .collect();
    g.induced_subgraph(&keep)
}

/// `u_i^N = (1/k_i) Σ_j A_ij g_j`: the retweet-weighted mean polarity of the
/// users `i` retweeted. Nodes with fewer than `min_in_neighbors` distinct
/// retweetees (and always nodes with `k_i = 0`) are absent from the result.
pub fn neighborhood_polarity(
    g: &RetweetGraph,
    scores: &BTreeMap<String, f64>,
    min_in_neighbors: usize,
) -> Result<BTreeMap<String, f64>> {
    let by_index: Vec<Option<f64>> = g.ids().iter().map(|id| scores.get(id).copied()).collect();
    let min_in = min_in_neighbors.max(1);
    let values: Vec<Result<Option<f64>>> = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let row = g.in_edges(i);
            if row.len() < min_in {
                return Ok(None);
            }
            let mut acc = 0.0;
            for &(j, w) in row {
                let s = by_index[j as usize].ok_or_else(|| {
                    Error::domain(format!(
                        "no polarity score for {} (retweeted by {})",
                        g.id(j as usize),
                        g.id(i)
                    ))
                })?;
                acc += w as f64 * s;
            }
            Ok(Some(acc / g.weighted_in(i) as f64))
        })
        .collect();
    let mut out = BTreeMap::new();
    for (i, v) in values.into_iter().enumerate() {
        if let Some(v) = v? {
            out.insert(g.id(i).to_string(), v);
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    src: String,
    dst: String,
    weight: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    user_id: String,
    weighted_in: u64,
    weighted_out: u64,
    in_edges: u64,
    out_edges: u64,
}

pub const EDGES_FILE: &str = "edges.csv";
pub const NODES_FILE: &str = "nodes.csv";

/// Writes `edges.csv` (src,dst,weight) and `nodes.csv` (with degrees).
pub fn write_graph(g: &RetweetGraph, dir: &Path) -> Result<()> {
    let edges = g.edges().map(|(s, d, w)| EdgeRow {
        src: g.id(s).to_string(),
        dst: g.id(d).to_string(),
        weight: w,
    });
    crate::io::write_csv(&dir.join(EDGES_FILE), edges)?;
    let nodes = (0..g.node_count()).map(|i| NodeRow {
        user_id: g.id(i).to_string(),
        weighted_in: g.weighted_in(i),
        weighted_out: g.weighted_out(i),
        in_edges: g.in_edges(i).len() as u64,
        out_edges: g.out_edges(i).len() as u64,
    });
    crate::io::write_csv(&dir.join(NODES_FILE), nodes)
}

pub fn read_graph(dir: &Path) -> Result<RetweetGraph> {
    let nodes: Vec<NodeRow> = crate::io::read_csv(&dir.join(NODES_FILE))?;
    let edges: Vec<EdgeRow> = crate::io::read_csv(&dir.join(EDGES_FILE))?;
    let mut seen = BTreeSet::new();
    for e in &edges {
        if !seen.insert((e.src.as_str(), e.dst.as_str())) {
            return Err(Error::validation(format!("duplicate edge {} -> {}", e.src, e.dst)));
        }
    }
    let known: BTreeSet<&str> = nodes.iter().map(|n| n.user_id.as_str()).collect();
    if let Some(e) = edges
        .iter()
        .find(|e| !known.contains(e.src.as_str()) || !known.contains(e.dst.as_str()))
    {
        return Err(Error::validation(format!(
            "edge {} -> {} references a node missing from {NODES_FILE}",
            e.src, e.dst
        )));
    }
    let g = RetweetGraph::from_edges(
        nodes.iter().map(|n| n.user_id.clone()),
        edges.into_iter().map(|e| (e.src, e.dst, e.weight)),
    )?;
    for n in &nodes {
        let d = g.degrees(&n.user_id)?;
        if d.weighted_in != n.weighted_in || d.weighted_out != n.weighted_out {
            return Err(Error::validation(format!(
                "node {} degree columns disagree with the edge list",
                n.user_id
            )));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn graph(edges: &[(&str, &str, u64)]) -> RetweetGraph {
        RetweetGraph::from_edges(
            Vec::new(),
            edges.iter().map(|&(a, b, w)| (s(a), s(b), w)),
        )
        .unwrap()
    }

    fn tweet(id: &str, author: &str, reference: Option<&str>) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: author.into(),
            text: String::new(),
            retweet_count: 0,
            like_count: 0,
            referenced_tweet_id: reference.map(str::to_string),
            author_followers: 0,
            verified: false,
            timestamp: None,
        }
    }

    #[test]
    fn build_counts_retweets() {
        let recs = vec![
            tweet("t1", "i", None),
            tweet("r1", "j", Some("t1")),
            tweet("r2", "j", Some("t1")),
            tweet("r3", "j", Some("t1")),
            tweet("r4", "i", Some("t1")),
            tweet("r5", "k", Some("missing")),
        ];
        let (g, report) = build_graph(&recs, &tweet_authors(&recs));
        assert_eq!(g.edge_weight("i", "j"), Some(3));
        assert_eq!(g.edge_weight("i", "i"), None);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report, BuildReport { retweets_used: 3, self_retweets: 1, unresolved: 1 });
        assert_eq!(g.node_count(), 3);
        g.check_invariants().unwrap();
    }

    #[test]
    fn build_without_retweets() {
        let recs = vec![tweet("t1", "a", None), tweet("t2", "b", None)];
        let (g, _) = build_graph(&recs, &tweet_authors(&recs));
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.ids(), ["a", "b"]);
    }

    #[test]
    fn filter_active_examples() {
        // c retweeted b once: c has out 0, in 1 -> dropped at min 2
        let g = graph(&[("a", "b", 2), ("b", "c", 1)]);
        let f = filter_active(&g, 2);
        assert!(f.contains("a") && f.contains("b") && !f.contains("c"));
        assert_eq!(f.weighted_out(f.index_of("a").unwrap()), 2);
        assert_eq!(filter_active(&g, 1), g);

        let lone = graph(&[("x", "y", 1)]);
        assert!(filter_active(&lone, 2).is_empty());
    }

    #[test]
    fn neighborhood_examples() {
        let g = graph(&[("j", "i", 3)]);
        let scores: BTreeMap<_, _> = [(s("j"), 0.5), (s("i"), -1.0)].into_iter().collect();
        let nb = neighborhood_polarity(&g, &scores, 1).unwrap();
        assert_eq!(nb.get("i"), Some(&0.5));
        assert!(!nb.contains_key("j"));

        let g = graph(&[("j1", "i", 1), ("j2", "i", 3)]);
        let scores: BTreeMap<_, _> = [(s("j1"), 1.0), (s("j2"), -1.0), (s("i"), 0.0)]
            .into_iter()
            .collect();
        let nb = neighborhood_polarity(&g, &scores, 1).unwrap();
        assert_eq!(nb["i"], -0.5);
        assert!(neighborhood_polarity(&g, &scores, 2).unwrap().contains_key("i"));
        assert!(neighborhood_polarity(&g, &scores, 3).unwrap().is_empty());

        let partial: BTreeMap<_, _> = [(s("j1"), 1.0)].into_iter().collect();
        let err = neighborhood_polarity(&g, &partial, 1).unwrap_err();
        assert!(err.to_string().contains("j2"));
    }

    #[test]
    fn neighbor_queries() {
        let g = graph(&[("a", "b", 1)]);
        assert_eq!(g.predecessors("b").unwrap(), BTreeSet::from(["a"]));
        assert_eq!(g.successors("a").unwrap(), BTreeSet::from(["b"]));
        let g = graph(&[("a", "b", 1), ("c", "b", 1)]);
        assert_eq!(g.predecessors("b").unwrap(), BTreeSet::from(["a", "c"]));
        let iso = RetweetGraph::from_edges(vec![s("z")], Vec::new()).unwrap();
        assert!(iso.predecessors("z").unwrap().is_empty());
        assert!(iso.successors("z").unwrap().is_empty());
        assert!(iso.predecessors("nope").is_err());
    }

    #[test]
    fn degree_examples() {
        let g = graph(&[("a", "b", 3), ("b", "c", 1)]);
        assert_eq!(
            g.degrees("b").unwrap(),
            Degrees { weighted_in: 3, weighted_out: 1, unweighted_total: 2 }
        );
        let iso = RetweetGraph::from_edges(vec![s("z")], Vec::new()).unwrap();
        assert_eq!(
            iso.degrees("z").unwrap(),
            Degrees { weighted_in: 0, weighted_out: 0, unweighted_total: 0 }
        );
        assert!(iso.degrees("q").is_err());

        let recs: Vec<_> = std::iter::once(tweet("t", "i", None))
            .chain((0..5).map(|k| tweet(&format!("r{k}"), "j", Some("t"))))
            .collect();
        let (g, _) = build_graph(&recs, &tweet_authors(&recs));
        let i = g.index_of("i").unwrap();
        assert_eq!(g.degrees("i").unwrap().weighted_out, 5);
        assert_eq!(g.out_edges(i).len(), 1);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(RetweetGraph::from_edges(Vec::new(), vec![(s("a"), s("a"), 1)]).is_err());
        assert!(RetweetGraph::from_edges(Vec::new(), vec![(s("a"), s("b"), 0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut g = graph(&[("a", "b", 3), ("b", "c", 1), ("c", "a", 2)]);
        g = RetweetGraph::from_edges(
            g.ids().iter().cloned().chain([s("lonely")]),
            g.edges().map(|(a, b, w)| (g.id(a).to_string(), g.id(b).to_string(), w)).collect::<Vec<_>>(),
        )
        .unwrap();
        write_graph(&g, dir.path()).unwrap();
        assert_eq!(read_graph(dir.path()).unwrap(), g);
    }

    fn arb_records() -> impl Strategy<Value = Vec<TweetRecord>> {
        proptest::collection::vec((0usize..6, proptest::option::of(0usize..30)), 1..40).prop_map(
            |rows| {
                rows.into_iter()
                    .enumerate()
                    .map(|(i, (author, r))| {
                        let reference = r.filter(|&r| r != i).map(|r| format!("t{r}"));
                        tweet(&format!("t{i}"), &format!("u{author}"), reference.as_deref())
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #[test]
        fn degree_sums_match_retweets(recs in arb_records()) {
            let (g, report) = build_graph(&recs, &tweet_authors(&recs));
            g.check_invariants().unwrap();
            let in_sum: u64 = (0..g.node_count()).map(|i| g.weighted_in(i)).sum();
            let out_sum: u64 = (0..g.node_count()).map(|i| g.weighted_out(i)).sum();
            prop_assert_eq!(in_sum, out_sum);
            prop_assert_eq!(in_sum as usize, report.retweets_used);
        }

        #[test]
        fn build_is_order_invariant(recs in arb_records(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = recs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let authors = tweet_authors(&recs);
            prop_assert_eq!(build_graph(&recs, &authors).0, build_graph(&shuffled, &authors).0);
        }

        #[test]
        fn filter_is_monotone(recs in arb_records(), w in 1u64..4) {
            let (g, _) = build_graph(&recs, &tweet_authors(&recs));
            let lo = filter_active(&g, w);
            let hi = filter_active(&g, w + 1);
            prop_assert!(hi.ids().iter().all(|id| lo.contains(id)));
            hi.check_invariants().unwrap();
        }

        #[test]
        fn neighborhood_within_neighbor_range(
            recs in arb_records(),
            raw in proptest::collection::vec(-1.0f64..1.0, 6)
        ) {
            let (g, _) = build_graph(&recs, &tweet_authors(&recs));
            let scores: BTreeMap<String, f64> =
                (0..6).map(|u| (format!("u{u}"), raw[u])).collect();
            let nb = neighborhood_polarity(&g, &scores, 1).unwrap();
            for (id, v) in nb {
                let preds = g.predecessors(&id).unwrap();
                let vals: Vec<f64> = preds.iter().map(|p| scores[*p]).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
