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

//! Louvain community detection on the symmetrised retweet graph.
//!
//! Modularity with resolution `γ` is
//! `Q = (1/2m) Σ_ij [w_ij − γ k_i k_j / 2m] δ(c_i, c_j)`, where `γ` scales
//! the null-model term. Louvain alternates local moving (each node joins the
//! neighbouring community with the best gain, in a seeded shuffled order,
//! until a full pass moves nothing) with aggregation of communities into
//! super-nodes, and stops when a level moves no node.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netgraph::RetweetGraph;
use crate::{Error, Result};

/// Undirected weighted graph. Self-loops are kept apart from `adj`; a loop of
/// weight `w` contributes `2w` to its node's degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedGraph {
    ids: Vec<String>,
    adj: Vec<Vec<(u32, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl UndirectedGraph {
    /// Builds a graph from `(a, b, w)` index triples. Repeated pairs add up;
    /// `a == b` is a self-loop.
    pub fn from_edges(ids: Vec<String>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let n = ids.len();
        let mut acc: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let mut self_loops = vec![0.0; n];
        for (a, b, w) in edges {
            if a == b {
                self_loops[a] += w;
            } else {
                let key = (a.min(b) as u32, a.max(b) as u32);
                *acc.entry(key).or_insert(0.0) += w;
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (&(a, b), &w) in &acc {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        for row in &mut adj {
            row.sort_by_key(|&(j, _)| j);
        }
        Self::from_parts(ids, adj, self_loops)
    }

    fn from_parts(ids: Vec<String>, adj: Vec<Vec<(u32, f64)>>, self_loops: Vec<f64>) -> Self {
        let degree: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(row, s)| row.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * s)
            .collect();
        let total_weight = degree.iter().sum::<f64>() / 2.0;
        UndirectedGraph {
            ids,
            adj,
            self_loops,
            degree,
            total_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Sum of edge weights `m`, each undirected edge counted once.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops[i]
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.self_loops[a];
        }
        let row = &self.adj[a];
        row.binary_search_by_key(&(b as u32), |&(j, _)| j)
            .map_or(0.0, |k| row[k].1)
    }
}

/// Undirected weight `(i, j)` = `weight(i → j) + weight(j → i)`.
pub fn symmetrize(g: &RetweetGraph) -> UndirectedGraph {
    UndirectedGraph::from_edges(
        g.ids().to_vec(),
        g.edges().map(|(s, d, w)| (s, d, w as f64)),
    )
}

/// Resolution-scaled modularity of `labels` (one label per node index).
pub fn modularity(ug: &UndirectedGraph, labels: &[usize], resolution: f64) -> Result<f64> {
    if labels.len() != ug.node_count() {
        return Err(Error::domain(format!(
            "partition covers {} nodes, graph has {}",
            labels.len(),
            ug.node_count()
        )));
    }
    let m = ug.total_weight();
    if m <= 0.0 {
        return Err(Error::domain("modularity of a graph with no edge weight"));
    }
    let k = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for i in 0..ug.node_count() {
        let c = labels[i];
        degree[c] += ug.degree(i);
        internal[c] += ug.self_loop(i);
        for &(j, w) in ug.neighbors(i) {
            if (j as usize) > i && labels[j as usize] == c {
                internal[c] += w;
            }
        }
    }
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - resolution * (d / (2.0 * m)).powi(2))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Community {
    pub id: usize,
    /// Sorted member ids.
    pub members: Vec<String>,
    pub mean_polarity: Option<f64>,
}

impl Community {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Node → community assignment. Community ids are `0..k` ordered by
/// decreasing size, ties broken by smallest member id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommunityPartition {
    assignment: BTreeMap<String, usize>,
    communities: Vec<Community>,
}

impl CommunityPartition {
    /// Builds a partition from one arbitrary label per id.
    pub fn from_labels(ids: &[String], labels: &[usize]) -> Self {
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (id, &l) in ids.iter().zip(labels) {
            groups.entry(l).or_default().push(id.clone());
        }
        let mut members: Vec<Vec<String>> = groups
            .into_values()
            .map(|mut m| {
                m.sort();
                m
            })
            .collect();
        members.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
        let mut assignment = BTreeMap::new();
        let communities = members
            .into_iter()
            .enumerate()
            .map(|(id, members)| {
                for m in &members {
                    assignment.insert(m.clone(), id);
                }
                Community {
                    id,
                    members,
                    mean_polarity: None,
                }
            })
            .collect();
        CommunityPartition {
            assignment,
            communities,
        }
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn communities(&self) -> &[Community] {
        &self.communities
    }

    pub fn community(&self, id: usize) -> Option<&Community> {
        self.communities.iter().find(|c| c.id == id)
    }

    pub fn community_of(&self, user: &str) -> Option<usize> {
        self.assignment.get(user).copied()
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// Labels by node index of `ug`; `None` if some node is unassigned.
    pub fn labels_for(&self, ug: &UndirectedGraph) -> Option<Vec<usize>> {
        ug.ids().iter().map(|id| self.community_of(id)).collect()
    }

    /// Checks that the partition is an exact cover of `ids`.
    pub fn check_cover(&self, ids: &[String]) -> Result<()> {
        let total: usize = self.communities.iter().map(Community::size).sum();
        let covered = ids.len() == self.assignment.len()
            && total == ids.len()
            && ids.iter().all(|id| {
                self.community_of(id)
                    .and_then(|c| self.community(c))
                    .is_some_and(|c| c.members.binary_search(id).is_ok())
            });
        if covered {
            Ok(())
        } else {
            Err(Error::Invariant("partition is not an exact cover".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainOutcome {
    pub partition: CommunityPartition,
    /// Modularity of the singleton partition followed by the modularity
    /// after each level that moved at least one node. Empty when the graph
    /// has no edge weight.
    pub level_modularity: Vec<f64>,
}

impl LouvainOutcome {
    pub fn modularity(&self) -> Option<f64> {
        self.level_modularity.last().copied()
    }
}

/// Working graph of one Louvain level.
struct Level {
    adj: Vec<Vec<(u32, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, comm: &[u32], m: f64, resolution: f64) -> f64 {
        let mut internal = vec![0.0; self.len()];
        let mut tot = vec![0.0; self.len()];
        for i in 0..self.len() {
            let c = comm[i] as usize;
            tot[c] += self.degree[i];
            internal[c] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if (j as usize) > i && comm[j as usize] as usize == c {
                    internal[c] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&tot)
            .map(|(l, d)| l / m - resolution * (d / (2.0 * m)).powi(2))
            .sum()
    }

    /// Local moving phase. Returns the community of every node and whether
    /// any node moved.
    fn local_move(&self, order: &[usize], m: f64, resolution: f64) -> (Vec<u32>, bool) {
        let n = self.len();
        let mut comm: Vec<u32> = (0..n as u32).collect();
        let mut tot = self.degree.clone();
        let mut link = vec![f64::NAN; n];
        let mut touched: Vec<u32> = Vec::new();
        let scale = resolution / (2.0 * m);
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in order {
                let current = comm[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j as usize];
                    if link[c as usize].is_nan() {
                        link[c as usize] = 0.0;
                        touched.push(c);
                    }
                    link[c as usize] += w;
                }
                let k_i = self.degree[i];
                tot[current as usize] -= k_i;
                let stay_link = if link[current as usize].is_nan() {
                    0.0
                } else {
                    link[current as usize]
                };
                let mut best = current;
                let mut best_gain = stay_link - scale * tot[current as usize] * k_i;
                for &c in &touched {
                    let gain = link[c as usize] - scale * tot[c as usize] * k_i;
                    if gain > best_gain + 1e-12 * (1.0 + best_gain.abs()) {
                        best = c;
                        best_gain = gain;
                    }
                }
                tot[best as usize] += k_i;
                if best != current {
                    comm[i] = best;
                    moved = true;
                }
                for &c in &touched {
                    link[c as usize] = f64::NAN;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (comm, any_move)
    }

    /// Collapses communities into super-nodes; returns the new level and the
    /// dense relabelling of `comm`.
    fn aggregate(&self, comm: &[u32]) -> (Level, Vec<u32>) {
        let mut relabel = vec![u32::MAX; self.len()];
        let mut next = 0u32;
        for &c in comm {
            if relabel[c as usize] == u32::MAX {
                relabel[c as usize] = next;
                next += 1;
            }
        }
        let k = next as usize;
        let dense: Vec<u32> = comm.iter().map(|&c| relabel[c as usize]).collect();
        let mut self_loops = vec![0.0; k];
        let mut degree = vec![0.0; k];
        let mut acc: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for i in 0..self.len() {
            let ci = dense[i];
            self_loops[ci as usize] += self.self_loops[i];
            degree[ci as usize] += self.degree[i];
            for &(j, w) in &self.adj[i] {
                if (j as usize) <= i {
                    continue;
                }
                let cj = dense[j as usize];
                if ci == cj {
                    self_loops[ci as usize] += w;
                } else {
                    *acc.entry((ci.min(cj), ci.max(cj))).or_insert(0.0) += w;
                }
            }
        }
        let mut adj = vec![Vec::new(); k];
        for (&(a, b), &w) in &acc {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        for row in &mut adj {
            row.sort_by_key(|&(j, _)| j);
        }
        (
            Level {
                adj,
                self_loops,
                degree,
            },
            dense,
        )
    }
}

/// Seeded two-phase Louvain. Deterministic for a given graph, resolution
/// and seed.
pub fn louvain(ug: &UndirectedGraph, resolution: f64, seed: u64) -> Result<LouvainOutcome> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::domain(format!("resolution {resolution} must be positive")));
    }
    let n = ug.node_count();
    let mut node_comm: Vec<u32> = (0..n as u32).collect();
    let m = ug.total_weight();
    if n == 0 || m <= 0.0 {
        let labels: Vec<usize> = (0..n).collect();
        return Ok(LouvainOutcome {
            partition: CommunityPartition::from_labels(ug.ids(), &labels),
            level_modularity: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level {
        adj: ug.adj.clone(),
        self_loops: ug.self_loops.clone(),
        degree: ug.degree.clone(),
    };
    let singletons: Vec<u32> = (0..n as u32).collect();
    let mut level_modularity = vec![level.modularity(&singletons, m, resolution)];
    loop {
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.shuffle(&mut rng);
        let (comm, moved) = level.local_move(&order, m, resolution);
        if !moved {
            break;
        }
        level_modularity.push(level.modularity(&comm, m, resolution));
        let (next, dense) = level.aggregate(&comm);
        for c in &mut node_comm {
            *c = dense[*c as usize];
        }
        check_level_cover(&node_comm, next.len())?;
        level = next;
    }
    let labels: Vec<usize> = node_comm.iter().map(|&c| c as usize).collect();
    let partition = CommunityPartition::from_labels(ug.ids(), &labels);
    partition.check_cover(ug.ids())?;
    Ok(LouvainOutcome {
        partition,
        level_modularity,
    })
}

fn check_level_cover(node_comm: &[u32], k: usize) -> Result<()> {
    let mut used = vec![false; k];
    for &c in node_comm {
        match used.get_mut(c as usize) {
            Some(u) => *u = true,
            None => return Err(Error::Invariant(format!("community {c} out of range"))),
        }
    }
    if used.iter().all(|&u| u) {
        Ok(())
    } else {
        Err(Error::Invariant("empty community after aggregation".into()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityCoverage {
    /// Members without a score, excluded from the means.
    pub excluded_members: usize,
    /// Communities with no scored member; their mean stays `None`.
    pub unscored_communities: Vec<usize>,
}

/// Fills each community's mean member polarity.
pub fn community_polarity(
    partition: &mut CommunityPartition,
    scores: &BTreeMap<String, f64>,
) -> PolarityCoverage {
    let mut coverage = PolarityCoverage::default();
    for c in &mut partition.communities {
        let vals: Vec<f64> = c
            .members
            .iter()
            .filter_map(|m| scores.get(m).copied())
            .collect();
        coverage.excluded_members += c.members.len() - vals.len();
        c.mean_polarity = if vals.is_empty() {
            coverage.unscored_communities.push(c.id);
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        };
    }
    coverage
}

/// Keeps the communities with at least `min_size` members. Ids are kept.
pub fn filter_communities(partition: &CommunityPartition, min_size: usize) -> CommunityPartition {
    let communities: Vec<Community> = partition
        .communities
        .iter()
        .filter(|c| c.size() >= min_size)
        .cloned()
        .collect();
    let assignment = communities
        .iter()
        .flat_map(|c| c.members.iter().map(move |m| (m.clone(), c.id)))
        .collect();
    CommunityPartition {
        assignment,
        communities,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub user_id: String,
    pub community_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityRow {
    pub community_id: usize,
    pub size: usize,
    pub mean_polarity: Option<f64>,
}

pub fn summary_rows(partition: &CommunityPartition) -> Vec<CommunityRow> {
    partition
        .communities
        .iter()
        .map(|c| CommunityRow {
            community_id: c.id,
            size: c.size(),
            mean_polarity: c.mean_polarity,
        })
        .collect()
}

/// Writes the `user_id,community_id` assignment CSV and the
/// `community_id,size,mean_polarity` summary CSV.
pub fn write_partition(partition: &CommunityPartition, assignment: &Path, summary: &Path) -> Result<()> {
    let rows = partition.assignment.iter().map(|(u, &c)| AssignmentRow {
        user_id: u.clone(),
        community_id: c,
    });
    crate::io::write_csv(assignment, rows)?;
    crate::io::write_csv(summary, summary_rows(partition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i:02}")).collect()
    }

    fn ug(n: usize, edges: &[(usize, usize, f64)]) -> UndirectedGraph {
        UndirectedGraph::from_edges(names(n), edges.iter().copied())
    }

    fn cliques(k: usize, size: usize) -> UndirectedGraph {
        let mut e = Vec::new();
        for c in 0..k {
            for a in 0..size {
                for b in a + 1..size {
                    e.push((c * size + a, c * size + b, 1.0));
                }
            }
        }
        ug(k * size, &e)
    }

    /// Direct double-sum modularity, independent of the per-community form.
    fn modularity_oracle(g: &UndirectedGraph, labels: &[usize], gamma: f64) -> f64 {
        let n = g.node_count();
        let two_m: f64 = (0..n).map(|i| g.degree(i)).sum();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if labels[i] != labels[j] {
                    continue;
                }
                let a = if i == j { 2.0 * g.self_loop(i) } else { g.edge_weight(i, j) };
                q += a - gamma * g.degree(i) * g.degree(j) / two_m;
            }
        }
        q / two_m
    }

    /// Every set partition of `0..n` as restricted growth strings.
    fn all_partitions(n: usize, visit: &mut impl FnMut(&[usize])) {
        fn rec(labels: &mut Vec<usize>, max: usize, n: usize, visit: &mut impl FnMut(&[usize])) {
            if labels.len() == n {
                visit(labels);
                return;
            }
            for l in 0..=max + 1 {
                labels.push(l);
                rec(labels, max.max(l), n, visit);
                labels.pop();
            }
        }
        let mut labels = vec![0];
        rec(&mut labels, 0, n, visit);
    }

    fn best_partition(g: &UndirectedGraph, gamma: f64) -> (f64, Vec<usize>) {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        all_partitions(g.node_count(), &mut |l| {
            let q = modularity_oracle(g, l, gamma);
            if q > best.0 + 1e-12 {
                best = (q, l.to_vec());
            }
        });
        best
    }

    #[test]
    fn symmetrize_examples() {
        let g = RetweetGraph::from_edges(
            Vec::new(),
            vec![("a".into(), "b".into(), 2), ("b".into(), "a".into(), 3)],
        )
        .unwrap();
        let u = symmetrize(&g);
        assert_eq!(u.edge_weight(0, 1), 5.0);
        assert_eq!(u.total_weight(), 5.0);

        let g = RetweetGraph::from_edges(Vec::new(), vec![("a".into(), "b".into(), 2)]).unwrap();
        assert_eq!(symmetrize(&g).edge_weight(1, 0), 2.0);

        let empty = symmetrize(&RetweetGraph::default());
        assert_eq!(empty.node_count(), 0);
    }

    #[test]
    fn two_triangles_modularity() {
        let g = cliques(2, 3);
        let split = [0, 0, 0, 1, 1, 1];
        let q = modularity(&g, &split, 1.0).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
        let (best_q, best) = best_partition(&g, 1.0);
        assert!((best_q - 0.5).abs() < 1e-12);
        assert_eq!(best, split);
        let one = modularity(&g, &[0; 6], 1.0).unwrap();
        assert!(one.abs() < 1e-12);
        assert!((modularity_oracle(&g, &[0; 6], 1.0) - one).abs() < 1e-12);
    }

    #[test]
    fn modularity_edge_cases() {
        let g = ug(3, &[(0, 1, 1.0)]);
        let q = modularity(&g, &[0, 1, 2], 1.0).unwrap();
        assert!(q.is_finite());
        assert!(modularity(&ug(2, &[]), &[0, 1], 1.0).is_err());
        assert!(modularity(&g, &[0, 1], 1.0).is_err());
    }

    #[test]
    fn louvain_finds_two_cliques() {
        let g = cliques(2, 5);
        let (best_q, best) = best_partition(&g, 1.0);
        let out = louvain(&g, 1.0, 7).unwrap();
        assert_eq!(out.partition.len(), 2);
        let labels = out.partition.labels_for(&g).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(labels[i] == labels[j], best[i] == best[j]);
            }
        }
        assert!((out.modularity().unwrap() - best_q).abs() < 1e-12);
    }

    #[test]
    fn louvain_empty_and_edgeless() {
        let out = louvain(&ug(0, &[]), 0.1, 1).unwrap();
        assert!(out.partition.is_empty());
        let out = louvain(&ug(3, &[]), 0.1, 1).unwrap();
        assert_eq!(out.partition.len(), 3);
        assert!(out.level_modularity.is_empty());
        assert!(louvain(&ug(1, &[]), 0.0, 1).is_err());
    }

    #[test]
    fn louvain_is_deterministic_per_seed() {
        let mut e = Vec::new();
        for i in 0..40usize {
            e.push((i, (i * 7 + 3) % 40, 1.0 + (i % 3) as f64));
            e.push((i, (i + 1) % 40, 1.0));
        }
        let g = ug(40, &e);
        assert_eq!(louvain(&g, 1.0, 9).unwrap(), louvain(&g, 1.0, 9).unwrap());
    }

    #[test]
    fn ids_ordered_by_size() {
        let p = CommunityPartition::from_labels(&names(6), &[5, 5, 9, 9, 9, 1]);
        let sizes: Vec<_> = p.communities().iter().map(Community::size).collect();
        assert_eq!(sizes, [3, 2, 1]);
        assert_eq!(p.community_of("n02"), Some(0));
        p.check_cover(&names(6)).unwrap();
    }

    #[test]
    fn polarity_examples() {
        let mut p = CommunityPartition::from_labels(&names(4), &[0, 0, 1, 2]);
        let scores: BTreeMap<String, f64> =
            [("n00".into(), 1.0), ("n01".into(), 0.0), ("n02".into(), -1.0)].into_iter().collect();
        let cov = community_polarity(&mut p, &scores);
        assert_eq!(p.communities()[0].mean_polarity, Some(0.5));
        assert_eq!(p.community_of("n02").and_then(|c| p.community(c)).unwrap().mean_polarity, Some(-1.0));
        let unscored = p.community_of("n03").unwrap();
        assert_eq!(p.community(unscored).unwrap().mean_polarity, None);
        assert_eq!(cov.unscored_communities, vec![unscored]);
        assert_eq!(cov.excluded_members, 1);
    }

    #[test]
    fn filter_examples() {
        let mut labels = vec![0; 12];
        labels.extend(vec![1; 9]);
        labels.extend(vec![2; 10]);
        let p = CommunityPartition::from_labels(&names(31), &labels);
        let kept = filter_communities(&p, 10);
        let sizes: Vec<_> = kept.communities().iter().map(Community::size).collect();
        assert_eq!(sizes, [12, 10]);
        assert_eq!(kept.node_count(), 22);
        assert_eq!(filter_communities(&p, 1), p);
        assert!(filter_communities(&p, 13).is_empty());
    }

    fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
        (4usize..30).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec((0..n, 0..n, 1u8..4), 1..80))
        })
        .prop_map(|(n, e)| (n, e.into_iter().map(|(a, b, w)| (a, b, w as f64)).collect()))
    }

    proptest! {
        #[test]
        fn louvain_levels_never_lose_modularity((n, e) in arb_graph(), seed in any::<u64>(), gamma in 0.05f64..2.0) {
            let g = ug(n, &e);
            let out = louvain(&g, gamma, seed).unwrap();
            for w in out.level_modularity.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", out.level_modularity);
            }
            out.partition.check_cover(g.ids()).unwrap();
            if let Some(q) = out.modularity() {
                let labels = out.partition.labels_for(&g).unwrap();
                prop_assert!((modularity(&g, &labels, gamma).unwrap() - q).abs() < 1e-9);
                prop_assert!((modularity_oracle(&g, &labels, gamma) - q).abs() < 1e-9);
                prop_assert!((-1.0..=1.0).contains(&q));
            }
        }

        #[test]
        fn components_are_never_merged(
            (n1, e1) in arb_graph(), (n2, e2) in arb_graph(), seed in any::<u64>()
        ) {
            let mut e = e1.clone();
            e.extend(e2.iter().map(|&(a, b, w)| (a + n1, b + n1, w)));
            let g = ug(n1 + n2, &e);
            let labels = louvain(&g, 1.0, seed).unwrap().partition.labels_for(&g).unwrap();
            for a in 0..n1 {
                for b in n1..n1 + n2 {
                    prop_assert_ne!(labels[a], labels[b]);
                }
            }
        }

        #[test]
        fn polarity_means_within_member_range(
            labels in proptest::collection::vec(0usize..4, 1..30),
            raw in proptest::collection::vec(-1.0f64..1.0, 30)
        ) {
            let ids = names(labels.len());
            let mut p = CommunityPartition::from_labels(&ids, &labels);
            let scores: BTreeMap<String, f64> =
                ids.iter().cloned().zip(raw.iter().copied()).collect();
            community_polarity(&mut p, &scores);
            for c in p.communities() {
                let vals: Vec<f64> = c.members.iter().map(|m| scores[m]).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mean = c.mean_polarity.unwrap();
                prop_assert!(mean >= lo - 1e-12 && mean <= hi + 1e-12);
            }
        }
    }
}
