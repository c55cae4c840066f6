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

//! Statistical primitives: Pearson correlation, Kruskal-Wallis with Dunn's
//! post-hoc test, empirical CDFs and 2-D density grids.

pub mod special;

use serde::{Deserialize, Serialize};

pub use special::{chi2_sf, normal_sf};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom where the reference distribution has them.
    pub df: Option<f64>,
    pub n: usize,
}

/// Sample Pearson correlation with a two-sided t-test on `n − 2` df.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "pearson inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::domain(format!("pearson needs at least 3 pairs, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("pearson input contains a non-finite value"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::domain("pearson input has zero variance"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        special::student_t_two_sided(t, df)
    };
    Ok(TestResult {
        statistic: r,
        p_value,
        df: Some(df),
        n,
    })
}

/// Pooled mid-ranks (1-based) of all group values, plus the tie term
/// `Σ (t³ − t)` over groups of tied values.
struct PooledRanks {
    /// Rank sums per group.
    rank_sums: Vec<f64>,
    sizes: Vec<usize>,
    n: usize,
    tie_term: f64,
    /// `Σ (r − (N+1)/2)²` over all observations.
    spread: f64,
}

fn pooled_ranks(groups: &[Vec<f64>]) -> Result<PooledRanks> {
    if groups.len() < 2 {
        return Err(Error::domain("rank tests need at least two groups"));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(Error::domain(format!("group {i} is empty")));
    }
    let mut pooled: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, vals)| vals.iter().map(move |&v| (v, g)))
        .collect();
    if pooled.iter().any(|(v, _)| v.is_nan()) {
        return Err(Error::domain("rank test input contains NaN"));
    }
    let n = pooled.len();
    if n < 5 {
        return Err(Error::domain(format!("rank tests need N >= 5, got {n}")));
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut spread = 0.0;
    let centre = (n as f64 + 1.0) / 2.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean
        let rank = (start + end + 1) as f64 / 2.0;
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        spread += t * (rank - centre).powi(2);
        for &(_, g) in &pooled[start..end] {
            rank_sums[g] += rank;
        }
        start = end;
    }
    Ok(PooledRanks {
        rank_sums,
        sizes: groups.iter().map(Vec::len).collect(),
        n,
        tie_term,
        spread,
    })
}

/// Tie-corrected Kruskal-Wallis H with a chi-square p-value on `k − 1` df.
///
/// H is evaluated as `(N − 1) Σ_g (R_g − n_g (N+1)/2)² / n_g / Σ (r − (N+1)/2)²`,
/// which equals the textbook `[12/(N(N+1)) Σ R_g²/n_g − 3(N+1)] / C` and is
/// exactly zero when every group has the same rank sum per member. When all
/// values are identical the result is `H = 0, p = 1`.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    let r = pooled_ranks(groups)?;
    let df = (groups.len() - 1) as f64;
    let n = r.n;
    if r.spread == 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df: Some(df),
            n,
        });
    }
    let centre = (n as f64 + 1.0) / 2.0;
    let between: f64 = r
        .rank_sums
        .iter()
        .zip(&r.sizes)
        .map(|(&sum, &size)| (sum - size as f64 * centre).powi(2) / size as f64)
        .sum();
    let h = (n as f64 - 1.0) * between / r.spread;
    Ok(TestResult {
        statistic: h,
        p_value: chi2_sf(h, groups.len() as u32 - 1)?,
        df: Some(df),
        n,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjustment {
    None,
    #[default]
    Bonferroni,
    Holm,
}

impl std::str::FromStr for Adjustment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Adjustment::None),
            "bonferroni" => Ok(Adjustment::Bonferroni),
            "holm" => Ok(Adjustment::Holm),
            other => Err(Error::domain(format!("unknown p-value adjustment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DunnPair {
    pub first: usize,
    pub second: usize,
    /// `(R̄_first − R̄_second) / σ`.
    pub z: f64,
    pub p_unadjusted: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnResult {
    pub adjustment: Adjustment,
    /// Pairs `(g, h)` with `g < h` in lexicographic order.
    pub pairs: Vec<DunnPair>,
}

impl DunnResult {
    /// Symmetric matrix of adjusted p-values with ones on the diagonal.
    pub fn p_matrix(&self, groups: usize) -> Vec<Vec<f64>> {
        let mut m = vec![vec![1.0; groups]; groups];
        for p in &self.pairs {
            m[p.first][p.second] = p.p_adjusted;
            m[p.second][p.first] = p.p_adjusted;
        }
        m
    }

    pub fn pair(&self, first: usize, second: usize) -> Option<&DunnPair> {
        let (a, b) = (first.min(second), first.max(second));
        self.pairs.iter().find(|p| p.first == a && p.second == b)
    }
}

/// Dunn's pairwise test on pooled mid-ranks with the tie-corrected
/// variance `[N(N+1)/12 − Σ(t³ − t)/(12(N − 1))]·(1/n_g + 1/n_h)` and
/// two-sided normal p-values.
pub fn dunn_posthoc(groups: &[Vec<f64>], adjustment: Adjustment) -> Result<DunnResult> {
    let r = pooled_ranks(groups)?;
    let n = r.n as f64;
    let base = n * (n + 1.0) / 12.0 - r.tie_term / (12.0 * (n - 1.0));
    let means: Vec<f64> = r
        .rank_sums
        .iter()
        .zip(&r.sizes)
        .map(|(s, &k)| s / k as f64)
        .collect();
    let mut pairs = Vec::new();
    for g in 0..groups.len() {
        for h in g + 1..groups.len() {
            let diff = means[g] - means[h];
            let sigma = (base * (1.0 / r.sizes[g] as f64 + 1.0 / r.sizes[h] as f64)).sqrt();
            let z = if diff == 0.0 || sigma == 0.0 { 0.0 } else { diff / sigma };
            let p = (2.0 * normal_sf(z.abs())).min(1.0);
            pairs.push(DunnPair {
                first: g,
                second: h,
                z,
                p_unadjusted: p,
                p_adjusted: p,
            });
        }
    }
    adjust(&mut pairs, adjustment);
    Ok(DunnResult { adjustment, pairs })
}

fn adjust(pairs: &mut [DunnPair], adjustment: Adjustment) {
    let m = pairs.len() as f64;
    match adjustment {
        Adjustment::None => {}
        Adjustment::Bonferroni => {
            for p in pairs.iter_mut() {
                p.p_adjusted = (p.p_unadjusted * m).min(1.0);
            }
        }
        Adjustment::Holm => {
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.sort_by(|&a, &b| pairs[a].p_unadjusted.total_cmp(&pairs[b].p_unadjusted));
            let mut running = 0.0f64;
            for (rank, &i) in order.iter().enumerate() {
                let scaled = ((m - rank as f64) * pairs[i].p_unadjusted).min(1.0);
                running = running.max(scaled);
                pairs[i].p_adjusted = running;
            }
        }
    }
}

/// Step ECDF: one `(x, F(x))` point per distinct value, `F` the fraction of
/// values `≤ x`.
pub fn ecdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("ecdf input contains NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = f,
            _ => out.push((v, f)),
        }
    }
    Ok(out)
}

/// ECDF over `log10(v + 1)` for nonnegative counts.
pub fn ecdf_log1p10(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::domain(format!("log-scale ECDF needs nonnegative values, got {v}")));
    }
    let transformed: Vec<f64> = values.iter().map(|v| (v + 1.0).log10()).collect();
    ecdf(&transformed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// `[-1, 1]²`, the polarity square.
    pub const POLARITY: Bounds = Bounds {
        x_min: -1.0,
        x_max: 1.0,
        y_min: -1.0,
        y_max: 1.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[ix][iy]`.
    pub counts: Vec<Vec<u64>>,
    pub x_marginal: Vec<u64>,
    pub y_marginal: Vec<u64>,
}

impl DensityGrid {
    pub fn total(&self) -> u64 {
        self.x_marginal.iter().sum()
    }

    pub fn check(&self) -> Result<()> {
        let cells: u64 = self.counts.iter().flatten().sum();
        let ys: u64 = self.y_marginal.iter().sum();
        if cells != self.total() || ys != cells {
            return Err(Error::Invariant("density marginals disagree with cells".into()));
        }
        Ok(())
    }
}

fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| if i == bins { hi } else { lo + (hi - lo) * i as f64 / bins as f64 })
        .collect()
}

/// Bin index with right-open bins except the last, which is closed.
fn bin_of(v: f64, edges: &[f64]) -> Option<usize> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    if !(v >= lo && v <= hi) {
        return None;
    }
    let mut i = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
    i = i.min(bins - 1);
    while i > 0 && v < edges[i] {
        i -= 1;
    }
    while i + 1 < bins && v >= edges[i + 1] {
        i += 1;
    }
    Some(i)
}

/// Rectangular 2-D histogram over `bounds` with marginals.
pub fn density2d(x: &[f64], y: &[f64], nx: usize, ny: usize, bounds: Bounds) -> Result<DensityGrid> {
    if nx == 0 || ny == 0 {
        return Err(Error::domain("density grid needs positive bin counts"));
    }
    if x.len() != y.len() {
        return Err(Error::domain("density2d inputs differ in length"));
    }
    if !(bounds.x_min < bounds.x_max && bounds.y_min < bounds.y_max) {
        return Err(Error::domain("density2d bounds are empty"));
    }
    let x_edges = edges(bounds.x_min, bounds.x_max, nx);
    let y_edges = edges(bounds.y_min, bounds.y_max, ny);
    let mut counts = vec![vec![0u64; ny]; nx];
    let mut x_marginal = vec![0u64; nx];
    let mut y_marginal = vec![0u64; ny];
    for (&a, &b) in x.iter().zip(y) {
        let (Some(i), Some(j)) = (bin_of(a, &x_edges), bin_of(b, &y_edges)) else {
            return Err(Error::domain(format!("point ({a}, {b}) outside density bounds")));
        };
        counts[i][j] += 1;
        x_marginal[i] += 1;
        y_marginal[j] += 1;
    }
    Ok(DensityGrid {
        x_edges,
        y_edges,
        counts,
        x_marginal,
        y_marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pearson_perfect_lines() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-15);
        assert_eq!(r.p_value, 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap().statistic + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pearson_independent_uniform() {
        let mut ok = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
            let r = pearson(&x, &y).unwrap();
            if r.statistic.abs() < 0.05 && r.p_value > 0.001 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}/100");
    }

    #[test]
    fn kruskal_identical_groups() {
        let g = vec![vec![1.0, 2.0, 3.0]; 3];
        let r = kruskal_wallis(&g).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let same = vec![vec![4.0; 3], vec![4.0; 4]];
        let r = kruskal_wallis(&same).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn kruskal_textbook_value() {
        // no ties: H = 12/(9*10) * (6^2/3 + 15^2/3 + 24^2/3) - 30 = 7.2
        let g = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let r = kruskal_wallis(&g).unwrap();
        assert!((r.statistic - 7.2).abs() < 1e-12);
        assert!((r.p_value - (-3.6f64).exp()).abs() < 1e-12);
        assert_eq!(r.df, Some(2.0));
    }

    #[test]
    fn kruskal_input_errors() {
        assert!(kruskal_wallis(&[vec![1.0, 2.0, 3.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0, 2.0], vec![]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0, f64::NAN, 2.0], vec![3.0, 4.0]]).is_err());
    }

    #[test]
    fn dunn_examples() {
        let same = vec![vec![1.0, 2.0, 3.0]; 3];
        let d = dunn_posthoc(&same, Adjustment::Bonferroni).unwrap();
        assert!(d.pairs.iter().all(|p| p.p_adjusted == 1.0));

        let a: Vec<f64> = (1..=10).map(f64::from).collect();
        let b: Vec<f64> = (101..=110).map(f64::from).collect();
        let d = dunn_posthoc(&[a, b], Adjustment::Bonferroni).unwrap();
        assert!(d.pairs[0].p_adjusted < 0.001);
        assert!(d.pairs[0].z < 0.0);

        let g = vec![vec![1.0, 2.0, 3.5, 4.0], vec![3.0, 5.0, 6.0], vec![5.0, 7.0, 8.0, 9.0]];
        let none = dunn_posthoc(&g, Adjustment::None).unwrap();
        let bonf = dunn_posthoc(&g, Adjustment::Bonferroni).unwrap();
        for (a, b) in none.pairs.iter().zip(&bonf.pairs) {
            assert_eq!(b.p_adjusted, (3.0 * a.p_unadjusted).min(1.0));
        }
        let m = bonf.p_matrix(3);
        assert_eq!(m[0][2], m[2][0]);
        assert_eq!(m[1][1], 1.0);
    }

    #[test]
    fn holm_is_step_down() {
        let mut pairs: Vec<DunnPair> = [0.01, 0.04, 0.03]
            .iter()
            .enumerate()
            .map(|(i, &p)| DunnPair { first: 0, second: i, z: 0.0, p_unadjusted: p, p_adjusted: p })
            .collect();
        adjust(&mut pairs, Adjustment::Holm);
        let adj: Vec<f64> = pairs.iter().map(|p| p.p_adjusted).collect();
        // sorted 0.01, 0.03, 0.04 -> 0.03, 0.06, max(0.06, 0.04)
        assert!((adj[0] - 0.03).abs() < 1e-15);
        assert!((adj[2] - 0.06).abs() < 1e-15);
        assert!((adj[1] - 0.06).abs() < 1e-15);
    }

    #[test]
    fn ecdf_examples() {
        let pts = ecdf_log1p10(&[0.0, 9.0, 99.0]).unwrap();
        assert_eq!(pts, vec![(0.0, 1.0 / 3.0), (1.0, 2.0 / 3.0), (2.0, 1.0)]);
        assert!(ecdf_log1p10(&[]).unwrap().is_empty());
        assert_eq!(ecdf_log1p10(&[5.0; 4]).unwrap(), vec![(6f64.log10(), 1.0)]);
        assert!(ecdf_log1p10(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn density_examples() {
        let g = density2d(&[0.0], &[0.0], 4, 4, Bounds::POLARITY).unwrap();
        assert_eq!(g.counts[2][2], 1);
        assert_eq!(g.total(), 1);
        assert_eq!(g.y_marginal.iter().sum::<u64>(), 1);

        let v = [-0.9, -0.4, 0.1, 0.6, 1.0];
        let g = density2d(&v, &v, 4, 4, Bounds::POLARITY).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(g.counts[i][j], 0);
                }
            }
        }
        assert_eq!(g.counts[3][3], 2);

        assert!(density2d(&[0.0], &[0.0], 0, 3, Bounds::POLARITY).is_err());
        assert!(density2d(&[1.5], &[0.0], 3, 3, Bounds::POLARITY).is_err());
    }

    #[test]
    fn density_uniform_within_five_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = density2d(&x, &y, 20, 20, Bounds::POLARITY).unwrap();
        let p = 1.0 / 400.0;
        let expected = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for row in &g.counts {
            for &c in row {
                assert!((c as f64 - expected).abs() <= 5.0 * sigma, "cell {c}");
            }
        }
        g.check().unwrap();
    }

    proptest! {
        #[test]
        fn pearson_affine_invariant(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..50),
            a in 0.1f64..10.0, b in -50.0f64..50.0, c in 0.1f64..10.0, d in -50.0f64..50.0
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            prop_assume!(pearson(&x, &y).is_ok());
            let r = pearson(&x, &y).unwrap().statistic;
            let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let y2: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            prop_assert!((pearson(&x2, &y2).unwrap().statistic - r).abs() < 1e-12);
        }

        #[test]
        fn kruskal_monotone_invariant(
            groups in proptest::collection::vec(proptest::collection::vec(0i32..20, 1..10), 2..5)
        ) {
            let g: Vec<Vec<f64>> = groups.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
            prop_assume!(g.iter().map(Vec::len).sum::<usize>() >= 5);
            let h = kruskal_wallis(&g).unwrap().statistic;
            let t: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| (x / 3.0).exp() - 7.0).collect()).collect();
            prop_assert!((kruskal_wallis(&t).unwrap().statistic - h).abs() < 1e-9);
        }

        #[test]
        fn adjusted_p_bounds(
            groups in proptest::collection::vec(proptest::collection::vec(0i32..30, 3..10), 2..6),
            method in prop_oneof![Just(Adjustment::Bonferroni), Just(Adjustment::Holm)]
        ) {
            let g: Vec<Vec<f64>> = groups.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
            let d = dunn_posthoc(&g, method).unwrap();
            for p in &d.pairs {
                prop_assert!(p.p_adjusted >= p.p_unadjusted && p.p_adjusted <= 1.0);
            }
        }

        #[test]
        fn density_marginals_sum(pts in proptest::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0), 0..200), nx in 1usize..30, ny in 1usize..30) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let g = density2d(&x, &y, nx, ny, Bounds::POLARITY).unwrap();
            prop_assert_eq!(g.total() as usize, pts.len());
            g.check().unwrap();
        }
    }
}
