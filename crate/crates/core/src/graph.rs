//! Undirected attributed graphs and the dense spectral quantities built on
//! them: self-loop normalized adjacency, Laplacian, label and feature
//! homophily, normalized cut, and a stochastic block model generator.
//!
//! Edges are stored canonically as `(i, j)` with `i < j`, sorted and
//! deduplicated. An optional per-edge mask in `[0, 1]` (aligned with that
//! order) scales both symmetric adjacency entries of its edge.

use std::collections::BTreeSet;
use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    features: Array2<f64>,
    edges: Arc<[Edge]>,
    labels: Option<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, canonicalizing and deduplicating `edges`.
    pub fn new(
        features: Array2<f64>,
        edges: impl IntoIterator<Item = Edge>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = features.nrows();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange {
                    index: a.max(b),
                    n_nodes: n,
                });
            }
            if a == b {
                return Err(Error::Invariant(format!("self-loop on node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        if let Some(y) = &labels {
            if y.len() != n {
                return Err(Error::dim(format!("{} labels for {n} nodes", y.len())));
            }
        }
        Ok(Self {
            features,
            edges: set.into_iter().collect(),
            labels,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    /// Canonical edge list, `i < j`, sorted.
    pub fn edges(&self) -> &Arc<[Edge]> {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels().map(|y| y.iter().max().map_or(0, |m| m + 1))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Same nodes, features, and labels with a different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Self::new(self.features.clone(), edges, self.labels.clone())
    }

    /// Edges whose mask entry equals zero are dropped.
    pub fn retain_edges(&self, retention: &[f64]) -> Result<Self> {
        check_mask(self, Some(retention))?;
        let kept = self
            .edges
            .iter()
            .zip(retention)
            .filter(|(_, &w)| w != 0.0)
            .map(|(&e, _)| e);
        self.with_edges(kept)
    }

    pub fn require_labels(&self) -> Result<&[usize]> {
        self.labels()
            .ok_or_else(|| Error::Usage("operation requires node labels".into()))
    }
}

/// Soft or hard cluster assignment, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment(pub Array2<f64>);

impl ClusterAssignment {
    /// One-hot assignment from integer cluster ids.
    pub fn hard(ids: &[usize], k: usize) -> Self {
        let mut c = Array2::zeros((ids.len(), k));
        for (i, &id) in ids.iter().enumerate() {
            c[[i, id]] = 1.0;
        }
        Self(c)
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }
}

fn check_mask(g: &Graph, mask: Option<&[f64]>) -> Result<()> {
    if let Some(m) = mask {
        if m.len() != g.n_edges() {
            return Err(Error::dim(format!(
                "mask of length {} for {} edges",
                m.len(),
                g.n_edges()
            )));
        }
    }
    Ok(())
}

/// `A∘mask + I` as a dense matrix.
pub fn adjacency_with_self_loops(g: &Graph, mask: Option<&[f64]>) -> Result<Array2<f64>> {
    check_mask(g, mask)?;
    let n = g.n_nodes();
    let mut a = Array2::eye(n);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        let w = mask.map_or(1.0, |m| m[e]);
        a[[i, j]] += w;
        a[[j, i]] += w;
    }
    Ok(a)
}

/// Row degrees of `A∘mask + I`; always at least 1.
pub fn self_loop_degrees(g: &Graph, mask: Option<&[f64]>) -> Result<Array1<f64>> {
    check_mask(g, mask)?;
    let mut d = Array1::ones(g.n_nodes());
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        let w = mask.map_or(1.0, |m| m[e]);
        d[i] += w;
        d[j] += w;
    }
    Ok(d)
}

/// `D̃^{-1/2} (A∘mask + I) D̃^{-1/2}`.
pub fn normalized_adjacency(g: &Graph, mask: Option<&[f64]>) -> Result<Array2<f64>> {
    let mut a = adjacency_with_self_loops(g, mask)?;
    let s = a.sum_axis(Axis(1)).mapv(|d| d.powf(-0.5));
    for (mut row, si) in a.outer_iter_mut().zip(&s) {
        row.zip_mut_with(&s, |x, sj| *x *= si * sj);
    }
    Ok(a)
}

/// `I - normalized_adjacency(g, mask)`.
pub fn laplacian(g: &Graph, mask: Option<&[f64]>) -> Result<Array2<f64>> {
    let a_hat = normalized_adjacency(g, mask)?;
    Ok(Array2::eye(g.n_nodes()) - a_hat)
}

/// Fraction of edges whose endpoints share a label.
pub fn homophily_label(g: &Graph) -> Result<f64> {
    let y = g.require_labels()?;
    if g.n_edges() == 0 {
        return Err(Error::Undefined("label homophily of a graph without edges".into()));
    }
    let intra = g.edges().iter().filter(|&&(i, j)| y[i] == y[j]).count();
    Ok(intra as f64 / g.n_edges() as f64)
}

/// `tr(Xᵀ L X)` with `L = laplacian(g, mask)`.
pub fn homophily_feature(g: &Graph, mask: Option<&[f64]>) -> Result<f64> {
    let l = laplacian(g, mask)?;
    Ok(trace_quadratic(&l, g.features()))
}

/// `tr(Mᵀ L M)` without forming `Mᵀ L M`.
pub(crate) fn trace_quadratic(l: &Array2<f64>, m: &Array2<f64>) -> f64 {
    (m * &l.dot(m)).sum()
}

/// `(1/K) Σ_k (CᵀLC)_kk / (CᵀD̃C)_kk` with `L` and `D̃` from `g` (no mask).
pub fn normalized_cut(g: &Graph, c: &ClusterAssignment) -> Result<f64> {
    if c.0.nrows() != g.n_nodes() {
        return Err(Error::dim(format!(
            "assignment has {} rows for {} nodes",
            c.0.nrows(),
            g.n_nodes()
        )));
    }
    let l = laplacian(g, None)?;
    let d = self_loop_degrees(g, None)?;
    let ratios = cut_ratios(&l, &d, &c.0)?;
    Ok(ratios.sum() / c.k() as f64)
}

/// `(CᵀLC)_kk / (CᵀDC)_kk` for each column `k` of `c`.
pub(crate) fn cut_ratios(
    l: &Array2<f64>,
    degrees: &Array1<f64>,
    c: &Array2<f64>,
) -> Result<Array1<f64>> {
    let lc = l.dot(c);
    let mut out = Array1::zeros(c.ncols());
    for k in 0..c.ncols() {
        let col = c.column(k);
        let num = col.dot(&lc.column(k));
        let den: f64 = col.iter().zip(degrees).map(|(x, d)| x * x * d).sum();
        if den == 0.0 {
            return Err(Error::DegenerateCluster(k));
        }
        out[k] = num / den;
    }
    Ok(out)
}

/// Parameters of a planted-partition graph with Gaussian node features.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub n: usize,
    pub k_blocks: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub feature_dim: usize,
    pub mean_sep: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            n: 300,
            k_blocks: 3,
            p_intra: 0.05,
            p_inter: 0.002,
            feature_dim: 16,
            mean_sep: 1.0,
            seed: 0,
        }
    }
}

/// Samples a stochastic block model.
///
/// Node `i` belongs to block `i * k / n`, so block sizes differ by at most
/// one. Every pair is an edge independently with `p_intra` or `p_inter`.
/// Features are `μ_y + N(0, I)` where the class means sit on distinct
/// coordinate axes at distance `mean_sep / √2` from the origin, which puts
/// every pair of means exactly `mean_sep` apart.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<Graph> {
    if cfg.n == 0 || cfg.k_blocks == 0 {
        return Err(Error::Usage("SBM needs n > 0 and k > 0".into()));
    }
    if cfg.k_blocks > cfg.n {
        return Err(Error::Usage(format!("{} blocks for {} nodes", cfg.k_blocks, cfg.n)));
    }
    if !(0.0..=1.0).contains(&cfg.p_intra)
        || !(0.0..=1.0).contains(&cfg.p_inter)
        || cfg.p_inter > cfg.p_intra
    {
        return Err(Error::Usage(format!(
            "need 0 <= p_inter <= p_intra <= 1, got {} / {}",
            cfg.p_inter, cfg.p_intra
        )));
    }
    if cfg.feature_dim < cfg.k_blocks {
        return Err(Error::Usage(format!(
            "feature_dim {} must be at least the number of blocks {}",
            cfg.feature_dim, cfg.k_blocks
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels: Vec<usize> = (0..cfg.n).map(|i| i * cfg.k_blocks / cfg.n).collect();

    let mut edges = Vec::new();
    for i in 0..cfg.n {
        for j in (i + 1)..cfg.n {
            let p = if labels[i] == labels[j] {
                cfg.p_intra
            } else {
                cfg.p_inter
            };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }

    let offset = cfg.mean_sep / std::f64::consts::SQRT_2;
    let features = Array2::from_shape_fn((cfg.n, cfg.feature_dim), |(i, d)| {
        let noise: f64 = rng.sample(StandardNormal);
        if d == labels[i] {
            offset + noise
        } else {
            noise
        }
    });
    Graph::new(features, edges, Some(labels))
}
