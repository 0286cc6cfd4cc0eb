//! Downstream evaluation of frozen embeddings: logistic regression
//! accuracy, k-means NMI, GRV, and the serialized report.

use std::collections::HashMap;

use ndarray::{Array2, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contrastive;
use crate::encoder::glorot;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::optim::Adam;
use crate::trainer::{train_gchs, TrainConfig, TrainedModel};

/// Train and validation fractions; the rest is test.
pub const DEFAULT_SPLIT: (f64, f64) = (0.1, 0.1);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Validates disjointness and range.
    pub fn new(train: Vec<usize>, val: Vec<usize>, test: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in train.iter().chain(&val).chain(&test) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n_nodes: n });
            }
            if seen[i] {
                return Err(Error::Usage(format!("node {i} appears in two split parts")));
            }
            seen[i] = true;
        }
        Ok(Self { train, val, test })
    }

    /// Random split with `round(f·n)` train and validation nodes.
    pub fn random(n: usize, (train_frac, val_frac): (f64, f64), seed: u64) -> Result<Self> {
        if !(train_frac > 0.0) || !(val_frac >= 0.0) || train_frac + val_frac >= 1.0 {
            return Err(Error::Usage(format!("bad split fractions {train_frac}/{val_frac}")));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = ((train_frac * n as f64).round() as usize).max(1);
        let n_val = (val_frac * n as f64).round() as usize;
        if n_train + n_val >= n {
            return Err(Error::Usage(format!("{n} nodes too few for the split")));
        }
        let test = idx.split_off(n_train + n_val);
        let val = idx.split_off(n_train);
        Ok(Self { train: idx, val, test })
    }
}

/// Multinomial logistic regression on frozen features.
#[derive(Debug, Clone)]
pub struct LogReg {
    pub w: Array2<f64>,
    pub b: Array2<f64>,
}

impl LogReg {
    pub const LR: f64 = 0.01;
    pub const EPOCHS: usize = 300;
    pub const WEIGHT_DECAY: f64 = 5e-4;

    /// Full-batch Adam on softmax cross-entropy plus `λ/2 ‖W‖²`.
    pub fn fit(h: &Array2<f64>, y: &[usize], rows: &[usize], n_classes: usize, seed: u64) -> Result<Self> {
        let x = h.select(Axis(0), rows);
        let m = rows.len() as f64;
        let mut target = Array2::zeros((rows.len(), n_classes));
        for (r, &i) in rows.iter().enumerate() {
            target[[r, y[i]]] = 1.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = Self {
            w: glorot(h.ncols(), n_classes, &mut rng),
            b: Array2::zeros((1, n_classes)),
        };
        let mut adam = Adam::new(Self::LR, &[&model.w, &model.b]);
        for _ in 0..Self::EPOCHS {
            let probs = model.probabilities(&x);
            let err = (probs - &target) / m;
            let gw = x.t().dot(&err) + &model.w * Self::WEIGHT_DECAY;
            let gb = err.sum_axis(Axis(0)).insert_axis(Axis(0));
            adam.step(&mut [&mut model.w, &mut model.b], &[gw, gb])?;
        }
        Ok(model)
    }

    pub fn probabilities(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut logits = x.dot(&self.w) + &self.b;
        for mut row in logits.rows_mut() {
            let max = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            row.mapv_inplace(|v| (v - max).exp());
            let s = row.sum();
            row /= s;
        }
        logits
    }

    pub fn predict(&self, x: &Array2<f64>) -> Vec<usize> {
        self.probabilities(x)
            .outer_iter()
            .map(|row| argmax(row.iter().copied()))
            .collect()
    }
}

fn argmax(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Test accuracy of a logistic regression fit on the training nodes.
pub fn train_logreg(h: &Array2<f64>, y: &[usize], split: &Split, seed: u64) -> Result<f64> {
    if y.len() != h.nrows() {
        return Err(Error::dim(format!("{} labels for {} embeddings", y.len(), h.nrows())));
    }
    if split.test.is_empty() || split.train.is_empty() {
        return Err(Error::Usage("split needs train and test nodes".into()));
    }
    let first = y[split.train[0]];
    if split.train.iter().all(|&i| y[i] == first) {
        return Err(Error::DegenerateSplit);
    }
    let k = y.iter().max().map_or(0, |m| m + 1);
    let model = LogReg::fit(h, y, &split.train, k, seed)?;
    let pred = model.predict(&h.select(Axis(0), &split.test));
    let correct = pred.iter().zip(&split.test).filter(|(&p, &i)| p == y[i]).count();
    Ok(correct as f64 / split.test.len() as f64)
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: ndarray::ArrayView1<f64>, centers: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centers.outer_iter().enumerate() {
        let d = sq_dist(p, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_pp<R: Rng>(h: &Array2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let n = h.nrows();
    let mut centers = Array2::zeros((k, h.ncols()));
    centers.row_mut(0).assign(&h.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = h.outer_iter().map(|p| sq_dist(p, centers.row(0))).collect();
    for c in 1..k {
        let pick = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            Err(_) => rng.random_range(0..n),
        };
        centers.row_mut(c).assign(&h.row(pick));
        for (i, p) in h.outer_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centers.row(c)));
        }
    }
    centers
}

/// One Lloyd run from k-means++ seeding: `(assignment, SSE)`.
fn lloyd<R: Rng>(h: &Array2<f64>, k: usize, rng: &mut R) -> (Vec<usize>, f64) {
    const MAX_ITER: usize = 300;
    let n = h.nrows();
    let mut centers = kmeans_pp(h, k, rng);
    let mut assign = vec![usize::MAX; n];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        let mut dist = vec![0.0; n];
        for (i, p) in h.outer_iter().enumerate() {
            let (c, d) = nearest(p, &centers);
            dist[i] = d;
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        let mut sums = Array2::zeros(centers.dim());
        let mut counts = vec![0usize; k];
        for (i, p) in h.outer_iter().enumerate() {
            let mut row = sums.row_mut(assign[i]);
            row += &p;
            counts[assign[i]] += 1;
        }
        for (c, &count) in counts.iter().enumerate() {
            if count == 0 {
                // Reseed from the point farthest from its centroid.
                let far = argmax(dist.iter().copied());
                centers.row_mut(c).assign(&h.row(far));
                dist[far] = 0.0;
                changed = true;
            } else {
                let mean = &sums.row(c) / counts[c] as f64;
                centers.row_mut(c).assign(&mean);
            }
        }
        if !changed {
            break;
        }
    }
    let sse = h
        .outer_iter()
        .zip(&assign)
        .map(|(p, &c)| sq_dist(p, centers.row(c)))
        .sum();
    (assign, sse)
}

/// Best of `restarts` k-means++/Lloyd runs by within-cluster SSE.
pub fn kmeans(h: &Array2<f64>, k: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > h.nrows() {
        return Err(Error::Usage(format!("cannot form {k} clusters from {} points", h.nrows())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(h, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart").0)
}

/// `I(a; b) / sqrt(H(a) H(b))` with natural logs; zero when either
/// labeling has zero entropy.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dim(format!("labelings of length {} and {}", a.len(), b.len())));
    }
    let n = a.len() as f64;
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *pa.entry(x).or_default() += 1.0;
        *pb.entry(y).or_default() += 1.0;
    }
    let entropy = |m: &HashMap<usize, f64>| -> f64 {
        let mut v: Vec<f64> = m.values().copied().collect();
        v.sort_by(f64::total_cmp);
        -v.iter().map(|c| c / n * (c / n).ln()).sum::<f64>()
    };
    let (ha, hb) = (entropy(&pa), entropy(&pb));
    if ha <= 0.0 || hb <= 0.0 {
        return Ok(0.0);
    }
    let mut cells: Vec<_> = joint.into_iter().collect();
    cells.sort_by_key(|&(k, _)| k);
    let mi: f64 = cells
        .iter()
        .map(|&((x, y), c)| c / n * (c * n / (pa[&x] * pb[&y])).ln())
        .sum();
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

pub fn kmeans_nmi(h: &Array2<f64>, y: &[usize], k: usize, restarts: usize, seed: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Usage(format!("clustering needs k >= 2, got {k}")));
    }
    if y.len() != h.nrows() {
        return Err(Error::dim(format!("{} labels for {} embeddings", y.len(), h.nrows())));
    }
    nmi(&kmeans(h, k, restarts, seed)?, y)
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone)]
pub struct GrvOutcome {
    pub grv: f64,
    pub mi_clean: f64,
    pub mi_poisoned: f64,
    pub clean_model: TrainedModel,
    pub poisoned_model: TrainedModel,
}

/// `mi(clean, f_clean) - mi(poisoned, f_poisoned)`, each model trained on
/// its own graph with the same configuration and seeds.
pub fn grv(clean: &Graph, poisoned: &Graph, cfg: &TrainConfig, n_samples: usize, seed: u64) -> Result<f64> {
    Ok(grv_detailed(clean, poisoned, cfg, n_samples, seed)?.grv)
}

pub fn grv_detailed(
    clean: &Graph,
    poisoned: &Graph,
    cfg: &TrainConfig,
    n_samples: usize,
    seed: u64,
) -> Result<GrvOutcome> {
    let clean_model = train_gchs(clean, cfg)?;
    let poisoned_model = train_gchs(poisoned, cfg)?;
    grv_from_models(clean, poisoned, clean_model, poisoned_model, n_samples, seed)
}

/// GRV from models that were already trained on each graph.
pub fn grv_from_models(
    clean: &Graph,
    poisoned: &Graph,
    clean_model: TrainedModel,
    poisoned_model: TrainedModel,
    n_samples: usize,
    seed: u64,
) -> Result<GrvOutcome> {
    if clean.n_nodes() != poisoned.n_nodes() {
        return Err(Error::Usage(format!(
            "clean graph has {} nodes, poisoned graph {}",
            clean.n_nodes(),
            poisoned.n_nodes()
        )));
    }
    let mi_clean = contrastive::mi_estimate(clean, &clean_model, n_samples, seed)?;
    let mi_poisoned = contrastive::mi_estimate(poisoned, &poisoned_model, n_samples, seed)?;
    Ok(GrvOutcome {
        grv: mi_clean - mi_poisoned,
        mi_clean,
        mi_poisoned,
        clean_model,
        poisoned_model,
    })
}

/// Metrics of one run; absent entries serialize as `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: Option<f64>,
    pub nmi: Option<f64>,
    pub grv: Option<f64>,
    pub h_y_before: Option<f64>,
    pub h_y_after: Option<f64>,
    pub delta_x_before: Option<f64>,
    pub delta_x_after: Option<f64>,
    pub best_epoch: Option<usize>,
    pub l_pnc: Option<f64>,
    pub runtime_s: f64,
}
