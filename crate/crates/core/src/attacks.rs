//! Structural poisoning used to build test graphs: a label-aware injector
//! of inter-class edges and a greedy first-order attacker on the infoNCE
//! objective. Features are never modified.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tape;
use crate::contrastive;
use crate::encoder::{self, EncoderParams, ProjectionParams};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::seed;
use crate::trainer::{train_gchs, Mode, TrainConfig};

/// Number of structural edits: `B = round(power·|E|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackBudget {
    pub power: f64,
    pub edits: usize,
}

impl AttackBudget {
    pub const DEFAULT_POWERS: [f64; 4] = [0.05, 0.10, 0.15, 0.20];

    pub fn new(power: f64, n_edges: usize) -> Result<Self> {
        if !(power > 0.0 && power <= 1.0) {
            return Err(Error::Usage(format!("attack power must lie in (0, 1], got {power}")));
        }
        let edits = (power * n_edges as f64).round() as usize;
        if edits == 0 {
            return Err(Error::Usage(format!("power {power} on {n_edges} edges rounds to zero edits")));
        }
        Ok(Self { power, edits })
    }
}

/// Attacked graph plus the audit trail of its edits.
#[derive(Debug, Clone, PartialEq)]
pub struct Poisoned {
    pub graph: Graph,
    pub inserted: Vec<Edge>,
    pub removed: Vec<Edge>,
}

impl Poisoned {
    /// Per-edge flag in the poisoned graph's canonical order.
    pub fn inserted_mask(&self) -> Vec<bool> {
        let set: BTreeSet<Edge> = self.inserted.iter().copied().collect();
        self.graph.edges().iter().map(|e| set.contains(e)).collect()
    }
}

/// Adds `B` uniformly chosen absent edges whose endpoints carry different
/// labels.
pub fn inject_heterophily(g: &Graph, budget: AttackBudget, seed: u64) -> Result<Poisoned> {
    let y = g.require_labels()?;
    let n = g.n_nodes();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if y[i] != y[j] && !g.has_edge(i, j) {
                candidates.push((i, j));
            }
        }
    }
    if candidates.len() < budget.edits {
        return Err(Error::InsufficientCandidates {
            requested: budget.edits,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inserted: Vec<Edge> = index::sample(&mut rng, candidates.len(), budget.edits)
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    inserted.sort_unstable();
    let graph = g.with_edges(g.edges().iter().copied().chain(inserted.iter().copied()))?;
    Ok(Poisoned {
        graph,
        inserted,
        removed: Vec::new(),
    })
}

/// Knobs of the greedy attacker.
#[derive(Debug, Clone, PartialEq)]
pub struct ClgaOptions {
    /// Surrogate training; the mode is forced to the baseline.
    pub surrogate: TrainConfig,
    /// Flips between surrogate retrainings; `None` means `⌈B/10⌉`.
    pub retrain_every: Option<usize>,
    /// Highest-scoring flips tried per step. A flip is accepted only if the
    /// frozen surrogate's loss does not drop; with 1 the top score is taken
    /// unconditionally.
    pub candidates: usize,
}

impl ClgaOptions {
    pub fn new(surrogate: TrainConfig) -> Self {
        Self {
            surrogate,
            retrain_every: None,
            candidates: 16,
        }
    }
}

/// Frozen surrogate and fixed view masks of one retraining period.
struct Surrogate {
    theta: EncoderParams,
    phi: ProjectionParams,
    r1: Array2<f64>,
    r2: Array2<f64>,
    cfg: TrainConfig,
}

fn drop_mask(n: usize, p_drop: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Array2::ones((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p_drop {
                m[[i, j]] = 0.0;
                m[[j, i]] = 0.0;
            }
        }
    }
    m
}

impl Surrogate {
    /// `L_info` of the dense adjacency `a` and, if asked, `∂L/∂A`.
    fn loss(&self, a: &Array2<f64>, x: &Array2<f64>, with_grad: bool) -> Result<(f64, Option<Array2<f64>>)> {
        let n = a.nrows();
        let mut tape = Tape::new();
        let av = if with_grad {
            tape.leaf(a.clone())
        } else {
            tape.constant(a.clone())
        };
        let xv = tape.constant(x.clone());
        let eye = tape.constant(Array2::eye(n));
        let theta = self.theta.record(&mut tape, false);
        let phi = self.phi.record(&mut tape, false);
        let mut hs = Vec::with_capacity(2);
        for r in [&self.r1, &self.r2] {
            let rv = tape.constant(r.clone());
            let masked = tape.mul(av, rv)?;
            let with_loops = tape.add(masked, eye)?;
            let a_hat = encoder::normalize_dense(&mut tape, with_loops)?;
            hs.push(encoder::encode(&mut tape, a_hat, xv, &theta, self.cfg.output)?);
        }
        let cfg = contrastive::InfoNceConfig {
            temperature: self.cfg.tau_info,
        };
        let l = contrastive::info_nce(&mut tape, hs[0], hs[1], &phi, cfg)?;
        let value = tape.scalar(l);
        if !with_grad {
            return Ok((value, None));
        }
        tape.backward(l)?;
        Ok((value, Some(tape.grad_or_zeros(av))))
    }
}

fn dense_adjacency(g: &Graph) -> Array2<f64> {
    let n = g.n_nodes();
    let mut a = Array2::zeros((n, n));
    for &(i, j) in g.edges().iter() {
        a[[i, j]] = 1.0;
        a[[j, i]] = 1.0;
    }
    a
}

/// Greedy flips that increase the surrogate's infoNCE loss.
pub fn clga_greedy(g: &Graph, budget: AttackBudget, surrogate_cfg: &TrainConfig, seed: u64) -> Result<Poisoned> {
    Ok(clga_greedy_with(g, budget, &ClgaOptions::new(surrogate_cfg.clone()), seed)?.poisoned)
}

#[derive(Debug, Clone)]
pub struct ClgaOutcome {
    pub poisoned: Poisoned,
    /// Frozen-surrogate loss after each accepted flip, grouped by period;
    /// the first entry of a period is the loss before its first flip.
    pub period_losses: Vec<Vec<f64>>,
}

/// Scored flip candidates `(score, (i, j))`, best first, ties by `(i, j)`.
fn ranked_flips(a: &Array2<f64>, grad: &Array2<f64>, flipped: &BTreeSet<Edge>) -> Vec<(f64, Edge)> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if flipped.contains(&(i, j)) {
                continue;
            }
            let sym = grad[[i, j]] + grad[[j, i]];
            let score = if a[[i, j]] == 0.0 { sym } else { -sym };
            out.push((score, (i, j)));
        }
    }
    out.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    out
}

/// [`clga_greedy`] with explicit options and the loss trace.
pub fn clga_greedy_with(g: &Graph, budget: AttackBudget, opts: &ClgaOptions, seed: u64) -> Result<ClgaOutcome> {
    let n = g.n_nodes();
    if n < 2 {
        return Err(Error::Usage("attack needs at least two nodes".into()));
    }
    if budget.edits > n * (n - 1) / 2 {
        return Err(Error::InsufficientCandidates {
            requested: budget.edits,
            available: n * (n - 1) / 2,
        });
    }
    let every = opts.retrain_every.unwrap_or(budget.edits.div_ceil(10)).max(1);
    let cfg = TrainConfig {
        mode: Mode::Baseline,
        seed: seed::derive(seed, "surrogate"),
        ..opts.surrogate.clone()
    };
    let x = g.features();
    let mut a = dense_adjacency(g);
    let mut flipped = BTreeSet::new();
    let mut current = g.clone();
    let mut period_losses = Vec::new();

    let mut done = 0;
    let mut period = 0u64;
    while done < budget.edits {
        let model = train_gchs(&current, &cfg)?;
        let sur = Surrogate {
            theta: model.encoder,
            phi: model.projection,
            r1: drop_mask(n, cfg.p_drop, seed::derive_at(seed, "clga_view1", period)),
            r2: drop_mask(n, cfg.p_drop, seed::derive_at(seed, "clga_view2", period)),
            cfg: cfg.clone(),
        };
        let (mut loss, _) = sur.loss(&a, x, false)?;
        let mut losses = vec![loss];
        for _ in 0..every.min(budget.edits - done) {
            let (_, grad) = sur.loss(&a, x, true)?;
            let ranked = ranked_flips(&a, &grad.expect("gradient requested"), &flipped);
            let mut chosen: Option<(Edge, f64)> = None;
            let mut fallback: Option<(Edge, f64)> = None;
            for &(_, (i, j)) in ranked.iter().take(opts.candidates.max(1)) {
                if opts.candidates <= 1 {
                    chosen = Some(((i, j), f64::NAN));
                    break;
                }
                let mut trial = a.clone();
                trial[[i, j]] = 1.0 - trial[[i, j]];
                trial[[j, i]] = trial[[i, j]];
                let (l, _) = sur.loss(&trial, x, false)?;
                if l >= loss {
                    chosen = Some(((i, j), l));
                    break;
                }
                if fallback.is_none_or(|f| l > f.1) {
                    fallback = Some(((i, j), l));
                }
            }
            let ((i, j), l) = chosen.or(fallback).ok_or_else(|| Error::Usage("no flip available".into()))?;
            a[[i, j]] = 1.0 - a[[i, j]];
            a[[j, i]] = a[[i, j]];
            flipped.insert((i, j));
            loss = if l.is_nan() { sur.loss(&a, x, false)?.0 } else { l };
            losses.push(loss);
            done += 1;
        }
        period_losses.push(losses);
        current = graph_from_dense(g, &a)?;
        period += 1;
    }

    let mut inserted = Vec::new();
    let mut removed = Vec::new();
    for &(i, j) in &flipped {
        if g.has_edge(i, j) {
            removed.push((i, j));
        } else {
            inserted.push((i, j));
        }
    }
    Ok(ClgaOutcome {
        poisoned: Poisoned {
            graph: current,
            inserted,
            removed,
        },
        period_losses,
    })
}

fn graph_from_dense(g: &Graph, a: &Array2<f64>) -> Result<Graph> {
    let n = a.nrows();
    let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| a[[i, j]] != 0.0);
    g.with_edges(edges)
}
