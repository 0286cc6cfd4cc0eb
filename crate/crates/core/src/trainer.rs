//! Joint training of the sanitizer and the contrastive encoder.
//!
//! Every epoch samples a sanitation view from the edge probabilities and a
//! random edge-drop view, takes one Adam step on the encoder and projection
//! head, one projected step on the probabilities, and scores the updated
//! encoder with the pseudo normalized cut on the hard-masked sanitized
//! graph. The returned model is the snapshot with the lowest (smoothed)
//! score.

use std::collections::VecDeque;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{gradcheck, sigmoid, GradcheckReport, Tape, Var};
use crate::contrastive::{self, InfoNceConfig};
use crate::encoder::{self, EncoderParams, EncoderVars, OutputActivation, ProjectionParams, ProjectionVars};
use crate::error::{Error, Result};
use crate::eval;
use crate::graph::{self, Graph};
use crate::optim::Adam;
use crate::sanitizer::{self, column, MaskLaw, SanitizerState};
use crate::seed;

pub const DEFAULT_ETA_GRID: [f64; 8] = [0.0, 0.0001, 0.001, 0.01, 0.1, 1.0, 3.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `L_info + η·δ_x` with a learned sanitation view.
    #[default]
    Full,
    /// Probabilities fitted to `η·δ_x` alone, then contrastive training on
    /// a frozen sanitized graph.
    NoInfo,
    /// Learned sanitation view trained by `L_info` only.
    NoDelta,
    /// Two random edge-drop views, no sanitizer.
    Baseline,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "no_info" => Ok(Self::NoInfo),
            "no_delta" => Ok(Self::NoDelta),
            "baseline" => Ok(Self::Baseline),
            _ => Err(Error::Usage(format!("unknown mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::NoInfo => "no_info",
            Self::NoDelta => "no_delta",
            Self::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: Mode,
    pub eta: f64,
    pub epochs: usize,
    pub lr: f64,
    /// PGD step on the edge probabilities.
    pub alpha: f64,
    pub tau_info: f64,
    pub tau_g: f64,
    pub p_drop: f64,
    /// Total drop-probability budget; `None` means `0.1·|E|`.
    pub budget: Option<f64>,
    pub mask_law: MaskLaw,
    pub hidden_dim: usize,
    pub out_dim: usize,
    pub output: OutputActivation,
    /// Trailing window of the pseudo normalized cut smoother.
    pub pnc_window: usize,
    /// Probability-only epochs of the first `NoInfo` stage.
    pub no_info_p_epochs: usize,
    /// When false the first view is a random edge-drop view as well.
    pub sanitizer_enabled: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            eta: 1.0,
            epochs: 1000,
            lr: 0.0005,
            alpha: 0.01,
            tau_info: 0.5,
            tau_g: 0.5,
            p_drop: 0.3,
            budget: None,
            mask_law: MaskLaw::Gumbel,
            hidden_dim: 128,
            out_dim: 32,
            output: OutputActivation::Relu,
            pnc_window: 5,
            no_info_p_epochs: 300,
            sanitizer_enabled: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Usage(what.to_string()));
        if !(self.eta >= 0.0) {
            return bad("eta must be non-negative");
        }
        if !(self.lr > 0.0) || !(self.alpha >= 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.tau_info > 0.0) || !(self.tau_g > 0.0) {
            return bad("temperatures must be positive");
        }
        if !(0.0..1.0).contains(&self.p_drop) {
            return bad("p_drop must lie in [0, 1)");
        }
        if self.hidden_dim == 0 || self.out_dim == 0 || self.pnc_window == 0 {
            return bad("dimensions and the smoothing window must be positive");
        }
        if let Some(b) = self.budget {
            if !(b > 0.0) {
                return bad("budget must be positive");
            }
        }
        Ok(())
    }

    pub fn resolved_budget(&self, n_edges: usize) -> f64 {
        self.budget.unwrap_or(0.1 * n_edges as f64)
    }

    /// Whether the first view comes from the learned probabilities.
    pub fn learns_sanitizer(&self) -> bool {
        self.sanitizer_enabled && matches!(self.mode, Mode::Full | Mode::NoDelta)
    }

    fn info_nce(&self) -> InfoNceConfig {
        InfoNceConfig {
            temperature: self.tau_info,
        }
    }

    fn new_sanitizer(&self, n_edges: usize) -> Result<SanitizerState> {
        SanitizerState::new(
            n_edges,
            self.resolved_budget(n_edges),
            self.tau_g,
            self.alpha,
            self.mask_law,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub l_info: f64,
    /// `tr(Xᵀ L X)` on the epoch's first (hard-masked) view.
    pub delta_x: f64,
    pub total: f64,
    pub l_pnc: f64,
    /// Trailing mean of `l_pnc`; the selection criterion.
    pub l_pnc_smoothed: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub encoder: EncoderParams,
    pub projection: ProjectionParams,
    /// Final edge probabilities (the initialization when never updated).
    pub p: Vec<f64>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    /// First-view embeddings at the selected epoch.
    pub embeddings: Array2<f64>,
    /// First-view edge retention at the selected epoch.
    pub retention: Vec<f64>,
    /// Fixed first-view retention of the `NoInfo` variant.
    pub frozen_retention: Option<Vec<f64>>,
    pub config: TrainConfig,
}

impl TrainedModel {
    pub fn best(&self) -> &EpochRecord {
        &self.history[self.best_epoch]
    }

    /// Retention weights of a fresh first and second view of `g`.
    pub fn draw_views(&self, g: &Graph, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        let cfg = &self.config;
        let first = if let Some(r) = &self.frozen_retention {
            check_len(r.len(), g)?;
            r.clone()
        } else if cfg.learns_sanitizer() {
            check_len(self.p.len(), g)?;
            let mut s = cfg.new_sanitizer(g.n_edges())?;
            s.set_probabilities(self.p.clone())?;
            let (m, _) = s.sample_mask(seed::derive(seed, "mask"))?;
            sanitizer::apply_mask(g.n_edges(), &m)?
        } else {
            random_view(g, cfg.p_drop, seed::derive(seed, "view1"))?
        };
        let second = random_view(g, cfg.p_drop, seed::derive(seed, "view2"))?;
        Ok((first, second))
    }

    /// `L_info` of the two retention views under the stored weights.
    pub fn info_nce_on(&self, g: &Graph, r1: &[f64], r2: &[f64]) -> Result<f64> {
        let mut tape = Tape::new();
        let x = tape.constant(g.features().clone());
        let theta = self.encoder.record(&mut tape, false);
        let phi = self.projection.record(&mut tape, false);
        let mut view = |r: &[f64]| -> Result<Var> {
            let rv = tape.constant(column(r));
            let a = encoder::normalized_adjacency(&mut tape, rv, g.edges(), g.n_nodes())?;
            encoder::encode(&mut tape, a, x, &theta, self.config.output)
        };
        let h1 = view(r1)?;
        let h2 = view(r2)?;
        let l = contrastive::info_nce(&mut tape, h1, h2, &phi, self.config.info_nce())?;
        Ok(tape.scalar(l))
    }

    /// Embeddings of `g` with the given edge retention (`None` keeps all).
    pub fn embed(&self, g: &Graph, retention: Option<&[f64]>) -> Result<Array2<f64>> {
        let a = graph::normalized_adjacency(g, retention)?;
        encoder::embed(&a, g.features(), &self.encoder, self.config.output)
    }
}

fn check_len(len: usize, g: &Graph) -> Result<()> {
    if len != g.n_edges() {
        return Err(Error::dim(format!("model has {len} edge weights, graph has {} edges", g.n_edges())));
    }
    Ok(())
}

/// Keeps each edge independently with probability `1 - p_drop`.
pub fn random_view(g: &Graph, p_drop: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&p_drop) {
        return Err(Error::Usage(format!("p_drop must lie in [0, 1), got {p_drop}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..g.n_edges())
        .map(|_| if rng.random::<f64>() < p_drop { 0.0 } else { 1.0 })
        .collect())
}

/// `Σ_k (σ(H)ᵀ L σ(H))_kk / (σ(H)ᵀ D̃ σ(H))_kk` with the logistic `σ`.
pub fn pseudo_normalized_cut(h: &Array2<f64>, l: &Array2<f64>, degrees: &Array1<f64>) -> Result<f64> {
    let s = h.mapv(sigmoid);
    Ok(graph::cut_ratios(l, degrees, &s)?.sum())
}

/// Pseudo normalized cut of `h` on `g` with edge retention `r`.
pub fn pseudo_normalized_cut_on(g: &Graph, r: Option<&[f64]>, h: &Array2<f64>) -> Result<f64> {
    let l = graph::laplacian(g, r)?;
    let d = graph::self_loop_degrees(g, r)?;
    pseudo_normalized_cut(h, &l, &d)
}

/// `tr(XᵀX) - Σ X ⊙ (Â X)` on the tape, i.e. `tr(Xᵀ (I - Â) X)`.
fn delta_x(tape: &mut Tape, a_hat: Var, x: Var, xtx: f64) -> Result<Var> {
    let ax = tape.matmul(a_hat, x)?;
    let q = tape.mul(x, ax)?;
    let q = tape.sum(q);
    let neg = tape.scale(q, -1.0);
    Ok(tape.offset(neg, xtx))
}

/// Handles to the pieces of one epoch's objective.
#[derive(Debug, Clone, Copy)]
pub struct Objective {
    pub l_info: Var,
    /// `tr(Xᵀ L X)` of the first view.
    pub delta_x: Var,
    /// `l_info + η·delta_x` when `with_delta`, else `l_info`.
    pub total: Var,
    pub h1: Var,
}

/// Builds the training objective from two `|E|×1` retention columns.
#[allow(clippy::too_many_arguments)]
pub fn objective(
    tape: &mut Tape,
    g: &Graph,
    x: Var,
    theta: &EncoderVars,
    phi: &ProjectionVars,
    r1: Var,
    r2: Var,
    cfg: &TrainConfig,
    with_delta: bool,
) -> Result<Objective> {
    let n = g.n_nodes();
    let xtx = g.features().mapv(|v| v * v).sum();
    let a1 = encoder::normalized_adjacency(tape, r1, g.edges(), n)?;
    let a2 = encoder::normalized_adjacency(tape, r2, g.edges(), n)?;
    let h1 = encoder::encode(tape, a1, x, theta, cfg.output)?;
    let h2 = encoder::encode(tape, a2, x, theta, cfg.output)?;
    let l_info = contrastive::info_nce(tape, h1, h2, phi, cfg.info_nce())?;
    let delta_x = delta_x(tape, a1, x, xtx)?;
    let total = if with_delta {
        let scaled = tape.scale(delta_x, cfg.eta);
        tape.add(l_info, scaled)?
    } else {
        l_info
    };
    Ok(Objective {
        l_info,
        delta_x,
        total,
        h1,
    })
}

/// Gradient check of the full objective on a random 6-node graph, one
/// report per parameter tensor (`W1 W2 U1 b1 U2 b2 P`). The probabilities
/// are checked through the relaxed mask, without rounding.
pub fn gradcheck_objective(seed: u64, h: f64) -> Result<Vec<(&'static str, GradcheckReport)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, "gradcheck"));
    let n = 6;
    let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0));
    let mut edges = vec![(0, 1), (2, 3), (4, 5)];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < 0.4 {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::new(x, edges, None)?;
    let m = g.n_edges();
    let cfg = TrainConfig {
        hidden_dim: 5,
        out_dim: 4,
        eta: 0.7,
        ..TrainConfig::default()
    };
    let theta = EncoderParams::glorot(3, cfg.hidden_dim, cfg.out_dim, &mut rng);
    let mut phi = ProjectionParams::glorot(cfg.out_dim, &mut rng);
    phi.b1.mapv_inplace(|_| rng.random_range(-0.3..0.3));
    phi.b2.mapv_inplace(|_| rng.random_range(-0.3..0.3));
    let mut san = SanitizerState::new(m, m as f64, cfg.tau_g, cfg.alpha, cfg.mask_law)?;
    san.set_probabilities((0..m).map(|_| rng.random_range(0.1..0.9)).collect())?;
    let noise = san.noise(rng.random());
    let r2 = column(&random_view(&g, cfg.p_drop, rng.random())?);
    let p = column(san.probabilities());

    let names = ["W1", "W2", "U1", "b1", "U2", "b2", "P"];
    let tensors = [&theta.w1, &theta.w2, &phi.u1, &phi.b1, &phi.u2, &phi.b2, &p];
    let mut out = Vec::with_capacity(names.len());
    for (k, name) in names.into_iter().enumerate() {
        let loss = |tape: &mut Tape, v: Var| -> Result<Var> {
            let vars: Vec<Var> = tensors
                .iter()
                .enumerate()
                .map(|(i, t)| if i == k { v } else { tape.constant((*t).clone()) })
                .collect();
            let th = EncoderVars {
                w1: vars[0],
                w2: vars[1],
            };
            let ph = ProjectionVars {
                u1: vars[2],
                b1: vars[3],
                u2: vars[4],
                b2: vars[5],
            };
            let mask = san.mask_on_tape(tape, vars[6], &noise, false)?;
            let r1 = tape.scale(mask, -1.0);
            let r1 = tape.offset(r1, 1.0);
            let r2 = tape.constant(r2.clone());
            let x = tape.constant(g.features().clone());
            Ok(objective(tape, &g, x, &th, &ph, r1, r2, &cfg, true)?.total)
        };
        out.push((name, gradcheck(loss, tensors[k], h)?));
    }
    Ok(out)
}

fn tensors(theta: &EncoderParams, phi: &ProjectionParams) -> Vec<Array2<f64>> {
    vec![
        theta.w1.clone(),
        theta.w2.clone(),
        phi.u1.clone(),
        phi.b1.clone(),
        phi.u2.clone(),
        phi.b2.clone(),
    ]
}

/// Trains with the configured mode. See [`train_gchs_with`].
pub fn train_gchs(g: &Graph, cfg: &TrainConfig) -> Result<TrainedModel> {
    train_gchs_with(g, cfg, |_| {})
}

/// Fits the `NoInfo` probabilities to `η·δ_x` alone and returns the
/// retention that removes the `⌊ε⌋` most probable edges.
fn fit_no_info_mask(g: &Graph, cfg: &TrainConfig, san: &mut SanitizerState) -> Result<Vec<f64>> {
    let xtx = g.features().mapv(|v| v * v).sum();
    for t in 0..cfg.no_info_p_epochs {
        let mut tape = Tape::new();
        let x = tape.constant(g.features().clone());
        let p = san.record(&mut tape);
        let noise = san.noise(seed::derive_at(cfg.seed, "no_info_mask", t as u64));
        let m = san.mask_on_tape(&mut tape, p, &noise, true)?;
        let r = tape.scale(m, -1.0);
        let r = tape.offset(r, 1.0);
        let a = encoder::normalized_adjacency(&mut tape, r, g.edges(), g.n_nodes())?;
        let d = delta_x(&mut tape, a, x, xtx)?;
        let loss = tape.scale(d, cfg.eta);
        tape.backward(loss)?;
        let grad = tape.grad_or_zeros(p);
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                epoch: t,
                detail: "sanitizer gradient in the probability-only stage".into(),
            });
        }
        san.pgd_step(grad.as_slice().expect("contiguous"))?;
    }
    let k = (san.budget.floor() as usize).min(g.n_edges());
    let mut order: Vec<usize> = (0..g.n_edges()).collect();
    let p = san.probabilities();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let mut retention = vec![1.0; g.n_edges()];
    for &e in &order[..k] {
        retention[e] = 0.0;
    }
    Ok(retention)
}

/// Epoch, smoothed score, weights, embeddings, and retention of the best
/// epoch so far.
type Snapshot = (usize, f64, EncoderParams, ProjectionParams, Array2<f64>, Vec<f64>);

/// Runs `cfg.epochs` epochs, calling `on_epoch` after each record is
/// complete. A non-finite loss aborts with [`Error::NonFinite`] after the
/// records of all earlier epochs have been delivered.
pub fn train_gchs_with<F: FnMut(&EpochRecord)>(
    g: &Graph,
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainedModel> {
    cfg.validate()?;
    if g.n_nodes() == 0 {
        return Err(Error::Usage("cannot train on an empty graph".into()));
    }
    let n = g.n_nodes();
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, "init"));
    let mut theta = EncoderParams::glorot(g.features().ncols(), cfg.hidden_dim, cfg.out_dim, &mut init_rng);
    let mut phi = ProjectionParams::glorot(cfg.out_dim, &mut init_rng);
    let mut san = cfg.new_sanitizer(g.n_edges())?;
    let learn = cfg.learns_sanitizer();

    let frozen = if cfg.mode == Mode::NoInfo {
        Some(fit_no_info_mask(g, cfg, &mut san)?)
    } else {
        None
    };
    if cfg.epochs == 0 {
        return Err(Error::NoEpochs);
    }

    let params = tensors(&theta, &phi);
    let mut adam = Adam::new(cfg.lr, &params.iter().collect::<Vec<_>>());
    let use_delta = cfg.mode == Mode::Full && learn;

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut window: VecDeque<f64> = VecDeque::with_capacity(cfg.pnc_window);
    let mut best: Option<Snapshot> = None;

    for t in 0..cfg.epochs {
        let ts = t as u64;
        let mut tape = Tape::new();
        let x = tape.constant(g.features().clone());
        let th = theta.record(&mut tape, true);
        let ph = phi.record(&mut tape, true);

        let mut p_var = None;
        let r1 = if learn {
            let p = san.record(&mut tape);
            p_var = Some(p);
            let noise = san.noise(seed::derive_at(cfg.seed, "mask", ts));
            let m = san.mask_on_tape(&mut tape, p, &noise, true)?;
            let r = tape.scale(m, -1.0);
            tape.offset(r, 1.0)
        } else if let Some(r) = &frozen {
            tape.constant(column(r))
        } else {
            let r = random_view(g, cfg.p_drop, seed::derive_at(cfg.seed, "view1", ts))?;
            tape.constant(column(&r))
        };
        let r2 = random_view(g, cfg.p_drop, seed::derive_at(cfg.seed, "view2", ts))?;
        let r2 = tape.constant(column(&r2));

        let terms = objective(&mut tape, g, x, &th, &ph, r1, r2, cfg, use_delta)?;
        let (l_info, dx, total) = (terms.l_info, terms.delta_x, terms.total);

        let (l_info_v, dx_v, total_v) = (tape.scalar(l_info), tape.scalar(dx), tape.scalar(total));
        if !total_v.is_finite() {
            return Err(Error::NonFinite {
                epoch: t,
                detail: format!("l_info={l_info_v} delta_x={dx_v}"),
            });
        }
        tape.backward(total)?;

        let grads: Vec<Array2<f64>> = th
            .all()
            .into_iter()
            .chain(ph.all())
            .map(|v| tape.grad_or_zeros(v))
            .collect();
        if grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite {
                epoch: t,
                detail: "encoder gradient".into(),
            });
        }
        if let Some(p) = p_var {
            let gp = tape.grad_or_zeros(p);
            if gp.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    epoch: t,
                    detail: "sanitizer gradient".into(),
                });
            }
            san.pgd_step(gp.as_slice().expect("contiguous"))?;
        }
        {
            let [w1, w2] = theta.tensors_mut();
            let [u1, b1, u2, b2] = phi.tensors_mut();
            adam.step(&mut [w1, w2, u1, b1, u2, b2], &grads)?;
        }

        // Score the updated encoder on this epoch's first view. The baseline
        // has no sanitation view; its first view for scoring is the input
        // graph itself.
        let retention: Vec<f64> = if learn || frozen.is_some() {
            tape.value(r1).iter().copied().collect()
        } else {
            vec![1.0; g.n_edges()]
        };
        drop(tape);
        let a_hat = graph::normalized_adjacency(g, Some(&retention))?;
        let h = encoder::embed(&a_hat, g.features(), &theta, cfg.output)?;
        let lap = Array2::eye(n) - &a_hat;
        let deg = graph::self_loop_degrees(g, Some(&retention))?;
        let l_pnc = pseudo_normalized_cut(&h, &lap, &deg)?;
        if !l_pnc.is_finite() {
            return Err(Error::NonFinite {
                epoch: t,
                detail: "pseudo normalized cut".into(),
            });
        }
        if window.len() == cfg.pnc_window {
            window.pop_front();
        }
        window.push_back(l_pnc);
        let smoothed = window.iter().sum::<f64>() / window.len() as f64;

        let record = EpochRecord {
            epoch: t,
            l_info: l_info_v,
            delta_x: dx_v,
            total: total_v,
            l_pnc,
            l_pnc_smoothed: smoothed,
        };
        on_epoch(&record);
        history.push(record);
        if best.as_ref().is_none_or(|b| smoothed < b.1) {
            best = Some((t, smoothed, theta.clone(), phi.clone(), h, retention));
        }
    }

    let (best_epoch, _, encoder, projection, embeddings, retention) = best.ok_or(Error::NoEpochs)?;
    Ok(TrainedModel {
        encoder,
        projection,
        p: san.probabilities().to_vec(),
        history,
        best_epoch,
        embeddings,
        retention,
        frozen_retention: frozen,
        config: cfg.clone(),
    })
}

/// Outcome of an η sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub models: Vec<TrainedModel>,
    /// Wall-clock training time of each model.
    pub seconds: Vec<f64>,
    /// Selected `L_pnc` (smoothed) of each model.
    pub pnc: Vec<f64>,
    pub best_index: usize,
    /// Test accuracy of each model when the graph has labels.
    pub accuracy: Option<Vec<f64>>,
    /// Pearson correlation between `pnc` and `accuracy`.
    pub pearson: Option<f64>,
}

impl SweepResult {
    pub fn best_eta(&self) -> f64 {
        self.grid[self.best_index]
    }
}

/// Trains one model per η with shared seeds and picks the one with the
/// lowest selected `L_pnc`, preferring the smaller η on ties. Accuracy is
/// only measured for the correlation report and never used for selection.
pub fn sweep_eta(g: &Graph, grid: &[f64], cfg: &TrainConfig) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Usage("empty eta grid".into()));
    }
    let mut models = Vec::with_capacity(grid.len());
    let mut seconds = Vec::with_capacity(grid.len());
    for &eta in grid {
        let c = TrainConfig { eta, ..cfg.clone() };
        let start = std::time::Instant::now();
        models.push(train_gchs(g, &c)?);
        seconds.push(start.elapsed().as_secs_f64());
    }
    let pnc: Vec<f64> = models.iter().map(|m| m.best().l_pnc_smoothed).collect();
    let mut best_index = 0;
    for k in 1..grid.len() {
        let better = pnc[k] < pnc[best_index] || (pnc[k] == pnc[best_index] && grid[k] < grid[best_index]);
        if better {
            best_index = k;
        }
    }
    let accuracy = match g.labels() {
        Some(y) => {
            let split = eval::Split::random(g.n_nodes(), eval::DEFAULT_SPLIT, seed::derive(cfg.seed, "split"))?;
            let acc = models
                .iter()
                .map(|m| eval::train_logreg(&m.embeddings, y, &split, seed::derive(cfg.seed, "logreg")))
                .collect::<Result<Vec<_>>>()?;
            Some(acc)
        }
        None => None,
    };
    let pearson = accuracy.as_ref().and_then(|a| eval::pearson(&pnc, a));
    Ok(SweepResult {
        grid: grid.to_vec(),
        models,
        seconds,
        pnc,
        best_index,
        accuracy,
        pearson,
    })
}
