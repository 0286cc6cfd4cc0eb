//! Cosine similarity, the two-view infoNCE objective, and the mutual
//! information estimate `I ≈ -L_info`.

use std::sync::Arc;

use ndarray::Array2;

use crate::autodiff::{Tape, Var};
use crate::encoder::{self, ProjectionVars};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;
use crate::trainer::TrainedModel;

pub const NORM_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoNceConfig {
    pub temperature: f64,
}

impl Default for InfoNceConfig {
    fn default() -> Self {
        Self { temperature: 0.5 }
    }
}

impl InfoNceConfig {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::Usage(format!("temperature must be positive, got {temperature}")));
        }
        Ok(Self { temperature })
    }
}

/// Rows of `z` divided by their norms, floored at [`NORM_FLOOR`].
fn normalize_rows(tape: &mut Tape, z: Var) -> Result<Var> {
    let d = tape.value(z).ncols();
    let norms = tape.row_norms(z, NORM_FLOOR);
    let ones = tape.constant(Array2::ones((1, d)));
    let spread = tape.matmul(norms, ones)?;
    tape.div(z, spread)
}

/// `S_ij = ⟨a_i, b_j⟩ / (max(‖a_i‖, 1e-8) · max(‖b_j‖, 1e-8))`.
pub fn cosine_matrix(tape: &mut Tape, a: Var, b: Var) -> Result<Var> {
    let an = normalize_rows(tape, a)?;
    let bn = normalize_rows(tape, b)?;
    let bt = tape.transpose(bn);
    tape.matmul(an, bt)
}

/// Mask selecting every inter-view entry and the off-diagonal intra-view
/// entries of `[S_inter | S_intra]`.
fn negative_mask(n: usize) -> Arc<Array2<f64>> {
    Arc::new(Array2::from_shape_fn((n, 2 * n), |(i, j)| {
        if j == n + i {
            0.0
        } else {
            1.0
        }
    }))
}

/// infoNCE on already projected embeddings:
/// `(1/2N) Σ_i [l(u_i, v_i) + l(v_i, u_i)]`, where
/// `l(u_i, v_i) = -log(e^{ρ_ii/τ} / (Σ_k e^{ρ(u_i,v_k)/τ} + Σ_{k≠i} e^{ρ(u_i,u_k)/τ}))`.
pub fn info_nce_projected(tape: &mut Tape, z1: Var, z2: Var, cfg: InfoNceConfig) -> Result<Var> {
    let (n, d) = tape.value(z1).dim();
    if tape.value(z2).dim() != (n, d) {
        return Err(Error::dim(format!(
            "views {:?} and {:?}",
            tape.value(z1).dim(),
            tape.value(z2).dim()
        )));
    }
    if n == 0 {
        return Err(Error::Usage("infoNCE on zero nodes".into()));
    }
    let inv_t = 1.0 / cfg.temperature;
    let u = normalize_rows(tape, z1)?;
    let v = normalize_rows(tape, z2)?;
    if inv_t <= 300.0 {
        tape.info_nce_normalized(u, v, inv_t)
    } else {
        info_nce_composed(tape, u, v, inv_t)
    }
}

/// The same objective assembled from generic primitives with per-row max
/// subtraction; used below the fused primitive's temperature range.
fn info_nce_composed(tape: &mut Tape, u: Var, v: Var, inv_t: f64) -> Result<Var> {
    let n = tape.value(u).nrows();
    let ut = tape.transpose(u);
    let vt = tape.transpose(v);
    let s_uv = tape.matmul(u, vt)?;
    let s_uv = tape.scale(s_uv, inv_t);
    let s_uu = tape.matmul(u, ut)?;
    let s_uu = tape.scale(s_uu, inv_t);
    let s_vu = tape.transpose(s_uv);
    let s_vv = tape.matmul(v, vt)?;
    let s_vv = tape.scale(s_vv, inv_t);

    let mask = negative_mask(n);
    let left = tape.concat_cols(s_uv, s_uu)?;
    let right = tape.concat_cols(s_vu, s_vv)?;
    let lse_u = tape.masked_log_sum_exp_rows(left, Arc::clone(&mask))?;
    let lse_v = tape.masked_log_sum_exp_rows(right, mask)?;
    let lse_u = tape.sum(lse_u);
    let lse_v = tape.sum(lse_v);
    let pos = tape.trace(s_uv)?;
    let pos = tape.scale(pos, 2.0);
    let total = tape.add(lse_u, lse_v)?;
    let total = tape.sub(total, pos)?;
    Ok(tape.scale(total, 1.0 / (2.0 * n as f64)))
}

/// infoNCE of two embedding matrices after the projection head `phi`.
pub fn info_nce(
    tape: &mut Tape,
    h1: Var,
    h2: Var,
    phi: &ProjectionVars,
    cfg: InfoNceConfig,
) -> Result<Var> {
    let z1 = encoder::project(tape, h1, phi)?;
    let z2 = encoder::project(tape, h2, phi)?;
    info_nce_projected(tape, z1, z2, cfg)
}

/// Mean of `-L_info` over `n_samples` view pairs drawn the way `model` was
/// trained: a sanitation view from its final probabilities (or its frozen
/// mask) against a random edge-drop view, or two random views for the
/// baseline.
pub fn mi_estimate(g: &Graph, model: &TrainedModel, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Usage("mi_estimate needs at least one sample".into()));
    }
    let mut total = 0.0;
    for s in 0..n_samples as u64 {
        let (r1, r2) = model.draw_views(g, seed::derive_at(seed, "mi", s))?;
        total -= model.info_nce_on(g, &r1, &r2)?;
    }
    Ok(total / n_samples as f64)
}
