//! Learnable edge-dropping view.
//!
//! Each edge carries a drop probability `P_e`. A hard mask is sampled as
//! `M_e = ⌊sigmoid((log P_e + g_e) / τ_g) + 1/2⌉` with one standard Gumbel
//! `g_e` per edge; on the tape the rounding is straight-through, so the
//! forward pass sees the hard mask and the backward pass the relaxed one.
//! Since `M_e = 1` exactly when `g_e ≥ -log P_e`, the hard mask has
//! `Pr[M_e = 1] = 1 - exp(-P_e)` whatever `τ_g` is. [`MaskLaw::Logistic`]
//! replaces `log P_e + g` with `logit(P_e) + g - g'`, which makes the mask an
//! exact `Bernoulli(P_e)` draw.
//!
//! Probabilities live in `S = {P : p_min ≤ P_e ≤ 1, Σ P_e ≤ ε}` and are
//! updated by projected gradient descent; [`project_budget`] finds the
//! projection's shift by bisection.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel};

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};

pub const DEFAULT_P_MIN: f64 = 1e-4;
pub const DEFAULT_XI: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskLaw {
    /// `log P + g`, marginal `1 - exp(-P)`.
    #[default]
    Gumbel,
    /// `logit(P) + g - g'`, marginal `P`.
    Logistic,
}

impl std::str::FromStr for MaskLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gumbel" => Ok(Self::Gumbel),
            "logistic" => Ok(Self::Logistic),
            _ => Err(Error::Usage(format!("unknown mask law {s:?}"))),
        }
    }
}

impl std::fmt::Display for MaskLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gumbel => "gumbel",
            Self::Logistic => "logistic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SanitizerState {
    p: Vec<f64>,
    pub budget: f64,
    pub tau_g: f64,
    pub p_min: f64,
    pub alpha: f64,
    pub xi: f64,
    pub law: MaskLaw,
}

/// Noise for one mask draw, one entry per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskNoise(pub Vec<f64>);

impl SanitizerState {
    /// Every edge starts at `budget / (2|E|)`, raised to `p_min` if needed.
    pub fn new(n_edges: usize, budget: f64, tau_g: f64, alpha: f64, law: MaskLaw) -> Result<Self> {
        let p_min = DEFAULT_P_MIN;
        if !(tau_g > 0.0) || !(alpha >= 0.0) {
            return Err(Error::Usage(format!("need tau_g > 0 and alpha >= 0, got {tau_g}, {alpha}")));
        }
        let needed = n_edges as f64 * p_min;
        if !(budget >= needed) || (n_edges > 0 && !(budget > 0.0)) {
            return Err(Error::InfeasibleBudget { budget, needed });
        }
        let init = (budget / (2.0 * n_edges.max(1) as f64)).clamp(p_min, 1.0);
        let mut s = Self {
            p: vec![init; n_edges],
            budget,
            tau_g,
            p_min,
            alpha,
            xi: DEFAULT_XI,
            law,
        };
        s.p = project_budget(&s.p, budget, p_min, s.upper(), s.xi)?;
        Ok(s)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn n_edges(&self) -> usize {
        self.p.len()
    }

    /// Replaces `P`, checking the box and budget.
    pub fn set_probabilities(&mut self, p: Vec<f64>) -> Result<()> {
        if p.len() != self.p.len() {
            return Err(Error::dim(format!("{} probabilities for {} edges", p.len(), self.p.len())));
        }
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&v| !(v >= self.p_min && v <= self.upper())) || sum > self.budget + self.xi {
            return Err(Error::Invariant("probabilities outside the feasible set".into()));
        }
        self.p = p;
        Ok(())
    }

    /// Largest allowed probability: 1, or `1 - p_min` under the logistic law
    /// so that `logit(P)` stays finite.
    pub fn upper(&self) -> f64 {
        match self.law {
            MaskLaw::Gumbel => 1.0,
            MaskLaw::Logistic => 1.0 - self.p_min,
        }
    }

    fn check(&self) -> Result<()> {
        if let Some((e, &v)) = self.p.iter().enumerate().find(|(_, &v)| !(v >= self.p_min)) {
            return Err(Error::Invariant(format!("P[{e}] = {v} below p_min {}", self.p_min)));
        }
        Ok(())
    }

    /// Gumbel (or logistic) noise for one draw, deterministic in `seed`.
    pub fn noise(&self, seed: u64) -> MaskNoise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Gumbel::new(0.0, 1.0).expect("unit scale");
        MaskNoise(match self.law {
            MaskLaw::Gumbel => (0..self.p.len()).map(|_| g.sample(&mut rng)).collect(),
            MaskLaw::Logistic => (0..self.p.len())
                .map(|_| g.sample(&mut rng) - g.sample(&mut rng))
                .collect(),
        })
    }

    fn logit(&self, p: f64) -> f64 {
        match self.law {
            MaskLaw::Gumbel => p.ln(),
            MaskLaw::Logistic => p.ln() - (1.0 - p).ln(),
        }
    }

    /// Relaxed mask `sigmoid((logit(P) + noise) / τ_g)` without a tape.
    pub fn soft_mask(&self, noise: &MaskNoise) -> Result<Vec<f64>> {
        self.check()?;
        Ok(self
            .p
            .iter()
            .zip(&noise.0)
            .map(|(&p, &g)| crate::autodiff::sigmoid((self.logit(p) + g) / self.tau_g))
            .collect())
    }

    /// Hard 0/1 mask (1 = drop); ties at exactly 1/2 drop.
    pub fn hard_mask(&self, noise: &MaskNoise) -> Result<Vec<f64>> {
        Ok(self.soft_mask(noise)?.into_iter().map(|s| (s + 0.5).floor()).collect())
    }

    /// Draws a mask with fresh noise from `seed`: `(hard mask, noise)`.
    pub fn sample_mask(&self, seed: u64) -> Result<(Vec<f64>, MaskNoise)> {
        let noise = self.noise(seed);
        Ok((self.hard_mask(&noise)?, noise))
    }

    /// `|E|×1` leaf holding `P`.
    pub fn record(&self, tape: &mut Tape) -> Var {
        tape.leaf(column(&self.p))
    }

    /// Mask on the tape as a function of the `|E|×1` variable `p`. With
    /// `round` the forward value is the hard mask and the adjoint passes
    /// straight through to the relaxed mask; without it the relaxed mask is
    /// returned as is.
    pub fn mask_on_tape(&self, tape: &mut Tape, p: Var, noise: &MaskNoise, round: bool) -> Result<Var> {
        self.check()?;
        let logp = tape.log(p)?;
        let logit = match self.law {
            MaskLaw::Gumbel => logp,
            MaskLaw::Logistic => {
                let q = tape.scale(p, -1.0);
                let q = tape.offset(q, 1.0);
                let logq = tape.log(q)?;
                tape.sub(logp, logq)?
            }
        };
        let g = tape.constant(column(&noise.0));
        let a = tape.add(logit, g)?;
        let a = tape.scale(a, 1.0 / self.tau_g);
        let soft = tape.sigmoid(a);
        Ok(if round {
            tape.straight_through_round(soft)
        } else {
            soft
        })
    }

    /// `P ← Π_S(P - α ∇P)`.
    pub fn pgd_step(&mut self, grad: &[f64]) -> Result<()> {
        if grad.len() != self.p.len() {
            return Err(Error::dim(format!("gradient of length {} for {} edges", grad.len(), self.p.len())));
        }
        let stepped: Vec<f64> = self.p.iter().zip(grad).map(|(p, g)| p - self.alpha * g).collect();
        self.p = project_budget(&stepped, self.budget, self.p_min, self.upper(), self.xi)?;
        Ok(())
    }
}

pub(crate) fn column(v: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column shape")
}

/// Per-edge retention weights `1 - M_e`.
pub fn apply_mask(n_edges: usize, mask: &[f64]) -> Result<Vec<f64>> {
    if mask.len() != n_edges {
        return Err(Error::dim(format!("mask of length {} for {n_edges} edges", mask.len())));
    }
    Ok(mask.iter().map(|m| 1.0 - m).collect())
}

/// Result of [`project_budget_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub p: Vec<f64>,
    /// Shift subtracted before clipping; zero when clipping alone is feasible.
    pub mu: f64,
    pub iterations: usize,
}

/// Euclidean projection onto `{p_min ≤ P_e ≤ upper, Σ P_e ≤ ε}`.
pub fn project_budget(p: &[f64], budget: f64, p_min: f64, upper: f64, xi: f64) -> Result<Vec<f64>> {
    Ok(project_budget_detailed(p, budget, p_min, upper, xi)?.p)
}

/// Projection with its shift `μ`: returns `clip(P)` when that already meets
/// the budget, otherwise `clip(P - μ)` with `μ > 0` found by bisection on
/// `[min(P) - upper, max(P)]` until the bracket is below `ξ` (at most
/// `⌈log2(range / ξ)⌉ + 4` halvings). The upper end of the final bracket is
/// used, so the sum never exceeds `ε`.
pub fn project_budget_detailed(
    p: &[f64],
    budget: f64,
    p_min: f64,
    upper: f64,
    xi: f64,
) -> Result<Projection> {
    if !(xi > 0.0) || !(p_min <= upper) {
        return Err(Error::Usage(format!("bad projection settings xi={xi}, box=[{p_min}, {upper}]")));
    }
    let needed = p.len() as f64 * p_min;
    if !(budget >= needed) || (!p.is_empty() && !(budget > 0.0)) {
        return Err(Error::InfeasibleBudget { budget, needed });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite probability".into()));
    }
    let clip = |mu: f64| -> Vec<f64> { p.iter().map(|&v| (v - mu).clamp(p_min, upper)).collect() };
    let mass = |mu: f64| -> f64 { p.iter().map(|&v| (v - mu).clamp(p_min, upper)).sum() };

    if mass(0.0) <= budget {
        return Ok(Projection { p: clip(0.0), mu: 0.0, iterations: 0 });
    }
    let mut lo = p.iter().fold(f64::INFINITY, |a, &v| a.min(v)) - upper;
    let mut hi = p.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    lo = lo.max(0.0);
    let cap = ((hi - lo) / xi).log2().ceil().max(0.0) as usize + 4;
    let mut iterations = 0;
    while iterations < cap && hi - lo > 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Projection { p: clip(hi), mu: hi, iterations })
}
