//! Two-layer GCN encoder `H = σ(Â σ(Â X W1) W2)` and the projection head
//! `Z = elu(H U1 + b1) U2 + b2`.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::graph::Edge;

/// Encoder weights `θ = {W1 (p×d1), W2 (d1×d2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
}

/// Projection head `φ`; biases are `1×d2` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionParams {
    pub u1: Array2<f64>,
    pub b1: Array2<f64>,
    pub u2: Array2<f64>,
    pub b2: Array2<f64>,
}

/// Activation of the encoder's second layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputActivation {
    #[default]
    Relu,
    Linear,
}

impl std::str::FromStr for OutputActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Self::Relu),
            "linear" => Ok(Self::Linear),
            _ => Err(Error::Usage(format!("unknown output activation {s:?}"))),
        }
    }
}

impl std::fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Relu => "relu",
            Self::Linear => "linear",
        })
    }
}

/// Uniform in `[-a, a]` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-a..=a))
}

impl EncoderParams {
    pub fn glorot<R: Rng>(p: usize, d1: usize, d2: usize, rng: &mut R) -> Self {
        Self {
            w1: glorot(p, d1, rng),
            w2: glorot(d1, d2, rng),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.w2.ncols()
    }

    pub fn record(&self, tape: &mut Tape, trainable: bool) -> EncoderVars {
        let put = |tape: &mut Tape, m: &Array2<f64>| {
            if trainable {
                tape.leaf(m.clone())
            } else {
                tape.constant(m.clone())
            }
        };
        EncoderVars {
            w1: put(tape, &self.w1),
            w2: put(tape, &self.w2),
        }
    }

    pub fn tensors_mut(&mut self) -> [&mut Array2<f64>; 2] {
        [&mut self.w1, &mut self.w2]
    }
}

impl ProjectionParams {
    /// Glorot matrices, zero biases.
    pub fn glorot<R: Rng>(d: usize, rng: &mut R) -> Self {
        Self {
            u1: glorot(d, d, rng),
            b1: Array2::zeros((1, d)),
            u2: glorot(d, d, rng),
            b2: Array2::zeros((1, d)),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            u1: Array2::eye(d),
            b1: Array2::zeros((1, d)),
            u2: Array2::eye(d),
            b2: Array2::zeros((1, d)),
        }
    }

    pub fn record(&self, tape: &mut Tape, trainable: bool) -> ProjectionVars {
        let put = |tape: &mut Tape, m: &Array2<f64>| {
            if trainable {
                tape.leaf(m.clone())
            } else {
                tape.constant(m.clone())
            }
        };
        ProjectionVars {
            u1: put(tape, &self.u1),
            b1: put(tape, &self.b1),
            u2: put(tape, &self.u2),
            b2: put(tape, &self.b2),
        }
    }

    pub fn tensors_mut(&mut self) -> [&mut Array2<f64>; 4] {
        [&mut self.u1, &mut self.b1, &mut self.u2, &mut self.b2]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EncoderVars {
    pub w1: Var,
    pub w2: Var,
}

impl EncoderVars {
    pub fn all(&self) -> [Var; 2] {
        [self.w1, self.w2]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProjectionVars {
    pub u1: Var,
    pub b1: Var,
    pub u2: Var,
    pub b2: Var,
}

impl ProjectionVars {
    pub fn all(&self) -> [Var; 4] {
        [self.u1, self.b1, self.u2, self.b2]
    }
}

/// `D̃^{-1/2} (A_w + I) D̃^{-1/2}` on the tape, where `A_w` scatters the
/// `|E|×1` column `retention` onto both entries of each edge. Gradients
/// reach `retention` through the degrees as well as the adjacency.
pub fn normalized_adjacency(
    tape: &mut Tape,
    retention: Var,
    edges: &Arc<[Edge]>,
    n: usize,
) -> Result<Var> {
    let a = tape.scatter_edges(retention, edges, n)?;
    let eye = tape.constant(Array2::eye(n));
    let a_tilde = tape.add(a, eye)?;
    normalize_dense(tape, a_tilde)
}

/// Symmetric degree normalization of a square matrix that already carries
/// its self-loops.
pub fn normalize_dense(tape: &mut Tape, a_tilde: Var) -> Result<Var> {
    let deg = tape.row_sum(a_tilde);
    let s = tape.powf(deg, -0.5)?;
    let st = tape.transpose(s);
    let outer = tape.matmul(s, st)?;
    tape.mul(a_tilde, outer)
}

/// `σ(Â σ(Â X W1) W2)` with `σ = relu` on the first layer and `act` on the
/// second.
pub fn encode(
    tape: &mut Tape,
    adj_hat: Var,
    x: Var,
    theta: &EncoderVars,
    act: OutputActivation,
) -> Result<Var> {
    let (n, _) = tape.value(adj_hat).dim();
    if tape.value(x).nrows() != n {
        return Err(Error::dim(format!(
            "features have {} rows for a {n}-node adjacency",
            tape.value(x).nrows()
        )));
    }
    // Multiply in the cheaper order; both are the same product.
    let h1 = if tape.value(x).ncols() <= tape.value(theta.w1).ncols() {
        let ax = tape.matmul(adj_hat, x)?;
        tape.matmul(ax, theta.w1)?
    } else {
        let xw = tape.matmul(x, theta.w1)?;
        tape.matmul(adj_hat, xw)?
    };
    let h1 = tape.relu(h1);
    let hw = tape.matmul(h1, theta.w2)?;
    let h2 = tape.matmul(adj_hat, hw)?;
    Ok(match act {
        OutputActivation::Relu => tape.relu(h2),
        OutputActivation::Linear => h2,
    })
}

/// `elu(H U1 + b1) U2 + b2`.
pub fn project(tape: &mut Tape, h: Var, phi: &ProjectionVars) -> Result<Var> {
    let a = tape.matmul(h, phi.u1)?;
    let a = tape.add(a, phi.b1)?;
    let a = tape.elu(a);
    let z = tape.matmul(a, phi.u2)?;
    tape.add(z, phi.b2)
}

/// Tape-free forward pass on a dense normalized adjacency.
pub fn embed(
    adj_hat: &Array2<f64>,
    x: &Array2<f64>,
    theta: &EncoderParams,
    act: OutputActivation,
) -> Result<Array2<f64>> {
    let mut tape = Tape::new();
    let a = tape.constant(adj_hat.clone());
    let xv = tape.constant(x.clone());
    let vars = theta.record(&mut tape, false);
    let h = encode(&mut tape, a, xv, &vars, act)?;
    Ok(tape.value(h).clone())
}
