//! Reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records every value produced by a primitive in creation order,
//! so the tape is always topologically sorted. [`Tape::backward`] walks it in
//! reverse once, computing the adjoint of every tracked value with respect to
//! a scalar loss and adding it to that value's accumulated gradient.
//!
//! ```
//! use gchs_core::autodiff::Tape;
//! use ndarray::array;
//!
//! let mut tape = Tape::new();
//! let w = tape.leaf(array![[1.0, 2.0], [3.0, 4.0]]);
//! let loss = tape.sum(w);
//! tape.backward(loss).unwrap();
//! assert_eq!(tape.grad(w).unwrap(), &array![[1.0, 1.0], [1.0, 1.0]]);
//! ```
//!
//! Broadcasting is limited to scalar multiples and adding a `1×m` row
//! vector to an `n×m` matrix; every other shape mismatch is an error.

mod gradcheck;

use std::sync::Arc;

use ndarray::{Array2, Axis, Zip};

use crate::error::{Error, Result};

pub use gradcheck::{gradcheck, GradcheckReport};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    Exp(Var),
    Log(Var),
    Sigmoid(Var),
    Relu(Var),
    Elu(Var),
    Powf(Var, f64),
    Sum(Var),
    Trace(Var),
    Transpose(Var),
    RowNorms(Var, f64),
    RowSum(Var),
    Diag(Var),
    ConcatCols(Var, Var),
    SelectRows(Var, Arc<[usize]>),
    ScatterEdges(Var, Arc<[(usize, usize)]>),
    StraightThrough(Var),
    /// Operand and the row softmax weights of the active entries.
    MaskedLogSumExp(Var, Array2<f64>),
    /// Both views and the loss gradient with respect to `S_uv`, and the
    /// symmetrized gradients with respect to `S_uu` and `S_vv`.
    InfoNce {
        u: Var,
        v: Var,
        g_uv: Array2<f64>,
        g_uu: Array2<f64>,
        g_vv: Array2<f64>,
    },
}

struct Node {
    value: Array2<f64>,
    grad: Option<Array2<f64>>,
    op: Op,
    tracked: bool,
}

/// Ordered record of values and the primitives that produced them.
///
/// Single owner: build one tape per forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn shape(a: &Array2<f64>) -> (usize, usize) {
    a.dim()
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records a differentiable input.
    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Records an input that never receives a gradient.
    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    /// Value of a `1×1` node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[[0, 0]]
    }

    /// Accumulated gradient, `None` when no backward pass has reached `v`.
    pub fn grad(&self, v: Var) -> Option<&Array2<f64>> {
        self.nodes[v.0].grad.as_ref()
    }

    /// Accumulated gradient, zeros when never reached.
    pub fn grad_or_zeros(&self, v: Var) -> Array2<f64> {
        match &self.nodes[v.0].grad {
            Some(g) => g.clone(),
            None => Array2::zeros(self.nodes[v.0].value.dim()),
        }
    }

    pub fn zero_grad(&mut self) {
        for node in &mut self.nodes {
            node.grad = None;
        }
    }

    fn push(&mut self, value: Array2<f64>, op: Op, tracked: bool) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            op,
            tracked,
        });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].tracked)
    }

    fn unary(&mut self, a: Var, value: Array2<f64>, op: Op) -> Var {
        let tracked = self.tracked(&[a]);
        self.push(value, op, tracked)
    }

    fn binary(&mut self, a: Var, b: Var, value: Array2<f64>, op: Op) -> Var {
        let tracked = self.tracked(&[a, b]);
        self.push(value, op, tracked)
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        let (sa, sb) = (shape(self.value(a)), shape(self.value(b)));
        if sa != sb {
            return Err(Error::dim(format!("{what}: {sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (shape(self.value(a)), shape(self.value(b)));
        if sa.1 != sb.0 {
            return Err(Error::dim(format!("matmul: {sa:?} x {sb:?}")));
        }
        let value = self.value(a).dot(self.value(b));
        Ok(self.binary(a, b, value, Op::MatMul(a, b)))
    }

    /// Elementwise sum; `b` may also be a `1×m` row added to every row of `a`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (shape(self.value(a)), shape(self.value(b)));
        if sa == sb {
            let value = self.value(a) + self.value(b);
            return Ok(self.binary(a, b, value, Op::Add(a, b)));
        }
        if sb.0 == 1 && sb.1 == sa.1 {
            let value = self.value(a) + self.value(b);
            return Ok(self.binary(a, b, value, Op::AddRow(a, b)));
        }
        Err(Error::dim(format!("add: {sa:?} + {sb:?}")))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "sub")?;
        let value = self.value(a) - self.value(b);
        Ok(self.binary(a, b, value, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let value = self.value(a) * self.value(b);
        Ok(self.binary(a, b, value, Op::Mul(a, b)))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "div")?;
        if self.value(b).iter().any(|&x| x == 0.0) {
            return Err(Error::Domain("division by zero".into()));
        }
        let value = self.value(a) / self.value(b);
        Ok(self.binary(a, b, value, Op::Div(a, b)))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a) * c;
        self.unary(a, value, Op::Scale(a, c))
    }

    /// Adds the constant `c` to every entry.
    pub fn offset(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a) + c;
        self.unary(a, value, Op::Offset(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::exp);
        self.unary(a, value, Op::Exp(a))
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        if self.value(a).iter().any(|&x| x <= 0.0) {
            return Err(Error::Domain("log of non-positive entry".into()));
        }
        let value = self.value(a).mapv(f64::ln);
        Ok(self.unary(a, value, Op::Log(a)))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(sigmoid);
        self.unary(a, value, Op::Sigmoid(a))
    }

    /// `max(x, 0)`; the adjoint at exactly 0 is 0.
    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|x| x.max(0.0));
        self.unary(a, value, Op::Relu(a))
    }

    /// `x` for `x > 0`, `exp(x) - 1` otherwise.
    pub fn elu(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(elu);
        self.unary(a, value, Op::Elu(a))
    }

    pub fn powf(&mut self, a: Var, p: f64) -> Result<Var> {
        if p.fract() != 0.0 && self.value(a).iter().any(|&x| x < 0.0) {
            return Err(Error::Domain(format!("non-integer power {p} of negative entry")));
        }
        if p < 0.0 && self.value(a).iter().any(|&x| x == 0.0) {
            return Err(Error::Domain(format!("negative power {p} of zero")));
        }
        let value = self.value(a).mapv(|x| x.powf(p));
        Ok(self.unary(a, value, Op::Powf(a, p)))
    }

    /// Sum of all entries as a `1×1` value.
    pub fn sum(&mut self, a: Var) -> Var {
        let value = Array2::from_elem((1, 1), self.value(a).sum());
        self.unary(a, value, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let len = self.value(a).len().max(1) as f64;
        let s = self.sum(a);
        self.scale(s, 1.0 / len)
    }

    pub fn trace(&mut self, a: Var) -> Result<Var> {
        let (r, c) = shape(self.value(a));
        if r != c {
            return Err(Error::dim(format!("trace of non-square {r}x{c}")));
        }
        let value = Array2::from_elem((1, 1), self.value(a).diag().sum());
        Ok(self.unary(a, value, Op::Trace(a)))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).t().to_owned();
        self.unary(a, value, Op::Transpose(a))
    }

    /// Euclidean norm of each row as an `n×1` column, floored at `floor`.
    pub fn row_norms(&mut self, a: Var, floor: f64) -> Var {
        let value = self
            .value(a)
            .map_axis(Axis(1), |row| row.dot(&row).sqrt().max(floor))
            .insert_axis(Axis(1));
        self.unary(a, value, Op::RowNorms(a, floor))
    }

    /// Sum of each row as an `n×1` column.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let value = self.value(a).sum_axis(Axis(1)).insert_axis(Axis(1));
        self.unary(a, value, Op::RowSum(a))
    }

    /// Diagonal of a square matrix as an `n×1` column.
    pub fn diag(&mut self, a: Var) -> Result<Var> {
        let (r, c) = shape(self.value(a));
        if r != c {
            return Err(Error::dim(format!("diag of non-square {r}x{c}")));
        }
        let value = self.value(a).diag().to_owned().insert_axis(Axis(1));
        Ok(self.unary(a, value, Op::Diag(a)))
    }

    /// Horizontal concatenation `[a | b]`.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (shape(self.value(a)), shape(self.value(b)));
        if sa.0 != sb.0 {
            return Err(Error::dim(format!("concat: {sa:?} | {sb:?}")));
        }
        let value = ndarray::concatenate(Axis(1), &[self.value(a).view(), self.value(b).view()])
            .expect("row counts checked");
        Ok(self.binary(a, b, value, Op::ConcatCols(a, b)))
    }

    pub fn select_rows(&mut self, a: Var, rows: &[usize]) -> Result<Var> {
        let n = self.value(a).nrows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::dim(format!("row {bad} out of range for {n} rows")));
        }
        let value = self.value(a).select(Axis(0), rows);
        Ok(self.unary(a, value, Op::SelectRows(a, rows.into())))
    }

    /// Symmetric `n×n` adjacency with entries `(i,j)` and `(j,i)` set to the
    /// weight of edge `e = (i,j)`; `weights` is an `|E|×1` column.
    pub fn scatter_edges(
        &mut self,
        weights: Var,
        edges: &Arc<[(usize, usize)]>,
        n: usize,
    ) -> Result<Var> {
        let w = self.value(weights);
        if w.dim() != (edges.len(), 1) {
            return Err(Error::dim(format!(
                "edge weights {:?} for {} edges",
                w.dim(),
                edges.len()
            )));
        }
        let mut value = Array2::zeros((n, n));
        for (e, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    n_nodes: n,
                });
            }
            value[[i, j]] = w[[e, 0]];
            value[[j, i]] = w[[e, 0]];
        }
        Ok(self.unary(weights, value, Op::ScatterEdges(weights, Arc::clone(edges))))
    }

    /// Forwards `⌊x + 1/2⌉` (ties round up) and passes the adjoint through
    /// unchanged.
    pub fn straight_through_round(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|x| (x + 0.5).floor());
        self.unary(a, value, Op::StraightThrough(a))
    }

    /// `log Σ_j mask_ij · exp(x_ij)` per row as an `n×1` column, computed with
    /// max subtraction. `mask` is a constant 0/1 matrix with at least one
    /// active entry per row.
    pub fn masked_log_sum_exp_rows(&mut self, a: Var, mask: Arc<Array2<f64>>) -> Result<Var> {
        let x = self.value(a);
        if x.dim() != mask.dim() {
            return Err(Error::dim(format!(
                "logsumexp mask {:?} for {:?}",
                mask.dim(),
                x.dim()
            )));
        }
        let (rows, cols) = x.dim();
        let xs = x.as_standard_layout();
        let ms = mask.as_standard_layout();
        let (xs, ms) = (xs.as_slice().expect("standard layout"), ms.as_slice().expect("standard layout"));
        let mut value = Array2::zeros((rows, 1));
        let mut w = vec![0.0; rows * cols];
        for i in 0..rows {
            let span = i * cols..(i + 1) * cols;
            let (row, mrow, wrow) = (&xs[span.clone()], &ms[span.clone()], &mut w[span]);
            let mut max = f64::NEG_INFINITY;
            for (&v, &m) in row.iter().zip(mrow) {
                if m != 0.0 && v > max {
                    max = v;
                }
            }
            if max == f64::NEG_INFINITY {
                return Err(Error::Domain(format!("logsumexp row {i} has no active entries")));
            }
            let mut s = 0.0;
            for ((wv, &v), &m) in wrow.iter_mut().zip(row).zip(mrow) {
                if m != 0.0 {
                    *wv = m * (v - max).exp();
                    s += *wv;
                }
            }
            let inv = 1.0 / s;
            wrow.iter_mut().for_each(|wv| *wv *= inv);
            value[[i, 0]] = max + s.ln();
        }
        let weights = Array2::from_shape_vec((rows, cols), w).expect("sized");
        Ok(self.unary(a, value, Op::MaskedLogSumExp(a, weights)))
    }

    /// Symmetric infoNCE of two row-normalized views as a `1×1` value:
    /// `(1/2n) Σ_i [lse_u(i) + lse_v(i) - 2 c S_uv[i,i]]` with `c = inv_t`,
    /// where `lse_u(i) = log(Σ_k e^{c S_uv[i,k]} + Σ_{k≠i} e^{c S_uu[i,k]})`
    /// and `lse_v` is the same with the views swapped.
    ///
    /// Rows must have norm at most 1, so every similarity is at most 1 and the
    /// exponentials are shifted by the constant `c`. This lets each entry of
    /// `S_uv` serve both views and each pair of `S_uu`, `S_vv` be evaluated
    /// once. Requires `0 < inv_t <= 300` so that no shifted term underflows.
    pub fn info_nce_normalized(&mut self, u: Var, v: Var, inv_t: f64) -> Result<Var> {
        let (n, d) = self.value(u).dim();
        if self.value(v).dim() != (n, d) {
            return Err(Error::dim(format!("views {:?} and {:?}", (n, d), self.value(v).dim())));
        }
        if n == 0 {
            return Err(Error::Usage("infoNCE on zero nodes".into()));
        }
        if !(inv_t > 0.0 && inv_t <= 300.0) {
            return Err(Error::Domain(format!("inverse temperature {inv_t} outside (0, 300]")));
        }
        let (uu, vv) = (self.value(u), self.value(v));
        let shifted = |s: f64| ((s - 1.0) * inv_t).exp();
        let mut e_uv = uu.dot(&vv.t());
        let trace: f64 = e_uv.diag().sum();
        e_uv.mapv_inplace(shifted);
        let intra = |w: &Array2<f64>| -> Array2<f64> {
            let mut e = w.dot(&w.t());
            for i in 0..n {
                e[[i, i]] = 0.0;
                for k in (i + 1)..n {
                    let x = shifted(e[[i, k]]);
                    e[[i, k]] = x;
                    e[[k, i]] = x;
                }
            }
            e
        };
        let (e_uu, e_vv) = (intra(uu), intra(vv));
        let den_u = &e_uv.sum_axis(Axis(1)) + &e_uu.sum_axis(Axis(1));
        let den_v = &e_uv.sum_axis(Axis(0)) + &e_vv.sum_axis(Axis(1));
        let lse: f64 = den_u.iter().chain(den_v.iter()).map(|x| x.ln() + inv_t).sum();
        let scale = 1.0 / (2.0 * n as f64);
        let value = Array2::from_elem((1, 1), (lse - 2.0 * inv_t * trace) * scale);

        let c = inv_t * scale;
        let inv_v = den_v.mapv(|x| 1.0 / x);
        let mut g_uv = e_uv;
        for (i, mut row) in g_uv.outer_iter_mut().enumerate() {
            let a = 1.0 / den_u[i];
            for (x, b) in row.iter_mut().zip(&inv_v) {
                *x *= c * (a + b);
            }
        }
        for i in 0..n {
            g_uv[[i, i]] -= 2.0 * c;
        }
        let symmetrize = |mut e: Array2<f64>, den: &ndarray::Array1<f64>| -> Array2<f64> {
            for i in 0..n {
                for k in (i + 1)..n {
                    let x = c * e[[i, k]] * (1.0 / den[i] + 1.0 / den[k]);
                    e[[i, k]] = x;
                    e[[k, i]] = x;
                }
            }
            e
        };
        let g_uu = symmetrize(e_uu, &den_u);
        let g_vv = symmetrize(e_vv, &den_v);
        let op = Op::InfoNce { u, v, g_uv, g_uu, g_vv };
        Ok(self.binary(u, v, value, op))
    }

    /// Propagates `d loss / d v` to every tracked value and adds it to the
    /// stored gradients. Repeated calls accumulate.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let dim = self.value(loss).dim();
        if dim != (1, 1) {
            return Err(Error::Usage(format!("backward needs a 1x1 loss, got {dim:?}")));
        }
        let mut adj: Vec<Option<Array2<f64>>> = Vec::with_capacity(loss.0 + 1);
        adj.resize_with(loss.0 + 1, || None);
        adj[loss.0] = Some(Array2::ones((1, 1)));

        for idx in (0..=loss.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            if self.nodes[idx].tracked {
                self.propagate(idx, &g, &mut adj);
            }
            let node = &mut self.nodes[idx];
            match &mut node.grad {
                Some(acc) => *acc += &g,
                None => node.grad = Some(g),
            }
        }
        Ok(())
    }

    fn propagate(&self, idx: usize, g: &Array2<f64>, adj: &mut [Option<Array2<f64>>]) {
        let node = &self.nodes[idx];
        let out = &node.value;
        let mut send = |v: Var, contrib: Array2<f64>| {
            if !self.nodes[v.0].tracked {
                return;
            }
            match &mut adj[v.0] {
                Some(acc) => *acc += &contrib,
                slot @ None => *slot = Some(contrib),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.nodes[a.0].tracked {
                    send(*a, g.dot(&self.value(*b).t()));
                }
                if self.nodes[b.0].tracked {
                    send(*b, self.value(*a).t().dot(g));
                }
            }
            Op::Add(a, b) => {
                send(*a, g.clone());
                send(*b, g.clone());
            }
            Op::AddRow(a, r) => {
                send(*a, g.clone());
                send(*r, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
            }
            Op::Sub(a, b) => {
                send(*a, g.clone());
                send(*b, -g);
            }
            Op::Mul(a, b) => {
                send(*a, g * self.value(*b));
                send(*b, g * self.value(*a));
            }
            Op::Div(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                send(*a, g / vb);
                let mut gb = g * va;
                Zip::from(&mut gb).and(vb).for_each(|x, &d| *x = -*x / (d * d));
                send(*b, gb);
            }
            Op::Scale(a, c) => send(*a, g * *c),
            Op::Offset(a) => send(*a, g.clone()),
            Op::Exp(a) => send(*a, g * out),
            Op::Log(a) => send(*a, g / self.value(*a)),
            Op::Sigmoid(a) => {
                let mut ga = g.clone();
                Zip::from(&mut ga).and(out).for_each(|x, &s| *x *= s * (1.0 - s));
                send(*a, ga);
            }
            Op::Relu(a) => {
                let mut ga = g.clone();
                Zip::from(&mut ga)
                    .and(self.value(*a))
                    .for_each(|x, &v| if v <= 0.0 { *x = 0.0 });
                send(*a, ga);
            }
            Op::Elu(a) => {
                let mut ga = g.clone();
                Zip::from(&mut ga)
                    .and(self.value(*a))
                    .and(out)
                    .for_each(|x, &v, &o| if v <= 0.0 { *x *= o + 1.0 });
                send(*a, ga);
            }
            Op::Powf(a, p) => {
                let mut ga = g.clone();
                Zip::from(&mut ga)
                    .and(self.value(*a))
                    .for_each(|x, &v| *x *= p * v.powf(p - 1.0));
                send(*a, ga);
            }
            Op::Sum(a) => send(*a, Array2::from_elem(self.value(*a).dim(), g[[0, 0]])),
            Op::Trace(a) => {
                let n = self.value(*a).nrows();
                send(*a, Array2::eye(n) * g[[0, 0]]);
            }
            Op::Transpose(a) => send(*a, g.t().to_owned()),
            Op::RowNorms(a, floor) => {
                let va = self.value(*a);
                let mut ga = Array2::zeros(va.dim());
                for (i, (mut grow, row)) in ga.outer_iter_mut().zip(va.outer_iter()).enumerate() {
                    let norm = row.dot(&row).sqrt();
                    if norm > *floor {
                        grow.assign(&(&row * (g[[i, 0]] / norm)));
                    }
                }
                send(*a, ga);
            }
            Op::RowSum(a) => {
                let dim = self.value(*a).dim();
                send(*a, g.broadcast(dim).expect("n×1 column").to_owned());
            }
            Op::Diag(a) => {
                let n = self.value(*a).nrows();
                let mut ga = Array2::zeros((n, n));
                for i in 0..n {
                    ga[[i, i]] = g[[i, 0]];
                }
                send(*a, ga);
            }
            Op::ConcatCols(a, b) => {
                let ca = self.value(*a).ncols();
                send(*a, g.slice(ndarray::s![.., ..ca]).to_owned());
                send(*b, g.slice(ndarray::s![.., ca..]).to_owned());
            }
            Op::SelectRows(a, rows) => {
                let mut ga = Array2::zeros(self.value(*a).dim());
                for (k, &r) in rows.iter().enumerate() {
                    let mut dst = ga.row_mut(r);
                    dst += &g.row(k);
                }
                send(*a, ga);
            }
            Op::ScatterEdges(w, edges) => {
                let gw = Array2::from_shape_fn((edges.len(), 1), |(e, _)| {
                    let (i, j) = edges[e];
                    g[[i, j]] + g[[j, i]]
                });
                send(*w, gw);
            }
            Op::StraightThrough(a) => send(*a, g.clone()),
            Op::MaskedLogSumExp(a, weights) => {
                let ga = weights * g;
                send(*a, ga);
            }
            Op::InfoNce { u, v, g_uv, g_uu, g_vv } => {
                let (vu, vv, s) = (self.value(*u), self.value(*v), g[[0, 0]]);
                if self.nodes[u.0].tracked {
                    let mut gu = g_uv.dot(vv);
                    gu += &g_uu.dot(vu);
                    send(*u, gu * s);
                }
                if self.nodes[v.0].tracked {
                    let mut gv = g_uv.t().dot(vu);
                    gv += &g_vv.dot(vv);
                    send(*v, gv * s);
                }
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}
