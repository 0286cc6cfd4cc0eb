use ndarray::Array2;

use super::{Tape, Var};
use crate::error::Result;

/// Outcome of comparing an analytic gradient against central differences.
#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    pub worst_entry: (usize, usize),
    pub analytic: Array2<f64>,
    pub numeric: Array2<f64>,
}

/// Checks the tape gradient of a scalar function of `x` against
/// `(f(x + h e) - f(x - h e)) / 2h` entry by entry.
///
/// `f` receives a fresh tape and the leaf holding the (possibly perturbed)
/// input and must return a `1×1` value. The relative error of an entry is
/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn gradcheck<F>(f: F, x: &Array2<f64>, h: f64) -> Result<GradcheckReport>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    let eval = |input: Array2<f64>| -> Result<f64> {
        let mut tape = Tape::new();
        let v = tape.leaf(input);
        let out = f(&mut tape, v)?;
        Ok(tape.scalar(out))
    };

    let mut tape = Tape::new();
    let v = tape.leaf(x.clone());
    let out = f(&mut tape, v)?;
    tape.backward(out)?;
    let analytic = tape.grad_or_zeros(v);

    let mut numeric = Array2::zeros(x.dim());
    let mut max_rel_error = 0.0;
    let mut worst_entry = (0, 0);
    for ((i, j), &a) in analytic.indexed_iter() {
        let mut plus = x.clone();
        plus[[i, j]] += h;
        let mut minus = x.clone();
        minus[[i, j]] -= h;
        let n = (eval(plus)? - eval(minus)?) / (2.0 * h);
        numeric[[i, j]] = n;
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        if rel > max_rel_error {
            max_rel_error = rel;
            worst_entry = (i, j);
        }
    }
    Ok(GradcheckReport {
        max_rel_error,
        worst_entry,
        analytic,
        numeric,
    })
}
