//! Perron roots of small nonnegative matrices.
//!
//! Power iteration on a positively shifted copy of the matrix, so that
//! periodic (imprimitive) irreducible matrices converge too. The iteration
//! stops on the Collatz-Wielandt bracket `min (Av)_i / v_i <= rho <= max (Av)_i / v_i`,
//! which is a certified enclosure once `v` is positive.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { tol: 1e-12, max_iter: 100_000 }
    }
}

#[derive(Clone, Debug)]
pub struct PerronRoot {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||Av - rho v||_inf / ||v||_inf` at the returned pair.
    pub residual: f64,
    /// Collatz-Wielandt enclosure at termination.
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Spectral radius of a nonnegative matrix, assumed irreducible when
/// nonzero (strongly connected support).
pub fn perron_root(m: &DenseMatrix, opts: PowerIteration) -> Result<PerronRoot> {
    let n = m.dim();
    if n == 0 || m.data.iter().all(|&x| x == 0.0) {
        return Ok(PerronRoot {
            value: 0.0,
            vector: vec![1.0; n],
            residual: 0.0,
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
        });
    }
    let shift = 0.5 * m.max_row_sum();
    let mut v = vec![1.0; n];
    let mut av = vec![0.0; n];
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    for it in 1..=opts.max_iter {
        m.mul_vec(&v, &mut av);
        lower = f64::INFINITY;
        upper = 0.0;
        for (a, x) in av.iter().zip(&v) {
            if *x > 0.0 {
                let r = a / x;
                lower = lower.min(r);
                upper = upper.max(r);
            }
        }
        if upper - lower <= opts.tol * upper.max(f64::MIN_POSITIVE) {
            let value = 0.5 * (upper + lower);
            let vmax = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let residual = av
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - value * x).abs())
                .fold(0.0, f64::max)
                / vmax;
            return Ok(PerronRoot { value, vector: v, residual, lower, upper, iterations: it });
        }
        // v <- (A + shift I) v, normalized in the sup norm.
        let mut norm = 0.0f64;
        for (x, a) in v.iter_mut().zip(&av) {
            *x = a + shift * *x;
            norm = norm.max(*x);
        }
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, gap: upper - lower })
}
