//! Uniform grid on `[0,1]`, sampled functions, and trapezoid quadrature.
//!
//! Everything downstream (the integration operator, the spectral scale, the
//! Tikhonov functional) is expressed through the trapezoid inner product on
//! this grid, so the kernels here are deliberately small and exact.

use crate::error::{Error, Result};

/// Uniform partition of `[0,1]` with `n` intervals and `n+1` nodes `t_i = i/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one interval"));
        }
        Ok(Grid { n })
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh width `h = 1/n`; `h * n = 1` holds exactly for the powers of two
    /// and to rounding otherwise.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Trapezoid weight of node `i`: `h/2` at the ends, `h` inside.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i == self.n {
            0.5 * h
        } else {
            h
        }
    }
}

/// Real-valued function sampled at the grid nodes; the discrete stand-in for
/// an element of L²(0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trapezoid inner product `Σ w_i u_i v_i`.
    ///
    /// Panics on mismatched grids; mixing grids inside one computation is a
    /// programming error, the checked entry points live on the operators.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        assert_eq!(
            self.grid, other.grid,
            "inner product across different grids"
        );
        let h = self.grid.spacing();
        let n = self.grid.intervals();
        let u = &self.values;
        let v = &other.values;
        let mut s = 0.5 * (u[0] * v[0] + u[n] * v[n]);
        for i in 1..n {
            s += u[i] * v[i];
        }
        s * h
    }

    /// Trapezoid L² norm.
    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid L² distance to `other`.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.grid, other.grid, "distance across different grids");
        let h = self.grid.spacing();
        let n = self.grid.intervals();
        let d0 = self.values[0] - other.values[0];
        let dn = self.values[n] - other.values[n];
        let mut s = 0.5 * (d0 * d0 + dn * dn);
        for i in 1..n {
            let d = self.values[i] - other.values[i];
            s += d * d;
        }
        (s * h).max(0.0).sqrt()
    }

    /// Discrete total variation `Σ |x_{i+1} - x_i|`.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.grid, other.grid, "zip across different grids");
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a + c * b)
    }
}

/// Cumulative trapezoid integral: `(Jx)(t_i) = ∫_0^{t_i} x`, with `(Jx)(0) = 0`
/// exactly.
pub fn cumulative_trapezoid(x: &GridFunction) -> GridFunction {
    let mut out = vec![0.0; x.len()];
    cumtrapz_into(x.grid().spacing(), x.values(), &mut out);
    GridFunction {
        grid: x.grid(),
        values: out,
    }
}

/// Slice kernel for the cumulative trapezoid integral; shared with the
/// solver's matrix-free inner loop.
pub(crate) fn cumtrapz_into(h: f64, x: &[f64], out: &mut [f64]) {
    out[0] = 0.0;
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * h * (x[i - 1] + x[i]);
        out[i] = acc;
    }
}

/// Plain transpose `Aᵀu` of the cumulative-trapezoid matrix `A` (so that
/// `(A x)·u = x·(Aᵀ u)` in the *unweighted* dot product).
///
/// Row `i ≥ 1` of `A` is `(h/2, h, …, h, h/2)` supported on `0..=i`; row 0 is
/// zero. Columns therefore read off suffix sums.
pub(crate) fn cumtrapz_transpose_into(h: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len() - 1;
    // suffix = Σ_{i>j} u_i while scanning j downward
    let mut suffix = 0.0;
    out[n] = 0.5 * h * u[n];
    for j in (1..n).rev() {
        suffix += u[j + 1];
        out[j] = 0.5 * h * u[j] + h * suffix;
    }
    if n >= 1 {
        suffix += u[1];
        out[0] = 0.5 * h * suffix;
    }
}

/// Adjoint of `cumulative_trapezoid` with respect to the trapezoid inner
/// product: `J* = W⁻¹ Aᵀ W`.
pub fn cumulative_trapezoid_adjoint(g: &GridFunction) -> GridFunction {
    let grid = g.grid();
    let weighted: Vec<f64> = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| grid.weight(i) * v)
        .collect();
    let mut out = vec![0.0; weighted.len()];
    cumtrapz_transpose_into(grid.spacing(), &weighted, &mut out);
    for (i, v) in out.iter_mut().enumerate() {
        *v /= grid.weight(i);
    }
    GridFunction { grid, values: out }
}
