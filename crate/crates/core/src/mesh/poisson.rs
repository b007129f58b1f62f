//! Discrete Poisson problem in `X` on a single `(Y, t)` slice.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::ops::{axis_index, sbp_diff};
use super::{Field, Grid};
use crate::error::{KfpError, Result};

/// `D^2 v = w` on a set of `X`-interior nodes, `v = 0` elsewhere, where `D`
/// is the summation-by-parts derivative used by `grad_x`/`div_x`.
///
/// With trapezoid weights `H` the system is `K v = -H w` for the symmetric
/// positive definite `K = D^T H D` restricted to the unknowns, so it is solved
/// by a dense Cholesky factorization.
pub struct XPoisson {
    m: usize,
    nx: usize,
    hx: Vec<f64>,
    unknowns: Vec<usize>,
    hw: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
}

fn x_weights(m: usize, nx: usize, hx: &[f64]) -> Vec<f64> {
    let len = nx.pow(m as u32);
    (0..len)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let j = axis_index(i, nx.pow((m - 1 - k) as u32), nx);
                    if j == 0 || j == nx - 1 {
                        0.5 * hx[k]
                    } else {
                        hx[k]
                    }
                })
                .product()
        })
        .collect()
}

impl XPoisson {
    /// `mask[i]` selects the unknowns among `X`-interior nodes; `None` means
    /// all of them.
    pub fn new(m: usize, nx: usize, hx: &[f64], mask: Option<&[bool]>) -> Result<Self> {
        let len = nx.pow(m as u32);
        let interior = |i: usize| {
            (0..m).all(|k| {
                let j = axis_index(i, nx.pow((m - 1 - k) as u32), nx);
                j > 0 && j < nx - 1
            })
        };
        if let Some(mk) = mask {
            if mk.len() != len {
                return Err(KfpError::DimensionMismatch { expected: len, got: mk.len() });
            }
        }
        let unknowns: Vec<usize> = (0..len).filter(|&i| interior(i) && mask.map_or(true, |mk| mk[i])).collect();
        let hw = x_weights(m, nx, hx);
        let mut col_of = vec![usize::MAX; len];
        for (a, &u) in unknowns.iter().enumerate() {
            col_of[u] = a;
        }
        // rows[r] lists (unknown, D entry) for gradient component r = node*m + k
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); len * m];
        for (a, &u) in unknowns.iter().enumerate() {
            for k in 0..m {
                let s = nx.pow((m - 1 - k) as u32);
                let j = axis_index(u, s, nx);
                for (node, jj) in [(u - s, j - 1), (u, j), (u + s, j + 1)] {
                    let e = |q: usize| if q == u { 1.0 } else { 0.0 };
                    let d = sbp_diff(e, node, jj, nx, s, hx[k]);
                    if d != 0.0 {
                        rows[node * m + k].push((a, d));
                    }
                }
            }
        }
        let n = unknowns.len();
        let mut kmat = DMatrix::<f64>::zeros(n, n);
        for (r, row) in rows.iter().enumerate() {
            let h = hw[r / m];
            for &(a, da) in row {
                for &(b, db) in row {
                    kmat[(a, b)] += h * da * db;
                }
            }
        }
        let chol = Cholesky::new(kmat).ok_or(KfpError::Singular { row: 0, pivot: 0.0 })?;
        Ok(Self { m, nx, hx: hx.to_vec(), unknowns, hw, chol })
    }

    pub fn for_grid(grid: &Grid, mask: Option<&[bool]>) -> Result<Self> {
        Self::new(grid.m(), grid.nx, &grid.hx, mask)
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn weights(&self) -> &[f64] {
        &self.hw
    }

    pub fn solve(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.hw.len() {
            return Err(KfpError::DimensionMismatch { expected: self.hw.len(), got: w.len() });
        }
        let rhs = DVector::from_iterator(self.unknowns.len(), self.unknowns.iter().map(|&u| -self.hw[u] * w[u]));
        let sol = self.chol.solve(&rhs);
        let mut v = vec![0.0; w.len()];
        for (a, &u) in self.unknowns.iter().enumerate() {
            v[u] = sol[a];
        }
        Ok(v)
    }

    /// `D v`, `m` entries per node.
    pub fn grad(&self, v: &[f64]) -> Vec<f64> {
        let (m, nx) = (self.m, self.nx);
        let mut g = vec![0.0; v.len() * m];
        for i in 0..v.len() {
            for k in 0..m {
                let s = nx.pow((m - 1 - k) as u32);
                g[i * m + k] = sbp_diff(|q| v[q], i, axis_index(i, s, nx), nx, s, self.hx[k]);
            }
        }
        g
    }

    /// `(sum_X H |D v|^2)^{1/2}` where `D^2 v = w`.
    pub fn dual_norm(&self, w: &[f64]) -> Result<f64> {
        let v = self.solve(w)?;
        let g = self.grad(&v);
        let terms: Vec<f64> = (0..v.len())
            .map(|i| self.hw[i] * g[i * self.m..(i + 1) * self.m].iter().map(|d| d * d).sum::<f64>())
            .collect();
        Ok(super::pairwise_sum(&terms).sqrt())
    }
}

/// Discrete `H^{-1}` norm in `X` of a slice `w` of length `nx^m`.
pub fn hminus1_norm(grid: &Grid, w: &[f64]) -> Result<f64> {
    XPoisson::for_grid(grid, None)?.dual_norm(w)
}

pub fn hminus1_norm_field_slice(u: &Field, it: usize, iy: &[usize]) -> Result<f64> {
    hminus1_norm(&u.grid, u.x_slice(it, iy))
}
