//! Variational solver: minimizes
//! `J[f, j] = sum_H (A~(grad_X u, j) - grad_X u . j)`, `u = f + g_ext`,
//! over pairs with `div_X j = g* + (d_t + X . grad_Y) u` at every node off
//! the Kolmogorov boundary, where `f` vanishes.
//!
//! The scheme is a method of multipliers. Every built-in potential is
//! quadratic, so each inner problem in `(f, j)` is a symmetric positive
//! definite linear system, solved by Jacobi-preconditioned conjugate
//! gradients warm-started from the previous iterate.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{KfpError, Result};
use crate::mesh::ops::{axis_index, upwind_side};
use crate::mesh::{
    classify_boundary, div_x, grad_x, node_weight, pairwise_sum, transport, Field, Grid, VectorField, XPoisson,
};
use crate::symbol::{make_tilde_a, TildeA};
use crate::viscous::DirichletProblem;

/// `f` is zero on the Kolmogorov boundary; the represented function is
/// `u = f + ext`. `gstar` is the source the constraint refers to.
#[derive(Debug, Clone)]
pub struct FluxPair {
    pub f: Field,
    pub j: VectorField,
    pub ext: Field,
    pub gstar: Field,
}

impl FluxPair {
    /// The zero pair for problem `p`: `f = 0`, `j = 0`.
    pub fn zero(p: &DirichletProblem, grid: &Arc<Grid>) -> Result<Self> {
        if grid.domain != p.domain {
            return Err(KfpError::InvalidArgument("grid was not built on the problem domain".into()));
        }
        // only the values on the Kolmogorov boundary matter; the datum
        // itself serves as the extension
        let ext = p.g.to_field(grid)?;
        Ok(Self {
            f: Field::zeros(grid.clone()),
            j: VectorField::zeros(grid.clone()),
            ext,
            gstar: p.gstar.to_field(grid)?,
        })
    }

    pub fn u(&self) -> Field {
        self.f.zip_with(&self.ext, |a, b| a + b).expect("pair fields share a grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `J` at the pair: the duality gap.
    pub objective: f64,
    /// Weighted `L^2` norm of `div_X j - g* - transport u` off the Kolmogorov boundary.
    pub constraint_residual: f64,
    /// Weighted `L^2` norm of `j - A(grad_X u)`.
    pub flux_match: f64,
    pub iterations: usize,
    pub scale: f64,
    pub converged: bool,
    /// `J` after every outer iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub rho0: f64,
    pub cg_tol: f64,
    pub cg_max: usize,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_outer: 200, rho0: 1.0, cg_tol: 1e-13, cg_max: 50_000 }
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone)]
struct Csr {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl Csr {
    fn new(ncols: usize) -> Self {
        Self { ncols, indptr: vec![0], indices: Vec::new(), data: Vec::new() }
    }

    fn push_row(&mut self, entries: &[(usize, f64)]) {
        for &(c, v) in entries {
            if v != 0.0 {
                self.indices.push(c);
                self.data.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    fn nrows(&self) -> usize {
        self.indptr.len() - 1
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = (self.indptr[r]..self.indptr[r + 1]).map(|p| self.data[p] * x[self.indices[p]]).sum();
        }
    }

    /// `y += A^T x`.
    fn tmul_add(&self, x: &[f64], y: &mut [f64]) {
        for (r, xr) in x.iter().enumerate() {
            if *xr == 0.0 {
                continue;
            }
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p]] += self.data[p] * xr;
            }
        }
    }

    /// `diag(A^T W A)`.
    fn gram_diag(&self, w: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; self.ncols];
        for r in 0..self.nrows() {
            for p in self.indptr[r]..self.indptr[r + 1] {
                d[self.indices[p]] += w[r] * self.data[p] * self.data[p];
            }
        }
        d
    }
}

fn d_entries(i: usize, s: usize, n: usize, h: f64) -> [(usize, f64); 2] {
    let j = axis_index(i, s, n);
    if j == 0 {
        [(i + s, 1.0 / h), (i, -1.0 / h)]
    } else if j == n - 1 {
        [(i, 1.0 / h), (i - s, -1.0 / h)]
    } else {
        [(i + s, 0.5 / h), (i - s, -0.5 / h)]
    }
}

fn grad_matrix(g: &Grid) -> Csr {
    let m = g.m();
    let mut a = Csr::new(g.node_count());
    for i in 0..g.node_count() {
        for k in 0..m {
            a.push_row(&d_entries(i, g.x_stride(k), g.nx, g.hx[k]));
        }
    }
    a
}

fn div_rows(g: &Grid, rows: &[usize]) -> Csr {
    let m = g.m();
    let mut a = Csr::new(g.node_count() * m);
    for &i in rows {
        let mut e = Vec::with_capacity(2 * m);
        for k in 0..m {
            for (n, v) in d_entries(i, g.x_stride(k), g.nx, g.hx[k]) {
                e.push((n * m + k, v));
            }
        }
        a.push_row(&e);
    }
    a
}

/// Same stencil as [`crate::mesh::transport`].
fn transport_rows(g: &Grid, rows: &[usize]) -> Csr {
    let ts = g.t_stride();
    let mut a = Csr::new(g.node_count());
    for &i in rows {
        let mut e: Vec<(usize, f64)> = Vec::with_capacity(2 + 2 * g.m());
        if i / ts > 0 {
            e.extend([(i, 1.0 / g.ht), (i - ts, -1.0 / g.ht)]);
        } else {
            e.extend([(i + ts, 1.0 / g.ht), (i, -1.0 / g.ht)]);
        }
        for k in 0..g.m() {
            let xk = g.x_coord(k, axis_index(i, g.x_stride(k), g.nx));
            let s = g.y_stride(k);
            let c = xk / g.hy[k];
            match upwind_side(xk, axis_index(i, s, g.ny), g.ny) {
                Some(true) => e.extend([(i, c), (i - s, -c)]),
                Some(false) => e.extend([(i + s, c), (i, -c)]),
                None => {}
            }
        }
        // merge duplicates
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (c, v) in e {
            match merged.iter_mut().find(|(cc, _)| *cc == c) {
                Some(slot) => slot.1 += v,
                None => merged.push((c, v)),
            }
        }
        merged.sort_by_key(|p| p.0);
        a.push_row(&merged);
    }
    a
}

fn weighted_l2(v: &[f64], w: &[f64]) -> f64 {
    let t: Vec<f64> = v.iter().zip(w).map(|(a, b)| b * a * a).collect();
    pairwise_sum(&t).sqrt()
}

fn free_rows(grid: &Grid) -> Vec<usize> {
    classify_boundary(grid).free_nodes()
}

/// `div_X j - g* - transport u` on the free nodes.
fn constraint_defect(pair: &FluxPair, rows: &[usize]) -> Vec<f64> {
    let dj = div_x(&pair.j);
    let tu = transport(&pair.u());
    rows.iter().map(|&i| dj.values[i] - pair.gstar.values[i] - tu.values[i]).collect()
}

pub fn objective(pair: &FluxPair, tilde_a: &TildeA, grid: &Grid) -> Result<f64> {
    if !pair.f.grid.same_shape(grid) {
        return Err(KfpError::InvalidArgument("pair lives on a different grid".into()));
    }
    let gu = grad_x(&pair.u());
    let terms: Vec<f64> = (0..grid.node_count())
        .map(|i| node_weight(grid, i) * tilde_a.defect(gu.at(i), pair.j.at(i), &grid.point(i)))
        .collect();
    Ok(pairwise_sum(&terms))
}

pub fn certificate(pair: &FluxPair, tilde_a: &TildeA, grid: &Grid) -> Result<GapReport> {
    let obj = objective(pair, tilde_a, grid)?;
    let rows = free_rows(grid);
    let rw: Vec<f64> = rows.iter().map(|&i| node_weight(grid, i)).collect();
    let cr = weighted_l2(&constraint_defect(pair, &rows), &rw);
    let gu = grad_x(&pair.u());
    let m = grid.m();
    let sym = tilde_a.symbol();
    let mut terms = Vec::with_capacity(grid.node_count());
    let mut a = vec![0.0; m];
    for i in 0..grid.node_count() {
        sym.eval_into(gu.at(i), &grid.point(i), &mut a);
        let d: f64 = a.iter().zip(pair.j.at(i)).map(|(x, y)| (x - y) * (x - y)).sum();
        terms.push(node_weight(grid, i) * d);
    }
    Ok(GapReport {
        objective: obj,
        constraint_residual: cr,
        flux_match: pairwise_sum(&terms).sqrt(),
        iterations: 0,
        scale: 1.0,
        converged: false,
        history: Vec::new(),
    })
}

/// Makes `pair` feasible by `j <- j + grad_X v`, with `v` solving the
/// `X`-Poisson problem for the constraint defect on every `(Y, t)` slice,
/// restricted to that slice's free nodes.
pub fn project_constraint(pair: &FluxPair, p: &DirichletProblem, grid: &Arc<Grid>) -> Result<FluxPair> {
    if grid.domain != p.domain || !pair.f.grid.same_shape(grid) {
        return Err(KfpError::InvalidArgument("pair, problem and grid disagree".into()));
    }
    let bc = classify_boundary(grid);
    let xl = grid.x_len();
    let m = grid.m();
    let dj = div_x(&pair.j);
    let tu = transport(&pair.u());
    let mut out = pair.clone();
    let mut cache: HashMap<Vec<bool>, XPoisson> = HashMap::new();
    for base in (0..grid.node_count()).step_by(xl) {
        let mask: Vec<bool> = (0..xl).map(|a| !bc.tag(base + a).is_kolmogorov()).collect();
        if !mask.iter().any(|b| *b) {
            continue;
        }
        let w: Vec<f64> = (0..xl)
            .map(|a| {
                let i = base + a;
                if mask[a] {
                    pair.gstar.values[i] + tu.values[i] - dj.values[i]
                } else {
                    0.0
                }
            })
            .collect();
        if w.iter().all(|v| *v == 0.0) {
            continue;
        }
        if !cache.contains_key(&mask) {
            cache.insert(mask.clone(), XPoisson::for_grid(grid, Some(&mask))?);
        }
        let solver = &cache[&mask];
        let v = solver.solve(&w)?;
        let gv = solver.grad(&v);
        for a in 0..xl {
            for k in 0..m {
                out.j.values[(base + a) * m + k] += gv[a * m + k];
            }
        }
    }
    Ok(out)
}

/// Linear algebra of the augmented Lagrangian for a fixed grid and problem.
struct Augmented {
    m: usize,
    n: usize,
    w: Vec<f64>,
    free: Vec<bool>,
    grad: Csr,
    div: Csr,
    tr: Csr,
    rw: Vec<f64>,
    mat: Vec<f64>,
    inv: Vec<f64>,
}

impl Augmented {
    fn new(grid: &Grid, ta: &TildeA) -> Self {
        let n = grid.node_count();
        let m = grid.m();
        let rows = free_rows(grid);
        let mut free = vec![false; n];
        rows.iter().for_each(|&i| free[i] = true);
        let mut mat = Vec::with_capacity(n * m * m);
        let mut inv = Vec::with_capacity(n * m * m);
        for i in 0..n {
            let (a, ai) = ta.quadratic(&grid.point(i));
            for r in 0..m * m {
                mat.push(a[(r / m, r % m)]);
                inv.push(ai[(r / m, r % m)]);
            }
        }
        Self {
            m,
            n,
            w: (0..n).map(|i| node_weight(grid, i)).collect(),
            rw: rows.iter().map(|&i| node_weight(grid, i)).collect(),
            free,
            grad: grad_matrix(grid),
            div: div_rows(grid, &rows),
            tr: transport_rows(grid, &rows),
            mat,
            inv,
        }
    }

    fn dim(&self) -> usize {
        self.n * (1 + self.m)
    }

    /// Per-node `out_i = w_i B_i v_i` with `B` the coefficient or its inverse.
    fn node_apply(&self, b: &[f64], v: &[f64], out: &mut [f64], scale_w: bool) {
        let m = self.m;
        for i in 0..self.n {
            let wi = if scale_w { self.w[i] } else { 1.0 };
            for k in 0..m {
                out[i * m + k] = wi * (0..m).map(|l| b[i * m * m + k * m + l] * v[i * m + l]).sum::<f64>();
            }
        }
    }

    /// `C z = div j - T f` on the free rows.
    fn constraint(&self, z: &[f64]) -> Vec<f64> {
        let (f, j) = z.split_at(self.n);
        let nr = self.rw.len();
        let mut a = vec![0.0; nr];
        let mut b = vec![0.0; nr];
        self.div.mul(j, &mut a);
        self.tr.mul(f, &mut b);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    }

    /// `z_out += C^T y`.
    fn constraint_t_add(&self, y: &[f64], out: &mut [f64]) {
        let (of, oj) = out.split_at_mut(self.n);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        self.tr.tmul_add(&neg, of);
        self.div.tmul_add(y, oj);
    }

    fn hess(&self, rho: f64, z: &[f64], out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let mut zf = z[..n].to_vec();
        for (v, fr) in zf.iter_mut().zip(&self.free) {
            if !fr {
                *v = 0.0;
            }
        }
        let j = &z[n..];
        let mut xi = vec![0.0; n * m];
        self.grad.mul(&zf, &mut xi);
        let mut mxi = vec![0.0; n * m];
        self.node_apply(&self.mat, &xi, &mut mxi, true);
        let mut minvj = vec![0.0; n * m];
        self.node_apply(&self.inv, j, &mut minvj, true);
        let q: Vec<f64> = (0..n * m).map(|r| mxi[r] - self.w[r / m] * j[r]).collect();
        out.iter_mut().for_each(|v| *v = 0.0);
        self.grad.tmul_add(&q, &mut out[..n]);
        for r in 0..n * m {
            out[n + r] = minvj[r] - self.w[r / m] * xi[r];
        }
        let mut zz = zf;
        zz.extend_from_slice(j);
        let c = self.constraint(&zz);
        let s: Vec<f64> = c.iter().zip(&self.rw).map(|(c, w)| rho * w * c).collect();
        self.constraint_t_add(&s, out);
        for i in 0..n {
            if !self.free[i] {
                out[i] = 0.0;
            }
        }
    }

    fn jacobi(&self, rho: f64) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut d = vec![0.0; self.dim()];
        let wm: Vec<f64> = (0..n * m).map(|r| self.w[r / m] * self.mat[(r / m) * m * m + (r % m) * (m + 1)]).collect();
        let gd = self.grad.gram_diag(&wm);
        let td = self.tr.gram_diag(&self.rw);
        let dd = self.div.gram_diag(&self.rw);
        for i in 0..n {
            d[i] = if self.free[i] { gd[i] + rho * td[i] } else { 1.0 };
        }
        for r in 0..n * m {
            d[n + r] = self.w[r / m] * self.inv[(r / m) * m * m + (r % m) * (m + 1)] + rho * dd[r];
        }
        d
    }

    /// Right-hand side of the inner problem for multiplier `lam`, shifted
    /// constraint target `b` and extension gradient `xe`.
    fn rhs(&self, rho: f64, lam: &[f64], b: &[f64], xe: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![0.0; self.dim()];
        let mut mxe = vec![0.0; n * m];
        self.node_apply(&self.mat, xe, &mut mxe, true);
        let mut gf = vec![0.0; n];
        self.grad.tmul_add(&mxe, &mut gf);
        for i in 0..n {
            out[i] = -gf[i];
        }
        for r in 0..n * m {
            out[n + r] = self.w[r / m] * xe[r];
        }
        let y: Vec<f64> = lam.iter().zip(b).zip(&self.rw).map(|((l, b), w)| -w * (l - rho * b)).collect();
        self.constraint_t_add(&y, &mut out);
        for i in 0..n {
            if !self.free[i] {
                out[i] = 0.0;
            }
        }
        out
    }

    /// Preconditioned CG; returns iterations used.
    fn pcg(&self, rho: f64, rhs: &[f64], x: &mut [f64], tol: f64, max_it: usize) -> usize {
        let dim = self.dim();
        let dinv: Vec<f64> = self.jacobi(rho).iter().map(|d| 1.0 / d).collect();
        let mut ax = vec![0.0; dim];
        self.hess(rho, x, &mut ax);
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut zv: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
        let mut p = zv.clone();
        let mut rz: f64 = r.iter().zip(&zv).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; dim];
        for it in 0..max_it {
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rn <= tol * bnorm {
                return it;
            }
            self.hess(rho, &p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                return it;
            }
            let alpha = rz / pap;
            for k in 0..dim {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            for k in 0..dim {
                zv[k] = r[k] * dinv[k];
            }
            let rz_new: f64 = r.iter().zip(&zv).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..dim {
                p[k] = zv[k] + beta * p[k];
            }
        }
        max_it
    }
}

/// Problem scale used to make tolerances dimensionless:
/// `||g*||_{L^2} + (||g_ext||^2 + ||grad_X g_ext||^2)^{1/2}` plus a floor.
pub fn problem_scale(pair: &FluxPair) -> f64 {
    let ge = &pair.ext;
    let w = ge.l2_norm();
    let gw = grad_x(ge).l2_norm();
    pair.gstar.l2_norm() + (w * w + gw * gw).sqrt() + f64::MIN_POSITIVE
}

pub fn minimize(p: &DirichletProblem, grid: &Arc<Grid>, tol: f64) -> Result<(FluxPair, GapReport)> {
    minimize_with(p, grid, &VariationalOptions { tol, ..Default::default() }, None)
}

pub fn minimize_with(
    p: &DirichletProblem,
    grid: &Arc<Grid>,
    opts: &VariationalOptions,
    init: Option<&FluxPair>,
) -> Result<(FluxPair, GapReport)> {
    let ta = make_tilde_a(p.symbol.clone())?;
    let mut pair = FluxPair::zero(p, grid)?;
    let aug = Augmented::new(grid, &ta);
    let (n, m) = (aug.n, aug.m);
    let scale = problem_scale(&pair);
    let rows = free_rows(grid);

    let mut z = vec![0.0; aug.dim()];
    match init {
        Some(start) => {
            if !start.f.grid.same_shape(grid) {
                return Err(KfpError::InvalidArgument("initial pair lives on a different grid".into()));
            }
            for i in 0..n {
                z[i] = if aug.free[i] { start.f.values[i] } else { 0.0 };
            }
            z[n..].copy_from_slice(&start.j.values);
        }
        None => {
            // pointwise flux of the extension as the starting flux
            let ge = grad_x(&pair.ext);
            for i in 0..n {
                let jv = ta.flux_prox(ge.at(i), &vec![0.0; m], 0.0, &grid.point(i));
                z[n + i * m..n + (i + 1) * m].copy_from_slice(&jv);
            }
        }
    }

    let xe = grad_x(&pair.ext).values;
    let te = transport(&pair.ext);
    let b: Vec<f64> = rows.iter().map(|&i| pair.gstar.values[i] + te.values[i]).collect();
    let mut lam = vec![0.0; rows.len()];
    let mut rho = opts.rho0;
    let mut report = GapReport {
        objective: f64::INFINITY,
        constraint_residual: f64::INFINITY,
        flux_match: f64::INFINITY,
        iterations: 0,
        scale,
        converged: false,
        history: Vec::new(),
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for outer in 1..=opts.max_outer {
        let rhs = aug.rhs(rho, &lam, &b, &xe);
        let j_old = z[n..].to_vec();
        aug.pcg(rho, &rhs, &mut z, opts.cg_tol, opts.cg_max);
        let c: Vec<f64> = aug.constraint(&z).iter().zip(&b).map(|(c, b)| c - b).collect();
        for (l, c) in lam.iter_mut().zip(&c) {
            *l += rho * c;
        }
        let dj: Vec<f64> = z[n..].iter().zip(&j_old).map(|(a, b)| a - b).collect();
        let mut ddj = vec![0.0; rows.len()];
        aug.div.mul(&dj, &mut ddj);
        let primal = weighted_l2(&c, &aug.rw);
        let dual = rho * weighted_l2(&ddj, &aug.rw);

        pair.f.values.copy_from_slice(&z[..n]);
        pair.j.values.copy_from_slice(&z[n..]);
        let cert = certificate(&pair, &ta, grid)?;
        report.history.push(cert.objective);
        report.iterations = outer;
        let merit = cert.objective.max(0.0) + cert.constraint_residual;
        if best.as_ref().map_or(true, |(bm, _)| merit < *bm) {
            best = Some((merit, z.clone()));
        }
        if cert.objective <= opts.tol * scale && cert.constraint_residual <= opts.tol * scale {
            report.objective = cert.objective;
            report.constraint_residual = cert.constraint_residual;
            report.flux_match = cert.flux_match;
            report.converged = true;
            return Ok((pair, report));
        }
        if primal > 10.0 * dual {
            rho *= 2.0;
        } else if dual > 10.0 * primal {
            rho *= 0.5;
        }
    }
    let (_, zb) = best.expect("at least one outer iteration");
    pair.f.values.copy_from_slice(&zb[..n]);
    pair.j.values.copy_from_slice(&zb[n..]);
    let cert = certificate(&pair, &ta, grid)?;
    report.objective = cert.objective;
    report.constraint_residual = cert.constraint_residual;
    report.flux_match = cert.flux_match;
    Ok((pair, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kolgeom::KPoint;
    use crate::mesh::{build_grid, BoxDomain};
    use crate::symbol::Symbol;
    use crate::viscous::Datum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn domain() -> BoxDomain {
        BoxDomain::cube(1, (-1.0, 1.0), (-1.0, 1.0), (0.0, 0.5)).unwrap()
    }

    fn problem(sym: Symbol, g: Datum, gstar: Datum) -> DirichletProblem {
        DirichletProblem::new(domain(), Arc::new(sym), g, gstar, 0.0).unwrap()
    }

    fn identity_ta() -> TildeA {
        make_tilde_a(Arc::new(Symbol::identity(1).unwrap())).unwrap()
    }

    fn smooth_g(p: &KPoint) -> f64 {
        1.0 + 0.5 * (2.0 * p.x[0]).sin() * (1.5 * p.y[0]).cos() + 0.3 * p.t
    }

    fn random_field(g: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn objective_examples() {
        let grid = build_grid(domain(), 7, 5, 4).unwrap();
        let p = problem(Symbol::identity(1).unwrap(), Datum::zero(), Datum::zero());
        let ta = identity_ta();
        let mut pair = FluxPair::zero(&p, &grid).unwrap();
        pair.f = Field::from_fn(grid.clone(), |q| (1.0 - q.x[0] * q.x[0]) * q.y[0]);
        pair.j = grad_x(&pair.f);
        assert_eq!(objective(&pair, &ta, &grid).unwrap(), 0.0);
        let mut unit = FluxPair::zero(&p, &grid).unwrap();
        unit.j.values.iter_mut().for_each(|v| *v = 1.0);
        let v = objective(&unit, &ta, &grid).unwrap();
        assert!((v - 0.5 * grid.domain.volume()).abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let grid = build_grid(domain(), 9, 7, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ta = identity_ta();
        let p = problem(Symbol::identity(1).unwrap(), Datum::function(smooth_g), Datum::function(|q| q.x[0] + q.t));
        let mut pair = FluxPair::zero(&p, &grid).unwrap();
        let bc = classify_boundary(&grid);
        for (i, v) in random_field(&grid, &mut rng).into_iter().enumerate() {
            if !bc.tag(i).is_kolmogorov() {
                pair.f.values[i] = v;
            }
        }
        pair.j.values = random_field(&grid, &mut rng);
        let proj = project_constraint(&pair, &p, &grid).unwrap();
        let cert = certificate(&proj, &ta, &grid).unwrap();
        assert!(cert.constraint_residual < 1e-10, "{}", cert.constraint_residual);
        assert!(cert.objective >= -1e-10 * problem_scale(&proj));
        let again = project_constraint(&proj, &p, &grid).unwrap();
        assert!(again.j.values.iter().zip(&proj.j.values).all(|(a, b)| (a - b).abs() < 1e-12));

        let z = problem(Symbol::identity(1).unwrap(), Datum::zero(), Datum::zero());
        let zp = project_constraint(&FluxPair::zero(&z, &grid).unwrap(), &z, &grid).unwrap();
        assert_eq!(zp.j.max_abs(), 0.0);
    }

    #[test]
    fn projection_recovers_manufactured_poisson_flux() {
        let grid = build_grid(domain(), 17, 5, 3).unwrap();
        let v0 = Field::from_fn(grid.clone(), |q| (std::f64::consts::PI * q.x[0]).sin() * (1.0 + q.y[0] * q.y[0]));
        let gstar = div_x(&grad_x(&v0));
        let p = problem(Symbol::identity(1).unwrap(), Datum::zero(), Datum::nodal(gstar));
        let proj = project_constraint(&FluxPair::zero(&p, &grid).unwrap(), &p, &grid).unwrap();
        let gv = grad_x(&v0);
        let bc = classify_boundary(&grid);
        let xl = grid.x_len();
        for base in (0..grid.node_count()).step_by(xl) {
            // slices with every interior node free carry the full flux
            if (1..xl - 1).all(|a| !bc.tag(base + a).is_kolmogorov()) {
                for a in 0..xl {
                    assert!((proj.j.values[base + a] - gv.values[base + a]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn null_data_gives_null_minimizer() {
        let grid = build_grid(domain(), 7, 7, 4).unwrap();
        let p = problem(Symbol::identity(1).unwrap(), Datum::zero(), Datum::zero());
        let (pair, rep) = minimize(&p, &grid, 1e-8).unwrap();
        assert!(rep.converged);
        assert!(rep.objective.abs() <= 1e-12);
        assert_eq!(pair.f.max_abs(), 0.0);
        assert_eq!(pair.j.max_abs(), 0.0);
    }

    #[test]
    fn minimizer_certifies_a_solution() {
        let grid = build_grid(domain(), 9, 9, 5).unwrap();
        for sym in [
            Symbol::identity(1).unwrap(),
            Symbol::diagonal(&[2.0]).unwrap(),
            Symbol::checkerboard(1, 3.0, 0.5).unwrap(),
        ] {
            let p = problem(sym, Datum::function(smooth_g), Datum::function(|q| q.x[0] * q.y[0]));
            let (pair, rep) = minimize(&p, &grid, 1e-8).unwrap();
            assert!(rep.converged, "{rep:?}");
            assert!(rep.objective <= 1e-8 * rep.scale && rep.objective >= -1e-12);
            assert!(rep.constraint_residual <= 1e-8 * rep.scale);
            assert!(rep.flux_match <= 1e-6 * rep.scale, "{rep:?}");
            assert!(pair.f.is_finite());
        }
    }

    #[test]
    fn minimizer_is_unique() {
        let grid = build_grid(domain(), 7, 7, 4).unwrap();
        let p = problem(Symbol::identity(1).unwrap(), Datum::function(smooth_g), Datum::constant(0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let opts = VariationalOptions { tol: 1e-10, ..Default::default() };
        let mut sols = Vec::new();
        for _ in 0..2 {
            let mut init = FluxPair::zero(&p, &grid).unwrap();
            init.f.values = random_field(&grid, &mut rng);
            init.j.values = random_field(&grid, &mut rng);
            let (pair, rep) = minimize_with(&p, &grid, &opts, Some(&init)).unwrap();
            assert!(rep.converged);
            sols.push(pair.u());
        }
        let d = sols[0].zip_with(&sols[1], |a, b| a - b).unwrap().l2_norm() / sols[0].l2_norm();
        assert!(d <= 1e-6, "{d}");
    }

    #[test]
    fn inner_hessian_is_positive_definite() {
        let grid = build_grid(domain(), 7, 5, 4).unwrap();
        let aug = Augmented::new(&grid, &make_tilde_a(Arc::new(Symbol::diagonal(&[1.5]).unwrap())).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut hz = vec![0.0; aug.dim()];
        for rho in [0.5, 1.0, 64.0] {
            for _ in 0..10 {
                let mut z: Vec<f64> = (0..aug.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for i in 0..aug.n {
                    if !aug.free[i] {
                        z[i] = 0.0;
                    }
                }
                aug.hess(rho, &z, &mut hz);
                let zz: f64 = z.iter().map(|v| v * v).sum();
                let q: f64 = z.iter().zip(&hz).map(|(a, b)| a * b).sum();
                assert!(q / zz > 0.0);
            }
            // symmetry
            let a: Vec<f64> = (0..aug.dim())
                .map(|i| if i < aug.n && !aug.free[i] { 0.0 } else { rng.gen_range(-1.0..1.0) })
                .collect();
            let b: Vec<f64> = (0..aug.dim())
                .map(|i| if i < aug.n && !aug.free[i] { 0.0 } else { rng.gen_range(-1.0..1.0) })
                .collect();
            let mut ha = vec![0.0; aug.dim()];
            let mut hb = vec![0.0; aug.dim()];
            aug.hess(rho, &a, &mut ha);
            aug.hess(rho, &b, &mut hb);
            let x: f64 = a.iter().zip(&hb).map(|(p, q)| p * q).sum();
            let y: f64 = b.iter().zip(&ha).map(|(p, q)| p * q).sum();
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn flux_prox_matches_brute_force() {
        let ta = identity_ta();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let (xi, c, rho) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.1..5.0));
            let at = KPoint::scalar(0.0, 0.0, 0.0);
            let f = |e: f64| ta.eval(&[xi], &[e], &at) - xi * e + 0.5 * rho * (e - c) * (e - c);
            let (mut lo, mut hi) = (-20.0f64, 20.0f64);
            for _ in 0..200 {
                let a = lo + (hi - lo) / 3.0;
                let b = hi - (hi - lo) / 3.0;
                if f(a) < f(b) {
                    hi = b
                } else {
                    lo = a
                }
            }
            let prox = ta.flux_prox(&[xi], &[c], rho, &at)[0];
            assert!((prox - 0.5 * (lo + hi)).abs() < 1e-6);
        }
    }

    #[test]
    fn certificate_detects_perturbations() {
        let grid = build_grid(domain(), 9, 7, 4).unwrap();
        let ta = identity_ta();
        let p = problem(Symbol::identity(1).unwrap(), Datum::function(smooth_g), Datum::constant(-0.5));
        let (pair, rep) = minimize(&p, &grid, 1e-10).unwrap();
        assert!(rep.converged);
        let mut shifted = pair.clone();
        shifted.j.values.iter_mut().for_each(|v| *v += 0.1);
        let gu = grad_x(&pair.u());
        let expected: f64 = (0..grid.node_count())
            .map(|i| node_weight(&grid, i) * ta.defect(gu.at(i), shifted.j.at(i), &grid.point(i)))
            .sum();
        let gap = certificate(&shifted, &ta, &grid).unwrap().objective;
        assert!(gap > 0.0 && (gap - expected).abs() <= 1e-12 * expected.max(1.0));
        let mut doubled = pair.clone();
        doubled.f = pair.u().scaled(2.0).zip_with(&pair.ext, |a, b| a - b).unwrap();
        assert!(certificate(&doubled, &ta, &grid).unwrap().objective > 1e-6);
    }

    #[test]
    fn non_gradient_symbols_are_unsupported() {
        let grid = build_grid(BoxDomain::cube(2, (-1.0, 1.0), (-1.0, 1.0), (0.0, 0.5)).unwrap(), 5, 5, 3).unwrap();
        let sym = Symbol::modulated(2, 0.25, crate::symbol::MODULATED_LAMBDA).unwrap();
        let p = DirichletProblem::new(grid.domain.clone(), Arc::new(sym), Datum::zero(), Datum::zero(), 0.0).unwrap();
        assert!(matches!(minimize(&p, &grid, 1e-8), Err(KfpError::Unsupported(_))));
    }
}
