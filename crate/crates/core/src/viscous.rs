//! Vanishing-viscosity solver.
//!
//! Solves `div_X A(grad_X u) + eps Lap_Y u - (d_t + X . grad_Y) u = g*` on a
//! box with `u = g` on the parabolic boundary: every `X` and `Y` face and the
//! initial level. Levels are marched by backward Euler; each level is a
//! nonlinear elliptic problem solved by a damped, preconditioned Picard
//! iteration `u <- u - omega P^{-1} R(u)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{KfpError, Result};
use crate::kolgeom::KPoint;
use crate::mesh::ops::{axis_index, sbp_diff};
use crate::mesh::{
    div_x, grad_x, laplace_y, node_weight, pairwise_sum, transport, BandedMatrix, BoxDomain, Field, Grid, VectorField,
};
use crate::symbol::{Symbol, SymbolKind};

pub type ScalarFn = Arc<dyn Fn(&KPoint) -> f64 + Send + Sync>;

/// Boundary datum or source: either a function of the point or nodal values
/// on a specific grid.
#[derive(Clone)]
pub enum Datum {
    Function(ScalarFn),
    Nodal(Arc<Field>),
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Function(_) => write!(f, "Datum::Function"),
            Datum::Nodal(u) => write!(f, "Datum::Nodal({} nodes)", u.values.len()),
        }
    }
}

impl Datum {
    pub fn function(f: impl Fn(&KPoint) -> f64 + Send + Sync + 'static) -> Self {
        Datum::Function(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Datum::function(move |_| c)
    }

    pub fn zero() -> Self {
        Datum::constant(0.0)
    }

    pub fn nodal(u: Field) -> Self {
        Datum::Nodal(Arc::new(u))
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        match self {
            Datum::Nodal(u) if !u.grid.same_shape(grid) => {
                Err(KfpError::InvalidArgument("nodal datum lives on a different grid".into()))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn sample(&self, idx: usize, p: &KPoint) -> f64 {
        match self {
            Datum::Function(f) => f(p),
            Datum::Nodal(u) => u.values[idx],
        }
    }

    /// Nodal values on `grid`.
    pub fn to_field(&self, grid: &Arc<Grid>) -> Result<Field> {
        self.check(grid)?;
        let values: Vec<f64> = (0..grid.node_count()).map(|i| self.sample(i, &grid.point(i))).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KfpError::NonFinite("datum".into()));
        }
        Field::from_values(grid.clone(), values)
    }
}

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub domain: BoxDomain,
    pub symbol: Arc<Symbol>,
    pub g: Datum,
    pub gstar: Datum,
    pub epsilon: f64,
}

impl DirichletProblem {
    pub fn new(domain: BoxDomain, symbol: Arc<Symbol>, g: Datum, gstar: Datum, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(KfpError::InvalidArgument(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        if symbol.dim() != domain.dim() {
            return Err(KfpError::DimensionMismatch { expected: domain.dim(), got: symbol.dim() });
        }
        Ok(Self { domain, symbol, g, gstar, epsilon })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.domain.clone(), self.symbol.clone(), self.g.clone(), self.gstar.clone(), epsilon)
    }
}

/// Default viscosity tied to the mesh: `max_k hY_k^2`.
pub fn mesh_epsilon(grid: &Grid) -> f64 {
    grid.hy.iter().map(|h| h * h).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative slice tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub omega: f64,
    pub max_restarts: usize,
    /// Consecutive residual increases that count as divergence.
    pub divergence_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, omega: 1.0, max_restarts: 3, divergence_window: 5 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: Field,
    /// Picard iterations used on each level `1..nt` (last attempt).
    pub iterations: Vec<usize>,
    /// Relative residual after every Picard step, all levels concatenated.
    pub residual_history: Vec<f64>,
    /// Final relative residual of each solved level.
    pub slice_residuals: Vec<f64>,
    /// Relaxation finally used on each level.
    pub omegas: Vec<f64>,
    pub converged: bool,
    pub eps_used: f64,
    pub tol: f64,
    pub failure: Option<String>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.slice_residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }
}

/// `(node, weight)` pairs of the summation-by-parts derivative at `i`.
#[inline]
fn d_stencil(i: usize, s: usize, n: usize, h: f64) -> [(usize, f64); 2] {
    let j = axis_index(i, s, n);
    if j == 0 {
        [(i + s, 1.0 / h), (i, -1.0 / h)]
    } else if j == n - 1 {
        [(i, 1.0 / h), (i - s, -1.0 / h)]
    } else {
        [(i + s, 0.5 / h), (i - s, -0.5 / h)]
    }
}

/// Level-local data shared by the residual and the preconditioner.
struct Slice<'a> {
    grid: &'a Grid,
    symbol: &'a Symbol,
    eps: f64,
    unknown: Vec<bool>,
    pts: Vec<KPoint>,
}

impl<'a> Slice<'a> {
    fn new(grid: &'a Grid, symbol: &'a Symbol, eps: f64) -> Self {
        let len = grid.level_len();
        let unknown = (0..len)
            .map(|i| {
                let n = grid.unravel(i);
                !grid.is_x_boundary(&n) && !grid.is_y_boundary(&n)
            })
            .collect();
        let pts = (0..len).map(|i| grid.point(i)).collect();
        Self { grid, symbol, eps, unknown, pts }
    }

    fn set_level(&mut self, it: usize) {
        let t = self.grid.t_coord(it);
        self.pts.iter_mut().for_each(|p| p.t = t);
    }

    /// Residual at unknown nodes, zero elsewhere.
    fn residual(&self, cur: &[f64], prev: &[f64], gs: &[f64], flux: &mut [f64], out: &mut [f64]) {
        let g = self.grid;
        let m = g.m();
        let mut grad = vec![0.0; m];
        for i in 0..cur.len() {
            for (k, gk) in grad.iter_mut().enumerate() {
                let s = g.x_stride(k);
                *gk = sbp_diff(|q| cur[q], i, axis_index(i, s, g.nx), g.nx, s, g.hx[k]);
            }
            self.symbol.eval_into(&grad, &self.pts[i], &mut flux[i * m..(i + 1) * m]);
        }
        for i in 0..cur.len() {
            if !self.unknown[i] {
                out[i] = 0.0;
                continue;
            }
            let v = cur[i];
            let mut acc = (prev[i] - v) / g.ht - gs[i];
            for k in 0..m {
                let s = g.x_stride(k);
                acc += sbp_diff(|q| flux[q * m + k], i, axis_index(i, s, g.nx), g.nx, s, g.hx[k]);
                let sy = g.y_stride(k);
                let hy = g.hy[k];
                acc += self.eps * (cur[i + sy] - 2.0 * v + cur[i - sy]) / (hy * hy);
                let xk = self.pts[i].x[k];
                if xk > 0.0 {
                    acc -= xk * (v - cur[i - sy]) / hy;
                } else if xk < 0.0 {
                    acc -= xk * (cur[i + sy] - v) / hy;
                }
            }
            out[i] = acc;
        }
    }

    /// Linear preconditioner: the exact Jacobian for linear symbols, a
    /// scalar-stiffness Laplacian otherwise. Known nodes get identity rows.
    fn preconditioner(&self) -> Result<BandedMatrix> {
        let g = self.grid;
        let m = g.m();
        let len = g.level_len();
        let band = g.y_stride(0).max(2 * g.x_stride(0));
        let mut a = BandedMatrix::zeros(len, band, band);
        let stiff = self.symbol.reference_stiffness();
        let coef: Vec<Vec<f64>> = (0..len)
            .map(|n| match self.symbol.coefficient(&self.pts[n]) {
                Some(c) => (0..m * m).map(|r| c[(r / m, r % m)]).collect(),
                None => (0..m * m).map(|r| if r / m == r % m { stiff } else { 0.0 }).collect(),
            })
            .collect();
        for i in 0..len {
            if !self.unknown[i] {
                a.add(i, i, 1.0);
                continue;
            }
            for k in 0..m {
                for (n, wk) in d_stencil(i, g.x_stride(k), g.nx, g.hx[k]) {
                    for l in 0..m {
                        let ckl = coef[n][k * m + l];
                        if ckl == 0.0 {
                            continue;
                        }
                        for (q, wl) in d_stencil(n, g.x_stride(l), g.nx, g.hx[l]) {
                            if self.unknown[q] {
                                a.add(i, q, wk * ckl * wl);
                            }
                        }
                    }
                }
            }
            a.add(i, i, -1.0 / g.ht);
            for k in 0..m {
                let s = g.y_stride(k);
                let hy = g.hy[k];
                let e = self.eps / (hy * hy);
                a.add(i, i, -2.0 * e);
                for q in [i - s, i + s] {
                    if self.unknown[q] {
                        a.add(i, q, e);
                    }
                }
                let xk = self.pts[i].x[k];
                if xk > 0.0 {
                    a.add(i, i, -xk / hy);
                    if self.unknown[i - s] {
                        a.add(i, i - s, xk / hy);
                    }
                } else if xk < 0.0 {
                    a.add(i, i, xk / hy);
                    if self.unknown[i + s] {
                        a.add(i, i + s, -xk / hy);
                    }
                }
            }
        }
        a.factor()?;
        Ok(a)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

enum SliceOutcome {
    Converged,
    Diverged(String),
    Exhausted,
}

/// Solves one level in place. `cur` holds boundary values and the initial
/// guess on entry. Returns `(outcome, iterations, omega, history)`.
fn solve_level(
    sl: &Slice,
    pre: &BandedMatrix,
    prev: &[f64],
    gs: &[f64],
    cur: &mut [f64],
    opts: &SolverOptions,
) -> (SliceOutcome, usize, f64, Vec<f64>) {
    let len = cur.len();
    let m = sl.grid.m();
    let init = cur.to_vec();
    let scale = 1.0 + max_abs(gs) + max_abs(prev).max(max_abs(&init)) / sl.grid.ht;
    let mut flux = vec![0.0; len * m];
    let mut r = vec![0.0; len];
    let mut omega = opts.omega;
    let mut history = Vec::new();
    let mut last_failure = String::new();
    for attempt in 0..=opts.max_restarts {
        if attempt > 0 {
            omega *= 0.5;
            cur.copy_from_slice(&init);
        }
        sl.residual(cur, prev, gs, &mut flux, &mut r);
        let mut last = max_abs(&r) / scale;
        let mut grow = 0usize;
        let mut diverged = false;
        for iter in 1..=opts.max_iter {
            pre.solve_in_place(&mut r);
            for i in 0..len {
                if sl.unknown[i] {
                    cur[i] -= omega * r[i];
                }
            }
            sl.residual(cur, prev, gs, &mut flux, &mut r);
            let norm = max_abs(&r) / scale;
            history.push(norm);
            if !norm.is_finite() {
                diverged = true;
                last_failure = format!("non-finite residual at iteration {iter}");
                break;
            }
            if norm <= opts.tol {
                return (SliceOutcome::Converged, iter, omega, history);
            }
            grow = if norm > last { grow + 1 } else { 0 };
            last = norm;
            if grow >= opts.divergence_window {
                diverged = true;
                last_failure = format!("residual grew {grow} times in a row (omega {omega})");
                break;
            }
            if iter == opts.max_iter {
                return (SliceOutcome::Exhausted, iter, omega, history);
            }
        }
        if !diverged {
            break;
        }
    }
    (SliceOutcome::Diverged(last_failure), opts.max_iter, omega, history)
}

fn check_grid(p: &DirichletProblem, grid: &Grid) -> Result<()> {
    if grid.domain != p.domain {
        return Err(KfpError::InvalidArgument("grid was not built on the problem domain".into()));
    }
    p.g.check(grid)?;
    p.gstar.check(grid)
}

pub fn march(p: &DirichletProblem, grid: &Arc<Grid>) -> Result<SolveReport> {
    march_with(p, grid, &SolverOptions::default(), None)
}

/// Backward-Euler march. `guess` (same grid) supplies initial iterates on
/// every level; otherwise each level starts from the previous one.
pub fn march_with(
    p: &DirichletProblem,
    grid: &Arc<Grid>,
    opts: &SolverOptions,
    guess: Option<&Field>,
) -> Result<SolveReport> {
    if !(p.epsilon > 0.0) {
        return Err(KfpError::InvalidArgument("march needs epsilon > 0; use continuation to approach 0".into()));
    }
    if !(opts.omega > 0.0 && opts.omega <= 1.0) {
        return Err(KfpError::InvalidArgument(format!("relaxation must lie in (0, 1], got {}", opts.omega)));
    }
    check_grid(p, grid)?;
    if let Some(gs) = guess {
        if !gs.grid.same_shape(grid) {
            return Err(KfpError::InvalidArgument("initial guess lives on a different grid".into()));
        }
    }
    let len = grid.level_len();
    let mut u = Field::zeros(grid.clone());
    let mut sl = Slice::new(grid, &p.symbol, p.epsilon);
    for i in 0..len {
        u.values[i] = p.g.sample(i, &sl.pts[i]);
    }
    let time_dependent = matches!(p.symbol.kind(), SymbolKind::Checkerboard { .. });
    let mut pre: Option<BandedMatrix> = None;
    let mut report = SolveReport {
        field: Field::zeros(grid.clone()),
        iterations: Vec::new(),
        residual_history: Vec::new(),
        slice_residuals: Vec::new(),
        omegas: Vec::new(),
        converged: true,
        eps_used: p.epsilon,
        tol: opts.tol,
        failure: None,
    };
    let mut gs = vec![0.0; len];
    for it in 1..grid.nt {
        sl.set_level(it);
        if pre.is_none() || time_dependent {
            pre = Some(sl.preconditioner()?);
        }
        let base = it * len;
        let (done, rest) = u.values.split_at_mut(base);
        let prev = &done[base - len..];
        let cur = &mut rest[..len];
        for i in 0..len {
            gs[i] = p.gstar.sample(base + i, &sl.pts[i]);
            cur[i] = if sl.unknown[i] {
                guess.map_or(prev[i], |f| f.values[base + i])
            } else {
                p.g.sample(base + i, &sl.pts[i])
            };
        }
        if cur.iter().chain(gs.iter()).any(|v| !v.is_finite()) {
            return Err(KfpError::NonFinite(format!("boundary data or source on level {it}")));
        }
        let (outcome, iters, omega, hist) = solve_level(&sl, pre.as_ref().unwrap(), prev, &gs, cur, opts);
        report.slice_residuals.push(*hist.last().unwrap_or(&0.0));
        report.residual_history.extend(hist);
        report.iterations.push(iters);
        report.omegas.push(omega);
        match outcome {
            SliceOutcome::Converged => {}
            SliceOutcome::Diverged(msg) => {
                report.converged = false;
                report.failure = Some(format!("level {it}: {msg}"));
                break;
            }
            SliceOutcome::Exhausted => {
                report.converged = false;
                report.failure = Some(format!("level {it}: no convergence in {} iterations", opts.max_iter));
                break;
            }
        }
    }
    report.field = u;
    Ok(report)
}

/// The discrete operator `div_X A(grad_X u) + eps Lap_Y u - (d_t + X . grad_Y) u`
/// at every node.
pub fn apply_operator(symbol: &Symbol, epsilon: f64, u: &Field) -> Result<Field> {
    let g = &u.grid;
    let gu = grad_x(u);
    let mut flux = VectorField::zeros(g.clone());
    for i in 0..g.node_count() {
        let p = g.point(i);
        let m = g.m();
        symbol.eval_into(gu.at(i), &p, &mut flux.values[i * m..(i + 1) * m]);
    }
    let div = div_x(&flux);
    let lap = laplace_y(u);
    let tr = transport(u);
    let out: Vec<f64> = (0..g.node_count()).map(|i| div.values[i] + epsilon * lap.values[i] - tr.values[i]).collect();
    Field::from_values(g.clone(), out)
}

/// Nodes where the equation is enforced: `X`- and `Y`-interior, `t > t0`.
pub fn equation_nodes(grid: &Grid) -> Vec<usize> {
    (grid.level_len()..grid.node_count())
        .filter(|&i| {
            let n = grid.unravel(i);
            !grid.is_x_boundary(&n) && !grid.is_y_boundary(&n)
        })
        .collect()
}

/// Strong-form defect `(sup, L^2)` over the equation nodes.
pub fn residual(p: &DirichletProblem, grid: &Arc<Grid>, u: &Field) -> Result<(f64, f64)> {
    check_grid(p, grid)?;
    if !u.grid.same_shape(grid) {
        return Err(KfpError::InvalidArgument("field lives on a different grid".into()));
    }
    let lu = apply_operator(&p.symbol, p.epsilon, u)?;
    let nodes = equation_nodes(grid);
    let mut sup: f64 = 0.0;
    let mut terms = Vec::with_capacity(nodes.len());
    for &i in &nodes {
        let r = lu.values[i] - p.gstar.sample(i, &grid.point(i));
        sup = sup.max(r.abs());
        terms.push(node_weight(grid, i) * r * r);
    }
    Ok((sup, pairwise_sum(&terms).sqrt()))
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub reports: Vec<SolveReport>,
    /// `L^2` distance between consecutive solutions.
    pub drifts: Vec<f64>,
    pub complete: bool,
}

impl ContinuationReport {
    /// Solution at the smallest successfully reached `eps`.
    pub fn last(&self) -> Option<&SolveReport> {
        self.reports.iter().rev().find(|r| r.converged)
    }
}

pub fn continuation(
    p: &DirichletProblem,
    grid: &Arc<Grid>,
    eps_list: &[f64],
    opts: &SolverOptions,
) -> Result<ContinuationReport> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(KfpError::InvalidArgument("eps_list must be nonempty and positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(KfpError::InvalidArgument("eps_list must be strictly decreasing".into()));
    }
    let mut out = ContinuationReport { reports: Vec::new(), drifts: Vec::new(), complete: true };
    for &eps in eps_list {
        let pe = p.with_epsilon(eps)?;
        let guess = out.reports.last().map(|r: &SolveReport| r.field.clone());
        let rep = march_with(&pe, grid, opts, guess.as_ref())?;
        let ok = rep.converged;
        if let Some(prev) = &guess {
            if ok {
                out.drifts.push(rep.field.zip_with(prev, |a, b| a - b)?.l2_norm());
            }
        }
        out.reports.push(rep);
        if !ok {
            out.complete = false;
            break;
        }
    }
    Ok(out)
}
