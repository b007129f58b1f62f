use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KfpError, Result};
use crate::mesh::{build_grid, BoxDomain, Field, Grid};
use crate::symbol::Symbol;
use crate::viscous::{apply_operator, equation_nodes, march_with, Datum, DirichletProblem, SolverOptions};

fn tight() -> SolverOptions {
    SolverOptions { tol: 1e-12, ..SolverOptions::default() }
}

/// `min (L u - g*)` over the equation nodes; nonnegative for a sub-solution.
pub fn subsolution_defect(p: &DirichletProblem, u: &Field) -> Result<f64> {
    let g = &u.grid;
    let lu = apply_operator(&p.symbol, p.epsilon, u)?;
    Ok(equation_nodes(g)
        .into_iter()
        .map(|i| lu.values[i] - p.gstar.sample(i, &g.point(i)))
        .fold(f64::INFINITY, f64::min))
}

/// Solves `v` with the operator and source of `p` and the boundary data of
/// `u_sub`, and returns `max (u_sub - v)` over all nodes.
pub fn comparison_check(p: &DirichletProblem, u_sub: &Field, grid: &Arc<Grid>) -> Result<f64> {
    if !u_sub.grid.same_shape(grid) {
        return Err(KfpError::InvalidArgument("field lives on a different grid".into()));
    }
    let q = DirichletProblem::new(
        p.domain.clone(),
        p.symbol.clone(),
        Datum::nodal(u_sub.clone()),
        p.gstar.clone(),
        p.epsilon,
    )?;
    let rep = march_with(&q, grid, &tight(), None)?;
    if !rep.converged {
        return Err(KfpError::NotConverged(rep.failure.unwrap_or_else(|| "comparison solve".into())));
    }
    Ok(u_sub.values.iter().zip(&rep.field.values).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCase {
    pub index: usize,
    pub symbol: String,
    pub m: usize,
    pub delta: f64,
    /// `min (L u_sub - g*)`, confirming the sub-solution orientation.
    pub sub_defect: f64,
    pub max_violation: f64,
}

fn random_symbol(rng: &mut ChaCha8Rng, m: usize) -> Result<Symbol> {
    match rng.gen_range(0..3) {
        0 => Symbol::identity(m),
        1 => {
            let d: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
            Symbol::diagonal(&d)
        }
        _ => Symbol::checkerboard(m, rng.gen_range(1.5..4.0), rng.gen_range(0.2..0.6)),
    }
}

/// Smooth random function: a constant plus a few low-frequency products.
fn random_datum(rng: &mut ChaCha8Rng, m: usize, amp: f64) -> Datum {
    let c0 = rng.gen_range(-amp..amp);
    let modes: Vec<(f64, Vec<f64>, Vec<f64>, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-amp..amp),
                (0..m).map(|_| rng.gen_range(0.0..2.0)).collect(),
                (0..m).map(|_| rng.gen_range(0.0..2.0)).collect(),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    Datum::function(move |p| {
        c0 + modes
            .iter()
            .map(|(a, kx, ky, kt, ph)| {
                let s: f64 = (0..p.dim()).map(|k| kx[k] * p.x[k] + ky[k] * p.y[k]).sum::<f64>() + kt * p.t + ph;
                a * s.sin()
            })
            .sum::<f64>()
    })
}

/// `n` randomized cases: symbol, boundary data, source and `delta > 0`.
/// `u_sub` solves the problem with source `g* + delta`; `v` solves it with
/// source `g*` and the boundary values of `u_sub`.
pub fn comparison_suite(seed: u64, n: usize) -> Result<Vec<ComparisonCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for index in 0..n {
        let m = if rng.gen_bool(0.75) { 1 } else { 2 };
        let symbol = Arc::new(random_symbol(&mut rng, m)?);
        let domain = BoxDomain::cube(m, (-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0))?;
        let grid = if m == 1 { build_grid(domain.clone(), 17, 17, 9)? } else { build_grid(domain.clone(), 7, 7, 4)? };
        let eps = crate::viscous::mesh_epsilon(&grid);
        let g = random_datum(&mut rng, m, 1.0);
        let gstar = random_datum(&mut rng, m, 0.5);
        let delta = rng.gen_range(0.05..1.0);
        let gs = gstar.clone();
        let raised = Datum::function(move |p| gs.sample(0, p) + delta);
        let sub = DirichletProblem::new(domain.clone(), symbol.clone(), g, raised, eps)?;
        let rep = march_with(&sub, &grid, &tight(), None)?;
        if !rep.converged {
            return Err(KfpError::NotConverged(format!("comparison case {index}")));
        }
        let u_sub = rep.field;
        let p = DirichletProblem::new(domain, symbol.clone(), Datum::zero(), gstar, eps)?;
        let sub_defect = subsolution_defect(&p, &u_sub)?;
        let max_violation = comparison_check(&p, &u_sub, &grid)?;
        out.push(ComparisonCase { index, symbol: symbol.name(), m, delta, sub_defect, max_violation });
    }
    Ok(out)
}
