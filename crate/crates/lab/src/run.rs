//! Executes a parsed configuration and writes its artifacts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kfp_core::kolgeom::{KCylinder, KPoint};
use kfp_core::mesh::{build_grid, BoxDomain, Field, Grid};
use kfp_core::symbol::{
    check_m_class, check_r_class, m_class_samples, r_class_pairs, ClassReport, Symbol, SymbolClass, MODULATED_LAMBDA,
};
use kfp_core::variational::{minimize_with, VariationalOptions};
use kfp_core::verify::{
    comparison_suite, dual_norm, energy_ratio, harnack_quotient, higher_integrability, holder_estimate, kernel_mass,
    local_boundedness, model_kernel, model_kernel_residual, pair_scale, uniform_pairs, w_norm, weak_harnack_quotient,
    EstimateReport, PairRegion,
};
use kfp_core::viscous::{
    continuation, march_with, mesh_epsilon, residual, DirichletProblem, SolveReport, SolverOptions,
};
use kfp_core::KfpError;

use crate::catalog::{manufactured_solution, DataSpec};
use crate::config::{Command, ConfigError, Epsilon, Method, RunConfig, Suite};
use crate::output::{num, write_csv, write_field, write_plot, Plot, Series, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Pairs sampled by the Hölder suite.
const HOLDER_PAIRS: usize = 10_000;
/// Samples per class check.
const CLASS_SAMPLES: usize = 10_000;

#[derive(Debug)]
pub enum LabError {
    Config(ConfigError),
    NotConverged(String),
    Io(String),
    Core(KfpError),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_CONFIG,
            LabError::NotConverged(_) => EXIT_NOT_CONVERGED,
            LabError::Io(_) => EXIT_IO,
            LabError::Core(e) => match e {
                KfpError::NotConverged(_) | KfpError::Singular { .. } | KfpError::NonFinite(_) => EXIT_NOT_CONVERGED,
                KfpError::Io(_) | KfpError::Format(_) => EXIT_IO,
                _ => EXIT_CONFIG,
            },
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(e) => write!(f, "{e}"),
            LabError::NotConverged(m) => write!(f, "solver did not converge: {m}"),
            LabError::Io(m) => write!(f, "i/o: {m}"),
            LabError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<KfpError> for LabError {
    fn from(e: KfpError) -> Self {
        LabError::Core(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<ConfigError> for LabError {
    fn from(e: ConfigError) -> Self {
        LabError::Config(e)
    }
}

fn config_error(msg: impl Into<String>) -> LabError {
    LabError::Config(ConfigError { line: None, message: msg.into() })
}

/// Files written by a run, in order.
#[derive(Debug, Default, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    summary: RunSummary,
}

impl Ctx<'_> {
    fn csv(&mut self, name: &str, t: &Table) -> Result<(), LabError> {
        let p = self.out.join(name);
        write_csv(&p, t)?;
        self.summary.files.push(p);
        Ok(())
    }

    fn field(&mut self, name: &str, u: &Field) -> Result<(), LabError> {
        let p = self.out.join(name);
        write_field(&p, u)?;
        self.summary.files.push(p);
        Ok(())
    }

    /// Plot failures are reported but never fail the run.
    fn plot(&mut self, name: &str, plot: &Plot) {
        if !self.cfg.plots {
            return;
        }
        let p = self.out.join(name);
        match write_plot(&p, plot) {
            Ok(()) => self.summary.files.push(p),
            Err(e) => self.summary.notes.push(format!("plot {name} skipped: {e}")),
        }
    }
}

pub fn build_symbol(cfg: &RunConfig) -> Result<Symbol, LabError> {
    let s = &cfg.symbol;
    let m = cfg.m;
    let sym = match s.name.as_str() {
        "identity" => Symbol::identity(m)?,
        "diagonal" => Symbol::diagonal(&s.diag)?,
        "checkerboard" => return Ok(Symbol::checkerboard(m, s.lambda.unwrap_or(4.0), s.cell)?),
        "modulated" => {
            let lambda = match s.lambda {
                Some(l) => l,
                None if s.delta == 0.25 => MODULATED_LAMBDA,
                None => {
                    return Err(config_error("symbol.lambda is required for a modulated symbol with delta != 0.25"))
                }
            };
            return Ok(Symbol::modulated(m, s.delta, lambda)?);
        }
        other => return Err(config_error(format!("unknown symbol '{other}'"))),
    };
    Ok(match s.lambda {
        Some(l) => sym.with_lambda(l)?,
        None => sym,
    })
}

pub fn build_domain(cfg: &RunConfig) -> Result<BoxDomain, LabError> {
    Ok(BoxDomain::cube(cfg.m, cfg.x, cfg.y, cfg.t)?)
}

pub fn build_ladder_grid(cfg: &RunConfig, k: usize) -> Result<Arc<Grid>, LabError> {
    let (nx, ny, nt) = cfg.resolution(k);
    Ok(build_grid(build_domain(cfg)?, nx, ny, nt)?)
}

pub fn epsilon_for(cfg: &RunConfig, grid: &Grid) -> f64 {
    match cfg.epsilon {
        Epsilon::Mesh => mesh_epsilon(grid),
        Epsilon::Value(e) => e,
    }
}

pub fn build_problem(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<DirichletProblem, LabError> {
    let symbol = Arc::new(build_symbol(cfg)?);
    // the variational formulation has no viscous term
    let eps = match cfg.method {
        Method::Viscous => epsilon_for(cfg, grid),
        Method::Variational => 0.0,
    };
    let gstar = cfg.gstar.source(&symbol, eps).map_err(|e| config_error(e.to_string()))?;
    Ok(DirichletProblem::new(build_domain(cfg)?, symbol, cfg.g.boundary(), gstar, eps)?)
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.tol, max_iter: cfg.max_iter, ..SolverOptions::default() }
}

/// Runs `cfg` with artifacts under `out`, which is created if needed.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary, LabError> {
    let command = cfg.command.ok_or_else(|| config_error("no command given"))?;
    if command != Command::Study && command != Command::Kernel && cfg.levels() > 1 {
        return Err(config_error("a refinement ladder is only used by study and kernel"));
    }
    std::fs::create_dir_all(out)?;
    let mut ctx = Ctx { cfg, out, summary: RunSummary::default() };
    match command {
        Command::Solve => solve(&mut ctx)?,
        Command::Verify => verify(&mut ctx)?,
        Command::Study => study(&mut ctx)?,
        Command::Classify => classify(&mut ctx)?,
        Command::Kernel => kernel(&mut ctx)?,
    }
    Ok(ctx.summary)
}

const SOLVE_HEADER: [&str; 16] = [
    "method",
    "m",
    "nx",
    "ny",
    "nt",
    "epsilon",
    "iterations",
    "converged",
    "residual_sup",
    "residual_l2",
    "objective",
    "constraint",
    "flux_match",
    "scale",
    "min",
    "max",
];

fn range(u: &Field) -> (f64, f64) {
    u.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

fn viscous_solve(
    ctx: &mut Ctx,
    p: &DirichletProblem,
    grid: &Arc<Grid>,
) -> Result<(SolveReport, DirichletProblem), LabError> {
    let cfg = ctx.cfg;
    let opts = solver_options(cfg);
    if cfg.eps_ladder.is_empty() {
        let rep = march_with(p, grid, &opts, None)?;
        return Ok((rep, p.clone()));
    }
    let cont = continuation(p, grid, &cfg.eps_ladder, &opts)?;
    let mut t = Table::new(&["epsilon", "iterations", "converged", "residual", "drift"]);
    for (k, r) in cont.reports.iter().enumerate() {
        let drift = if k == 0 { String::new() } else { num(cont.drifts[k - 1]) };
        t.push(vec![
            num(r.eps_used),
            r.total_iterations().to_string(),
            r.converged.to_string(),
            num(r.final_residual()),
            drift,
        ]);
    }
    ctx.csv("continuation.csv", &t)?;
    let last = cont.last().cloned().ok_or_else(|| LabError::NotConverged("empty continuation".into()))?;
    let q = p.with_epsilon(last.eps_used)?;
    Ok((last, q))
}

fn solve(ctx: &mut Ctx) -> Result<(), LabError> {
    let cfg = ctx.cfg;
    let grid = build_ladder_grid(cfg, 0)?;
    let p = build_problem(cfg, &grid)?;
    let (nx, ny, nt) = cfg.resolution(0);
    let mut t = Table::new(&SOLVE_HEADER);
    let converged;
    match cfg.method {
        Method::Viscous => {
            let (rep, q) = viscous_solve(ctx, &p, &grid)?;
            let (sup, l2) = residual(&q, &grid, &rep.field)?;
            let (lo, hi) = range(&rep.field);
            t.push(vec![
                "viscous".into(),
                cfg.m.to_string(),
                nx.to_string(),
                ny.to_string(),
                nt.to_string(),
                num(rep.eps_used),
                rep.total_iterations().to_string(),
                rep.converged.to_string(),
                num(sup),
                num(l2),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                num(lo),
                num(hi),
            ]);
            ctx.field("solution.kfp", &rep.field)?;
            ctx.csv("solve.csv", &t)?;
            let pts = rep.residual_history.iter().enumerate().map(|(k, r)| (k as f64 + 1.0, *r)).collect();
            ctx.plot(
                "residuals.svg",
                &Plot {
                    title: "viscous residual history".into(),
                    x_label: "iteration".into(),
                    y_label: "relative residual".into(),
                    log_x: false,
                    log_y: true,
                    series: vec![Series { name: "residual".into(), points: pts }],
                },
            );
            converged = rep.converged;
        }
        Method::Variational => {
            let opts = VariationalOptions {
                tol: cfg.tol.max(1e-14),
                max_outer: cfg.max_iter,
                ..VariationalOptions::default()
            };
            let (pair, gap) = minimize_with(&p, &grid, &opts, None)?;
            let u = pair.u();
            let (sup, l2) = residual(&p, &grid, &u)?;
            let (lo, hi) = range(&u);
            t.push(vec![
                "variational".into(),
                cfg.m.to_string(),
                nx.to_string(),
                ny.to_string(),
                nt.to_string(),
                num(p.epsilon),
                gap.iterations.to_string(),
                gap.converged.to_string(),
                num(sup),
                num(l2),
                num(gap.objective),
                num(gap.constraint_residual),
                num(gap.flux_match),
                num(gap.scale),
                num(lo),
                num(hi),
            ]);
            ctx.field("solution.kfp", &u)?;
            ctx.csv("solve.csv", &t)?;
            let pts = gap.history.iter().enumerate().map(|(k, r)| (k as f64 + 1.0, *r)).collect();
            ctx.plot(
                "objective.svg",
                &Plot {
                    title: "duality gap".into(),
                    x_label: "outer iteration".into(),
                    y_label: "J".into(),
                    log_x: false,
                    log_y: true,
                    series: vec![Series { name: "J".into(), points: pts }],
                },
            );
            converged = gap.converged;
        }
    }
    if !converged {
        return Err(LabError::NotConverged("tolerance not reached; outputs hold the last iterate".into()));
    }
    Ok(())
}

/// Largest `r <= 1` such that `Q_r` at the top centre of the box fits inside
/// it, with the centre.
fn top_cylinder(cfg: &RunConfig) -> (KPoint, f64) {
    let m = cfg.m;
    let xc = 0.5 * (cfg.x.0 + cfg.x.1);
    let yc = 0.5 * (cfg.y.0 + cfg.y.1);
    let center = KPoint { x: vec![xc; m], y: vec![yc; m], t: cfg.t.1 };
    let x0 = xc.abs() * (m as f64).sqrt();
    let hx = 0.5 * (cfg.x.1 - cfg.x.0);
    let hy = 0.5 * (cfg.y.1 - cfg.y.0);
    let fits = |r: f64| r <= hx && r * r <= cfg.t.1 - cfg.t.0 && r * r * r + r * r * x0 <= hy;
    let (mut lo, mut hi) = (0.0, 1.0);
    if fits(1.0) {
        lo = 1.0;
    } else {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    (center, lo * (1.0 - 1e-9))
}

fn estimate_table(reports: &[EstimateReport]) -> Table {
    let mut t = Table::new(&EstimateReport::csv_header());
    for r in reports {
        t.push(r.csv_record().to_vec());
    }
    t
}

/// Cylinders that do not fit the configured box are a configuration problem.
fn cylinder_fit<T>(r: kfp_core::Result<T>, suite: &str) -> Result<T, LabError> {
    r.map_err(|e| match e {
        KfpError::CylinderOutsideDomain => config_error(format!("{suite}: the domain does not contain the cylinders")),
        other => LabError::Core(other),
    })
}

fn verify(ctx: &mut Ctx) -> Result<(), LabError> {
    let cfg = ctx.cfg;
    if cfg.suites.contains(&Suite::Comparison) {
        let cases = comparison_suite(cfg.seed, cfg.cases)?;
        let mut t = Table::new(&["index", "symbol", "m", "delta", "sub_defect", "max_violation"]);
        for c in &cases {
            t.push(vec![
                c.index.to_string(),
                c.symbol.clone(),
                c.m.to_string(),
                num(c.delta),
                num(c.sub_defect),
                num(c.max_violation),
            ]);
        }
        ctx.csv("comparison.csv", &t)?;
        let worst = cases.iter().map(|c| c.max_violation).fold(f64::NEG_INFINITY, f64::max);
        ctx.summary.notes.push(format!("comparison: {} cases, worst max_violation {worst:e}", cases.len()));
    }
    let needs_solution = cfg.suites.iter().any(|s| *s != Suite::Comparison);
    if !needs_solution {
        return Ok(());
    }
    let grid = build_ladder_grid(cfg, 0)?;
    let p = build_problem(cfg, &grid)?;
    let (rep, q) = viscous_solve(ctx, &p, &grid)?;
    if !rep.converged {
        return Err(LabError::NotConverged("solve for the estimate suites".into()));
    }
    let u = rep.field;
    ctx.field("solution.kfp", &u)?;
    let (center, r0) = top_cylinder(cfg);
    let r1 = 0.5 * r0;
    let lambda = q.symbol.lambda();
    let mut reports = Vec::new();
    for suite in &cfg.suites {
        match suite {
            Suite::Comparison | Suite::Holder => {}
            Suite::Energy => reports.push(cylinder_fit(energy_ratio(&u, &center, r1, r0, lambda), "energy")?),
            Suite::Integrability => {
                let qexp = 2.0 + 0.5 / cfg.m as f64;
                reports.push(cylinder_fit(higher_integrability(&u, qexp, 0.2, &center, r1, r0), "integrability")?);
            }
            Suite::Boundedness => {
                reports.push(cylinder_fit(local_boundedness(&u, 2.0, &center, r1, r0), "boundedness")?);
            }
            Suite::Harnack => {
                reports.push(cylinder_fit(harnack_quotient(&u), "harnack")?);
                for &z in &cfg.zeta {
                    reports.push(cylinder_fit(weak_harnack_quotient(&u, z), "harnack")?);
                }
            }
            Suite::WNorm => {
                let ext = q.g.to_field(&grid)?;
                let gs = q.gstar.to_field(&grid)?;
                let lhs = w_norm(&u)?;
                let data = w_norm(&ext)? + dual_norm(&gs)?;
                reports.push(EstimateReport::new("w_bound", lhs, data, vec![("epsilon".into(), q.epsilon)]));
            }
        }
    }
    if !reports.is_empty() {
        ctx.csv("estimates.csv", &estimate_table(&reports))?;
    }
    if cfg.suites.contains(&Suite::Holder) {
        let region = PairRegion::cylinder(&grid, &KCylinder::new(center.clone(), r0)?, 2)?;
        let lo = 4.0 * pair_scale(&grid);
        let pairs = uniform_pairs(&grid, &region, HOLDER_PAIRS, lo, 0.5_f64.max(2.0 * lo), cfg.seed)?;
        let fit = holder_estimate(&u, &pairs)?;
        let mut t = Table::new(&["n_pairs", "alpha", "seminorm", "flag"]);
        t.push(vec![fit.n_pairs.to_string(), num(fit.alpha), num(fit.seminorm), fit.flag.unwrap_or_default()]);
        ctx.csv("holder.csv", &t)?;
    }
    Ok(())
}

fn fitted_orders(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    (0..h.len()).map(|k| (k > 0).then(|| (e[k - 1] / e[k]).ln() / (h[k - 1] / h[k]).ln())).collect()
}

fn study(ctx: &mut Ctx) -> Result<(), LabError> {
    let cfg = ctx.cfg;
    if cfg.g != DataSpec::Manufactured || cfg.gstar != DataSpec::Manufactured {
        return Err(config_error("study needs data.g = mms and data.gstar = mms"));
    }
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut rows = Vec::new();
    for k in 0..cfg.levels() {
        let grid = build_ladder_grid(cfg, k)?;
        let p = build_problem(cfg, &grid)?;
        let (u, iters, converged) = match cfg.method {
            Method::Viscous => {
                let rep = march_with(&p, &grid, &solver_options(cfg), None)?;
                let it = rep.total_iterations();
                (rep.field, it, rep.converged)
            }
            Method::Variational => {
                let opts = VariationalOptions {
                    tol: cfg.tol.max(1e-14),
                    max_outer: cfg.max_iter,
                    ..VariationalOptions::default()
                };
                let (pair, gap) = minimize_with(&p, &grid, &opts, None)?;
                (pair.u(), gap.iterations, gap.converged)
            }
        };
        if !converged {
            return Err(LabError::NotConverged(format!("study grid {k}")));
        }
        let exact = Field::from_fn(grid.clone(), manufactured_solution);
        let err = u.zip_with(&exact, |a, b| a - b)?.l2_norm();
        let h = grid.hx[0].max(grid.hy[0]);
        hs.push(h);
        errs.push(err);
        rows.push((cfg.resolution(k), h, p.epsilon, err, iters));
    }
    let orders = fitted_orders(&hs, &errs);
    let mut t = Table::new(&["nx", "ny", "nt", "h", "epsilon", "iterations", "l2_error", "order"]);
    for (((nx, ny, nt), h, eps, err, it), o) in rows.iter().zip(&orders) {
        t.push(vec![
            nx.to_string(),
            ny.to_string(),
            nt.to_string(),
            num(*h),
            num(*eps),
            it.to_string(),
            num(*err),
            o.map(num).unwrap_or_default(),
        ]);
    }
    ctx.csv("study.csv", &t)?;
    ctx.plot(
        "convergence.svg",
        &Plot {
            title: "manufactured solution".into(),
            x_label: "h".into(),
            y_label: "L2 error".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                name: "error".into(),
                points: hs.iter().cloned().zip(errs.iter().cloned()).collect(),
            }],
        },
    );
    Ok(())
}

fn class_row(t: &mut Table, name: &str, r: &ClassReport) {
    let class = match r.class_tested {
        SymbolClass::M => "M",
        SymbolClass::R => "R",
    };
    let failed: Vec<String> = r.failed_clauses().iter().map(|c| format!("{c:?}").to_lowercase()).collect();
    t.push(vec![
        name.to_string(),
        class.into(),
        num(r.lambda),
        num(r.worst_upper),
        num(r.worst_lower),
        num(r.worst_homogeneity),
        num(r.admissible_lambda()),
        r.pass.to_string(),
        failed.join(";"),
    ]);
}

fn classify(ctx: &mut Ctx) -> Result<(), LabError> {
    let cfg = ctx.cfg;
    let s = build_symbol(cfg)?;
    let mut t = Table::new(&[
        "symbol",
        "class",
        "lambda",
        "worst_upper",
        "worst_lower",
        "worst_homogeneity",
        "admissible_lambda",
        "pass",
        "failed",
    ]);
    let m_rep = check_m_class(&s, &m_class_samples(cfg.m, CLASS_SAMPLES, cfg.seed))?;
    class_row(&mut t, &s.name(), &m_rep);
    if s.declared_class() == SymbolClass::R {
        let r_rep = check_r_class(&s, &r_class_pairs(cfg.m, CLASS_SAMPLES, cfg.seed))?;
        class_row(&mut t, &s.name(), &r_rep);
    }
    ctx.csv("classify.csv", &t)?;
    Ok(())
}

fn kernel(ctx: &mut Ctx) -> Result<(), LabError> {
    let cfg = ctx.cfg;
    if cfg.t.0 <= 0.0 {
        return Err(config_error(format!("kernel needs t > 0 on the whole grid, got t from {}", cfg.t.0)));
    }
    let mut hs = Vec::new();
    let mut res = Vec::new();
    let mut rows = Vec::new();
    for k in 0..cfg.levels() {
        let grid = build_ladder_grid(cfg, k)?;
        let r = model_kernel_residual(&grid)?;
        let masses: Vec<f64> = (0..grid.nt).map(|it| kernel_mass(&grid, it)).collect::<kfp_core::Result<_>>()?;
        let (mlo, mhi) = masses.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let positive = (0..grid.node_count()).all(|i| model_kernel(&grid.point(i)) > 0.0);
        let h = grid.hx[0].max(grid.hy[0]).max(grid.ht);
        hs.push(h);
        res.push(r);
        rows.push((cfg.resolution(k), h, r, mlo, mhi, positive));
    }
    let orders = fitted_orders(&hs, &res);
    let mut t = Table::new(&["nx", "ny", "nt", "h", "residual", "order", "min_mass", "max_mass", "positive"]);
    for (((nx, ny, nt), h, r, lo, hi, pos), o) in rows.iter().zip(&orders) {
        t.push(vec![
            nx.to_string(),
            ny.to_string(),
            nt.to_string(),
            num(*h),
            num(*r),
            o.map(num).unwrap_or_default(),
            num(*lo),
            num(*hi),
            pos.to_string(),
        ]);
    }
    ctx.csv("kernel.csv", &t)?;
    ctx.plot(
        "kernel_residual.svg",
        &Plot {
            title: "model kernel residual".into(),
            x_label: "h".into(),
            y_label: "max residual".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                name: "residual".into(),
                points: hs.iter().cloned().zip(res.iter().cloned()).collect(),
            }],
        },
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn top_cylinder_fits() {
        let cfg = RunConfig::default();
        let (c, r) = top_cylinder(&cfg);
        assert!((r - 1.0).abs() < 1e-8 && c.t == 1.0);
        let cfg = parse_config("[domain]\nx = 0, 1\ny = -0.1, 0.1\nt = 0, 0.5\n").unwrap();
        let (c, r) = top_cylinder(&cfg);
        let g = build_grid(build_domain(&cfg).unwrap(), 9, 9, 5).unwrap();
        assert!(kfp_core::verify::cylinder_nodes(&g, &KCylinder::new(c, r).unwrap()).is_ok());
    }

    #[test]
    fn orders_of_halving() {
        let o = fitted_orders(&[0.2, 0.1, 0.05], &[4.0, 1.0, 0.25]);
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-12 && (o[2].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(config_error("x").exit_code(), EXIT_CONFIG);
        assert_eq!(LabError::Core(KfpError::NotConverged("x".into())).exit_code(), EXIT_NOT_CONVERGED);
        assert_eq!(LabError::Io("x".into()).exit_code(), EXIT_IO);
    }
}
