//! Nonlinear fluxes `A(xi, X, Y, t)`, sample-based checks of the structural
//! classes `M(Lambda)` and `R(Lambda)`, and the Fenchel representative
//! `A~(xi, eta) = phi(xi) + phi*(eta)` for symbols with a convex potential.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, KfpError, Result};
use crate::kolgeom::{euclid, KPoint};

/// Relative tolerance used by class checks unless the caller overrides it.
pub const CLASS_TOL: f64 = 1e-9;

/// Step for central finite-difference gradient checks of potentials.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    M,
    R,
}

type FluxFn = dyn Fn(&[f64], &KPoint, &mut [f64]) + Send + Sync;

#[derive(Clone)]
pub enum SymbolKind {
    Identity,
    /// Constant symmetric positive-definite matrix.
    Matrix {
        a: DMatrix<f64>,
        a_inv: DMatrix<f64>,
    },
    /// Scalar coefficient jumping between `low` and `high` on a space-time
    /// checkerboard of edge `cell`.
    Checkerboard {
        low: f64,
        high: f64,
        cell: f64,
    },
    /// `A(xi) = xi (1 + delta xi_1^2 / |xi|^2)`, odd and positively 1-homogeneous.
    Modulated {
        delta: f64,
    },
    Custom {
        name: String,
        f: Arc<FluxFn>,
    },
}

impl fmt::Debug for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Identity => write!(f, "Identity"),
            SymbolKind::Matrix { a, .. } => write!(f, "Matrix({:?})", a.as_slice()),
            SymbolKind::Checkerboard { low, high, cell } => {
                write!(f, "Checkerboard {{ low: {low}, high: {high}, cell: {cell} }}")
            }
            SymbolKind::Modulated { delta } => write!(f, "Modulated {{ delta: {delta} }}"),
            SymbolKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Symbol {
    m: usize,
    lambda: f64,
    declared: SymbolClass,
    kind: SymbolKind,
}

impl Symbol {
    fn build(m: usize, lambda: f64, declared: SymbolClass, kind: SymbolKind) -> Result<Self> {
        if m == 0 {
            return Err(KfpError::InvalidArgument("symbol dimension must be at least 1".into()));
        }
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(KfpError::InvalidArgument(format!("Lambda must be >= 1, got {lambda}")));
        }
        Ok(Self { m, lambda, declared, kind })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::build(m, 1.0, SymbolClass::R, SymbolKind::Identity)
    }

    /// Constant SPD matrix symbol; `Lambda = max(lambda_max, 1 / lambda_min)`.
    pub fn matrix(a: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m {
            return Err(KfpError::InvalidArgument("coefficient matrix must be square".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 * a.amax().max(1.0) {
            return Err(KfpError::InvalidArgument("coefficient matrix must be symmetric".into()));
        }
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let lo = eig.min();
        let hi = eig.max();
        if lo <= 0.0 {
            return Err(KfpError::InvalidArgument(format!(
                "coefficient matrix not positive definite (min eigenvalue {lo})"
            )));
        }
        let a_inv =
            a.clone().try_inverse().ok_or_else(|| KfpError::InvalidArgument("singular coefficient matrix".into()))?;
        Self::build(m, hi.max(1.0 / lo).max(1.0), SymbolClass::R, SymbolKind::Matrix { a, a_inv })
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    /// Checkerboard coefficient taking the values `1/Lambda` and `Lambda`.
    pub fn checkerboard(m: usize, lambda: f64, cell: f64) -> Result<Self> {
        if !(cell > 0.0) {
            return Err(KfpError::InvalidArgument("checkerboard cell must be positive".into()));
        }
        Self::build(m, lambda, SymbolClass::R, SymbolKind::Checkerboard { low: 1.0 / lambda, high: lambda, cell })
    }

    /// Direction-modulated symbol. `lambda` is the declared class constant;
    /// use [`MODULATED_LAMBDA`] for `delta = 0.25`.
    pub fn modulated(m: usize, delta: f64, lambda: f64) -> Result<Self> {
        if !(delta > -1.0) {
            return Err(KfpError::InvalidArgument("modulation delta must exceed -1".into()));
        }
        Self::build(m, lambda, SymbolClass::R, SymbolKind::Modulated { delta })
    }

    pub fn custom<F>(name: &str, m: usize, lambda: f64, declared: SymbolClass, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &KPoint, &mut [f64]) + Send + Sync + 'static,
    {
        Self::build(m, lambda, declared, SymbolKind::Custom { name: name.to_string(), f: Arc::new(f) })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn declared_class(&self) -> SymbolClass {
        self.declared
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0) {
            return Err(KfpError::InvalidArgument(format!("Lambda must be >= 1, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn name(&self) -> String {
        match &self.kind {
            SymbolKind::Identity => "identity".into(),
            SymbolKind::Matrix { .. } => "spd".into(),
            SymbolKind::Checkerboard { .. } => "checkerboard".into(),
            SymbolKind::Modulated { .. } => "modulated".into(),
            SymbolKind::Custom { name, .. } => name.clone(),
        }
    }

    fn checker_value(low: f64, high: f64, cell: f64, at: &KPoint) -> f64 {
        let parity: i64 =
            at.x.iter().chain(at.y.iter()).chain(std::iter::once(&at.t)).map(|c| (c / cell).floor() as i64).sum();
        if parity.rem_euclid(2) == 0 {
            high
        } else {
            low
        }
    }

    /// Coefficient matrix of a linear symbol at `at`; `None` for nonlinear ones.
    pub fn coefficient(&self, at: &KPoint) -> Option<DMatrix<f64>> {
        match &self.kind {
            SymbolKind::Identity => Some(DMatrix::identity(self.m, self.m)),
            SymbolKind::Matrix { a, .. } => Some(a.clone()),
            SymbolKind::Checkerboard { low, high, cell } => {
                Some(DMatrix::identity(self.m, self.m) * Self::checker_value(*low, *high, *cell, at))
            }
            _ => None,
        }
    }

    fn coefficient_inverse(&self, at: &KPoint) -> Option<DMatrix<f64>> {
        match &self.kind {
            SymbolKind::Identity => Some(DMatrix::identity(self.m, self.m)),
            SymbolKind::Matrix { a_inv, .. } => Some(a_inv.clone()),
            SymbolKind::Checkerboard { low, high, cell } => {
                Some(DMatrix::identity(self.m, self.m) / Self::checker_value(*low, *high, *cell, at))
            }
            _ => None,
        }
    }

    /// Scalar stiffness for linear preconditioners: exact for scalar linear
    /// symbols, the midpoint of the secant range otherwise.
    pub fn reference_stiffness(&self) -> f64 {
        match &self.kind {
            SymbolKind::Identity => 1.0,
            SymbolKind::Modulated { delta } => 1.0 + 0.5 * delta,
            _ => 0.5 * (self.lambda + 1.0 / self.lambda),
        }
    }

    pub fn eval_into(&self, xi: &[f64], at: &KPoint, out: &mut [f64]) {
        match &self.kind {
            SymbolKind::Identity => out.copy_from_slice(xi),
            SymbolKind::Matrix { a, .. } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..self.m).map(|j| a[(i, j)] * xi[j]).sum();
                }
            }
            SymbolKind::Checkerboard { low, high, cell } => {
                let c = Self::checker_value(*low, *high, *cell, at);
                for (o, v) in out.iter_mut().zip(xi) {
                    *o = c * v;
                }
            }
            SymbolKind::Modulated { delta } => {
                let n2: f64 = xi.iter().map(|v| v * v).sum();
                if n2 == 0.0 {
                    out.iter_mut().for_each(|o| *o = 0.0);
                } else {
                    let s = 1.0 + delta * xi[0] * xi[0] / n2;
                    for (o, v) in out.iter_mut().zip(xi) {
                        *o = s * v;
                    }
                }
            }
            SymbolKind::Custom { f, .. } => f(xi, at, out),
        }
    }

    /// `A(xi, X, Y, t)`; rejects mismatched lengths and non-finite output.
    pub fn eval(&self, xi: &[f64], at: &KPoint) -> Result<Vec<f64>> {
        check_dim(self.m, xi.len())?;
        check_dim(self.m, at.dim())?;
        let mut out = vec![0.0; self.m];
        self.eval_into(xi, at, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(KfpError::NonFinite(format!("symbol {} produced {:?}", self.name(), out)));
        }
        Ok(out)
    }

    /// Convex potential `(phi, phi*)`, available for the linear built-ins.
    pub fn potential(&self) -> Option<Potential<'_>> {
        match &self.kind {
            SymbolKind::Identity | SymbolKind::Matrix { .. } | SymbolKind::Checkerboard { .. } => {
                Some(Potential { symbol: self })
            }
            _ => None,
        }
    }
}

/// Quadratic potential `phi(xi) = xi.M xi / 2` and its conjugate
/// `phi*(eta) = eta.M^{-1} eta / 2` of a linear symbol.
#[derive(Debug, Clone, Copy)]
pub struct Potential<'a> {
    symbol: &'a Symbol,
}

fn quad_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += v[i] * m[(i, j)] * v[j];
        }
    }
    0.5 * s
}

impl Potential<'_> {
    pub fn phi(&self, xi: &[f64], at: &KPoint) -> f64 {
        quad_form(&self.symbol.coefficient(at).expect("linear symbol"), xi)
    }

    pub fn phi_star(&self, eta: &[f64], at: &KPoint) -> f64 {
        quad_form(&self.symbol.coefficient_inverse(at).expect("linear symbol"), eta)
    }
}

/// Which defining inequality of a class failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// (i): growth `|A| <= Lambda |xi|` or Lipschitz bound.
    Upper,
    /// (ii): coercivity or strong monotonicity.
    Lower,
    /// (iii): `A(l xi) = l A(xi)`.
    Homogeneity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class_tested: SymbolClass,
    pub lambda: f64,
    pub tol: f64,
    pub worst_upper: f64,
    pub worst_lower: f64,
    pub worst_homogeneity: f64,
    pub pass: bool,
}

impl ClassReport {
    fn finish(class_tested: SymbolClass, lambda: f64, tol: f64, upper: f64, lower: f64, homog: f64) -> Self {
        let mut r = Self {
            class_tested,
            lambda,
            tol,
            worst_upper: upper,
            worst_lower: lower,
            worst_homogeneity: homog,
            pass: false,
        };
        r.pass = r.failed_clauses().is_empty();
        r
    }

    pub fn failed_clauses(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        if !(self.worst_upper <= self.lambda * (1.0 + self.tol)) {
            out.push(Clause::Upper);
        }
        if !(self.worst_lower >= (1.0 - self.tol) / self.lambda) {
            out.push(Clause::Lower);
        }
        if !(self.worst_homogeneity <= self.tol) {
            out.push(Clause::Homogeneity);
        }
        out
    }

    /// Smallest `Lambda` the measured quotients admit (ignoring homogeneity).
    pub fn admissible_lambda(&self) -> f64 {
        self.worst_upper.max(1.0 / self.worst_lower).max(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct MSample {
    pub xi: Vec<f64>,
    pub at: KPoint,
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct RSample {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub at: KPoint,
}

const HOMOGENEITY_SCALES: [f64; 6] = [-3.0, -1.0, -0.5, 0.25, 2.0, 7.0];

fn homogeneity_defect(s: &Symbol, xi: &[f64], lam: f64, at: &KPoint, a: &[f64], buf: &mut Vec<f64>) -> f64 {
    let scaled: Vec<f64> = xi.iter().map(|v| lam * v).collect();
    buf.resize(s.m, 0.0);
    s.eval_into(&scaled, at, buf);
    let diff: f64 = buf.iter().zip(a).map(|(b, a)| (b - lam * a).powi(2)).sum::<f64>().sqrt();
    diff / (lam.abs() * euclid(xi))
}

pub fn check_m_class(s: &Symbol, samples: &[MSample]) -> Result<ClassReport> {
    check_m_class_tol(s, samples, CLASS_TOL)
}

pub fn check_m_class_tol(s: &Symbol, samples: &[MSample], tol: f64) -> Result<ClassReport> {
    if samples.is_empty() {
        return Err(KfpError::EmptySamples);
    }
    let (mut upper, mut lower, mut homog) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut buf = Vec::new();
    for (i, smp) in samples.iter().enumerate() {
        let n = euclid(&smp.xi);
        if n == 0.0 || smp.scale == 0.0 {
            return Err(KfpError::InvalidArgument(format!("sample {i}: xi and the scale factor must be nonzero")));
        }
        let a = s.eval(&smp.xi, &smp.at)?;
        upper = upper.max(euclid(&a) / n);
        lower = lower.min(a.iter().zip(&smp.xi).map(|(a, x)| a * x).sum::<f64>() / (n * n));
        homog = homog.max(homogeneity_defect(s, &smp.xi, smp.scale, &smp.at, &a, &mut buf));
    }
    Ok(ClassReport::finish(SymbolClass::M, s.lambda, tol, upper, lower, homog))
}

pub fn check_r_class(s: &Symbol, pairs: &[RSample]) -> Result<ClassReport> {
    check_r_class_tol(s, pairs, CLASS_TOL)
}

pub fn check_r_class_tol(s: &Symbol, pairs: &[RSample], tol: f64) -> Result<ClassReport> {
    if pairs.is_empty() {
        return Err(KfpError::EmptySamples);
    }
    let (mut upper, mut lower, mut homog) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut buf = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let d: Vec<f64> = p.xi1.iter().zip(&p.xi2).map(|(a, b)| a - b).collect();
        let dn = euclid(&d);
        if dn == 0.0 {
            return Err(KfpError::CoincidentPair(i));
        }
        let a1 = s.eval(&p.xi1, &p.at)?;
        let a2 = s.eval(&p.xi2, &p.at)?;
        let da: Vec<f64> = a1.iter().zip(&a2).map(|(a, b)| a - b).collect();
        upper = upper.max(euclid(&da) / dn);
        lower = lower.min(da.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / (dn * dn));
        if euclid(&p.xi1) > 0.0 {
            for lam in HOMOGENEITY_SCALES {
                homog = homog.max(homogeneity_defect(s, &p.xi1, lam, &p.at, &a1, &mut buf));
            }
        }
    }
    Ok(ClassReport::finish(SymbolClass::R, s.lambda, tol, upper, lower, homog))
}

fn unit_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = euclid(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> KPoint {
    let x = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let y = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    KPoint { x, y, t: rng.gen_range(-2.0..2.0) }
}

/// Random directions on the unit sphere with log-uniform magnitudes, crossed
/// with a fixed grid of scale factors, plus the coordinate axes.
pub fn m_class_samples(m: usize, n: usize, seed: u64) -> Vec<MSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 2 * m);
    for k in 0..m {
        for sign in [1.0, -1.0] {
            let mut xi = vec![0.0; m];
            xi[k] = sign;
            out.push(MSample { xi, at: KPoint::origin(m), scale: 2.0 });
        }
    }
    for i in 0..n {
        let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
        let xi = unit_vector(&mut rng, m).into_iter().map(|v| v * mag).collect();
        let scale = HOMOGENEITY_SCALES[i % HOMOGENEITY_SCALES.len()];
        out.push(MSample { xi, at: random_point(&mut rng, m), scale });
    }
    out
}

/// Random pairs with independent log-uniform magnitudes, plus antipodal and
/// orthogonal axis pairs.
pub fn r_class_pairs(m: usize, n: usize, seed: u64) -> Vec<RSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + m);
    for k in 0..m {
        let mut a = vec![0.0; m];
        a[k] = 1.0;
        let b: Vec<f64> = a.iter().map(|v| -v).collect();
        out.push(RSample { xi1: a, xi2: b, at: KPoint::origin(m) });
    }
    while out.len() < n + m {
        let m1 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let m2 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let xi1: Vec<f64> = unit_vector(&mut rng, m).into_iter().map(|v| v * m1).collect();
        let xi2: Vec<f64> = unit_vector(&mut rng, m).into_iter().map(|v| v * m2).collect();
        if xi1.iter().zip(&xi2).any(|(a, b)| a != b) {
            out.push(RSample { xi1, xi2, at: random_point(&mut rng, m) });
        }
    }
    out
}

/// Declared class constant of the direction-modulated symbol with
/// `delta = 0.25`; dense sampling measures a Lipschitz quotient of about 1.305
/// and a monotonicity quotient of about 0.948.
pub const MODULATED_LAMBDA: f64 = 1.35;

/// Variational representative `A~(xi, eta) = phi(xi) + phi*(eta)`.
#[derive(Debug, Clone)]
pub struct TildeA {
    symbol: Arc<Symbol>,
    pub gamma: f64,
}

impl TildeA {
    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64], at: &KPoint) -> f64 {
        let p = self.symbol.potential().expect("TildeA built from a symbol with potential");
        p.phi(xi, at) + p.phi_star(eta, at)
    }

    /// Fenchel defect `A~(xi, eta) - xi.eta`, evaluated without cancellation as
    /// `(xi - M^{-1} eta).M (xi - M^{-1} eta) / 2`.
    pub fn defect(&self, xi: &[f64], eta: &[f64], at: &KPoint) -> f64 {
        let a_inv = self.symbol.coefficient_inverse(at).expect("linear symbol");
        let a = self.symbol.coefficient(at).expect("linear symbol");
        let m = xi.len();
        let r: Vec<f64> = (0..m).map(|i| xi[i] - (0..m).map(|j| a_inv[(i, j)] * eta[j]).sum::<f64>()).collect();
        quad_form(&a, &r)
    }

    /// `(M, M^{-1})` at a point: `A~` is quadratic for every built-in potential.
    pub fn quadratic(&self, at: &KPoint) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            self.symbol.coefficient(at).expect("linear symbol"),
            self.symbol.coefficient_inverse(at).expect("linear symbol"),
        )
    }

    /// `argmin_eta A~(xi, eta) - xi.eta + rho/2 |eta - c|^2`, closed form
    /// `(M^{-1} + rho I) eta = xi + rho c`.
    pub fn flux_prox(&self, xi: &[f64], c: &[f64], rho: f64, at: &KPoint) -> Vec<f64> {
        let m = xi.len();
        let (_, a_inv) = self.quadratic(at);
        let lhs = a_inv + DMatrix::identity(m, m) * rho;
        let rhs = nalgebra::DVector::from_iterator(m, xi.iter().zip(c).map(|(x, c)| x + rho * c));
        let sol = lhs.cholesky().expect("SPD prox system").solve(&rhs);
        sol.iter().copied().collect()
    }
}

/// Builds `A~` for symbols with a convex potential and checks Fenchel-Young
/// and its equality branch on a fixed sweep.
pub fn make_tilde_a(s: Arc<Symbol>) -> Result<TildeA> {
    if s.potential().is_none() {
        return Err(KfpError::Unsupported(format!(
            "symbol '{}' has no convex potential; the variational representative is only built for gradient-type symbols",
            s.name()
        )));
    }
    let ta = TildeA { gamma: 2.0 * s.lambda() + 1.0, symbol: s };
    let m = ta.symbol.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a11);
    for _ in 0..256 {
        let at = random_point(&mut rng, m);
        let xi: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let eta: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let dot: f64 = xi.iter().zip(&eta).map(|(a, b)| a * b).sum();
        let scale = 1.0 + xi.iter().chain(&eta).map(|v| v * v).sum::<f64>();
        if ta.eval(&xi, &eta, &at) - dot < -1e-10 * scale {
            return Err(KfpError::Unsupported("potential violates Fenchel-Young".into()));
        }
        let a = ta.symbol.eval(&xi, &at)?;
        let xa: f64 = xi.iter().zip(&a).map(|(x, a)| x * a).sum();
        if (ta.eval(&xi, &a, &at) - xa).abs() > 1e-8 * scale {
            return Err(KfpError::Unsupported("potential conjugate does not match the flux".into()));
        }
    }
    Ok(ta)
}

/// Largest relative error between a central-difference gradient of `phi` and
/// the flux over `n` random points.
pub fn potential_gradient_error(s: &Symbol, n: usize, seed: u64) -> Result<f64> {
    let pot = s.potential().ok_or_else(|| KfpError::Unsupported(format!("symbol '{}' has no potential", s.name())))?;
    let m = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let at = random_point(&mut rng, m);
        let xi: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = s.eval(&xi, &at)?;
        let mut fd = vec![0.0; m];
        for k in 0..m {
            let mut p = xi.clone();
            let mut q = xi.clone();
            p[k] += FD_STEP;
            q[k] -= FD_STEP;
            fd[k] = (pot.phi(&p, &at) - pot.phi(&q, &at)) / (2.0 * FD_STEP);
        }
        let err: f64 = fd.iter().zip(&a).map(|(f, a)| (f - a).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(err / euclid(&a).max(1e-12));
    }
    Ok(worst)
}
