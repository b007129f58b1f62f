use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KfpError, Result};
use crate::kolgeom::{compose, hom_norm, quasi_distance, KCylinder, KPoint};
use crate::mesh::{Field, Grid};

const MIN_PAIRS: usize = 10;
const BINS: usize = 24;

/// Length unit for pair distances: the largest `X` spacing. Pairs closer than
/// twice this are not resolved.
pub fn pair_scale(grid: &Grid) -> f64 {
    grid.hx.iter().cloned().fold(0.0, f64::max)
}

/// Nodes from which pair endpoints are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRegion {
    pub nodes: Vec<usize>,
}

impl PairRegion {
    pub fn all(grid: &Grid) -> Self {
        Self { nodes: (0..grid.node_count()).collect() }
    }

    /// Nodes in the closed cylinder that keep `margin` cells away from the
    /// `Y` faces of the grid.
    pub fn cylinder(grid: &Grid, cyl: &KCylinder, margin: usize) -> Result<Self> {
        let mut nodes = Vec::new();
        for i in 0..grid.node_count() {
            let n = grid.unravel(i);
            if n.iy.iter().any(|&j| j < margin || j + margin >= grid.ny) {
                continue;
            }
            let rel = crate::kolgeom::relative(&grid.point(i), &cyl.center)?;
            let r = cyl.radius * (1.0 + 1e-12);
            if rel.t <= 0.0
                && rel.t >= -r * r
                && crate::kolgeom::euclid(&rel.x) <= r
                && crate::kolgeom::euclid(&rel.y) <= r * r * r
            {
                nodes.push(i);
            }
        }
        if nodes.is_empty() {
            return Err(KfpError::EmptyRegion);
        }
        Ok(Self { nodes })
    }

    fn contains(&self, i: usize) -> bool {
        self.nodes.binary_search(&i).is_ok()
    }
}

fn nearest_node(grid: &Grid, q: &KPoint) -> usize {
    let snap = |v: f64, a: f64, h: f64, n: usize| ((v - a) / h).round().clamp(0.0, (n - 1) as f64) as usize;
    let d = &grid.domain;
    let ix: Vec<usize> = (0..grid.m()).map(|k| snap(q.x[k], d.x[k].0, grid.hx[k], grid.nx)).collect();
    let iy: Vec<usize> = (0..grid.m()).map(|k| snap(q.y[k], d.y[k].0, grid.hy[k], grid.ny)).collect();
    grid.ravel(snap(q.t, d.t.0, grid.ht, grid.nt), &iy, &ix)
}

/// A point at quasi-distance `d` from `p`. The shares of `d` carried by the
/// `X`, `Y` and `t` parts are uniform on the simplex, and directions within
/// each part are uniform.
fn displaced(rng: &mut ChaCha8Rng, p: &KPoint, d: f64) -> Result<KPoint> {
    let m = p.dim();
    let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
    let (lo, hi) = (u1.min(u2), u1.max(u2));
    let (a, b, c) = (lo, hi - lo, 1.0 - hi);
    let mut unit = |len: f64| {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = crate::kolgeom::euclid(&v);
        if n == 0.0 {
            vec![0.0; m]
        } else {
            v.iter().map(|x| x * len / n).collect()
        }
    };
    let x = unit(d * a);
    let y = unit((d * b).powi(3));
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let z = KPoint::new(x, y, sign * (d * c).powi(2))?;
    debug_assert!((hom_norm(&z) - d).abs() <= 1e-12 * d.max(1.0));
    compose(p, &z)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn check_range(d_min: f64, d_max: f64) -> Result<()> {
    if !(d_min > 0.0 && d_max > d_min) {
        return Err(KfpError::InvalidArgument(format!(
            "distance range must satisfy 0 < d_min < d_max, got [{d_min}, {d_max}]"
        )));
    }
    Ok(())
}

/// `n` pairs of distinct region nodes with both endpoints drawn at random and
/// target distances log-uniform in `[d_min, d_max]`.
pub fn uniform_pairs(
    grid: &Grid,
    region: &PairRegion,
    n: usize,
    d_min: f64,
    d_max: f64,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    check_range(d_min, d_max)?;
    if region.nodes.is_empty() {
        return Err(KfpError::EmptyRegion);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n && attempts < 50 * n.max(1) {
        attempts += 1;
        let a = region.nodes[rng.gen_range(0..region.nodes.len())];
        let d = log_uniform(&mut rng, d_min, d_max);
        let b = nearest_node(grid, &displaced(&mut rng, &grid.point(a), d)?);
        if b != a && region.contains(b) {
            out.push((a, b));
        }
    }
    Ok(out)
}

/// `n` pairs `(anchor, b)` with `b` drawn at log-uniform distance from the
/// node nearest to `anchor`.
pub fn anchored_pairs(
    grid: &Grid,
    region: &PairRegion,
    anchor: &KPoint,
    n: usize,
    d_min: f64,
    d_max: f64,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    check_range(d_min, d_max)?;
    let a = nearest_node(grid, anchor);
    let pa = grid.point(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n && attempts < 50 * n.max(1) {
        attempts += 1;
        let d = log_uniform(&mut rng, d_min, d_max);
        let b = nearest_node(grid, &displaced(&mut rng, &pa, d)?);
        if b != a && region.contains(b) {
            out.push((b, a));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderFit {
    pub alpha: f64,
    pub seminorm: f64,
    pub n_pairs: usize,
    pub flag: Option<String>,
}

/// Fits `|u(p) - u(q)| ~ d(p, q)^alpha` through the sampled modulus of
/// continuity `w(d) = max { |du| : pairs at distance <= d }`: pairs are binned
/// by `log d` and `log w` is regressed on `log d` at the last point of each
/// bin where `w` increases. The seminorm is
/// `max |du| / d^alpha` over all admissible pairs. Pairs closer than twice
/// `pair_scale` are dropped.
pub fn holder_estimate(u: &Field, pairs: &[(usize, usize)]) -> Result<HolderFit> {
    let g = &u.grid;
    let cutoff = 2.0 * pair_scale(g);
    let mut samples = Vec::with_capacity(pairs.len());
    for (k, &(a, b)) in pairs.iter().enumerate() {
        if a == b {
            return Err(KfpError::CoincidentPair(k));
        }
        let d = quasi_distance(&g.point(a), &g.point(b))?;
        if d == 0.0 {
            return Err(KfpError::CoincidentPair(k));
        }
        if d >= cutoff {
            samples.push((d, (u.values[a] - u.values[b]).abs()));
        }
    }
    if samples.len() < MIN_PAIRS {
        return Err(KfpError::TooFewPairs(samples.len()));
    }
    let n_pairs = samples.len();
    let (lo, hi) = samples.iter().fold((f64::INFINITY, 0.0f64), |(l, h), s| (l.min(s.0), h.max(s.0)));
    let width = (hi.ln() - lo.ln()).max(f64::MIN_POSITIVE);
    // modulus of continuity: running max of |du| over pairs no farther apart
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut last: Vec<Option<(f64, f64)>> = vec![None; BINS];
    let mut run = 0.0f64;
    for &(d, du) in &samples {
        if du > run {
            run = du;
            let b = (((d.ln() - lo.ln()) / width * BINS as f64) as usize).min(BINS - 1);
            last[b] = Some((d, run));
        }
    }
    let env: Vec<(f64, f64)> =
        last.into_iter().flatten().filter(|e| e.1 > 0.0).map(|(d, w)| (d.ln(), w.ln())).collect();
    if env.len() < 2 {
        return Ok(HolderFit {
            alpha: f64::NAN,
            seminorm: 0.0,
            n_pairs,
            flag: Some("increments vanish; exponent undefined".into()),
        });
    }
    let k = env.len() as f64;
    let mx = env.iter().map(|e| e.0).sum::<f64>() / k;
    let my = env.iter().map(|e| e.1).sum::<f64>() / k;
    let sxx: f64 = env.iter().map(|e| (e.0 - mx).powi(2)).sum();
    let sxy: f64 = env.iter().map(|e| (e.0 - mx) * (e.1 - my)).sum();
    if sxx <= 0.0 {
        return Ok(HolderFit {
            alpha: f64::NAN,
            seminorm: 0.0,
            n_pairs,
            flag: Some("pair distances do not spread".into()),
        });
    }
    let alpha = sxy / sxx;
    let seminorm = samples.iter().map(|&(d, du)| du / d.powf(alpha)).fold(0.0, f64::max);
    let flag = if alpha > 0.0 && alpha <= 1.0 { None } else { Some(format!("fitted exponent {alpha} outside (0, 1]")) };
    Ok(HolderFit { alpha, seminorm, n_pairs, flag })
}
