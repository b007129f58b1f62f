//! Structured space-time grids over boxes `U_X x U_Y x (t0, t1)`.
//!
//! Node values are stored with index order `(it, iY_1..iY_m, iX_1..iX_m)`,
//! row-major, so `iX_m` varies fastest and `it` slowest.

mod banded;
mod boundary;
pub(crate) mod ops;
mod poisson;
mod quadrature;
mod snapshot;

use std::sync::Arc;

use crate::error::{check_dim, KfpError, Result};
use crate::kolgeom::KPoint;

pub use banded::BandedMatrix;
pub use boundary::{classify_boundary, BoundaryClass, NodeTag};
pub use ops::{d_x_line, div_x, grad_x, laplace_y, transport};
pub use poisson::{hminus1_norm, hminus1_norm_field_slice, XPoisson};
pub use quadrature::{integrate, integrate_nodes, node_weight, pairwise_sum, section_weight, weights, y_weight};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC};

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub x: Vec<(f64, f64)>,
    pub y: Vec<(f64, f64)>,
    pub t: (f64, f64),
}

impl BoxDomain {
    pub fn new(x: Vec<(f64, f64)>, y: Vec<(f64, f64)>, t: (f64, f64)) -> Result<Self> {
        if x.is_empty() {
            return Err(KfpError::DegenerateDomain("dimension m must be at least 1".into()));
        }
        check_dim(x.len(), y.len())?;
        for (name, (a, b)) in
            x.iter().map(|i| ("X", i)).chain(y.iter().map(|i| ("Y", i))).chain(std::iter::once(("t", &t)))
        {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(KfpError::DegenerateDomain(format!("{name} interval [{a}, {b}]")));
            }
        }
        Ok(Self { x, y, t })
    }

    /// The same interval in every `X` and `Y` coordinate.
    pub fn cube(m: usize, x: (f64, f64), y: (f64, f64), t: (f64, f64)) -> Result<Self> {
        Self::new(vec![x; m], vec![y; m], t)
    }

    pub fn unit(m: usize) -> Self {
        Self::cube(m, (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)).expect("unit box")
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn volume(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|(a, b)| b - a).product::<f64>() * (self.t.1 - self.t.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub domain: BoxDomain,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    pub ht: f64,
}

pub fn build_grid(domain: BoxDomain, nx: usize, ny: usize, nt: usize) -> Result<Arc<Grid>> {
    Grid::new(domain, nx, ny, nt).map(Arc::new)
}

impl Grid {
    pub fn new(domain: BoxDomain, nx: usize, ny: usize, nt: usize) -> Result<Self> {
        if nx < 3 || ny < 3 || nt < 2 {
            return Err(KfpError::InvalidArgument(format!(
                "grid resolution (nx={nx}, ny={ny}, nt={nt}) below minimum (3, 3, 2)"
            )));
        }
        let domain = BoxDomain::new(domain.x, domain.y, domain.t)?;
        let hx = domain.x.iter().map(|(a, b)| (b - a) / (nx - 1) as f64).collect();
        let hy = domain.y.iter().map(|(a, b)| (b - a) / (ny - 1) as f64).collect();
        let ht = (domain.t.1 - domain.t.0) / (nt - 1) as f64;
        Ok(Self { domain, nx, ny, nt, hx, hy, ht })
    }

    pub fn m(&self) -> usize {
        self.domain.dim()
    }

    /// Nodes in one `X` slice (fixed `Y`, `t`).
    pub fn x_len(&self) -> usize {
        self.nx.pow(self.m() as u32)
    }

    /// Nodes in one time level.
    pub fn level_len(&self) -> usize {
        self.x_len() * self.ny.pow(self.m() as u32)
    }

    pub fn node_count(&self) -> usize {
        self.level_len() * self.nt
    }

    pub fn x_stride(&self, k: usize) -> usize {
        self.nx.pow((self.m() - 1 - k) as u32)
    }

    pub fn y_stride(&self, k: usize) -> usize {
        self.x_len() * self.ny.pow((self.m() - 1 - k) as u32)
    }

    pub fn t_stride(&self) -> usize {
        self.level_len()
    }

    pub fn x_coord(&self, k: usize, i: usize) -> f64 {
        self.domain.x[k].0 + i as f64 * self.hx[k]
    }

    pub fn y_coord(&self, k: usize, i: usize) -> f64 {
        self.domain.y[k].0 + i as f64 * self.hy[k]
    }

    pub fn t_coord(&self, i: usize) -> f64 {
        self.domain.t.0 + i as f64 * self.ht
    }

    /// `(it, iY, iX)` of a linear node index.
    pub fn unravel(&self, idx: usize) -> NodeIndex {
        let m = self.m();
        let it = idx / self.t_stride();
        let mut rest = idx % self.t_stride();
        let mut iy = vec![0; m];
        let mut ix = vec![0; m];
        for (k, v) in iy.iter_mut().enumerate() {
            *v = rest / self.y_stride(k);
            rest %= self.y_stride(k);
        }
        for (k, v) in ix.iter_mut().enumerate() {
            *v = rest / self.x_stride(k);
            rest %= self.x_stride(k);
        }
        NodeIndex { it, iy, ix }
    }

    pub fn ravel(&self, it: usize, iy: &[usize], ix: &[usize]) -> usize {
        let mut idx = it * self.t_stride();
        for k in 0..self.m() {
            idx += iy[k] * self.y_stride(k) + ix[k] * self.x_stride(k);
        }
        idx
    }

    pub fn point(&self, idx: usize) -> KPoint {
        let n = self.unravel(idx);
        self.point_of(&n)
    }

    pub fn point_of(&self, n: &NodeIndex) -> KPoint {
        KPoint {
            x: n.ix.iter().enumerate().map(|(k, &i)| self.x_coord(k, i)).collect(),
            y: n.iy.iter().enumerate().map(|(k, &i)| self.y_coord(k, i)).collect(),
            t: self.t_coord(n.it),
        }
    }

    /// All node coordinates, in storage order.
    pub fn points(&self) -> Vec<KPoint> {
        (0..self.node_count()).map(|i| self.point(i)).collect()
    }

    pub fn is_x_boundary(&self, n: &NodeIndex) -> bool {
        n.ix.iter().any(|&i| i == 0 || i == self.nx - 1)
    }

    pub fn is_y_boundary(&self, n: &NodeIndex) -> bool {
        n.iy.iter().any(|&i| i == 0 || i == self.ny - 1)
    }

    /// Largest spacing measured in the homogeneous scaling:
    /// `max(hX, hY^{1/3}, ht^{1/2})`.
    pub fn quasi_scale(&self) -> f64 {
        let hx = self.hx.iter().cloned().fold(0.0, f64::max);
        let hy = self.hy.iter().cloned().fold(0.0, f64::max);
        hx.max(hy.cbrt()).max(self.ht.sqrt())
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self == other
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeIndex {
    pub it: usize,
    pub iy: Vec<usize>,
    pub ix: Vec<usize>,
}

/// One real value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.node_count();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.node_count();
        Self { grid, values: vec![c; n] }
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        check_dim(grid.node_count(), values.len())?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&KPoint) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.grid.same_shape(&other.grid) {
            return Err(KfpError::InvalidArgument("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Values of the `X` slice at time level `it` and `Y` multi-index `iy`.
    pub fn x_slice(&self, it: usize, iy: &[usize]) -> &[f64] {
        let zero = vec![0; self.grid.m()];
        let start = self.grid.ravel(it, iy, &zero);
        &self.values[start..start + self.grid.x_len()]
    }

    pub fn level(&self, it: usize) -> &[f64] {
        let n = self.grid.level_len();
        &self.values[it * n..(it + 1) * n]
    }

    pub fn level_mut(&mut self, it: usize) -> &mut [f64] {
        let n = self.grid.level_len();
        &mut self.values[it * n..(it + 1) * n]
    }

    /// Trapezoid-weighted `L^2` norm over the whole grid.
    pub fn l2_norm(&self) -> f64 {
        let w = weights(&self.grid);
        pairwise_sum(&self.values.iter().zip(&w).map(|(v, w)| w * v * v).collect::<Vec<_>>()).sqrt()
    }
}

/// `m` reals per node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.node_count() * grid.m();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&KPoint) -> Vec<f64>) -> Self {
        let m = grid.m();
        let mut values = Vec::with_capacity(grid.node_count() * m);
        for i in 0..grid.node_count() {
            let v = f(&grid.point(i));
            assert_eq!(v.len(), m);
            values.extend(v);
        }
        Self { grid, values }
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let m = self.grid.m();
        &self.values[node * m..(node + 1) * m]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        let m = self.grid.m();
        &mut self.values[node * m..(node + 1) * m]
    }

    pub fn component(&self, k: usize) -> Field {
        let m = self.grid.m();
        Field { grid: self.grid.clone(), values: self.values.iter().skip(k).step_by(m).copied().collect() }
    }

    pub fn l2_norm(&self) -> f64 {
        let m = self.grid.m();
        let w = weights(&self.grid);
        let terms: Vec<f64> = (0..self.grid.node_count())
            .map(|i| w[i] * self.values[i * m..(i + 1) * m].iter().map(|v| v * v).sum::<f64>())
            .collect();
        pairwise_sum(&terms).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_grid() {
        let g = Grid::new(BoxDomain::unit(1), 3, 3, 3).unwrap();
        assert_eq!(g.node_count(), 27);
        assert_eq!((g.hx[0], g.hy[0], g.ht), (0.5, 0.5, 0.5));
        let p = g.point(0);
        assert_eq!(p, KPoint::scalar(0.0, 0.0, 0.0));
    }

    #[test]
    fn refining_x_leaves_y_and_t() {
        let a = Grid::new(BoxDomain::unit(1), 5, 5, 5).unwrap();
        let b = Grid::new(BoxDomain::unit(1), 9, 5, 5).unwrap();
        assert_eq!(b.hx[0], a.hx[0] / 2.0);
        assert_eq!((a.hy.clone(), a.ht), (b.hy.clone(), b.ht));
    }

    #[test]
    fn first_node_is_domain_corner() {
        let d = BoxDomain::cube(2, (-1.0, 2.0), (3.0, 4.0), (0.5, 1.0)).unwrap();
        let g = Grid::new(d, 4, 3, 2).unwrap();
        assert_eq!(g.point(0), KPoint::new(vec![-1.0, -1.0], vec![3.0, 3.0], 0.5).unwrap());
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(BoxDomain::cube(1, (1.0, 1.0), (0.0, 1.0), (0.0, 1.0)).is_err());
        assert!(BoxDomain::cube(1, (0.0, 1.0), (0.0, f64::INFINITY), (0.0, 1.0)).is_err());
        assert!(Grid::new(BoxDomain::unit(1), 2, 3, 3).is_err());
        assert!(Grid::new(BoxDomain::unit(1), 3, 3, 1).is_err());
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = Grid::new(BoxDomain::unit(2), 4, 3, 3).unwrap();
        for idx in 0..g.node_count() {
            let n = g.unravel(idx);
            assert_eq!(g.ravel(n.it, &n.iy, &n.ix), idx);
        }
        let n = g.unravel(g.node_count() - 1);
        assert_eq!(n, NodeIndex { it: 2, iy: vec![2, 2], ix: vec![3, 3] });
    }
}
