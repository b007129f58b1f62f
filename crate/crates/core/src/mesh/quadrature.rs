//! Tensor trapezoid quadrature and deterministic summation.

use super::ops::axis_index;
use super::{Field, Grid};
use crate::error::{KfpError, Result};
use crate::kolgeom::KPoint;

/// Pairwise summation; the result does not depend on anything but the order
/// of `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[inline]
pub(crate) fn trap(i: usize, n: usize, h: f64) -> f64 {
    if i == 0 || i == n - 1 {
        0.5 * h
    } else {
        h
    }
}

pub fn node_weight(grid: &Grid, idx: usize) -> f64 {
    let ts = grid.t_stride();
    let mut w = trap(idx / ts, grid.nt, grid.ht);
    for k in 0..grid.m() {
        w *= trap(axis_index(idx, grid.x_stride(k), grid.nx), grid.nx, grid.hx[k]);
        w *= trap(axis_index(idx, grid.y_stride(k), grid.ny), grid.ny, grid.hy[k]);
    }
    w
}

/// Weight of a node in the `(X, Y)` section through its level.
pub fn section_weight(grid: &Grid, idx: usize) -> f64 {
    node_weight(grid, idx) / trap(idx / grid.t_stride(), grid.nt, grid.ht)
}

/// Weight of a node in the `Y` slice through its `(X, t)`.
pub fn y_weight(grid: &Grid, idx: usize) -> f64 {
    (0..grid.m()).map(|k| trap(axis_index(idx, grid.y_stride(k), grid.ny), grid.ny, grid.hy[k])).product()
}

pub fn weights(grid: &Grid) -> Vec<f64> {
    (0..grid.node_count()).map(|i| node_weight(grid, i)).collect()
}

/// Trapezoid integral of `u` restricted to the nodes where `region` holds.
pub fn integrate(u: &Field, region: impl Fn(&KPoint) -> bool) -> Result<f64> {
    let g = &u.grid;
    let nodes: Vec<usize> = (0..g.node_count()).filter(|&i| region(&g.point(i))).collect();
    integrate_nodes(u, &nodes)
}

pub fn integrate_nodes(u: &Field, nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(KfpError::EmptyRegion);
    }
    let terms: Vec<f64> = nodes.iter().map(|&i| node_weight(&u.grid, i) * u.values[i]).collect();
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, BoxDomain};

    #[test]
    fn constant_integrates_to_volume() {
        let d = BoxDomain::cube(2, (-1.0, 1.0), (0.0, 3.0), (0.0, 0.5)).unwrap();
        let g = build_grid(d.clone(), 5, 4, 3).unwrap();
        let v = integrate(&Field::constant(g.clone(), 2.0), |_| true).unwrap();
        assert!((v - 2.0 * d.volume()).abs() < 1e-12);
        let s: f64 = weights(&g).iter().sum();
        assert!((s - d.volume()).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_exact_on_multilinear() {
        let g = build_grid(BoxDomain::unit(1), 7, 5, 4).unwrap();
        let u = Field::from_fn(g, |p| p.x[0] * p.y[0] * p.t + p.y[0]);
        let v = integrate(&u, |_| true).unwrap();
        assert!((v - (0.125 + 0.5)).abs() < 1e-14);
    }

    #[test]
    fn quadratic_converges_at_second_order() {
        let err = |n: usize| {
            let g = build_grid(BoxDomain::unit(1), n, 3, 2).unwrap();
            let u = Field::from_fn(g, |p| p.x[0] * p.x[0]);
            (integrate(&u, |_| true).unwrap() - 1.0 / 3.0).abs()
        };
        let r = err(9) / err(17);
        assert!((r - 4.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn empty_region_is_an_error() {
        let g = build_grid(BoxDomain::unit(1), 3, 3, 2).unwrap();
        let u = Field::constant(g, 1.0);
        assert!(matches!(integrate(&u, |p| p.t > 5.0), Err(KfpError::EmptyRegion)));
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let v = vec![0.1; 1000];
        assert!((pairwise_sum(&v) - 100.0).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
