//! Discrete differential operators.
//!
//! `grad_x` and `div_x` share the second-order summation-by-parts first
//! derivative: centered in the interior, one-sided at the two ends of each
//! `X` line. With trapezoid weights `H` this gives
//! `<div_x w, phi>_H = -<w, grad_x phi>_H` whenever `phi` vanishes on the `X`
//! boundary, so the assembled weak form is exactly the transpose system.

use super::{Field, Grid, VectorField};

#[inline]
pub(crate) fn axis_index(idx: usize, stride: usize, n: usize) -> usize {
    (idx / stride) % n
}

/// Summation-by-parts first derivative of the `n` values `u[base + i*stride]`
/// at position `i`.
#[inline]
pub(crate) fn sbp_diff(u: impl Fn(usize) -> f64, idx: usize, i: usize, n: usize, stride: usize, h: f64) -> f64 {
    if i == 0 {
        (u(idx + stride) - u(idx)) / h
    } else if i == n - 1 {
        (u(idx) - u(idx - stride)) / h
    } else {
        (u(idx + stride) - u(idx - stride)) / (2.0 * h)
    }
}

/// First derivative of a single line of values (used by slice solvers).
pub fn d_x_line(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    (0..n).map(|i| sbp_diff(|j| values[j], i, i, n, 1, h)).collect()
}

pub fn grad_x(u: &Field) -> VectorField {
    let g = &u.grid;
    let m = g.m();
    let mut out = VectorField::zeros(g.clone());
    for idx in 0..g.node_count() {
        for k in 0..m {
            let s = g.x_stride(k);
            let i = axis_index(idx, s, g.nx);
            out.values[idx * m + k] = sbp_diff(|j| u.values[j], idx, i, g.nx, s, g.hx[k]);
        }
    }
    out
}

pub fn div_x(w: &VectorField) -> Field {
    let g = &w.grid;
    let m = g.m();
    let mut out = Field::zeros(g.clone());
    for idx in 0..g.node_count() {
        let mut acc = 0.0;
        for k in 0..m {
            let s = g.x_stride(k);
            let i = axis_index(idx, s, g.nx);
            acc += sbp_diff(|j| w.values[j * m + k], idx, i, g.nx, s, g.hx[k]);
        }
        out.values[idx] = acc;
    }
    out
}

/// Upwind coefficients of `x_k d/dy_k` at a node: returns `(neighbor offset
/// sign, coefficient)` with the derivative taken against the flow. `None`
/// when `x_k == 0`.
#[inline]
pub(crate) fn upwind_side(xk: f64, iy: usize, ny: usize) -> Option<bool> {
    // true = backward difference (uses iy - 1)
    if xk > 0.0 {
        Some(iy > 0)
    } else if xk < 0.0 {
        Some(iy + 1 >= ny)
    } else {
        None
    }
}

/// `(d_t + X . grad_Y) u` with a backward difference in `t` (forward on the
/// first level) and each `d/dy_k` upwinded by the sign of `x_k`. Where the
/// upwind neighbour lies outside the grid the opposite one-sided difference
/// is used.
pub fn transport(u: &Field) -> Field {
    let g = &u.grid;
    let m = g.m();
    let ts = g.t_stride();
    let mut out = Field::zeros(g.clone());
    for idx in 0..g.node_count() {
        let it = idx / ts;
        let v = u.values[idx];
        let mut acc = if it > 0 { (v - u.values[idx - ts]) / g.ht } else { (u.values[idx + ts] - v) / g.ht };
        for k in 0..m {
            let xk = g.x_coord(k, axis_index(idx, g.x_stride(k), g.nx));
            let s = g.y_stride(k);
            let iy = axis_index(idx, s, g.ny);
            match upwind_side(xk, iy, g.ny) {
                Some(true) => acc += xk * (v - u.values[idx - s]) / g.hy[k],
                Some(false) => acc += xk * (u.values[idx + s] - v) / g.hy[k],
                None => {}
            }
        }
        out.values[idx] = acc;
    }
    out
}

/// Standard `2m+1`-point Laplacian in `Y`; on `Y` faces the stencil is
/// shifted inwards.
pub fn laplace_y(u: &Field) -> Field {
    let g = &u.grid;
    let m = g.m();
    let mut out = Field::zeros(g.clone());
    for idx in 0..g.node_count() {
        let mut acc = 0.0;
        for k in 0..m {
            let s = g.y_stride(k);
            let iy = axis_index(idx, s, g.ny);
            let c = if iy == 0 {
                idx + s
            } else if iy == g.ny - 1 {
                idx - s
            } else {
                idx
            };
            acc += (u.values[c + s] - 2.0 * u.values[c] + u.values[c - s]) / (g.hy[k] * g.hy[k]);
        }
        out.values[idx] = acc;
    }
    out
}

#[allow(dead_code)]
pub(crate) fn x_interior(g: &Grid, idx: usize) -> bool {
    (0..g.m()).all(|k| {
        let i = axis_index(idx, g.x_stride(k), g.nx);
        i > 0 && i < g.nx - 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, weights, BoxDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn grid(m: usize, n: usize) -> Arc<Grid> {
        build_grid(BoxDomain::cube(m, (-1.0, 1.0), (0.0, 2.0), (0.0, 1.0)).unwrap(), n, n, 4).unwrap()
    }

    #[test]
    fn grad_of_linear_and_constant() {
        let g = grid(2, 7);
        let u = Field::from_fn(g.clone(), |p| p.x[0] - 3.0 * p.x[1] + p.y[0] * p.t);
        let gu = grad_x(&u);
        for i in 0..g.node_count() {
            assert!((gu.at(i)[0] - 1.0).abs() < 1e-13);
            assert!((gu.at(i)[1] + 3.0).abs() < 1e-13);
        }
        let c = grad_x(&Field::constant(g, 2.5));
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn grad_of_quadratic() {
        // interior nodes are exact on quadratics; boundary rows are first order
        let errs: Vec<f64> = [9usize, 17, 33]
            .iter()
            .map(|&n| {
                let g = grid(1, n);
                let u = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0]);
                let gu = grad_x(&u);
                let mut bnd: f64 = 0.0;
                for i in 0..g.node_count() {
                    let n = g.unravel(i);
                    let exact = 2.0 * g.x_coord(0, n.ix[0]);
                    let e = (gu.at(i)[0] - exact).abs();
                    if x_interior(&g, i) {
                        assert!(e < 1e-12);
                    } else {
                        bnd = bnd.max(e);
                    }
                }
                bnd
            })
            .collect();
        assert!((errs[0] / errs[1] - 2.0).abs() < 1e-9 && (errs[1] / errs[2] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn div_examples() {
        let g = grid(2, 6);
        let w = VectorField::from_fn(g.clone(), |p| p.x.clone());
        let d = div_x(&w);
        assert!(d.values.iter().all(|v| (v - 2.0).abs() < 1e-13));
        let c = VectorField::from_fn(g, |_| vec![1.5, -2.0]);
        assert!(div_x(&c).max_abs() < 1e-14);
    }

    #[test]
    fn summation_by_parts_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in [1usize, 2] {
            let g = grid(m, 7);
            let wts = weights(&g);
            let mut w = VectorField::zeros(g.clone());
            w.values.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            let phi = Field::from_values(
                g.clone(),
                (0..g.node_count()).map(|i| if x_interior(&g, i) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect(),
            )
            .unwrap();
            let dw = div_x(&w);
            let gp = grad_x(&phi);
            let lhs: f64 = (0..g.node_count()).map(|i| wts[i] * dw.values[i] * phi.values[i]).sum();
            let rhs: f64 = (0..g.node_count())
                .map(|i| wts[i] * w.at(i).iter().zip(gp.at(i)).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            let scale: f64 = (0..g.node_count()).map(|i| wts[i] * dw.values[i].abs() * phi.values[i].abs()).sum();
            assert!((lhs + rhs).abs() <= 1e-12 * scale, "m={m}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn transport_exact_on_affine() {
        let g = grid(2, 5);
        let u = Field::from_fn(g.clone(), |p| 1.0 + 2.0 * p.y[0] - p.y[1] + 3.0 * p.t);
        let tu = transport(&u);
        for i in 0..g.node_count() {
            let p = g.point(i);
            let exact = 3.0 + 2.0 * p.x[0] - p.x[1];
            assert!((tu.values[i] - exact).abs() < 1e-12);
        }
        assert!(transport(&Field::constant(g, 4.0)).max_abs() < 1e-14);
    }

    #[test]
    fn transport_examples() {
        let g = build_grid(BoxDomain::cube(1, (0.0, 4.0), (0.0, 1.0), (0.0, 1.0)).unwrap(), 5, 5, 3).unwrap();
        let u = Field::from_fn(g.clone(), |p| p.y[0]);
        let tu = transport(&u);
        let idx = g.ravel(1, &[2], &[2]); // x = 2
        assert_eq!(tu.values[idx], 2.0);
        let ut = transport(&Field::from_fn(g.clone(), |p| p.t));
        assert!(ut.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn laplace_y_examples() {
        let g = grid(1, 9);
        let u = Field::from_fn(g.clone(), |p| p.y[0] * p.y[0]);
        assert!(laplace_y(&u).values.iter().all(|v| (v - 2.0).abs() < 1e-11));
        let a = Field::from_fn(g, |p| 3.0 * p.y[0] - 1.0);
        assert!(laplace_y(&a).max_abs() < 1e-11);
    }

    #[test]
    fn laplace_y_second_order_on_sine() {
        let err = |n: usize| {
            let g = build_grid(BoxDomain::unit(1), 3, n, 2).unwrap();
            let pi = std::f64::consts::PI;
            let u = Field::from_fn(g.clone(), |p| (pi * p.y[0]).sin());
            let lu = laplace_y(&u);
            (0..g.node_count())
                .filter(|&i| {
                    let iy = g.unravel(i).iy[0];
                    iy > 0 && iy < n - 1
                })
                .map(|i| (lu.values[i] + pi * pi * (pi * g.point(i).y[0]).sin()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(9), err(17), err(33));
        assert!((e1 / e2).log2() > 1.9 && (e2 / e3).log2() > 1.9);
    }
}
