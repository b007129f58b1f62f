use crate::error::{KfpError, Result};
use crate::kolgeom::KPoint;
use crate::mesh::{pairwise_sum, section_weight, Grid};

/// Fundamental solution of `d_t + X.grad_Y - Delta_X` with pole at the
/// origin: the Gaussian density of `(X_t, Y_t)` with `X_t = sqrt(2) W_t`,
/// `Y_t = int X`, a product over the `m` pairs of
/// `sqrt(3) / (2 pi t^2) exp(-(x^2/t - 3xy/t^2 + 3y^2/t^3))`.
/// Zero for `t <= 0`.
pub fn model_kernel(p: &KPoint) -> f64 {
    let t = p.t;
    if t <= 0.0 {
        return 0.0;
    }
    let c = 3f64.sqrt() / (2.0 * std::f64::consts::PI * t * t);
    p.x.iter()
        .zip(&p.y)
        .map(|(&x, &y)| c * (-(x * x / t - 3.0 * x * y / (t * t) + 3.0 * y * y / (t * t * t))).exp())
        .product()
}

fn check_positive_time(grid: &Grid) -> Result<()> {
    if grid.domain.t.0 <= 0.0 {
        return Err(KfpError::InvalidArgument(format!(
            "kernel is singular at t = 0; grid starts at t = {}",
            grid.domain.t.0
        )));
    }
    Ok(())
}

/// Largest residual of the centred difference operator
/// `d_t + X.grad_Y - Delta_X` applied to the kernel over nodes interior in
/// every direction.
pub fn model_kernel_residual(grid: &Grid) -> Result<f64> {
    check_positive_time(grid)?;
    let m = grid.m();
    let interior = |n: &crate::mesh::NodeIndex| {
        n.it > 0
            && n.it + 1 < grid.nt
            && n.ix.iter().all(|&i| i > 0 && i + 1 < grid.nx)
            && n.iy.iter().all(|&i| i > 0 && i + 1 < grid.ny)
    };
    let mut worst = 0.0f64;
    let mut any = false;
    for idx in 0..grid.node_count() {
        let n = grid.unravel(idx);
        if !interior(&n) {
            continue;
        }
        any = true;
        let p = grid.point_of(&n);
        let at = |dx: &[f64], dy: &[f64], dt: f64| {
            let q = KPoint {
                x: p.x.iter().zip(dx).map(|(a, b)| a + b).collect(),
                y: p.y.iter().zip(dy).map(|(a, b)| a + b).collect(),
                t: p.t + dt,
            };
            model_kernel(&q)
        };
        let zero = vec![0.0; m];
        let g0 = at(&zero, &zero, 0.0);
        let mut r = (at(&zero, &zero, grid.ht) - at(&zero, &zero, -grid.ht)) / (2.0 * grid.ht);
        for k in 0..m {
            let mut e = zero.clone();
            e[k] = grid.hy[k];
            let mut f = zero.clone();
            f[k] = -grid.hy[k];
            r += p.x[k] * (at(&zero, &e, 0.0) - at(&zero, &f, 0.0)) / (2.0 * grid.hy[k]);
            let mut e = zero.clone();
            e[k] = grid.hx[k];
            let mut f = zero.clone();
            f[k] = -grid.hx[k];
            r -= (at(&e, &zero, 0.0) - 2.0 * g0 + at(&f, &zero, 0.0)) / (grid.hx[k] * grid.hx[k]);
        }
        worst = worst.max(r.abs());
    }
    if !any {
        return Err(KfpError::EmptyRegion);
    }
    Ok(worst)
}

/// Trapezoid integral of the kernel over the `(X, Y)` section at level `it`.
pub fn kernel_mass(grid: &Grid, it: usize) -> Result<f64> {
    check_positive_time(grid)?;
    if it >= grid.nt {
        return Err(KfpError::InvalidArgument(format!("level {it} out of range 0..{}", grid.nt)));
    }
    let ll = grid.level_len();
    let terms: Vec<f64> =
        (it * ll..(it + 1) * ll).map(|i| section_weight(grid, i) * model_kernel(&grid.point(i))).collect();
    Ok(pairwise_sum(&terms))
}
