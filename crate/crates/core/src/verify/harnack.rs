use super::{cyl_integral, cylinder_nodes, p, CylNode, EstimateReport};
use crate::error::{KfpError, Result};
use crate::kolgeom::{KCylinder, KPoint};
use crate::mesh::Field;

pub const HARNACK_R0: f64 = 1.0 / 20.0;

/// Time of the centre of the earlier cylinder.
fn lag() -> f64 {
    -19.0 * HARNACK_R0 * HARNACK_R0 / 8.0
}

fn check_nonnegative(u: &Field, nodes: &[CylNode]) -> Result<()> {
    let tol = 1e-10 * (1.0 + u.max_abs());
    if let Some(c) = nodes.iter().find(|c| u.values[c.idx] < -tol) {
        return Err(KfpError::InvalidArgument(format!("field is negative ({}) at node {}", u.values[c.idx], c.idx)));
    }
    Ok(())
}

fn pair(u: &Field, r: f64) -> Result<(Vec<CylNode>, Vec<CylNode>)> {
    let m = u.grid.m();
    let mut back = KPoint::origin(m);
    back.t = lag();
    let early = cylinder_nodes(&u.grid, &KCylinder::new(back, r)?)?;
    let late = cylinder_nodes(&u.grid, &KCylinder::new(KPoint::origin(m), r)?)?;
    check_nonnegative(u, &early)?;
    check_nonnegative(u, &late)?;
    Ok((early, late))
}

fn inf(u: &Field, nodes: &[CylNode]) -> f64 {
    nodes.iter().map(|c| u.values[c.idx]).fold(f64::INFINITY, f64::min)
}

/// `sup` of `u` over the earlier cylinder of radius `r0/4` against the `inf`
/// over `Q_{r0/4}`.
pub fn harnack_quotient(u: &Field) -> Result<EstimateReport> {
    let r = HARNACK_R0 / 4.0;
    let (early, late) = pair(u, r)?;
    let sup = early.iter().map(|c| u.values[c.idx]).fold(f64::NEG_INFINITY, f64::max);
    let lo = inf(u, &late);
    Ok(EstimateReport::new("harnack", sup, lo, vec![p("r", r), p("t_lag", lag())]))
}

/// Mean of `u^zeta` over the earlier cylinder of radius `r0/2`, raised to
/// `1/zeta`, against the `inf` over `Q_{r0/2}`.
pub fn weak_harnack_quotient(u: &Field, zeta: f64) -> Result<EstimateReport> {
    if !(zeta > 0.0) {
        return Err(KfpError::InvalidArgument(format!("zeta must be positive, got {zeta}")));
    }
    let r = HARNACK_R0 / 2.0;
    let (early, late) = pair(u, r)?;
    let vol = cyl_integral(u, &early, |_| 1.0);
    let mean = (cyl_integral(u, &early, |v| v.max(0.0).powf(zeta)) / vol).powf(1.0 / zeta);
    let lo = inf(u, &late);
    Ok(EstimateReport::new("weak_harnack", mean, lo, vec![p("r", r), p("zeta", zeta), p("t_lag", lag())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, BoxDomain, Grid};
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        let s = HARNACK_R0 / 4.0;
        let d = BoxDomain::cube(1, (-3.0 * s, 3.0 * s), (-10.0 * s.powi(3), 10.0 * s.powi(3)), (-44.0 * s * s, s * s))
            .unwrap();
        build_grid(d, 13, 11, 46).unwrap()
    }

    #[test]
    fn constant_gives_one() {
        let u = Field::constant(grid(), 3.5);
        assert!((harnack_quotient(&u).unwrap().ratio - 1.0).abs() < 1e-14);
        for z in [0.25, 0.5, 1.0] {
            assert!((weak_harnack_quotient(&u, z).unwrap().ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_invariance() {
        let u = Field::from_fn(grid(), |q| 2.0 + q.x[0] * 10.0 + q.t * 30.0 + q.y[0] * 1e3);
        let a = harnack_quotient(&u).unwrap().ratio;
        let b = harnack_quotient(&u.scaled(7.0)).unwrap().ratio;
        assert!((a - b).abs() < 1e-14 * a);
        let a = weak_harnack_quotient(&u, 0.5).unwrap().ratio;
        let b = weak_harnack_quotient(&u.scaled(7.0), 0.5).unwrap().ratio;
        assert!((a - b).abs() < 1e-13 * a);
    }

    #[test]
    fn interior_zero_is_flagged() {
        let u = Field::from_fn(grid(), |q| q.x[0].abs());
        let r = harnack_quotient(&u).unwrap();
        assert!(r.is_flagged() && r.ratio.is_nan());
    }

    #[test]
    fn negative_field_is_rejected() {
        let u = Field::constant(grid(), -1.0);
        assert!(harnack_quotient(&u).is_err());
    }
}
