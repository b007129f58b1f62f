use std::collections::BTreeMap;

use super::{check_inside, cyl_integral, cyl_sup_section, cylinder_nodes, p, CylNode, EstimateReport};
use crate::error::{KfpError, Result};
use crate::kolgeom::{euclid, KCylinder, KPoint};
use crate::mesh::{grad_x, node_weight, pairwise_sum, section_weight, y_weight, Field, Grid};

fn check_radii(r1: f64, r0: f64) -> Result<()> {
    if !(r1 > 0.0 && r1 < r0 && r0 <= 1.0) {
        return Err(KfpError::InvalidArgument(format!("radii must satisfy 0 < r1 < r0 <= 1, got ({r1}, {r0})")));
    }
    Ok(())
}

/// Constant of the energy estimate for radii `r1 < r0` and centre velocity
/// `|X0|`.
pub fn c01(r1: f64, r0: f64, x0_norm: f64) -> f64 {
    let d = r0 - r1;
    1.0 / (d * d) + (r0 + x0_norm) / (d * r1 * r1) + 1.0 / (d * r1) + 1.0
}

/// Nodes of `Q_r0(center)` and `Q_r1(center)`.
fn two_cylinders(g: &Grid, center: &KPoint, r1: f64, r0: f64) -> Result<(Vec<CylNode>, Vec<CylNode>)> {
    let n0 = cylinder_nodes(g, &KCylinder::new(center.clone(), r0)?)?;
    let n1 = cylinder_nodes(g, &KCylinder::new(center.clone(), r1)?)?;
    Ok((n0, n1))
}

/// Energy estimate: `lhs = sup_t int_{Q_r1(t)} u^2 + Lambda^{-1} int_{Q_r1} |grad_X u|^2`,
/// `rhs_data = c01 int_{Q_r0} u^2`.
pub fn energy_ratio(u: &Field, center: &KPoint, r1: f64, r0: f64, lambda: f64) -> Result<EstimateReport> {
    check_radii(r1, r0)?;
    if !(lambda > 0.0) {
        return Err(KfpError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let g = &u.grid;
    let (n0, n1) = two_cylinders(g, center, r1, r0)?;
    let sup = cyl_sup_section(u, &n1, |v| v * v);
    let gu = grad_x(u);
    let grad_terms: Vec<f64> = n1
        .iter()
        .map(|c| node_weight(g, c.idx) * c.xy * c.t * gu.at(c.idx).iter().map(|d| d * d).sum::<f64>())
        .collect();
    let lhs = sup + pairwise_sum(&grad_terms) / lambda;
    let x0 = euclid(&center.x);
    let c = c01(r1, r0, x0);
    let rhs = c * cyl_integral(u, &n0, |v| v * v);
    Ok(EstimateReport::new(
        "energy",
        lhs,
        rhs,
        vec![p("r1", r1), p("r0", r0), p("lambda", lambda), p("c01", c), p("x0_norm", x0), p("t0", center.t)],
    ))
}

/// Higher integrability: `lhs = ||u||_{L^q(Q_r1)}`, `rhs_data = ||u||_{L^2(Q_r0)}`;
/// the `L^1_{t,X} W^{s,1}_Y` ratio is stored under `ratio_ws1`.
pub fn higher_integrability(u: &Field, q: f64, s: f64, center: &KPoint, r1: f64, r0: f64) -> Result<EstimateReport> {
    check_radii(r1, r0)?;
    let g = &u.grid;
    let m = g.m() as f64;
    if !(q >= 2.0 && q < 2.0 + 1.0 / m) {
        return Err(KfpError::InvalidArgument(format!("q must lie in [2, 2 + 1/m), got {q}")));
    }
    if !(s >= 0.0 && s < 1.0 / 3.0) {
        return Err(KfpError::InvalidArgument(format!("s must lie in [0, 1/3), got {s}")));
    }
    let (n0, n1) = two_cylinders(g, center, r1, r0)?;
    let lq = cyl_integral(u, &n1, |v| v.abs().powf(q)).powf(1.0 / q);
    let l2 = cyl_integral(u, &n0, |v| v * v).sqrt();
    let ws1 = ws1_norm(u, &n1, s);
    let mut rep = EstimateReport::new(
        "higher_integrability",
        lq,
        l2,
        vec![p("q", q), p("s", s), p("r1", r1), p("r0", r0), p("ws1", ws1)],
    );
    rep.params.push(p("ratio_ws1", if l2 > 0.0 { ws1 / l2 } else { f64::NAN }));
    Ok(rep)
}

/// `int_{t,X} ( ||u||_{L^1_Y} + int int |u(Y) - u(Y')| / |Y - Y'|^{m+s} dY dY' )`
/// over the nodes of a cylinder.
fn ws1_norm(u: &Field, nodes: &[CylNode], s: f64) -> f64 {
    let g = &u.grid;
    let m = g.m();
    let xl = g.x_len();
    let ll = g.level_len();
    let mut groups: BTreeMap<(usize, usize), Vec<&CylNode>> = BTreeMap::new();
    for c in nodes {
        groups.entry((c.idx / ll, c.idx % xl)).or_default().push(c);
    }
    let mut totals = Vec::with_capacity(groups.len());
    for cs in groups.values() {
        let members: Vec<usize> = cs.iter().map(|c| c.idx).collect();
        let pts: Vec<KPoint> = members.iter().map(|&i| g.point(i)).collect();
        let wy: Vec<f64> = members.iter().map(|&i| y_weight(g, i)).collect();
        let mut terms: Vec<f64> = members.iter().zip(&wy).map(|(&i, w)| w * u.values[i].abs()).collect();
        for a in 0..members.len() {
            for b in 0..members.len() {
                if a == b {
                    continue;
                }
                let dy: Vec<f64> = (0..m).map(|k| pts[a].y[k] - pts[b].y[k]).collect();
                let d = euclid(&dy);
                let du = (u.values[members[a]] - u.values[members[b]]).abs();
                terms.push(wy[a] * wy[b] * du / d.powf(m as f64 + s));
            }
        }
        let w_xt = node_weight(g, members[0]) / wy[0] * cs[0].t;
        totals.push(w_xt * pairwise_sum(&terms));
    }
    pairwise_sum(&totals)
}

/// `lhs = sup_{Q_rinf} u`, `rhs_data = ((1 + |X0|) / (r_inf^2 (r0 - r_inf)^3))^{1/p} ||u||_{L^p(Q_r0)}`.
pub fn local_boundedness(u: &Field, pexp: f64, center: &KPoint, r_inf: f64, r0: f64) -> Result<EstimateReport> {
    check_radii(r_inf, r0)?;
    if !(pexp > 0.0) {
        return Err(KfpError::InvalidArgument(format!("p must be positive, got {pexp}")));
    }
    let g = &u.grid;
    let (n0, ni) = two_cylinders(g, center, r_inf, r0)?;
    let sup = ni.iter().map(|c| u.values[c.idx]).fold(f64::NEG_INFINITY, f64::max);
    let x0 = euclid(&center.x);
    let factor = ((1.0 + x0) / (r_inf * r_inf * (r0 - r_inf).powi(3))).powf(1.0 / pexp);
    let lp = cyl_integral(u, &n0, |v| v.abs().powf(pexp)).powf(1.0 / pexp);
    Ok(EstimateReport::new(
        "local_boundedness",
        sup,
        factor * lp,
        vec![p("p", pexp), p("r_inf", r_inf), p("r0", r0), p("x0_norm", x0), p("theta", 1.0)],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeGiorgiLevel {
    pub n: usize,
    pub r_n: f64,
    pub k_n: f64,
    pub a_n: f64,
}

/// `A_n = sup_{t in (-r_n^2, 0)} int_{|X| < r_n, |Y| < r_n^3} (u - k_n)_+^2` for
/// `n = 0..=n_max`, with `r_n = r_inf + (r0 - r_inf) 2^{-n}` and
/// `k_n = (1 - 2^{-n}) / 2`.
pub fn de_giorgi_levels(u: &Field, r_inf: f64, r0: f64, n_max: usize) -> Result<Vec<DeGiorgiLevel>> {
    check_radii(r_inf, r0)?;
    let g = &u.grid;
    let m = g.m();
    check_inside(g, &KCylinder::new(KPoint::origin(m), r0)?)?;
    let pts: Vec<KPoint> = (0..g.node_count()).map(|i| g.point(i)).collect();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let half = 0.5f64.powi(n as i32);
        let r = r_inf + (r0 - r_inf) * half;
        let k = 0.5 * (1.0 - half);
        let mut per_level: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (i, q) in pts.iter().enumerate() {
            if q.t > -r * r && q.t < 0.0 && euclid(&q.x) < r && euclid(&q.y) < r * r * r {
                let e = (u.values[i] - k).max(0.0);
                per_level.entry(i / g.t_stride()).or_default().push(section_weight(g, i) * e * e);
            }
        }
        let a = per_level.values().map(|v| pairwise_sum(v)).fold(0.0, f64::max);
        out.push(DeGiorgiLevel { n, r_n: r, k_n: k, a_n: a });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, BoxDomain};

    fn grid(n: usize) -> std::sync::Arc<crate::mesh::Grid> {
        build_grid(BoxDomain::cube(1, (-1.25, 1.25), (-1.25, 1.25), (-1.25, 0.25)).unwrap(), n, n, (n - 1) * 3 / 5 + 1)
            .unwrap()
    }

    #[test]
    fn c01_hand_value() {
        assert_eq!(c01(0.5, 1.0, 0.0), 17.0);
        let (r1, r0, x) = (0.3, 0.9, 0.4);
        let d: f64 = 0.6;
        assert!((c01(r1, r0, x) - (1.0 / (d * d) + 1.3 / (d * 0.09) + 1.0 / (d * 0.3) + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn energy_of_constant() {
        let g = grid(81);
        let u = Field::constant(g, 1.0);
        let r = energy_ratio(&u, &KPoint::origin(1), 0.5, 1.0, 1.0).unwrap();
        assert_eq!(r.param("c01"), Some(17.0));
        assert!((r.lhs - 0.25).abs() < 0.02, "{}", r.lhs);
        assert!((r.rhs_data - 68.0).abs() < 68.0 * 0.05, "{}", r.rhs_data);
        assert!((r.ratio - 0.25 / 68.0).abs() < 5e-4);
        let z = energy_ratio(&u.scaled(0.0), &KPoint::origin(1), 0.5, 1.0, 1.0).unwrap();
        assert!(z.is_flagged());
        assert!(energy_ratio(&u, &KPoint::origin(1), 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn energy_ratio_is_scale_invariant() {
        let g = grid(41);
        let u = Field::from_fn(g, |q| 1.0 + q.x[0] * q.x[0] + q.y[0] - q.t);
        let a = energy_ratio(&u, &KPoint::origin(1), 0.5, 1.0, 2.0).unwrap();
        let b = energy_ratio(&u.scaled(7.0), &KPoint::origin(1), 0.5, 1.0, 2.0).unwrap();
        assert!((a.ratio - b.ratio).abs() <= 1e-14 * a.ratio);
    }

    #[test]
    fn integrability_of_constant() {
        let g = grid(81);
        let u = Field::constant(g, 1.0);
        let r = higher_integrability(&u, 2.5, 0.2, &KPoint::origin(1), 0.5, 1.0).unwrap();
        let exact = (0.25f64 * 0.25).powf(1.0 / 2.5) / 4.0f64.sqrt();
        assert!((r.ratio - exact).abs() < 0.05 * exact, "{} vs {exact}", r.ratio);
        assert!(r.param("ratio_ws1").unwrap() > 0.0);
        assert!(higher_integrability(&u, 3.0, 0.2, &KPoint::origin(1), 0.5, 1.0).is_err());
        assert!(higher_integrability(&u, 2.5, 0.4, &KPoint::origin(1), 0.5, 1.0).is_err());
    }

    #[test]
    fn boundedness_of_constant() {
        let g = grid(41);
        let u = Field::constant(g, 1.0);
        let r = local_boundedness(&u, 2.0, &KPoint::origin(1), 0.5, 1.0).unwrap();
        assert_eq!(r.lhs, 1.0);
        let l2 = cyl_integral(
            &u,
            &cylinder_nodes(&u.grid, &KCylinder::new(KPoint::origin(1), 1.0).unwrap()).unwrap(),
            |v| v * v,
        )
        .sqrt();
        assert!((r.rhs_data - (1.0f64 / (0.25 * 0.125)).sqrt() * l2).abs() < 1e-12);
    }

    #[test]
    fn de_giorgi_thresholds() {
        let g = grid(41);
        let z = de_giorgi_levels(&Field::zeros(g.clone()), 0.5, 1.0, 5).unwrap();
        assert!(z.iter().all(|l| l.a_n == 0.0));
        let q = de_giorgi_levels(&Field::constant(g, 0.25), 0.5, 1.0, 5).unwrap();
        assert!(q[0].a_n > 0.0 && q[0].k_n == 0.0);
        assert!(q[1..].iter().all(|l| l.a_n == 0.0));
        assert!((q[2].r_n - 0.625).abs() < 1e-15 && (q[2].k_n - 0.375).abs() < 1e-15);
    }
}
