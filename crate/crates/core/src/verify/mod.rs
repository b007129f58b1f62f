//! Regularity functionals on discrete solutions: energy, higher
//! integrability, local boundedness, Harnack and Hölder quotients, the
//! comparison check, the `W` norm and the model kernel.

mod comparison;
mod energy;
mod harnack;
mod holder;
mod kernel;
mod wnorm;

pub use comparison::{comparison_check, comparison_suite, subsolution_defect, ComparisonCase};
pub use energy::{c01, de_giorgi_levels, energy_ratio, higher_integrability, local_boundedness, DeGiorgiLevel};
pub use harnack::{harnack_quotient, weak_harnack_quotient, HARNACK_R0};
pub use holder::{anchored_pairs, holder_estimate, pair_scale, uniform_pairs, HolderFit, PairRegion};
pub use kernel::{kernel_mass, model_kernel, model_kernel_residual};
pub use wnorm::{dual_norm, w_norm};

use std::collections::BTreeMap;

use crate::error::{KfpError, Result};
use crate::kolgeom::{euclid, relative, KCylinder};
use crate::mesh::{node_weight, pairwise_sum, section_weight, Field, Grid};

/// One evaluated estimate. `ratio` is `lhs / rhs_data`, or NaN with `flag`
/// set when it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs_data: f64,
    pub ratio: f64,
    pub params: Vec<(String, f64)>,
    pub flag: Option<String>,
}

impl EstimateReport {
    pub fn new(name: &str, lhs: f64, rhs_data: f64, params: Vec<(String, f64)>) -> Self {
        let (ratio, flag) = if rhs_data > 0.0 && lhs.is_finite() && rhs_data.is_finite() {
            (lhs / rhs_data, None)
        } else {
            (f64::NAN, Some(format!("data side is {rhs_data}; ratio undefined")))
        };
        Self { name: name.to_string(), lhs, rhs_data, ratio, params, flag }
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }

    pub fn csv_header() -> [&'static str; 5] {
        ["name", "params", "lhs", "rhs_data", "ratio"]
    }

    /// `name, k=v;k=v, lhs, rhs_data, ratio`.
    pub fn csv_record(&self) -> [String; 5] {
        let params = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        [self.name.clone(), params, self.lhs.to_string(), self.rhs_data.to_string(), self.ratio.to_string()]
    }
}

pub(crate) fn p(key: &str, v: f64) -> (String, f64) {
    (key.to_string(), v)
}

/// Checks that the closure of `cyl` fits in the grid box.
pub(crate) fn check_inside(grid: &Grid, cyl: &KCylinder) -> Result<()> {
    let d = &grid.domain;
    let c = &cyl.center;
    if c.dim() != grid.m() {
        return Err(KfpError::DimensionMismatch { expected: grid.m(), got: c.dim() });
    }
    let r = cyl.radius;
    let (r2, r3) = (r * r, r * r * r);
    let tol = 1e-12;
    let mut ok = c.t - r2 >= d.t.0 - tol && c.t <= d.t.1 + tol;
    for k in 0..grid.m() {
        let (a, b) = d.x[k];
        ok &= c.x[k] - r >= a - tol && c.x[k] + r <= b + tol;
        // Y = Y0 + Y' + s X0 with s in (-r^2, 0)
        let shift = r2 * c.x[k].abs();
        let (a, b) = d.y[k];
        ok &= c.y[k] - r3 - shift >= a - tol && c.y[k] + r3 + shift <= b + tol;
    }
    if ok {
        Ok(())
    } else {
        Err(KfpError::CylinderOutsideDomain)
    }
}

/// A grid node of a cylinder with its quadrature factors: `xy` for the
/// `(X, Y)` section and `t` for the time direction. Factors are 1 inside and
/// 1/2 on a face through the node, so the trapezoid rule integrates
/// constants over box-aligned cylinders up to the grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylNode {
    pub idx: usize,
    pub xy: f64,
    pub t: f64,
}

#[inline]
fn face_factor(v: f64, r: f64) -> f64 {
    let tol = 1e-9 * r;
    if v < r - tol {
        1.0
    } else if v <= r + tol {
        0.5
    } else {
        0.0
    }
}

/// Nodes of the closed cylinder, which must lie in the grid box.
pub fn cylinder_nodes(grid: &Grid, cyl: &KCylinder) -> Result<Vec<CylNode>> {
    check_inside(grid, cyl)?;
    let r = cyl.radius;
    let mut out = Vec::new();
    // a face through a grid-boundary node already carries the half weight
    let edge = |f: f64, on_edge: bool| if on_edge && f == 0.5 { 1.0 } else { f };
    for i in 0..grid.node_count() {
        let rel = relative(&grid.point(i), &cyl.center)?;
        let n = grid.unravel(i);
        let fx = edge(face_factor(euclid(&rel.x), r), grid.is_x_boundary(&n))
            * edge(face_factor(euclid(&rel.y), r * r * r), grid.is_y_boundary(&n));
        let on_t = n.it == 0 || n.it == grid.nt - 1;
        let ft = edge(face_factor(-rel.t, r * r) * face_factor(rel.t + r * r, r * r), on_t);
        if fx > 0.0 && ft > 0.0 {
            out.push(CylNode { idx: i, xy: fx, t: ft });
        }
    }
    if out.is_empty() {
        return Err(KfpError::EmptyRegion);
    }
    Ok(out)
}

/// `int_Q f(u)` over cylinder nodes.
pub(crate) fn cyl_integral(u: &Field, nodes: &[CylNode], f: impl Fn(f64) -> f64) -> f64 {
    let g = &u.grid;
    let t: Vec<f64> = nodes.iter().map(|c| node_weight(g, c.idx) * c.xy * c.t * f(u.values[c.idx])).collect();
    pairwise_sum(&t)
}

/// `sup_t int_{Q(t)} f(u) dX dY` over the levels met by the cylinder.
pub(crate) fn cyl_sup_section(u: &Field, nodes: &[CylNode], f: impl Fn(f64) -> f64) -> f64 {
    let g = &u.grid;
    let mut per_level: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for c in nodes {
        per_level.entry(c.idx / g.t_stride()).or_default().push(section_weight(g, c.idx) * c.xy * f(u.values[c.idx]));
    }
    per_level.values().map(|v| pairwise_sum(v)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kolgeom::KPoint;
    use crate::mesh::{build_grid, BoxDomain};

    #[test]
    fn report_flags_zero_data() {
        let r = EstimateReport::new("x", 0.0, 0.0, vec![]);
        assert!(r.is_flagged() && r.ratio.is_nan());
        let r = EstimateReport::new("x", 1.0, 4.0, vec![p("r", 0.5)]);
        assert_eq!(r.ratio, 0.25);
        assert_eq!(r.csv_record()[1], "r=0.5");
    }

    #[test]
    fn cylinder_nodes_respect_domain() {
        let g = build_grid(BoxDomain::cube(1, (-1.0, 1.0), (-1.0, 1.0), (-1.0, 0.0)).unwrap(), 9, 9, 5).unwrap();
        let q = KCylinder::new(KPoint::origin(1), 1.0).unwrap();
        let nodes = cylinder_nodes(&g, &q).unwrap();
        assert!(nodes.iter().all(|c| g.point(c.idx).t <= 0.0 && g.point(c.idx).x[0].abs() <= 1.0));
        let u = Field::constant(g.clone(), 1.0);
        assert!((cyl_integral(&u, &nodes, |v| v) - 4.0).abs() < 1e-12);
        let big = KCylinder::new(KPoint::origin(1), 1.5).unwrap();
        assert!(matches!(cylinder_nodes(&g, &big), Err(KfpError::CylinderOutsideDomain)));
        let moved = KCylinder::new(KPoint::scalar(0.5, 0.0, 0.0), 0.5).unwrap();
        assert!(cylinder_nodes(&g, &moved).is_ok());
    }
}
