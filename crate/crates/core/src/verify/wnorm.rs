use crate::error::Result;
use crate::mesh::{grad_x, node_weight, pairwise_sum, transport, Field, XPoisson};

/// Weight of the `(Y, t)` slice starting at node `start`.
fn slice_weight(u: &Field, start: usize) -> f64 {
    let g = &u.grid;
    node_weight(g, start) / g.hx.iter().map(|h| 0.5 * h).product::<f64>()
}

/// `( sum_{Y,t} [ ||u||^2_{H^1_X} + ||(d_t + X.grad_Y) u||^2_{H^-1_X} ] )^{1/2}`
/// with trapezoid weights in every variable.
pub fn w_norm(u: &Field) -> Result<f64> {
    let g = &u.grid;
    let xl = g.x_len();
    let m = g.m();
    let du = grad_x(u);
    let tu = transport(u);
    let pois = XPoisson::for_grid(g, None)?;
    let hw = pois.weights();
    let mut totals = Vec::with_capacity(g.node_count() / xl);
    for start in (0..g.node_count()).step_by(xl) {
        let h1: Vec<f64> = (0..xl)
            .map(|i| {
                let v = u.values[start + i];
                hw[i] * (v * v + du.at(start + i).iter().take(m).map(|d| d * d).sum::<f64>())
            })
            .collect();
        let dual = pois.dual_norm(&tu.values[start..start + xl])?;
        totals.push(slice_weight(u, start) * (pairwise_sum(&h1) + dual * dual));
    }
    Ok(pairwise_sum(&totals).sqrt())
}

/// `( sum_{Y,t} ||w||^2_{H^-1_X} )^{1/2}`.
pub fn dual_norm(w: &Field) -> Result<f64> {
    let g = &w.grid;
    let xl = g.x_len();
    let pois = XPoisson::for_grid(g, None)?;
    let mut totals = Vec::with_capacity(g.node_count() / xl);
    for start in (0..g.node_count()).step_by(xl) {
        let d = pois.dual_norm(&w.values[start..start + xl])?;
        totals.push(slice_weight(w, start) * d * d);
    }
    Ok(pairwise_sum(&totals).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, BoxDomain};

    #[test]
    fn zero_and_constant() {
        let g = build_grid(BoxDomain::unit(1), 9, 7, 5).unwrap();
        assert_eq!(w_norm(&Field::zeros(g.clone())).unwrap(), 0.0);
        let c = 3.0;
        let n = w_norm(&Field::constant(g.clone(), c)).unwrap();
        assert!((n - c * g.domain.volume().sqrt()).abs() < 1e-12, "{n}");
        assert_eq!(dual_norm(&Field::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn linear_in_x_adds_gradient() {
        let d = BoxDomain::cube(2, (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)).unwrap();
        let g = build_grid(d, 7, 3, 3).unwrap();
        // transport of x0 vanishes; |grad|^2 = 1, int x0^2 = 1/3 up to quadrature
        let u = Field::from_fn(g.clone(), |p| p.x[0]);
        let n = w_norm(&u).unwrap();
        let h = 1.0 / 6.0;
        let trap_x2 = (1.0 / 3.0) + h * h / 6.0;
        assert!((n * n - (trap_x2 + 1.0)).abs() < 1e-12, "{n}");
    }

    #[test]
    fn dual_norm_scales() {
        let g = build_grid(BoxDomain::unit(1), 11, 5, 4).unwrap();
        let w = Field::from_fn(g, |p| (3.0 * p.x[0]).sin() + p.t);
        let a = dual_norm(&w).unwrap();
        let b = dual_norm(&w.scaled(-2.0)).unwrap();
        assert!(a > 0.0 && (b - 2.0 * a).abs() < 1e-12 * a);
    }
}
