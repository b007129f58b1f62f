//! Galilean group law, anisotropic dilations, homogeneous norm and
//! Kolmogorov cylinders on `R^m x R^m x R`.
//!
//! Points are written `(X, Y, t)` with `X` the velocity and `Y` the position.
//! The group law is
//!
//! ```text
//! (X~, Y~, t~) o (X, Y, t) = (X~ + X, Y~ + Y + t X~, t~ + t)
//! ```
//!
//! and `delta_r (X, Y, t) = (r X, r^3 Y, r^2 t)`.

use crate::error::{check_dim, KfpError, Result};

/// A point `(X, Y, t)`; `x` and `y` always have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct KPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl KPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(KfpError::InvalidArgument("dimension m must be at least 1".into()));
        }
        check_dim(x.len(), y.len())?;
        if !(x.iter().chain(y.iter()).all(|v| v.is_finite()) && t.is_finite()) {
            return Err(KfpError::NonFinite("KPoint coordinate".into()));
        }
        Ok(Self { x, y, t })
    }

    /// Scalar shorthand for `m = 1`.
    pub fn scalar(x: f64, y: f64, t: f64) -> Self {
        Self { x: vec![x], y: vec![y], t }
    }

    pub fn origin(m: usize) -> Self {
        Self { x: vec![0.0; m], y: vec![0.0; m], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_origin(&self) -> bool {
        self.t == 0.0 && self.x.iter().chain(self.y.iter()).all(|v| *v == 0.0)
    }

    /// Largest absolute coordinate difference, used by tests.
    pub fn max_abs_diff(&self, other: &KPoint) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.y.iter().zip(&other.y))
            .map(|(a, b)| (a - b).abs())
            .fold((self.t - other.t).abs(), f64::max)
    }
}

/// Kolmogorov cylinder `Q_r(center) = center o Q_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct KCylinder {
    pub center: KPoint,
    pub radius: f64,
}

impl KCylinder {
    pub fn new(center: KPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(KfpError::InvalidArgument(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// Lebesgue measure, see [`cylinder_volume`].
    pub fn volume(&self) -> f64 {
        cylinder_volume(self.center.dim(), self.radius)
    }

    pub fn contains(&self, p: &KPoint) -> Result<bool> {
        cylinder_contains(self, p)
    }
}

pub fn compose(a: &KPoint, b: &KPoint) -> Result<KPoint> {
    check_dim(a.dim(), b.dim())?;
    let x = a.x.iter().zip(&b.x).map(|(ax, bx)| ax + bx).collect();
    let y = a.y.iter().zip(&b.y).zip(&a.x).map(|((ay, by), ax)| ay + by + b.t * ax).collect();
    Ok(KPoint { x, y, t: a.t + b.t })
}

pub fn inverse(p: &KPoint) -> KPoint {
    let x = p.x.iter().map(|v| -v).collect();
    let y = p.y.iter().zip(&p.x).map(|(y, x)| -y + p.t * x).collect();
    KPoint { x, y, t: -p.t }
}

/// `q^{-1} o p`, written out so that no intermediate inverse is formed.
pub fn relative(p: &KPoint, q: &KPoint) -> Result<KPoint> {
    check_dim(p.dim(), q.dim())?;
    let dt = p.t - q.t;
    let x = p.x.iter().zip(&q.x).map(|(a, b)| a - b).collect();
    let y = p.y.iter().zip(&q.y).zip(&q.x).map(|((py, qy), qx)| py - qy - dt * qx).collect();
    Ok(KPoint { x, y, t: dt })
}

pub fn dilate(r: f64, p: &KPoint) -> Result<KPoint> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(KfpError::InvalidArgument(format!("dilation factor must be positive, got {r}")));
    }
    let r3 = r * r * r;
    Ok(KPoint { x: p.x.iter().map(|v| r * v).collect(), y: p.y.iter().map(|v| r3 * v).collect(), t: r * r * p.t })
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `|X| + |Y|^{1/3} + |t|^{1/2}` with Euclidean `|.|`.
pub fn hom_norm(p: &KPoint) -> f64 {
    euclid(&p.x) + euclid(&p.y).cbrt() + p.t.abs().sqrt()
}

pub fn quasi_distance(p: &KPoint, q: &KPoint) -> Result<f64> {
    Ok(hom_norm(&relative(p, q)?))
}

/// Membership in the open model cylinder `Q_r` at the origin.
pub fn in_model_cylinder(rel: &KPoint, r: f64) -> bool {
    rel.t < 0.0 && rel.t > -r * r && euclid(&rel.x) < r && euclid(&rel.y) < r * r * r
}

pub fn cylinder_contains(c: &KCylinder, p: &KPoint) -> Result<bool> {
    let rel = relative(p, &c.center)?;
    Ok(in_model_cylinder(&rel, c.radius))
}

/// Measure of `Q_r` in dimension `m`: `|B_r| |B_{r^3}| r^2` with Euclidean balls.
pub fn cylinder_volume(m: usize, r: f64) -> f64 {
    let ball = |rad: f64| unit_ball_volume(m) * rad.powi(m as i32);
    ball(r) * ball(r * r * r) * r * r
}

fn unit_ball_volume(m: usize) -> f64 {
    match m {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 / 3.0 * std::f64::consts::PI,
        // V_m = V_{m-2} * 2 pi / m
        _ => unit_ball_volume(m - 2) * 2.0 * std::f64::consts::PI / m as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, m: usize) -> KPoint {
        let mut v = || rng.gen_range(-2.0..2.0);
        let x = (0..m).map(|_| v()).collect();
        let y = (0..m).map(|_| v()).collect();
        KPoint::new(x, y, v()).unwrap()
    }

    #[test]
    fn compose_examples() {
        let a = KPoint::scalar(1.0, 0.0, 0.0);
        let b = KPoint::scalar(0.0, 0.0, 2.0);
        assert_eq!(compose(&a, &b).unwrap(), KPoint::scalar(1.0, 2.0, 2.0));

        let a = KPoint::new(vec![1.0, 0.0], vec![0.0, 0.0], 1.0).unwrap();
        let b = KPoint::new(vec![0.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        let c = compose(&a, &b).unwrap();
        assert_eq!(c, KPoint::new(vec![1.0, 1.0], vec![1.0, 0.0], 2.0).unwrap());
    }

    #[test]
    fn compose_rejects_mismatched_dimensions() {
        let a = KPoint::origin(1);
        let b = KPoint::origin(2);
        assert!(matches!(compose(&a, &b), Err(KfpError::DimensionMismatch { .. })));
        assert!(relative(&a, &b).is_err());
        assert!(quasi_distance(&a, &b).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&KPoint::scalar(1.0, 2.0, 3.0)), KPoint::scalar(-1.0, 1.0, -3.0));
        assert!(inverse(&KPoint::origin(2)).max_abs_diff(&KPoint::origin(2)) == 0.0);
    }

    #[test]
    fn relative_examples() {
        let p = KPoint::scalar(1.0, 2.0, 3.0);
        assert_eq!(relative(&p, &KPoint::scalar(1.0, 0.0, 1.0)).unwrap(), KPoint::scalar(0.0, 0.0, 2.0));
        assert!(relative(&p, &p).unwrap().is_origin());
        assert_eq!(relative(&p, &KPoint::origin(1)).unwrap(), p);
    }

    #[test]
    fn dilation_and_norm_examples() {
        let p = KPoint::scalar(1.0, 1.0, 1.0);
        assert_eq!(dilate(2.0, &p).unwrap(), KPoint::scalar(2.0, 8.0, 4.0));
        assert_eq!(dilate(1.0, &p).unwrap(), p);
        assert!(dilate(0.0, &p).is_err());
        assert!(dilate(-1.0, &p).is_err());
        assert_eq!(hom_norm(&KPoint::scalar(1.0, 8.0, 4.0)), 5.0);
        assert_eq!(hom_norm(&KPoint::origin(3)), 0.0);
    }

    #[test]
    fn quasi_distance_example() {
        let d = quasi_distance(&KPoint::scalar(1.0, 2.0, 3.0), &KPoint::scalar(1.0, 0.0, 1.0)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cylinder_examples() {
        let q1 = KCylinder::new(KPoint::origin(1), 1.0).unwrap();
        assert!(q1.contains(&KPoint::scalar(0.0, 0.0, -0.5)).unwrap());
        assert!(!q1.contains(&KPoint::origin(1)).unwrap());
        assert!(!q1.contains(&KPoint::scalar(0.0, 0.0, -1.0)).unwrap());
        assert!(KCylinder::new(KPoint::origin(1), 0.0).is_err());
        assert_eq!(cylinder_volume(1, 0.5), 1.0 * 0.25 * 0.25);
    }

    #[test]
    fn group_axioms_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=3 {
            let e = KPoint::origin(m);
            for _ in 0..100 {
                let (p, q, w) = (random_point(&mut rng, m), random_point(&mut rng, m), random_point(&mut rng, m));
                let lhs = compose(&compose(&p, &q).unwrap(), &w).unwrap();
                let rhs = compose(&p, &compose(&q, &w).unwrap()).unwrap();
                assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
                assert!(compose(&inverse(&p), &p).unwrap().max_abs_diff(&e) <= 1e-12);
                assert!(compose(&p, &inverse(&p)).unwrap().max_abs_diff(&e) <= 1e-12);
                assert_eq!(compose(&e, &p).unwrap(), p);
                assert_eq!(compose(&p, &e).unwrap(), p);
                let back = relative(&compose(&q, &w).unwrap(), &q).unwrap();
                assert!(back.max_abs_diff(&w) <= 1e-12);
            }
        }
    }

    #[test]
    fn relative_matches_inverse_then_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = random_point(&mut rng, 2);
            let q = random_point(&mut rng, 2);
            let a = relative(&p, &q).unwrap();
            let b = compose(&inverse(&q), &p).unwrap();
            assert!(a.max_abs_diff(&b) <= 1e-12);
        }
    }
}
