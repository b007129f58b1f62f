//! Built-in boundary and source data, referenced by name from a config.
//!
//! | name | parameters | value |
//! |------|------------|-------|
//! | `zero` | | `0` |
//! | `constant:c` | `c` | `c` |
//! | `affine:c0,cx,cy,ct` | | `c0 + cx sum X + cy sum Y + ct t` |
//! | `sines:a,kx,ky,kt` | | `a prod_k sin(kx x_k + 1) sin(ky y_k + 1) * sin(kt t + 1)` |
//! | `checker:lo,hi,cell` | | `lo` or `hi` on a space-time checkerboard of edge `cell` |
//! | `mms` | | manufactured pair, `m = 1` only: the exact solution as `g`, its source as `gstar` |

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use kfp_core::kolgeom::KPoint;
use kfp_core::symbol::{Symbol, SymbolKind};
use kfp_core::viscous::Datum;
use kfp_core::{KfpError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Constant(f64),
    Affine { c0: f64, cx: f64, cy: f64, ct: f64 },
    Sines { amp: f64, kx: f64, ky: f64, kt: f64 },
    Checker { lo: f64, hi: f64, cell: f64 },
    Manufactured,
}

impl FromStr for DataSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let nums = |want: usize| -> std::result::Result<Vec<f64>, String> {
            let a = args.ok_or_else(|| format!("'{name}' needs {want} parameter(s), as in {name}:..."))?;
            let v: Vec<f64> = a
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number '{}' in '{s}'", x.trim())))
                .collect::<std::result::Result<_, _>>()?;
            if v.len() != want {
                return Err(format!("'{name}' needs {want} parameter(s), got {}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(format!("non-finite parameter in '{s}'"));
            }
            Ok(v)
        };
        let none = || -> std::result::Result<(), String> {
            match args {
                Some(_) => Err(format!("'{name}' takes no parameters")),
                None => Ok(()),
            }
        };
        Ok(match name {
            "zero" => {
                none()?;
                DataSpec::Constant(0.0)
            }
            "constant" => DataSpec::Constant(nums(1)?[0]),
            "affine" => {
                let v = nums(4)?;
                DataSpec::Affine { c0: v[0], cx: v[1], cy: v[2], ct: v[3] }
            }
            "sines" => {
                let v = nums(4)?;
                DataSpec::Sines { amp: v[0], kx: v[1], ky: v[2], kt: v[3] }
            }
            "checker" => {
                let v = nums(3)?;
                if !(v[2] > 0.0) {
                    return Err(format!("checker cell must be positive, got {}", v[2]));
                }
                DataSpec::Checker { lo: v[0], hi: v[1], cell: v[2] }
            }
            "mms" => {
                none()?;
                DataSpec::Manufactured
            }
            _ => return Err(format!("unknown data '{name}' (zero, constant, affine, sines, checker, mms)")),
        })
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSpec::Constant(c) => write!(f, "constant:{c}"),
            DataSpec::Affine { c0, cx, cy, ct } => write!(f, "affine:{c0},{cx},{cy},{ct}"),
            DataSpec::Sines { amp, kx, ky, kt } => write!(f, "sines:{amp},{kx},{ky},{kt}"),
            DataSpec::Checker { lo, hi, cell } => write!(f, "checker:{lo},{hi},{cell}"),
            DataSpec::Manufactured => write!(f, "mms"),
        }
    }
}

impl DataSpec {
    pub fn check_dim(&self, m: usize) -> std::result::Result<(), String> {
        if *self == DataSpec::Manufactured && m != 1 {
            return Err(format!("'mms' data is defined for m = 1 only, got m = {m}"));
        }
        Ok(())
    }

    /// Pointwise value, for everything but the manufactured source.
    pub fn value(&self, p: &KPoint) -> f64 {
        match *self {
            DataSpec::Constant(c) => c,
            DataSpec::Affine { c0, cx, cy, ct } => {
                c0 + cx * p.x.iter().sum::<f64>() + cy * p.y.iter().sum::<f64>() + ct * p.t
            }
            DataSpec::Sines { amp, kx, ky, kt } => {
                let s: f64 = p.x.iter().zip(&p.y).map(|(x, y)| (kx * x + 1.0).sin() * (ky * y + 1.0).sin()).product();
                amp * s * (kt * p.t + 1.0).sin()
            }
            DataSpec::Checker { lo, hi, cell } => {
                let k: i64 =
                    p.x.iter().chain(&p.y).chain(std::iter::once(&p.t)).map(|v| (v / cell).floor() as i64).sum();
                if k.rem_euclid(2) == 0 {
                    lo
                } else {
                    hi
                }
            }
            DataSpec::Manufactured => manufactured_solution(p),
        }
    }

    pub fn boundary(&self) -> Datum {
        let d = self.clone();
        Datum::function(move |p| d.value(p))
    }

    /// Source datum; `mms` needs the symbol and viscosity to build the
    /// matching right-hand side.
    pub fn source(&self, symbol: &Symbol, epsilon: f64) -> Result<Datum> {
        match self {
            DataSpec::Manufactured => {
                let a = scalar_coefficient(symbol)?;
                Ok(Datum::function(move |p| manufactured_source(p, a, epsilon)))
            }
            _ => Ok(self.boundary()),
        }
    }
}

/// Coefficient `a` of a constant scalar symbol `A(xi) = a xi` in `m = 1`.
fn scalar_coefficient(s: &Symbol) -> Result<f64> {
    if s.dim() != 1 {
        return Err(KfpError::Unsupported("manufactured source needs m = 1".into()));
    }
    match s.kind() {
        SymbolKind::Identity => Ok(1.0),
        SymbolKind::Matrix { a, .. } => Ok(a[(0, 0)]),
        _ => Err(KfpError::Unsupported(format!("manufactured source needs a constant symbol, got {}", s.name()))),
    }
}

/// `sin(pi x / 2) cos(pi y / 2) e^{-t} + x / 2 + 1 / 4`.
pub fn manufactured_solution(p: &KPoint) -> f64 {
    let (x, y) = (p.x[0], p.y[0]);
    (FRAC_PI_2 * x).sin() * (FRAC_PI_2 * y).cos() * (-p.t).exp() + 0.5 * x + 0.25
}

/// `a u_xx + eps u_yy - u_t - x u_y` of the manufactured solution.
pub fn manufactured_source(p: &KPoint, a: f64, epsilon: f64) -> f64 {
    let (x, y) = (p.x[0], p.y[0]);
    let k = FRAC_PI_2;
    let e = (-p.t).exp();
    let s = (k * x).sin();
    s * (k * y).cos() * e * (1.0 - (a + epsilon) * k * k) + x * k * s * (k * y).sin() * e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in ["constant:3", "affine:1,2,3,4", "sines:1,0.5,2,1", "checker:1,4,0.25", "mms"] {
            let d: DataSpec = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert_eq!("zero".parse::<DataSpec>().unwrap(), DataSpec::Constant(0.0));
    }

    #[test]
    fn bad_names() {
        for s in ["teapot", "constant", "constant:x", "affine:1,2", "mms:1", "checker:1,2,0", "zero:1"] {
            assert!(s.parse::<DataSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn manufactured_source_matches_differences() {
        let p = KPoint::scalar(0.3, -0.4, 0.6);
        let h = 1e-4;
        let u = |dx: f64, dy: f64, dt: f64| manufactured_solution(&KPoint::scalar(p.x[0] + dx, p.y[0] + dy, p.t + dt));
        let uxx = (u(h, 0.0, 0.0) - 2.0 * u(0.0, 0.0, 0.0) + u(-h, 0.0, 0.0)) / (h * h);
        let uyy = (u(0.0, h, 0.0) - 2.0 * u(0.0, 0.0, 0.0) + u(0.0, -h, 0.0)) / (h * h);
        let ut = (u(0.0, 0.0, h) - u(0.0, 0.0, -h)) / (2.0 * h);
        let uy = (u(0.0, h, 0.0) - u(0.0, -h, 0.0)) / (2.0 * h);
        let (a, eps) = (1.7, 0.01);
        let fd = a * uxx + eps * uyy - ut - p.x[0] * uy;
        assert!((fd - manufactured_source(&p, a, eps)).abs() < 1e-6);
    }

    #[test]
    fn checker_alternates() {
        let d = DataSpec::Checker { lo: 1.0, hi: 4.0, cell: 0.5 };
        assert_eq!(d.value(&KPoint::scalar(0.1, 0.1, 0.1)), 1.0);
        assert_eq!(d.value(&KPoint::scalar(0.6, 0.1, 0.1)), 4.0);
        assert_eq!(d.value(&KPoint::scalar(-0.1, 0.1, 0.1)), 4.0);
    }
}
