//! Binary field snapshots.
//!
//! Layout, all little endian: the magic `KFP1`; `u32` values `m, nx, ny, nt`;
//! `f64` bounds `x` (`m` pairs), `y` (`m` pairs), `t` (one pair); then the
//! field values in storage order.

use std::io::{Read, Write};

use super::{build_grid, BoxDomain, Field};
use crate::error::{KfpError, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"KFP1";

pub fn write_snapshot(u: &Field, out: &mut impl Write) -> Result<()> {
    let g = &u.grid;
    let mut buf = Vec::with_capacity(32 + 8 * u.values.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    for v in [g.m(), g.nx, g.ny, g.nt] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    let d = &g.domain;
    for &(a, b) in d.x.iter().chain(&d.y).chain(std::iter::once(&d.t)) {
        buf.extend_from_slice(&a.to_le_bytes());
        buf.extend_from_slice(&b.to_le_bytes());
    }
    for v in &u.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(input: &mut impl Read) -> Result<Field> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        if pos + n > bytes.len() {
            return Err(KfpError::Format("snapshot truncated".into()));
        }
        pos += n;
        Ok(&bytes[pos - n..pos])
    };
    if take(4)? != SNAPSHOT_MAGIC {
        return Err(KfpError::Format("bad snapshot magic".into()));
    }
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        *d = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    }
    let [m, nx, ny, nt] = dims;
    if m == 0 || m > 8 {
        return Err(KfpError::Format(format!("unsupported dimension {m}")));
    }
    let mut f = || -> Result<f64> { Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())) };
    let mut pairs = Vec::with_capacity(2 * m + 1);
    for _ in 0..2 * m + 1 {
        pairs.push((f()?, f()?));
    }
    let t = pairs.pop().unwrap();
    let y = pairs.split_off(m);
    let grid = build_grid(BoxDomain::new(pairs, y, t).map_err(|e| KfpError::Format(e.to_string()))?, nx, ny, nt)
        .map_err(|e| KfpError::Format(e.to_string()))?;
    let n = grid.node_count();
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f()?);
    }
    drop(f);
    if pos != bytes.len() {
        return Err(KfpError::Format("trailing bytes after snapshot".into()));
    }
    Field::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;

    #[test]
    fn roundtrip_is_bit_exact() {
        let d = BoxDomain::cube(2, (-1.0, 1.0), (-0.5, 0.5), (-1.0, 0.0)).unwrap();
        let g = build_grid(d, 4, 3, 3).unwrap();
        let u = Field::from_fn(g, |p| (p.x[0] * 3.1).sin() + p.y[1] / 7.0 + p.t.exp());
        let mut buf = Vec::new();
        write_snapshot(&u, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"KFP1");
        assert_eq!(buf.len(), 4 + 16 + 16 * 5 + 8 * u.values.len());
        let v = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(*v.grid, *u.grid);
        assert!(u.values.iter().zip(&v.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let g = build_grid(BoxDomain::unit(1), 3, 3, 2).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&Field::constant(g, 1.0), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_snapshot(&mut bad.as_slice()), Err(KfpError::Format(_))));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(read_snapshot(&mut &short[..]), Err(KfpError::Format(_))));
    }
}
