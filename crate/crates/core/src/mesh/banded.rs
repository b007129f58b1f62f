use crate::error::{KfpError, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, factored by
/// LU without pivoting. Intended for diagonally dominant systems.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    factored: bool,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width], factored: false }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * self.width + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pos(i, j).map_or(0.0, |p| self.data[p])
    }

    /// Adds `v` at `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.pos(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[p] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[i * self.width + j + self.kl - i] * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        for k in 0..n {
            let pivot = self.data[k * w + kl];
            if !(pivot.abs() > 1e-300) || !pivot.is_finite() {
                return Err(KfpError::Singular { row: k, pivot });
            }
            let imax = (k + kl).min(n - 1);
            let jmax = (k + ku).min(n - 1);
            for i in k + 1..=imax {
                let pik = i * w + k + kl - i;
                let l = self.data[pik] / pivot;
                self.data[pik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let a = self.data[k * w + j + kl - k];
                    self.data[i * w + j + kl - i] -= l * a;
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert!(self.factored, "factor() must be called before solve");
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let mut s = b[i];
            for j in lo..i {
                s -= self.data[i * w + j + kl - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=hi {
                s -= self.data[i * w + j + kl - i] * b[j];
            }
            b[i] = s / self.data[i * w + kl];
        }
    }
}
