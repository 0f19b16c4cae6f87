//! Banded LU with partial pivoting for the vectorized generator, whose
//! lower and upper bandwidths are about `N` for local lattice models.

use super::{Complex64, SparseMatrix, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Factors `A + shift·I`.
    pub fn new(a: &SparseMatrix, shift: Complex64) -> Result<Self> {
        let n = a.dim();
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in a.entries() {
            kl = kl.max(i.saturating_sub(j));
            ku = ku.max(j.saturating_sub(i));
        }
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![ZERO; n * width],
            pivots: vec![0; n],
        };
        for (i, j, v) in a.entries() {
            let k = lu.idx(i, j);
            lu.data[k] += v;
        }
        for i in 0..n {
            let k = lu.idx(i, i);
            lu.data[k] += shift;
        }
        let scale = lu.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        lu.factor(scale)?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `(lower, upper)` bandwidths of the input.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.width + c + self.kl - r
    }

    fn last_col(&self, k: usize) -> usize {
        (k + self.kl + self.ku).min(self.n - 1)
    }

    fn factor(&mut self, scale: f64) -> Result<()> {
        let n = self.n;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for r in k + 1..=last_row {
                let v = self.data[self.idx(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::numeric(format!("banded LU: pivot {best:e} at column {k} is numerically zero")));
            }
            self.pivots[k] = p;
            let last = self.last_col(k);
            if p != k {
                for c in k..=last {
                    let (a, b) = (self.idx(k, c), self.idx(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            let row_k: Vec<Complex64> = (k + 1..=last).map(|c| self.data[self.idx(k, c)]).collect();
            for r in k + 1..=last_row {
                let rk = self.idx(r, k);
                if self.data[rk] == ZERO {
                    continue;
                }
                let m = self.data[rk] / pivot;
                self.data[rk] = m;
                let start = self.idx(r, k + 1);
                for (dst, src) in self.data[start..start + row_k.len()].iter_mut().zip(&row_k) {
                    *dst -= m * src;
                }
            }
        }
        Ok(())
    }

    /// Overwrites `b` with the solution of `(A + shift) x = b`.
    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                b[r] -= self.data[self.idx(r, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let start = self.idx(k, k + 1);
            let len = self.last_col(k) - k;
            let sum: Complex64 = self.data[start..start + len]
                .iter()
                .zip(&b[k + 1..k + 1 + len])
                .map(|(a, x)| a * x)
                .sum();
            b[k] = (b[k] - sum) / self.data[self.idx(k, k)];
        }
    }

    /// Overwrites `b` with the solution of `(A + shift)† x = b`.
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            b[k] /= self.data[self.idx(k, k)].conj();
            let yk = b[k];
            let start = self.idx(k, k + 1);
            let len = self.last_col(k) - k;
            for (dst, a) in b[k + 1..k + 1 + len].iter_mut().zip(&self.data[start..start + len]) {
                *dst -= a.conj() * yk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                acc -= self.data[self.idx(r, k)].conj() * b[r];
            }
            b[k] = acc;
            b.swap(k, self.pivots[k]);
        }
    }
}
