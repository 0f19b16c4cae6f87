use super::{ComplexMatrix, Complex64, ZERO};
use crate::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let data = lu.as_mut_slice();
        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|i| (i, data[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::numeric(format!("singular matrix at pivot {k}")));
            }
            if pivot_row != k {
                for j in 0..n {
                    data.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = data[k * n + k];
            let (upper, lower) = data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor == ZERO {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= factor * u;
                }
            }
        }
        Ok(LuFactors { lu, perm })
    }

    pub fn solve_vector(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n);
        let lu = self.lu.as_slice();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &lu[i * n..i * n + i];
            let acc: Complex64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= acc;
        }
        for i in (0..n).rev() {
            let row = &lu[i * n..(i + 1) * n];
            let acc: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - acc) / row[i];
        }
        x
    }
}

/// Solves `A X = B` by LU factorization with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    super::check_same_dim(a, b)?;
    let n = a.dim();
    let factors = LuFactors::new(a)?;
    let mut x = ComplexMatrix::zeros(n);
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| b[(i, j)]).collect();
        for (i, v) in factors.solve_vector(&col).into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Ok(x)
}
