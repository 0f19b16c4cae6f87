//! Vectorization of linear maps on matrices.
//!
//! The convention is row stacking: `vec(ρ)[i·n + j] = ρ[i, j]`. Under it,
//! `vec(L ρ R) = (L ⊗ Rᵀ) vec(ρ)`.

use super::{check_same_dim, ComplexMatrix, Complex64, ZERO};
use crate::Result;

pub fn vec(m: &ComplexMatrix) -> Vec<Complex64> {
    m.as_slice().to_vec()
}

pub fn unvec(v: &[Complex64]) -> ComplexMatrix {
    let n = (v.len() as f64).sqrt().round() as usize;
    assert_eq!(n * n, v.len(), "vector length is not a square");
    ComplexMatrix::from_row_major(n, v.to_vec()).expect("finite entries")
}

/// Matrix of `ρ ↦ left · ρ · right` acting on row-stacked vectors.
pub fn vectorize_superoperator(left: &ComplexMatrix, right: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(left, right)?;
    let n = left.dim();
    let mut out = ComplexMatrix::zeros(n * n);
    add_kron(&mut out, left, right, Complex64::new(1.0, 0.0));
    Ok(out)
}

/// `out += coeff · left ⊗ rightᵀ`.
pub(crate) fn add_kron(out: &mut ComplexMatrix, left: &ComplexMatrix, right: &ComplexMatrix, coeff: Complex64) {
    let n = left.dim();
    let nn = n * n;
    assert_eq!(out.dim(), nn);
    let data = out.as_mut_slice();
    for i in 0..n {
        for k in 0..n {
            let l = left[(i, k)];
            if l == ZERO {
                continue;
            }
            let lc = l * coeff;
            for j in 0..n {
                let row = (i * n + j) * nn;
                for m in 0..n {
                    // (left ⊗ rightᵀ)[(i,j),(k,m)] = left[i,k] · right[m,j]
                    let r = right[(m, j)];
                    if r != ZERO {
                        data[row + k * n + m] += lc * r;
                    }
                }
            }
        }
    }
}
