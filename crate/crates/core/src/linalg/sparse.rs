//! Row-compressed operators for the local Hamiltonians and Kraus operators.
//!
//! Lattice operators have a handful of nonzeros per row, while the states
//! they act on are dense. Products of a sparse operator with a dense state
//! cost `nnz · dim` instead of `dim³`.

use std::collections::BTreeMap;

use super::{operator_norm, ComplexMatrix, Complex64, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    /// Sums duplicate entries and drops exact zeros.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); dim];
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::rejected(format!(
                    "entry ({i}, {j}) outside a {dim}x{dim} operator"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::rejected(format!("non-finite entry at ({i}, {j})")));
            }
            *rows[i].entry(j).or_insert(ZERO) += v;
        }
        Ok(SparseMatrix {
            dim,
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().filter(|(_, v)| *v != ZERO).collect())
                .collect(),
        })
    }

    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        SparseMatrix {
            dim: n,
            rows: (0..n)
                .map(|i| {
                    m.row(i)
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != ZERO)
                        .map(|(j, &v)| (j, v))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        SparseMatrix {
            dim: values.len(),
            rows: values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v != 0.0 {
                        vec![(i, Complex64::new(v, 0.0))]
                    } else {
                        Vec::new()
                    }
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i]
            .iter()
            .find(|(col, _)| *col == j)
            .map(|&(_, v)| v)
            .unwrap_or(ZERO)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, j, v) in self.entries() {
            rows[j].push((i, v.conj()));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
        }
        SparseMatrix { dim: self.dim, rows }
    }

    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&(j, v)| (j, f(i, j, v)))
                    .filter(|(_, v)| *v != ZERO)
                    .collect()
            })
            .collect();
        SparseMatrix { dim: self.dim, rows }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_entries(|_, _, v| v * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.entries().chain(other.entries()))
            .expect("entries of valid operators")
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let triplets = self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter().flat_map(move |&(k, a)| {
                other.rows[k].iter().map(move |&(j, b)| (i, j, a * b))
            })
        });
        Self::from_triplets(self.dim, triplets).expect("entries of valid operators")
    }

    /// `out += coeff · S · B`.
    pub fn add_mul_dense(&self, b: &ComplexMatrix, coeff: Complex64, out: &mut ComplexMatrix) {
        let n = self.dim;
        assert_eq!(b.dim(), n);
        assert_eq!(out.dim(), n);
        let bs = b.as_slice();
        let os = out.as_mut_slice();
        for (i, row) in self.rows.iter().enumerate() {
            let out_row = &mut os[i * n..(i + 1) * n];
            for &(k, v) in row {
                let c = v * coeff;
                for (o, &x) in out_row.iter_mut().zip(&bs[k * n..(k + 1) * n]) {
                    *o += c * x;
                }
            }
        }
    }

    /// `out += coeff · B · S`.
    pub fn add_dense_mul(&self, b: &ComplexMatrix, coeff: Complex64, out: &mut ComplexMatrix) {
        let n = self.dim;
        assert_eq!(b.dim(), n);
        assert_eq!(out.dim(), n);
        let bs = b.as_slice();
        let os = out.as_mut_slice();
        for i in 0..n {
            let b_row = &bs[i * n..(i + 1) * n];
            let out_row = &mut os[i * n..(i + 1) * n];
            for (k, row) in self.rows.iter().enumerate() {
                let x = b_row[k];
                if x == ZERO {
                    continue;
                }
                let c = x * coeff;
                for &(j, v) in row {
                    out_row[j] += c * v;
                }
            }
        }
    }

    /// `out += coeff · S · B · S†`, costing `nnz²` operations.
    pub fn add_sandwich(&self, b: &ComplexMatrix, coeff: Complex64, out: &mut ComplexMatrix) {
        let n = self.dim;
        assert_eq!(b.dim(), n);
        for (a, row_a) in self.rows.iter().enumerate() {
            for &(c, wa) in row_a {
                let lhs = wa * coeff;
                for (bb, row_b) in self.rows.iter().enumerate() {
                    for &(d, wb) in row_b {
                        out[(a, bb)] += lhs * b[(c, d)] * wb.conj();
                    }
                }
            }
        }
    }

    pub fn mul_dense(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        self.add_mul_dense(b, super::ONE, &mut out);
        out
    }

    pub fn dense_mul(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        self.add_dense_mul(b, super::ONE, &mut out);
        out
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    /// True when every row and column holds at most one nonzero.
    fn is_monomial(&self) -> bool {
        let mut col_seen = vec![false; self.dim];
        for row in &self.rows {
            if row.len() > 1 {
                return false;
            }
            if let Some(&(j, _)) = row.first() {
                if col_seen[j] {
                    return false;
                }
                col_seen[j] = true;
            }
        }
        true
    }

    /// Largest singular value. Monomial patterns (at most one nonzero per
    /// row and column) are exact in closed form; anything else is densified.
    pub fn operator_norm(&self) -> Result<f64> {
        if self.is_monomial() {
            return Ok(self.entries().map(|(_, _, v)| v.norm()).fold(0.0, f64::max));
        }
        operator_norm(&self.to_dense())
    }
}
