use serde::Serialize;

use crate::linalg::{ComplexMatrix, SparseMatrix};
use crate::{Error, Result};

/// Sites `x ∈ {−M, …, M}` with the position weight `⟨x⟩ = sqrt(1 + x²)`.
///
/// Index `i` holds position `x = i − M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeGeometry {
    half_width: usize,
    weights: Vec<f64>,
}

impl LatticeGeometry {
    pub fn new(half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::rejected("lattice half width must be positive"));
        }
        let weights = (0..2 * half_width + 1)
            .map(|i| {
                let x = i as f64 - half_width as f64;
                x.hypot(1.0)
            })
            .collect();
        Ok(LatticeGeometry { half_width, weights })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn n_sites(&self) -> usize {
        self.weights.len()
    }

    pub fn position(&self, index: usize) -> i64 {
        index as i64 - self.half_width as i64
    }

    pub fn index_of(&self, x: i64) -> Option<usize> {
        let i = x + self.half_width as i64;
        (0..self.n_sites() as i64).contains(&i).then_some(i as usize)
    }

    /// `⟨x⟩` per site, in index order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.weights)
    }

    pub fn weight_sparse(&self) -> SparseMatrix {
        SparseMatrix::diagonal(&self.weights)
    }

    /// `⟨M⟩`, the largest weight on the lattice.
    pub fn max_weight(&self) -> f64 {
        (self.half_width as f64).hypot(1.0)
    }
}
