use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::LatticeGeometry;
use crate::linalg::{ComplexMatrix, Complex64, SparseMatrix};
use crate::sampling::ModelRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KrausKind {
    /// `W_j = sqrt(g) |j⟩⟨j|` on every site.
    Dephasing,
    /// `W_j = sqrt(g) |j⟩⟨j+1|` for `j = −M … M−1`.
    DirectedJump,
    /// Caller-supplied operators.
    Custom,
}

impl FromStr for KrausKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(KrausKind::Dephasing),
            "directed_jump" => Ok(KrausKind::DirectedJump),
            "custom" => Ok(KrausKind::Custom),
            other => Err(Error::rejected(format!(
                "unknown Kraus family kind '{other}' (expected dephasing, directed_jump or custom)"
            ))),
        }
    }
}

impl fmt::Display for KrausKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KrausKind::Dephasing => "dephasing",
            KrausKind::DirectedJump => "directed_jump",
            KrausKind::Custom => "custom",
        })
    }
}

/// The Kraus (Lindblad) operators `W_j` of a model.
///
/// Operators are held row-compressed; the lattice families have one
/// nonzero each.
#[derive(Debug, Clone)]
pub struct KrausFamily {
    kind: KrausKind,
    strength: f64,
    dim: usize,
    operators: Vec<SparseMatrix>,
}

impl KrausFamily {
    /// Validates caller-supplied operators; `strength` is recorded as the
    /// family's rate scale and is not applied to the matrices.
    pub fn custom(dim: usize, strength: f64, operators: Vec<ComplexMatrix>) -> Result<Self> {
        check_strength(strength)?;
        for (j, w) in operators.iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::rejected(format!(
                    "Kraus operator {j} has dimension {}, expected {dim}",
                    w.dim()
                )));
            }
            if !w.is_finite() {
                return Err(Error::rejected(format!("Kraus operator {j} has non-finite entries")));
            }
        }
        Ok(KrausFamily {
            kind: KrausKind::Custom,
            strength,
            dim,
            operators: operators.iter().map(SparseMatrix::from_dense).collect(),
        })
    }

    /// Random nearest-neighbour channels: one operator per bond `(j, j+1)`
    /// with a random 2×2 block of Frobenius norm `sqrt(g)`.
    pub fn random_local(geometry: &LatticeGeometry, strength: f64, rng: &mut ModelRng) -> Result<Self> {
        check_strength(strength)?;
        let n = geometry.n_sites();
        let mut operators = Vec::with_capacity(n - 1);
        for j in 0..n - 1 {
            let block: Vec<Complex64> = (0..4).map(|_| rng.complex()).collect();
            let norm = block.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let scale = strength.sqrt() / norm;
            let idx = [(j, j), (j, j + 1), (j + 1, j), (j + 1, j + 1)];
            let trip = idx.iter().zip(&block).map(|(&(r, c), &v)| (r, c, v * scale));
            operators.push(SparseMatrix::from_triplets(n, trip)?);
        }
        Ok(KrausFamily {
            kind: KrausKind::Custom,
            strength,
            dim: n,
            operators,
        })
    }

    pub fn kind(&self) -> KrausKind {
        self.kind
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[SparseMatrix] {
        &self.operators
    }

    pub fn dense_operators(&self) -> Vec<ComplexMatrix> {
        self.operators.iter().map(SparseMatrix::to_dense).collect()
    }

    /// True when every operator is exactly zero.
    pub fn is_trivial(&self) -> bool {
        self.operators.iter().all(SparseMatrix::is_zero)
    }

    /// `Σ_j W_j† W_j`.
    pub fn gram_sum(&self) -> SparseMatrix {
        self.operators
            .iter()
            .fold(SparseMatrix::zeros(self.dim), |acc, w| acc.add(&w.adjoint().matmul(w)))
    }
}

fn check_strength(g: f64) -> Result<()> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::rejected(format!("Kraus strength must be finite and nonnegative, got {g}")));
    }
    Ok(())
}

/// Builds one of the lattice families. `Custom` families come from
/// [`KrausFamily::custom`] and are rejected here.
pub fn build_kraus_family(kind: KrausKind, strength: f64, geometry: &LatticeGeometry) -> Result<KrausFamily> {
    check_strength(strength)?;
    let n = geometry.n_sites();
    let amp = Complex64::new(strength.sqrt(), 0.0);
    let operators = match kind {
        KrausKind::Dephasing => (0..n)
            .map(|j| SparseMatrix::from_triplets(n, [(j, j, amp)]))
            .collect::<Result<Vec<_>>>()?,
        KrausKind::DirectedJump => (0..n - 1)
            .map(|j| SparseMatrix::from_triplets(n, [(j, j + 1, amp)]))
            .collect::<Result<Vec<_>>>()?,
        KrausKind::Custom => {
            return Err(Error::rejected(
                "custom Kraus families must be supplied explicitly",
            ))
        }
    };
    Ok(KrausFamily {
        kind,
        strength,
        dim: n,
        operators,
    })
}
