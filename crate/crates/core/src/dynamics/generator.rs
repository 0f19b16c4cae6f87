use crate::linalg::{check_same_dim, ComplexMatrix, Complex64, SparseMatrix};
use crate::model::ModelSpec;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MINUS_HALF: Complex64 = Complex64::new(-0.5, 0.0);

/// A model's generator in a form ready for repeated application.
///
/// Uses the expanded dissipator
/// `½Σ([W, ρW†] + [Wρ, W†]) = Σ W ρ W† − ½{K, ρ}` with `K = Σ W†W`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    hamiltonian: SparseMatrix,
    kraus: Vec<SparseMatrix>,
    kraus_adjoint: Vec<SparseMatrix>,
    gram: SparseMatrix,
    hamiltonian_norm: f64,
    strength: f64,
}

impl Liouvillian {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let hamiltonian = spec.hamiltonian()?;
        let kraus: Vec<SparseMatrix> = spec
            .kraus
            .operators()
            .iter()
            .filter(|w| !w.is_zero())
            .cloned()
            .collect();
        let kraus_adjoint = kraus.iter().map(SparseMatrix::adjoint).collect();
        let hamiltonian_norm = hamiltonian.operator_norm()?;
        Ok(Liouvillian {
            dim: spec.n_sites(),
            hamiltonian,
            kraus,
            kraus_adjoint,
            gram: spec.kraus.gram_sum(),
            hamiltonian_norm,
            strength: spec.kraus.strength(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &SparseMatrix {
        &self.hamiltonian
    }

    pub fn hamiltonian_norm(&self) -> f64 {
        self.hamiltonian_norm
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::rejected(format!(
                "operator of dimension {} for a model with {} sites",
                m.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `L ρ = −i[H, ρ] + Σ W ρ W† − ½{K, ρ}`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(rho)?;
        let mut out = ComplexMatrix::zeros(self.dim);
        self.hamiltonian.add_mul_dense(rho, -I, &mut out);
        self.hamiltonian.add_dense_mul(rho, I, &mut out);
        for w in &self.kraus {
            w.add_sandwich(rho, ONE, &mut out);
        }
        self.gram.add_mul_dense(rho, MINUS_HALF, &mut out);
        self.gram.add_dense_mul(rho, MINUS_HALF, &mut out);
        Ok(out)
    }

    /// `L' A = i[H, A] + Σ W† A W − ½{K, A}`.
    pub fn apply_dual(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(a)?;
        let mut out = ComplexMatrix::zeros(self.dim);
        self.hamiltonian.add_mul_dense(a, I, &mut out);
        self.hamiltonian.add_dense_mul(a, -I, &mut out);
        for w in &self.kraus_adjoint {
            w.add_sandwich(a, ONE, &mut out);
        }
        self.gram.add_mul_dense(a, MINUS_HALF, &mut out);
        self.gram.add_dense_mul(a, MINUS_HALF, &mut out);
        Ok(out)
    }

    /// Matrix of `L` on row-stacked vectors (dimension `N²`).
    pub fn superoperator(&self) -> ComplexMatrix {
        self.superoperator_sparse().to_dense()
    }

    /// Row-compressed form of [`Liouvillian::superoperator`]. Local models
    /// give a banded matrix of bandwidth about `N`.
    pub fn superoperator_sparse(&self) -> SparseMatrix {
        let n = self.dim;
        let mut triplets = Vec::new();
        // left ⊗ rightᵀ: [(i,j),(k,m)] += left[i,k] · right[m,j]
        let mut add_kron = |left: &[(usize, usize, Complex64)], right: &[(usize, usize, Complex64)], c: Complex64| {
            for &(i, k, l) in left {
                for &(m, j, r) in right {
                    triplets.push((i * n + j, k * n + m, c * l * r));
                }
            }
        };
        let identity: Vec<_> = (0..n).map(|i| (i, i, ONE)).collect();
        let h: Vec<_> = self.hamiltonian.entries().collect();
        let g: Vec<_> = self.gram.entries().collect();
        add_kron(&h, &identity, -I);
        add_kron(&identity, &h, I);
        add_kron(&g, &identity, MINUS_HALF);
        add_kron(&identity, &g, MINUS_HALF);
        for (w, wa) in self.kraus.iter().zip(&self.kraus_adjoint) {
            let left: Vec<_> = w.entries().collect();
            let right: Vec<_> = wa.entries().collect();
            add_kron(&left, &right, ONE);
        }
        SparseMatrix::from_triplets(n * n, triplets).expect("indices lie inside the superoperator")
    }

    /// Largest of `‖H‖`, the Kraus strength and 1.
    pub fn rate_scale(&self) -> f64 {
        self.hamiltonian_norm.max(self.strength).max(1.0)
    }
}

pub fn apply_generator(spec: &ModelSpec, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    Liouvillian::new(spec)?.apply(rho)
}

pub fn apply_dual(spec: &ModelSpec, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Liouvillian::new(spec)?.apply_dual(a)
}

/// `D Φ = L'Φ + ∂_t Φ`.
pub fn heisenberg_derivative(
    spec: &ModelSpec,
    phi: &ComplexMatrix,
    dphi_dt: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_same_dim(phi, dphi_dt)?;
    let mut out = apply_dual(spec, phi)?;
    out += dphi_dt;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::*;
    use crate::linalg::{commutator, unvec, vec};
    use crate::model::{build_hamiltonian, KrausFamily, KrausKind, LatticeGeometry};
    use crate::sampling::ModelRng;

    /// The generator exactly as the master equation writes it, dense.
    fn literal_generator(spec: &ModelSpec, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = build_hamiltonian(spec).unwrap();
        let mut out = commutator(&h, rho).unwrap().scale(-I);
        for w in spec.kraus.dense_operators() {
            let wd = w.adjoint();
            let a = commutator(&w, &rho.matmul(&wd)).unwrap();
            let b = commutator(&w.matmul(rho), &wd).unwrap();
            out += &(&a + &b).scale_real(0.5);
        }
        out
    }

    fn random_spec(seed: u64) -> ModelSpec {
        let geometry = LatticeGeometry::new(3).unwrap();
        let mut rng = ModelRng::new(seed);
        let kraus = KrausFamily::random_local(&geometry, 0.8, &mut rng).unwrap();
        let potential = (0..7).map(|_| rng.symmetric()).collect();
        ModelSpec::new(geometry, 1.0, 2, potential, kraus, 3).unwrap()
    }

    #[test]
    fn trivial_generator_is_zero() {
        let spec = ModelSpec::chain(2, 0.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let mut rng = TestRng::new(1);
        assert_eq!(apply_generator(&spec, &rng.density(5)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn expanded_form_matches_literal_form() {
        let mut rng = TestRng::new(2);
        for seed in 0..5 {
            let spec = random_spec(seed);
            let rho = rng.matrix(7);
            assert_close(&apply_generator(&spec, &rho).unwrap(), &literal_generator(&spec, &rho), 1e-12);
        }
    }

    #[test]
    fn output_is_traceless_and_hermitian() {
        let mut rng = TestRng::new(3);
        for seed in 0..10 {
            let spec = random_spec(seed);
            let rho = rng.density(7);
            let out = apply_generator(&spec, &rho).unwrap();
            assert!(out.trace().norm() < 1e-13);
            assert!(out.hermiticity_defect() < 1e-12);
            // trace annihilation holds for non-Hermitian input too
            let any = rng.matrix(7);
            assert!(apply_generator(&spec, &any).unwrap().trace().norm() < 1e-12);
        }
    }

    #[test]
    fn dephasing_kills_coherence_at_rate_g() {
        let g = 0.7;
        let spec = ModelSpec::chain(1, 0.0, KrausKind::Dephasing, g, 2).unwrap();
        let geom = &spec.geometry;
        let (i0, i1) = (geom.index_of(0).unwrap(), geom.index_of(1).unwrap());
        let rho = ComplexMatrix::unit(3, i0, i1);
        let out = apply_generator(&spec, &rho).unwrap();
        assert_close(&out, &rho.scale_real(-g), 1e-15);
    }

    #[test]
    fn dual_is_unital() {
        for seed in 0..5 {
            let spec = random_spec(seed);
            assert!(apply_dual(&spec, &ComplexMatrix::identity(7)).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn dual_of_diagonal_vanishes_under_pure_dephasing() {
        let spec = ModelSpec::chain(3, 0.0, KrausKind::Dephasing, 1.3, 2).unwrap();
        let weight = spec.geometry.weight_matrix();
        assert!(apply_dual(&spec, &weight).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn duality_on_random_pairs() {
        let mut rng = TestRng::new(4);
        for trial in 0..100 {
            let spec = random_spec(trial % 7);
            let (a, rho) = (rng.hermitian(7), rng.hermitian(7));
            let lhs = a.trace_product(&apply_generator(&spec, &rho).unwrap());
            let rhs = apply_dual(&spec, &a).unwrap().trace_product(&rho);
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }

    #[test]
    fn superoperator_matches_apply() {
        let mut rng = TestRng::new(5);
        let spec = random_spec(9);
        let liou = Liouvillian::new(&spec).unwrap();
        let s = liou.superoperator();
        let rho = rng.matrix(7);
        assert_close(&unvec(&s.matvec(&vec(&rho))), &liou.apply(&rho).unwrap(), 1e-12);
    }

    #[test]
    fn heisenberg_derivative_of_identity() {
        let spec = random_spec(1);
        let id = ComplexMatrix::identity(7);
        let d = heisenberg_derivative(&spec, &id, &ComplexMatrix::zeros(7)).unwrap();
        assert!(d.max_abs() < 1e-12);
        let trivial = ModelSpec::chain(3, 0.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let mut rng = TestRng::new(6);
        let phi = rng.hermitian(7);
        let d = heisenberg_derivative(&trivial, &phi, &ComplexMatrix::zeros(7)).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = random_spec(0);
        assert!(apply_generator(&spec, &ComplexMatrix::zeros(3)).is_err());
        assert!(apply_dual(&spec, &ComplexMatrix::zeros(3)).is_err());
        assert!(heisenberg_derivative(&spec, &ComplexMatrix::zeros(7), &ComplexMatrix::zeros(3)).is_err());
    }
}
