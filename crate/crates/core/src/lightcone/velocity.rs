use serde::Serialize;

use crate::dynamics::Liouvillian;
use crate::linalg::{hermitian_eigvals, ComplexMatrix, Complex64, SparseMatrix};
use crate::model::{iterated_adjoint_sparse, ModelSpec};
use crate::tolerances::GAMMA_IDENTITY;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `γ = i[H, ⟨x⟩] + ½ Σ_j (W_j†[⟨x⟩, W_j] + [W_j†, ⟨x⟩] W_j)` and `κ = ‖γ‖`.
#[derive(Debug, Clone, Serialize)]
pub struct VelocityReport {
    #[serde(skip)]
    pub gamma: ComplexMatrix,
    pub kappa: f64,
    /// `‖ad_⟨x⟩(H)‖ = ‖i[H, ⟨x⟩]‖`.
    pub hamiltonian_speed: f64,
    /// `κ − ‖ad_⟨x⟩(H)‖`; negative when the environment slows propagation.
    pub environment_shift: f64,
    /// `max |γ − L'⟨x⟩|` over entries.
    pub dual_mismatch: f64,
}

pub fn velocity_operator(spec: &ModelSpec) -> Result<VelocityReport> {
    let geometry = &spec.geometry;
    let w = geometry.weights();
    let n = geometry.n_sites();

    // i[H, ⟨x⟩] has entries i H_xy (⟨y⟩ − ⟨x⟩) = i ad(H).
    let hamiltonian_part = iterated_adjoint_sparse(&spec.hamiltonian()?, geometry, 1)?.scale(I);
    let mut gamma = hamiltonian_part.to_dense();

    let half = Complex64::new(0.5, 0.0);
    for op in spec.kraus.operators().iter().filter(|op| !op.is_zero()) {
        let adjoint = op.adjoint();
        // [⟨x⟩, W]_xy = (⟨x⟩ − ⟨y⟩) W_xy and [W†, ⟨x⟩]_xy = W†_xy (⟨y⟩ − ⟨x⟩)
        let x_w = op.map_entries(|x, y, v| v * (w[x] - w[y]));
        let wd_x = adjoint.map_entries(|x, y, v| v * (w[y] - w[x]));
        let term = adjoint.matmul(&x_w).add(&wd_x.matmul(op));
        for (x, y, v) in term.entries() {
            gamma[(x, y)] += half * v;
        }
    }

    let dual = Liouvillian::new(spec)?.apply_dual(&geometry.weight_matrix())?;
    let dual_mismatch = (&gamma - &dual).max_abs();
    if dual_mismatch > GAMMA_IDENTITY {
        return Err(Error::numeric(format!(
            "γ differs from L'⟨x⟩ by {dual_mismatch:e}"
        )));
    }

    let kappa = spectral_radius(&gamma)?;
    let hamiltonian_speed = sparse_spectral_radius(&hamiltonian_part, n)?;
    Ok(VelocityReport {
        gamma,
        kappa,
        hamiltonian_speed,
        environment_shift: kappa - hamiltonian_speed,
        dual_mismatch,
    })
}

/// Largest absolute eigenvalue of a Hermitian matrix, which is its norm.
pub(crate) fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eigvals(&a.hermitian_part())?;
    Ok(eig[0].abs().max(eig[eig.len() - 1].abs()))
}

fn sparse_spectral_radius(a: &SparseMatrix, n: usize) -> Result<f64> {
    if a.is_zero() {
        return Ok(0.0);
    }
    debug_assert_eq!(a.dim(), n);
    spectral_radius(&a.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::apply_dual;
    use crate::linalg::{commutator, operator_norm};
    use crate::model::{build_hamiltonian, KrausFamily, KrausKind, LatticeGeometry};
    use crate::sampling::ModelRng;
    use crate::tolerances::KAPPA_EIGEN;

    #[test]
    fn dephasing_without_hopping_has_no_speed() {
        let spec = ModelSpec::chain(3, 0.0, KrausKind::Dephasing, 1.0, 2).unwrap();
        let v = velocity_operator(&spec).unwrap();
        assert_eq!(v.kappa, 0.0);
        assert_eq!(v.gamma.max_abs(), 0.0);
    }

    #[test]
    fn closed_system_speed_is_the_hamiltonian_one() {
        let spec = ModelSpec::chain(4, 1.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let v = velocity_operator(&spec).unwrap();
        assert_eq!(v.environment_shift, 0.0);
        assert!(v.kappa > 0.0);
    }

    #[test]
    fn three_site_chain_matches_brute_force() {
        let spec = ModelSpec::chain(1, 1.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let v = velocity_operator(&spec).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let x = spec.geometry.weight_matrix();
        let brute = operator_norm(&commutator(&h, &x).unwrap().scale(I)).unwrap();
        assert!((v.kappa - brute).abs() < 1e-12);
        // i[H,⟨x⟩] has off-diagonal magnitudes d = sqrt2 − 1 on both bonds, so κ = sqrt2·d
        let d = 2f64.sqrt() - 1.0;
        assert!((v.kappa - 2f64.sqrt() * d).abs() < 1e-14);
    }

    #[test]
    fn gamma_is_the_dual_of_the_position_weight() {
        let geometry = LatticeGeometry::new(5).unwrap();
        let mut rng = ModelRng::new(17);
        let kraus = KrausFamily::random_local(&geometry, 0.9, &mut rng).unwrap();
        let potential = (0..11).map(|_| rng.symmetric()).collect();
        let spec = ModelSpec::new(geometry, 0.7, 2, potential, kraus, 3).unwrap();
        let v = velocity_operator(&spec).unwrap();
        let dual = apply_dual(&spec, &spec.geometry.weight_matrix()).unwrap();
        assert!((&v.gamma - &dual).max_abs() <= GAMMA_IDENTITY);
        assert!(v.gamma.hermiticity_defect() <= 1e-12 * v.gamma.frobenius_norm());
        let norm = operator_norm(&v.gamma).unwrap();
        assert!((v.kappa - norm).abs() <= KAPPA_EIGEN * norm.max(1.0));
    }

    #[test]
    fn constant_potential_shift_leaves_gamma_unchanged() {
        let base = ModelSpec::chain(4, 1.0, KrausKind::DirectedJump, 0.5, 2).unwrap();
        let mut shifted = base.clone();
        shifted.potential.iter_mut().for_each(|v| *v += 3.7);
        let (a, b) = (velocity_operator(&base).unwrap(), velocity_operator(&shifted).unwrap());
        assert!((&a.gamma - &b.gamma).max_abs() <= 1e-12);
        assert!((a.kappa - b.kappa).abs() <= 1e-12);
    }

    #[test]
    fn dephasing_does_not_change_kappa() {
        let closed = ModelSpec::chain(6, 1.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let open = ModelSpec::chain(6, 1.0, KrausKind::Dephasing, 2.0, 2).unwrap();
        let (a, b) = (velocity_operator(&closed).unwrap(), velocity_operator(&open).unwrap());
        assert!((a.kappa - b.kappa).abs() <= 1e-12);
        assert!((b.kappa - b.hamiltonian_speed).abs() <= 1e-12);
    }

    #[test]
    fn directed_jumps_shift_the_speed() {
        let spec = ModelSpec::chain(6, 1.0, KrausKind::DirectedJump, 1.0, 2).unwrap();
        let v = velocity_operator(&spec).unwrap();
        assert!(v.environment_shift.abs() > 1e-3);
    }
}
