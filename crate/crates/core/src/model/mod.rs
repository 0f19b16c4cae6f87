//! Lattice models: geometry, Hamiltonian, Kraus families, and the audit of
//! the iterated-commutator bounds `‖ad^k_⟨x⟩(H)‖` and `Σ_j ‖ad^k_⟨x⟩(W_j)‖²`.

mod audit;
mod geometry;
mod kraus;

pub use audit::{check_assumptions, check_assumptions_with_ceiling, AssumptionAudit};
pub use geometry::LatticeGeometry;
pub use kraus::{build_kraus_family, KrausFamily, KrausKind};

use crate::linalg::{ComplexMatrix, Complex64, SparseMatrix};
use crate::tolerances::MAX_DERIVATIVE_ORDER;
use crate::{Error, Result};

/// Everything needed to build `H` and the `W_j` of one model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub geometry: LatticeGeometry,
    /// `J`: amplitude of every hopping term.
    pub hopping_amplitude: f64,
    /// Number of off-diagonals carrying hopping.
    pub hopping_range: usize,
    /// On-site potential, one entry per site in position order.
    pub potential: Vec<f64>,
    pub kraus: KrausFamily,
    /// Expansion order `n` of the light-cone estimate, `2 ≤ n ≤ 8`.
    pub order: usize,
}

impl ModelSpec {
    pub fn new(
        geometry: LatticeGeometry,
        hopping_amplitude: f64,
        hopping_range: usize,
        potential: Vec<f64>,
        kraus: KrausFamily,
        order: usize,
    ) -> Result<Self> {
        let n_sites = geometry.n_sites();
        if !hopping_amplitude.is_finite() {
            return Err(Error::rejected("hopping amplitude must be finite"));
        }
        if hopping_range == 0 {
            return Err(Error::rejected("hopping range must be at least 1"));
        }
        if potential.len() != n_sites {
            return Err(Error::rejected(format!(
                "potential has {} entries for {n_sites} sites",
                potential.len()
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::rejected("potential must be finite"));
        }
        if kraus.dim() != n_sites {
            return Err(Error::rejected(format!(
                "Kraus operators act on {} sites, lattice has {n_sites}",
                kraus.dim()
            )));
        }
        if !(2..=MAX_DERIVATIVE_ORDER).contains(&order) {
            return Err(Error::rejected(format!(
                "expansion order n = {order} outside [2, {MAX_DERIVATIVE_ORDER}]"
            )));
        }
        Ok(ModelSpec {
            geometry,
            hopping_amplitude,
            hopping_range,
            potential,
            kraus,
            order,
        })
    }

    /// Uniform chain with zero potential and one of the built-in families.
    pub fn chain(
        half_width: usize,
        hopping_amplitude: f64,
        kind: KrausKind,
        strength: f64,
        order: usize,
    ) -> Result<Self> {
        let geometry = LatticeGeometry::new(half_width)?;
        let kraus = build_kraus_family(kind, strength, &geometry)?;
        let potential = vec![0.0; geometry.n_sites()];
        Self::new(geometry, hopping_amplitude, 1, potential, kraus, order)
    }

    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    /// `H` in row-compressed form.
    pub fn hamiltonian(&self) -> Result<SparseMatrix> {
        let n = self.n_sites();
        if self.hopping_range >= n {
            return Err(Error::rejected(format!(
                "hopping range {} must be smaller than the site count {n}",
                self.hopping_range
            )));
        }
        let hop = Complex64::new(-self.hopping_amplitude, 0.0);
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, Complex64::new(self.potential[i], 0.0)));
            for d in 1..=self.hopping_range {
                if i + d < n && self.hopping_amplitude != 0.0 {
                    trip.push((i, i + d, hop));
                    trip.push((i + d, i, hop));
                }
            }
        }
        SparseMatrix::from_triplets(n, trip)
    }

    /// Largest of `J`, `g` and 1; sets the natural rate scale of the model.
    pub fn rate_scale(&self) -> f64 {
        self.hopping_amplitude
            .abs()
            .max(self.kraus.strength())
            .max(1.0)
    }
}

/// `H = −J Σ_{d ≤ range} (|x⟩⟨x+d| + h.c.) + diag(V)`.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<ComplexMatrix> {
    Ok(spec.hamiltonian()?.to_dense())
}

/// `ad^k_⟨x⟩(A)` by the recursion `ad^{k+1}(A) = [ad^k(A), ⟨x⟩]`.
pub fn iterated_adjoint(a: &ComplexMatrix, geometry: &LatticeGeometry, k: usize) -> Result<ComplexMatrix> {
    check_dim(a.dim(), geometry)?;
    let weight = geometry.weight_matrix();
    let mut out = a.clone();
    for _ in 0..k {
        out = crate::linalg::commutator(&out, &weight)?;
    }
    Ok(out)
}

/// `ad^k_⟨x⟩(A)` from the entrywise closed form
/// `(ad^k A)_{xy} = A_{xy} (⟨y⟩ − ⟨x⟩)^k`.
pub fn iterated_adjoint_closed_form(
    a: &ComplexMatrix,
    geometry: &LatticeGeometry,
    k: usize,
) -> Result<ComplexMatrix> {
    check_dim(a.dim(), geometry)?;
    let w = geometry.weights();
    Ok(ComplexMatrix::from_fn(a.dim(), |x, y| {
        a[(x, y)] * (w[y] - w[x]).powi(k as i32)
    }))
}

/// Closed-form iterated adjoint of a sparse operator.
pub fn iterated_adjoint_sparse(a: &SparseMatrix, geometry: &LatticeGeometry, k: usize) -> Result<SparseMatrix> {
    check_dim(a.dim(), geometry)?;
    let w = geometry.weights();
    Ok(a.map_entries(|x, y, v| v * (w[y] - w[x]).powi(k as i32)))
}

fn check_dim(dim: usize, geometry: &LatticeGeometry) -> Result<()> {
    if dim != geometry.n_sites() {
        return Err(Error::rejected(format!(
            "operator of dimension {dim} on a lattice of {} sites",
            geometry.n_sites()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;
    use crate::linalg::testutil::*;
    use crate::tolerances::ADJOINT_CROSSCHECK;

    #[test]
    fn zero_hopping_gives_potential() {
        let geometry = LatticeGeometry::new(2).unwrap();
        let v = vec![0.5, -1.0, 2.0, 0.0, 3.0];
        let kraus = build_kraus_family(KrausKind::Dephasing, 0.0, &geometry).unwrap();
        let spec = ModelSpec::new(geometry, 0.0, 1, v.clone(), kraus, 2).unwrap();
        assert_eq!(build_hamiltonian(&spec).unwrap(), ComplexMatrix::from_real_diagonal(&v));
    }

    #[test]
    fn three_site_chain() {
        let spec = ModelSpec::chain(1, 1.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[0.0, -1.0, 0.0], &[-1.0, 0.0, -1.0], &[0.0, -1.0, 0.0]])
            .unwrap();
        assert_eq!(build_hamiltonian(&spec).unwrap(), want);
    }

    #[test]
    fn gershgorin_bound() {
        for range in 1..=3 {
            let geometry = LatticeGeometry::new(5).unwrap();
            let kraus = build_kraus_family(KrausKind::Dephasing, 0.0, &geometry).unwrap();
            let spec = ModelSpec::new(geometry, 1.0, range, vec![0.0; 11], kraus, 2).unwrap();
            let h = build_hamiltonian(&spec).unwrap();
            assert!(h.hermiticity_defect() == 0.0);
            assert!(operator_norm(&h).unwrap() <= 2.0 * range as f64 + 1e-12);
        }
    }

    #[test]
    fn hopping_range_must_fit() {
        let geometry = LatticeGeometry::new(1).unwrap();
        let kraus = build_kraus_family(KrausKind::Dephasing, 0.0, &geometry).unwrap();
        let spec = ModelSpec::new(geometry, 1.0, 3, vec![0.0; 3], kraus, 2).unwrap();
        assert!(matches!(build_hamiltonian(&spec), Err(Error::RejectedInput(_))));
    }

    #[test]
    fn order_is_bounded() {
        assert!(ModelSpec::chain(2, 1.0, KrausKind::Dephasing, 1.0, 1).is_err());
        assert!(ModelSpec::chain(2, 1.0, KrausKind::Dephasing, 1.0, 9).is_err());
    }

    #[test]
    fn adjoint_of_diagonal_vanishes() {
        let geometry = LatticeGeometry::new(2).unwrap();
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(iterated_adjoint(&d, &geometry, 1).unwrap().max_abs(), 0.0);
        assert_eq!(iterated_adjoint(&d, &geometry, 0).unwrap(), d);
    }

    #[test]
    fn adjoint_of_hop_between_origin_and_one() {
        let geometry = LatticeGeometry::new(2).unwrap();
        let (i0, i1) = (geometry.index_of(0).unwrap(), geometry.index_of(1).unwrap());
        let a = ComplexMatrix::unit(5, i0, i1);
        let b2 = iterated_adjoint(&a, &geometry, 2).unwrap();
        let want = (2f64.sqrt() - 1.0).powi(2);
        assert!((b2[(i0, i1)].re - want).abs() < 1e-15);
        assert_eq!(b2.max_abs(), b2[(i0, i1)].norm());
    }

    #[test]
    fn recursion_matches_closed_form() {
        let mut rng = TestRng::new(61);
        let geometry = LatticeGeometry::new(3).unwrap();
        for _ in 0..50 {
            let a = rng.matrix(7);
            for k in 0..=6 {
                let rec = iterated_adjoint(&a, &geometry, k).unwrap();
                let closed = iterated_adjoint_closed_form(&a, &geometry, k).unwrap();
                let sparse = iterated_adjoint_sparse(&SparseMatrix::from_dense(&a), &geometry, k).unwrap();
                let scale = closed.max_abs().max(1.0);
                assert_close(&rec, &closed, ADJOINT_CROSSCHECK * scale);
                assert_close(&sparse.to_dense(), &closed, ADJOINT_CROSSCHECK * scale);
            }
        }
    }

    #[test]
    fn nearest_neighbour_adjoint_bound() {
        let spec = ModelSpec::chain(10, 1.0, KrausKind::Dephasing, 1.0, 6).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let w = spec.geometry.weights();
        let max_step = w.windows(2).map(|p| (p[1] - p[0]).abs()).fold(0.0, f64::max);
        for k in 1..=6 {
            let bk = operator_norm(&iterated_adjoint(&h, &spec.geometry, k).unwrap()).unwrap();
            let bound = 2.0 * max_step.powi(k as i32);
            assert!(bk <= bound + 1e-12, "k={k}: {bk} > {bound}");
            assert!(bound <= 2.0);
        }
    }
}
