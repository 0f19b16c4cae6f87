use lightcone_core::cutoffs::{cone_coordinate, diagonal_observable, make_cutoff, sharp_projector, ConeFrame};
use lightcone_core::dynamics::{apply_dual, apply_generator, evolve_matrix, Backend, EvolveOptions, Liouvillian};
use lightcone_core::lightcone::{leakage_of, velocity_operator};
use lightcone_core::linalg::{commutator, hermitian_eigs, matrix_exp, operator_norm, Complex64, ComplexMatrix};
use lightcone_core::model::{build_kraus_family, KrausFamily, KrausKind, LatticeGeometry, ModelSpec};
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        ComplexMatrix::from_fn(dim, |i, j| {
            let (re, im) = v[i * dim + j];
            Complex64::new(re, im)
        })
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim).prop_map(|m| m.hermitian_part())
}

/// Random density matrix `A A† / Tr(A A†)`.
fn state(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim).prop_map(|a| {
        let rho = a.matmul(&a.adjoint());
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr).hermitian_part()
    })
}

fn sub(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.dim(), |i, j| a[(i, j)] - b[(i, j)])
}

fn add(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.dim(), |i, j| a[(i, j)] + b[(i, j)])
}

fn model(half_width: usize, kind: KrausKind, g: f64, potential: Vec<f64>) -> ModelSpec {
    let geometry = LatticeGeometry::new(half_width).unwrap();
    let kraus = build_kraus_family(kind, g, &geometry).unwrap();
    ModelSpec::new(geometry, 1.0, 1, potential, kraus, 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn commutator_is_a_derivation((a, b, c) in (matrix(5), matrix(5), matrix(5))) {
        let lhs = commutator(&a, &b.matmul(&c)).unwrap();
        let rhs = add(&commutator(&a, &b).unwrap().matmul(&c), &b.matmul(&commutator(&a, &c).unwrap()));
        prop_assert!(sub(&lhs, &rhs).max_abs() <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn operator_norm_is_submultiplicative((a, b) in (matrix(6), matrix(6))) {
        let ab = operator_norm(&a.matmul(&b)).unwrap();
        prop_assert!(ab <= operator_norm(&a).unwrap() * operator_norm(&b).unwrap() + 1e-10);
    }

    #[test]
    fn eigendecomposition_reconstructs(a in (1usize..=32).prop_flat_map(hermitian)) {
        let back = hermitian_eigs(&a).unwrap().reconstruct();
        prop_assert!(sub(&a, &back).max_abs() <= 1e-10 * a.max_abs().max(1.0));
    }

    #[test]
    fn exponential_of_commuting_diagonals_factorizes(
        (x, y) in (proptest::collection::vec(-2.0f64..2.0, 6), proptest::collection::vec(-2.0f64..2.0, 6))
    ) {
        let a = ComplexMatrix::from_diagonal(&x.iter().map(|&v| Complex64::new(v, 0.5 * v)).collect::<Vec<_>>());
        let b = ComplexMatrix::from_real_diagonal(&y);
        let lhs = matrix_exp(&add(&a, &b)).unwrap();
        let rhs = matrix_exp(&a).unwrap().matmul(&matrix_exp(&b).unwrap());
        prop_assert!(sub(&lhs, &rhs).max_abs() <= 1e-10 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(rho in state(7), g in 0.1f64..2.0, jump in any::<bool>()) {
        let kind = if jump { KrausKind::DirectedJump } else { KrausKind::Dephasing };
        let spec = model(3, kind, g, vec![0.0; 7]);
        let out = apply_generator(&spec, &rho).unwrap();
        prop_assert!(out.trace().norm() < 1e-12);
        prop_assert!(out.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn dual_is_the_adjoint_of_the_generator((rho, a) in (state(5), hermitian(5)), g in 0.1f64..2.0) {
        let spec = model(2, KrausKind::DirectedJump, g, vec![0.3, -0.1, 0.0, 0.7, 0.2]);
        let lhs = a.trace_product(&apply_generator(&spec, &rho).unwrap());
        let rhs = apply_dual(&spec, &a).unwrap().trace_product(&rho);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn constant_potential_leaves_the_velocity_unchanged(shift in -50.0f64..50.0, g in 0.1f64..2.0) {
        let base = velocity_operator(&model(4, KrausKind::Dephasing, g, vec![0.0; 9])).unwrap();
        let moved = velocity_operator(&model(4, KrausKind::Dephasing, g, vec![shift; 9])).unwrap();
        prop_assert!((base.kappa - moved.kappa).abs() < 1e-12);
        prop_assert!(sub(&base.gamma, &moved.gamma).max_abs() < 1e-12);
    }

    #[test]
    fn gram_sum_survives_unitary_mixing(h in hermitian(2)) {
        let geometry = LatticeGeometry::new(1).unwrap();
        let family = build_kraus_family(KrausKind::DirectedJump, 0.8, &geometry).unwrap();
        let ops = family.dense_operators();
        // eigenvectors of a Hermitian matrix form a unitary
        let u = hermitian_eigs(&h).unwrap();
        let mixed: Vec<ComplexMatrix> = (0..ops.len())
            .map(|j| {
                let col = u.eigenvector(j);
                ops.iter().zip(&col).fold(ComplexMatrix::zeros(3), |acc, (w, &c)| add(&acc, &w.scale(c)))
            })
            .collect();
        let remixed = KrausFamily::custom(3, 0.8, mixed).unwrap();
        let before = family.gram_sum().to_dense();
        let after = remixed.gram_sum().to_dense();
        prop_assert!(sub(&before, &after).max_abs() < 1e-12);
    }

    #[test]
    fn cutoff_observable_lies_between_zero_and_one(
        a in 1.5f64..5.0, t in 0.0f64..4.0, s in 1.0f64..10.0, c_prime in 0.5f64..2.0, gap in 0.1f64..3.0
    ) {
        let geometry = LatticeGeometry::new(12).unwrap();
        let f = make_cutoff(c_prime + gap, c_prime).unwrap();
        let frame = ConeFrame::new(a, 1.0, c_prime, s, t).unwrap();
        let obs = diagonal_observable(&f, 0, &frame, &geometry).unwrap();
        prop_assert!(obs.is_diagonal());
        for (mu, v) in cone_coordinate(&frame, &geometry).into_iter().zip(obs.diagonal()) {
            prop_assert!((0.0..=1.0).contains(&v.re));
            if mu >= gap {
                prop_assert_eq!(v.re, 1.0);
            }
        }
    }

    #[test]
    fn leakage_is_monotone_and_bounded(rho in state(9), eta in 0.0f64..5.0, step in 0.0f64..2.0) {
        let geometry = LatticeGeometry::new(4).unwrap();
        let near = leakage_of(&rho, eta, &geometry);
        let far = leakage_of(&rho, eta + step, &geometry);
        prop_assert!(far <= near + 1e-15);
        prop_assert!(near <= rho.trace().re + 1e-12);
        let (p, q) = (sharp_projector(eta, &geometry), sharp_projector(eta + step, &geometry));
        for (x, y) in p.diagonal().iter().zip(q.diagonal()) {
            prop_assert!(y.re <= x.re);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn evolution_is_a_contractive_semigroup(rho in state(5), t1 in 0.1f64..1.5, t2 in 0.1f64..1.5) {
        let spec = model(2, KrausKind::DirectedJump, 0.6, vec![0.0; 5]);
        let generator = Liouvillian::new(&spec).unwrap();
        let options = EvolveOptions::new(Backend::SuperopExp);
        let first = evolve_matrix(&generator, &rho, t1, t1, options).unwrap();
        let mid = first.final_state().matrix().clone();
        let two_step = evolve_matrix(&generator, &mid, t2, t2, options).unwrap();
        let direct = evolve_matrix(&generator, &rho, t1 + t2, t1 + t2, options).unwrap();
        let (a, b) = (two_step.final_state().matrix(), direct.final_state().matrix());
        prop_assert!(sub(a, b).max_abs() < 1e-9);
        prop_assert!(direct.min_eig_seen() >= -1e-8);

        let difference = sub(&rho, &ComplexMatrix::from_real_diagonal(&[0.2; 5]));
        let run = evolve_matrix(&generator, &difference, t1 + t2, 0.25, EvolveOptions { check_positivity: false, ..options }).unwrap();
        let start = difference.trace_norm().unwrap();
        for s in &run.states {
            prop_assert!(s.matrix().trace_norm().unwrap() <= start + 1e-8);
        }
    }
}
