//! Stationary states from the null space of the vectorized generator `S`.
//!
//! `S` is banded with bandwidth about `N` for local models, so it is
//! factored once as a banded LU of `S + δ` with a tiny shift `δ`. Block
//! inverse iteration with `(S + δ)⁻¹(S + δ)⁻†` then yields the smallest
//! right singular vectors, and the reported singular values are
//! `‖S v_k‖`, evaluated directly. When the null space is simple the state
//! is polished by plain inverse iteration on `S + δ`, whose eigenvectors
//! are those of `S`.

use super::generator::Liouvillian;
use super::state::DensityMatrix;
use crate::linalg::{hermitian_eigs, unvec, vec, BandLu, ComplexMatrix, Complex64, SparseMatrix};
use crate::model::ModelSpec;
use crate::tolerances::{STATIONARY_DEGENERATE, STATIONARY_NO_NULL, STATIONARY_RESIDUAL};
use crate::{Error, Result};

/// Number of smallest singular values reported.
const REPORTED_SINGULAR_VALUES: usize = 6;
/// Block size of the inverse iteration.
const BLOCK: usize = 12;
const MAX_SWEEPS: usize = 400;
/// Relative change below which a reported singular value counts as settled.
/// The null vector itself is polished separately to full precision.
const RITZ_SETTLED: f64 = 1e-6;
/// Inverse-iteration steps for the null vectors.
const NULL_ITERATIONS: usize = 4;
/// Shift relative to the largest entry of `S`.
const RELATIVE_SHIFT: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct StationaryState {
    pub state: DensityMatrix,
    /// `‖L ρ_st‖_F`.
    pub residual: f64,
    /// Smallest singular values of the superoperator, ascending.
    pub singular_values: Vec<f64>,
    /// Second singular value below the degeneracy threshold.
    pub degenerate: bool,
    /// Orthonormal (Frobenius) basis of the numerical null space found.
    pub candidates: Vec<ComplexMatrix>,
}

pub fn stationary_state(spec: &ModelSpec) -> Result<StationaryState> {
    let generator = Liouvillian::new(spec)?;
    stationary_state_of(&generator)
}

pub fn stationary_state_of(generator: &Liouvillian) -> Result<StationaryState> {
    let n = generator.dim();
    let s = generator.superoperator_sparse();
    let scale = s.entries().map(|(_, _, v)| v.norm()).fold(1.0, f64::max);
    let shift = Complex64::new(RELATIVE_SHIFT * scale, 0.0);
    let lu = BandLu::new(&s, shift)?;

    let pairs = smallest_singular_vectors(&s, &lu)?;
    let singular_values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    if singular_values[0] > STATIONARY_NO_NULL {
        return Err(Error::numeric(format!(
            "no stationary state: smallest singular value {:e} exceeds {STATIONARY_NO_NULL:e}",
            singular_values[0]
        )));
    }
    let degenerate = singular_values.get(1).is_some_and(|&s2| s2 < STATIONARY_DEGENERATE);
    let null: Vec<&Vec<Complex64>> = pairs
        .iter()
        .filter(|p| p.0 < STATIONARY_DEGENERATE)
        .map(|p| &p.1)
        .collect();
    let candidates: Vec<ComplexMatrix> = if null.is_empty() {
        vec![unvec(&pairs[0].1)]
    } else {
        null.iter().map(|v| unvec(v)).collect()
    };

    let raw = if degenerate {
        log::warn!(
            "stationary state is not unique ({} null vectors found); using the projection of I/N",
            candidates.len()
        );
        let mixed = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        if generator.apply(&mixed)?.frobenius_norm() <= STATIONARY_RESIDUAL {
            mixed
        } else {
            project_maximally_mixed(&null, n)
        }
    } else {
        unvec(&pairs[0].1)
    };

    let trace = raw.trace();
    if trace.norm() < f64::EPSILON {
        return Err(Error::numeric("null vector has vanishing trace"));
    }
    let rho = raw.scale(trace.inv()).hermitian_part();
    let residual = generator.apply(&rho)?.frobenius_norm();
    if residual > STATIONARY_RESIDUAL {
        return Err(Error::numeric(format!(
            "stationary residual ‖Lρ‖ = {residual:e} exceeds {STATIONARY_RESIDUAL:e}"
        )));
    }
    let state = DensityMatrix::with_trace_target(rho, 1.0)
        .map_err(|e| Error::numeric(format!("stationary candidate is not a state: {e}")))?;
    Ok(StationaryState {
        state,
        residual,
        singular_values,
        degenerate,
        candidates,
    })
}

/// `(‖S v_k‖, v_k)` for the smallest right singular vectors, ascending.
///
/// The right and left null vectors `v₁`, `u₁` come first from inverse
/// iteration with `S + δ`. The remaining ones come from block inverse
/// iteration with `S†S` restricted to `v₁⊥`: each step solves with
/// `(S + δ)†` and `S + δ` and projects out `u₁` and `v₁` respectively, which
/// removes the `1/δ` amplification of roundoff along the null directions.
fn smallest_singular_vectors(s: &SparseMatrix, lu: &BandLu) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let dim = s.dim();
    let v1 = null_vector(lu, false);
    let u1 = null_vector(lu, true);
    let mut pairs = vec![(norm(&matvec(s, &v1)), v1.clone())];
    let wanted = (REPORTED_SINGULAR_VALUES - 1).min(dim - 1);
    if wanted == 0 {
        return Ok(pairs);
    }
    let block = BLOCK.min(dim - 1);
    let mut q: Vec<Vec<Complex64>> = (1..=block).map(|k| start_vector(dim, k)).collect();
    project_out(&mut q, &v1);
    orthonormalize(&mut q)?;
    let mut previous = vec![f64::INFINITY; wanted];
    for sweep in 0..MAX_SWEEPS {
        for x in q.iter_mut() {
            lu.solve_adjoint(x);
            remove_component(x, &u1);
            lu.solve(x);
            remove_component(x, &v1);
        }
        orthonormalize(&mut q)?;
        // Rayleigh–Ritz with S†S
        let sq: Vec<Vec<Complex64>> = q.iter().map(|v| matvec(s, v)).collect();
        let small = ComplexMatrix::from_fn(block, |i, j| dot(&sq[i], &sq[j]));
        let eig = hermitian_eigs(&small.hermitian_part())?;
        q = (0..block)
            .map(|j| {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                for (i, qi) in q.iter().enumerate() {
                    let c = eig.eigenvectors[(i, j)];
                    for (o, x) in v.iter_mut().zip(qi) {
                        *o += c * x;
                    }
                }
                v
            })
            .collect();
        let current: Vec<f64> = q[..wanted].iter().map(|v| norm(&matvec(s, v))).collect();
        let settled = current
            .iter()
            .zip(&previous)
            .all(|(c, p)| (c - p).abs() <= RITZ_SETTLED * c + 1e-12);
        // a second null direction is amplified by 1/δ and shows up at once
        let degenerate = sweep >= 3 && current[0] < STATIONARY_DEGENERATE;
        previous = current;
        if settled || degenerate {
            pairs.extend(previous.into_iter().zip(q));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok(pairs);
        }
    }
    Err(Error::numeric(format!(
        "singular-vector iteration did not settle within {MAX_SWEEPS} sweeps"
    )))
}

/// Inverse iteration with `S + δ` (or its adjoint) from a fixed start.
fn null_vector(lu: &BandLu, adjoint: bool) -> Vec<Complex64> {
    let mut x = start_vector(lu.dim(), 0);
    normalize(&mut x);
    for _ in 0..NULL_ITERATIONS {
        if adjoint {
            lu.solve_adjoint(&mut x);
        } else {
            lu.solve(&mut x);
        }
        normalize(&mut x);
    }
    x
}

/// Smooth deterministic vectors, linearly independent across `k`.
fn start_vector(dim: usize, k: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|i| {
            let x = (i as f64 + 1.0) * (k as f64 + 1.0);
            Complex64::new((0.37 * x).sin() + 1.0 / (k + 1) as f64, (0.11 * x).cos())
        })
        .collect()
}

fn remove_component(x: &mut [Complex64], unit: &[Complex64]) {
    let c = dot(unit, x);
    for (a, b) in x.iter_mut().zip(unit) {
        *a -= c * b;
    }
}

fn project_out(q: &mut [Vec<Complex64>], unit: &[Complex64]) {
    for x in q.iter_mut() {
        remove_component(x, unit);
    }
}

fn matvec(s: &SparseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (i, j, x) in s.entries() {
        out[i] += x * v[j];
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// Modified Gram–Schmidt, applied twice.
fn orthonormalize(q: &mut [Vec<Complex64>]) -> Result<()> {
    for _ in 0..2 {
        for k in 0..q.len() {
            let (done, rest) = q.split_at_mut(k);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = dot(u, v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
            let n = norm(v);
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::numeric("inverse iteration lost rank"));
            }
            for x in v.iter_mut() {
                *x /= n;
            }
        }
    }
    Ok(())
}

/// Orthogonal projection of `vec(I/N)` onto the span of `basis`.
fn project_maximally_mixed(basis: &[&Vec<Complex64>], n: usize) -> ComplexMatrix {
    let target = vec(&ComplexMatrix::identity(n).scale_real(1.0 / n as f64));
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for v in basis {
        let overlap = dot(v, &target);
        for (o, a) in out.iter_mut().zip(v.iter()) {
            *o += overlap * a;
        }
    }
    unvec(&out)
}
