//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit-shift QL iteration.

use super::{check_hermitian, ComplexMatrix, Complex64, ONE, ZERO};
use crate::tolerances::QL_SWEEPS_PER_DIM;
use crate::{Error, Result};

/// `A = U diag(λ) U†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.dim();
        let scaled = ComplexMatrix::from_fn(n, |i, j| u[(i, j)] * self.eigenvalues[j]);
        scaled.matmul(&u.adjoint())
    }

    /// Applies `g` to the spectrum: `U diag(g(λ)) U†`.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.dim();
        let values: Vec<Complex64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        let scaled = ComplexMatrix::from_fn(n, |i, j| u[(i, j)] * values[j]);
        scaled.matmul(&u.adjoint())
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        let n = self.eigenvectors.dim();
        (0..n).map(|i| self.eigenvectors[(i, k)]).collect()
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigs(a: &ComplexMatrix) -> Result<HermitianEigenDecomposition> {
    check_hermitian(a)?;
    let n = a.dim();
    let tri = tridiagonalize(a, true);
    let mut d = tri.diag;
    let mut e = tri.offdiag;
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, Some(&mut z))?;

    // U = Q · D_phase · Z
    let q = tri.q.expect("requested accumulation");
    let mut qd = q;
    for i in 0..n {
        for j in 0..n {
            qd[(i, j)] *= tri.phases[j];
        }
    }
    // z holds the eigenvectors of the tridiagonal matrix as contiguous rows
    let u = ComplexMatrix::from_fn(n, |i, j| {
        let zj = &z[j * n..(j + 1) * n];
        qd.row(i).iter().zip(zj).map(|(a, &b)| a * b).sum()
    });

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| u[(i, order[j])]);
    Ok(HermitianEigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only; skips eigenvector accumulation.
pub fn hermitian_eigvals(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let tri = tridiagonalize(a, false);
    let mut d = tri.diag;
    let mut e = tri.offdiag;
    tql2(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `offdiag[k]` couples `k` and `k+1`; the last entry is zero.
    offdiag: Vec<f64>,
    /// Diagonal unitary that makes the off-diagonal real and nonnegative.
    phases: Vec<Complex64>,
    q: Option<ComplexMatrix>,
}

fn tridiagonalize(a: &ComplexMatrix, accumulate: bool) -> Tridiagonal {
    let n = a.dim();
    let mut w = a.hermitian_part();
    let mut q = accumulate.then(|| ComplexMatrix::identity(n));
    let mut sub = vec![ZERO; n];
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];

    for k in 0..n.saturating_sub(1) {
        let len = n - k - 1;
        let start = k + 1;
        let norm_x = (start..n).map(|i| w[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = w[(start, k)];
        let tail_norm = (start + 1..n).map(|i| w[(i, k)].norm_sqr()).sum::<f64>();
        if len == 1 || tail_norm == 0.0 {
            sub[k] = x0;
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm_x;
        // v = x - alpha e1, normalized
        for i in start..n {
            v[i] = w[(i, k)];
        }
        v[start] -= alpha;
        let vnorm = (start..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut().take(n).skip(start) {
            *vi /= vnorm;
        }
        // p = W v on the trailing block
        for i in start..n {
            let row = w.row(i);
            p[i] = (start..n).map(|j| row[j] * v[j]).sum();
        }
        let kk: Complex64 = (start..n).map(|i| v[i].conj() * p[i]).sum();
        let kk = kk.re;
        // w_vec = p - K v; W <- W - 2 (v w† + w v†)
        for i in start..n {
            p[i] -= v[i] * kk;
        }
        for i in start..n {
            for j in start..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                w[(i, j)] -= upd * 2.0;
            }
        }
        sub[k] = alpha;
        for i in start + 1..n {
            w[(i, k)] = ZERO;
            w[(k, i)] = ZERO;
        }
        w[(start, k)] = alpha;
        w[(k, start)] = alpha.conj();
        if let Some(q) = q.as_mut() {
            // Q <- Q (I - 2 v v†)
            for i in 0..n {
                let row = q.row(i);
                let qv: Complex64 = (start..n).map(|j| row[j] * v[j]).sum();
                let qv2 = qv * 2.0;
                for j in start..n {
                    q[(i, j)] -= qv2 * v[j].conj();
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut offdiag = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let t = sub[k];
        let mag = t.norm();
        offdiag[k] = mag;
        phases[k + 1] = if mag > 0.0 { phases[k] * (t / mag) } else { phases[k] };
    }
    Tridiagonal {
        diag,
        offdiag,
        phases,
        q,
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `e[k]` couples `k`
/// and `k+1`. When `z` is given (`n×n`, initially the identity) its rows
/// become the eigenvectors, so each rotation touches two contiguous rows.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<f64>>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let max_iter = QL_SWEEPS_PER_DIM * n;
    let mut iter = 0usize;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::numeric(format!(
                        "implicit QL did not converge within {max_iter} iterations (dim {n})"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z[i * n..(i + 2) * n].split_at_mut(n);
                        for (zi, zi1) in lo.iter_mut().zip(hi.iter_mut()) {
                            let h = *zi1;
                            *zi1 = s * *zi + c * h;
                            *zi = c * *zi - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
