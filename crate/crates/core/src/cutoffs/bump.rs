//! The bump `ψ(u) = exp(−1/(u(1−u)))` on `(0, 1)`: derivatives through an
//! integer polynomial recurrence, and its cumulative integral by
//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// `ψ^{(m)} = P_m ψ / q^{2m}` with `q = u(1−u)`, for `m ≤ MAX_ORDER`.
pub(crate) const MAX_ORDER: usize = 8;

const PANELS: usize = 8;
const GAUSS_POINTS: usize = 20;

#[derive(Debug, Clone)]
pub(crate) struct Bump {
    /// Coefficients of `P_m` in increasing powers of `y = 2u − 1`; the
    /// centered variable avoids cancellation in high orders.
    polys: Vec<Vec<f64>>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `∫_0^1 ψ`.
    integral: f64,
}

impl Bump {
    pub(crate) fn new() -> Self {
        let (nodes, weights) = gauss_legendre(GAUSS_POINTS);
        let mut bump = Bump {
            polys: derivative_polynomials(MAX_ORDER)
                .iter()
                .map(|p| centered(p))
                .collect(),
            nodes,
            weights,
            integral: 0.0,
        };
        bump.integral = 2.0 * bump.integrate_from_zero(0.5);
        bump
    }

    pub(crate) fn integral(&self) -> f64 {
        self.integral
    }

    /// `ψ^{(m)}(u)`; zero outside `(0, 1)`.
    pub(crate) fn derivative(&self, m: usize, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let q = u * (1.0 - u);
        let p = horner(&self.polys[m], 2.0 * u - 1.0);
        if p == 0.0 {
            return 0.0;
        }
        p * (-1.0 / q - 2.0 * m as f64 * q.ln()).exp()
    }

    /// `sqrt(ψ(u)) = exp(−1/(2u(1−u)))`.
    pub(crate) fn sqrt(&self, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        (-0.5 / (u * (1.0 - u))).exp()
    }

    /// `∫_0^u ψ / ∫_0^1 ψ`, clamped to `[0, 1]`.
    pub(crate) fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else if u <= 0.5 {
            self.integrate_from_zero(u) / self.integral
        } else {
            1.0 - self.integrate_from_zero(1.0 - u) / self.integral
        }
    }

    fn integrate_from_zero(&self, upper: f64) -> f64 {
        let width = upper / PANELS as f64;
        let mut total = 0.0;
        for p in 0..PANELS {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                total += w * self.derivative(0, mid + 0.5 * width * x);
            }
        }
        0.5 * width * total
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// Rewrites `P(u)` as a polynomial in `y = 2u − 1`:
/// `P = 2^{−d} Σ_k c_k 2^{d−k} (1 + y)^k` with integer arithmetic inside.
fn centered(p: &[i128]) -> Vec<f64> {
    let d = p.len() - 1;
    let mut acc = vec![0i128];
    let mut power = vec![1i128];
    for (k, &c) in p.iter().enumerate() {
        acc = poly_add(&acc, &poly_scale(&power, c << (d - k)));
        power = poly_mul(&power, &[1, 1]);
    }
    let scale = 0.5f64.powi(d as i32);
    acc.into_iter().map(|c| c as f64 * scale).collect()
}

/// Integer polynomials `P_0..=P_max`, from
/// `P_{m+1} = P_m' q² + P_m q' (1 − 2m q)`.
pub(crate) fn derivative_polynomials(max: usize) -> Vec<Vec<i128>> {
    let q = vec![0i128, 1, -1];
    let dq = vec![1i128, -2];
    let q2 = poly_mul(&q, &q);
    let mut out = vec![vec![1i128]];
    for m in 0..max {
        let p = &out[m];
        let dp: Vec<i128> = p.iter().enumerate().skip(1).map(|(k, &c)| k as i128 * c).collect();
        let factor = poly_add(&[1], &poly_scale(&q, -2 * m as i128));
        let next = poly_add(&poly_mul(&dp, &q2), &poly_mul(&poly_mul(p, &dq), &factor));
        out.push(trim(next));
    }
    out
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_scale(a: &[i128], c: i128) -> Vec<i128> {
    a.iter().map(|&x| x * c).collect()
}

fn trim(mut p: Vec<i128>) -> Vec<i128> {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    p
}

/// Nodes and weights on `[−1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
