//! Smooth cutoff functions and their diagonal realizations on the lattice.
//!
//! A [`SmoothCutoff`] is a nondecreasing function `f` with `f = 0` on
//! `(−∞, 0]`, `f = 1` on `[c − c′, ∞)` and `f′` a rescaled bump supported
//! on the middle half `(ℓ, r)` of `(0, c − c′)`. Because the bump is
//! `exp(−1/(u(1−u)))`, `sqrt(f′)` is again smooth.
//!
//! Functions of `⟨x⟩` are diagonal, so every observable here is evaluated
//! entrywise on the cone coordinate `x_ts = (⟨x⟩ − a − c′t)/s`.

mod bump;

use bump::Bump;

use crate::linalg::ComplexMatrix;
use crate::model::LatticeGeometry;
use crate::tolerances::MAX_DERIVATIVE_ORDER;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SmoothCutoff {
    c: f64,
    c_prime: f64,
    left: f64,
    right: f64,
    normalization: f64,
    bump: Bump,
}

pub fn make_cutoff(c: f64, c_prime: f64) -> Result<SmoothCutoff> {
    if !c.is_finite() || !c_prime.is_finite() {
        return Err(Error::rejected("cone speeds must be finite"));
    }
    if !(c_prime > 0.0) {
        return Err(Error::rejected(format!("c′ = {c_prime} must be positive")));
    }
    if !(c > c_prime) {
        return Err(Error::rejected(format!("need c > c′, got c = {c}, c′ = {c_prime}")));
    }
    let width = c - c_prime;
    let (left, right) = (0.25 * width, 0.75 * width);
    let bump = Bump::new();
    Ok(SmoothCutoff {
        c,
        c_prime,
        left,
        right,
        normalization: (right - left) * bump.integral(),
        bump,
    })
}

impl SmoothCutoff {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c_prime(&self) -> f64 {
        self.c_prime
    }

    /// `c − c′`, beyond which `f = 1`.
    pub fn width(&self) -> f64 {
        self.c - self.c_prime
    }

    /// `(ℓ, r)`, the support of `f′`.
    pub fn support_window(&self) -> (f64, f64) {
        (self.left, self.right)
    }

    /// `Z` in `f′(μ) = ψ((μ − ℓ)/(r − ℓ)) / Z`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn unit(&self, mu: f64) -> f64 {
        (mu - self.left) / (self.right - self.left)
    }

    pub fn value(&self, mu: f64) -> f64 {
        self.bump.cdf(self.unit(mu))
    }

    /// `f^{(k)}(μ)` for `k ≤ 8`.
    pub fn derivative(&self, k: usize, mu: f64) -> Result<f64> {
        if k > MAX_DERIVATIVE_ORDER {
            return Err(Error::rejected(format!(
                "derivative order {k} exceeds {MAX_DERIVATIVE_ORDER}"
            )));
        }
        if k == 0 {
            return Ok(self.value(mu));
        }
        let scale = (self.right - self.left).powi(k as i32 - 1) * self.normalization;
        Ok(self.bump.derivative(k - 1, self.unit(mu)) / scale)
    }

    /// `sqrt(f′(μ))`, evaluated without taking a square root of `f′`.
    pub fn sqrt_derivative(&self, mu: f64) -> f64 {
        self.bump.sqrt(self.unit(mu)) / self.normalization.sqrt()
    }

    /// Smooth plateau: 1 on `[ℓ, r]`, supported in `(ℓ/2, (r + c − c′)/2)`.
    pub fn plateau(&self, mu: f64) -> f64 {
        let inner = 0.5 * self.left;
        let outer = 0.5 * (self.right + self.width());
        if mu < self.left {
            self.bump.cdf((mu - inner) / (self.left - inner))
        } else if mu <= self.right {
            1.0
        } else {
            1.0 - self.bump.cdf((mu - self.right) / (outer - self.right))
        }
    }

    /// `diag(f^{(k)}(μ_i))`.
    pub fn diagonal(&self, k: usize, coordinates: &[f64]) -> Result<ComplexMatrix> {
        let values = coordinates
            .iter()
            .map(|&mu| self.derivative(k, mu))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComplexMatrix::from_real_diagonal(&values))
    }
}

pub fn eval_derivative(f: &SmoothCutoff, k: usize, mu: f64) -> Result<f64> {
    f.derivative(k, mu)
}

/// Parameters of the moving cone `⟨x⟩ = a + c′t` seen at scale `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFrame {
    pub a: f64,
    pub b: f64,
    pub c_prime: f64,
    pub s: f64,
    pub t: f64,
}

impl ConeFrame {
    pub fn new(a: f64, b: f64, c_prime: f64, s: f64, t: f64) -> Result<Self> {
        let frame = ConeFrame { a, b, c_prime, s, t };
        if [a, b, c_prime, s, t].iter().any(|v| !v.is_finite()) {
            return Err(Error::rejected("cone parameters must be finite"));
        }
        if !(b > 0.0) {
            return Err(Error::rejected(format!("localization radius b = {b} must be positive")));
        }
        if !(a > b) {
            return Err(Error::rejected(format!(
                "need a > b (the initial state must sit strictly inside the cone), got a = {a}, b = {b}"
            )));
        }
        if !(s > 0.0) {
            return Err(Error::rejected(format!("scale s = {s} must be positive")));
        }
        if t < 0.0 {
            return Err(Error::rejected(format!("time t = {t} must be nonnegative")));
        }
        if !(c_prime > 0.0) {
            return Err(Error::rejected(format!("c′ = {c_prime} must be positive")));
        }
        Ok(frame)
    }

    pub fn at(&self, s: f64, t: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.c_prime, s, t)
    }
}

/// `x_ts = s⁻¹(⟨x⟩ − a − c′t)` per site.
pub fn cone_coordinate(frame: &ConeFrame, geometry: &LatticeGeometry) -> Vec<f64> {
    let shift = frame.a + frame.c_prime * frame.t;
    geometry.weights().iter().map(|w| (w - shift) / frame.s).collect()
}

fn check_frame(f: &SmoothCutoff, frame: &ConeFrame) -> Result<()> {
    if (f.c_prime - frame.c_prime).abs() > 1e-12 * f.c_prime {
        return Err(Error::rejected(format!(
            "cutoff built for c′ = {} used in a frame with c′ = {}",
            f.c_prime, frame.c_prime
        )));
    }
    Ok(())
}

/// `f^{(k)}(x_ts)`; `k = 0` is the propagation observable `f_ts`.
pub fn diagonal_observable(
    f: &SmoothCutoff,
    k: usize,
    frame: &ConeFrame,
    geometry: &LatticeGeometry,
) -> Result<ComplexMatrix> {
    check_frame(f, frame)?;
    f.diagonal(k, &cone_coordinate(frame, geometry))
}

/// `u_ts = sqrt(f′(x_ts))`.
pub fn sqrt_derivative_observable(
    f: &SmoothCutoff,
    frame: &ConeFrame,
    geometry: &LatticeGeometry,
) -> Result<ComplexMatrix> {
    check_frame(f, frame)?;
    let values: Vec<f64> = cone_coordinate(frame, geometry)
        .iter()
        .map(|&mu| f.sqrt_derivative(mu))
        .collect();
    Ok(ComplexMatrix::from_real_diagonal(&values))
}

/// The plateau evaluated at `x_ts`.
pub fn plateau_observable(
    f: &SmoothCutoff,
    frame: &ConeFrame,
    geometry: &LatticeGeometry,
) -> Result<ComplexMatrix> {
    check_frame(f, frame)?;
    let values: Vec<f64> = cone_coordinate(frame, geometry)
        .iter()
        .map(|&mu| f.plateau(mu))
        .collect();
    Ok(ComplexMatrix::from_real_diagonal(&values))
}

/// `∂_t f_ts = −(c′/s) f′_ts`.
pub fn time_derivative_observable(
    f: &SmoothCutoff,
    frame: &ConeFrame,
    geometry: &LatticeGeometry,
) -> Result<ComplexMatrix> {
    Ok(diagonal_observable(f, 1, frame, geometry)?.scale_real(-frame.c_prime / frame.s))
}

/// `χ_η`: projector onto the sites with `⟨x⟩ ≥ η`.
pub fn sharp_projector(eta: f64, geometry: &LatticeGeometry) -> ComplexMatrix {
    let values: Vec<f64> = geometry
        .weights()
        .iter()
        .map(|&w| if w >= eta { 1.0 } else { 0.0 })
        .collect();
    ComplexMatrix::from_real_diagonal(&values)
}
