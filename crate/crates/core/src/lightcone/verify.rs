//! Numerical checks of the identities and estimates behind the light-cone
//! bound: the basic equality, the recursive monotonicity estimate and the
//! commutator expansion.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::ScalingFit;
use super::velocity::velocity_operator;
use crate::cutoffs::{diagonal_observable, time_derivative_observable, ConeFrame, SmoothCutoff};
use crate::dynamics::{evolve_at, EvolveOptions, InitialState, Liouvillian};
use crate::linalg::{hermitian_eigvals, operator_norm, ComplexMatrix};
use crate::model::{iterated_adjoint, LatticeGeometry, ModelSpec};
use crate::tolerances::MAX_DERIVATIVE_ORDER;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct BasicEqualityReport {
    /// `|⟨Φ_T⟩_T − ∫₀^T ⟨DΦ_r⟩_r dr − ⟨Φ_0⟩_0|`.
    pub residual: f64,
    pub initial: f64,
    pub final_value: f64,
    pub integral: f64,
    pub dt: f64,
    pub intervals: usize,
}

/// Basic equality for `Φ_t = f_ts` at the frame's scale, with
/// `DΦ = L'Φ + ∂_tΦ` integrated by composite Simpson on the sampling grid.
pub fn verify_basic_equality(
    spec: &ModelSpec,
    frame: &ConeFrame,
    f: &SmoothCutoff,
    initial: &InitialState,
    t_final: f64,
    dt: f64,
) -> Result<BasicEqualityReport> {
    let generator = Liouvillian::new(spec)?;
    let geometry = &spec.geometry;
    diagonal_observable(f, 0, frame, geometry)?;
    basic_equality_with(
        &generator,
        &initial.rho0(),
        t_final,
        dt,
        EvolveOptions::default(),
        |t| {
            let at = frame.at(frame.s, t)?;
            Ok((
                diagonal_observable(f, 0, &at, geometry)?,
                time_derivative_observable(f, &at, geometry)?,
            ))
        },
    )
}

/// Basic equality for any family `t ↦ (Φ_t, ∂_tΦ_t)`.
pub fn basic_equality_with(
    generator: &Liouvillian,
    rho0: &ComplexMatrix,
    t_final: f64,
    dt: f64,
    options: EvolveOptions,
    mut observable: impl FnMut(f64) -> Result<(ComplexMatrix, ComplexMatrix)>,
) -> Result<BasicEqualityReport> {
    if !(dt > 0.0 && t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::rejected("need t_final > 0 and dt > 0"));
    }
    let intervals = (t_final / dt).round() as usize;
    if intervals < 2 || (intervals as f64 * dt - t_final).abs() > 1e-9 * t_final {
        return Err(Error::rejected(format!(
            "t_final = {t_final} must be a multiple of dt = {dt} with at least two intervals"
        )));
    }
    let times: Vec<f64> = (0..=intervals).map(|k| k as f64 * dt).collect();
    let mut derivative = Vec::with_capacity(times.len());
    let mut first = 0.0;
    let mut last = 0.0;
    evolve_at(generator, rho0, &times, options, |k, t, rho, _| {
        if k == 0 {
            derivative.clear();
        }
        let (phi, dphi) = observable(t)?;
        let heisenberg = &generator.apply_dual(&phi)? + &dphi;
        derivative.push(heisenberg.trace_product(rho).re);
        let value = phi.trace_product(rho).re;
        if k == 0 {
            first = value;
        }
        last = value;
        Ok(())
    })?;
    let integral = simpson(&derivative, dt);
    Ok(BasicEqualityReport {
        residual: (last - integral - first).abs(),
        initial: first,
        final_value: last,
        integral,
        dt,
        intervals,
    })
}

/// Composite Simpson; an odd interval count ends with a 3/8 panel.
fn simpson(y: &[f64], h: f64) -> f64 {
    let intervals = y.len() - 1;
    let (even, tail) = if intervals % 2 == 0 {
        (intervals, 0.0)
    } else {
        let k = intervals - 3;
        (k, 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]))
    };
    let mut sum = 0.0;
    for p in (0..even).step_by(2) {
        sum += y[p] + 4.0 * y[p + 1] + y[p + 2];
    }
    sum * h / 3.0 + tail
}

#[derive(Debug, Clone, Serialize)]
pub struct RmeReport {
    pub kappa: f64,
    pub s_values: Vec<f64>,
    /// `λ_max` of the Hermitian part of `R(s) = Df_ts − (κ−c′)s⁻¹f′_ts`.
    pub max_eigenvalues: Vec<f64>,
    /// Positive parts of `max_eigenvalues`.
    pub residuals: Vec<f64>,
    /// Least-squares `C` in `residual ≈ C s⁻²`.
    pub fitted_constant: f64,
    /// `residual − C s⁻²`.
    pub excess: Vec<f64>,
    /// Power law through the residuals; absent unless all are positive.
    pub fit: Option<ScalingFit>,
}

impl RmeReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }
}

/// Evaluates the monotonicity remainder at `t = s/2` for every `s`.
pub fn verify_rme(
    spec: &ModelSpec,
    frame: &ConeFrame,
    f: &SmoothCutoff,
    s_list: &[f64],
) -> Result<RmeReport> {
    let kappa = velocity_operator(spec)?.kappa;
    if f.c_prime() <= kappa {
        return Err(Error::rejected(format!(
            "c′ = {} must exceed κ = {kappa}",
            f.c_prime()
        )));
    }
    if s_list.is_empty() || s_list.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::rejected("s values must be positive and finite"));
    }
    let generator = Liouvillian::new(spec)?;
    let geometry = &spec.geometry;
    let max_eigenvalues: Vec<f64> = s_list
        .par_iter()
        .map(|&s| {
            let at = frame.at(s, s / 2.0)?;
            let f0 = diagonal_observable(f, 0, &at, geometry)?;
            let f1 = diagonal_observable(f, 1, &at, geometry)?;
            let d = &generator.apply_dual(&f0)? + &time_derivative_observable(f, &at, geometry)?;
            let remainder = &d - &f1.scale_real((kappa - f.c_prime()) / s);
            let eig = hermitian_eigvals(&remainder.hermitian_part())?;
            Ok(*eig.last().expect("nonempty lattice"))
        })
        .collect::<Result<_>>()?;
    let residuals: Vec<f64> = max_eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let num: f64 = s_list.iter().zip(&residuals).map(|(s, r)| r * s.powi(-2)).sum();
    let den: f64 = s_list.iter().map(|s| s.powi(-4)).sum();
    let fitted_constant = num / den;
    let excess = s_list
        .iter()
        .zip(&residuals)
        .map(|(s, r)| r - fitted_constant * s.powi(-2))
        .collect();
    let fit = if s_list.len() >= 2 && residuals.iter().all(|&r| r > 0.0) {
        Some(ScalingFit::power_law(s_list, &residuals)?)
    } else {
        None
    };
    Ok(RmeReport {
        kappa,
        s_values: s_list.to_vec(),
        max_eigenvalues,
        residuals,
        fitted_constant,
        excess,
        fit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub a: f64,
    pub order: usize,
    pub s_values: Vec<f64>,
    /// `E(s)`, the operator norm of the truncated-series remainder.
    pub errors: Vec<f64>,
    /// `sup|f^{(n)}|/n! · ‖|B_n|‖ · s⁻ⁿ`, with `|B_n|` taken entrywise.
    pub bounds: Vec<f64>,
    /// `max_s E(s)·sⁿ`.
    pub fitted_constant: f64,
    pub within_bound: bool,
    /// Power law through `E(s)`; absent when the remainder vanishes.
    pub fit: Option<ScalingFit>,
}

/// Remainder of the order-`n` commutator expansion of `[A, f(x_s)]`,
/// `x_s = s⁻¹(⟨x⟩ − a)`, for every `s`.
pub fn verify_commutator_expansion(
    a_op: &ComplexMatrix,
    f: &SmoothCutoff,
    geometry: &LatticeGeometry,
    a: f64,
    s_list: &[f64],
    n: usize,
) -> Result<ExpansionReport> {
    if !(1..=MAX_DERIVATIVE_ORDER).contains(&n) {
        return Err(Error::rejected(format!(
            "expansion order n = {n} outside [1, {MAX_DERIVATIVE_ORDER}]"
        )));
    }
    if a_op.dim() != geometry.n_sites() {
        return Err(Error::rejected("operator does not match the lattice"));
    }
    if !a.is_finite() || s_list.is_empty() || s_list.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::rejected("offset must be finite and s values positive"));
    }
    let b: Vec<ComplexMatrix> = (0..=n)
        .map(|k| iterated_adjoint(a_op, geometry, k))
        .collect::<Result<_>>()?;
    let abs_bn = ComplexMatrix::from_fn(a_op.dim(), |i, j| b[n][(i, j)].norm().into());
    let bn_norm = operator_norm(&abs_bn)?;
    let sup = derivative_sup(f, n)?;
    let n_factorial: f64 = (1..=n).map(|k| k as f64).product();

    let errors: Vec<f64> = s_list
        .par_iter()
        .map(|&s| {
            let xs: Vec<f64> = geometry.weights().iter().map(|w| (w - a) / s).collect();
            let f0 = f.diagonal(0, &xs)?;
            let mut rem = crate::linalg::commutator(a_op, &f0)?;
            let mut factorial = 1.0;
            for k in 1..n {
                factorial *= k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let term = b[k].matmul(&f.diagonal(k, &xs)?);
                rem = &rem - &term.scale_real(sign * s.powi(-(k as i32)) / factorial);
            }
            operator_norm(&rem)
        })
        .collect::<Result<_>>()?;
    let bounds: Vec<f64> = s_list
        .iter()
        .map(|s| sup / n_factorial * bn_norm * s.powi(-(n as i32)))
        .collect();
    let within_bound = errors.iter().zip(&bounds).all(|(e, b)| *e <= *b * (1.0 + 1e-9) + 1e-14);
    let fitted_constant = s_list
        .iter()
        .zip(&errors)
        .map(|(s, e)| e * s.powi(n as i32))
        .fold(0.0, f64::max);
    let fit = if s_list.len() >= 2 && errors.iter().all(|&e| e > 1e-14) {
        Some(ScalingFit::power_law(s_list, &errors)?)
    } else {
        None
    };
    Ok(ExpansionReport {
        a,
        order: n,
        s_values: s_list.to_vec(),
        errors,
        bounds,
        fitted_constant,
        within_bound,
        fit,
    })
}

/// Largest spread of fitted slopes across reports; `None` if any lacks a fit.
pub fn slope_spread(reports: &[ExpansionReport]) -> Option<f64> {
    let slopes: Option<Vec<f64>> = reports.iter().map(|r| r.fit.as_ref().map(|f| f.slope)).collect();
    let slopes = slopes?;
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    Some(hi - lo)
}

/// `sup |f^{(n)}|` on a fine grid of the support, padded by 1%.
fn derivative_sup(f: &SmoothCutoff, n: usize) -> Result<f64> {
    let (lo, hi) = f.support_window();
    let samples = 20_000;
    let mut sup = 0.0f64;
    for k in 0..=samples {
        let mu = lo + (hi - lo) * k as f64 / samples as f64;
        sup = sup.max(f.derivative(n, mu)?.abs());
    }
    Ok(sup * 1.01)
}
