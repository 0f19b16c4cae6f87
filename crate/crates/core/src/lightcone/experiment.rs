//! Leakage out of the cone and the scaling experiment: for each scale `s`
//! the state is evolved to `t = s` and the propagation observable
//! `⟨f_ts⟩_t` is recorded, together with the sharp leakage
//! `Tr(χ_η ρ_t)` on a grid of radii beyond `η = a + cs`.

use serde::Serialize;

use super::fit::{linear_fit, ScalingFit};
use super::velocity::velocity_operator;
use crate::cutoffs::{diagonal_observable, ConeFrame, SmoothCutoff};
use crate::dynamics::{evolve_at, DensityMatrix, EvolutionStats, EvolveOptions, InitialState, Liouvillian};
use crate::linalg::ComplexMatrix;
use crate::model::{LatticeGeometry, ModelSpec};
use crate::tolerances::{BOUNDARY_CLEARANCE, FRONT_FIT_FRACTION, FRONT_THRESHOLD, LEAKAGE_DUST};
use crate::{Error, Result};

/// `Tr(χ_η ρ)`; values within `LEAKAGE_DUST` below zero are clamped.
pub fn leakage(rho: &DensityMatrix, eta: f64, geometry: &LatticeGeometry) -> f64 {
    leakage_of(rho.matrix(), eta, geometry)
}

pub fn leakage_of(rho: &ComplexMatrix, eta: f64, geometry: &LatticeGeometry) -> f64 {
    let total: f64 = geometry
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w >= eta)
        .map(|(i, _)| rho[(i, i)].re)
        .sum();
    if total < 0.0 && total >= -LEAKAGE_DUST {
        0.0
    } else {
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightconeOptions {
    /// Radii per scale: `η = a + cs + k·eta_step` for `k < eta_points`.
    pub eta_points: usize,
    pub eta_step: f64,
    /// Sampling interval of the front detection.
    pub front_dt: f64,
    pub evolve: EvolveOptions,
}

impl Default for LightconeOptions {
    fn default() -> Self {
        LightconeOptions {
            eta_points: 5,
            eta_step: 1.0,
            front_dt: 0.1,
            evolve: EvolveOptions::default(),
        }
    }
}

/// One line of `leakage.csv`. Leakage and `⟨f_ts⟩` are net of the
/// stationary part when the initial state has one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageRow {
    pub s: f64,
    pub t: f64,
    pub eta: f64,
    pub leakage: f64,
    pub f_expectation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontCrossing {
    pub radius: f64,
    pub time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportReport {
    pub kappa: f64,
    pub s_values: Vec<f64>,
    /// `η = a + cs` for each `s`.
    pub eta_values: Vec<f64>,
    /// `Tr(χ_η ρ_s) − Tr(χ_η ρ_st)` at those radii.
    pub leakages: Vec<f64>,
    /// `⟨f_ts⟩_t − Tr(f_ts ρ_st)` at `t = s`.
    pub f_expectations: Vec<f64>,
    pub rows: Vec<LeakageRow>,
    /// Slope of `log ⟨f_ts⟩` against `log s`.
    pub fitted_exponent: f64,
    pub front: Vec<FrontCrossing>,
    /// Slope of crossing radius against crossing time; absent when fewer
    /// than two radii were crossed.
    pub front_speed: Option<f64>,
    /// Largest net leakage seen at `BOUNDARY_CLEARANCE` sites from the edge.
    pub boundary_leakage: f64,
    pub run_valid: bool,
    pub evolution: EvolutionStats,
}

pub fn run_lightcone_experiment(
    spec: &ModelSpec,
    frame: &ConeFrame,
    f: &SmoothCutoff,
    s_list: &[f64],
    initial: &InitialState,
    options: &LightconeOptions,
) -> Result<(TransportReport, ScalingFit)> {
    let geometry = &spec.geometry;
    check_hypotheses(geometry, frame, f, initial)?;
    let kappa = velocity_operator(spec)?.kappa;
    if f.c() <= kappa {
        return Err(Error::rejected(format!(
            "c = {} does not exceed κ = {kappa}: the cone must be faster than the velocity bound",
            f.c()
        )));
    }
    if f.c_prime() <= kappa {
        return Err(Error::rejected(format!(
            "c′ = {} must exceed κ = {kappa}",
            f.c_prime()
        )));
    }
    let s_values = sorted_scales(s_list)?;
    if options.eta_points == 0 || !(options.eta_step >= 0.0) || !(options.front_dt > 0.0) {
        return Err(Error::rejected("eta_points ≥ 1, eta_step ≥ 0 and front_dt > 0 required"));
    }

    let s_max = *s_values.last().expect("nonempty");
    let mut times: Vec<f64> = (0..)
        .map(|k| k as f64 * options.front_dt)
        .take_while(|&t| t < s_max)
        .chain(s_values.iter().copied())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    // Front radii: ⟨x⟩ for x ≥ 1 that start empty and stay clear of the edge.
    let m = geometry.half_width();
    let clearance_index = m.saturating_sub(BOUNDARY_CLEARANCE);
    let boundary_eta = (clearance_index as f64).hypot(1.0);
    let radii: Vec<f64> = (1..clearance_index)
        .map(|x| (x as f64).hypot(1.0))
        .filter(|&r| r >= initial.localization_radius())
        .collect();

    let stationary = initial.stationary().map(|st| st.matrix().clone());
    let stationary_leak = |eta: f64| stationary.as_ref().map_or(0.0, |st| leakage_of(st, eta, geometry));
    let generator = Liouvillian::new(spec)?;

    let mut per_s: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut rows = Vec::new();
    let mut history: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut boundary_leakage = 0.0f64;

    let evolution = evolve_at(&generator, &initial.rho0(), &times, options.evolve, |k, t, rho, _| {
        if k == 0 {
            per_s.clear();
            rows.clear();
            history.clear();
            boundary_leakage = 0.0;
        }
        let net = |eta: f64| leakage_of(rho, eta, geometry) - stationary_leak(eta);
        boundary_leakage = boundary_leakage.max(net(boundary_eta));
        history.push((t, radii.iter().map(|&r| net(r)).collect()));

        if let Some(&s) = s_values.iter().find(|&&s| (s - t).abs() < 1e-12) {
            let frame_s = frame.at(s, s)?;
            let obs = diagonal_observable(f, 0, &frame_s, geometry)?;
            let mut fe = obs.trace_product(rho).re;
            if let Some(st) = &stationary {
                fe -= obs.trace_product(st).re;
            }
            let eta0 = frame.a + f.c() * s;
            per_s.push((s, eta0, net(eta0), fe));
            for j in 0..options.eta_points {
                let eta = eta0 + j as f64 * options.eta_step;
                rows.push(LeakageRow {
                    s,
                    t,
                    eta,
                    leakage: net(eta),
                    f_expectation: fe,
                });
            }
        }
        Ok(())
    })?;

    let f_expectations: Vec<f64> = per_s.iter().map(|p| p.3).collect();
    let fit = ScalingFit::power_law(&s_values, &f_expectations)?;
    let front = front_crossings(&radii, &history);
    let front_speed = front_fit(&front);
    let report = TransportReport {
        kappa,
        eta_values: per_s.iter().map(|p| p.1).collect(),
        leakages: per_s.iter().map(|p| p.2).collect(),
        s_values,
        f_expectations,
        rows,
        fitted_exponent: fit.slope,
        front,
        front_speed,
        boundary_leakage,
        run_valid: boundary_leakage < FRONT_THRESHOLD,
        evolution,
    };
    if !report.run_valid {
        log::warn!(
            "leakage {:e} reached ⟨x⟩ = {boundary_eta:.3}, within {BOUNDARY_CLEARANCE} sites of the boundary; run flagged invalid",
            report.boundary_leakage
        );
    }
    Ok((report, fit))
}

fn check_hypotheses(
    geometry: &LatticeGeometry,
    frame: &ConeFrame,
    f: &SmoothCutoff,
    initial: &InitialState,
) -> Result<()> {
    if (frame.c_prime - f.c_prime()).abs() > 1e-12 * f.c_prime() {
        return Err(Error::rejected("frame and cutoff disagree on c′"));
    }
    if initial.perturbation().dim() != geometry.n_sites() {
        return Err(Error::rejected("initial state does not match the lattice"));
    }
    let lam = initial.perturbation();
    let n = geometry.n_sites();
    for (i, &w) in geometry.weights().iter().enumerate() {
        if w >= frame.b && (0..n).any(|j| lam[(i, j)].norm() != 0.0 || lam[(j, i)].norm() != 0.0) {
            return Err(Error::rejected(format!(
                "χ_b λ ≠ 0 for b = {}: the perturbation reaches x = {}",
                frame.b,
                geometry.position(i)
            )));
        }
    }
    Ok(())
}

fn sorted_scales(s_list: &[f64]) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = s_list.to_vec();
    if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::rejected("every s must be positive and finite"));
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 2 {
        return Err(Error::rejected("at least two distinct values of s are needed for a fit"));
    }
    Ok(s)
}

/// First time each radius carries net leakage `≥ FRONT_THRESHOLD`,
/// interpolated linearly in `log leakage` between samples.
fn front_crossings(radii: &[f64], history: &[(f64, Vec<f64>)]) -> Vec<FrontCrossing> {
    let mut out = Vec::new();
    for (r_idx, &radius) in radii.iter().enumerate() {
        let hit = history.iter().position(|(_, leaks)| leaks[r_idx] >= FRONT_THRESHOLD);
        let Some(k) = hit else { continue };
        let (t1, l1) = (history[k].0, history[k].1[r_idx]);
        let time = if k == 0 {
            t1
        } else {
            let (t0, l0) = (history[k - 1].0, history[k - 1].1[r_idx]);
            if l0 > 0.0 {
                let frac = (FRONT_THRESHOLD.ln() - l0.ln()) / (l1.ln() - l0.ln());
                t0 + frac.clamp(0.0, 1.0) * (t1 - t0)
            } else {
                t1
            }
        };
        out.push(FrontCrossing { radius, time });
    }
    out
}

/// Slope of radius against time over the middle `FRONT_FIT_FRACTION` of
/// the crossed radii.
fn front_fit(front: &[FrontCrossing]) -> Option<f64> {
    let n = front.len();
    let keep = ((n as f64) * FRONT_FIT_FRACTION).round() as usize;
    let start = (n - keep.min(n)) / 2;
    let window = &front[start..start + keep.min(n)];
    if window.len() < 2 {
        return None;
    }
    let t: Vec<f64> = window.iter().map(|c| c.time).collect();
    let r: Vec<f64> = window.iter().map(|c| c.radius).collect();
    linear_fit(&t, &r).ok().map(|(slope, _, _)| slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::make_cutoff;
    use crate::dynamics::{DensityMatrix, EvolveOptions};
    use crate::model::{KrausFamily, KrausKind};

    #[test]
    fn leakage_examples() {
        let g = LatticeGeometry::new(4).unwrap();
        let mut m = ComplexMatrix::zeros(9);
        m[(g.index_of(3).unwrap(), g.index_of(3).unwrap())] = 1.0.into();
        let rho = DensityMatrix::new(m).unwrap();
        assert_eq!(leakage(&rho, 3.0, &g), 1.0);
        assert_eq!(leakage(&rho, 1.0, &g), 1.0);
        assert_eq!(leakage(&rho, 3.2, &g), 0.0);
        let centre = InitialState::localized(&g, 1.2).unwrap();
        let rho = DensityMatrix::new(centre.rho0()).unwrap();
        assert_eq!(leakage(&rho, 1.5, &g), 0.0);
    }

    #[test]
    fn dust_is_clamped() {
        let g = LatticeGeometry::new(1).unwrap();
        let m = ComplexMatrix::from_real_diagonal(&[-1e-13, 1.0, 0.0]);
        assert_eq!(leakage_of(&m, 1.2, &g), 0.0);
        let m = ComplexMatrix::from_real_diagonal(&[-1e-9, 1.0, 0.0]);
        assert_eq!(leakage_of(&m, 1.2, &g), -1e-9);
    }

    #[test]
    fn frozen_dynamics_never_leaks() {
        let geometry = LatticeGeometry::new(10).unwrap();
        let kraus = KrausFamily::custom(21, 0.0, vec![]).unwrap();
        let spec = ModelSpec::new(geometry.clone(), 0.0, 1, vec![0.0; 21], kraus, 3).unwrap();
        let init = InitialState::localized(&geometry, 1.2).unwrap();
        let f = make_cutoff(1.5, 1.2).unwrap();
        let frame = ConeFrame::new(2.0, 1.2, 1.2, 1.0, 0.0).unwrap();
        let mut opts = LightconeOptions::default();
        opts.front_dt = 0.5;
        let err = run_lightcone_experiment(&spec, &frame, &f, &[1.0, 2.0], &init, &opts).unwrap_err();
        // ⟨f_ts⟩ is identically zero, so no power law can be fitted
        assert!(err.is_numeric(), "{err}");
        let generator = Liouvillian::new(&spec).unwrap();
        let times = [0.0, 1.0, 5.0];
        evolve_at(&generator, &init.rho0(), &times, EvolveOptions::default(), |_, _, rho, _| {
            assert_eq!(leakage_of(rho, 1.5, &geometry), 0.0);
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn hypotheses_are_enforced() {
        let spec = ModelSpec::chain(10, 1.0, KrausKind::Dephasing, 1.0, 3).unwrap();
        let kappa = velocity_operator(&spec).unwrap().kappa;
        let wide = InitialState::localized(&spec.geometry, 2.0).unwrap();
        let f = make_cutoff(1.5 * kappa, 1.2 * kappa).unwrap();
        let frame = ConeFrame::new(2.0, 1.2, 1.2 * kappa, 1.0, 0.0).unwrap();
        let opts = LightconeOptions::default();
        let err = run_lightcone_experiment(&spec, &frame, &f, &[1.0, 2.0], &wide, &opts).unwrap_err();
        assert!(err.to_string().contains("χ_b λ ≠ 0"), "{err}");

        let slow = make_cutoff(0.9 * kappa, 0.5 * kappa).unwrap();
        let frame_slow = ConeFrame::new(2.0, 1.2, 0.5 * kappa, 1.0, 0.0).unwrap();
        let narrow = InitialState::localized(&spec.geometry, 1.2).unwrap();
        let err = run_lightcone_experiment(&spec, &frame_slow, &slow, &[1.0, 2.0], &narrow, &opts).unwrap_err();
        assert!(err.to_string().contains("does not exceed κ"), "{err}");
    }

    #[test]
    fn front_fit_uses_the_middle() {
        let front: Vec<FrontCrossing> = (0..10)
            .map(|k| FrontCrossing {
                radius: k as f64,
                time: if k < 2 || k > 7 { 100.0 } else { k as f64 / 2.0 },
            })
            .collect();
        assert!((front_fit(&front).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(front_fit(&front[..1]), None);
    }
}
