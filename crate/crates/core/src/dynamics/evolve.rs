//! Time evolution `ρ_t = e^{Lt} ρ_0`.
//!
//! Two backends share one driver. `Rk4` integrates the `N × N` state with a
//! fixed step and suits large lattices. `SuperopExp` exponentiates the
//! `N² × N²` superoperator once per distinct interval and serves as the
//! reference on small lattices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::generator::Liouvillian;
use super::state::{DensityMatrix, InitialState};
use crate::linalg::{hermitian_eigvals, matrix_exp, unvec, vec, ComplexMatrix, Complex64};
use crate::model::ModelSpec;
use crate::tolerances::{
    HERMITIAN_INPUT, POSITIVITY_ABORT, RK4_MAX_HALVINGS, RK4_STEP_SCALE, RK4_TRACE_DRIFT,
    SUPEROP_MAX_SITES, SUPEROP_TRACE_DRIFT,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    SuperopExp,
    Rk4,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "superop_exp" => Ok(Backend::SuperopExp),
            "rk4" => Ok(Backend::Rk4),
            other => Err(Error::rejected(format!(
                "unknown integrator backend `{other}` (expected superop_exp or rk4)"
            ))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::SuperopExp => "superop_exp",
            Backend::Rk4 => "rk4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub backend: Backend,
    /// Overrides the default RK4 step `0.01 / max(‖H‖, g, 1)`.
    pub rk4_step: Option<f64>,
    /// Eigenvalue check of every sampled state.
    pub check_positivity: bool,
}

impl EvolveOptions {
    pub fn new(backend: Backend) -> Self {
        EvolveOptions {
            backend,
            rk4_step: None,
            check_positivity: true,
        }
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self::new(Backend::Rk4)
    }
}

/// Numerical health of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionStats {
    pub backend: Backend,
    /// RK4 step actually used; zero for the exponential backend.
    pub step: f64,
    pub halvings: usize,
    pub steps: usize,
    /// `max_t |Tr ρ_t − Tr ρ_0|` over sampled times.
    pub trace_drift: f64,
    /// Most negative eigenvalue of any sampled state (or the smallest one
    /// if all are positive); `+∞` when positivity was not checked.
    pub min_eig_seen: f64,
    /// Largest `‖ρ − (ρ + ρ†)/2‖_F` removed in a single step.
    pub max_hermitization: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: EvolutionStats,
}

impl EvolutionResult {
    pub fn trace_drift(&self) -> f64 {
        self.stats.trace_drift
    }

    pub fn min_eig_seen(&self) -> f64 {
        self.stats.min_eig_seen
    }

    pub fn integrator(&self) -> Backend {
        self.stats.backend
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("at least the initial state")
    }
}

/// Sampling grid `0, dt, 2dt, …` closed by `t_final`.
pub fn time_grid(t_final: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::rejected(format!("t_final = {t_final} must be nonnegative")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::rejected(format!("dt = {dt} must be positive")));
    }
    let intervals = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..intervals).map(|k| k as f64 * dt).collect();
    times.push(t_final);
    Ok(times)
}

/// Evolves `ρ_st + λ` and keeps every sampled state.
pub fn evolve(
    spec: &ModelSpec,
    initial: &InitialState,
    t_final: f64,
    dt: f64,
    backend: Backend,
) -> Result<EvolutionResult> {
    let generator = Liouvillian::new(spec)?;
    evolve_matrix(&generator, &initial.rho0(), t_final, dt, EvolveOptions::new(backend))
}

pub fn evolve_matrix(
    generator: &Liouvillian,
    rho0: &ComplexMatrix,
    t_final: f64,
    dt: f64,
    options: EvolveOptions,
) -> Result<EvolutionResult> {
    let times = time_grid(t_final, dt)?;
    let target = rho0.trace().re;
    let mut states = Vec::with_capacity(times.len());
    let stats = evolve_at(generator, rho0, &times, options, |k, _, rho, min_eig| {
        if k == 0 {
            states.clear();
        }
        states.push(DensityMatrix::from_evolution(rho.clone(), target, min_eig));
        Ok(())
    })?;
    Ok(EvolutionResult {
        times,
        states,
        stats,
    })
}

/// Streams `ρ_t` at each of `times` (strictly increasing, starting at 0)
/// to `observer(index, t, ρ_t, λ_min)`.
///
/// If the RK4 trace check forces a smaller step, the run restarts and the
/// observer sees indices from 0 again.
pub fn evolve_at<F>(
    generator: &Liouvillian,
    rho0: &ComplexMatrix,
    times: &[f64],
    options: EvolveOptions,
    mut observer: F,
) -> Result<EvolutionStats>
where
    F: FnMut(usize, f64, &ComplexMatrix, f64) -> Result<()>,
{
    validate_times(times)?;
    let n = generator.dim();
    if rho0.dim() != n {
        return Err(Error::rejected(format!(
            "state of dimension {} for a model with {n} sites",
            rho0.dim()
        )));
    }
    if rho0.hermiticity_defect() > HERMITIAN_INPUT * rho0.frobenius_norm().max(1.0) {
        return Err(Error::rejected("initial state is not Hermitian"));
    }
    match options.backend {
        Backend::SuperopExp => {
            if n > SUPEROP_MAX_SITES {
                return Err(Error::rejected(format!(
                    "superop_exp backend supports at most {SUPEROP_MAX_SITES} sites, model has {n}"
                )));
            }
            run_superop(generator, rho0, times, options, &mut observer)
        }
        Backend::Rk4 => {
            let base = match options.rk4_step {
                Some(h) if h > 0.0 && h.is_finite() => h,
                Some(h) => return Err(Error::rejected(format!("RK4 step {h} must be positive"))),
                None => RK4_STEP_SCALE / generator.rate_scale(),
            };
            let mut step = base;
            for halvings in 0..=RK4_MAX_HALVINGS {
                let stats = run_rk4(generator, rho0, times, step, halvings, options, &mut observer)?;
                if stats.trace_drift <= RK4_TRACE_DRIFT {
                    return Ok(stats);
                }
                log::warn!(
                    "RK4 trace drift {:e} with step {step:e}; halving",
                    stats.trace_drift
                );
                step *= 0.5;
            }
            Err(Error::numeric(format!(
                "RK4 trace drift above {RK4_TRACE_DRIFT:e} after {RK4_MAX_HALVINGS} halvings"
            )))
        }
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    match times.first() {
        Some(&t0) if t0 == 0.0 => {}
        _ => return Err(Error::rejected("sample times must start at 0")),
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::rejected("sample times must be finite and strictly increasing"));
    }
    Ok(())
}

/// Tracks the per-run health numbers shared by both backends.
struct Monitor {
    target: f64,
    trace_drift: f64,
    min_eig: f64,
    max_hermitization: f64,
    check_positivity: bool,
}

impl Monitor {
    fn new(rho0: &ComplexMatrix, check_positivity: bool) -> Self {
        Monitor {
            target: rho0.trace().re,
            trace_drift: 0.0,
            min_eig: f64::INFINITY,
            max_hermitization: 0.0,
            check_positivity,
        }
    }

    /// Replaces `ρ` by its Hermitian part and records the correction.
    fn hermitize(&mut self, rho: &mut ComplexMatrix) {
        let correction = 0.5 * rho.hermiticity_defect();
        if correction > 0.0 {
            *rho = rho.hermitian_part();
            log::trace!("hermitization correction {correction:e}");
        }
        self.max_hermitization = self.max_hermitization.max(correction);
    }

    /// Trace and positivity checks at a sample time; returns `λ_min`.
    fn sample(&mut self, t: f64, rho: &ComplexMatrix) -> Result<f64> {
        self.trace_drift = self.trace_drift.max((rho.trace().re - self.target).abs());
        if !rho.is_finite() {
            return Err(Error::numeric(format!("state became non-finite at t = {t}")));
        }
        if !self.check_positivity {
            return Ok(f64::INFINITY);
        }
        let min = hermitian_eigvals(rho)?[0];
        self.min_eig = self.min_eig.min(min);
        if min < POSITIVITY_ABORT {
            return Err(Error::numeric(format!(
                "positivity lost at t = {t}: eigenvalue {min:e} below {POSITIVITY_ABORT:e}; the time step is too large"
            )));
        }
        Ok(min)
    }
}

fn run_rk4<F>(
    generator: &Liouvillian,
    rho0: &ComplexMatrix,
    times: &[f64],
    step: f64,
    halvings: usize,
    options: EvolveOptions,
    observer: &mut F,
) -> Result<EvolutionStats>
where
    F: FnMut(usize, f64, &ComplexMatrix, f64) -> Result<()>,
{
    let mut monitor = Monitor::new(rho0, options.check_positivity);
    let mut rho = rho0.clone();
    monitor.hermitize(&mut rho);
    let min = monitor.sample(0.0, &rho)?;
    observer(0, 0.0, &rho, min)?;
    let mut steps = 0;
    for (k, w) in times.windows(2).enumerate() {
        let interval = w[1] - w[0];
        let substeps = (interval / step - 1e-9).ceil().max(1.0) as usize;
        let h = interval / substeps as f64;
        for _ in 0..substeps {
            rho = rk4_step(generator, &rho, h)?;
            monitor.hermitize(&mut rho);
        }
        steps += substeps;
        let min = monitor.sample(w[1], &rho)?;
        observer(k + 1, w[1], &rho, min)?;
    }
    Ok(EvolutionStats {
        backend: Backend::Rk4,
        step,
        halvings,
        steps,
        trace_drift: monitor.trace_drift,
        min_eig_seen: monitor.min_eig,
        max_hermitization: monitor.max_hermitization,
    })
}

fn rk4_step(generator: &Liouvillian, rho: &ComplexMatrix, h: f64) -> Result<ComplexMatrix> {
    let axpy = |base: &ComplexMatrix, k: &ComplexMatrix, c: f64| -> ComplexMatrix {
        let mut out = base.clone();
        for (o, &x) in out.as_mut_slice().iter_mut().zip(k.as_slice()) {
            *o += x * c;
        }
        out
    };
    let k1 = generator.apply(rho)?;
    let k2 = generator.apply(&axpy(rho, &k1, 0.5 * h))?;
    let k3 = generator.apply(&axpy(rho, &k2, 0.5 * h))?;
    let k4 = generator.apply(&axpy(rho, &k3, h))?;
    let mut out = rho.clone();
    let (c1, c2) = (h / 6.0, h / 3.0);
    for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
        *o += k1.as_slice()[i] * c1
            + k2.as_slice()[i] * c2
            + k3.as_slice()[i] * c2
            + k4.as_slice()[i] * c1;
    }
    Ok(out)
}

fn run_superop<F>(
    generator: &Liouvillian,
    rho0: &ComplexMatrix,
    times: &[f64],
    options: EvolveOptions,
    observer: &mut F,
) -> Result<EvolutionStats>
where
    F: FnMut(usize, f64, &ComplexMatrix, f64) -> Result<()>,
{
    let mut monitor = Monitor::new(rho0, options.check_positivity);
    let superop = generator.superoperator();
    let mut propagators: HashMap<u64, ComplexMatrix> = HashMap::new();
    let mut rho = rho0.clone();
    monitor.hermitize(&mut rho);
    let min = monitor.sample(0.0, &rho)?;
    observer(0, 0.0, &rho, min)?;
    for (k, w) in times.windows(2).enumerate() {
        let interval = w[1] - w[0];
        // Grids built as k·dt produce a handful of distinct intervals.
        let key = (interval * 1e12).round() as u64;
        let propagator = match propagators.get(&key) {
            Some(p) => p,
            None => {
                let p = matrix_exp(&superop.scale(Complex64::new(interval, 0.0)))?;
                propagators.entry(key).or_insert(p)
            }
        };
        rho = unvec(&propagator.matvec(&vec(&rho)));
        monitor.hermitize(&mut rho);
        let min = monitor.sample(w[1], &rho)?;
        observer(k + 1, w[1], &rho, min)?;
    }
    if monitor.trace_drift > SUPEROP_TRACE_DRIFT {
        return Err(Error::numeric(format!(
            "superoperator exponential drifted the trace by {:e}",
            monitor.trace_drift
        )));
    }
    Ok(EvolutionStats {
        backend: Backend::SuperopExp,
        step: 0.0,
        halvings: 0,
        steps: times.len() - 1,
        trace_drift: monitor.trace_drift,
        min_eig_seen: monitor.min_eig,
        max_hermitization: monitor.max_hermitization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::*;
    use crate::linalg::hermitian_eigs;
    use crate::model::{build_hamiltonian, KrausKind, LatticeGeometry};

    fn pure_state(geometry: &LatticeGeometry, amplitudes: &[(i64, Complex64)]) -> ComplexMatrix {
        let n = geometry.n_sites();
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        for &(x, a) in amplitudes {
            psi[geometry.index_of(x).unwrap()] = a;
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        ComplexMatrix::from_fn(n, |i, j| psi[i] * psi[j].conj() / (norm * norm))
    }

    #[test]
    fn grid_construction() {
        assert_eq!(time_grid(0.0, 0.1).unwrap(), vec![0.0]);
        assert_eq!(time_grid(0.3, 0.1).unwrap().len(), 4);
        assert_eq!(time_grid(0.25, 0.1).unwrap(), vec![0.0, 0.1, 0.2, 0.25]);
        assert!(time_grid(-1.0, 0.1).is_err());
        assert!(time_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let spec = ModelSpec::chain(3, 1.0, KrausKind::Dephasing, 0.5, 2).unwrap();
        let init = InitialState::localized(&spec.geometry, 1.2).unwrap();
        for backend in [Backend::Rk4, Backend::SuperopExp] {
            let res = evolve(&spec, &init, 0.0, 0.1, backend).unwrap();
            assert_eq!(res.times, vec![0.0]);
            assert_eq!(res.states[0].matrix(), &init.rho0());
        }
    }

    #[test]
    fn unitary_evolution_matches_spectral_propagator() {
        let spec = ModelSpec::chain(4, 1.0, KrausKind::Dephasing, 0.0, 2).unwrap();
        let g = &spec.geometry;
        let rho0 = pure_state(g, &[(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 1.0))]);
        let generator = Liouvillian::new(&spec).unwrap();
        let res = evolve_matrix(&generator, &rho0, 3.0, 0.5, EvolveOptions::new(Backend::Rk4)).unwrap();
        let eig = hermitian_eigs(&build_hamiltonian(&spec).unwrap()).unwrap();
        for (t, state) in res.times.iter().zip(&res.states) {
            let u = eig.map_spectrum(|e| Complex64::new(0.0, -e * t).exp());
            let exact = u.matmul(&rho0).matmul(&u.adjoint());
            assert_close(state.matrix(), &exact, 1e-8);
            let purity = state.matrix().trace_product(state.matrix()).re;
            assert!((purity - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn dephasing_decays_coherences_only() {
        let g = 0.7;
        let spec = ModelSpec::chain(2, 0.0, KrausKind::Dephasing, g, 2).unwrap();
        let mut rng = TestRng::new(5);
        let rho0 = rng.density(5);
        let generator = Liouvillian::new(&spec).unwrap();
        for backend in [Backend::Rk4, Backend::SuperopExp] {
            let res = evolve_matrix(&generator, &rho0, 2.0, 0.25, EvolveOptions::new(backend)).unwrap();
            for (t, state) in res.times.iter().zip(&res.states) {
                let exact = ComplexMatrix::from_fn(5, |i, j| {
                    if i == j {
                        rho0[(i, j)]
                    } else {
                        rho0[(i, j)] * (-g * t).exp()
                    }
                });
                assert_close(state.matrix(), &exact, 1e-10);
            }
        }
    }

    #[test]
    fn backends_agree_on_nine_sites() {
        let spec = ModelSpec::chain(4, 1.0, KrausKind::DirectedJump, 1.0, 3).unwrap();
        let init = InitialState::localized(&spec.geometry, 1.2).unwrap();
        let a = evolve(&spec, &init, 5.0, 0.5, Backend::Rk4).unwrap();
        let b = evolve(&spec, &init, 5.0, 0.5, Backend::SuperopExp).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_close(x.matrix(), y.matrix(), 1e-6);
        }
        assert!(a.trace_drift() <= RK4_TRACE_DRIFT);
        assert!(b.trace_drift() <= SUPEROP_TRACE_DRIFT);
    }

    #[test]
    fn semigroup_property() {
        let spec = ModelSpec::chain(2, 0.8, KrausKind::DirectedJump, 0.6, 3).unwrap();
        let generator = Liouvillian::new(&spec).unwrap();
        let mut rng = TestRng::new(9);
        let rho0 = rng.density(5);
        let opts = EvolveOptions::new(Backend::SuperopExp);
        let whole = evolve_matrix(&generator, &rho0, 1.7, 1.7, opts).unwrap();
        let first = evolve_matrix(&generator, &rho0, 0.6, 0.6, opts).unwrap();
        let second = evolve_matrix(&generator, first.final_state().matrix(), 1.1, 1.1, opts).unwrap();
        assert_close(whole.final_state().matrix(), second.final_state().matrix(), 1e-9);
    }

    #[test]
    fn trace_norm_contracts_and_positivity_holds() {
        let spec = ModelSpec::chain(3, 1.0, KrausKind::DirectedJump, 1.0, 3).unwrap();
        let generator = Liouvillian::new(&spec).unwrap();
        let mut rng = TestRng::new(13);
        let rho0 = &rng.density(7) - &rng.density(7).scale_real(0.5);
        let initial_norm = rho0.trace_norm().unwrap();
        let mut opts = EvolveOptions::new(Backend::Rk4);
        opts.check_positivity = false;
        let res = evolve_matrix(&generator, &rho0, 4.0, 0.2, opts).unwrap();
        for state in &res.states {
            assert!(state.matrix().trace_norm().unwrap() <= initial_norm + 1e-8);
        }
        let res = evolve_matrix(&generator, &rng.density(7), 4.0, 0.2, EvolveOptions::default()).unwrap();
        assert!(res.min_eig_seen() >= crate::tolerances::SAMPLED_POSITIVITY);
        assert!(res.stats.max_hermitization <= crate::tolerances::HERMITIZATION_PER_STEP);
    }

    #[test]
    fn oversized_step_aborts_on_positivity() {
        let spec = ModelSpec::chain(3, 1.0, KrausKind::DirectedJump, 4.0, 3).unwrap();
        let generator = Liouvillian::new(&spec).unwrap();
        let rho0 = pure_state(&spec.geometry, &[(1, Complex64::new(1.0, 0.0))]);
        let mut opts = EvolveOptions::new(Backend::Rk4);
        opts.rk4_step = Some(0.6);
        let err = evolve_matrix(&generator, &rho0, 3.0, 0.6, opts).unwrap_err();
        assert!(err.is_numeric(), "{err}");
        assert!(err.to_string().contains("positivity"), "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = ModelSpec::chain(20, 1.0, KrausKind::Dephasing, 1.0, 2).unwrap();
        let init = InitialState::localized(&spec.geometry, 1.2).unwrap();
        let err = evolve(&spec, &init, 1.0, 0.1, Backend::SuperopExp).unwrap_err();
        assert!(!err.is_numeric());
        let small = ModelSpec::chain(2, 1.0, KrausKind::Dephasing, 1.0, 2).unwrap();
        let generator = Liouvillian::new(&small).unwrap();
        let wrong = ComplexMatrix::identity(3);
        assert!(evolve_matrix(&generator, &wrong, 1.0, 0.1, EvolveOptions::default()).is_err());
        let rho = ComplexMatrix::identity(5);
        let opts = EvolveOptions::default();
        assert!(evolve_at(&generator, &rho, &[0.0, 0.5, 0.5], opts, |_, _, _, _| Ok(())).is_err());
        assert!(evolve_at(&generator, &rho, &[0.1, 0.5], opts, |_, _, _, _| Ok(())).is_err());
    }
}
