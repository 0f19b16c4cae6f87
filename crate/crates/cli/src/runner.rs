//! Scenario dispatch and output files.
//!
//! Every scenario writes `audit.json`, `fits.json` and `summary.json`; the
//! scaling scenarios add `plot.svg`, and all but `audit` add a data CSV:
//!
//! | scenario   | CSV             | columns                                              |
//! |------------|-----------------|------------------------------------------------------|
//! | lightcone  | `leakage.csv`   | `s,t,eta,leakage,f_expectation`                      |
//! | rme        | `rme.csv`       | `s,max_eigenvalue,residual,excess`                   |
//! | expansion  | `expansion.csv` | `a,order,s,error,bound`                              |
//! | conjecture | `conjecture.csv`| `trial,kappa,hamiltonian_speed,environment_shift,slower` |
//! | stationary | `stationary.csv`| `x,population`                                       |

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lightcone_core::cutoffs::{make_cutoff, ConeFrame, SmoothCutoff};
use lightcone_core::dynamics::{evolve_at, stationary_state, EvolveOptions, InitialState, Liouvillian};
use lightcone_core::lightcone::{
    conjecture_scan, random_conjecture_family, run_lightcone_experiment, slope_spread, velocity_operator,
    verify_commutator_expansion, verify_rme, LightconeOptions, ScalingFit, VelocityReport,
};
use lightcone_core::model::{
    build_hamiltonian, build_kraus_family, check_assumptions, KrausFamily, LatticeGeometry, ModelSpec,
};
use lightcone_core::sampling::ModelRng;
use lightcone_core::tolerances::{FRONT_THRESHOLD, STATIONARY_RESIDUAL};
use log::info;
use serde::Serialize;

use crate::config::{ConfigErrors, Environment, Potential, RunConfig, Scenario, AUTO_C, AUTO_C_PRIME};
use crate::svg::LogLogPlot;

/// Largest fitted slope of `⟨f_ts⟩` accepted for expansion order `n`.
pub fn leakage_slope_limit(n: usize) -> f64 {
    1.5 - n as f64
}
/// Largest accepted slope of the commutator-expansion remainder.
pub fn expansion_slope_limit(n: usize) -> f64 {
    0.5 - n as f64
}
pub const LEAKAGE_R_SQUARED: f64 = 0.9;
pub const EXPANSION_R_SQUARED: f64 = 0.98;
pub const EXPANSION_SPREAD: f64 = 0.3;
pub const RME_SLOPE: f64 = -1.5;
/// Front speed limit in units of `κ`.
pub const FRONT_SPEED_FACTOR: f64 = 1.2;
/// Entrywise change of `ρ_st` tolerated after evolving it.
pub const STATIONARY_DRIFT: f64 = 1e-7;
/// Remainders at or below this count as exactly zero.
pub const EXACT_ZERO: f64 = 1e-12;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigErrors),
    /// Input the numerical modules refused.
    Rejected(String),
    Numeric(String),
    Io(String),
}

impl RunError {
    /// Process exit code: 3 for configuration problems, 4 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Rejected(_) => 3,
            RunError::Numeric(_) => 4,
            RunError::Io(_) => 1,
        }
    }

    fn from_core(scenario: Scenario, e: lightcone_core::Error) -> Self {
        match e {
            lightcone_core::Error::RejectedInput(m) => RunError::Rejected(format!("{scenario}: {m}")),
            lightcone_core::Error::NumericFailure(m) => RunError::Numeric(format!("{scenario}: {m}")),
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "invalid configuration:\n{e}"),
            RunError::Rejected(m) => write!(f, "rejected input in scenario {m}"),
            RunError::Numeric(m) => write!(f, "numerical failure in scenario {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    /// `"<="`, `">="` or `"=="`.
    pub relation: &'static str,
    pub threshold: Option<f64>,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value: Some(value),
            relation: "<=",
            threshold: Some(threshold),
        }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value: Some(value),
            relation: ">=",
            threshold: Some(threshold),
        }
    }

    fn holds(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            passed,
            value: None,
            relation: "==",
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitEntry {
    pub slope: f64,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub points: usize,
}

impl From<&ScalingFit> for FitEntry {
    fn from(f: &ScalingFit) -> Self {
        FitEntry {
            slope: f.slope,
            intercept: Some(f.intercept),
            r_squared: Some(f.r_squared),
            points: f.xs.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub config: RunConfig,
    pub kappa: f64,
    pub hamiltonian_speed: f64,
    /// `(c, c′)` after resolving `"auto"`; absent when the scenario has no cone.
    pub cone_speeds: Option<(f64, f64)>,
    pub fits: BTreeMap<String, FitEntry>,
    pub residuals: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

/// Model described by the configuration. Random potentials are drawn
/// before random environments, from one generator seeded with `seed`.
pub fn build_model(cfg: &RunConfig) -> lightcone_core::Result<ModelSpec> {
    let m = &cfg.model;
    let geometry = LatticeGeometry::new(m.half_width)?;
    let n = geometry.n_sites();
    let mut rng = ModelRng::new(cfg.seed);
    let potential = match m.potential {
        Potential::Zero => vec![0.0; n],
        Potential::Constant => vec![m.potential_amplitude; n],
        Potential::Random => (0..n).map(|_| m.potential_amplitude * rng.symmetric()).collect(),
    };
    let kraus = match m.kraus {
        Environment::RandomLocal => KrausFamily::random_local(&geometry, m.g, &mut rng)?,
        Environment::None => KrausFamily::custom(n, 0.0, vec![])?,
        builtin => build_kraus_family(builtin.builtin().expect("built-in family"), m.g, &geometry)?,
    };
    ModelSpec::new(geometry, m.hopping, m.hopping_range, potential, kraus, m.n)
}

struct Outputs {
    dir: PathBuf,
    created: bool,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn open(dir: &Path) -> Result<Self, RunError> {
        let created = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            created,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), RunError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| RunError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.to_string()))?;
        self.write(name, &bytes)
    }

    fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .map(|p| p.file_name().expect("file").to_string_lossy().into_owned())
            .collect()
    }

    fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// What a scenario computed, before `summary.json` is assembled.
#[derive(Default)]
struct Outcome {
    kappa: f64,
    hamiltonian_speed: f64,
    cone_speeds: Option<(f64, f64)>,
    fits: BTreeMap<String, FitEntry>,
    residuals: BTreeMap<String, f64>,
    metrics: BTreeMap<String, f64>,
    checks: Vec<Check>,
}

impl Outcome {
    fn with_velocity(v: &VelocityReport) -> Self {
        Outcome {
            kappa: v.kappa,
            hamiltonian_speed: v.hamiltonian_speed,
            ..Default::default()
        }
    }
}

/// Runs the configured scenario and writes its files into `out_dir`. Files
/// written before a failure are removed again.
pub fn run_scenario(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let mut out = Outputs::open(out_dir)?;
    match execute(cfg, &mut out) {
        Ok(outcome) => {
            let mut artifacts = out.names();
            artifacts.push("summary.json".into());
            let passed = outcome.checks.iter().all(|c| c.passed);
            let summary = RunSummary {
                scenario: cfg.scenario,
                config: cfg.clone(),
                kappa: outcome.kappa,
                hamiltonian_speed: outcome.hamiltonian_speed,
                cone_speeds: outcome.cone_speeds,
                fits: outcome.fits,
                residuals: outcome.residuals,
                metrics: outcome.metrics,
                checks: outcome.checks,
                passed,
                wall_clock_seconds: start.elapsed().as_secs_f64(),
                artifacts,
            };
            if let Err(e) = out.json("summary.json", &summary) {
                out.discard();
                return Err(e);
            }
            Ok(summary)
        }
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn execute(cfg: &RunConfig, out: &mut Outputs) -> Result<Outcome, RunError> {
    let scenario = cfg.scenario;
    info!("scenario {scenario}: M = {}", cfg.model.half_width);
    let result = match scenario {
        Scenario::Conjecture => conjecture(cfg, out),
        _ => model_scenario(cfg, out),
    };
    result.map_err(|e| match e {
        Failure::Core(e) => RunError::from_core(scenario, e),
        Failure::Run(e) => e,
    })
}

enum Failure {
    Core(lightcone_core::Error),
    Run(RunError),
}

impl From<lightcone_core::Error> for Failure {
    fn from(e: lightcone_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::Run(e)
    }
}

fn model_scenario(cfg: &RunConfig, out: &mut Outputs) -> Result<Outcome, Failure> {
    let spec = build_model(cfg)?;
    let velocity = velocity_operator(&spec)?;
    info!("κ = {}, ‖ad_⟨x⟩(H)‖ = {}", velocity.kappa, velocity.hamiltonian_speed);
    let audit = check_assumptions(&spec)?;
    let (mut outcome, plot) = match cfg.scenario {
        Scenario::Lightcone => lightcone(cfg, &spec, &velocity, out)?,
        Scenario::Rme => rme(cfg, &spec, &velocity, out)?,
        Scenario::Expansion => expansion(cfg, &spec, &velocity, out)?,
        Scenario::Stationary => stationary(cfg, &spec, &velocity, out)?,
        Scenario::Audit | Scenario::Conjecture => (Outcome::with_velocity(&velocity), None),
    };
    out.json("fits.json", &outcome.fits)?;
    out.json("audit.json", &audit)?;
    if let Some(plot) = plot {
        out.write("plot.svg", plot.render().as_bytes())?;
    }
    outcome.checks.push(Check::holds("assumption norms within the audit ceiling", audit.passed));
    outcome.metrics.insert("audit_ceiling".into(), audit.ceiling);
    Ok(outcome)
}

type Step = Result<(Outcome, Option<LogLogPlot>), Failure>;

fn cutoff(cfg: &RunConfig, kappa: f64) -> lightcone_core::Result<(SmoothCutoff, f64, f64)> {
    let c = cfg.cone.c.resolve(kappa, AUTO_C);
    let c_prime = cfg.cone.c_prime.resolve(kappa, AUTO_C_PRIME);
    let f = make_cutoff(c, c_prime)?;
    Ok((f, c, c_prime))
}

fn lightcone(cfg: &RunConfig, spec: &ModelSpec, v: &VelocityReport, out: &mut Outputs) -> Step {
    let (f, c, c_prime) = cutoff(cfg, v.kappa)?;
    let frame = ConeFrame::new(cfg.cone.a, cfg.cone.b, c_prime, 1.0, 0.0)?;
    let mut initial = InitialState::localized(&spec.geometry, cfg.cone.b)?;
    if cfg.run.with_stationary {
        let st = stationary_state(spec)?;
        initial = initial.with_stationary(st.state)?;
    }
    let options = LightconeOptions {
        eta_points: cfg.run.eta_points,
        eta_step: cfg.run.eta_step,
        front_dt: cfg.run.dt,
        evolve: EvolveOptions::new(cfg.run.backend),
    };
    let (report, fit) = run_lightcone_experiment(spec, &frame, &f, &cfg.run.s_list, &initial, &options)?;
    out.csv("leakage.csv", &report.rows)?;

    let mut o = Outcome::with_velocity(v);
    o.cone_speeds = Some((c, c_prime));
    o.fits.insert("f_expectation".into(), FitEntry::from(&fit));
    if let Some(speed) = report.front_speed {
        o.fits.insert(
            "front".into(),
            FitEntry {
                slope: speed,
                intercept: None,
                r_squared: None,
                points: report.front.len(),
            },
        );
    }
    o.residuals.insert("boundary_leakage".into(), report.boundary_leakage);
    o.metrics.insert("trace_drift".into(), report.evolution.trace_drift);
    o.metrics.insert("min_eigenvalue".into(), report.evolution.min_eig_seen);
    o.metrics.insert("max_hermitization".into(), report.evolution.max_hermitization);

    let n = spec.order;
    o.checks.push(Check::at_most("f_expectation slope", fit.slope, leakage_slope_limit(n)));
    o.checks.push(Check::at_least("f_expectation r_squared", fit.r_squared, LEAKAGE_R_SQUARED));
    o.checks.push(Check::at_most("boundary leakage", report.boundary_leakage, FRONT_THRESHOLD));
    let limit = FRONT_SPEED_FACTOR * v.kappa;
    o.checks.push(match report.front_speed {
        Some(speed) => Check::at_most("front speed", speed, limit),
        None => Check {
            name: "front speed".into(),
            passed: spec.hopping_amplitude == 0.0,
            value: None,
            relation: "<=",
            threshold: Some(limit),
        },
    });
    let plot = LogLogPlot {
        title: format!("⟨f_ts⟩ at t = s, n = {n}"),
        x_label: "s".into(),
        y_label: "⟨f_ts⟩".into(),
        points: report.s_values.iter().copied().zip(report.f_expectations.iter().copied()).collect(),
        fit: Some((fit.slope, fit.intercept)),
    };
    Ok((o, Some(plot)))
}

#[derive(Serialize)]
struct RmeRow {
    s: f64,
    max_eigenvalue: f64,
    residual: f64,
    excess: f64,
}

fn rme(cfg: &RunConfig, spec: &ModelSpec, v: &VelocityReport, out: &mut Outputs) -> Step {
    let (f, c, c_prime) = cutoff(cfg, v.kappa)?;
    let frame = ConeFrame::new(cfg.cone.a, cfg.cone.b, c_prime, 1.0, 0.0)?;
    let report = verify_rme(spec, &frame, &f, &cfg.run.s_list)?;
    let rows: Vec<RmeRow> = (0..report.s_values.len())
        .map(|k| RmeRow {
            s: report.s_values[k],
            max_eigenvalue: report.max_eigenvalues[k],
            residual: report.residuals[k],
            excess: report.excess[k],
        })
        .collect();
    out.csv("rme.csv", &rows)?;

    let mut o = Outcome::with_velocity(v);
    o.cone_speeds = Some((c, c_prime));
    if let Some(fit) = &report.fit {
        o.fits.insert("rme_residual".into(), FitEntry::from(fit));
    }
    let largest = report.residuals.iter().copied().fold(0.0, f64::max);
    o.residuals.insert("max_residual".into(), largest);
    o.metrics.insert("fitted_constant".into(), report.fitted_constant);
    o.checks.push(match &report.fit {
        Some(fit) => Check::at_most("rme residual slope", fit.slope, RME_SLOPE),
        None => Check::at_most("rme residual vanishes", largest, EXACT_ZERO),
    });
    let plot = LogLogPlot {
        title: "RME residual at t = s/2".into(),
        x_label: "s".into(),
        y_label: "positive part of λ_max".into(),
        points: report.s_values.iter().copied().zip(report.residuals.iter().copied()).collect(),
        fit: report.fit.as_ref().map(|f| (f.slope, f.intercept)),
    };
    Ok((o, Some(plot)))
}

#[derive(Serialize)]
struct ExpansionRow {
    a: f64,
    order: usize,
    s: f64,
    error: f64,
    bound: f64,
}

fn expansion(cfg: &RunConfig, spec: &ModelSpec, v: &VelocityReport, out: &mut Outputs) -> Step {
    let (f, c, c_prime) = cutoff(cfg, v.kappa)?;
    let h = build_hamiltonian(spec)?;
    let n = spec.order;
    let reports = cfg
        .offsets
        .iter()
        .map(|&a| verify_commutator_expansion(&h, &f, &spec.geometry, a, &cfg.run.s_list, n))
        .collect::<lightcone_core::Result<Vec<_>>>()?;
    let rows: Vec<ExpansionRow> = reports
        .iter()
        .flat_map(|r| {
            (0..r.s_values.len()).map(move |k| ExpansionRow {
                a: r.a,
                order: r.order,
                s: r.s_values[k],
                error: r.errors[k],
                bound: r.bounds[k],
            })
        })
        .collect();
    out.csv("expansion.csv", &rows)?;

    let mut o = Outcome::with_velocity(v);
    o.cone_speeds = Some((c, c_prime));
    for (k, r) in reports.iter().enumerate() {
        let label = format!("offset {k} (a = {})", r.a);
        match &r.fit {
            Some(fit) => {
                o.fits.insert(format!("expansion_offset_{k}"), FitEntry::from(fit));
                o.checks.push(Check::at_most(format!("{label}: slope"), fit.slope, expansion_slope_limit(n)));
                o.checks.push(Check::at_least(format!("{label}: r_squared"), fit.r_squared, EXPANSION_R_SQUARED));
            }
            None => {
                let largest = r.errors.iter().copied().fold(0.0, f64::max);
                o.checks.push(Check::at_most(format!("{label}: remainder vanishes"), largest, EXACT_ZERO));
            }
        }
        o.checks.push(Check::holds(format!("{label}: remainder within the bound"), r.within_bound));
        o.metrics.insert(format!("fitted_constant_offset_{k}"), r.fitted_constant);
    }
    if reports.len() > 1 && reports.iter().all(|r| r.fit.is_some()) {
        let spread = slope_spread(&reports).expect("all fitted");
        o.checks.push(Check::at_most("slope spread across offsets", spread, EXPANSION_SPREAD));
    }
    let first = &reports[0];
    let plot = LogLogPlot {
        title: format!("commutator expansion remainder, n = {n}, a = {}", first.a),
        x_label: "s".into(),
        y_label: "E(s)".into(),
        points: first.s_values.iter().copied().zip(first.errors.iter().copied()).collect(),
        fit: first.fit.as_ref().map(|f| (f.slope, f.intercept)),
    };
    Ok((o, Some(plot)))
}

#[derive(Serialize)]
struct PopulationRow {
    x: i64,
    population: f64,
}

fn stationary(cfg: &RunConfig, spec: &ModelSpec, v: &VelocityReport, out: &mut Outputs) -> Step {
    let st = stationary_state(spec)?;
    let rho = st.state.matrix();
    let generator = Liouvillian::new(spec)?;
    let mut last = None;
    evolve_at(
        &generator,
        rho,
        &[0.0, cfg.run.t_final],
        EvolveOptions::new(cfg.run.backend),
        |_, _, state, _| {
            last = Some(state.clone());
            Ok(())
        },
    )?;
    let drift = (&last.expect("two samples") - rho).max_abs();
    let rows: Vec<PopulationRow> = rho
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, p)| PopulationRow {
            x: spec.geometry.position(i),
            population: p.re,
        })
        .collect();
    out.csv("stationary.csv", &rows)?;

    let mut o = Outcome::with_velocity(v);
    o.residuals.insert("stationary_residual".into(), st.residual);
    o.residuals.insert("evolution_drift".into(), drift);
    for (k, sv) in st.singular_values.iter().enumerate() {
        o.metrics.insert(format!("singular_value_{}", k + 1), *sv);
    }
    o.metrics.insert("degenerate".into(), if st.degenerate { 1.0 } else { 0.0 });
    o.checks.push(Check::at_most("‖L ρ_st‖", st.residual, STATIONARY_RESIDUAL));
    o.checks.push(Check::at_most("ρ_st drift under evolution", drift, STATIONARY_DRIFT));
    Ok((o, None))
}

fn conjecture(cfg: &RunConfig, out: &mut Outputs) -> Result<Outcome, Failure> {
    let m = &cfg.model;
    let family = random_conjecture_family(m.half_width, m.hopping, m.g, cfg.trials, cfg.seed)?;
    let report = conjecture_scan(&family)?;
    out.csv("conjecture.csv", &report.rows)?;
    let first = velocity_operator(&family[0])?;
    out.json("fits.json", &BTreeMap::<String, FitEntry>::new())?;
    out.json("audit.json", &check_assumptions(&family[0])?)?;
    let mut o = Outcome::with_velocity(&first);
    o.metrics.insert("fraction_slower".into(), report.fraction_slower);
    o.metrics.insert("trials".into(), report.rows.len() as f64);
    Ok(o)
}
