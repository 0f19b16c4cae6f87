//! Run configuration: a TOML document whose tables are flattened to dotted
//! keys (`model.M`, `cone.c_prime`, ...) and validated against fixed ranges.
//!
//! Every problem in a document is reported, not just the first one.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use lightcone_core::dynamics::Backend;
use lightcone_core::model::KrausKind;
use serde::Serialize;

pub const MAX_HALF_WIDTH: usize = 400;
pub const MAX_RATE: f64 = 1e3;
pub const MAX_T_FINAL: f64 = 1e4;
pub const MAX_ETA_POINTS: usize = 100;
pub const MAX_TRIALS: usize = 10_000;
pub const MAX_THREADS: usize = 1024;
/// Sites accepted by the superoperator-exponential backend.
pub const SUPEROP_SITES: usize = lightcone_core::tolerances::SUPEROP_MAX_SITES;
/// `c′ = AUTO_C_PRIME·κ` and `c = AUTO_C·κ` when set to `"auto"`.
pub const AUTO_C_PRIME: f64 = 1.2;
pub const AUTO_C: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Lightcone,
    Rme,
    Expansion,
    Conjecture,
    Stationary,
    Audit,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Lightcone,
        Scenario::Rme,
        Scenario::Expansion,
        Scenario::Conjecture,
        Scenario::Stationary,
        Scenario::Audit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Lightcone => "lightcone",
            Scenario::Rme => "rme",
            Scenario::Expansion => "expansion",
            Scenario::Conjecture => "conjecture",
            Scenario::Stationary => "stationary",
            Scenario::Audit => "audit",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Scenarios that fit a power law in `s`.
    pub fn needs_scales(self) -> bool {
        matches!(self, Scenario::Lightcone | Scenario::Rme | Scenario::Expansion)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Zero,
    Constant,
    /// Uniform on `[−amplitude, amplitude)` from the seeded generator.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Dephasing,
    DirectedJump,
    /// Random nearest-neighbour operators from the seeded generator.
    RandomLocal,
    None,
}

impl Environment {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "dephasing" => Some(Environment::Dephasing),
            "directed_jump" => Some(Environment::DirectedJump),
            "random_local" => Some(Environment::RandomLocal),
            "none" => Some(Environment::None),
            _ => None,
        }
    }

    pub fn builtin(self) -> Option<KrausKind> {
        match self {
            Environment::Dephasing => Some(KrausKind::Dephasing),
            Environment::DirectedJump => Some(KrausKind::DirectedJump),
            _ => None,
        }
    }
}

/// A cone speed: fixed, or derived from `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    Auto,
    Fixed(f64),
}

impl Speed {
    pub fn resolve(self, kappa: f64, factor: f64) -> f64 {
        match self {
            Speed::Auto => factor * kappa,
            Speed::Fixed(v) => v,
        }
    }
}

impl Serialize for Speed {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Speed::Auto => serializer.serialize_str("auto"),
            Speed::Fixed(v) => serializer.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    #[serde(rename = "M")]
    pub half_width: usize,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub hopping_range: usize,
    pub potential: Potential,
    pub potential_amplitude: f64,
    pub kraus: Environment,
    pub g: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeConfig {
    pub a: f64,
    pub b: f64,
    pub c: Speed,
    pub c_prime: Speed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOptions {
    pub s_list: Vec<f64>,
    pub backend: Backend,
    pub dt: f64,
    pub t_final: f64,
    pub eta_points: usize,
    pub eta_step: f64,
    pub with_stationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub threads: usize,
    /// Not echoed, so that summaries do not depend on where they are written.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub cone: ConeConfig,
    pub run: RunOptions,
    pub offsets: Vec<f64>,
    pub trials: usize,
}

impl RunConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        RunConfig {
            scenario,
            seed: 0,
            threads: 0,
            output_dir: None,
            model: ModelConfig {
                half_width: 60,
                hopping: 1.0,
                hopping_range: 1,
                potential: Potential::Zero,
                potential_amplitude: 0.0,
                kraus: Environment::Dephasing,
                g: 1.0,
                n: 3,
            },
            cone: ConeConfig {
                a: 2.0,
                b: 1.5,
                c: Speed::Auto,
                c_prime: Speed::Auto,
            },
            run: RunOptions {
                s_list: vec![4.0, 6.0, 8.0, 11.0],
                backend: Backend::Rk4,
                dt: 0.1,
                t_final: 10.0,
                eta_points: 5,
                eta_step: 1.0,
                with_stationary: false,
            },
            offsets: vec![0.0, 3.7, 10.0],
            trials: 20,
        }
    }
}

/// All problems found in one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// The documented template printed by `print-defaults`.
pub const DEFAULT_CONFIG: &str = r#"# One of: lightcone, rme, expansion, conjecture, stationary, audit
scenario = "lightcone"
# Seed of the xoshiro256** generator behind random potentials and environments
seed = 0
# Worker threads; 0 uses every core
threads = 0
# output_dir = "lightcone-output"

[model]
# Sites x = -M..M
M = 60
J = 1.0
hopping_range = 1
# zero, constant or random (uniform on [-potential_amplitude, potential_amplitude))
potential = "zero"
potential_amplitude = 0.0
# dephasing, directed_jump, random_local or none
kraus = "dephasing"
g = 1.0
# Expansion order, 2..8
n = 3

[cone]
a = 2.0
b = 1.5
# "auto" resolves to 1.5*kappa for c and 1.2*kappa for c_prime
c = "auto"
c_prime = "auto"

[run]
s_list = [4.0, 6.0, 8.0, 11.0]
# rk4 or superop_exp
backend = "rk4"
dt = 0.1
t_final = 10.0
eta_points = 5
eta_step = 1.0
with_stationary = false

[expansion]
offsets = [0.0, 3.7, 10.0]

[conjecture]
trials = 20
"#;

type Value = toml::Value;

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("not a valid TOML document: {}", e.message())]))?;
    let mut flat = BTreeMap::new();
    flatten("", &table, &mut flat);

    let mut errors = Vec::new();
    let scenario = match flat.remove("scenario") {
        None => {
            errors.push("missing key 'scenario'".to_string());
            Scenario::Lightcone
        }
        Some(v) => match v.as_str().and_then(Scenario::parse) {
            Some(s) => s,
            None => {
                errors.push(format!(
                    "scenario: expected one of lightcone, rme, expansion, conjecture, stationary, audit, got {v}"
                ));
                Scenario::Lightcone
            }
        },
    };
    let mut cfg = RunConfig::defaults(scenario);
    let mut p = Parser {
        flat: &mut flat,
        errors: &mut errors,
    };

    if let Some(v) = p.take("seed", as_u64) {
        cfg.seed = v;
    }
    if let Some(v) = p.take("threads", as_usize) {
        cfg.threads = p.within("threads", v, 0, MAX_THREADS);
    }
    if let Some(v) = p.take("output_dir", as_string) {
        cfg.output_dir = Some(PathBuf::from(v));
    }

    let m = &mut cfg.model;
    if let Some(v) = p.take("model.M", as_usize) {
        m.half_width = p.within("model.M", v, 1, MAX_HALF_WIDTH);
    }
    if let Some(v) = p.take("model.J", as_f64) {
        m.hopping = p.bounded("model.J", v, -MAX_RATE, MAX_RATE);
    }
    if let Some(v) = p.take("model.hopping_range", as_usize) {
        m.hopping_range = v;
    }
    if let Some(v) = p.take("model.potential", as_string) {
        match v.as_str() {
            "zero" => m.potential = Potential::Zero,
            "constant" => m.potential = Potential::Constant,
            "random" => m.potential = Potential::Random,
            other => p.fail(format!("model.potential: expected zero, constant or random, got \"{other}\"")),
        }
    }
    if let Some(v) = p.take("model.potential_amplitude", as_f64) {
        m.potential_amplitude = p.bounded("model.potential_amplitude", v, -MAX_RATE, MAX_RATE);
    }
    if let Some(v) = p.take("model.kraus", as_string) {
        match Environment::parse(&v) {
            Some(e) => m.kraus = e,
            None => p.fail(format!(
                "model.kraus: expected dephasing, directed_jump, random_local or none, got \"{v}\""
            )),
        }
    }
    if let Some(v) = p.take("model.g", as_f64) {
        m.g = p.bounded("model.g", v, 0.0, MAX_RATE);
    }
    if let Some(v) = p.take("model.n", as_usize) {
        m.n = p.within("model.n", v, 2, lightcone_core::tolerances::MAX_DERIVATIVE_ORDER);
    }
    let n_sites = 2 * m.half_width + 1;
    let lattice_ok = (1..=MAX_HALF_WIDTH).contains(&m.half_width);
    if lattice_ok && (m.hopping_range == 0 || m.hopping_range >= n_sites) {
        p.fail(format!(
            "model.hopping_range = {} outside [1, {}] for {n_sites} sites",
            m.hopping_range,
            n_sites - 1
        ));
    }
    if m.potential == Potential::Random && m.potential_amplitude < 0.0 {
        p.fail("model.potential_amplitude must be ≥ 0 for a random potential".to_string());
    }

    let c = &mut cfg.cone;
    if let Some(v) = p.take("cone.a", as_f64) {
        c.a = p.bounded("cone.a", v, -1e6, 1e6);
    }
    if let Some(v) = p.take("cone.b", as_f64) {
        c.b = v;
        if !(v > 0.0 && v.is_finite()) {
            p.fail(format!("cone.b = {v} must be positive and finite"));
        }
    }
    if c.b >= c.a {
        p.fail(format!(
            "cone.b = {} must be smaller than cone.a = {}: the initial perturbation must sit strictly inside the cone (b < a)",
            c.b, c.a
        ));
    }
    if let Some(v) = p.take("cone.c", as_speed) {
        c.c = p.positive_speed("cone.c", v);
    }
    if let Some(v) = p.take("cone.c_prime", as_speed) {
        c.c_prime = p.positive_speed("cone.c_prime", v);
    }
    if let (Speed::Fixed(cv), Speed::Fixed(cp)) = (c.c, c.c_prime) {
        if cv <= cp {
            p.fail(format!("cone.c = {cv} must exceed cone.c_prime = {cp}"));
        }
    }

    let r = &mut cfg.run;
    if let Some(v) = p.take("run.s_list", as_f64_list) {
        r.s_list = v;
    }
    if r.s_list.is_empty() || r.s_list.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        p.fail("run.s_list: every scale must be positive and finite, and the list nonempty".to_string());
    } else if scenario.needs_scales() && distinct(&r.s_list) < 2 {
        p.fail(format!("run.s_list: the {scenario} scenario fits a power law and needs at least two distinct scales"));
    }
    if let Some(v) = p.take("run.backend", as_string) {
        match v.parse::<Backend>() {
            Ok(b) => r.backend = b,
            Err(_) => p.fail(format!("run.backend: expected rk4 or superop_exp, got \"{v}\"")),
        }
    }
    if lattice_ok && r.backend == Backend::SuperopExp && n_sites > SUPEROP_SITES {
        p.fail(format!(
            "run.backend = superop_exp supports at most {SUPEROP_SITES} sites, model has {n_sites}"
        ));
    }
    if let Some(v) = p.take("run.dt", as_f64) {
        r.dt = v;
        if !(v > 0.0 && v <= 1.0) {
            p.fail(format!("run.dt = {v} outside (0, 1]"));
        }
    }
    if let Some(v) = p.take("run.t_final", as_f64) {
        r.t_final = v;
        if !(v > 0.0 && v <= MAX_T_FINAL) {
            p.fail(format!("run.t_final = {v} outside (0, {MAX_T_FINAL}]"));
        }
    }
    if let Some(v) = p.take("run.eta_points", as_usize) {
        r.eta_points = p.within("run.eta_points", v, 1, MAX_ETA_POINTS);
    }
    if let Some(v) = p.take("run.eta_step", as_f64) {
        r.eta_step = p.bounded("run.eta_step", v, 0.0, 1e3);
    }
    if let Some(v) = p.take("run.with_stationary", as_bool) {
        r.with_stationary = v;
    }

    if let Some(v) = p.take("expansion.offsets", as_f64_list) {
        if v.is_empty() || v.iter().any(|a| !a.is_finite()) {
            p.fail("expansion.offsets: need at least one finite offset".to_string());
        }
        cfg.offsets = v;
    }
    if let Some(v) = p.take("conjecture.trials", as_usize) {
        cfg.trials = p.within("conjecture.trials", v, 1, MAX_TRIALS);
    }

    for key in flat.keys() {
        errors.push(format!("unknown key '{key}'"));
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn distinct(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

struct Parser<'a> {
    flat: &'a mut BTreeMap<String, Value>,
    errors: &'a mut Vec<String>,
}

impl Parser<'_> {
    fn take<T>(&mut self, key: &str, convert: fn(&Value) -> Result<T, String>) -> Option<T> {
        let value = self.flat.remove(key)?;
        match convert(&value) {
            Ok(v) => Some(v),
            Err(expected) => {
                self.errors.push(format!("{key}: expected {expected}, got {value}"));
                None
            }
        }
    }

    fn fail(&mut self, message: String) {
        self.errors.push(message);
    }

    fn within(&mut self, key: &str, v: usize, lo: usize, hi: usize) -> usize {
        if !(lo..=hi).contains(&v) {
            self.fail(format!("{key} = {v} outside [{lo}, {hi}]"));
        }
        v
    }

    fn bounded(&mut self, key: &str, v: f64, lo: f64, hi: f64) -> f64 {
        if !(v >= lo && v <= hi) {
            self.fail(format!("{key} = {v} outside [{lo}, {hi}]"));
        }
        v
    }

    fn positive_speed(&mut self, key: &str, v: Speed) -> Speed {
        if let Speed::Fixed(x) = v {
            if !(x > 0.0 && x.is_finite()) {
                self.fail(format!("{key} = {x} must be positive and finite"));
            }
        }
        v
    }
}

fn as_f64(v: &Value) -> Result<f64, String> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err("a number".into()),
    }
}

fn as_u64(v: &Value) -> Result<u64, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err("a nonnegative integer".into()),
    }
}

fn as_usize(v: &Value) -> Result<usize, String> {
    as_u64(v).map(|x| x as usize)
}

fn as_string(v: &Value) -> Result<String, String> {
    v.as_str().map(str::to_string).ok_or_else(|| "a string".into())
}

fn as_bool(v: &Value) -> Result<bool, String> {
    v.as_bool().ok_or_else(|| "true or false".into())
}

fn as_speed(v: &Value) -> Result<Speed, String> {
    match v {
        Value::String(s) if s == "auto" => Ok(Speed::Auto),
        _ => as_f64(v).map(Speed::Fixed).map_err(|_| "a number or \"auto\"".into()),
    }
}

fn as_f64_list(v: &Value) -> Result<Vec<f64>, String> {
    match v {
        Value::Array(items) => items.iter().map(as_f64).collect::<Result<_, _>>().map_err(|_| "an array of numbers".into()),
        _ => Err("an array of numbers".into()),
    }
}
