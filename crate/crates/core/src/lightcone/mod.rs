//! The velocity bound `κ` and the numerical checks built on it: leakage
//! outside the cone, the light-cone scaling experiment, and verifiers for
//! the basic equality, the recursive monotonicity estimate and the
//! commutator expansion.

mod conjecture;
mod experiment;
mod fit;
mod velocity;
mod verify;

pub use conjecture::{conjecture_scan, random_conjecture_family, ConjectureReport, ConjectureRow};
pub use experiment::{
    leakage, leakage_of, run_lightcone_experiment, FrontCrossing, LeakageRow, LightconeOptions,
    TransportReport,
};
pub use fit::{linear_fit, ScalingFit};
pub use velocity::{velocity_operator, VelocityReport};
pub use verify::{
    basic_equality_with, slope_spread, verify_basic_equality, verify_commutator_expansion,
    verify_rme, BasicEqualityReport, ExpansionReport, RmeReport,
};
