//! Every numerical threshold used by operations and tests.
//!
//! Operations and tests cite these constants instead of literals so that a
//! tolerance is stated exactly once.

/// Hermiticity precondition of the eigensolver, relative to `max(1, ‖A‖_F)`.
pub const HERMITIAN_INPUT: f64 = 1e-12;

/// Reconstruction and orthonormality residual of an eigendecomposition.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Implicit-QL iteration cap, in sweeps per matrix dimension.
pub const QL_SWEEPS_PER_DIM: usize = 64;

/// Agreement of `matrix_exp` with a truncated Taylor series on small inputs.
pub const EXPM_SERIES: f64 = 1e-9;

/// Largest 1-norm accepted by `matrix_exp` before reporting overflow.
pub const EXPM_MAX_NORM: f64 = 1e6;

/// Entrywise agreement of the two iterated-adjoint routes.
pub const ADJOINT_CROSSCHECK: f64 = 1e-12;

/// Density matrices: Hermiticity relative to `‖ρ‖`.
pub const STATE_HERMITIAN: f64 = 1e-12;

/// Density matrices: most negative eigenvalue still counted as positive.
pub const STATE_MIN_EIGENVALUE: f64 = -1e-10;

/// Density matrices: trace drift from the recorded target.
pub const STATE_TRACE: f64 = 1e-10;

/// Evolution: trace drift budget of the RK4 backend.
pub const RK4_TRACE_DRIFT: f64 = 1e-8;

/// Evolution: trace drift budget of the superoperator-exponential backend.
pub const SUPEROP_TRACE_DRIFT: f64 = 1e-10;

/// Evolution: eigenvalues below this abort the run (time step too large).
pub const POSITIVITY_ABORT: f64 = -1e-6;

/// Evolution: positivity floor asserted on sampled states.
pub const SAMPLED_POSITIVITY: f64 = -1e-8;

/// Evolution: largest Hermiticity correction tolerated per step.
pub const HERMITIZATION_PER_STEP: f64 = 1e-9;

/// RK4 default step is `RK4_STEP_SCALE / max(‖H‖, g, 1)`.
pub const RK4_STEP_SCALE: f64 = 0.01;

/// Number of automatic RK4 step halvings before giving up.
pub const RK4_MAX_HALVINGS: usize = 4;

/// Largest site count accepted by the superoperator-exponential backend.
pub const SUPEROP_MAX_SITES: usize = 40;

/// Stationary solver: residual `‖L ρ_st‖` that must be met.
pub const STATIONARY_RESIDUAL: f64 = 1e-9;

/// Stationary solver: smallest singular value above this means no solution.
pub const STATIONARY_NO_NULL: f64 = 1e-6;

/// Stationary solver: second singular value below this flags degeneracy.
pub const STATIONARY_DEGENERATE: f64 = 1e-8;

/// Largest derivative order of the smooth cutoffs.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Leakage values above `-LEAKAGE_DUST` but below zero are clamped to zero.
pub const LEAKAGE_DUST: f64 = 1e-12;

/// Leakage level that defines the propagation front.
pub const FRONT_THRESHOLD: f64 = 1e-6;

/// Sites of clearance the front must keep from the lattice boundary.
pub const BOUNDARY_CLEARANCE: usize = 5;

/// Fraction of crossed radii kept (centered) in the front-speed fit.
pub const FRONT_FIT_FRACTION: f64 = 0.6;

/// Agreement of `γ` with `L'⟨x⟩`.
pub const GAMMA_IDENTITY: f64 = 1e-12;

/// Agreement of `κ` with the largest absolute eigenvalue of `γ`.
pub const KAPPA_EIGEN: f64 = 1e-10;

/// Default multiplier of the assumption-audit ceiling `10·max(J, g, 1)`.
pub const AUDIT_CEILING_FACTOR: f64 = 10.0;
