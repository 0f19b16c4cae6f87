use serde::Serialize;

use super::{iterated_adjoint_sparse, ModelSpec};
use crate::tolerances::AUDIT_CEILING_FACTOR;
use crate::Result;

/// Norms of the iterated commutators with `⟨x⟩` for `k = 1..=n`.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionAudit {
    /// `‖ad^k_⟨x⟩(H)‖`, index `k − 1`.
    pub hamiltonian_norms: Vec<f64>,
    /// `Σ_j ‖ad^k_⟨x⟩(W_j)‖²`, index `k − 1`.
    pub kraus_sums: Vec<f64>,
    pub ceiling: f64,
    /// `⟨x⟩^{-1} D(H) ⊂ D(H)`; holds trivially in finite dimension.
    pub domain_condition: bool,
    pub passed: bool,
}

/// Audit with the default ceiling `10·max(J, g, 1)`.
pub fn check_assumptions(spec: &ModelSpec) -> Result<AssumptionAudit> {
    check_assumptions_with_ceiling(spec, AUDIT_CEILING_FACTOR * spec.rate_scale())
}

pub fn check_assumptions_with_ceiling(spec: &ModelSpec, ceiling: f64) -> Result<AssumptionAudit> {
    let h = spec.hamiltonian()?;
    let n = spec.order;
    let mut hamiltonian_norms = Vec::with_capacity(n);
    let mut kraus_sums = Vec::with_capacity(n);
    for k in 1..=n {
        hamiltonian_norms.push(iterated_adjoint_sparse(&h, &spec.geometry, k)?.operator_norm()?);
        let mut sum = 0.0;
        for w in spec.kraus.operators() {
            let norm = iterated_adjoint_sparse(w, &spec.geometry, k)?.operator_norm()?;
            sum += norm * norm;
        }
        kraus_sums.push(sum);
    }
    let passed = hamiltonian_norms
        .iter()
        .chain(&kraus_sums)
        .all(|&v| v.is_finite() && v <= ceiling);
    Ok(AssumptionAudit {
        hamiltonian_norms,
        kraus_sums,
        ceiling,
        domain_condition: true,
        passed,
    })
}
