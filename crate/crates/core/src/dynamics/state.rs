use crate::linalg::{hermitian_eigvals, ComplexMatrix};
use crate::model::LatticeGeometry;
use crate::tolerances::{STATE_HERMITIAN, STATE_MIN_EIGENVALUE, STATE_TRACE};
use crate::{Error, Result};

/// A Hermitian, positive semidefinite matrix with a recorded trace.
///
/// The trace is not forced to one: `ρ_st + λ` in light-cone experiments
/// carries the trace of both parts.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    trace_target: f64,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity and positivity; the current trace becomes the
    /// target.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let target = matrix.trace().re;
        Self::with_trace_target(matrix, target)
    }

    pub fn with_trace_target(matrix: ComplexMatrix, trace_target: f64) -> Result<Self> {
        let min_eigenvalue = validate(&matrix)?;
        let trace = matrix.trace();
        if (trace.re - trace_target).abs() > STATE_TRACE || trace.im.abs() > STATE_TRACE {
            return Err(Error::rejected(format!(
                "trace {trace} differs from target {trace_target}"
            )));
        }
        Ok(DensityMatrix {
            matrix,
            trace_target,
            min_eigenvalue,
        })
    }

    /// Wraps an evolved state whose checks the integrator already ran.
    pub(crate) fn from_evolution(matrix: ComplexMatrix, trace_target: f64, min_eigenvalue: f64) -> Self {
        DensityMatrix {
            matrix,
            trace_target,
            min_eigenvalue,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64);
        DensityMatrix {
            matrix,
            trace_target: 1.0,
            min_eigenvalue: 1.0 / dim as f64,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn trace_target(&self) -> f64 {
        self.trace_target
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(A ρ)`; real part only, which is exact for Hermitian `A`.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        a.trace_product(&self.matrix).re
    }
}

/// Returns the smallest eigenvalue after checking Hermiticity and the
/// positivity floor.
fn validate(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::rejected("density matrix has non-finite entries"));
    }
    let defect = m.hermiticity_defect();
    if defect > STATE_HERMITIAN * m.frobenius_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::rejected(format!(
            "density matrix is not Hermitian: ‖ρ − ρ†‖_F = {defect:e}"
        )));
    }
    let min = hermitian_eigvals(&m.hermitian_part())?[0];
    if min < STATE_MIN_EIGENVALUE {
        return Err(Error::rejected(format!(
            "density matrix has negative eigenvalue {min:e}"
        )));
    }
    Ok(min)
}

/// `ρ_0 = ρ_st + λ` with the perturbation `λ` supported strictly inside
/// `{⟨x⟩ < b}`.
#[derive(Debug, Clone)]
pub struct InitialState {
    stationary: Option<DensityMatrix>,
    perturbation: ComplexMatrix,
    localization_radius: f64,
}

impl InitialState {
    pub fn new(
        stationary: Option<DensityMatrix>,
        perturbation: ComplexMatrix,
        localization_radius: f64,
        geometry: &LatticeGeometry,
    ) -> Result<Self> {
        let n = geometry.n_sites();
        if perturbation.dim() != n {
            return Err(Error::rejected(format!(
                "perturbation of dimension {} on {n} sites",
                perturbation.dim()
            )));
        }
        if let Some(st) = &stationary {
            if st.dim() != n {
                return Err(Error::rejected("stationary part has the wrong dimension"));
            }
        }
        if !(localization_radius > 0.0) {
            return Err(Error::rejected("localization radius b must be positive"));
        }
        validate(&perturbation)?;
        let w = geometry.weights();
        for i in 0..n {
            if w[i] >= localization_radius
                && (0..n).any(|j| perturbation[(i, j)].norm() != 0.0 || perturbation[(j, i)].norm() != 0.0)
            {
                return Err(Error::rejected(format!(
                    "χ_b λ ≠ 0: perturbation touches site x = {} with ⟨x⟩ = {:.6} ≥ b = {localization_radius}",
                    geometry.position(i),
                    w[i]
                )));
            }
        }
        Ok(InitialState {
            stationary,
            perturbation,
            localization_radius,
        })
    }

    /// Unit-trace uniform mixture of the sites with `⟨x⟩ < b`.
    pub fn localized(geometry: &LatticeGeometry, b: f64) -> Result<Self> {
        let inside: Vec<usize> = (0..geometry.n_sites())
            .filter(|&i| geometry.weights()[i] < b)
            .collect();
        if inside.is_empty() {
            return Err(Error::rejected(format!("no site has ⟨x⟩ < b = {b}")));
        }
        let p = 1.0 / inside.len() as f64;
        let mut lam = ComplexMatrix::zeros(geometry.n_sites());
        for &i in &inside {
            lam[(i, i)] = p.into();
        }
        Self::new(None, lam, b, geometry)
    }

    pub fn with_stationary(mut self, stationary: DensityMatrix) -> Result<Self> {
        if stationary.dim() != self.perturbation.dim() {
            return Err(Error::rejected("stationary part has the wrong dimension"));
        }
        self.stationary = Some(stationary);
        Ok(self)
    }

    pub fn stationary(&self) -> Option<&DensityMatrix> {
        self.stationary.as_ref()
    }

    pub fn perturbation(&self) -> &ComplexMatrix {
        &self.perturbation
    }

    pub fn localization_radius(&self) -> f64 {
        self.localization_radius
    }

    /// `ρ_st + λ`.
    pub fn rho0(&self) -> ComplexMatrix {
        match &self.stationary {
            Some(st) => st.matrix() + &self.perturbation,
            None => self.perturbation.clone(),
        }
    }
}
