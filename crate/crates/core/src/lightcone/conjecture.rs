//! Exploratory comparison of `κ` with the purely Hamiltonian speed
//! `‖ad_⟨x⟩(H)‖` over random local environments.

use rayon::prelude::*;
use serde::Serialize;

use super::velocity::velocity_operator;
use crate::model::{KrausFamily, LatticeGeometry, ModelSpec};
use crate::sampling::ModelRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub trial: usize,
    pub kappa: f64,
    pub hamiltonian_speed: f64,
    pub environment_shift: f64,
    /// `κ < ‖ad_⟨x⟩(H)‖`.
    pub slower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub rows: Vec<ConjectureRow>,
    /// Fraction of rows with `κ < ‖ad_⟨x⟩(H)‖`.
    pub fraction_slower: f64,
}

/// `trials` models with potentials uniform on `[−1, 1)` and random
/// nearest-neighbour Kraus operators of total weight `g` each. Trial `k`
/// draws from its own stream seeded with `seed + k`.
pub fn random_conjecture_family(
    half_width: usize,
    hopping: f64,
    strength: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<ModelSpec>> {
    if trials == 0 {
        return Err(Error::rejected("trials must be at least 1"));
    }
    let geometry = LatticeGeometry::new(half_width)?;
    (0..trials)
        .map(|k| {
            let mut rng = ModelRng::new(seed.wrapping_add(k as u64));
            let potential = (0..geometry.n_sites()).map(|_| rng.symmetric()).collect();
            let kraus = KrausFamily::random_local(&geometry, strength, &mut rng)?;
            ModelSpec::new(geometry.clone(), hopping, 1, potential, kraus, 2)
        })
        .collect()
}

/// One row per model, in input order.
pub fn conjecture_scan(family: &[ModelSpec]) -> Result<ConjectureReport> {
    if family.is_empty() {
        return Err(Error::rejected("conjecture scan needs at least one model"));
    }
    if let Some(k) = family.iter().position(|spec| spec.kraus.is_trivial()) {
        return Err(Error::rejected(format!(
            "model {k} has no environment (all W_j = 0); the scan compares nonzero environments only"
        )));
    }
    let rows: Vec<ConjectureRow> = family
        .par_iter()
        .enumerate()
        .map(|(trial, spec)| {
            let v = velocity_operator(spec)?;
            Ok(ConjectureRow {
                trial,
                kappa: v.kappa,
                hamiltonian_speed: v.hamiltonian_speed,
                environment_shift: v.environment_shift,
                slower: v.kappa < v.hamiltonian_speed,
            })
        })
        .collect::<Result<_>>()?;
    let slower = rows.iter().filter(|r| r.slower).count();
    Ok(ConjectureReport {
        fraction_slower: slower as f64 / rows.len() as f64,
        rows,
    })
}
