use serde::Serialize;

use crate::{Error, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    pub fn power_law(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::rejected(format!(
                "{} abscissae for {} ordinates",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::rejected("a scaling fit needs at least two points"));
        }
        if let Some((x, y)) = xs
            .iter()
            .zip(ys)
            .find(|(x, y)| !(**x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite()))
        {
            return Err(Error::numeric(format!(
                "cannot fit a power law through ({x:e}, {y:e}): values must be positive"
            )));
        }
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let (slope, intercept, r_squared) = linear_fit(&lx, &ly)?;
        Ok(ScalingFit {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slope,
            intercept,
            r_squared,
        })
    }

    /// `exp(intercept) · x^slope`.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }

    /// `exp(intercept)`, the fitted prefactor.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns
/// `(slope, intercept, r²)` with `r²` clamped to `[0, 1]`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::rejected("abscissae must not all coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok((slope, intercept, r_squared))
}
