//! Matrix exponential by scaling and squaring with the degree-13 Padé
//! approximant.

use super::{solve, ComplexMatrix};
use crate::tolerances::EXPM_MAX_NORM;
use crate::{Error, Result};

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let norm = a.one_norm();
    if !norm.is_finite() || norm > EXPM_MAX_NORM {
        return Err(Error::numeric(format!(
            "matrix exponential overflow: 1-norm {norm:e} exceeds {EXPM_MAX_NORM:e}"
        )));
    }
    let n = a.dim();
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));

    let b = &PADE_13;
    let id = ComplexMatrix::identity(n);
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let combo = |c6: f64, c4: f64, c2: f64, c0: f64| {
        let mut out = a6.scale_real(c6);
        out += &a4.scale_real(c4);
        out += &a2.scale_real(c2);
        out += &id.scale_real(c0);
        out
    };

    // U = A [A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I]
    let mut u_poly = a6.matmul(&combo(b[13], b[11], b[9], 0.0));
    u_poly += &combo(b[7], b[5], b[3], b[1]);
    let u = scaled.matmul(&u_poly);
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut v = a6.matmul(&combo(b[12], b[10], b[8], 0.0));
    v += &combo(b[6], b[4], b[2], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    if !r.is_finite() {
        return Err(Error::numeric(format!(
            "matrix exponential overflow: 1-norm {norm:e} produced non-finite entries"
        )));
    }
    Ok(r)
}
