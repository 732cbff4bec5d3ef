//! Hermite and generalized Laguerre polynomials, the Gamma function and the
//! terminating confluent hypergeometric series.
//!
//! Hermite polynomials follow the physicists' convention, `H_1(y) = 2y`.

use std::f64::consts::PI;

use crate::error::{PdmError, Result};

/// Degree and parameter of an orthogonal-polynomial evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyEval {
    pub degree: usize,
    /// Laguerre `alpha`; ignored for Hermite.
    pub parameter: f64,
}

/// Physicists' Hermite polynomial `H_n(y)` by the three-term recurrence.
pub fn hermite(n: usize, y: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * y;
    for k in 1..n {
        let h2 = 2.0 * y * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Generalized Laguerre polynomial `L_n^(alpha)(x)`.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

impl PolyEval {
    pub fn hermite(&self, y: f64) -> f64 {
        hermite(self.degree, y)
    }

    pub fn laguerre(&self, x: f64) -> f64 {
        laguerre(self.degree, self.parameter, x)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// `Gamma(x)` by the Lanczos approximation with reflection for `x < 1/2`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(PdmError::Domain(format!("Gamma has a pole at {x}")));
    }
    if !x.is_finite() {
        return Err(PdmError::Domain(format!("Gamma of non-finite argument {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// `ln |Gamma(x)|` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(PdmError::Domain(format!(
            "ln Gamma requires a positive argument, got {x}"
        )));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Rising factorial `(b)_n`.
pub fn pochhammer(b: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (b + k as f64))
}

/// `1F1(-n; b; x)` by its terminating series.
pub fn kummer_poly(n: usize, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..n {
        let jf = j as f64;
        term *= (jf - n as f64) / (b + jf) * x / (jf + 1.0);
        sum += term;
    }
    sum
}

/// Normalized Hermite functions `phi_0(y) ..= phi_kmax(y)`, with
/// `phi_k = H_k(y) exp(-y^2/2) / sqrt(2^k sqrt(pi) k!)`.
///
/// Uses the normalized recurrence so that large `k` does not overflow.
pub fn hermite_functions(k_max: usize, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let p0 = PI.powf(-0.25) * (-0.5 * y * y).exp();
    out.push(p0);
    if k_max == 0 {
        return out;
    }
    out.push(2f64.sqrt() * y * p0);
    for k in 1..k_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Single normalized Hermite function `phi_k(y)`.
pub fn hermite_function(k: usize, y: f64) -> f64 {
    hermite_functions(k, y)[k]
}
