//! Coherent states of first-kind oscillators, in the convention
//! `a- = d/dy + y`, `a- Theta_z = z Theta_z`, `[a-, a+] = 2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::ladder::uniform_derivative;
use crate::mass_models::MassFamily;
use crate::oscillators::FirstKindOscillator;
use crate::quadrature::simpson_uniform;
use crate::special_fns::{hermite_functions, ln_gamma};
use crate::transform::{Space, WaveSample};

/// Smallest truncation whose Poisson tail is below `1e-12`.
pub fn required_truncation(z: Complex64) -> usize {
    let mu = z.norm_sqr() / 2.0;
    (mu + 12.0 * (mu + 1.0).sqrt() + 10.0).ceil() as usize
}

/// `c_k = z^k e^(-|z|^2/4) / sqrt(2^k k!)` for `k = 0..=n_trunc`.
pub fn coherent_amplitudes(z: Complex64, n_trunc: usize) -> Result<Vec<Complex64>> {
    let need = required_truncation(z);
    if n_trunc < need {
        return Err(PdmError::TruncationTooSmall {
            given: n_trunc,
            required: need,
        });
    }
    let mut c = Vec::with_capacity(n_trunc + 1);
    c.push(Complex64::new((-z.norm_sqr() / 4.0).exp(), 0.0));
    for k in 1..=n_trunc {
        let prev = c[k - 1];
        c.push(prev * z / (2.0 * k as f64).sqrt());
    }
    Ok(c)
}

/// Probability `|z|^(2n) e^(-|z|^2/2) / (2^n n!)` of finding level `n`.
pub fn poisson_prob(z: Complex64, n: usize) -> f64 {
    let mu = z.norm_sqr() / 2.0;
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    // ln_gamma is finite for positive arguments
    (nf * mu.ln() - mu - ln_gamma(nf + 1.0).expect("positive argument")).exp()
}

/// `<H> = |z|^2 + 1` and `Delta H = sqrt2 |z|` in units where `E_k = 2k + 1`.
pub fn energy_moments(z: Complex64) -> (f64, f64) {
    (z.norm_sqr() + 1.0, std::f64::consts::SQRT_2 * z.norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherentState {
    pub z: Complex64,
    pub n_trunc: usize,
    pub amplitudes: Vec<Complex64>,
    pub family: MassFamily,
    #[serde(skip)]
    osc: FirstKindOscillator,
}

impl CoherentState {
    /// State with the default truncation for `z`.
    pub fn new(z: Complex64, family: MassFamily) -> Result<Self> {
        Self::with_truncation(z, family, required_truncation(z))
    }

    pub fn with_truncation(z: Complex64, family: MassFamily, n_trunc: usize) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(PdmError::InvalidParameter(format!("label z = {z} is not finite")));
        }
        let amplitudes = coherent_amplitudes(z, n_trunc)?;
        let osc = FirstKindOscillator::new(family)?;
        Ok(Self {
            z,
            n_trunc,
            amplitudes,
            family,
            osc,
        })
    }

    pub fn oscillator(&self) -> &FirstKindOscillator {
        &self.osc
    }

    /// `sum_k c_k phi_k(y)`.
    pub fn y_value(&self, y: f64) -> Complex64 {
        hermite_functions(self.n_trunc, y)
            .iter()
            .zip(&self.amplitudes)
            .map(|(p, c)| c * p)
            .sum()
    }

    /// Uniform y-space sample on `[Re z - half_width, Re z + half_width]`.
    pub fn y_sample(&self, half_width: f64, points: usize) -> Result<WaveSample> {
        if points < 3 {
            return Err(PdmError::InvalidParameter("a sample needs at least 3 points".into()));
        }
        let lo = self.z.re - half_width;
        let h = 2.0 * half_width / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|i| lo + i as f64 * h).collect();
        let vals: Vec<Complex64> = grid.iter().map(|&y| self.y_value(y)).collect();
        WaveSample::complex(grid, &vals, Space::Y)
    }
}

/// `Theta_z(x) = (m/m0)^(1/4) sum_k c_k phi_k(s(x))`.
pub fn coherent_wavefunction(state: &CoherentState, x: f64) -> Result<Complex64> {
    let map = state.osc.map();
    if !map.x_domain.contains(x) {
        return Err(PdmError::Domain(format!("x = {x} outside {}", map.x_domain)));
    }
    state.family.mass_derivatives(x)?;
    Ok(map.jacobian(x).sqrt() * state.y_value(map.forward(x)))
}

/// `(<y>, Delta y, <p>, Delta p)` of a sample on a uniform y-grid, with
/// `p = -i d/dy`. The sample need not be normalized.
pub fn y_moments(wave: &WaveSample) -> Result<(f64, f64, f64, f64)> {
    if wave.space != Space::Y {
        return Err(PdmError::InvalidParameter("moments are taken in y-space".into()));
    }
    let h = wave
        .uniform_step()
        .ok_or_else(|| PdmError::InvalidParameter("moments need a uniform grid".into()))?;
    let zeros = vec![0.0; wave.len()];
    let im = wave.im.as_deref().unwrap_or(&zeros);
    let dre = uniform_derivative(h, &wave.re);
    let dim = uniform_derivative(h, im);
    let integrate = |f: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = (0..wave.len()).map(f).collect();
        simpson_uniform(h, &v)
    };
    let dens = |i: usize| wave.re[i] * wave.re[i] + im[i] * im[i];
    let norm = integrate(&dens);
    if !(norm > 0.0) {
        return Err(PdmError::InvalidParameter("sample has zero norm".into()));
    }
    let y1 = integrate(&|i| wave.grid[i] * dens(i)) / norm;
    let y2 = integrate(&|i| wave.grid[i] * wave.grid[i] * dens(i)) / norm;
    // <p> = int (re im' - im re'), <p^2> = int |psi'|^2
    let p1 = integrate(&|i| wave.re[i] * dim[i] - im[i] * dre[i]) / norm;
    let p2 = integrate(&|i| dre[i] * dre[i] + dim[i] * dim[i]) / norm;
    Ok((y1, (y2 - y1 * y1).max(0.0).sqrt(), p1, (p2 - p1 * p1).max(0.0).sqrt()))
}

/// `Delta y Delta p` of a y-space sample.
pub fn uncertainty_product_sample(wave: &WaveSample) -> Result<f64> {
    let (_, dy, _, dp) = y_moments(wave)?;
    Ok(dy * dp)
}

/// `Delta y Delta p` of the state in y-space (`1/2` for every `z`).
pub fn uncertainty_product(state: &CoherentState) -> Result<f64> {
    let w = state.y_sample(12.0 + state.z.im.abs(), 4001)?;
    uncertainty_product_sample(&w)
}
