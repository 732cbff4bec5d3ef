//! Factorization `H = A B + epsilon` of PDM Hamiltonians, the intertwined
//! partner, missing states, and the y-space ladder operators.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::mass_models::{coordinate_map, CoordinateMap, Interval, MassFamily, OrderingParameter};
use crate::quadrature::tanh_sinh;
use crate::transform::{PotentialFn, PotentialSpec, Space, WaveSample};

/// The function `beta` of the factorization operators.
#[derive(Clone)]
pub enum Beta {
    /// The choice that makes `[A, B] = -1`, with the antiderivative of
    /// `m^(1/2)` vanishing where `s(x) = 0`.
    Oscillator,
    /// A user function; `base` is the lower limit of the integrals in the
    /// missing states.
    Custom { f: PotentialFn, base: f64 },
}

impl fmt::Debug for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Oscillator => write!(f, "Oscillator"),
            Beta::Custom { base, .. } => write!(f, "Custom {{ base: {base} }}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorizationPair {
    pub family: MassFamily,
    pub ordering: OrderingParameter,
    pub beta: Beta,
    pub epsilon: f64,
    map: CoordinateMap,
}

/// Fourth-order central difference with step `h`.
fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn fd_step(x: f64) -> f64 {
    1e-3 * (1.0 + x.abs())
}

impl FactorizationPair {
    /// Ladder pair: oscillator `beta` and `epsilon = 1/2`.
    pub fn oscillator(family: MassFamily, ordering: OrderingParameter) -> Result<Self> {
        family.validate()?;
        let map = coordinate_map(&family)?;
        Ok(Self {
            family,
            ordering,
            beta: Beta::Oscillator,
            epsilon: 0.5,
            map,
        })
    }

    pub fn custom<F>(family: MassFamily, ordering: OrderingParameter, beta: F, epsilon: f64, base: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        family.validate()?;
        let map = coordinate_map(&family)?;
        if !map.x_domain.contains(base) {
            return Err(PdmError::Domain(format!("base point {base} outside {}", map.x_domain)));
        }
        Ok(Self {
            family,
            ordering,
            beta: Beta::Custom {
                f: std::sync::Arc::new(beta),
                base,
            },
            epsilon,
            map,
        })
    }

    pub fn domain(&self) -> Interval {
        self.map.x_domain
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.map.x_domain.contains(x) {
            Ok(())
        } else {
            Err(PdmError::Domain(format!("x = {x} outside {}", self.map.x_domain)))
        }
    }

    pub fn beta(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        match &self.beta {
            Beta::Oscillator => oscillator_beta(&self.family, &self.map, self.ordering.a, x),
            Beta::Custom { f, .. } => Ok(f(x)),
        }
    }

    pub fn beta_prime(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        match &self.beta {
            Beta::Oscillator => {
                let (m, m1, m2) = self.family.mass_derivatives(x)?;
                let c = self.ordering.shifted();
                Ok((m.sqrt() - c * (m2 * m.powf(-1.5) - 1.5 * m1 * m1 * m.powf(-2.5))) / SQRT_2)
            }
            Beta::Custom { f, .. } => Ok(derivative(|t| f(t), x, fd_step(x))),
        }
    }

    /// Where the missing-state integrals start.
    fn base(&self) -> f64 {
        match &self.beta {
            Beta::Oscillator => self.map.inverse(0.0),
            Beta::Custom { base, .. } => *base,
        }
    }

    /// `ln` of the unnormalized `psi~_eps`, `(a + 1/2) ln m + sqrt2 int m^(1/2) beta`.
    fn ln_tilde(&self, x: f64) -> Result<f64> {
        let (m, _, _) = self.family.mass_derivatives(x)?;
        let a = self.ordering.a;
        let integral = match &self.beta {
            Beta::Oscillator => {
                // sqrt2 int = m0 s^2/2 - (a + 1/4) ln(m / m_base)
                let s = self.map.forward(x);
                let (mb, _, _) = self.family.mass_derivatives(self.base())?;
                self.family.m0 * s * s / 2.0 - self.ordering.shifted() * (m / mb).ln()
            }
            Beta::Custom { f, base } => {
                let g = |r: f64| self.family.mass_derivatives(r).map(|d| d.0.sqrt()).unwrap_or(f64::NAN) * f(r);
                SQRT_2 * if x == *base { 0.0 } else { tanh_sinh(g, *base, x, 1e-12)? }
            }
        };
        Ok((a + 0.5) * m.ln() + integral)
    }
}

fn oscillator_beta(family: &MassFamily, map: &CoordinateMap, a: f64, x: f64) -> Result<f64> {
    let (m, m1, _) = family.mass_derivatives(x)?;
    let s = map.forward(x);
    if s.is_nan() {
        return Err(PdmError::Domain(format!("x = {x} outside {}", map.x_domain)));
    }
    Ok((family.m0.sqrt() * s - (a + 0.25) * m1 / m.powf(1.5)) / SQRT_2)
}

/// `beta = int^x m^(1/2) / sqrt2 - (a + 1/4) m' / (sqrt2 m^(3/2))`, the
/// integral vanishing where `s(x) = 0`.
pub fn beta_oscillator(family: &MassFamily, a: f64, x: f64) -> Result<f64> {
    let map = coordinate_map(family)?;
    if !map.x_domain.contains(x) {
        return Err(PdmError::Domain(format!("x = {x} outside {}", map.x_domain)));
    }
    oscillator_beta(family, &map, a, x)
}

/// `V - eps - [2(a + 1/4)(m'/m) beta - beta'] / sqrt(2m) - beta^2`.
pub fn riccati_residual(pair: &FactorizationPair, v: &PotentialSpec, x: f64) -> Result<f64> {
    Ok(v.evaluate(x)? - potential_from_beta(pair, x)?)
}

/// `[A, B] = -(a + 1/4)(m m'' - 3/2 m'^2)/m^3 - sqrt(2/m) beta'`.
pub fn commutator_value(pair: &FactorizationPair, x: f64) -> Result<f64> {
    let (m, m1, m2) = pair.family.mass_derivatives(x)?;
    let c = pair.ordering.shifted();
    let bp = pair.beta_prime(x)?;
    Ok(-c * (m * m2 - 1.5 * m1 * m1) / (m * m * m) - (2.0 / m).sqrt() * bp)
}

/// The potential factorized by the pair, solved from the Riccati equation.
pub fn potential_from_beta(pair: &FactorizationPair, x: f64) -> Result<f64> {
    let (m, m1, _) = pair.family.mass_derivatives(x)?;
    let c = pair.ordering.shifted();
    let b = pair.beta(x)?;
    let bp = pair.beta_prime(x)?;
    Ok(pair.epsilon + (2.0 * c * (m1 / m) * b - bp) / (2.0 * m).sqrt() + b * b)
}

/// `V~ = V - [A, B]`.
pub fn partner_potential(pair: &FactorizationPair, v: &PotentialSpec, x: f64) -> Result<f64> {
    Ok(v.evaluate(x)? - commutator_value(pair, x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    A,
    B,
}

/// `A f = -(1/sqrt2) m^a (m^b f)' + beta f` or `B f = (1/sqrt2) m^b (m^a f)' + beta f`
/// at `x`, with fourth-order differences.
pub fn factor_action<F: Fn(f64) -> f64>(pair: &FactorizationPair, which: Factor, f: F, x: f64) -> Result<f64> {
    pair.check(x)?;
    let a = pair.ordering.a;
    let b = pair.ordering.b();
    let m = |t: f64| pair.family.mass_derivatives(t).map(|d| d.0).unwrap_or(f64::NAN);
    let (outer, inner, sign) = match which {
        Factor::A => (a, b, -1.0),
        Factor::B => (b, a, 1.0),
    };
    let d = derivative(|t| m(t).powf(inner) * f(t), x, 1e-4 * (1.0 + x.abs()));
    let v = sign * m(x).powf(outer) * d / SQRT_2 + pair.beta(x)? * f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(PdmError::Domain(format!("factor action undefined near x = {x}")))
    }
}

/// Values of the two solutions annihilated by `A` and by `B` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MissingState {
    /// `psi~_eps`, with `A psi~_eps = 0`.
    pub tilde_eps: f64,
    /// `psi_M`, with `B psi_M = 0`.
    pub psi_m: f64,
}

/// The missing states of a pair with their normalization. A function that
/// is not square integrable is left with unit constant and flagged.
#[derive(Debug, Clone)]
pub struct MissingStates {
    pair: FactorizationPair,
    ln_norm_tilde: Option<f64>,
    ln_norm_m: Option<f64>,
}

impl MissingStates {
    pub fn new(pair: &FactorizationPair) -> Result<Self> {
        let ln_norm_tilde = ln_l2_norm(pair, |x| pair.ln_tilde(x).map(|l| 2.0 * l));
        let ln_norm_m = ln_l2_norm(pair, |x| {
            let (m, _, _) = pair.family.mass_derivatives(x)?;
            pair.ln_tilde(x).map(|l| 2.0 * (0.5 * m.ln() - l))
        });
        Ok(Self {
            pair: pair.clone(),
            ln_norm_tilde,
            ln_norm_m,
        })
    }

    pub fn tilde_normalizable(&self) -> bool {
        self.ln_norm_tilde.is_some()
    }

    pub fn m_normalizable(&self) -> bool {
        self.ln_norm_m.is_some()
    }

    pub fn at(&self, x: f64) -> Result<MissingState> {
        self.pair.check(x)?;
        let lt = self.pair.ln_tilde(x)?;
        let (m, _, _) = self.pair.family.mass_derivatives(x)?;
        let lm = 0.5 * m.ln() - lt;
        Ok(MissingState {
            tilde_eps: (lt - self.ln_norm_tilde.unwrap_or(0.0)).exp(),
            psi_m: (lm - self.ln_norm_m.unwrap_or(0.0)).exp(),
        })
    }
}

/// `missing_state` at a single point; see [`MissingStates`].
pub fn missing_state(pair: &FactorizationPair, x: f64) -> Result<(MissingState, MissingStates)> {
    let states = MissingStates::new(pair)?;
    Ok((states.at(x)?, states))
}

/// `ln ||f||` from `ln |f|^2`, or `None` when the integral diverges.
fn ln_l2_norm<F: Fn(f64) -> Result<f64>>(pair: &FactorizationPair, ln_sq: F) -> Option<f64> {
    let base = pair.base();
    let dom = pair.domain();
    let shift = ln_sq(base).ok()?;
    let dens = |x: f64| ln_sq(x).map(|l| (l - shift).exp()).unwrap_or(f64::NAN);
    let mut total = 0.0;
    for (end, dir) in [(dom.hi, 1.0), (dom.lo, -1.0)] {
        let part = if end.is_finite() {
            let w = (end - base).abs();
            tanh_sinh(|t| w * dens(base + dir * w * t), 0.0, 1.0, 1e-10)
        } else {
            // x = base + dir t/(1 - t)
            let far = dens(base + dir * 1e6) * 1e6;
            if !(far < 1e-6) {
                return None;
            }
            tanh_sinh(
                |t| {
                    let r = 1.0 - t;
                    dens(base + dir * t / r) / (r * r)
                },
                0.0,
                1.0,
                1e-10,
            )
        };
        match part {
            Ok(v) if v.is_finite() => total += v,
            _ => return None,
        }
    }
    (total > 0.0 && total.is_finite()).then(|| 0.5 * (total.ln() + shift))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ladder {
    /// `a+ = -d/dy + y`.
    Raise,
    /// `a- = d/dy + y`.
    Lower,
}

/// Minimum number of grid points accepted by [`apply_ladder`].
pub const MIN_LADDER_POINTS: usize = 1001;

/// Fourth-order derivative of uniformly sampled values.
pub fn uniform_derivative(h: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        return d;
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    let l = n - 1;
    d[l] = (25.0 * f[l] - 48.0 * f[l - 1] + 36.0 * f[l - 2] - 16.0 * f[l - 3] + 3.0 * f[l - 4]) / (12.0 * h);
    d[l - 1] = (3.0 * f[l] + 10.0 * f[l - 1] - 18.0 * f[l - 2] + 6.0 * f[l - 3] - f[l - 4]) / (12.0 * h);
    d
}

/// `a-` or `a+` on a y-space sample, `[a-, a+] = 2`.
pub fn apply_ladder(direction: Ladder, wave: &WaveSample) -> Result<WaveSample> {
    if wave.space != Space::Y {
        return Err(PdmError::InvalidParameter("ladder operators act on y-space samples".into()));
    }
    let h = wave
        .uniform_step()
        .ok_or_else(|| PdmError::InvalidParameter("ladder operators need a uniform grid".into()))?;
    if wave.len() < MIN_LADDER_POINTS {
        return Err(PdmError::GridTooCoarse(format!(
            "{} points, ladder operators need at least {MIN_LADDER_POINTS}",
            wave.len()
        )));
    }
    let sign = match direction {
        Ladder::Lower => 1.0,
        Ladder::Raise => -1.0,
    };
    let act = |v: &[f64]| -> Vec<f64> {
        let d = uniform_derivative(h, v);
        wave.grid.iter().zip(v).zip(&d).map(|((y, f), df)| sign * df + y * f).collect()
    };
    let re = act(&wave.re);
    let im = wave.im.as_deref().map(act);
    match im {
        Some(im) => {
            let vals: Vec<_> = re.iter().zip(&im).map(|(r, i)| num_complex::Complex64::new(*r, *i)).collect();
            WaveSample::complex(wave.grid.clone(), &vals, Space::Y)
        }
        None => WaveSample::real(wave.grid.clone(), re, Space::Y),
    }
}

/// `||a psi||` for a normalized input, the ladder coefficient when the
/// result is proportional to a normalized state.
pub fn ladder_coefficient(result: &WaveSample) -> f64 {
    result.norm_sq().sqrt()
}
