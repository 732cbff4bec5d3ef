//! Leading-order WKB spectra.
//!
//! The action `int sqrt(2(E - V)) dy = pi (k + 1/2)` is integrated between
//! the two turning points with `y = c + h sin(theta)`, which turns the
//! square-root endpoint behaviour into a smooth integrand for Gauss-Legendre.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::quadrature::gauss_legendre;
use crate::special_fns::gamma_fn;
use crate::transform::{PotentialKind, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WkbMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkbLevel {
    pub k: usize,
    pub energy: f64,
    /// Left and right classical turning points.
    pub turning_points: (f64, f64),
    pub method: WkbMethod,
}

/// `j_n = sqrt(pi) Gamma(1/(4n+2)) / (2(n+1) Gamma((n+1)/(2n+1)))`,
/// the value of `int_{-1}^{1} sqrt(1 - z^(4n+2)) dz`.
pub fn jn_constant(n: u32) -> f64 {
    let n = f64::from(n);
    let num = PI.sqrt() * gamma_fn(1.0 / (4.0 * n + 2.0)).expect("positive argument");
    let den = 2.0 * (n + 1.0) * gamma_fn((n + 1.0) / (2.0 * n + 1.0)).expect("positive argument");
    num / den
}

/// Closed-form WKB level of `V = (y/(2n+1))^(4n+2) / 2`. At `n = 0` this is `k + 1/2`.
pub fn powerlaw_energy(n: u32, k: usize) -> f64 {
    let nf = f64::from(n);
    let q = PI / jn_constant(n) * (k as f64 + 0.5) / (2.0 * nf + 1.0);
    0.5 * q.powf((2.0 * nf + 1.0) / (nf + 1.0))
}

/// Real index `k_c(n)` at which the power-law WKB level crosses `k + 1/2`.
pub fn crossing_index(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(PdmError::InvalidParameter("crossing index needs n >= 1".into()));
    }
    let nf = f64::from(n);
    let g1 = gamma_fn(1.0 / (4.0 * nf + 2.0))?;
    let g2 = gamma_fn((nf + 1.0) / (2.0 * nf + 1.0))?;
    let base = (2.0 * nf + 1.0) * g1 / (PI.sqrt() * (nf + 1.0) * g2);
    Ok(0.5 * (base.powf((2.0 * nf + 1.0) / nf) - 1.0))
}

/// Turning point of `V = e` between `inside` (where `V < e`) and the domain
/// end in direction `dir`.
fn turning_point(v: &PotentialSpec, e: f64, inside: f64, dir: f64) -> Result<f64> {
    let end = if dir > 0.0 { v.domain.hi } else { v.domain.lo };
    let mut a = inside;
    let mut b = None;
    if end.is_finite() {
        // approach a finite end geometrically
        for j in 1..200 {
            let t = end + (inside - end) * 0.5f64.powi(j);
            if t == end {
                break;
            }
            if !(v.value(t) < e) {
                b = Some(t);
                break;
            }
            a = t;
        }
    } else {
        let mut step = 0.5;
        while step < 1e7 {
            let t = inside + dir * step;
            if !(v.value(t) < e) {
                b = Some(t);
                break;
            }
            a = t;
            step *= 2.0;
        }
    }
    let Some(mut b) = b else {
        if end.is_finite() {
            // a finite end the potential never climbs over acts as a hard wall
            return Ok(end);
        }
        return Err(PdmError::NonConfining(format!(
            "{} potential never reaches E = {e} on the {} side",
            v.name(),
            if dir > 0.0 { "right" } else { "left" }
        )));
    };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if v.value(m) < e {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Classically allowed interval `(left, right)` of the well containing `y_min`.
pub fn turning_points(v: &PotentialSpec, e: f64) -> Result<(f64, f64)> {
    let (ymin, vmin) = v.minimum();
    if !(e > vmin) {
        return Err(PdmError::InvalidParameter(format!("E = {e} is not above min V = {vmin}")));
    }
    Ok((turning_point(v, e, ymin, -1.0)?, turning_point(v, e, ymin, 1.0)?))
}

/// `int_{left}^{right} sqrt(2(E - V)) dy` with turning points returned alongside.
pub fn action(v: &PotentialSpec, e: f64) -> Result<(f64, (f64, f64))> {
    let (l, r) = turning_points(v, e)?;
    let c = 0.5 * (l + r);
    let h = 0.5 * (r - l);
    let integrand = |th: f64| {
        let d = e - v.value(c + h * th.sin());
        if d > 0.0 {
            (2.0 * d).sqrt() * h * th.cos()
        } else {
            0.0
        }
    };
    let mut nodes = 200;
    let mut prev = gauss_legendre(nodes).integrate(-0.5 * PI, 0.5 * PI, integrand);
    while nodes < 12800 {
        nodes *= 2;
        let next = gauss_legendre(nodes).integrate(-0.5 * PI, 0.5 * PI, integrand);
        if (next - prev).abs() <= 1e-12 * next.abs().max(1e-300) {
            return Ok((next, (l, r)));
        }
        prev = next;
    }
    Err(PdmError::Convergence(format!(
        "action of {} at E = {e} unresolved with {nodes} Gauss-Legendre nodes",
        v.name()
    )))
}

/// Solves `action(E) = pi (k + 1/2)` by bisection in E.
pub fn wkb_quantize(v: &PotentialSpec, k: usize) -> Result<WkbLevel> {
    let target = PI * (k as f64 + 0.5);
    let (ymin, vmin) = v.minimum();
    let scale = {
        let h = 1e-3;
        let curv = (v.value(ymin + h) - 2.0 * vmin + v.value(ymin - h)) / (h * h);
        if curv.is_finite() && curv > 0.0 { curv.sqrt() } else { 1.0 }
    };
    let mut lo = vmin;
    let mut hi = vmin + (k as f64 + 1.0) * scale;
    let mut grown = 0;
    while action(v, hi)?.0 < target {
        lo = hi;
        hi = vmin + 2.0 * (hi - vmin);
        grown += 1;
        if grown > 200 {
            return Err(PdmError::NonConfining(format!("{} has no level {k}", v.name())));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * mid.abs().max(1e-300) || mid == lo || mid == hi {
            break;
        }
        if action(v, mid)?.0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let energy = 0.5 * (lo + hi);
    let (_, tp) = action(v, energy)?;
    Ok(WkbLevel {
        k,
        energy,
        turning_points: tp,
        method: WkbMethod::Quadrature,
    })
}

/// Closed form when one is available (harmonic, centred power law at
/// `lambda = 1`), quadrature otherwise.
pub fn wkb_level(v: &PotentialSpec, k: usize) -> Result<WkbLevel> {
    let closed = match v.kind {
        PotentialKind::Harmonic => Some(0),
        PotentialKind::PowerLaw { n } if v.x0 == 0.0 && v.lambda == 1.0 => Some(n),
        _ => None,
    };
    match closed {
        Some(n) => {
            let e = powerlaw_energy(n, k);
            let y0 = f64::from(2 * n + 1) * (2.0 * e).powf(1.0 / f64::from(4 * n + 2));
            Ok(WkbLevel {
                k,
                energy: e + v.shift,
                turning_points: (-y0, y0),
                method: WkbMethod::ClosedForm,
            })
        }
        None => wkb_quantize(v, k),
    }
}

/// WKB levels `0..=k_max` of `sinh^2(y)/2`.
pub fn sinh2_wkb_spectrum(k_max: usize) -> Result<Vec<WkbLevel>> {
    let v = PotentialSpec::sinh2(1.0)?;
    (0..=k_max).map(|k| wkb_quantize(&v, k)).collect()
}
