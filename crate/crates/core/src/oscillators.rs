//! Oscillator catalog: first-kind PDM oscillators with equidistant spectra,
//! the squeezed oscillator in closed form, and second-kind problems that feed
//! the WKB and Numerov solvers.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::mass_models::{coordinate_map, CoordinateMap, MassFamily, MassKind, OrderingParameter};
use crate::schrodinger::{solve_halfline, solve_levels, EigenSolution, SolverConfig};
use crate::special_fns::{factorial, gamma_fn, hermite, hermite_function, hermite_functions, laguerre};
use crate::spectra::{wkb_level, WkbLevel};
use crate::transform::{effective_problem, pullback_potential, pushforward_potential, PotentialSpec};

/// A PDM oscillator whose x-space potential is the pull-back of `y^2/2`.
#[derive(Debug, Clone)]
pub struct FirstKindOscillator {
    pub family: MassFamily,
    pub ordering: OrderingParameter,
    /// `s(x)^2 / 2` on the family's domain.
    pub potential: PotentialSpec,
    map: CoordinateMap,
}

impl FirstKindOscillator {
    /// Uses the ordering that removes the effective potential correction.
    pub fn new(family: MassFamily) -> Result<Self> {
        Self::with_ordering(family, family.natural_ordering())
    }

    pub fn with_ordering(family: MassFamily, ordering: OrderingParameter) -> Result<Self> {
        family.validate()?;
        if family.m0 != 1.0 {
            return Err(PdmError::InvalidParameter(format!(
                "first-kind oscillators are built in units with m0 = 1, got {}",
                family.m0
            )));
        }
        let map = coordinate_map(&family)?;
        let potential = pullback_potential(&PotentialSpec::harmonic(), &map)?;
        Ok(Self {
            family,
            ordering,
            potential,
            map,
        })
    }

    pub fn map(&self) -> &CoordinateMap {
        &self.map
    }

    /// `k + 1/2`.
    pub fn energy(&self, k: usize) -> f64 {
        k as f64 + 0.5
    }

    /// Whether the ordering leaves no effective potential correction.
    pub fn is_exact(&self) -> bool {
        (self.ordering.a - self.family.natural_ordering().a).abs() < 1e-15
            || self.family.kind == MassKind::Constant
    }

    /// The y-space problem `V(s^-1(y)) - correction(y)` built by composition,
    /// without relying on closed-form tags.
    ///
    /// For the odd-root families with `x0 != 0` the round trip through x loses
    /// `x0 + lambda x` to cancellation near the pole, so `x0 = 0` is the
    /// well-conditioned choice there.
    pub fn y_problem(&self) -> PotentialSpec {
        effective_problem(&self.potential, &self.map, self.ordering.a)
    }

    /// Numerical levels of [`Self::y_problem`].
    pub fn spectrum(&self, k_max: usize, cfg: &SolverConfig) -> Result<Vec<EigenSolution>> {
        solve_levels(&self.y_problem(), k_max, cfg)
    }
}

/// `psi_k(x) = J(x)^(1/2) phi_k(s(x))`.
pub fn first_kind_eigenfunction(osc: &FirstKindOscillator, k: usize, x: f64) -> Result<f64> {
    if !osc.map.x_domain.contains(x) {
        return Err(PdmError::Domain(format!(
            "x = {x} outside {} for {}",
            osc.map.x_domain,
            osc.family.name()
        )));
    }
    osc.family.mass_derivatives(x)?;
    let j = osc.map.jacobian(x);
    Ok(j.sqrt() * hermite_function(k, osc.map.forward(x)))
}

/// Hand-coded eigenfunction of the odd-root (`n >= 1`) or square-log
/// (`n = 0`) oscillator at `lambda = 1`. Uses `|x0 + x|` in the Jacobian
/// factor so that the result is the positive square root for `x < -x0`.
pub fn singular_eigenfunction(n: u32, x0: f64, k: usize, x: f64) -> Result<f64> {
    let u = x0 + x;
    let norm = (2f64.powi(k as i32) * PI.sqrt() * factorial(k)).sqrt();
    if n == 0 {
        if u <= 0.0 {
            return Err(PdmError::Domain(format!("x = {x} below t0 = {}", -x0)));
        }
        let l = u.ln();
        return Ok(hermite(k, l) / (u * 2f64.powi(k as i32) * PI.sqrt() * factorial(k)).sqrt()
            * (-0.5 * l * l).exp());
    }
    if u == 0.0 {
        return Err(PdmError::Domain(format!("x = {x} is the mass pole")));
    }
    let q = f64::from(2 * n + 1);
    let root = u.signum() * u.abs().powf(1.0 / q);
    let jac = u.abs().powf(f64::from(n) / q);
    Ok(hermite(k, q * root) / (jac * norm) * (-0.5 * q * q * root * root).exp())
}

/// Hand-coded eigenfunction of `asinh^2(x)/2` with the regular mass at `lambda = 1`.
pub fn regular_eigenfunction(k: usize, x: f64) -> f64 {
    let m = 1.0 / (1.0 + x * x);
    let s = x.asinh();
    let kf = factorial(k);
    (m / (4f64.powi(k as i32) * PI * kf * kf)).powf(0.25) * hermite(k, s) * (-0.5 * s * s).exp()
}

/// `[(1/z - z)^2 + 2(1 - sqrt 2)] / 8` with `z = x0 + x`.
pub fn squeezed_potential(x: f64, x0: f64) -> Result<f64> {
    let z = x0 + x;
    if !(z > 0.0) {
        return Err(PdmError::Domain(format!("squeezed potential needs x0 + x > 0, got {z}")));
    }
    let d = 1.0 / z - z;
    Ok((d * d + 2.0 * (1.0 - SQRT_2)) / 8.0)
}

/// Normalized squeezed-oscillator eigenfunction at energy `k + 1/2`; zero for `z <= 0`.
pub fn squeezed_eigenfunction(k: usize, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let alpha = FRAC_1_SQRT_2;
    // gamma_fn only fails at poles, and k + 1 + alpha is positive
    let g = gamma_fn(k as f64 + 1.0 + alpha).expect("positive argument");
    let c = (factorial(k) / (2f64.powf(alpha) * g)).sqrt();
    c * z.powf(0.5 * (1.0 + SQRT_2)) * (-0.25 * z * z).exp() * laguerre(k, alpha, 0.5 * z * z)
}

/// Normalized Hermite functions `phi_0..=phi_k_max` at `y`.
pub fn oscillator_eigenfunctions(k_max: usize, y: f64) -> Vec<f64> {
    hermite_functions(k_max, y)
}

/// The x-space potential of a second-kind oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondKindPotential {
    Harmonic,
    /// Uses the family's `x0` and `lambda`.
    Squeezed,
}

/// A PDM problem whose x-space potential is harmonic or squeezed, together
/// with its y-space image.
#[derive(Debug, Clone)]
pub struct SecondKindOscillator {
    pub family: MassFamily,
    pub x_potential: PotentialSpec,
    pub y_potential: PotentialSpec,
}

pub fn build_second_kind(family: MassFamily, x_pot: SecondKindPotential) -> Result<SecondKindOscillator> {
    family.validate()?;
    if family.kind == MassKind::Singular0 && x_pot == SecondKindPotential::Harmonic {
        return Err(PdmError::Domain(
            "the harmonic potential lives on the full line but the singular0 mass only maps the half line x > t0"
                .into(),
        ));
    }
    let map = coordinate_map(&family)?;
    let x_potential = match x_pot {
        SecondKindPotential::Harmonic => PotentialSpec::harmonic(),
        SecondKindPotential::Squeezed => PotentialSpec::squeezed(family.x0, family.lambda)?,
    };
    let y_potential = pushforward_potential(&x_potential, &map)?;
    Ok(SecondKindOscillator {
        family,
        x_potential,
        y_potential,
    })
}

impl SecondKindOscillator {
    /// Numerical levels; a finite lower end of the y-domain is a wall.
    pub fn spectrum(&self, k_max: usize, cfg: &SolverConfig) -> Result<Vec<EigenSolution>> {
        if self.y_potential.domain.lo.is_finite() {
            solve_halfline(&self.y_potential, k_max, cfg)
        } else {
            solve_levels(&self.y_potential, k_max, cfg)
        }
    }

    pub fn wkb_spectrum(&self, k_max: usize) -> Result<Vec<WkbLevel>> {
        (0..=k_max).map(|k| wkb_level(&self.y_potential, k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{simpson_uniform, tanh_sinh};
    use crate::transform::{squeezed_floor, PotentialKind};

    fn families() -> Vec<MassFamily> {
        vec![
            MassFamily::singular0(1.0, 1.0).unwrap(),
            MassFamily::singular_n(1, 0.0, 1.0).unwrap(),
            MassFamily::singular_n(2, 0.0, 1.0).unwrap(),
            MassFamily::singular_n(3, 0.0, 1.0).unwrap(),
            MassFamily::regular(1.0).unwrap(),
        ]
    }

    #[test]
    fn ground_state_peaks() {
        let reg = FirstKindOscillator::new(MassFamily::regular(1.0).unwrap()).unwrap();
        let s0 = FirstKindOscillator::new(MassFamily::singular0(1.0, 1.0).unwrap()).unwrap();
        let want = PI.powf(-0.25);
        assert!((first_kind_eigenfunction(&reg, 0, 0.0).unwrap() - want).abs() < 1e-15);
        assert!((first_kind_eigenfunction(&s0, 0, 0.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.751126).abs() < 1e-6);
    }

    #[test]
    fn pipeline_matches_hand_coded_forms() {
        for n in 1..=3u32 {
            for x0 in [0.0, 0.7] {
                let osc = FirstKindOscillator::new(MassFamily::singular_n(n, x0, 1.0).unwrap()).unwrap();
                for k in 0..5 {
                    for x in [-2.3, -0.4, 0.05, 0.9, 3.1] {
                        let a = first_kind_eigenfunction(&osc, k, x).unwrap();
                        let b = singular_eigenfunction(n, x0, k, x).unwrap();
                        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "n={n} k={k} x={x}: {a} {b}");
                    }
                }
            }
        }
        let osc = FirstKindOscillator::new(MassFamily::singular0(1.0, 1.0).unwrap()).unwrap();
        let reg = FirstKindOscillator::new(MassFamily::regular(1.0).unwrap()).unwrap();
        for k in 0..5 {
            for x in [-0.8, -0.2, 0.0, 1.5, 6.0] {
                let a = first_kind_eigenfunction(&osc, k, x).unwrap();
                let b = singular_eigenfunction(0, 1.0, k, x).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                let a = first_kind_eigenfunction(&reg, k, x).unwrap();
                let b = regular_eigenfunction(k, x);
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
        assert!(first_kind_eigenfunction(&osc, 0, -1.5).is_err());
        let pole = FirstKindOscillator::new(MassFamily::singular_n(1, 0.0, 1.0).unwrap()).unwrap();
        assert!(first_kind_eigenfunction(&pole, 0, 0.0).is_err());
    }

    #[test]
    fn first_kind_potential_is_half_s_squared() {
        for fam in families() {
            let osc = FirstKindOscillator::new(fam).unwrap();
            for x in [0.2, 0.9, 2.5] {
                let s = osc.map().forward(x);
                assert!((osc.potential.value(x) - 0.5 * s * s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_kind_spectra_by_composition() {
        let cfg = SolverConfig::default();
        for fam in families() {
            let osc = FirstKindOscillator::new(fam).unwrap();
            let sols = osc.spectrum(4, &cfg).unwrap();
            for s in &sols {
                assert!((s.energy - osc.energy(s.k)).abs() < 1e-6, "{}: {} {}", fam.name(), s.k, s.energy);
            }
        }
    }

    #[test]
    fn squeezed_values() {
        assert!((squeezed_potential(1.0, 0.0).unwrap() - (1.0 - SQRT_2) / 4.0).abs() < 1e-15);
        assert!((squeezed_potential(0.5, 1.5).unwrap() - 0.1776966).abs() < 1e-7);
        // expanded as an oscillator plus an inverse-square term
        let z: f64 = 2.0;
        let alt = z * z / 8.0 + 1.0 / (8.0 * z * z) - SQRT_2 / 4.0;
        assert!((squeezed_potential(z, 0.0).unwrap() - alt).abs() < 1e-14);
        assert!(squeezed_potential(1e-8, 0.0).unwrap() > 1e14);
        assert!(squeezed_potential(-1.0, 0.5).is_err());
    }

    #[test]
    fn squeezed_eigenfunctions_normalized_and_orthogonal() {
        for i in 0..4 {
            for j in 0..4 {
                let f = |z: f64| squeezed_eigenfunction(i, z) * squeezed_eigenfunction(j, z);
                let v = tanh_sinh(f, 0.0, 30.0, 1e-12).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-8, "({i},{j}) {v}");
            }
        }
        // the single node of phi_1 sits where L_1 vanishes
        let z1 = (2.0 * (1.0 + FRAC_1_SQRT_2)).sqrt();
        assert!(squeezed_eigenfunction(1, z1).abs() < 1e-14);
        let mut changes = 0;
        let mut last = squeezed_eigenfunction(1, 1e-3);
        for i in 2..3000 {
            let v = squeezed_eigenfunction(1, i as f64 * 1e-2);
            if v * last < 0.0 {
                changes += 1;
            }
            if v != 0.0 {
                last = v;
            }
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn squeezed_eigenfunctions_solve_the_equation() {
        for k in 0..4 {
            for z in [0.3, 1.0, 2.2, 4.0] {
                let h = 1e-3;
                let f = |t: f64| squeezed_eigenfunction(k, t);
                let d2 = (f(z - h) - 2.0 * f(z) + f(z + h)) / (h * h);
                let lhs = -0.5 * d2 + squeezed_potential(z, 0.0).unwrap() * f(z);
                assert!((lhs - (k as f64 + 0.5) * f(z)).abs() < 1e-5, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn numeric_squeezed_overlaps_closed_form() {
        let v = PotentialSpec::squeezed(0.0, 1.0).unwrap();
        let sols = solve_halfline(&v, 5, &SolverConfig::default()).unwrap();
        for s in &sols {
            let exact: Vec<f64> = s.wave.grid.iter().map(|&z| squeezed_eigenfunction(s.k, z)).collect();
            let prod: Vec<f64> = exact.iter().zip(&s.wave.re).map(|(a, b)| a * b).collect();
            let ov = s.integrate(&prod);
            assert!(ov.abs() > 1.0 - 1e-6, "k={} overlap {ov}", s.k);
        }
    }

    #[test]
    fn second_kind_tags() {
        let reg = build_second_kind(MassFamily::regular(1.0).unwrap(), SecondKindPotential::Harmonic).unwrap();
        assert!(matches!(reg.y_potential.kind, PotentialKind::Sinh2));
        let s0 = build_second_kind(MassFamily::singular0(1.0, 1.0).unwrap(), SecondKindPotential::Squeezed).unwrap();
        assert!(matches!(s0.y_potential.kind, PotentialKind::Sinh2));
        assert!((s0.y_potential.shift - squeezed_floor(1.0)).abs() < 1e-15);
        let e = build_second_kind(MassFamily::singular0(1.0, 1.0).unwrap(), SecondKindPotential::Harmonic);
        assert!(matches!(e, Err(PdmError::Domain(_))));
        let p = build_second_kind(MassFamily::singular_n(2, 0.0, 1.0).unwrap(), SecondKindPotential::Harmonic).unwrap();
        assert!(matches!(p.y_potential.kind, PotentialKind::PowerLaw { n: 2 }));
    }

    #[test]
    fn second_kind_matches_pushforward_pointwise() {
        let cases = [
            (MassFamily::regular(1.0).unwrap(), SecondKindPotential::Harmonic),
            (MassFamily::regular(1.0).unwrap(), SecondKindPotential::Squeezed),
            (MassFamily::singular0(1.0, 1.0).unwrap(), SecondKindPotential::Squeezed),
            (MassFamily::singular_n(1, 0.0, 1.0).unwrap(), SecondKindPotential::Harmonic),
            (MassFamily::singular_n(1, 0.5, 1.0).unwrap(), SecondKindPotential::Squeezed),
        ];
        for (fam, pot) in cases {
            let osc = build_second_kind(fam, pot).unwrap();
            let map = coordinate_map(&fam).unwrap();
            for y in [0.3, 0.8, 1.7, 2.9] {
                if !osc.y_potential.domain.contains(y) {
                    continue;
                }
                let direct = osc.x_potential.value(map.inverse(y));
                let got = osc.y_potential.value(y);
                assert!((got - direct).abs() < 1e-10 * (1.0 + direct.abs()), "{} {y}: {got} {direct}", fam.name());
            }
        }
    }

    #[test]
    fn isospectral_pair_up_to_shift() {
        let cfg = SolverConfig::default();
        let osc = build_second_kind(MassFamily::regular(1.0).unwrap(), SecondKindPotential::Harmonic).unwrap();
        let sq = build_second_kind(MassFamily::singular0(1.0, 1.0).unwrap(), SecondKindPotential::Squeezed).unwrap();
        let a = osc.spectrum(9, &cfg).unwrap();
        let b = sq.spectrum(9, &cfg).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p.energy - (q.energy - squeezed_floor(1.0))).abs() < 1e-9);
            // every distorted level lies above the oscillator level
            assert!(p.energy > p.k as f64 + 0.5);
        }
    }

    #[test]
    fn pulled_back_levels_are_normalized_in_x() {
        let cfg = SolverConfig {
            grid_points: 8001,
            ..SolverConfig::default()
        };
        let sols = solve_levels(&PotentialSpec::harmonic(), 2, &cfg).unwrap();
        for fam in families() {
            let map = coordinate_map(&fam).unwrap();
            for s in &sols {
                let n = crate::transform::x_space_norm(&s.wave, &map).unwrap();
                assert!((n - 1.0).abs() < 1e-6, "{}: {n}", fam.name());
            }
        }
        let h = sols[0].wave.grid[1] - sols[0].wave.grid[0];
        let d: Vec<f64> = sols[0].wave.re.iter().map(|p| p * p).collect();
        assert!((simpson_uniform(h, &d) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn first_kind_rejects_other_units() {
        let fam = MassFamily::new(MassKind::Regular, 2.0, 0.0, 1.0).unwrap();
        assert!(FirstKindOscillator::new(fam).is_err());
        assert!(FirstKindOscillator::new(MassFamily::quadratic_c(1.0).unwrap()).is_err());
    }
}
