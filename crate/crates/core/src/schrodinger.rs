//! Bound states of `-phi''/2 + V phi = E phi` by Numerov shooting.
//!
//! Levels are bracketed by counting the sign changes of the outward solution
//! (a Sturm count of the Dirichlet problem on the truncated grid), then
//! pinned by bisection on the mismatch of outward and inward solutions at the
//! rightmost turning point.

use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::spectra::{turning_points, wkb_quantize};
use crate::transform::{PotentialSpec, Space, WaveSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Odd, at least 201.
    pub grid_points: usize,
    /// Truncate where `V >= E_target + ymax_margin`.
    pub ymax_margin: f64,
    /// ... and where `int sqrt(2(V - E_target))` beyond the turning point
    /// reaches this many decay lengths.
    pub decay_lengths: f64,
    pub energy_tol: f64,
    pub max_levels: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_points: 4001,
            ymax_margin: 25.0,
            decay_lengths: 22.0,
            energy_tol: 1e-10,
            max_levels: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 201 || self.grid_points.is_multiple_of(2) {
            return Err(PdmError::InvalidParameter(format!(
                "grid_points must be odd and >= 201, got {}",
                self.grid_points
            )));
        }
        if !(self.energy_tol > 0.0) {
            return Err(PdmError::InvalidParameter("energy_tol must be positive".into()));
        }
        if !(self.ymax_margin > 0.0) || !(self.decay_lengths >= 0.0) {
            return Err(PdmError::InvalidParameter("truncation margins must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub k: usize,
    pub energy: f64,
    pub wave: WaveSample,
    /// Quadrature weights on `wave.grid`: `int F dy ~ sum w_i F(y_i)`.
    pub weights: Vec<f64>,
    /// `int |phi|^2` after normalization.
    pub norm: f64,
}

impl EigenSolution {
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `<self|other>` when both share a grid.
    pub fn overlap(&self, other: &EigenSolution) -> f64 {
        let prod: Vec<f64> = self.wave.re.iter().zip(&other.wave.re).map(|(a, b)| a * b).collect();
        self.integrate(&prod)
    }

    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let vals: Vec<f64> = self
            .wave
            .grid
            .iter()
            .zip(&self.wave.re)
            .map(|(y, p)| f(*y) * p * p)
            .collect();
        self.integrate(&vals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LeftEnd {
    /// Dirichlet node at a truncation point or a regular hard wall.
    Dirichlet,
    /// Inverse-square wall; `ell` is the indicial exponent in the stretched variable.
    Wall { ell: f64 },
}

/// Power of the stretch `y = lo + t^q` used at inverse-square walls.
const WALL_STRETCH: i32 = 3;

/// Numerov problem `u'' = (a - E b) u` on a uniform grid in `t`.
///
/// Away from walls `t = y`, `a = 2V`, `b = 2`. At an inverse-square wall
/// `y = lo + t^q` and `phi = sqrt(y') u`, which adds the Schwarzian term
/// `(q^2 - 1)/(4 t^2)` to `a` and the weight `2 y'^2` to `b`.
struct Problem {
    h: f64,
    y: Vec<f64>,
    jac: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    left: LeftEnd,
}

/// Lowest points where the outward and inward shots are spliced.
const MIN_MATCH: usize = 3;

impl Problem {
    fn uniform(v: &PotentialSpec, yl: f64, yr: f64, n: usize) -> Self {
        let h = (yr - yl) / (n - 1) as f64;
        let y: Vec<f64> = (0..n).map(|i| yl + i as f64 * h).collect();
        // the end nodes only multiply phi = 0
        let vals: Vec<f64> = y
            .iter()
            .map(|&t| {
                let x = v.value(t);
                if x.is_finite() { x } else { 0.0 }
            })
            .collect();
        Self {
            h,
            a: vals.iter().map(|x| 2.0 * x).collect(),
            b: vec![2.0; n],
            jac: vec![1.0; n],
            y,
            v: vals,
            left: LeftEnd::Dirichlet,
        }
    }

    fn stretched(v: &PotentialSpec, lo: f64, yr: f64, n: usize, ell: f64) -> Self {
        let q = WALL_STRETCH;
        let qf = f64::from(q);
        let h = (yr - lo).powf(1.0 / qf) / (n - 1) as f64;
        let mut p = Self {
            h,
            y: vec![lo; n],
            jac: vec![0.0; n],
            v: vec![0.0; n],
            a: vec![0.0; n],
            b: vec![0.0; n],
            left: LeftEnd::Wall { ell: 0.5 + qf * (ell - 0.5) },
        };
        for i in 1..n {
            let t = i as f64 * h;
            let g1 = qf * t.powi(q - 1);
            let vy = v.value(lo + t.powi(q));
            p.y[i] = lo + t.powi(q);
            p.jac[i] = g1;
            p.v[i] = vy;
            p.a[i] = 2.0 * g1 * g1 * vy + (qf * qf - 1.0) / (4.0 * t * t);
            p.b[i] = 2.0 * g1 * g1;
        }
        p
    }

    fn n(&self) -> usize {
        self.v.len()
    }

    fn f(&self, e: f64, i: usize) -> f64 {
        1.0 + self.h * self.h / 12.0 * (e * self.b[i] - self.a[i])
    }

    /// Outward Numerov solution up to index `upto`, rescaled by positive
    /// factors whenever it grows large.
    fn shoot_out(&self, e: f64, upto: usize) -> Vec<f64> {
        let n = upto.min(self.n() - 1) + 1;
        let mut u = vec![0.0; n];
        let start = match self.left {
            LeftEnd::Dirichlet => {
                u[1] = 1.0;
                1
            }
            LeftEnd::Wall { ell } => {
                u[1] = 1.0;
                u[2] = 2f64.powf(ell);
                2
            }
        };
        let mut fm = self.f(e, start - 1);
        let mut f0 = self.f(e, start);
        for i in start..n - 1 {
            let fp = self.f(e, i + 1);
            u[i + 1] = ((12.0 - 10.0 * f0) * u[i] - fm * u[i - 1]) / fp;
            fm = f0;
            f0 = fp;
            if u[i + 1].abs() > 1e200 {
                u[..=i + 1].iter_mut().for_each(|p| *p *= 1e-200);
            }
        }
        u
    }

    /// Inward solution from the right Dirichlet end down to index `from`.
    fn shoot_in(&self, e: f64, from: usize) -> Vec<f64> {
        let n = self.n();
        let mut u = vec![0.0; n];
        u[n - 2] = 1.0;
        let mut fp = self.f(e, n - 1);
        let mut f0 = self.f(e, n - 2);
        let stop = from.max(1);
        let mut i = n - 2;
        while i > stop {
            let fm = self.f(e, i - 1);
            u[i - 1] = ((12.0 - 10.0 * f0) * u[i] - fp * u[i + 1]) / fm;
            fp = f0;
            f0 = fm;
            if u[i - 1].abs() > 1e200 {
                u[i - 1..].iter_mut().for_each(|p| *p *= 1e-200);
            }
            i -= 1;
        }
        u
    }

    /// Number of Dirichlet levels at or below `e`.
    fn count(&self, e: f64) -> usize {
        sign_changes(&self.shoot_out(e, self.n() - 1)[1..], 0.0)
    }

    /// Index of the rightmost classically allowed node.
    fn match_index(&self, e: f64) -> usize {
        let n = self.n();
        let last = (1..n - 1).rev().find(|&i| self.v[i] < e).unwrap_or(n / 2);
        last.clamp(MIN_MATCH, n - MIN_MATCH - 1)
    }

    /// Log-derivative mismatch of the Numerov variables at `m`.
    fn mismatch(&self, e: f64, m: usize) -> f64 {
        let l = self.shoot_out(e, m + 1);
        let r = self.shoot_in(e, m);
        let (fl, fr) = (self.f(e, m), self.f(e, m + 1));
        (fr * r[m + 1]) / (fl * r[m]) - (fr * l[m + 1]) / (fl * l[m])
    }

    /// `phi` (not `u`) at energy `e`, spliced from both shots.
    fn eigenfunction(&self, e: f64) -> Vec<f64> {
        let n = self.n();
        let mut m = self.match_index(e);
        let l = self.shoot_out(e, n - 1);
        // splice where the outward solution is not near a node
        let peak = l[..=m].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        while m > MIN_MATCH && l[m].abs() < 1e-3 * peak {
            m -= 1;
        }
        let r = self.shoot_in(e, m);
        let scale = l[m] / r[m];
        let mut u: Vec<f64> = l[..m].to_vec();
        u.extend(r[m..].iter().map(|v| v * scale));
        u[n - 1] = 0.0;
        u.iter().zip(&self.jac).map(|(u, j)| u * j.sqrt()).collect()
    }

    /// Simpson weights in `t` carried to `y`.
    fn weights(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * self.h / 3.0 * self.jac[i]
            })
            .collect()
    }
}

fn sign_changes(v: &[f64], floor: f64) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

/// `c` in `V ~ c/(2 d^2)` at a finite left end, when that law holds.
fn wall_coefficient(v: &PotentialSpec, lo: f64, scale: f64) -> Option<f64> {
    let (d1, d2) = (1e-7 * scale, 1e-6 * scale);
    let c1 = 2.0 * d1 * d1 * v.value(lo + d1);
    let c2 = 2.0 * d2 * d2 * v.value(lo + d2);
    (c1.is_finite() && c2.is_finite() && (c1 - c2).abs() <= 1e-3 * (1.0 + c1.abs())).then_some(c1)
}

/// Truncation point beyond the turning point `tp` in direction `dir`.
fn truncation(v: &PotentialSpec, e: f64, tp: f64, dir: f64, width: f64, cfg: &SolverConfig) -> Result<f64> {
    let end = if dir > 0.0 { v.domain.hi } else { v.domain.lo };
    let mut y = tp;
    let mut decay = 0.0;
    let base = width / 4000.0;
    for _ in 0..10_000_000 {
        let mut ds = base;
        if end.is_finite() {
            let dist = (end - y).abs();
            if dist <= 1e-12 * (1.0 + end.abs()) {
                return Ok(end);
            }
            ds = ds.min(0.25 * dist);
        }
        y += dir * ds;
        let vy = v.value(y);
        if vy.is_nan() {
            return Err(PdmError::Domain(format!("{} potential undefined at {y}", v.name())));
        }
        decay += (2.0 * (vy - e).max(0.0)).sqrt() * ds;
        if vy >= e + cfg.ymax_margin && decay >= cfg.decay_lengths {
            return Ok(y);
        }
    }
    Err(PdmError::NonConfining(format!(
        "{} potential does not rise {} above E = {e}",
        v.name(),
        cfg.ymax_margin
    )))
}

fn setup(v: &PotentialSpec, k_max: usize, cfg: &SolverConfig, force_wall: bool) -> Result<Problem> {
    cfg.validate()?;
    if k_max + 1 > cfg.max_levels {
        return Err(PdmError::InvalidParameter(format!(
            "{} levels requested, max_levels is {}",
            k_max + 1,
            cfg.max_levels
        )));
    }
    let target = wkb_quantize(v, k_max)?.energy;
    let (tl, tr) = turning_points(v, target)?;
    let width = tr - tl;
    let yr = truncation(v, target, tr, 1.0, width, cfg)?;
    let n = cfg.grid_points;
    let lo = v.domain.lo;
    let mut problem = None;
    if lo.is_finite() {
        if let Some(c) = wall_coefficient(v, lo, width) {
            if c < -0.25 {
                return Err(PdmError::Domain(format!(
                    "attractive inverse-square wall (c = {c}) has no ground state"
                )));
            }
            let ell = 0.5 + (0.25 + c).sqrt();
            problem = Some(if (ell - 1.0).abs() < 1e-9 {
                Problem::uniform(v, lo, yr, n)
            } else {
                Problem::stretched(v, lo, yr, n, ell)
            });
        } else if force_wall && v.value(lo + 1e-9 * width).is_finite() {
            problem = Some(Problem::uniform(v, lo, yr, n));
        }
    }
    let p = match problem {
        Some(p) => p,
        None => {
            let yl = truncation(v, target, tl, -1.0, width, cfg)?;
            Problem::uniform(v, yl, yr, n)
        }
    };
    let (_, vmin) = v.minimum();
    let coarse = (1..n - 1).any(|i| {
        let s = p.h * p.h / 12.0 * (p.a[i] - vmin * p.b[i]);
        !(s <= 1.0)
    });
    if coarse {
        return Err(PdmError::GridTooCoarse(format!(
            "step {} too large for the potential range on [{}, {yr}]",
            p.h, p.y[0]
        )));
    }
    Ok(p)
}

/// Levels `0..=k_max` of `-phi''/2 + V phi = E phi`.
pub fn solve_levels(v: &PotentialSpec, k_max: usize, cfg: &SolverConfig) -> Result<Vec<EigenSolution>> {
    let p = setup(v, k_max, cfg, false)?;
    solve_problem(v, &p, k_max, cfg)
}

/// Levels with `phi = 0` at the finite left end of the domain.
pub fn solve_halfline(v: &PotentialSpec, k_max: usize, cfg: &SolverConfig) -> Result<Vec<EigenSolution>> {
    if !v.domain.lo.is_finite() {
        return Err(PdmError::Domain(format!(
            "{} potential has no wall: domain {}",
            v.name(),
            v.domain
        )));
    }
    let p = setup(v, k_max, cfg, true)?;
    solve_problem(v, &p, k_max, cfg)
}

fn solve_problem(v: &PotentialSpec, p: &Problem, k_max: usize, cfg: &SolverConfig) -> Result<Vec<EigenSolution>> {
    let n = p.n();
    let (_, vmin) = v.minimum();
    let weights = p.weights();
    let mut out = Vec::with_capacity(k_max + 1);
    let mut floor_e = vmin;
    for k in 0..=k_max {
        let mut lo = floor_e;
        let mut step = 1.0;
        let mut hi = lo + step;
        while p.count(hi) < k + 1 {
            lo = hi;
            step *= 2.0;
            hi += step;
            if step > 1e12 {
                return Err(PdmError::Convergence(format!("could not bracket level {k}")));
            }
        }
        let tol = |e: f64| cfg.energy_tol * e.abs().max(1.0);
        // coarse bracket by counting
        while hi - lo > 1e-6 * hi.abs().max(1.0) && hi - lo > tol(hi) {
            let mid = 0.5 * (lo + hi);
            if p.count(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // fine bisection on the matching mismatch when it brackets a root
        let m = p.match_index(hi);
        let (mut dlo, dhi) = (p.mismatch(lo, m), p.mismatch(hi, m));
        let by_mismatch = dlo.is_finite() && dhi.is_finite() && dlo * dhi < 0.0;
        for _ in 0..200 {
            if hi - lo <= tol(hi) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let go_up = if by_mismatch {
                let dm = p.mismatch(mid, m);
                let up = dm * dlo > 0.0;
                if up {
                    dlo = dm;
                }
                up
            } else {
                p.count(mid) <= k
            };
            if go_up {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let energy = 0.5 * (lo + hi);
        floor_e = energy;

        let mut phi = p.eigenfunction(energy);
        let norm2: f64 = weights.iter().zip(&phi).map(|(w, x)| w * x * x).sum();
        let m = p.match_index(energy);
        let sign = if phi[m] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign / norm2.sqrt();
        phi.iter_mut().for_each(|x| *x *= scale);
        let peak = phi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let nodes = sign_changes(&phi[1..n - 1], 1e-9 * peak);
        if nodes != k {
            return Err(PdmError::Convergence(format!(
                "level {k} at E = {energy} has {nodes} nodes"
            )));
        }
        let right_tail = phi[n - 2].abs() / peak;
        let left_tail = if v.domain.lo != p.y[0] { phi[1].abs() / peak } else { 0.0 };
        if right_tail > 1e-8 || left_tail > 1e-8 {
            return Err(PdmError::InsufficientDomain(format!(
                "level {k} tail {:.1e} at the boundary of [{}, {}]; raise ymax_margin",
                right_tail.max(left_tail),
                p.y[0],
                p.y[n - 1]
            )));
        }
        let norm: f64 = weights.iter().zip(&phi).map(|(w, x)| w * x * x).sum();
        out.push(EigenSolution {
            k,
            energy,
            wave: WaveSample::real(p.y.clone(), phi, Space::Y)?,
            weights: weights.clone(),
            norm,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass_models::Interval;
    use crate::quadrature::simpson_uniform;
    use crate::special_fns::hermite_function;

    fn gram(sols: &[EigenSolution]) -> Vec<Vec<f64>> {
        sols.iter()
            .map(|a| sols.iter().map(|b| a.overlap(b)).collect())
            .collect()
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.grid_points = 4000;
        assert!(c.validate().is_err());
        c.grid_points = 101;
        assert!(c.validate().is_err());
        c = SolverConfig { energy_tol: 0.0, ..SolverConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn harmonic_levels() {
        let sols = solve_levels(&PotentialSpec::harmonic(), 5, &SolverConfig::default()).unwrap();
        for s in &sols {
            assert!((s.energy - (s.k as f64 + 0.5)).abs() < 1e-8, "{}: {}", s.k, s.energy);
            assert!((s.norm - 1.0).abs() < 1e-8);
            let h = s.wave.grid[1] - s.wave.grid[0];
            let y2: Vec<f64> = s.wave.grid.iter().zip(&s.wave.re).map(|(y, p)| y * y * p * p).collect();
            assert!((simpson_uniform(h, &y2) - (s.k as f64 + 0.5)).abs() < 1e-6);
            assert!((s.expectation(|y| y * y) - (s.k as f64 + 0.5)).abs() < 1e-6);
            // matches the Hermite function pointwise
            for (y, p) in s.wave.grid.iter().zip(&s.wave.re).step_by(97) {
                assert!((p - hermite_function(s.k, *y)).abs() < 1e-6, "k = {} y = {y}", s.k);
            }
        }
        let g = gram(&sols);
        for (i, row) in g.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-6, "({i},{j}) = {x}");
            }
        }
    }

    #[test]
    fn numerov_fourth_order() {
        let v = PotentialSpec::harmonic();
        let err = |n: usize| {
            let cfg = SolverConfig { grid_points: n, ..SolverConfig::default() };
            let s = solve_levels(&v, 3, &cfg).unwrap();
            (s[3].energy - 3.5).abs()
        };
        let (e1, e2) = (err(201), err(401));
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "{e1} {e2} {ratio}");
    }

    #[test]
    fn sinh2_table_column() {
        let v = PotentialSpec::sinh2(1.0).unwrap();
        let sols = solve_levels(&v, 9, &SolverConfig::default()).unwrap();
        let table = [
            0.60571, 1.98368, 3.66250, 5.59365, 7.74948, 10.11165, 12.66657, 15.40365, 18.31431,
            21.39141,
        ];
        for (s, t) in sols.iter().zip(table) {
            assert!((s.energy - t).abs() < 1e-3, "k = {}: {}", s.k, s.energy);
        }
        assert!((sols[0].energy - 0.60571).abs() < 1e-4);
    }

    #[test]
    fn squeezed_halfline() {
        let v = PotentialSpec::squeezed(0.0, 1.0).unwrap();
        let sols = solve_halfline(&v, 5, &SolverConfig::default()).unwrap();
        for s in &sols {
            assert!((s.energy - (s.k as f64 + 0.5)).abs() < 1e-8, "{}: {}", s.k, s.energy);
            assert!((s.norm - 1.0).abs() < 1e-9);
        }
        let g = gram(&sols);
        for (i, row) in g.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-6, "({i},{j}) {x}");
            }
        }
    }

    #[test]
    fn harmonic_with_wall_gives_odd_levels() {
        let v = PotentialSpec {
            domain: Interval::new(0.0, f64::INFINITY),
            ..PotentialSpec::harmonic()
        };
        let sols = solve_halfline(&v, 1, &SolverConfig::default()).unwrap();
        assert!((sols[0].energy - 1.5).abs() < 1e-8, "{}", sols[0].energy);
        assert!((sols[1].energy - 3.5).abs() < 1e-8, "{}", sols[1].energy);
    }

    #[test]
    fn needs_a_wall_for_halfline() {
        assert!(solve_halfline(&PotentialSpec::harmonic(), 0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn shifted_and_asymmetric_wells() {
        let v = PotentialSpec::harmonic().with_shift(-3.0);
        let sols = solve_levels(&v, 2, &SolverConfig::default()).unwrap();
        assert!((sols[2].energy - (2.5 - 3.0)).abs() < 1e-8);
        let c = PotentialSpec::custom(|y: f64| 0.5 * (y - 1.5) * (y - 1.5), Interval::REAL);
        let sols = solve_levels(&c, 2, &SolverConfig::default()).unwrap();
        assert!((sols[1].energy - 1.5).abs() < 1e-8);
    }

    #[test]
    fn tiny_margin_is_reported() {
        let cfg = SolverConfig { ymax_margin: 0.5, decay_lengths: 0.5, ..SolverConfig::default() };
        let err = solve_levels(&PotentialSpec::harmonic(), 2, &cfg).unwrap_err();
        assert!(matches!(err, PdmError::InsufficientDomain(_)), "{err:?}");
    }

    #[test]
    fn non_confining_is_rejected() {
        let v = PotentialSpec::custom(|y: f64| -(-y * y).exp(), Interval::REAL);
        assert!(solve_levels(&v, 0, &SolverConfig::default()).is_err());
    }
}
