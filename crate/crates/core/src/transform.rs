//! Reduction of position-dependent-mass problems to constant-mass ones:
//! potentials, effective potentials and wavefunctions moved between the
//! x-representation and the y-representation.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{PdmError, Result};
use crate::mass_models::{coordinate_map, mass_correction, CoordinateMap, Interval, MassFamily, MassKind};
use crate::quadrature::{tanh_sinh, trapezoid};

pub type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form potential shapes. `t` below is the argument, `z = x0 + lambda t`.
#[derive(Clone)]
pub enum PotentialKind {
    /// `t^2 / 2`.
    Harmonic,
    /// `[(1/z - z)^2 + 2(1 - sqrt 2)] / (8 lambda^2)` on `z > 0`.
    Squeezed,
    /// `((lambda t/(2n+1))^(2n+1) - x0)^2 / (2 lambda^2)`.
    PowerLaw { n: u32 },
    /// `sinh^2(lambda t) / (2 lambda^2)`.
    Sinh2,
    /// `(ln z / lambda)^2 / 2` on `z > 0`.
    Log2,
    /// `((2n+1)/lambda)^2 z^(2/(2n+1)) / 2`.
    OddRoot { n: u32 },
    /// `(asinh(lambda t) / lambda)^2 / 2`.
    ArcsinhSq,
    /// Squeezed bracket with `z = (lambda t/(2n+1))^(2n+1)`, on `t > 0`.
    SqueezedPowerLaw { n: u32 },
    /// Squeezed bracket with `z = x0 + sinh(lambda t)`.
    SqueezedSinh,
    Custom(PotentialFn),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Harmonic => write!(f, "Harmonic"),
            PotentialKind::Squeezed => write!(f, "Squeezed"),
            PotentialKind::PowerLaw { n } => write!(f, "PowerLaw({n})"),
            PotentialKind::Sinh2 => write!(f, "Sinh2"),
            PotentialKind::Log2 => write!(f, "Log2"),
            PotentialKind::OddRoot { n } => write!(f, "OddRoot({n})"),
            PotentialKind::ArcsinhSq => write!(f, "ArcsinhSq"),
            PotentialKind::SqueezedPowerLaw { n } => write!(f, "SqueezedPowerLaw({n})"),
            PotentialKind::SqueezedSinh => write!(f, "SqueezedSinh"),
            PotentialKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A one-dimensional potential with its (open) domain and an additive shift.
#[derive(Clone, Debug)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub x0: f64,
    pub lambda: f64,
    pub shift: f64,
    pub domain: Interval,
}

fn squeezed_bracket(z: f64, lambda: f64) -> f64 {
    let d = 1.0 / z - z;
    (d * d + 2.0 * (1.0 - SQRT_2)) / (8.0 * lambda * lambda)
}

/// Constant value of the squeezed potential at its minimum, `(1 - sqrt 2)/(4 lambda^2)`.
pub fn squeezed_floor(lambda: f64) -> f64 {
    (1.0 - SQRT_2) / (4.0 * lambda * lambda)
}

fn odd_root(u: f64, k: u32) -> f64 {
    u.signum() * u.abs().powf(1.0 / f64::from(k))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(PdmError::InvalidParameter(format!("lambda must be positive, got {lambda}")))
    }
}

impl PotentialSpec {
    fn closed(kind: PotentialKind, x0: f64, lambda: f64, domain: Interval) -> Result<Self> {
        check_lambda(lambda)?;
        if !x0.is_finite() {
            return Err(PdmError::InvalidParameter(format!("x0 must be finite, got {x0}")));
        }
        if let PotentialKind::PowerLaw { n }
        | PotentialKind::OddRoot { n }
        | PotentialKind::SqueezedPowerLaw { n } = kind
        {
            if n == 0 {
                return Err(PdmError::InvalidParameter("power-law index must be >= 1".into()));
            }
        }
        Ok(Self {
            kind,
            x0,
            lambda,
            shift: 0.0,
            domain,
        })
    }

    pub fn harmonic() -> Self {
        Self {
            kind: PotentialKind::Harmonic,
            x0: 0.0,
            lambda: 1.0,
            shift: 0.0,
            domain: Interval::REAL,
        }
    }

    pub fn squeezed(x0: f64, lambda: f64) -> Result<Self> {
        let dom = Interval::new(-x0 / lambda, f64::INFINITY);
        Self::closed(PotentialKind::Squeezed, x0, lambda, dom)
    }

    pub fn power_law(n: u32, x0: f64, lambda: f64) -> Result<Self> {
        Self::closed(PotentialKind::PowerLaw { n }, x0, lambda, Interval::REAL)
    }

    pub fn sinh2(lambda: f64) -> Result<Self> {
        Self::closed(PotentialKind::Sinh2, 0.0, lambda, Interval::REAL)
    }

    pub fn log2(x0: f64, lambda: f64) -> Result<Self> {
        let dom = Interval::new(-x0 / lambda, f64::INFINITY);
        Self::closed(PotentialKind::Log2, x0, lambda, dom)
    }

    pub fn odd_root(n: u32, x0: f64, lambda: f64) -> Result<Self> {
        Self::closed(PotentialKind::OddRoot { n }, x0, lambda, Interval::REAL)
    }

    pub fn arcsinh_sq(lambda: f64) -> Result<Self> {
        Self::closed(PotentialKind::ArcsinhSq, 0.0, lambda, Interval::REAL)
    }

    pub fn squeezed_power_law(n: u32, lambda: f64) -> Result<Self> {
        let dom = Interval::new(0.0, f64::INFINITY);
        Self::closed(PotentialKind::SqueezedPowerLaw { n }, 0.0, lambda, dom)
    }

    pub fn squeezed_sinh(x0: f64, lambda: f64) -> Result<Self> {
        let dom = Interval::new((-x0).asinh() / lambda, f64::INFINITY);
        Self::closed(PotentialKind::SqueezedSinh, x0, lambda, dom)
    }

    /// Arbitrary function on an explicit domain.
    pub fn custom<F>(f: F, domain: Interval) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: PotentialKind::Custom(Arc::new(f)),
            x0: 0.0,
            lambda: 1.0,
            shift: 0.0,
            domain,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift += shift;
        self
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, PotentialKind::Custom(_))
    }

    pub fn name(&self) -> String {
        format!("{:?}", self.kind)
    }

    /// Value without the domain check; NaN or infinite outside the domain.
    pub fn value(&self, t: f64) -> f64 {
        let l = self.lambda;
        let z = self.x0 + l * t;
        let base = match &self.kind {
            PotentialKind::Harmonic => 0.5 * t * t,
            PotentialKind::Squeezed => squeezed_bracket(z, l),
            PotentialKind::PowerLaw { n } => {
                let k = 2 * n + 1;
                let u = (l * t / f64::from(k)).powi(k as i32);
                let d = (u - self.x0) / l;
                0.5 * d * d
            }
            PotentialKind::Sinh2 => {
                let s = (l * t).sinh() / l;
                0.5 * s * s
            }
            PotentialKind::Log2 => {
                let s = z.ln() / l;
                0.5 * s * s
            }
            PotentialKind::OddRoot { n } => {
                let k = 2 * n + 1;
                let s = f64::from(k) / l * odd_root(z, k);
                0.5 * s * s
            }
            PotentialKind::ArcsinhSq => {
                let s = (l * t).asinh() / l;
                0.5 * s * s
            }
            PotentialKind::SqueezedPowerLaw { n } => {
                let k = 2 * n + 1;
                squeezed_bracket((l * t / f64::from(k)).powi(k as i32), l)
            }
            PotentialKind::SqueezedSinh => squeezed_bracket(self.x0 + (l * t).sinh(), l),
            PotentialKind::Custom(f) => f(t),
        };
        base + self.shift
    }

    /// `V(t)`; errors outside the open domain.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !self.domain.contains(t) {
            return Err(PdmError::Domain(format!(
                "{t} outside the domain {} of the {} potential",
                self.domain,
                self.name()
            )));
        }
        let v = self.value(t);
        if v.is_nan() {
            return Err(PdmError::Domain(format!("{} potential undefined at {t}", self.name())));
        }
        Ok(v)
    }

    /// Location and value of the global minimum.
    pub fn minimum(&self) -> (f64, f64) {
        let l = self.lambda;
        let floor = squeezed_floor(l);
        let (t, v) = match self.kind {
            PotentialKind::Harmonic | PotentialKind::Sinh2 | PotentialKind::ArcsinhSq => (0.0, 0.0),
            PotentialKind::Squeezed => ((1.0 - self.x0) / l, floor),
            PotentialKind::PowerLaw { n } => {
                let k = 2 * n + 1;
                (f64::from(k) * odd_root(self.x0, k) / l, 0.0)
            }
            PotentialKind::Log2 => ((1.0 - self.x0) / l, 0.0),
            PotentialKind::OddRoot { .. } => (-self.x0 / l, 0.0),
            PotentialKind::SqueezedPowerLaw { n } => (f64::from(2 * n + 1) / l, floor),
            PotentialKind::SqueezedSinh => ((1.0 - self.x0).asinh() / l, floor),
            PotentialKind::Custom(_) => return self.numeric_minimum(),
        };
        (t, v + self.shift)
    }

    fn numeric_minimum(&self) -> (f64, f64) {
        let lo = if self.domain.lo.is_finite() { self.domain.lo } else { -40.0 };
        let hi = if self.domain.hi.is_finite() { self.domain.hi } else { 40.0 };
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut best = (f64::NAN, f64::INFINITY);
        for i in 1..n {
            let t = lo + i as f64 * h;
            let v = self.value(t);
            if v < best.1 {
                best = (t, v);
            }
        }
        // golden-section refinement inside the bracketing cell pair
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (best.0 - h, best.0 + h);
        for _ in 0..200 {
            if b - a <= 1e-14 * (1.0 + best.0.abs()) {
                break;
            }
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.value(c) < self.value(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        let v = self.value(t);
        if v <= best.1 {
            (t, v)
        } else {
            best
        }
    }
}

/// Which representation a sample lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    X,
    Y,
}

/// A wavefunction sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSample {
    pub grid: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Option<Vec<f64>>,
    pub space: Space,
}

impl WaveSample {
    pub fn real(grid: Vec<f64>, re: Vec<f64>, space: Space) -> Result<Self> {
        Self::build(grid, re, None, space)
    }

    pub fn complex(grid: Vec<f64>, values: &[Complex64], space: Space) -> Result<Self> {
        let re = values.iter().map(|c| c.re).collect();
        let im = values.iter().map(|c| c.im).collect();
        Self::build(grid, re, Some(im), space)
    }

    fn build(grid: Vec<f64>, re: Vec<f64>, im: Option<Vec<f64>>, space: Space) -> Result<Self> {
        if grid.len() < 2 || grid.len() != re.len() || im.as_ref().is_some_and(|v| v.len() != re.len()) {
            return Err(PdmError::InvalidParameter(format!(
                "grid of {} points does not match {} values",
                grid.len(),
                re.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PdmError::InvalidParameter("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, re, im, space })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_complex(&self) -> bool {
        self.im.is_some()
    }

    pub fn at(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im.as_ref().map_or(0.0, |v| v[i]))
    }

    pub fn values(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.at(i)).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.at(i).norm_sqr()).collect()
    }

    /// Trapezoid `int |psi|^2` over the grid.
    pub fn norm_sq(&self) -> f64 {
        trapezoid(&self.grid, &self.density())
    }

    /// Uniform spacing if the grid is uniform to 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.len();
        let h = (self.grid[n - 1] - self.grid[0]) / (n - 1) as f64;
        let uniform = self
            .grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    /// Four-point Lagrange interpolation; zero outside the grid.
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let n = self.len();
        if !(t >= self.grid[0] && t <= self.grid[n - 1]) {
            return Complex64::new(0.0, 0.0);
        }
        if n < 4 {
            let i = self.grid.partition_point(|&g| g <= t).clamp(1, n - 1) - 1;
            let w = (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
            return self.at(i) * (1.0 - w) + self.at(i + 1) * w;
        }
        let i = self.grid.partition_point(|&g| g <= t).clamp(2, n - 2) - 2;
        let xs = &self.grid[i..i + 4];
        let mut out = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (t - xs[k]) / (xs[j] - xs[k]);
                }
            }
            out += self.at(i + j) * w;
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.re.iter_mut().for_each(|v| *v *= factor);
        if let Some(im) = out.im.as_mut() {
            im.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    /// CSV with header `grid,re` or `grid,re,im`.
    pub fn to_csv(&self) -> String {
        let axis = match self.space {
            Space::X => "x",
            Space::Y => "y",
        };
        let mut s = String::new();
        match &self.im {
            None => {
                let _ = writeln!(s, "{axis},re");
                for (g, r) in self.grid.iter().zip(&self.re) {
                    let _ = writeln!(s, "{},{}", fmt_sig(*g), fmt_sig(*r));
                }
            }
            Some(im) => {
                let _ = writeln!(s, "{axis},re,im");
                for ((g, r), i) in self.grid.iter().zip(&self.re).zip(im) {
                    let _ = writeln!(s, "{},{},{}", fmt_sig(*g), fmt_sig(*r), fmt_sig(*i));
                }
            }
        }
        s
    }
}

/// Nine significant digits in scientific notation; `-0` prints as `0`.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.8e}")
}

/// `V(y) - [(1/4 + a) m m'' - (7/16 + a(2 + a)) m'^2] / (2 m^3)`, with the
/// mass and its derivatives taken at `x = s^-1(y)`.
pub fn effective_potential(v: &PotentialSpec, family: &MassFamily, a: f64, y: f64) -> Result<f64> {
    let map = coordinate_map(family)?;
    effective_potential_with(v, &map, a, y)
}

/// [`effective_potential`] with a prebuilt map.
pub fn effective_potential_with(v: &PotentialSpec, map: &CoordinateMap, a: f64, y: f64) -> Result<f64> {
    let x = map.inverse(y);
    if x.is_nan() {
        return Err(PdmError::Domain(format!("y = {y} outside the mapped domain {}", map.y_domain)));
    }
    let corr = mass_correction(map.family(), a, x)?;
    Ok(v.evaluate(y)? - corr)
}

/// The y-space problem `V(s^-1(y)) - correction(y)` of an x-space potential
/// under ordering `a`, built by composition without closed-form tags.
///
/// For the odd-root families with `x0 != 0` the round trip through x loses
/// `x0 + lambda x` to cancellation near the pole, so `x0 = 0` is the
/// well-conditioned choice there.
pub fn effective_problem(v: &PotentialSpec, map: &CoordinateMap, a: f64) -> PotentialSpec {
    let inner = v.clone();
    let fam = *map.family();
    let m = map.clone();
    let corr = move |y: f64| mass_correction(&fam, a, m.inverse(y)).ok();
    let m = map.clone();
    PotentialSpec::custom(
        move |y| {
            let x = m.inverse(y);
            // at a mass pole use the mean of the neighbours
            let c = corr(y).unwrap_or_else(|| {
                let d = 1e-7 * (1.0 + y.abs());
                match (corr(y - d), corr(y + d)) {
                    (Some(l), Some(r)) => 0.5 * (l + r),
                    _ => f64::NAN,
                }
            });
            inner.value(x) - c
        },
        image(map, &v.domain),
    )
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs()))
}

/// Image of an x-interval under the map.
fn image(map: &CoordinateMap, dom: &Interval) -> Interval {
    let end = |x: f64, fallback: f64| {
        if x.is_finite() && map.x_domain.contains(x) {
            map.forward(x)
        } else {
            fallback
        }
    };
    Interval::new(end(dom.lo, map.y_domain.lo), end(dom.hi, map.y_domain.hi))
}

/// Preimage of a y-interval under the map.
fn preimage(map: &CoordinateMap, dom: &Interval) -> Interval {
    let end = |y: f64, fallback: f64| {
        if y.is_finite() && map.y_domain.contains(y) {
            map.inverse(y)
        } else {
            fallback
        }
    };
    Interval::new(end(dom.lo, map.x_domain.lo), end(dom.hi, map.x_domain.hi))
}

/// `V o s^-1`, the y-representation of an x-space potential.
///
/// The closed-form tag is kept when the pair is one of the cataloged ones and
/// the parameters agree; otherwise the result is `Custom`.
pub fn pushforward_potential(v: &PotentialSpec, map: &CoordinateMap) -> Result<PotentialSpec> {
    if !v.domain.is_subset_of(&map.x_domain) {
        return Err(PdmError::Domain(format!(
            "{} potential lives on {} but the map of {} only covers {}",
            v.name(),
            v.domain,
            map.family().name(),
            map.x_domain
        )));
    }
    let fam = map.family();
    let params = same(v.x0, fam.x0) && same(v.lambda, fam.lambda);
    let tagged = match (&v.kind, fam.kind) {
        (_, MassKind::Constant) if !v.is_custom() => Some(PotentialSpec { shift: 0.0, ..v.clone() }),
        (PotentialKind::Harmonic, MassKind::Regular) => Some(PotentialSpec::sinh2(fam.lambda)?),
        (PotentialKind::Harmonic, MassKind::SingularN { n }) => {
            Some(PotentialSpec::power_law(n, fam.x0, fam.lambda)?)
        }
        (PotentialKind::Squeezed, MassKind::Singular0) if params => {
            Some(PotentialSpec::sinh2(fam.lambda)?.with_shift(squeezed_floor(fam.lambda)))
        }
        (PotentialKind::Squeezed, MassKind::SingularN { n }) if params => {
            Some(PotentialSpec::squeezed_power_law(n, fam.lambda)?)
        }
        (PotentialKind::Squeezed, MassKind::Regular) if same(v.lambda, fam.lambda) => {
            Some(PotentialSpec::squeezed_sinh(v.x0, fam.lambda)?)
        }
        (PotentialKind::ArcsinhSq, MassKind::Regular)
        | (PotentialKind::Log2, MassKind::Singular0)
            if params =>
        {
            Some(PotentialSpec::harmonic())
        }
        (PotentialKind::OddRoot { n }, MassKind::SingularN { n: m }) if params && *n == m => {
            Some(PotentialSpec::harmonic())
        }
        _ => None,
    };
    let domain = image(map, &v.domain);
    if let Some(p) = tagged {
        return Ok(PotentialSpec {
            domain,
            ..p.with_shift(v.shift)
        });
    }
    let inner = v.clone();
    let m = map.clone();
    Ok(PotentialSpec::custom(move |y| inner.value(m.inverse(y)), domain))
}

/// `V o s`, the x-representation of a y-space potential.
pub fn pullback_potential(v: &PotentialSpec, map: &CoordinateMap) -> Result<PotentialSpec> {
    let fam = map.family();
    let domain = preimage(map, &v.domain);
    if matches!(v.kind, PotentialKind::Harmonic) {
        let p = match fam.kind {
            MassKind::Singular0 => Some(PotentialSpec::log2(fam.x0, fam.lambda)?),
            MassKind::SingularN { n } => Some(PotentialSpec::odd_root(n, fam.x0, fam.lambda)?),
            MassKind::Regular => Some(PotentialSpec::arcsinh_sq(fam.lambda)?),
            MassKind::Constant => Some(PotentialSpec::harmonic()),
            _ => None,
        };
        if let Some(p) = p {
            return Ok(PotentialSpec { domain, ..p.with_shift(v.shift) });
        }
    }
    let inner = v.clone();
    let m = map.clone();
    Ok(PotentialSpec::custom(move |x| inner.value(m.forward(x)), domain))
}

/// `psi(x) = J(x)^(1/2) phi(s(x))` sampled on the image of the y-grid.
pub fn pullback_wavefunction(phi: &WaveSample, map: &CoordinateMap) -> Result<WaveSample> {
    if phi.space != Space::Y {
        return Err(PdmError::InvalidParameter("pull-back needs a y-space sample".into()));
    }
    let mut grid = Vec::with_capacity(phi.len());
    let mut w = Vec::with_capacity(phi.len());
    for &y in &phi.grid {
        let x = map.inverse(y);
        if x.is_nan() {
            return Err(PdmError::Domain(format!("y = {y} outside {}", map.y_domain)));
        }
        grid.push(x);
        w.push(map.jacobian(x).sqrt());
    }
    let scale = |v: &[f64]| v.iter().zip(&w).map(|(a, b)| a * b).collect::<Vec<_>>();
    WaveSample::build(grid, scale(&phi.re), phi.im.as_deref().map(scale), Space::X)
}

/// `phi(y) = J(x)^(-1/2) psi(x)` on the grid `y = s(x)`.
pub fn pushforward_wavefunction(psi: &WaveSample, map: &CoordinateMap) -> Result<WaveSample> {
    if psi.space != Space::X {
        return Err(PdmError::InvalidParameter("push-forward needs an x-space sample".into()));
    }
    let mut grid = Vec::with_capacity(psi.len());
    let mut w = Vec::with_capacity(psi.len());
    for &x in &psi.grid {
        let y = map.forward(x);
        let j = map.jacobian(x);
        if y.is_nan() || !(j > 0.0 && j.is_finite()) {
            return Err(PdmError::Domain(format!("x = {x} cannot be mapped")));
        }
        grid.push(y);
        w.push(1.0 / j.sqrt());
    }
    let scale = |v: &[f64]| v.iter().zip(&w).map(|(a, b)| a * b).collect::<Vec<_>>();
    WaveSample::build(grid, scale(&psi.re), psi.im.as_deref().map(scale), Space::Y)
}

/// `int |psi|^2 dx` of the pull-back of a y-space sample, integrated in x.
///
/// The sample is interpolated in y and composed with `s`. Tanh-sinh runs on
/// x-panels. When the mass has a pole the integration variable is `x - t0`,
/// the pole is a panel end, and the panels touching it use `d = w v^8` to
/// flatten the integrable Jacobian singularity.
pub fn x_space_norm(phi: &WaveSample, map: &CoordinateMap) -> Result<f64> {
    if phi.space != Space::Y {
        return Err(PdmError::InvalidParameter("x-space norm needs a y-space sample".into()));
    }
    let (ya, yb) = (phi.grid[0], phi.grid[phi.len() - 1]);
    let panels = 128;
    let mut ys: Vec<f64> = (0..=panels)
        .map(|j| ya + (yb - ya) * j as f64 / panels as f64)
        .collect();
    let pole = map.pole_offset(0.0).is_some();
    if pole && ya < 0.0 && yb > 0.0 {
        ys.push(0.0);
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let dens = |y: f64| phi.interpolate(y).norm_sqr();
    let mut total = 0.0;
    for w in ys.windows(2) {
        if pole {
            let da = map.pole_offset(w[0]).unwrap_or(f64::NAN);
            let db = map.pole_offset(w[1]).unwrap_or(f64::NAN);
            let f = |d: f64| {
                let (y, j) = map.at_pole_offset(d).unwrap_or((f64::NAN, f64::NAN));
                j * dens(y)
            };
            total += if da == 0.0 || db == 0.0 {
                let edge = if da == 0.0 { db } else { da };
                let g = |v: f64| {
                    let v7 = v.powi(7);
                    8.0 * edge.abs() * v7 * f(edge * v7 * v)
                };
                tanh_sinh(g, 0.0, 1.0, 1e-11)?
            } else {
                tanh_sinh(f, da, db, 1e-11)?
            };
        } else {
            let (xa, xb) = (map.inverse(w[0]), map.inverse(w[1]));
            if xa.is_nan() || xb.is_nan() {
                return Err(PdmError::Domain(format!("panel [{}, {}] leaves the map", w[0], w[1])));
            }
            let f = |x: f64| map.jacobian(x) * dens(map.forward(x));
            total += tanh_sinh(f, xa, xb, 1e-11)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass_models::{allowed_ordering, central_derivatives};
    use approx::assert_relative_eq;

    fn gaussian_sample(n: usize, half: f64) -> WaveSample {
        let h = 2.0 * half / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| -half + i as f64 * h).collect();
        let c = std::f64::consts::PI.powf(-0.25);
        let re = grid.iter().map(|y| c * (-0.5 * y * y).exp()).collect();
        WaveSample::real(grid, re, Space::Y).unwrap()
    }

    #[test]
    fn effective_potential_examples() {
        let h = PotentialSpec::harmonic();
        let c = MassFamily::constant(1.0).unwrap();
        assert_relative_eq!(effective_potential(&h, &c, 0.3, 1.0).unwrap(), 0.5);
        for fam in [
            MassFamily::regular(1.0).unwrap(),
            MassFamily::singular0(1.0, 1.0).unwrap(),
            MassFamily::singular_n(2, 0.0, 1.0).unwrap(),
        ] {
            let v = effective_potential(&h, &fam, -0.25, 0.7).unwrap();
            assert_relative_eq!(v, 0.245, epsilon = 1e-12);
        }
        let s1 = MassFamily::singular_n(1, 0.0, 1.0).unwrap();
        let v = effective_potential(&h, &s1, allowed_ordering(1).a, 2.0).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-10);
        // off-ordering, the correction is visible
        let v = effective_potential(&h, &s1, 0.3, 2.0).unwrap();
        assert!((v - 2.0).abs() > 1e-3);
    }

    // Oracle: apply H_a = -1/2 m^a d/dx m^(2b) d/dx m^a to psi = J^(1/2) phi(s)
    // by nested differences and compare to J^(1/2)(-phi''/2 + U phi).
    #[test]
    fn effective_correction_matches_ordered_kinetic_operator() {
        let phi = |y: f64| (-0.3 * (y - 0.2) * (y - 0.2)).exp();
        let phi2 = |y: f64| {
            let d = y - 0.2;
            (0.36 * d * d - 0.6) * phi(y)
        };
        let zero = PotentialSpec::custom(|_| 0.0, Interval::REAL);
        let cases = [
            (MassFamily::regular(1.0).unwrap(), 0.1, 0.4),
            (MassFamily::singular0(1.0, 1.0).unwrap(), -0.6, 0.5),
            (MassFamily::singular_n(1, 0.0, 1.0).unwrap(), 0.2, 1.3),
            (MassFamily::rational_w(2.0).unwrap(), 0.05, -0.7),
        ];
        for (fam, a, x) in cases {
            let map = coordinate_map(&fam).unwrap();
            let b = -0.5 - a;
            let m = |t: f64| fam.mass_derivatives(t).unwrap().0;
            let psi = |t: f64| map.jacobian(t).sqrt() * phi(map.forward(t));
            let inner = |t: f64| m(t).powf(a) * psi(t);
            let flux = |t: f64| m(t).powf(2.0 * b) * central_derivatives(inner, t).0;
            let kin = -0.5 * m(x).powf(a) * central_derivatives(flux, x).0;
            let y = map.forward(x);
            let u = effective_potential_with(&zero, &map, a, y).unwrap();
            let expected = map.jacobian(x).sqrt() * (-0.5 * phi2(y) + u * phi(y));
            assert!(
                (kin - expected).abs() < 2e-5 * (1.0 + expected.abs()),
                "{}: {kin} vs {expected}",
                fam.name()
            );
        }
    }

    #[test]
    fn pushforward_examples() {
        let h = PotentialSpec::harmonic();
        let reg = coordinate_map(&MassFamily::regular(1.0).unwrap()).unwrap();
        let p = pushforward_potential(&h, &reg).unwrap();
        assert!(matches!(p.kind, PotentialKind::Sinh2));
        assert_relative_eq!(p.evaluate(1.0).unwrap(), 0.5 * 1f64.sinh().powi(2), epsilon = 1e-14);
        assert_relative_eq!(p.evaluate(1.0).unwrap(), 0.690548922770908, epsilon = 1e-12);

        let s1 = coordinate_map(&MassFamily::singular_n(1, 0.0, 1.0).unwrap()).unwrap();
        let p = pushforward_potential(&h, &s1).unwrap();
        assert!(matches!(p.kind, PotentialKind::PowerLaw { n: 1 }));
        assert_relative_eq!(p.evaluate(3.0).unwrap(), 0.5, epsilon = 1e-14);

        let sq = PotentialSpec::squeezed(1.0, 1.0).unwrap();
        let s0 = coordinate_map(&MassFamily::singular0(1.0, 1.0).unwrap()).unwrap();
        let p = pushforward_potential(&sq, &s0).unwrap();
        assert!(matches!(p.kind, PotentialKind::Sinh2));
        assert_relative_eq!(p.evaluate(0.0).unwrap(), (1.0 - SQRT_2) / 4.0, epsilon = 1e-15);
        assert_relative_eq!(p.evaluate(0.0).unwrap(), -0.103553, epsilon = 1e-6);

        let err = pushforward_potential(&h, &s0).unwrap_err();
        assert!(matches!(err, PdmError::Domain(_)));
    }

    #[test]
    fn tagged_pushforwards_agree_with_composition() {
        let pairs = [
            (PotentialSpec::harmonic(), MassFamily::regular(0.7).unwrap()),
            (PotentialSpec::harmonic(), MassFamily::singular_n(2, 0.4, 1.3).unwrap()),
            (PotentialSpec::squeezed(0.6, 1.5).unwrap(), MassFamily::singular0(0.6, 1.5).unwrap()),
            (PotentialSpec::squeezed(0.0, 1.0).unwrap(), MassFamily::singular_n(1, 0.0, 1.0).unwrap()),
            (PotentialSpec::squeezed(0.5, 1.0).unwrap(), MassFamily::regular(1.0).unwrap()),
            (PotentialSpec::arcsinh_sq(0.7).unwrap(), MassFamily::regular(0.7).unwrap()),
            (PotentialSpec::log2(2.0, 0.5).unwrap(), MassFamily::singular0(2.0, 0.5).unwrap()),
            (PotentialSpec::odd_root(3, 0.2, 1.0).unwrap(), MassFamily::singular_n(3, 0.2, 1.0).unwrap()),
        ];
        for (v, fam) in pairs {
            let map = coordinate_map(&fam).unwrap();
            let p = pushforward_potential(&v, &map).unwrap();
            assert!(!p.is_custom(), "{} / {}", v.name(), fam.name());
            for i in 0..40 {
                let x = v.domain.lo.max(-3.0) + 0.01 + 0.15 * i as f64;
                let y = map.forward(x);
                let direct = v.evaluate(x).unwrap();
                let got = p.evaluate(y).unwrap();
                assert!(
                    (got - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                    "{} / {} at x = {x}: {got} vs {direct}",
                    v.name(),
                    fam.name()
                );
            }
        }
    }

    #[test]
    fn mismatched_parameters_fall_back_to_custom() {
        let sq = PotentialSpec::squeezed(0.2, 1.0).unwrap();
        let map = coordinate_map(&MassFamily::singular0(0.5, 1.0).unwrap()).unwrap();
        let p = pushforward_potential(&sq, &map).unwrap();
        assert!(p.is_custom());
        let y = map.forward(1.0);
        assert_relative_eq!(p.evaluate(y).unwrap(), sq.evaluate(1.0).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn mdnt_and_mint_close_on_table_rows() {
        let h = PotentialSpec::harmonic();
        let mut rows = vec![(MassFamily::singular0(1.0, 1.0).unwrap(), allowed_ordering(0).a)];
        for n in 1..=4 {
            rows.push((MassFamily::singular_n(n, 0.0, 1.0).unwrap(), allowed_ordering(n as usize).a));
        }
        rows.push((MassFamily::regular(1.0).unwrap(), -0.25));
        rows.push((MassFamily::rational_w(3.0).unwrap(), -0.25));
        for (fam, a) in rows {
            let map = coordinate_map(&fam).unwrap();
            let yv = pushforward_potential(&h, &map);
            for i in 0..50 {
                let y = -2.3 + 0.1 * i as f64;
                if !map.y_domain.contains(y) || y.abs() < 1e-12 {
                    continue;
                }
                let eff = effective_potential_with(&h, &map, a, y).unwrap();
                let diff = eff - h.evaluate(y).unwrap();
                assert!(diff.abs() < 1e-8, "{} at {y}: {diff}", fam.name());
                if let Ok(p) = &yv {
                    assert!(p.evaluate(y).is_ok());
                }
            }
        }
    }

    #[test]
    fn pullback_examples() {
        let phi = gaussian_sample(801, 10.0);
        let c = coordinate_map(&MassFamily::constant(1.0).unwrap()).unwrap();
        let psi = pullback_wavefunction(&phi, &c).unwrap();
        assert_eq!(psi.re, phi.re);
        assert_eq!(psi.space, Space::X);

        let s0 = coordinate_map(&MassFamily::singular0(1.0, 1.0).unwrap()).unwrap();
        let psi = pullback_wavefunction(&phi, &s0).unwrap();
        let mid = phi.len() / 2;
        assert_relative_eq!(psi.grid[mid], 0.0, epsilon = 1e-15);
        assert_relative_eq!(psi.re[mid], phi.re[mid], epsilon = 1e-15);
    }

    #[test]
    fn pullback_preserves_norm_regular() {
        let phi = gaussian_sample(16001, 10.0);
        let reg = coordinate_map(&MassFamily::regular(1.0).unwrap()).unwrap();
        let psi = pullback_wavefunction(&phi, &reg).unwrap();
        assert!((psi.norm_sq() - 1.0).abs() < 1e-6, "{}", psi.norm_sq());
        assert!((x_space_norm(&phi, &reg).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn x_space_norm_across_mass_pole() {
        let phi = gaussian_sample(2001, 10.0);
        for fam in [
            MassFamily::singular_n(1, 0.0, 1.0).unwrap(),
            MassFamily::singular_n(3, 0.5, 2.0).unwrap(),
            MassFamily::singular0(1.0, 1.0).unwrap(),
            MassFamily::rational_w(0.5).unwrap(),
        ] {
            let map = coordinate_map(&fam).unwrap();
            let n = x_space_norm(&phi, &map).unwrap();
            assert!((n - 1.0).abs() < 1e-8, "{}: {n}", fam.name());
        }
    }

    #[test]
    fn pushforward_inverts_pullback() {
        let phi = gaussian_sample(201, 6.0);
        let map = coordinate_map(&MassFamily::regular(0.8).unwrap()).unwrap();
        let back = pushforward_wavefunction(&pullback_wavefunction(&phi, &map).unwrap(), &map).unwrap();
        for i in 0..phi.len() {
            assert_relative_eq!(back.grid[i], phi.grid[i], epsilon = 1e-12);
            assert_relative_eq!(back.re[i], phi.re[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn wave_sample_validation_and_csv() {
        assert!(WaveSample::real(vec![0.0, 0.0], vec![1.0, 1.0], Space::Y).is_err());
        assert!(WaveSample::real(vec![0.0, 1.0], vec![1.0], Space::Y).is_err());
        let w = WaveSample::complex(
            vec![0.0, 1.0],
            &[Complex64::new(1.0, 0.5), Complex64::new(0.0, -2.0)],
            Space::X,
        )
        .unwrap();
        assert_eq!(w.to_csv(), "x,re,im\n0,1.00000000e0,5.00000000e-1\n1.00000000e0,0,-2.00000000e0\n");
        assert_relative_eq!(w.norm_sq(), 0.5 * (1.25 + 4.0));
    }

    #[test]
    fn custom_potential_refuses_outside_domain() {
        let p = PotentialSpec::custom(|t| t.ln(), Interval::new(0.0, f64::INFINITY));
        assert!(p.evaluate(-1.0).is_err());
        assert!(p.evaluate(0.0).is_err());
        assert_relative_eq!(p.evaluate(1.0).unwrap(), 0.0);
    }

    #[test]
    fn minima() {
        let cases = [
            PotentialSpec::harmonic(),
            PotentialSpec::squeezed(0.3, 1.0).unwrap(),
            PotentialSpec::power_law(1, 0.5, 1.0).unwrap(),
            PotentialSpec::squeezed_sinh(0.2, 1.0).unwrap(),
            PotentialSpec::squeezed_power_law(2, 1.0).unwrap(),
        ];
        for p in cases {
            let (t, v) = p.minimum();
            assert_relative_eq!(p.value(t), v, epsilon = 1e-14);
            let custom = PotentialSpec::custom(
                {
                    let q = p.clone();
                    move |s| q.value(s)
                },
                p.domain,
            );
            let (tc, vc) = custom.minimum();
            assert!((vc - v).abs() < 1e-12, "{}: {vc} vs {v}", p.name());
            assert!((tc - t).abs() < 1e-5, "{}: {tc} vs {t}", p.name());
        }
    }
}
