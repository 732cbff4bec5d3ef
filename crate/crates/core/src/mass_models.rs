//! Mass functions, their point transformations to constant-mass coordinates,
//! and the ordering parameters of the kinetic term.
//!
//! Units are `hbar = omega0 = 1`; lengths are measured in oscillator units so
//! that the default inverse length `lambda` is one.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::quadrature::adaptive_simpson;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// The mass families. `n`, `w`, `c` are the family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MassKind {
    /// `m0 / (x0 + lambda x)^2` on the half line `x > t0`.
    Singular0,
    /// `m0 / (x0 + lambda x)^(4n/(2n+1))`.
    SingularN { n: u32 },
    /// `m0 / (1 + (lambda x)^2)`.
    Regular,
    /// `m0 ((w + x^2) / (1 + x^2))^2`.
    RationalW { w: f64 },
    /// `c x^2`; its Jacobian vanishes at the origin.
    QuadraticC { c: f64 },
    Constant,
}

fn one() -> f64 {
    1.0
}

/// A mass function with its reference mass, offset and inverse length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassFamily {
    #[serde(flatten)]
    pub kind: MassKind,
    #[serde(default = "one")]
    pub m0: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "one")]
    pub lambda: f64,
}

impl MassFamily {
    pub fn new(kind: MassKind, m0: f64, x0: f64, lambda: f64) -> Result<Self> {
        let fam = Self {
            kind,
            m0,
            x0,
            lambda,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn singular0(x0: f64, lambda: f64) -> Result<Self> {
        Self::new(MassKind::Singular0, 1.0, x0, lambda)
    }

    pub fn singular_n(n: u32, x0: f64, lambda: f64) -> Result<Self> {
        Self::new(MassKind::SingularN { n }, 1.0, x0, lambda)
    }

    pub fn regular(lambda: f64) -> Result<Self> {
        Self::new(MassKind::Regular, 1.0, 0.0, lambda)
    }

    pub fn rational_w(w: f64) -> Result<Self> {
        Self::new(MassKind::RationalW { w }, 1.0, 0.0, 1.0)
    }

    pub fn quadratic_c(c: f64) -> Result<Self> {
        Self::new(MassKind::QuadraticC { c }, 1.0, 0.0, 1.0)
    }

    pub fn constant(m0: f64) -> Result<Self> {
        Self::new(MassKind::Constant, m0, 0.0, 1.0)
    }

    /// Checks parameter ranges. Deserialized families should be validated
    /// before use.
    pub fn validate(&self) -> Result<()> {
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(PdmError::InvalidParameter(format!("m0 must be positive, got {}", self.m0)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(PdmError::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !self.x0.is_finite() {
            return Err(PdmError::InvalidParameter("x0 must be finite".into()));
        }
        match self.kind {
            MassKind::SingularN { n: 0 } => Err(PdmError::InvalidParameter(
                "SingularN needs n >= 1; use Singular0 for n = 0".into(),
            )),
            MassKind::RationalW { w } if !(w > 0.0) => {
                Err(PdmError::InvalidParameter(format!("w must be positive, got {w}")))
            }
            MassKind::QuadraticC { c } if !(c > 0.0) => {
                Err(PdmError::InvalidParameter(format!("c must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            MassKind::Singular0 => "singular0".into(),
            MassKind::SingularN { n } => format!("singular_n(n={n})"),
            MassKind::Regular => "regular".into(),
            MassKind::RationalW { w } => format!("rational_w(w={w})"),
            MassKind::QuadraticC { c } => format!("quadratic_c(c={c})"),
            MassKind::Constant => "constant".into(),
        }
    }

    /// `t0 = -x0 / lambda`, the zero of `x0 + lambda x`.
    pub fn t0(&self) -> f64 {
        -self.x0 / self.lambda
    }

    fn u(&self, x: f64) -> f64 {
        self.x0 + self.lambda * x
    }

    /// Declared x-domain of the mass function.
    pub fn domain(&self) -> Interval {
        match self.kind {
            MassKind::Singular0 => Interval::new(self.t0(), f64::INFINITY),
            _ => Interval::REAL,
        }
    }

    /// Exponent `4n/(2n+1)` of the singular families, exact.
    pub fn singular_exponent(&self) -> Option<Ratio<i64>> {
        match self.kind {
            MassKind::Singular0 => Some(Ratio::from_integer(2)),
            MassKind::SingularN { n } => {
                let n = i64::from(n);
                Some(Ratio::new(4 * n, 2 * n + 1))
            }
            _ => None,
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() || !self.domain().contains(x) {
            return Err(PdmError::Domain(format!(
                "x = {x} outside the domain {} of {}",
                self.domain(),
                self.name()
            )));
        }
        match self.kind {
            MassKind::SingularN { .. } if self.u(x) == 0.0 => Err(PdmError::Domain(format!(
                "x = {x} is the pole of {}",
                self.name()
            ))),
            MassKind::QuadraticC { .. } if x == 0.0 => Err(PdmError::Domain(
                "quadratic mass vanishes at x = 0".into(),
            )),
            _ => Ok(()),
        }
    }

    /// `m(x)`, `m'(x)`, `m''(x)` in closed form.
    pub fn mass_derivatives(&self, x: f64) -> Result<(f64, f64, f64)> {
        self.check_domain(x)?;
        let m0 = self.m0;
        let l = self.lambda;
        Ok(match self.kind {
            MassKind::Singular0 | MassKind::SingularN { .. } => {
                let p = ratio_to_f64(self.singular_exponent().expect("singular family"));
                let u = self.u(x);
                let m = m0 * u.abs().powf(-p);
                (m, -p * l * m / u, p * (p + 1.0) * l * l * m / (u * u))
            }
            MassKind::Regular => {
                let q = 1.0 + l * l * x * x;
                (
                    m0 / q,
                    -2.0 * m0 * l * l * x / (q * q),
                    2.0 * m0 * l * l * (3.0 * l * l * x * x - 1.0) / (q * q * q),
                )
            }
            MassKind::RationalW { w } => {
                let q = 1.0 + x * x;
                let f = (w + x * x) / q;
                let f1 = 2.0 * x * (1.0 - w) / (q * q);
                let f2 = 2.0 * (1.0 - w) * (1.0 - 3.0 * x * x) / (q * q * q);
                (m0 * f * f, 2.0 * m0 * f * f1, 2.0 * m0 * (f1 * f1 + f * f2))
            }
            MassKind::QuadraticC { c } => (c * x * x, 2.0 * c * x, 2.0 * c),
            MassKind::Constant => (m0, 0.0, 0.0),
        })
    }

    /// Whether the Jacobian `sqrt(m/m0)` is free of zeros on the domain.
    pub fn is_mappable(&self) -> bool {
        !matches!(self.kind, MassKind::QuadraticC { .. })
    }

    /// The ordering parameter under which this family has no effective
    /// potential correction: `a_n` for the singular families, `-1/4` otherwise.
    pub fn natural_ordering(&self) -> OrderingParameter {
        match self.kind {
            MassKind::Singular0 => allowed_ordering(0),
            MassKind::SingularN { n } => allowed_ordering(n as usize),
            _ => OrderingParameter::MINT,
        }
    }
}

impl fmt::Display for MassFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [m0={}, x0={}, lambda={}]", self.name(), self.m0, self.x0, self.lambda)
    }
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `m(x)` for the family; errors outside the domain or at a pole.
pub fn mass_at(family: &MassFamily, x: f64) -> Result<f64> {
    family.mass_derivatives(x).map(|(m, _, _)| m)
}

/// Ordering parameter `a` of `1/2 m^a P m^(2b) P m^a`, with `2a + 2b = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingParameter {
    pub a: f64,
}

impl OrderingParameter {
    /// The mass-independent ordering `a = -1/4`.
    pub const MINT: OrderingParameter = OrderingParameter { a: -0.25 };

    pub fn new(a: f64) -> Self {
        Self { a }
    }

    pub fn b(&self) -> f64 {
        -0.5 - self.a
    }

    /// `a + 1/4`, the coefficient that controls every mass correction.
    pub fn shifted(&self) -> f64 {
        self.a + 0.25
    }
}

/// `a_0 = -1/4`, `a_n = (1 - n)/(4n)` for `n >= 1`.
pub fn allowed_ordering(n: usize) -> OrderingParameter {
    if n == 0 {
        OrderingParameter::new(-0.25)
    } else {
        let n = n as f64;
        OrderingParameter::new((1.0 - n) / (4.0 * n))
    }
}

/// `c1 m m'' + c2 (m')^2` with `c1 = 1/4 + a`, `c2 = -(7/16 + a(2 + a))`.
/// Vanishes exactly when the effective potential correction does.
pub fn mdnt_residual(family: &MassFamily, a: f64, x: f64) -> Result<f64> {
    let (m, m1, m2) = family.mass_derivatives(x)?;
    let c1 = 0.25 + a;
    let c2 = -(7.0 / 16.0 + a * (2.0 + a));
    Ok(c1 * m * m2 + c2 * m1 * m1)
}

/// `[(1/4 + a) m m'' - (7/16 + a(2 + a)) m'^2] / (2 m^3)`, the term the
/// point transformation subtracts from the potential.
///
/// For the power-law masses `m ~ u^-p` this is `K lambda^2 / (2 m u^2)` with a
/// constant `K`; `K` is set to zero when it vanishes to rounding, so the
/// correction stays exactly zero near the pole under the allowed orderings.
pub fn mass_correction(family: &MassFamily, a: f64, x: f64) -> Result<f64> {
    let (m, m1, m2) = family.mass_derivatives(x)?;
    let c1 = 0.25 + a;
    let c2 = 7.0 / 16.0 + a * (2.0 + a);
    if let Some(r) = family.singular_exponent() {
        let p = ratio_to_f64(r);
        let (t1, t2) = (c1 * p * (p + 1.0), c2 * p * p);
        let k = t1 - t2;
        if k.abs() <= 1e-14 * (t1.abs() + t2.abs()) {
            return Ok(0.0);
        }
        let u = family.u(x);
        return Ok(k * family.lambda * family.lambda / (2.0 * m * u * u));
    }
    Ok((c1 * m * m2 - c2 * m1 * m1) / (2.0 * m * m * m))
}

fn odd_root(u: f64, k: u32) -> f64 {
    u.signum() * u.abs().powf(1.0 / f64::from(k))
}

#[derive(Debug, Clone)]
enum MapKind {
    Identity,
    Log,
    OddRoot { n: u32 },
    Arcsinh,
    Numeric(Arc<NumericMap>),
}

/// Bijection `y = s(x)` with `s' = J = sqrt(m/m0)` and `s(0) = 0` (or
/// `s(t0) = 0` for the odd-root maps, `s(t0 + 1/lambda) = 0` for the log map).
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    family: MassFamily,
    kind: MapKind,
    pub x_domain: Interval,
    pub y_domain: Interval,
}

impl CoordinateMap {
    pub fn family(&self) -> &MassFamily {
        &self.family
    }

    /// Whether forward and inverse are closed-form.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self.kind, MapKind::Numeric(_))
    }

    /// `s(x)`. Returns NaN outside `x_domain`.
    pub fn forward(&self, x: f64) -> f64 {
        if !self.x_domain.contains(x) {
            return f64::NAN;
        }
        let f = &self.family;
        let u = f.x0 + f.lambda * x;
        match &self.kind {
            MapKind::Identity => x,
            MapKind::Log => u.ln() / f.lambda,
            MapKind::OddRoot { n } => {
                let k = 2 * n + 1;
                f64::from(k) / f.lambda * odd_root(u, k)
            }
            MapKind::Arcsinh => (f.lambda * x).asinh() / f.lambda,
            MapKind::Numeric(table) => table.forward(x),
        }
    }

    /// `s^-1(y)`. Returns NaN outside `y_domain`.
    pub fn inverse(&self, y: f64) -> f64 {
        if !self.y_domain.contains(y) {
            return f64::NAN;
        }
        let f = &self.family;
        match &self.kind {
            MapKind::Identity => y,
            MapKind::Log => ((f.lambda * y).exp() - f.x0) / f.lambda,
            MapKind::OddRoot { n } => {
                let k = 2 * n + 1;
                ((f.lambda * y / f64::from(k)).powi(k as i32) - f.x0) / f.lambda
            }
            MapKind::Arcsinh => (f.lambda * y).sinh() / f.lambda,
            MapKind::Numeric(table) => table.inverse(y),
        }
    }

    /// `J(x) = sqrt(m(x)/m0)`.
    pub fn jacobian(&self, x: f64) -> f64 {
        if !self.x_domain.contains(x) {
            return f64::NAN;
        }
        let f = &self.family;
        let u = f.x0 + f.lambda * x;
        match &self.kind {
            MapKind::Identity => 1.0,
            MapKind::Log => 1.0 / u,
            MapKind::OddRoot { n } => {
                let k = f64::from(2 * n + 1);
                u.abs().powf(-2.0 * f64::from(*n) / k)
            }
            MapKind::Arcsinh => 1.0 / (1.0 + f.lambda * f.lambda * x * x).sqrt(),
            MapKind::Numeric(table) => table.jacobian(x),
        }
    }

    /// `d = s^-1(y) - t0` for maps with a mass pole, computed without the
    /// cancellation of `x - t0`.
    pub fn pole_offset(&self, y: f64) -> Option<f64> {
        match self.kind {
            MapKind::OddRoot { n } => {
                let k = 2 * n + 1;
                let l = self.family.lambda;
                Some((l * y / f64::from(k)).powi(k as i32) / l)
            }
            _ => None,
        }
    }

    /// `(s, J)` at `x = t0 + d` for maps with a mass pole.
    pub fn at_pole_offset(&self, d: f64) -> Option<(f64, f64)> {
        match self.kind {
            MapKind::OddRoot { n } => {
                let k = 2 * n + 1;
                let l = self.family.lambda;
                let u = l * d;
                let s = f64::from(k) / l * odd_root(u, k);
                Some((s, u.abs().powf(-2.0 * f64::from(n) / f64::from(k))))
            }
            _ => None,
        }
    }

    /// Points in x where the Jacobian is singular (mass pole).
    pub fn singular_points(&self) -> Vec<f64> {
        match self.kind {
            MapKind::OddRoot { .. } => vec![self.family.t0()],
            _ => Vec::new(),
        }
    }
}

/// Forward map by quadrature of `sqrt(m/m0)` with a tabulated inverse.
#[derive(Debug)]
struct NumericMap {
    family: MassFamily,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

const NUMERIC_TABLE_HALF_WIDTH: f64 = 40.0;
const NUMERIC_TABLE_POINTS: usize = 2001;
const NUMERIC_TOL: f64 = 1e-12;

impl NumericMap {
    fn build(family: MassFamily) -> Result<Self> {
        let n = NUMERIC_TABLE_POINTS;
        let h = 2.0 * NUMERIC_TABLE_HALF_WIDTH / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| -NUMERIC_TABLE_HALF_WIDTH + i as f64 * h).collect();
        let mid = n / 2;
        let mut ys = vec![0.0; n];
        let jac = |x: f64| jacobian_of(&family, x);
        let seg_tol = NUMERIC_TOL / n as f64;
        for i in mid + 1..n {
            ys[i] = ys[i - 1] + adaptive_simpson(jac, xs[i - 1], xs[i], seg_tol)?;
        }
        for i in (0..mid).rev() {
            ys[i] = ys[i + 1] - adaptive_simpson(jac, xs[i], xs[i + 1], seg_tol)?;
        }
        Ok(Self { family, xs, ys })
    }

    fn jacobian(&self, x: f64) -> f64 {
        jacobian_of(&self.family, x)
    }

    fn forward(&self, x: f64) -> f64 {
        let jac = |t: f64| jacobian_of(&self.family, t);
        let n = self.xs.len();
        let (i, base) = if x <= self.xs[0] {
            (0, self.xs[0])
        } else if x >= self.xs[n - 1] {
            (n - 1, self.xs[n - 1])
        } else {
            let h = self.xs[1] - self.xs[0];
            let i = (((x - self.xs[0]) / h).round() as usize).min(n - 1);
            (i, self.xs[i])
        };
        let tail = if x >= base {
            adaptive_simpson(jac, base, x, NUMERIC_TOL)
        } else {
            adaptive_simpson(jac, x, base, NUMERIC_TOL).map(|v| -v)
        };
        self.ys[i] + tail.unwrap_or(f64::NAN)
    }

    fn inverse(&self, y: f64) -> f64 {
        let n = self.ys.len();
        let mut x = if y <= self.ys[0] {
            self.xs[0] + (y - self.ys[0]) / self.jacobian(self.xs[0])
        } else if y >= self.ys[n - 1] {
            self.xs[n - 1] + (y - self.ys[n - 1]) / self.jacobian(self.xs[n - 1])
        } else {
            let i = self.ys.partition_point(|&v| v <= y).clamp(1, n - 1) - 1;
            // cubic Hermite on (y, x) with exact slopes dx/dy = 1/J
            let (y0, y1) = (self.ys[i], self.ys[i + 1]);
            let (x0, x1) = (self.xs[i], self.xs[i + 1]);
            let d0 = 1.0 / self.jacobian(x0);
            let d1 = 1.0 / self.jacobian(x1);
            let h = y1 - y0;
            let t = (y - y0) / h;
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * x0
                + (t3 - 2.0 * t2 + t) * h * d0
                + (-2.0 * t3 + 3.0 * t2) * x1
                + (t3 - t2) * h * d1
        };
        // Newton polish; one step usually suffices, extrapolated starts may need more
        for _ in 0..4 {
            let dx = (self.forward(x) - y) / self.jacobian(x);
            x -= dx;
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }
}

fn jacobian_of(family: &MassFamily, x: f64) -> f64 {
    family
        .mass_derivatives(x)
        .map(|(m, _, _)| (m / family.m0).sqrt())
        .unwrap_or(f64::NAN)
}

/// Builds the coordinate map of a mappable family.
pub fn coordinate_map(family: &MassFamily) -> Result<CoordinateMap> {
    family.validate()?;
    let (kind, x_domain) = match family.kind {
        MassKind::Singular0 => (MapKind::Log, family.domain()),
        MassKind::SingularN { n } => (MapKind::OddRoot { n }, Interval::REAL),
        MassKind::Regular => (MapKind::Arcsinh, Interval::REAL),
        MassKind::Constant => (MapKind::Identity, Interval::REAL),
        MassKind::RationalW { .. } => (
            MapKind::Numeric(Arc::new(NumericMap::build(*family)?)),
            Interval::REAL,
        ),
        MassKind::QuadraticC { .. } => {
            return Err(PdmError::NonBijective(format!(
                "{} has J(0) = 0 on a domain containing the origin",
                family.name()
            )))
        }
    };
    Ok(CoordinateMap {
        family: *family,
        kind,
        x_domain,
        y_domain: Interval::REAL,
    })
}

/// Fourth-order central differences `(f', f'')` with step `1e-5 (1 + |x|)`.
#[cfg(test)]
pub(crate) fn central_derivatives<F: Fn(f64) -> f64>(f: F, x: f64) -> (f64, f64) {
    let h = 1e-5 * (1.0 + x.abs());
    let fm2 = f(x - 2.0 * h);
    let fm1 = f(x - h);
    let f0 = f(x);
    let fp1 = f(x + h);
    let fp2 = f(x + 2.0 * h);
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    (d1, d2)
}
