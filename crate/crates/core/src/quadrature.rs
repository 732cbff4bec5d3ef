//! Quadrature rules shared by the coordinate maps, the WKB quantizer and the
//! norm checks.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{PdmError, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            // Tricomi initial guess for the i-th root, counted from the right.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Returns a shared, cached rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

/// Adaptive Simpson quadrature with an absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = simpson_step(&f, a, b, fa, fm, fb, whole, abs_tol, 60, &mut ok);
    if ok && v.is_finite() {
        Ok(v)
    } else {
        Err(PdmError::Convergence(format!(
            "adaptive Simpson on [{a}, {b}] did not reach tolerance {abs_tol:e}"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        *ok = false;
        return left + right + delta / 15.0;
    }
    if delta.abs() <= 15.0 * tol || (m - a).abs() <= f64::EPSILON * m.abs() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}

/// Tanh-sinh (double exponential) quadrature on a finite interval.
///
/// Handles integrable endpoint singularities. Points that round onto an
/// endpoint are skipped.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    const T_MAX: f64 = 4.5;
    let term = |t: f64| -> (f64, f64) {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = half * 0.5 * PI * t.cosh() / (cu * cu);
        if w == 0.0 || !w.is_finite() {
            return (0.0, 0.0);
        }
        // distance to the nearer endpoint, computed without cancellation
        let delta = 2.0 * half / (1.0 + (2.0 * u.abs()).exp());
        let x = if t >= 0.0 { b - delta } else { a + delta };
        if x <= a.min(b) || x >= a.max(b) {
            return (0.0, 0.0);
        }
        let v = f(x);
        if v.is_finite() {
            (w * v, (w * v).abs())
        } else {
            (0.0, 0.0)
        }
    };
    let mut step = 1.0;
    let (mut sum, mut l1) = term(0.0);
    let accumulate = |t: f64, sum: &mut f64, l1: &mut f64| {
        let (p, pa) = term(t);
        let (q, qa) = term(-t);
        *sum += p + q;
        *l1 += pa + qa;
    };
    let mut j = 1;
    while (j as f64) * step <= T_MAX {
        accumulate(j as f64 * step, &mut sum, &mut l1);
        j += 1;
    }
    let mut estimate = sum * step;
    for _level in 0..12 {
        step *= 0.5;
        let mut j = 1;
        while (j as f64) * step <= T_MAX {
            accumulate(j as f64 * step, &mut sum, &mut l1);
            j += 2;
        }
        let next = sum * step;
        let diff = (next - estimate).abs();
        estimate = next;
        // relative to the L1 mass so that vanishing integrals still converge
        if diff <= rel_tol * (l1 * step).max(1e-300) {
            return Ok(estimate);
        }
    }
    Err(PdmError::Convergence(format!(
        "tanh-sinh on [{a}, {b}] did not converge to {rel_tol:e}"
    )))
}

/// Trapezoid rule on an arbitrary (strictly increasing) grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Composite Simpson rule on a uniform grid with an odd number of points.
/// Falls back to the trapezoid rule on the last interval when the count is even.
pub fn simpson_uniform(h: f64, values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return if n == 2 { 0.5 * h * (values[0] + values[1]) } else { 0.0 };
    }
    let odd_len = if n % 2 == 1 { n } else { n - 1 };
    let mut s = values[0] + values[odd_len - 1];
    for (i, v) in values.iter().enumerate().take(odd_len - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if odd_len != n {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}
