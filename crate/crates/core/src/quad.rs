//! One-dimensional quadrature.
//!
//! Two independent rules live here. [`adaptive_simpson`] is the reference
//! integrator used for reported reference values and as an oracle in tests.
//! [`smooth_integral`] is a fixed-node composite Gauss-Legendre rule whose
//! nodes scale with the interval, so its output is an analytic function of the
//! endpoints. That property is what lets quadrature-backed fields be probed by
//! central differences without adaptivity noise.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Adaptive Simpson tolerance used for reference values.
pub const SIMPSON_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson with Richardson correction and absolute tolerance `tol`.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = finite(f(a)?, a, b)?;
    let fb = finite(f(b)?, a, b)?;
    let m = 0.5 * (a + b);
    let fm = finite(f(m)?, a, b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let flm = finite(f(lm)?, a, b)?;
    let frm = finite(f(rm)?, a, b)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature { a, b });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

fn finite(v: f64, a: f64, b: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature { a, b })
    }
}

const GL_POINTS: usize = 20;
const GL_PANELS: usize = 12;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let n = points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// `∫_a^b f` by a fixed composite Gauss-Legendre rule (12 panels x 20 nodes).
pub fn smooth_integral(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (nodes, weights) = gl20();
    let h = (b - a) / GL_PANELS as f64;
    let mut total = 0.0;
    for p in 0..GL_PANELS {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + 0.5 * h * x)?;
        }
        total += 0.5 * h * acc;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Quadrature { a, b })
    }
}
