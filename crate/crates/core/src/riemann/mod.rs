//! Riemannian tensor calculus: Christoffel symbols, sprays, covariant
//! derivatives of 1-forms and the symmetric/antisymmetric decomposition with
//! all of its standard contractions.
//!
//! Index conventions: `b_{i|j} = ∂b_i/∂xʲ − Γᵏ_ij b_k`; indices are raised
//! with `aⁱʲ`; contracting with `bⁱ` removes an index and contracting with `yⁱ`
//! replaces it with `0`. In particular `r_i = r_ij bʲ`, `s_j = bⁱ s_ij`,
//! `r₀ = r_i yⁱ`, `s₀ = s_i yⁱ`, `r = r_i bⁱ`.

mod domain;
mod fields;

pub use domain::{rng_for, ChartDomain, SamplePair, MIN_MARGIN};
pub use fields::{norm_sq, norm_sq_jet, MetricField, OneFormField, ScalarField};

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::jets::{constants, EvalContext};
use crate::linalg::inverse;

/// `Γⁱ_jk` at a point, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    gamma: Vec<f64>,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
}

impl Christoffel {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.n + j) * self.n + k]
    }

    /// `½ Γⁱ_jk yʲ yᵏ`.
    pub fn spray(&self, y: &[f64]) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |i, _| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += self.get(i, j, k) * y[j] * y[k];
                }
            }
            0.5 * acc
        })
    }
}

/// Metric values and first derivatives `∂_k a_ij` at `x`.
fn metric_with_derivatives(g: &MetricField, x: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let n = g.n();
    let ctx = EvalContext::point_only(n);
    let (xs, _) = ctx.seed(x, &vec![0.0; n])?;
    let a = g.eval(&xs)?;
    let values = DMatrix::from_fn(n, n, |i, j| a[i * n + j].value());
    let derivs = (0..n)
        .map(|k| DMatrix::from_fn(n, n, |i, j| a[i * n + j].d(k)))
        .collect();
    Ok((values, derivs))
}

pub fn christoffel(g: &MetricField, x: &[f64]) -> Result<Christoffel> {
    let n = g.n();
    let (a, da) = metric_with_derivatives(g, x)?;
    let a_inv = inverse(&a)?;
    // Γ_ljk (first kind) = ½(∂_j a_lk + ∂_k a_lj − ∂_l a_jk)
    let mut first = vec![0.0; n * n * n];
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                first[(l * n + j) * n + k] =
                    0.5 * (da[j][(l, k)] + da[k][(l, j)] - da[l][(j, k)]);
            }
        }
    }
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                gamma[(i * n + j) * n + k] = (0..n)
                    .map(|l| a_inv[(i, l)] * first[(l * n + j) * n + k])
                    .sum();
            }
        }
    }
    Ok(Christoffel { n, gamma, a, a_inv })
}

/// `G^i_α = ½ Γⁱ_jk yʲ yᵏ`.
pub fn spray_riemann(g: &MetricField, x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    Ok(christoffel(g, x)?.spray(y))
}

/// Covariant derivative of a 1-form together with every contraction used by
/// the deformation formulas, evaluated at `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantData {
    pub n: usize,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    pub y: DVector<f64>,
    pub alpha2: f64,
    pub beta: f64,
    /// `b_i`
    pub b: DVector<f64>,
    /// `bⁱ`
    pub b_up: DVector<f64>,
    pub b2: f64,
    /// `b_{i|j}`
    pub bij: DMatrix<f64>,
    pub rij: DMatrix<f64>,
    pub sij: DMatrix<f64>,
    pub r00: f64,
    /// `r_i = r_ij bʲ`
    pub ri: DVector<f64>,
    pub r0: f64,
    pub r: f64,
    /// `rⁱ = aⁱʲ r_j`
    pub r_up: DVector<f64>,
    /// `s_i0 = s_ij yʲ`
    pub si0: DVector<f64>,
    /// `sⁱ₀ = aⁱʲ s_j0`
    pub s_up0: DVector<f64>,
    /// `s_j = bⁱ s_ij`
    pub si: DVector<f64>,
    /// `sⁱ = aⁱʲ s_j`
    pub s_up: DVector<f64>,
    pub s0: f64,
}

pub fn covariant_derivative(
    g: &MetricField,
    beta: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<CovariantData> {
    let n = g.n();
    let gamma = christoffel(g, x)?;
    let ctx = EvalContext::point_only(n);
    let (xs, _) = ctx.seed(x, y)?;
    let bj = beta.eval(&xs)?;
    let b = DVector::from_fn(n, |i, _| bj[i].value());
    let bij = DMatrix::from_fn(n, n, |i, j| {
        bj[i].d(j) - (0..n).map(|k| gamma.get(k, i, j) * b[k]).sum::<f64>()
    });
    Ok(CovariantData::assemble(gamma.a, gamma.a_inv, b, bij, y))
}

impl CovariantData {
    /// Builds all contractions from `a`, `a⁻¹`, `b_i`, `b_{i|j}` and `y`.
    pub fn assemble(
        a: DMatrix<f64>,
        a_inv: DMatrix<f64>,
        b: DVector<f64>,
        bij: DMatrix<f64>,
        y: &[f64],
    ) -> Self {
        let n = b.len();
        let y = DVector::from_column_slice(y);
        let b_up = &a_inv * &b;
        let b2 = b.dot(&b_up);
        let rij = (&bij + bij.transpose()) * 0.5;
        let sij = (&bij - bij.transpose()) * 0.5;
        let ri = &rij * &b_up;
        let si = sij.transpose() * &b_up;
        let si0 = &sij * &y;
        CovariantData {
            n,
            alpha2: y.dot(&(&a * &y)),
            beta: b.dot(&y),
            r00: y.dot(&(&rij * &y)),
            r0: ri.dot(&y),
            r: ri.dot(&b_up),
            r_up: &a_inv * &ri,
            s_up0: &a_inv * &si0,
            s_up: &a_inv * &si,
            s0: si.dot(&y),
            a,
            a_inv,
            y,
            b,
            b_up,
            b2,
            bij,
            rij,
            sij,
            ri,
            si0,
            si,
        }
    }
}

/// Covariant derivative at `x` only (no tangent vector needed).
pub fn covariant_bij(g: &MetricField, beta: &OneFormField, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = g.n();
    Ok(covariant_derivative(g, beta, x, &vec![0.0; n])?.bij)
}

/// Central-difference Christoffel symbols, used as an independent check on the
/// jet path.
pub fn christoffel_fd(g: &MetricField, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = g.n();
    let a = g.at(x)?;
    let a_inv = inverse(&a)?;
    let mut da = Vec::with_capacity(n);
    let mut xp = x.to_vec();
    for k in 0..n {
        xp[k] = x[k] + h;
        let ap = g.eval(&constants(&xp))?;
        xp[k] = x[k] - h;
        let am = g.eval(&constants(&xp))?;
        xp[k] = x[k];
        da.push(DMatrix::from_fn(n, n, |i, j| {
            (ap[i * n + j].value() - am[i * n + j].value()) / (2.0 * h)
        }));
    }
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                gamma[(i * n + j) * n + k] = (0..n)
                    .map(|l| {
                        a_inv[(i, l)] * 0.5 * (da[j][(l, k)] + da[k][(l, j)] - da[l][(j, k)])
                    })
                    .sum();
            }
        }
    }
    Ok(gamma)
}
