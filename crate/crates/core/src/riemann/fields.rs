//! Tensor fields on a chart, evaluable through jets.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jets::{constants, dot, quad_form, Jet2};
use crate::linalg::jet_solve;

type VecFn = dyn Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync;
type ScalarFn = dyn Fn(&[Jet2]) -> Result<Jet2> + Send + Sync;

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// Riemannian metric coefficients `a_ij(x)`, row-major.
#[derive(Clone)]
pub struct MetricField {
    n: usize,
    f: Arc<VecFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricField(n = {})", self.n)
    }
}

impl MetricField {
    pub fn new(n: usize, f: impl Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync + 'static) -> Self {
        MetricField { n, f: Arc::new(f) }
    }

    pub fn euclidean(n: usize) -> Self {
        MetricField::new(n, move |_x| {
            Ok((0..n * n)
                .map(|k| Jet2::constant(if k % (n + 1) == 0 { 1.0 } else { 0.0 }))
                .collect())
        })
    }

    /// `e^{2σ(x)} δ_ij`.
    pub fn conformal(
        n: usize,
        sigma: impl Fn(&[Jet2]) -> Result<Jet2> + Send + Sync + 'static,
    ) -> Self {
        MetricField::new(n, move |x| {
            let factor = (sigma(x)? * 2.0).exp();
            Ok((0..n * n)
                .map(|k| {
                    if k % (n + 1) == 0 {
                        factor.clone()
                    } else {
                        Jet2::constant(0.0)
                    }
                })
                .collect())
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        check_len(self.n, x.len())?;
        let a = (self.f)(x)?;
        check_len(self.n * self.n, a.len())?;
        Ok(a)
    }

    pub fn at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let a = self.eval(&constants(x))?;
        Ok(DMatrix::from_row_iterator(
            self.n,
            self.n,
            a.iter().map(|j| j.value()),
        ))
    }

    /// `α² = a_ij yⁱ yʲ`.
    pub fn alpha_sq(&self, x: &[Jet2], y: &[Jet2]) -> Result<Jet2> {
        Ok(quad_form(&self.eval(x)?, y))
    }

    pub fn alpha(&self, x: &[Jet2], y: &[Jet2]) -> Result<Jet2> {
        self.alpha_sq(x, y)?.sqrt()
    }
}

/// A 1-form `β = b_i(x) yⁱ`.
#[derive(Clone)]
pub struct OneFormField {
    n: usize,
    f: Arc<VecFn>,
}

impl fmt::Debug for OneFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OneFormField(n = {})", self.n)
    }
}

impl OneFormField {
    pub fn new(n: usize, f: impl Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync + 'static) -> Self {
        OneFormField { n, f: Arc::new(f) }
    }

    pub fn zero(n: usize) -> Self {
        OneFormField::new(n, move |_| Ok(vec![Jet2::constant(0.0); n]))
    }

    /// `b_i = x_i`.
    pub fn position(n: usize) -> Self {
        OneFormField::new(n, |x| Ok(x.to_vec()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        check_len(self.n, x.len())?;
        let b = (self.f)(x)?;
        check_len(self.n, b.len())?;
        Ok(b)
    }

    pub fn at(&self, x: &[f64]) -> Result<DVector<f64>> {
        let b = self.eval(&constants(x))?;
        Ok(DVector::from_iterator(self.n, b.iter().map(|j| j.value())))
    }

    pub fn beta(&self, x: &[Jet2], y: &[Jet2]) -> Result<Jet2> {
        Ok(dot(&self.eval(x)?, y))
    }
}

/// A scalar function on the chart.
#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    f: Arc<ScalarFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(n = {})", self.n)
    }
}

impl ScalarField {
    pub fn new(n: usize, f: impl Fn(&[Jet2]) -> Result<Jet2> + Send + Sync + 'static) -> Self {
        ScalarField { n, f: Arc::new(f) }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ScalarField::new(n, move |_| Ok(Jet2::constant(c)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[Jet2]) -> Result<Jet2> {
        check_len(self.n, x.len())?;
        (self.f)(x)
    }

    pub fn at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(&constants(x))?.value())
    }
}

/// `b² = aⁱʲ b_i b_j` as a jet in `x`.
pub fn norm_sq_jet(g: &MetricField, beta: &OneFormField, x: &[Jet2]) -> Result<Jet2> {
    let a = g.eval(x)?;
    let b = beta.eval(x)?;
    let z = jet_solve(&a, &b)?;
    Ok(dot(&b, &z))
}

/// `b² = ‖β‖²_α` at a point.
pub fn norm_sq(g: &MetricField, beta: &OneFormField, x: &[f64]) -> Result<f64> {
    let a = g.at(x)?;
    let b = beta.at(x)?;
    let inv = crate::linalg::inverse(&a)?;
    Ok((b.transpose() * inv * &b)[(0, 0)].max(0.0))
}
