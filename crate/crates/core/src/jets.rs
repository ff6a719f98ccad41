//! Second-order forward-mode differentiation.
//!
//! A [`Jet2`] carries a value together with its gradient and (dense, symmetric)
//! Hessian with respect to `m` independent variables. Every primitive propagates
//! all three by the second-order chain rule, so a scalar field of the point `x`
//! and the tangent vector `y` built from these primitives yields its exact first
//! and second partials in one evaluation.
//!
//! Constants are jets with `m = 0`; they broadcast against jets of any width.

use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    /// Row-major `m x m`.
    hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// Independent variable number `slot` out of `m`.
    pub fn variable(value: f64, slot: usize, m: usize) -> Self {
        assert!(slot < m, "slot {slot} out of range for m = {m}");
        let mut grad = vec![0.0; m];
        grad[slot] = 1.0;
        Jet2 {
            value,
            grad,
            hess: vec![0.0; m * m],
        }
    }

    pub fn from_parts(value: f64, grad: Vec<f64>, hess: Vec<f64>) -> Self {
        assert_eq!(hess.len(), grad.len() * grad.len());
        Jet2 { value, grad, hess }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_constant(&self) -> bool {
        self.grad.is_empty()
    }

    /// First partial with respect to variable `i` (zero for constants).
    #[inline]
    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    /// Second partial with respect to variables `i` and `j`.
    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> f64 {
        let m = self.m();
        if m == 0 {
            0.0
        } else {
            self.hess[i * m + j]
        }
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self) -> &[f64] {
        &self.hess
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    /// Applies a univariate function given its value and first two derivatives
    /// at `self.value()`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let m = self.m();
        let grad: Vec<f64> = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                hess[i * m + j] = f1 * self.hess[i * m + j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }

    fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    fn shift(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value + c,
            grad: self.grad.clone(),
            hess: self.hess.clone(),
        }
    }

    fn combine(a: &Jet2, b: &Jet2, sa: f64, sb: f64) -> Jet2 {
        match (a.m(), b.m()) {
            (0, 0) => Jet2::constant(sa * a.value + sb * b.value),
            (0, _) => b.scale(sb).shift(sa * a.value),
            (_, 0) => a.scale(sa).shift(sb * b.value),
            (ma, mb) => {
                assert_eq!(ma, mb, "jet width mismatch");
                Jet2 {
                    value: sa * a.value + sb * b.value,
                    grad: a.grad.iter().zip(&b.grad).map(|(x, y)| sa * x + sb * y).collect(),
                    hess: a.hess.iter().zip(&b.hess).map(|(x, y)| sa * x + sb * y).collect(),
                }
            }
        }
    }

    fn product(a: &Jet2, b: &Jet2) -> Jet2 {
        match (a.m(), b.m()) {
            (0, 0) => Jet2::constant(a.value * b.value),
            (0, _) => b.scale(a.value),
            (_, 0) => a.scale(b.value),
            (m, mb) => {
                assert_eq!(m, mb, "jet width mismatch");
                let grad = (0..m).map(|i| a.value * b.grad[i] + b.value * a.grad[i]).collect();
                let mut hess = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        let k = i * m + j;
                        hess[k] = a.value * b.hess[k]
                            + b.value * a.hess[k]
                            + (a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j]);
                    }
                }
                Jet2 {
                    value: a.value * b.value,
                    grad,
                    hess,
                }
            }
        }
    }

    pub fn square(&self) -> Jet2 {
        Jet2::product(self, self)
    }

    pub fn recip(&self) -> Result<Jet2> {
        let v = self.value;
        if v == 0.0 {
            return Err(domain("recip", v));
        }
        Ok(self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }

    pub fn sqrt(&self) -> Result<Jet2> {
        let v = self.value;
        if v < 0.0 || (v == 0.0 && !self.is_constant()) || v.is_nan() {
            return Err(domain("sqrt", v));
        }
        let r = v.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (r * v)))
    }

    /// Real power `x^p` for `x > 0` (any sign when `p` is an integer).
    pub fn powf(&self, p: f64) -> Result<Jet2> {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            return self.powi(p as i32);
        }
        let v = self.value;
        if v <= 0.0 || v.is_nan() {
            return Err(domain("pow", v));
        }
        let f0 = v.powf(p);
        Ok(self.chain(f0, p * f0 / v, p * (p - 1.0) * f0 / (v * v)))
    }

    pub fn powi(&self, p: i32) -> Result<Jet2> {
        let v = self.value;
        if p < 0 && v == 0.0 {
            return Err(domain("pow", v));
        }
        let pf = p as f64;
        let f0 = v.powi(p);
        let f1 = if p == 0 { 0.0 } else { pf * v.powi(p - 1) };
        let f2 = if p == 0 || p == 1 {
            0.0
        } else {
            pf * (pf - 1.0) * v.powi(p - 2)
        };
        Ok(self.chain(f0, f1, f2))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Jet2> {
        let v = self.value;
        if v <= 0.0 || v.is_nan() {
            return Err(domain("ln", v));
        }
        Ok(self.chain(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn atan(&self) -> Jet2 {
        let v = self.value;
        let q = 1.0 + v * v;
        self.chain(v.atan(), 1.0 / q, -2.0 * v / (q * q))
    }

    pub fn asin(&self) -> Result<Jet2> {
        let v = self.value;
        if v.abs() >= 1.0 || v.is_nan() {
            return Err(domain("asin", v));
        }
        let q = 1.0 - v * v;
        let r = q.sqrt();
        Ok(self.chain(v.asin(), 1.0 / r, v / (q * r)))
    }

    pub fn asinh(&self) -> Jet2 {
        let v = self.value;
        let q = 1.0 + v * v;
        let r = q.sqrt();
        self.chain(v.asinh(), 1.0 / r, -v / (q * r))
    }

    pub fn atanh(&self) -> Result<Jet2> {
        let v = self.value;
        if v.abs() >= 1.0 || v.is_nan() {
            return Err(domain("atanh", v));
        }
        let q = 1.0 - v * v;
        Ok(self.chain(v.atanh(), 1.0 / q, 2.0 * v / (q * q)))
    }
}

fn domain(op: &'static str, arg: f64) -> Error {
    Error::Domain {
        op,
        arg,
        tag: None,
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                let f: fn(&Jet2, &Jet2) -> Jet2 = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                (&self).$method(rhs)
            }
        }
        impl $tr<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                self.$method(&rhs)
            }
        }
        impl $tr<f64> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                self.$method(&Jet2::constant(rhs))
            }
        }
        impl $tr<f64> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                (&self).$method(&Jet2::constant(rhs))
            }
        }
        impl $tr<&Jet2> for f64 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                (&Jet2::constant(self)).$method(rhs)
            }
        }
        impl $tr<Jet2> for f64 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                (&Jet2::constant(self)).$method(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, |a, b| Jet2::combine(a, b, 1.0, 1.0));
impl_binop!(Sub, sub, |a, b| Jet2::combine(a, b, 1.0, -1.0));
impl_binop!(Mul, mul, Jet2::product);
// Division by a zero-valued jet yields non-finite entries; callers that need a
// hard error use `recip`.
impl_binop!(Div, div, |a, b| {
    let v = b.value;
    let r = b.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    Jet2::product(a, &r)
});

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Sum for Jet2 {
    fn sum<I: Iterator<Item = Jet2>>(iter: I) -> Jet2 {
        iter.fold(Jet2::constant(0.0), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Jet2> for Jet2 {
    fn sum<I: Iterator<Item = &'a Jet2>>(iter: I) -> Jet2 {
        iter.fold(Jet2::constant(0.0), |acc, x| acc + x)
    }
}

/// `Σ u_i v_i` over two jet slices.
pub fn dot(u: &[Jet2], v: &[Jet2]) -> Jet2 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Quadratic form `yᵀ A y` with `A` row-major `n x n`.
pub fn quad_form(a: &[Jet2], y: &[Jet2]) -> Jet2 {
    let n = y.len();
    let mut acc = Jet2::constant(0.0);
    for i in 0..n {
        for j in 0..n {
            acc = acc + &a[i * n + j] * &(&y[i] * &y[j]);
        }
    }
    acc
}

pub fn constants(v: &[f64]) -> Vec<Jet2> {
    v.iter().map(|&x| Jet2::constant(x)).collect()
}

/// Which of the `2n` input slots `(x¹..xⁿ, y¹..yⁿ)` are independent variables,
/// and in which jet slot each lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalContext {
    n: usize,
    slots: Vec<Option<usize>>,
    m: usize,
}

impl EvalContext {
    /// All `2n` inputs seeded, `x` first then `y`.
    pub fn full(n: usize) -> Self {
        Self::with_slots(n, (0..2 * n).map(Some).collect())
    }

    /// Only the point coordinates are independent (`m = n`).
    pub fn point_only(n: usize) -> Self {
        let mut slots: Vec<Option<usize>> = (0..n).map(Some).collect();
        slots.extend(std::iter::repeat_n(None, n));
        Self::with_slots(n, slots)
    }

    /// All `2n` inputs seeded, in the order given by `order` (a permutation of
    /// `0..2n`; `order[k]` is the input placed in jet slot `k`).
    pub fn permuted(n: usize, order: &[usize]) -> Self {
        assert_eq!(order.len(), 2 * n);
        let mut slots = vec![None; 2 * n];
        for (k, &input) in order.iter().enumerate() {
            assert!(slots[input].is_none(), "order is not a permutation");
            slots[input] = Some(k);
        }
        Self::with_slots(n, slots)
    }

    fn with_slots(n: usize, slots: Vec<Option<usize>>) -> Self {
        let m = slots.iter().filter(|s| s.is_some()).count();
        EvalContext { n, slots, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Jet slot holding input `input` (`0..n` for x, `n..2n` for y).
    pub fn slot(&self, input: usize) -> Option<usize> {
        self.slots[input]
    }

    /// One-hot seeding of `(x, y)`.
    pub fn seed(&self, x: &[f64], y: &[f64]) -> Result<(Vec<Jet2>, Vec<Jet2>)> {
        check_dims(self.n, x, y)?;
        let make = |v: f64, input: usize| match self.slots[input] {
            Some(k) => Jet2::variable(v, k, self.m),
            None => Jet2::constant(v),
        };
        let xs = x.iter().enumerate().map(|(i, &v)| make(v, i)).collect();
        let ys = y
            .iter()
            .enumerate()
            .map(|(i, &v)| make(v, self.n + i))
            .collect();
        Ok((xs, ys))
    }
}

fn check_dims(n: usize, x: &[f64], y: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: y.len(),
        });
    }
    if let Some(slot) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { slot });
    }
    Ok(())
}

/// Seeds all `2n` inputs as independent variables.
pub fn seed(x: &[f64], y: &[f64]) -> Result<(Vec<Jet2>, Vec<Jet2>)> {
    EvalContext::full(x.len()).seed(x, y)
}

/// A scalar field of a point and a tangent vector.
pub trait PhaseField: Fn(&[Jet2], &[Jet2]) -> Result<Jet2> {}
impl<T: Fn(&[Jet2], &[Jet2]) -> Result<Jet2>> PhaseField for T {}

/// Value and all first and second partials of a scalar field at `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partials {
    pub value: f64,
    pub fx: DVector<f64>,
    pub fy: DVector<f64>,
    pub fxx: DMatrix<f64>,
    /// `fxy[(k, l)] = ∂²f / ∂xᵏ ∂yˡ`.
    pub fxy: DMatrix<f64>,
    pub fyy: DMatrix<f64>,
}

impl Partials {
    fn zeros(n: usize, value: f64) -> Self {
        Partials {
            value,
            fx: DVector::zeros(n),
            fy: DVector::zeros(n),
            fxx: DMatrix::zeros(n, n),
            fxy: DMatrix::zeros(n, n),
            fyy: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.fx.len()
    }

    /// `a·self + b·other`, componentwise.
    pub fn combine(&self, a: f64, other: &Partials, b: f64) -> Partials {
        Partials {
            value: a * self.value + b * other.value,
            fx: &self.fx * a + &other.fx * b,
            fy: &self.fy * a + &other.fy * b,
            fxx: &self.fxx * a + &other.fxx * b,
            fxy: &self.fxy * a + &other.fxy * b,
            fyy: &self.fyy * a + &other.fyy * b,
        }
    }

    /// Largest blockwise deviation, each block divided by
    /// `max(‖self block‖∞, ‖other block‖∞, 1)`.
    pub fn max_rel_deviation(&self, other: &Partials) -> f64 {
        fn block(a: &[f64], b: &[f64]) -> f64 {
            let scale = a
                .iter()
                .chain(b)
                .fold(1.0_f64, |acc, v| acc.max(v.abs()));
            let diff = a
                .iter()
                .zip(b)
                .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
            diff / scale
        }
        [
            block(&[self.value], &[other.value]),
            block(self.fx.as_slice(), other.fx.as_slice()),
            block(self.fy.as_slice(), other.fy.as_slice()),
            block(self.fxx.as_slice(), other.fxx.as_slice()),
            block(self.fxy.as_slice(), other.fxy.as_slice()),
            block(self.fyy.as_slice(), other.fyy.as_slice()),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates `field` on jets seeded by `ctx`.
pub fn eval_with<F: PhaseField + ?Sized>(
    ctx: &EvalContext,
    field: &F,
    x: &[f64],
    y: &[f64],
) -> Result<Jet2> {
    let (xs, ys) = ctx.seed(x, y)?;
    let out = field(&xs, &ys)?;
    if !out.is_finite() {
        return Err(Error::Domain {
            op: "result",
            arg: out.value(),
            tag: Some("non-finite derivative".into()),
        });
    }
    Ok(out)
}

/// All partials of `field` at `(x, y)` from a single jet evaluation.
pub fn eval_field<F: PhaseField + ?Sized>(field: &F, x: &[f64], y: &[f64]) -> Result<Partials> {
    let n = x.len();
    let ctx = EvalContext::full(n);
    let j = eval_with(&ctx, field, x, y)?;
    let mut p = Partials::zeros(n, j.value());
    for k in 0..n {
        p.fx[k] = j.d(k);
        p.fy[k] = j.d(n + k);
        for l in 0..n {
            p.fxx[(k, l)] = j.dd(k, l);
            p.fxy[(k, l)] = j.dd(k, n + l);
            p.fyy[(k, l)] = j.dd(n + k, n + l);
        }
    }
    Ok(p)
}

/// Plain `f64` evaluation (jets of width zero).
pub fn eval_value<F: PhaseField + ?Sized>(field: &F, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x.len(), x, y)?;
    let out = field(&constants(x), &constants(y))?;
    Ok(out.value())
}

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Central-difference estimate of every partial returned by [`eval_field`].
pub fn fd_oracle<F: PhaseField + ?Sized>(
    field: &F,
    x: &[f64],
    y: &[f64],
    h: f64,
) -> Result<Partials> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let n = x.len();
    check_dims(n, x, y)?;
    let mut z: Vec<f64> = x.iter().chain(y).copied().collect();
    let f = |z: &[f64]| eval_value(field, &z[..n], &z[n..]);

    let f0 = f(&z)?;
    let mut p = Partials::zeros(n, f0);
    let mut first = vec![0.0; 2 * n];
    let mut second = DMatrix::<f64>::zeros(2 * n, 2 * n);

    for i in 0..2 * n {
        let zi = z[i];
        z[i] = zi + h;
        let fp = f(&z)?;
        z[i] = zi - h;
        let fm = f(&z)?;
        z[i] = zi;
        first[i] = (fp - fm) / (2.0 * h);
        second[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for i in 0..2 * n {
        for j in (i + 1)..2 * n {
            let (zi, zj) = (z[i], z[j]);
            let at = |di: f64, dj: f64, z: &mut Vec<f64>| {
                z[i] = zi + di;
                z[j] = zj + dj;
                let v = f(z);
                z[i] = zi;
                z[j] = zj;
                v
            };
            let fpp = at(h, h, &mut z)?;
            let fpm = at(h, -h, &mut z)?;
            let fmp = at(-h, h, &mut z)?;
            let fmm = at(-h, -h, &mut z)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            second[(i, j)] = v;
            second[(j, i)] = v;
        }
    }
    for k in 0..n {
        p.fx[k] = first[k];
        p.fy[k] = first[n + k];
        for l in 0..n {
            p.fxx[(k, l)] = second[(k, l)];
            p.fxy[(k, l)] = second[(k, n + l)];
            p.fyy[(k, l)] = second[(n + k, n + l)];
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn seeding_is_one_hot() {
        let (xs, ys) = seed(&[0.0], &[1.0]).unwrap();
        assert_eq!(xs[0].value(), 0.0);
        assert_eq!(xs[0].grad(), &[1.0, 0.0]);
        assert!(xs[0].hess().iter().all(|&h| h == 0.0));
        assert_eq!(ys[0].grad(), &[0.0, 1.0]);
    }

    #[test]
    fn square_and_exp() {
        let t = Jet2::variable(3.0, 0, 1);
        let sq = t.square();
        assert_eq!((sq.value(), sq.d(0), sq.dd(0, 0)), (9.0, 6.0, 2.0));
        let e = Jet2::variable(0.0, 0, 1).exp();
        assert_eq!((e.value(), e.d(0), e.dd(0, 0)), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rejects_non_finite_input() {
        assert_eq!(
            seed(&[f64::NAN], &[1.0]).unwrap_err(),
            Error::NonFinite { slot: 0 }
        );
    }

    #[test]
    fn primitive_derivatives_match_closed_forms() {
        let v = 0.3;
        let t = Jet2::variable(v, 0, 1);
        let cases: Vec<(Jet2, f64, f64, f64)> = vec![
            (t.sqrt().unwrap(), v.sqrt(), 0.5 / v.sqrt(), -0.25 * v.powf(-1.5)),
            (t.ln().unwrap(), v.ln(), 1.0 / v, -1.0 / (v * v)),
            (
                t.powf(2.5).unwrap(),
                v.powf(2.5),
                2.5 * v.powf(1.5),
                3.75 * v.powf(0.5),
            ),
            (t.atan(), v.atan(), 1.0 / (1.0 + v * v), -2.0 * v / (1.0 + v * v).powi(2)),
            (
                t.asin().unwrap(),
                v.asin(),
                (1.0 - v * v).powf(-0.5),
                v * (1.0 - v * v).powf(-1.5),
            ),
            (
                t.asinh(),
                v.asinh(),
                (1.0 + v * v).powf(-0.5),
                -v * (1.0 + v * v).powf(-1.5),
            ),
            (
                t.atanh().unwrap(),
                v.atanh(),
                1.0 / (1.0 - v * v),
                2.0 * v / (1.0 - v * v).powi(2),
            ),
            (t.recip().unwrap(), 1.0 / v, -1.0 / (v * v), 2.0 / v.powi(3)),
        ];
        for (j, f0, f1, f2) in cases {
            assert!(close(j.value(), f0, 1e-14), "{j:?}");
            assert!(close(j.d(0), f1, 1e-13), "{j:?}");
            assert!(close(j.dd(0, 0), f2, 1e-12), "{j:?}");
        }
    }

    #[test]
    fn domain_violations_are_errors() {
        let neg = Jet2::variable(-1.0, 0, 1);
        assert!(matches!(neg.sqrt(), Err(Error::Domain { op: "sqrt", .. })));
        assert!(matches!(neg.ln(), Err(Error::Domain { op: "ln", .. })));
        assert!(matches!(neg.powf(0.5), Err(Error::Domain { op: "pow", .. })));
        assert!(neg.powf(3.0).is_ok());
        assert!(Jet2::variable(1.0, 0, 1).asin().is_err());
        assert!(Jet2::variable(-1.0, 0, 1).atanh().is_err());
        assert!(Jet2::variable(0.0, 0, 1).recip().is_err());
    }

    #[test]
    fn domain_error_carries_tag() {
        use crate::error::Tag;
        let field = |_x: &[Jet2], y: &[Jet2]| (&y[0] - 2.0).sqrt().tag("shifted radicand");
        match eval_field(&field, &[0.0], &[1.0]) {
            Err(Error::Domain { op, tag, .. }) => {
                assert_eq!(op, "sqrt");
                assert_eq!(tag.as_deref(), Some("shifted radicand"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_x_dependence_gives_zero_x_partials() {
        let field = |_x: &[Jet2], y: &[Jet2]| Ok(dot(y, y));
        let p = eval_field(&field, &[0.4, -0.2, 0.1], &[1.0, 2.0, -0.5]).unwrap();
        assert!(p.fx.iter().all(|&v| v == 0.0));
        assert!(p.fxy.iter().all(|&v| v == 0.0));
        assert_eq!(p.fyy, DMatrix::identity(3, 3) * 2.0);
    }

    #[test]
    fn inner_product_mixed_partial_is_identity() {
        let field = |x: &[Jet2], y: &[Jet2]| Ok(dot(x, y));
        let p = eval_field(&field, &[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(p.fxy, DMatrix::identity(2, 2));
    }

    #[test]
    fn fd_gradient_of_norm_at_unit_vector() {
        let field = |_x: &[Jet2], y: &[Jet2]| dot(y, y).sqrt();
        let p = fd_oracle(&field, &[0.0; 3], &[1.0, 0.0, 0.0], FD_STEP).unwrap();
        for (k, expected) in [1.0, 0.0, 0.0].into_iter().enumerate() {
            assert!((p.fy[k] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn fd_matches_jets_on_polynomial() {
        let field = |x: &[Jet2], y: &[Jet2]| {
            Ok(&x[0] * &x[0] * &y[1] + &x[1] * &y[0] * &y[0] * 3.0 - &x[0] * &x[1])
        };
        let (x, y) = ([0.3, -0.7], [1.1, 0.4]);
        let jet = eval_field(&field, &x, &y).unwrap();
        let fd = fd_oracle(&field, &x, &y, 1e-4).unwrap();
        assert!(jet.max_rel_deviation(&fd) < 1e-6);
    }

    #[test]
    fn fd_rejects_bad_step() {
        let field = |_x: &[Jet2], y: &[Jet2]| Ok(y[0].clone());
        assert!(fd_oracle(&field, &[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn permuted_seeding_gives_same_mixed_partials() {
        let field = |x: &[Jet2], y: &[Jet2]| {
            let r = (dot(x, x) * 0.5 + 1.0).sqrt()?;
            Ok(&r * &dot(x, y) + y[0].square() * x[1].exp())
        };
        let (x, y) = ([0.2, -0.1], [0.7, 1.3]);
        let a = eval_with(&EvalContext::full(2), &field, &x, &y).unwrap();
        let ctx = EvalContext::permuted(2, &[2, 3, 0, 1]);
        let b = eval_with(&ctx, &field, &x, &y).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let ab = a.dd(k, 2 + l);
                let ba = b.dd(ctx.slot(2 + l).unwrap(), ctx.slot(k).unwrap());
                assert!((ab - ba).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn point_only_context_has_width_n() {
        let ctx = EvalContext::point_only(3);
        let (xs, ys) = ctx.seed(&[0.0; 3], &[1.0; 3]).unwrap();
        assert_eq!(ctx.m(), 3);
        assert_eq!(xs[2].m(), 3);
        assert!(ys[0].is_constant());
    }
}
