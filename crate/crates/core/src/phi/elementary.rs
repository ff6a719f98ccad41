//! Closed-form solutions for special constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solve::{natural_domain, quadrature_phi, S_CAP};
use super::{KParams, PhiFunction, ZERO_TOL};
use crate::error::{Error, Result, Tag};
use crate::jets::Jet2;
use crate::univariate::Univariate;

/// Series cases are implemented for `1 ≤ n ≤ MAX_SERIES_N`.
pub const MAX_SERIES_N: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", content = "n")]
pub enum ElementaryCase {
    /// `k = 0`
    Linear,
    /// `k₁ = 0, k₂ < 0, k₃ = 0`
    Arcsin,
    /// `k₁ = 0, k₂ > 0, k₃ = 0`
    Arcsinh,
    /// `k₃ = 0, k₁ + k₂ = 0`
    Quadratic,
    /// `k₁ ≠ 0, k₂ = k₁/(2n), k₃ = 0`
    EvenSeries(u32),
    /// `k₁ > 0, k₂ = k₁/(2n+1), k₃ = 0`
    ArctanSeries(u32),
    /// `k₁ < 0, k₂ = k₁/(2n+1), k₃ = 0`
    ArctanhSeries(u32),
    /// `k₁ ≠ 0, k₂ = −k₁/(2n+1), k₃ = 0`
    OddSeries(u32),
    /// `k₁ > 0, k₂ = −k₁/(2n), k₃ = 0`
    ArcsinSeries(u32),
    /// `k₁ < 0, k₂ = −k₁/(2n), k₃ = 0`
    ArcsinhSeries(u32),
    /// `k₁ = k₂ = 0, k₃ ≠ 0` (quadrature)
    Quartic,
    /// `k₁ ≠ 0, k₂ = k₃ = 0` (quadrature)
    Gaussian,
}

fn zero(v: f64) -> bool {
    v.abs() <= ZERO_TOL
}

/// `k₁/k₂` as a nonzero integer, if it is one.
fn ratio(k1: f64, k2: f64) -> Option<i64> {
    if zero(k2) || zero(k1) {
        return None;
    }
    let m = k1 / k2;
    let r = m.round();
    ((m - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as i64)
}

/// The case whose preconditions `k` satisfies. Where cases overlap the
/// simplest one wins.
pub fn classify_elementary(k: &KParams) -> Option<ElementaryCase> {
    use ElementaryCase::*;
    let (k1, k2, k3) = (k.k1, k.k2, k.k3);
    if !zero(k3) {
        return (zero(k1) && zero(k2)).then_some(Quartic);
    }
    if zero(k1) {
        return Some(if zero(k2) {
            Linear
        } else if k2 < 0.0 {
            Arcsin
        } else {
            Arcsinh
        });
    }
    if zero(k2) {
        return Some(Gaussian);
    }
    if zero(k1 + k2) {
        return Some(Quadratic);
    }
    let m = ratio(k1, k2)?;
    let within = |n: i64| (1..=MAX_SERIES_N as i64).contains(&n).then_some(n as u32);
    match m {
        m if m > 0 && m % 2 == 0 => within(m / 2).map(EvenSeries),
        m if m > 1 => within((m - 1) / 2).map(|n| if k1 > 0.0 { ArctanSeries(n) } else { ArctanhSeries(n) }),
        m if m < 0 && m % 2 == 0 => {
            within(-m / 2).map(|n| if k1 > 0.0 { ArcsinSeries(n) } else { ArcsinhSeries(n) })
        }
        m if m < -1 => within((-m - 1) / 2).map(OddSeries),
        _ => None,
    }
}

fn check(case: ElementaryCase, k: &KParams) -> Result<()> {
    use ElementaryCase::*;
    let ok = match case {
        Quartic => zero(k.k1) && zero(k.k2) && !zero(k.k3),
        Gaussian => !zero(k.k1) && zero(k.k2) && zero(k.k3),
        Quadratic => zero(k.k3) && zero(k.k1 + k.k2),
        Linear => zero(k.k1) && zero(k.k2) && zero(k.k3),
        Arcsin => zero(k.k1) && k.k2 < -ZERO_TOL && zero(k.k3),
        Arcsinh => zero(k.k1) && k.k2 > ZERO_TOL && zero(k.k3),
        EvenSeries(n) | ArcsinSeries(n) | ArcsinhSeries(n) | ArctanSeries(n)
        | ArctanhSeries(n) | OddSeries(n) => {
            let m = match case {
                EvenSeries(_) => 2 * n as i64,
                ArctanSeries(_) | ArctanhSeries(_) => 2 * n as i64 + 1,
                OddSeries(_) => -(2 * n as i64 + 1),
                _ => -2 * n as i64,
            };
            let sign_ok = match case {
                ArctanSeries(_) | ArcsinSeries(_) => k.k1 > 0.0,
                ArctanhSeries(_) | ArcsinhSeries(_) => k.k1 < 0.0,
                _ => true,
            };
            (1..=MAX_SERIES_N).contains(&n)
                && zero(k.k3)
                && sign_ok
                && ratio(k.k1, k.k2) == Some(m)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NoMatchingCase(format!("{case:?} does not admit {k:?}")))
    }
}

/// `m!!`, with `m!! = 1` for `m ≤ 0`.
fn double_factorial(m: i64) -> u128 {
    let mut acc: u128 = 1;
    let mut i = m;
    while i > 0 {
        acc *= i as u128;
        i -= 2;
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `num/den` reduced exactly before conversion.
fn exact_ratio(num: u128, den: u128) -> f64 {
    let g = gcd(num, den);
    (num / g) as f64 / (den / g) as f64
}

fn df(m: i64) -> u128 {
    double_factorial(m)
}

/// Leading constant and series coefficients `c_k` for `k = 1..=K`.
fn series(case: ElementaryCase) -> (f64, Vec<f64>) {
    use ElementaryCase::*;
    match case {
        EvenSeries(n) => {
            let n = n as i64;
            let lead = exact_ratio(df(2 * n), df(2 * n - 1));
            let c = (1..n)
                .map(|k| {
                    exact_ratio(
                        2 * (n - k) as u128 * df(2 * n - 2) * df(2 * k - 3),
                        df(2 * n - 1) * df(2 * k),
                    )
                })
                .collect();
            (lead, c)
        }
        ArctanSeries(n) | ArctanhSeries(n) | ArcsinSeries(n) | ArcsinhSeries(n) => {
            let n = n as i64;
            let lead = exact_ratio(df(2 * n + 1), df(2 * n));
            let c = (1..n)
                .map(|k| {
                    exact_ratio(
                        2 * (n - k) as u128 * df(2 * n - 1) * df(2 * k - 2),
                        df(2 * n) * df(2 * k + 1),
                    )
                })
                .collect();
            (lead, c)
        }
        OddSeries(n) => {
            let n = n as i64;
            let lead = exact_ratio(df(2 * n + 2), df(2 * n + 1));
            let c = (1..=n)
                .map(|k| {
                    exact_ratio(
                        2 * (n - k + 1) as u128 * df(2 * n) * df(2 * k - 3),
                        df(2 * n + 1) * df(2 * k),
                    )
                })
                .collect();
            (lead, c)
        }
        _ => (0.0, Vec::new()),
    }
}

/// `(2n−1)!!/(2n)!!`
fn arc_weight(n: u32) -> f64 {
    let n = n as i64;
    exact_ratio(df(2 * n - 1), df(2 * n))
}

/// `lead − Σ c_k w^{±k}`.
fn bracket(lead: f64, c: &[f64], w: &Jet2, negative_powers: bool) -> Result<Jet2> {
    let mut acc = Jet2::constant(lead);
    for (i, ck) in c.iter().enumerate() {
        let p = (i + 1) as i32;
        let term = w.powi(if negative_powers { -p } else { p })?;
        acc = acc - term * *ck;
    }
    Ok(acc)
}

/// `φ²` as a jet for the closed-form cases.
fn phi_squared(case: ElementaryCase, k: KParams, s: &Jet2) -> Result<Jet2> {
    use ElementaryCase::*;
    let (k1, k2, eps) = (k.k1, k.k2, k.eps);
    let s2 = s.square();
    let w = &s2 * k2 + 1.0;
    let p = &s2 * k1 + 1.0;
    let (lead, c) = series(case);
    Ok(match case {
        Linear => s * (2.0 * eps) + 1.0,
        Arcsin | Arcsinh => {
            let r = k2.abs().sqrt();
            let arc = if case == Arcsin {
                (s * r).asin().tag("arcsin argument")?
            } else {
                (s * r).asinh()
            };
            (s * w.sqrt().tag("1 + k₂s²")? + arc / r) * eps + 1.0
        }
        Quadratic => &s2 * k1 + s * (2.0 * eps) + 1.0,
        EvenSeries(_) => {
            p + s * w.sqrt().tag("1 + k₂s²")? * bracket(lead, &c, &w, true)? * eps
        }
        OddSeries(_) => p + s * bracket(lead, &c, &w, false)? * eps,
        ArctanSeries(n) | ArctanhSeries(n) => {
            let r = k2.abs().sqrt();
            let arc = if matches!(case, ArctanSeries(_)) {
                (s * r).atan()
            } else {
                (s * r).atanh().tag("arctanh argument")?
            };
            p * (arc * (arc_weight(n) * eps / r) + 1.0)
                + s * bracket(lead, &c, &w, true)? * eps
        }
        ArcsinSeries(n) | ArcsinhSeries(n) => {
            let r = k2.abs().sqrt();
            let arc = if matches!(case, ArcsinSeries(_)) {
                (s * r).asin().tag("arcsin argument")?
            } else {
                (s * r).asinh()
            };
            p * (arc * (arc_weight(n) * eps / r) + 1.0)
                + s * w.sqrt().tag("1 + k₂s²")? * bracket(lead, &c, &w, false)? * eps
        }
        Quartic | Gaussian => unreachable!("quadrature cases are not closed forms"),
    })
}

fn case_integrand(case: ElementaryCase, k: KParams) -> Option<super::PhiIntegrand> {
    match case {
        ElementaryCase::Quartic => {
            let k3 = k.k3;
            Some(Arc::new(move |t: &Jet2| {
                (t.square().square() * (-k3) + 1.0).powf(0.25).tag("1 − k₃σ⁴")
            }))
        }
        ElementaryCase::Gaussian => {
            let k1 = k.k1;
            Some(Arc::new(move |t: &Jet2| {
                let t2 = t.square();
                let p = &t2 * k1 + 1.0;
                Ok((&t2 * (-0.5 * k1)).exp() * p.powi(-2).tag("1 + k₁σ²")?)
            }))
        }
        _ => None,
    }
}

fn evaluator(case: ElementaryCase, k: KParams) -> Univariate {
    match case_integrand(case, k) {
        Some(h) => {
            let k1 = if case == ElementaryCase::Gaussian { k.k1 } else { 0.0 };
            quadrature_phi(k1, k.eps, h)
        }
        None => Univariate::from_jet(move |s| phi_squared(case, k, s)?.sqrt().tag("phi radicand")),
    }
}

/// `φ(s)` for a listed case.
pub fn elementary_solution(case: ElementaryCase, k: KParams, s: f64) -> Result<f64> {
    check(case, &k)?;
    evaluator(case, k).value(s)
}

/// The listed case as a [`PhiFunction`] on its natural domain.
pub fn elementary_phi(case: ElementaryCase, k: KParams) -> Result<PhiFunction> {
    check(case, &k)?;
    let f = evaluator(case, k);
    let (lo, hi) = natural_domain(&f, S_CAP);
    Ok(PhiFunction::new(f, lo, hi, k.eps))
}
