//! Ready-made metrics with known properties: the flat family `ᾱ_μ`, its
//! related forms `β̄_{μ,λ}`, the Funk metric and its Randers relatives, the
//! navigation form, the worked `(α, β)` examples, negative controls and
//! random test inputs.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deform::{inverse_deform, q_of, DeformationProfile, RANGE_MARGIN};
use crate::error::{Error, Result, Tag};
use crate::finsler::FinslerFunction;
use crate::jets::{constants, dot, Jet2};
use crate::phi::{elementary_phi, ElementaryCase, KParams, PhiFunction};
use crate::riemann::{norm_sq, ChartDomain, MetricField, OneFormField};
use crate::univariate::Univariate;

/// Sampling stays inside `WORKING_FRACTION · r_μ`.
pub const WORKING_FRACTION: f64 = 0.6;
/// Default family parameters.
pub const DEFAULT_MU: f64 = -0.5;
pub const DEFAULT_LAMBDA: f64 = 0.4;
/// Funk sampling radius.
pub const FUNK_RADIUS: f64 = 0.9;

/// `1/√(−μ)` for `μ < 0`, else `∞`.
pub fn r_mu(mu: f64) -> f64 {
    if mu < 0.0 {
        1.0 / (-mu).sqrt()
    } else {
        f64::INFINITY
    }
}

/// `0.6·r_μ`, with an infinite radius truncated to 1.
pub fn working_radius(mu: f64) -> f64 {
    if mu < 0.0 {
        WORKING_FRACTION * r_mu(mu)
    } else {
        WORKING_FRACTION
    }
}

fn r2(x: &[Jet2]) -> Jet2 {
    x.iter().map(|v| v.square()).sum()
}

fn kron(n: usize, ij: usize) -> f64 {
    if ij.is_multiple_of(n + 1) {
        1.0
    } else {
        0.0
    }
}

fn radius_err(mu: f64, x: &[Jet2]) -> Error {
    let r = x.iter().map(|v| v.value() * v.value()).sum::<f64>().sqrt();
    Error::OutOfRange {
        what: format!("|x| outside the ball of radius r_μ for μ = {mu}"),
        arg: r,
        lo: 0.0,
        hi: r_mu(mu),
    }
}

/// `ᾱ² = [(1 + μ|x|²)|y|² − μ⟨x,y⟩²]/(1 + μ|x|²)^{3/2}`.
pub fn flat_alpha(n: usize, mu: f64) -> MetricField {
    MetricField::new(n, move |x| {
        let w = r2(x) * mu + 1.0;
        if w.value() <= 0.0 {
            return Err(radius_err(mu, x));
        }
        let scale = w.powf(-1.5)?;
        Ok((0..n * n)
            .map(|ij| (&w * kron(n, ij) - &x[ij / n] * &x[ij % n] * mu) * &scale)
            .collect())
    })
}

/// `β̄ = λ⟨x,y⟩/(1 + μ|x|²)^{5/4}`.
pub fn related_beta(n: usize, mu: f64, lambda: f64) -> OneFormField {
    OneFormField::new(n, move |x| {
        let w = r2(x) * mu + 1.0;
        if w.value() <= 0.0 {
            return Err(radius_err(mu, x));
        }
        let scale = w.powf(-1.25)? * lambda;
        Ok(x.iter().map(|v| v * &scale).collect())
    })
}

/// `ᾱ` and `β̄` restricted to their working ball.
pub fn family_domain(n: usize, mu: f64) -> ChartDomain {
    ChartDomain::ball(n, working_radius(mu))
}

fn check_unit_ball(x: &[Jet2]) -> Result<Jet2> {
    let w = 1.0 - r2(x);
    if w.value() <= 0.0 {
        let r = (1.0 - w.value()).sqrt();
        return Err(Error::OutOfRange {
            what: "outside the unit ball".into(),
            arg: r,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(w)
}

/// `F = (√((1 − |x|²)|y|² + ⟨x,y⟩²) + ⟨x,y⟩)/(1 − |x|²)` on the unit ball.
pub fn funk(n: usize) -> FinslerFunction {
    funk_with_weight(n, 1.0)
}

/// Funk-type metric with the linear term scaled by `w`; dually flat only for
/// `w = 1`.
pub fn funk_with_weight(n: usize, w: f64) -> FinslerFunction {
    FinslerFunction::new(n, move |x, y| {
        let d = check_unit_ball(x)?;
        let xy = dot(x, y);
        let root = (&d * r2(y) + xy.square()).sqrt().tag("Funk radicand")?;
        Ok((root + xy * w) * d.recip()?)
    })
}

/// The Randers family built from `(μ, λ)`:
/// `F = ∜(1 + (μ+λ²)|x|²)·√((1 + μ|x|²)|y|² − μ⟨x,y⟩²)/(1 + μ|x|²)
///    + λ⟨x,y⟩/((1 + μ|x|²)∜(1 + (μ+λ²)|x|²))`.
pub fn randers_family(n: usize, mu: f64, lambda: f64) -> FinslerFunction {
    FinslerFunction::new(n, move |x, y| {
        let rr = r2(x);
        let w = &rr * mu + 1.0;
        if w.value() <= 0.0 {
            return Err(radius_err(mu, x));
        }
        let v = (&rr * (mu + lambda * lambda) + 1.0).powf(0.25).tag("1 + (μ+λ²)|x|²")?;
        let xy = dot(x, y);
        let root = (&w * r2(y) - xy.square() * mu).sqrt().tag("family radicand")?;
        let wi = w.recip()?;
        Ok(&v * root * &wi + xy * lambda * wi * v.recip()?)
    })
}

/// `b̄²` for the family: `λ²|x|²/(1 + μ|x|²)`.
pub fn family_b2(mu: f64, lambda: f64, x: &[f64]) -> f64 {
    let rr: f64 = x.iter().map(|v| v * v).sum();
    lambda * lambda * rr / (1.0 + mu * rr)
}

/// `F = (√((1 − b²)ᾱ² + β̄²) − β̄)/(1 − b²)` with `b² = ‖β̄‖²_ᾱ`.
pub fn navigation_form(gbar: &MetricField, betabar: &OneFormField) -> FinslerFunction {
    let (g, b) = (gbar.clone(), betabar.clone());
    FinslerFunction::new(gbar.n(), move |x, y| {
        let t = crate::riemann::norm_sq_jet(&g, &b, x)?;
        let d = 1.0 - &t;
        if d.value() <= 0.0 {
            return Err(Error::Domain {
                op: "navigation",
                arg: t.value(),
                tag: Some("b² < 1".into()),
            });
        }
        let a2 = g.alpha_sq(x, y)?;
        let bb = b.beta(x, y)?;
        let root = (&d * a2 + bb.square()).sqrt().tag("navigation radicand")?;
        Ok((root - bb) * d.recip()?)
    })
}

/// Navigation data of a Randers metric `α + β`:
/// `ā = (1 − b²)(a − b⊗b)`, `β̄ = −(1 − b²)β`.
pub fn randers_to_navigation(g: &MetricField, beta: &OneFormField) -> (MetricField, OneFormField) {
    let n = g.n();
    let (g1, b1) = (g.clone(), beta.clone());
    let metric = MetricField::new(n, move |x| {
        let t = crate::riemann::norm_sq_jet(&g1, &b1, x)?;
        let s = 1.0 - &t;
        let a = g1.eval(x)?;
        let b = b1.eval(x)?;
        Ok((0..n * n)
            .map(|ij| (&a[ij] - &b[ij / n] * &b[ij % n]) * &s)
            .collect())
    });
    let (g2, b2) = (g.clone(), beta.clone());
    let form = OneFormField::new(n, move |x| {
        let t = crate::riemann::norm_sq_jet(&g2, &b2, x)?;
        let s = &t - 1.0;
        Ok(b2.eval(x)?.iter().map(|b| b * &s).collect())
    });
    (metric, form)
}

/// `F = α + β`.
pub fn randers(g: &MetricField, beta: &OneFormField) -> FinslerFunction {
    let (g, b) = (g.clone(), beta.clone());
    FinslerFunction::new(g.n(), move |x, y| Ok(g.alpha(x, y)? + b.beta(x, y)?))
}

/// Worked examples of dually flat `(α, β)`-metrics obtained from the flat
/// family by the inverse deformation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum ExampleId {
    /// `k = 0, ε = ½`, `F = √(α(α+β))`.
    SqrtMetric,
    /// `k = (κ, −κ, 0)`, `F = √(α² + 2εαβ + κβ²)`.
    Quadratic { kappa: f64, eps: f64 },
    /// `k = (0, −1, 0), ε = 1`.
    Arcsin,
    /// `k = (0, 1, 0), ε = 1`.
    Arcsinh,
    /// `k = (0, 0, ±1), ε = ½`.
    Quartic { sign: i8 },
    /// `k = (±1, 0, 0), ε = ½`.
    Gaussian { sign: i8 },
}

impl ExampleId {
    /// Every example with default parameters; the quadratic family at
    /// `κ ∈ {−1, ½, 1}`.
    pub fn all() -> Vec<ExampleId> {
        vec![
            ExampleId::SqrtMetric,
            ExampleId::Quadratic { kappa: 1.0, eps: 1.0 },
            ExampleId::Quadratic { kappa: -1.0, eps: 0.5 },
            ExampleId::Quadratic { kappa: 0.5, eps: 0.5 },
            ExampleId::Arcsin,
            ExampleId::Arcsinh,
            ExampleId::Quartic { sign: 1 },
            ExampleId::Quartic { sign: -1 },
            ExampleId::Gaussian { sign: 1 },
            ExampleId::Gaussian { sign: -1 },
        ]
    }

    pub fn params(&self) -> Result<KParams> {
        let sign = |s: i8| -> Result<f64> {
            match s {
                1 => Ok(1.0),
                -1 => Ok(-1.0),
                _ => Err(Error::InvalidParameter(format!("sign must be ±1, got {s}"))),
            }
        };
        match *self {
            ExampleId::SqrtMetric => KParams::new(0.0, 0.0, 0.0, 0.5),
            ExampleId::Quadratic { kappa, eps } => KParams::new(kappa, -kappa, 0.0, eps),
            ExampleId::Arcsin => KParams::new(0.0, -1.0, 0.0, 1.0),
            ExampleId::Arcsinh => KParams::new(0.0, 1.0, 0.0, 1.0),
            ExampleId::Quartic { sign: s } => KParams::new(0.0, 0.0, sign(s)?, 0.5),
            ExampleId::Gaussian { sign: s } => KParams::new(sign(s)?, 0.0, 0.0, 0.5),
        }
    }

    pub fn case(&self) -> ElementaryCase {
        match self {
            ExampleId::SqrtMetric => ElementaryCase::Linear,
            ExampleId::Quadratic { kappa, .. } if *kappa == 0.0 => ElementaryCase::Linear,
            ExampleId::Quadratic { .. } => ElementaryCase::Quadratic,
            ExampleId::Arcsin => ElementaryCase::Arcsin,
            ExampleId::Arcsinh => ElementaryCase::Arcsinh,
            ExampleId::Quartic { .. } => ElementaryCase::Quartic,
            ExampleId::Gaussian { .. } => ElementaryCase::Gaussian,
        }
    }

    /// The stated `(α, β)` in terms of `ᾱ`, `β̄` and `t = b̄²`.
    pub fn closed_form(&self, abar: f64, bbar: f64, t: f64) -> Result<(f64, f64)> {
        let (alpha2, pre) = match *self {
            ExampleId::SqrtMetric => (abar * abar, 1.0),
            ExampleId::Quadratic { kappa, .. } => {
                let w = 1.0 - kappa * t;
                (w * abar * abar + kappa * bbar * bbar, 1.0 / w)
            }
            ExampleId::Arcsin => {
                let w = 1.0 - t;
                (w * abar * abar + bbar * bbar, w.powf(-0.75))
            }
            ExampleId::Arcsinh => {
                let w = 1.0 + t;
                (w * abar * abar - bbar * bbar, w.powf(-0.75))
            }
            ExampleId::Quartic { sign } => {
                let s = sign as f64;
                let w = 1.0 - s * t * t;
                (w * abar * abar + s * t * bbar * bbar, w.powf(-0.625))
            }
            ExampleId::Gaussian { sign } => (abar * abar, (sign as f64 * t / 4.0).exp()),
        };
        if alpha2.is_nan() || alpha2 <= 0.0 || !pre.is_finite() {
            return Err(Error::Domain {
                op: "closed form",
                arg: alpha2,
                tag: Some(format!("{self:?}")),
            });
        }
        Ok((pre * alpha2.sqrt(), -pre * bbar))
    }

    /// Name with parameters, e.g. `quadratic(kappa=1, eps=0.5)`.
    pub fn label(&self) -> String {
        match *self {
            ExampleId::Quadratic { kappa, eps } => format!("quadratic(kappa={kappa}, eps={eps})"),
            ExampleId::Quartic { sign } | ExampleId::Gaussian { sign } => {
                format!("{}({})", self.name(), if sign > 0 { '+' } else { '-' })
            }
            _ => self.name().to_string(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExampleId::SqrtMetric => "sqrt-metric",
            ExampleId::Quadratic { .. } => "quadratic",
            ExampleId::Arcsin => "arcsin",
            ExampleId::Arcsinh => "arcsinh",
            ExampleId::Quartic { .. } => "quartic",
            ExampleId::Gaussian { .. } => "gaussian",
        }
    }
}

/// `F = αφ(β/α)` with `(α, β)` the inverse deformation of the flat family
/// `(ᾱ_μ, β̄_{μ,λ})`, sampled where the deformation and `φ` are defined.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub k: KParams,
    pub phi: PhiFunction,
    pub gbar: MetricField,
    pub betabar: OneFormField,
    pub alpha: MetricField,
    pub beta: OneFormField,
    pub f: FinslerFunction,
    pub domain: ChartDomain,
    pub mu: f64,
    pub lambda: f64,
}

pub fn pipeline(k: KParams, phi: PhiFunction, n: usize, mu: f64, lambda: f64) -> Result<Pipeline> {
    let gbar = flat_alpha(n, mu);
    let betabar = related_beta(n, mu, lambda);
    let (alpha, beta) = inverse_deform(&gbar, &betabar, k.triple())?;
    let f = FinslerFunction::alpha_beta(alpha.clone(), beta.clone(), phi.univariate());
    let (lo, hi) = phi.domain();
    let s_max = (-lo).min(hi);
    let triple = k.triple();
    // |β/α| ≤ b and b̄² = b², so bounding b keeps β/α inside φ's domain.
    let domain = family_domain(n, mu).with_margin(move |x| {
        let t = family_b2(mu, lambda, x);
        (q_of(triple, t) - RANGE_MARGIN).min(s_max - t.sqrt())
    });
    Ok(Pipeline {
        k,
        phi,
        gbar,
        betabar,
        alpha,
        beta,
        f,
        domain,
        mu,
        lambda,
    })
}

/// A worked example: its pipeline built from the elementary `φ`.
#[derive(Clone, Debug)]
pub struct Example {
    pub id: ExampleId,
    pub pipeline: Pipeline,
}

impl std::ops::Deref for Example {
    type Target = Pipeline;

    fn deref(&self) -> &Pipeline {
        &self.pipeline
    }
}

pub fn example(id: ExampleId, n: usize, mu: f64, lambda: f64) -> Result<Example> {
    let k = id.params()?;
    let phi = elementary_phi(id.case(), k)?;
    Ok(Example {
        id,
        pipeline: pipeline(k, phi, n, mu, lambda)?,
    })
}

impl Example {
    /// `(α, β)` from the pipeline and from the stated closed form at `(x, y)`.
    pub fn compare_closed_form(&self, x: &[f64], y: &[f64]) -> Result<[(f64, f64); 2]> {
        let (xs, ys) = (constants(x), constants(y));
        let pipe = (
            self.alpha.alpha(&xs, &ys)?.value(),
            self.beta.beta(&xs, &ys)?.value(),
        );
        let t = norm_sq(&self.gbar, &self.betabar, x)?;
        let closed = self.id.closed_form(
            self.gbar.alpha(&xs, &ys)?.value(),
            self.betabar.beta(&xs, &ys)?.value(),
            t,
        )?;
        Ok([pipe, closed])
    }
}

/// Controls that must fail the dual-flatness or relation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeControl {
    /// `e^{2σ}|y|²` with `σ = ½ln(1 + |x|²)`.
    ConformalMetric,
    /// Funk with half its linear term.
    SkewedFunk,
    /// A rotational form against the flat family.
    RotationalForm,
}

impl NegativeControl {
    pub const ALL: [NegativeControl; 3] = [
        NegativeControl::ConformalMetric,
        NegativeControl::SkewedFunk,
        NegativeControl::RotationalForm,
    ];
}

pub fn conformal_control(n: usize) -> MetricField {
    MetricField::conformal(n, |x| Ok((r2(x) + 1.0).ln()? * 0.5))
}

/// `b = (−x₂, x₁, 0, …) + (0.3, 0, …)`; closed-ness fails so it cannot be
/// related to the flat family.
pub fn rotational_form(n: usize) -> OneFormField {
    OneFormField::new(n, move |x| {
        let mut b: Vec<Jet2> = (0..n).map(|_| Jet2::constant(0.0)).collect();
        b[0] = -&x[1] + 0.3;
        b[1] = x[0].clone();
        Ok(b)
    })
}

/// A random smooth positive-definite metric and 1-form of moderate size on
/// the ball of radius ½.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize) -> (MetricField, OneFormField) {
    let mut u = |s: f64| rng.gen_range(-s..s);
    let c = u(0.3);
    let m: Vec<f64> = (0..n * n).map(|_| u(0.15)).collect();
    let l: Vec<f64> = (0..n * n).map(|_| u(0.3)).collect();
    let b0: Vec<f64> = (0..n).map(|_| u(0.4)).collect();
    let bl: Vec<f64> = (0..n * n).map(|_| u(0.4)).collect();
    let bq: Vec<f64> = (0..n).map(|_| u(0.3)).collect();
    let m = Arc::new(m);
    let metric = MetricField::new(n, move |x| {
        let conf = (r2(x) * c).exp();
        // a = e^{c|x|²}I + (I + L x)(M)ᵀ-style symmetric perturbation
        let lin: Vec<Jet2> = (0..n)
            .map(|i| (0..n).map(|j| &x[j] * l[i * n + j]).sum::<Jet2>())
            .collect();
        Ok((0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let sym = 0.5 * (m[i * n + j] + m[j * n + i]);
                &conf * kron(n, ij) + &lin[i] * &lin[j] * 0.5 + sym * 0.5
            })
            .collect())
    });
    let form = OneFormField::new(n, move |x| {
        Ok((0..n)
            .map(|i| {
                let lin: Jet2 = (0..n).map(|j| &x[j] * bl[i * n + j]).sum();
                lin + x[i].square() * bq[i] + b0[i]
            })
            .collect())
    });
    (metric, form)
}

/// A random smooth profile with `|κ| ≤ 0.4` and `ν` bounded away from 0.
pub fn random_profile<R: Rng>(rng: &mut R) -> DeformationProfile {
    let mut u = |s: f64| rng.gen_range(-s..s);
    let (k0, k1) = (u(0.2), u(0.2));
    let (r1, r2c) = (u(0.8), u(0.5));
    let (n0, n1) = (0.5 + u(0.3).abs(), u(0.6));
    let sign = if u(1.0) < 0.0 { -1.0 } else { 1.0 };
    DeformationProfile::custom(
        Univariate::from_jet(move |t| Ok(t.atan() * k1 + k0)),
        Univariate::from_jet(move |t| Ok(t * r1 + t.square() * r2c)),
        Univariate::from_jet(move |t| Ok((t * n1).exp() * (sign * n0))),
    )
}

/// `(φ(s), s)` on `φ`'s domain, for reports.
pub fn phi_table(phi: &PhiFunction, points: usize) -> Result<Vec<(f64, [f64; 3])>> {
    phi.grid(points)
        .into_iter()
        .map(|s| Ok((s, phi.eval(s)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{fit_dually_related, fit_spray_form, homogeneity_defect};

    #[test]
    fn radii() {
        assert!((working_radius(-0.5) - 0.6 * 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(working_radius(1.0), 0.6);
        assert_eq!(working_radius(0.0), 0.6);
        assert!(r_mu(0.3).is_infinite());
    }

    #[test]
    fn zero_mu_is_euclidean() {
        let g = flat_alpha(3, 0.0);
        let a = g.at(&[0.3, -0.2, 0.1]).unwrap();
        assert!((a - nalgebra::DMatrix::identity(3, 3)).amax() < 1e-15);
        let b = related_beta(3, 0.4, 0.0).at(&[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(b.amax(), 0.0);
    }

    #[test]
    fn family_at_minus_one_is_funk() {
        let (f, g) = (randers_family(3, -1.0, 1.0), funk(3));
        for (x, y) in [([0.1, 0.2, -0.3], [1.0, 0.5, 0.2]), ([0.0, -0.5, 0.4], [-0.3, 0.1, 2.0])] {
            let (a, b) = (f.value(&x, &y).unwrap(), g.value(&x, &y).unwrap());
            assert!((a - b).abs() < 1e-12 * b, "{a} {b}");
        }
        let y = [0.3, -0.4, 1.2];
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((g.value(&[0.0; 3], &y).unwrap() - norm).abs() < 1e-15);
    }

    #[test]
    fn funk_from_navigation_data() {
        let e = MetricField::euclidean(3);
        let b = OneFormField::new(3, |x| Ok(x.iter().map(|v| -v).collect()));
        let nav = navigation_form(&e, &b);
        let (x, y) = ([0.2, -0.1, 0.4], [0.7, 0.2, -1.0]);
        let (a, c) = (nav.value(&x, &y).unwrap(), funk(3).value(&x, &y).unwrap());
        assert!((a - c).abs() < 1e-13);
    }

    #[test]
    fn navigation_round_trip() {
        let g = flat_alpha(3, 0.5);
        let beta = related_beta(3, 0.5, 0.3);
        let (gb, bb) = randers_to_navigation(&g, &beta);
        let (nav, ran) = (navigation_form(&gb, &bb), randers(&g, &beta));
        for (x, y) in [([0.1, 0.2, 0.3], [1.0, -0.4, 0.2]), ([0.4, -0.3, 0.1], [0.1, 0.3, -0.8])] {
            let (a, b) = (nav.value(&x, &y).unwrap(), ran.value(&x, &y).unwrap());
            assert!((a - b).abs() < 1e-13 * b, "{a} {b}");
        }
        let zero = OneFormField::zero(3);
        let (x, y) = ([0.1, 0.2, 0.3], [1.0, -0.4, 0.2]);
        let nav0 = navigation_form(&g, &zero).value(&x, &y).unwrap();
        let a0 = g.alpha(&constants(&x), &constants(&y)).unwrap().value();
        assert!((nav0 - a0).abs() < 1e-15);
    }

    #[test]
    fn flat_family_spray_and_relation() {
        for (mu, lambda) in [(-0.5, 0.4), (1.0, 0.3), (0.3, 0.7)] {
            let g = flat_alpha(3, mu);
            let beta = related_beta(3, mu, lambda);
            let x = [0.2, -0.3, 0.15];
            let fit = fit_spray_form(&g, &x, &crate::finsler::probe_vectors(3)).unwrap();
            assert!(fit.residual < 1e-10, "{mu}: {}", fit.residual);
            let rel = fit_dually_related(&g, &beta, &x).unwrap();
            assert!(rel.residual < 1e-8, "{mu},{lambda}: {}", rel.residual);
        }
    }

    #[test]
    fn example_closed_forms_agree() {
        for id in ExampleId::all() {
            let ex = example(id, 3, DEFAULT_MU, DEFAULT_LAMBDA).unwrap();
            let x = [0.3, -0.2, 0.4];
            let y = [0.5, 1.0, -0.3];
            let [p, c] = ex.compare_closed_form(&x, &y).unwrap();
            assert!((p.0 - c.0).abs() < 1e-10 && (p.1 - c.1).abs() < 1e-10, "{id:?}: {p:?} {c:?}");
            assert!(homogeneity_defect(&ex.f, &x, &y).unwrap() < 1e-10);
            assert_eq!(ex.phi.eval(0.0).unwrap()[1], ex.k.eps);
        }
    }

    #[test]
    fn random_inputs_are_well_formed() {
        let mut rng = crate::riemann::rng_for(11, 0);
        for _ in 0..5 {
            let (g, b) = random_pair(&mut rng, 3);
            let a = g.at(&[0.3, 0.1, -0.2]).unwrap();
            assert!(crate::linalg::min_eigenvalue(&a) > 0.1);
            assert!(b.at(&[0.3, 0.1, -0.2]).unwrap().iter().all(|v| v.is_finite()));
            let p = random_profile(&mut rng);
            assert!(p.nu.value(0.5).unwrap().abs() > 0.1);
        }
    }
}
