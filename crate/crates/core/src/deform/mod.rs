//! β-deformations of a pair `(α, β)`:
//!
//! ```text
//! α̃ = √(α² − κ(b²)β²),  β̃ = β
//! α̂ = e^{ρ(b²)} α̃,      β̂ = β̃
//! ᾱ = α̂,                β̄ = ν(b²) β̂
//! ```
//!
//! `b²` is always the norm of the original β with respect to the original α.

mod eta;
mod identities;

pub use eta::{
    default_eta_sweep, eta_closed_form, eta_corrected, eta_reference, report_eta, EtaCase,
    EtaCaseReport, EtaReport,
};
pub use identities::{
    verify_cbar, verify_deformation_identities, verify_specialized_sprays, CbarCheck,
    IdentityResiduals, SpecializedSprays,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Tag};
use crate::jets::{constants, Jet2};
use crate::phi::KTriple;
use crate::quad::smooth_integral;
use crate::riemann::{
    covariant_bij, covariant_derivative, norm_sq_jet, rng_for, spray_riemann, ChartDomain,
    CovariantData, MetricField, OneFormField,
};
use crate::univariate::Univariate;

/// Required lower bound for `1 + k₂t − k₃t²` on the working range.
pub const RANGE_MARGIN: f64 = 1e-2;

/// Random streams for stage reports are offset from this base.
pub const STAGE_STREAM: u64 = 16;

/// `κ`, `ρ`, `ν`, `η` as functions of `t = b²`.
#[derive(Clone, Debug)]
pub struct DeformationProfile {
    pub kappa: Univariate,
    pub rho: Univariate,
    pub nu: Univariate,
    pub eta: Univariate,
    /// Largest admissible `t`.
    pub t_max: f64,
    pub k: Option<KTriple>,
}

impl DeformationProfile {
    /// Arbitrary smooth profile; `η = e^{−ρ}`.
    pub fn custom(kappa: Univariate, rho: Univariate, nu: Univariate) -> Self {
        let r = rho.clone();
        let eta = Univariate::new(move |t| {
            let [p, dp, ddp] = r.eval(t)?;
            let e = (-p).exp();
            Ok([e, -dp * e, (dp * dp - ddp) * e])
        });
        DeformationProfile {
            kappa,
            rho,
            nu,
            eta,
            t_max: f64::INFINITY,
            k: None,
        }
    }

    pub fn identity() -> Self {
        DeformationProfile::custom(
            Univariate::constant(0.0),
            Univariate::constant(0.0),
            Univariate::constant(1.0),
        )
    }

    pub fn check_range(&self, t: f64) -> Result<()> {
        if t <= self.t_max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "b² beyond the admissible deformation range".into(),
                arg: t,
                lo: 0.0,
                hi: self.t_max,
            })
        }
    }
}

/// `1 + k₂t − k₃t²`.
pub fn q_of(k: KTriple, t: f64) -> f64 {
    1.0 + k.k2 * t - k.k3 * t * t
}

fn q_jet(k: KTriple, t: &Jet2) -> Jet2 {
    t * k.k2 - t.square() * k.k3 + 1.0
}

/// Smallest `t > 0` with `1 + k₂t − k₃t² = RANGE_MARGIN`, or `∞`.
pub fn admissible_t_max(k: KTriple) -> f64 {
    let c = 1.0 - RANGE_MARGIN;
    if k.k3 == 0.0 {
        return if k.k2 < 0.0 { c / -k.k2 } else { f64::INFINITY };
    }
    // k₃t² − k₂t − c = 0
    let disc = k.k2 * k.k2 + 4.0 * k.k3 * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let r = disc.sqrt();
    [(k.k2 + r) / (2.0 * k.k3), (k.k2 - r) / (2.0 * k.k3)]
        .into_iter()
        .filter(|t| *t > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// `κ = −k₂ + k₃t`, `ρ = −¼∫₀ᵗ (k₁ − k₂ + k₃τ)/(1 + k₂τ − k₃τ²) dτ`,
/// `ν = −√(1 + k₂t − k₃t²)·e^ρ`, `η = e^{−ρ}`.
pub fn profile_from_k(k: KTriple) -> Result<DeformationProfile> {
    let t_max = admissible_t_max(k);
    let probe_hi = if t_max.is_finite() { t_max } else { 1.0 };
    for i in 0..=20 {
        let t = probe_hi * i as f64 / 20.0;
        let kappa = -k.k2 + k.k3 * t;
        let lhs = kappa * kappa + k.k2 * kappa - k.k3;
        let rhs = -k.k3 * q_of(k, t);
        let scale = 1.0 + lhs.abs().max(rhs.abs());
        assert!((lhs - rhs).abs() <= 1e-12 * scale, "κ identity fails at t = {t}");
    }

    let kappa = Univariate::polynomial(vec![-k.k2, k.k3]);
    let in_range = move |t: f64| -> Result<()> {
        if t > t_max || q_of(k, t) <= 0.0 {
            Err(Error::OutOfRange {
                what: "b² beyond the admissible deformation range".into(),
                arg: t,
                lo: 0.0,
                hi: t_max,
            })
        } else {
            Ok(())
        }
    };
    let rho_prime = move |t: &Jet2| -> Result<Jet2> {
        let num = t * k.k3 + (k.k1 - k.k2);
        Ok(num * q_jet(k, t).recip().tag("1 + k₂t − k₃t²")? * -0.25)
    };
    let rho = Univariate::new(move |t| {
        in_range(t)?;
        let v = smooth_integral(|s| Ok(rho_prime(&Jet2::constant(s))?.value()), 0.0, t)?;
        let d = rho_prime(&Jet2::variable(t, 0, 1))?;
        Ok([v, d.value(), d.d(0)])
    });
    let r = rho.clone();
    let nu = Univariate::new(move |t| {
        let tj = Jet2::variable(t, 0, 1);
        let e = r.apply(&tj)?.exp();
        let v = -(q_jet(k, &tj).sqrt().tag("1 + k₂t − k₃t²")? * e);
        Ok([v.value(), v.d(0), v.dd(0, 0)])
    });
    let mut p = DeformationProfile::custom(kappa, rho, nu);
    p.t_max = t_max;
    p.k = Some(k);
    Ok(p)
}

/// Defects of the algebraic relations a k-profile must satisfy at `t`:
/// `[ρ′ + (k₁+κ)/(4q), (5κ + k₁ + 2k₂)ν + 4qν′, ηe^ρ − 1]`, each relative.
pub fn profile_defects(p: &DeformationProfile, t: f64) -> Result<[f64; 3]> {
    let k = p.k.ok_or_else(|| Error::InvalidParameter("profile has no k-triple".into()))?;
    let q = q_of(k, t);
    let kappa = p.kappa.value(t)?;
    let [rho, drho, _] = p.rho.eval(t)?;
    let [nu, dnu, _] = p.nu.eval(t)?;
    let eta = p.eta.value(t)?;
    let expect = -(k.k1 + kappa) / (4.0 * q);
    let d1 = (drho - expect).abs() / (1.0 + expect.abs());
    let a = (5.0 * kappa + k.k1 + 2.0 * k.k2) * nu;
    let b = 4.0 * q * dnu;
    let d2 = (a + b).abs() / (1.0 + a.abs().max(b.abs()));
    let d3 = (eta * rho.exp() - 1.0).abs();
    Ok([d1, d2, d3])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Base,
    Tilde,
    Hat,
    Bar,
}

/// A deformed pair, remembering the original pair that defines `b²`.
#[derive(Clone, Debug)]
pub struct DeformedPair {
    pub metric: MetricField,
    pub form: OneFormField,
    pub stage: Stage,
    base_metric: MetricField,
    base_form: OneFormField,
}

impl DeformedPair {
    pub fn base(g: &MetricField, beta: &OneFormField) -> Self {
        DeformedPair {
            metric: g.clone(),
            form: beta.clone(),
            stage: Stage::Base,
            base_metric: g.clone(),
            base_form: beta.clone(),
        }
    }

    pub fn original(&self) -> (&MetricField, &OneFormField) {
        (&self.base_metric, &self.base_form)
    }
}

/// `ã_ij = a_ij − κ(b²) b_i b_j`; fails where `1 − κb² ≤ 0`.
pub fn tilde_deform(g: &MetricField, beta: &OneFormField, kappa: &Univariate) -> DeformedPair {
    let n = g.n();
    let (g0, b0, kap) = (g.clone(), beta.clone(), kappa.clone());
    let metric = MetricField::new(n, move |x| {
        let a = g0.eval(x)?;
        let b = b0.eval(x)?;
        let t = norm_sq_jet(&g0, &b0, x)?;
        let k = kap.apply(&t)?;
        let det = 1.0 - k.value() * t.value();
        if det <= 0.0 {
            return Err(Error::Domain {
                op: "shear",
                arg: det,
                tag: Some("1 − κb²".into()),
            });
        }
        Ok((0..n * n)
            .map(|ij| &a[ij] - &k * &b[ij / n] * &b[ij % n])
            .collect())
    });
    DeformedPair {
        metric,
        form: beta.clone(),
        stage: Stage::Tilde,
        base_metric: g.clone(),
        base_form: beta.clone(),
    }
}

/// `â = e^{2ρ(b²)} ã`.
pub fn hat_deform(pair: &DeformedPair, rho: &Univariate) -> DeformedPair {
    let n = pair.metric.n();
    let (m, g0, b0, r) = (
        pair.metric.clone(),
        pair.base_metric.clone(),
        pair.base_form.clone(),
        rho.clone(),
    );
    let metric = MetricField::new(n, move |x| {
        let t = norm_sq_jet(&g0, &b0, x)?;
        let factor = (r.apply(&t)? * 2.0).exp();
        Ok(m.eval(x)?.iter().map(|a| a * &factor).collect())
    });
    DeformedPair {
        metric,
        form: pair.form.clone(),
        stage: Stage::Hat,
        base_metric: pair.base_metric.clone(),
        base_form: pair.base_form.clone(),
    }
}

/// `β̄ = ν(b²) β̂`; the metric is carried over unchanged.
pub fn bar_deform(pair: &DeformedPair, nu: &Univariate) -> DeformedPair {
    let n = pair.metric.n();
    let (f, g0, b0, v) = (
        pair.form.clone(),
        pair.base_metric.clone(),
        pair.base_form.clone(),
        nu.clone(),
    );
    let form = OneFormField::new(n, move |x| {
        let t = norm_sq_jet(&g0, &b0, x)?;
        let s = v.apply(&t)?;
        if s.value().abs() < 1e-300 {
            return Err(Error::Domain {
                op: "rescale",
                arg: s.value(),
                tag: Some("ν(b²)".into()),
            });
        }
        Ok(f.eval(x)?.iter().map(|b| b * &s).collect())
    });
    DeformedPair {
        metric: pair.metric.clone(),
        form,
        stage: Stage::Bar,
        base_metric: pair.base_metric.clone(),
        base_form: pair.base_form.clone(),
    }
}

/// All three stages with one profile.
pub fn deform_with(g: &MetricField, beta: &OneFormField, p: &DeformationProfile) -> DeformedPair {
    let tilde = tilde_deform(g, beta, &p.kappa);
    let hat = hat_deform(&tilde, &p.rho);
    bar_deform(&hat, &p.nu)
}

/// `(ᾱ, β̄)` from `(α, β)` with the profile of `k`.
pub fn forward_deform(g: &MetricField, beta: &OneFormField, k: KTriple) -> Result<DeformedPair> {
    Ok(deform_with(g, beta, &profile_from_k(k)?))
}

/// `(α, β)` from `(ᾱ, β̄)`:
/// `a_ij = η²(ā_ij − (k₂ − k₃t)/(1 + k₂t − k₃t²)·b̄_i b̄_j)`,
/// `b_i = −η(1 + k₂t − k₃t²)^{−1/2} b̄_i`, `t = b̄²`.
pub fn inverse_deform(
    gbar: &MetricField,
    betabar: &OneFormField,
    k: KTriple,
) -> Result<(MetricField, OneFormField)> {
    let p = profile_from_k(k)?;
    let n = gbar.n();
    let t_max = p.t_max;
    let factors = {
        let (g, b, eta) = (gbar.clone(), betabar.clone(), p.eta.clone());
        move |x: &[Jet2]| -> Result<(Jet2, Jet2, Jet2)> {
            let t = norm_sq_jet(&g, &b, x)?;
            let q = q_jet(k, &t);
            if t.value() > t_max || q.value() <= RANGE_MARGIN {
                return Err(Error::OutOfRange {
                    what: "b̄² beyond the admissible deformation range".into(),
                    arg: t.value(),
                    lo: 0.0,
                    hi: t_max,
                });
            }
            let e = eta.apply(&t)?;
            let shear = (&t * k.k3 - k.k2) * q.recip()?;
            let scale = -(&e * q.powf(-0.5)?);
            Ok((e.square(), shear, scale))
        }
    };
    let f1 = factors.clone();
    let (g1, b1) = (gbar.clone(), betabar.clone());
    let metric = MetricField::new(n, move |x| {
        let (e2, shear, _) = f1(x)?;
        let a = g1.eval(x)?;
        let b = b1.eval(x)?;
        Ok((0..n * n)
            .map(|ij| (&a[ij] + &shear * &b[ij / n] * &b[ij % n]) * &e2)
            .collect())
    });
    let b2 = betabar.clone();
    let form = OneFormField::new(n, move |x| {
        let (_, _, scale) = factors(x)?;
        Ok(b2.eval(x)?.iter().map(|b| b * &scale).collect())
    });
    Ok((metric, form))
}

/// `|b̄² − b²|` and the largest component gap of `forward(inverse(ᾱ, β̄))`
/// against `(ᾱ, β̄)` at `x`.
pub fn reversibility_defect(
    gbar: &MetricField,
    betabar: &OneFormField,
    k: KTriple,
    x: &[f64],
) -> Result<(f64, f64)> {
    let (g, beta) = inverse_deform(gbar, betabar, k)?;
    let back = forward_deform(&g, &beta, k)?;
    let xs = constants(x);
    let t_orig = norm_sq_jet(&g, &beta, &xs)?.value();
    let t_bar = norm_sq_jet(gbar, betabar, &xs)?.value();
    let a0 = gbar.at(x)?;
    let a1 = back.metric.at(x)?;
    let b0 = betabar.at(x)?;
    let b1 = back.form.at(x)?;
    let gap = (&a1 - &a0).amax().max((&b1 - &b0).amax());
    Ok(((t_orig - t_bar).abs(), gap))
}

/// Normalized deviations between the direct computation and the formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageDeviation {
    pub spray: f64,
    pub bij: f64,
}

impl StageDeviation {
    pub fn max(&self) -> f64 {
        self.spray.max(self.bij)
    }
}

const DEV_FLOOR: f64 = 1e-10;

fn rel_gap(direct: f64, formula: f64, gap: f64, floor: f64) -> f64 {
    let scale = direct.max(formula).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        gap / scale
    }
}

fn vec_dev(direct: &DVector<f64>, formula: &DVector<f64>, floor: f64) -> f64 {
    rel_gap(direct.amax(), formula.amax(), (direct - formula).amax(), floor)
}

fn mat_dev(direct: &DMatrix<f64>, formula: &DMatrix<f64>, floor: f64) -> f64 {
    rel_gap(direct.amax(), formula.amax(), (direct - formula).amax(), floor)
}

/// Sprays and covariant derivatives of all three stages computed from the
/// original quantities alone.
struct StageFormulas {
    g_tilde: DVector<f64>,
    b_tilde: DMatrix<f64>,
    g_hat: DVector<f64>,
    b_hat: DMatrix<f64>,
    b_bar: DMatrix<f64>,
}

fn stage_formulas(
    d: &CovariantData,
    spray: &DVector<f64>,
    p: &DeformationProfile,
) -> Result<StageFormulas> {
    let t = d.b2;
    p.check_range(t)?;
    let [k, dk, _] = p.kappa.eval(t)?;
    let [_, drho, _] = p.rho.eval(t)?;
    let [nu, dnu, _] = p.nu.eval(t)?;
    let qk = 1.0 - k * t;
    if qk <= 0.0 {
        return Err(Error::Domain {
            op: "shear",
            arg: qk,
            tag: Some("1 − κb²".into()),
        });
    }
    let beta = d.beta;
    let rs_up = &d.r_up + &d.s_up;
    let rs = &d.ri + &d.si;
    let bb = &d.b * d.b.transpose();

    let g_tilde = spray
        - (&d.s_up0 * (2.0 * qk * beta)
            + &d.b_up * (d.r00 + 2.0 * k * d.s0 * beta))
            * (k / (2.0 * qk))
        + (&rs_up * (qk * beta * beta) + &d.b_up * (k * d.r * beta * beta - 2.0 * (d.r0 + d.s0) * beta))
            * (dk / (2.0 * qk));
    let b_tilde = &d.bij
        + (&d.rij * t + &d.b * d.si.transpose() + &d.si * d.b.transpose()) * (k / qk)
        - (&bb * d.r - (&d.b * rs.transpose() + &rs * d.b.transpose()) * t) * (dk / qk);

    let g_hat = &g_tilde
        + (&d.y * (2.0 * (d.r0 + d.s0))
            - (&rs_up + &d.b_up * (k * d.r / qk)) * (d.alpha2 - k * beta * beta))
            * drho;
    let b_hat = &b_tilde
        - (&d.b * rs.transpose() + &rs * d.b.transpose() - (&d.a - &bb * k) * (d.r / qk))
            * (2.0 * drho);

    let b_bar = &b_hat * nu + &d.b * rs.transpose() * (2.0 * dnu);
    Ok(StageFormulas {
        g_tilde,
        b_tilde,
        g_hat,
        b_hat,
        b_bar,
    })
}

fn stage_deviation(
    stage: Stage,
    g: &MetricField,
    beta: &OneFormField,
    p: &DeformationProfile,
    x: &[f64],
    y: &[f64],
) -> Result<StageDeviation> {
    let d = covariant_derivative(g, beta, x, y)?;
    let spray = spray_riemann(g, x, y)?;
    let f = stage_formulas(&d, &spray, p)?;
    let tilde = tilde_deform(g, beta, &p.kappa);
    let (pair, g_formula, b_formula) = match stage {
        Stage::Base => (DeformedPair::base(g, beta), spray.clone(), d.bij.clone()),
        Stage::Tilde => (tilde, f.g_tilde, f.b_tilde),
        Stage::Hat => (hat_deform(&tilde, &p.rho), f.g_hat, f.b_hat),
        Stage::Bar => {
            let hat = hat_deform(&tilde, &p.rho);
            (bar_deform(&hat, &p.nu), f.g_hat, f.b_bar)
        }
    };
    let g_direct = spray_riemann(&pair.metric, x, y)?;
    let b_direct = covariant_bij(&pair.metric, &pair.form, x)?;
    Ok(StageDeviation {
        spray: vec_dev(&g_direct, &g_formula, DEV_FLOOR * d.alpha2),
        bij: mat_dev(&b_direct, &b_formula, DEV_FLOOR),
    })
}

/// Shear stage: direct spray and `b̃_{i|j}` of `α̃` against the formula in
/// original quantities.
pub fn verify_shear_stage(
    g: &MetricField,
    beta: &OneFormField,
    p: &DeformationProfile,
    x: &[f64],
    y: &[f64],
) -> Result<StageDeviation> {
    stage_deviation(Stage::Tilde, g, beta, p, x, y)
}

/// Conformal stage, including the `r̂ + ŝ` structure through `b̂_{i|j}`.
pub fn verify_conformal_stage(
    g: &MetricField,
    beta: &OneFormField,
    p: &DeformationProfile,
    x: &[f64],
    y: &[f64],
) -> Result<StageDeviation> {
    stage_deviation(Stage::Hat, g, beta, p, x, y)
}

/// Rescale stage: `Ḡ = Ĝ` and `b̄_{i|j} = νb̂_{i|j} + 2ν′b_i(r_j + s_j)`.
pub fn verify_rescale_stage(
    g: &MetricField,
    beta: &OneFormField,
    p: &DeformationProfile,
    x: &[f64],
    y: &[f64],
) -> Result<StageDeviation> {
    stage_deviation(Stage::Bar, g, beta, p, x, y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub samples: usize,
    pub max_spray: f64,
    pub max_bij: f64,
    pub mean_deviation: f64,
    pub tol: f64,
    pub pass: bool,
    pub seed: u64,
}

impl StageReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_spray.max(self.max_bij)
    }
}

/// Samples `(x, y)` in `domain` and records the largest deviations.
#[allow(clippy::too_many_arguments)]
pub fn verify_stage(
    stage: Stage,
    g: &MetricField,
    beta: &OneFormField,
    p: &DeformationProfile,
    domain: &ChartDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<StageReport> {
    let mut rng = rng_for(seed, STAGE_STREAM + stage as u64);
    let pairs = domain.sample_pairs(&mut rng, samples)?;
    let (mut ms, mut mb, mut sum) = (0.0_f64, 0.0_f64, 0.0);
    for (x, y) in &pairs {
        let d = stage_deviation(stage, g, beta, p, x, y)?;
        ms = ms.max(d.spray);
        mb = mb.max(d.bij);
        sum += d.max();
    }
    Ok(StageReport {
        stage,
        samples: pairs.len(),
        max_spray: ms,
        max_bij: mb,
        mean_deviation: sum / pairs.len().max(1) as f64,
        tol,
        pass: ms.max(mb) < tol,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet2;

    fn quadratic_pair(n: usize) -> (MetricField, OneFormField) {
        let g = MetricField::new(n, move |x| {
            let r2: Jet2 = x.iter().map(|v| v.square()).sum();
            let c = (r2 * 0.3 + 1.0).recip()?;
            Ok((0..n * n)
                .map(|ij| {
                    let d = if ij % (n + 1) == 0 { 1.0 } else { 0.0 };
                    &c * d + &x[ij / n] * &x[ij % n] * 0.1
                })
                .collect())
        });
        let beta = OneFormField::new(n, move |x| {
            Ok((0..n)
                .map(|i| &x[(i + 1) % n] * 0.4 + x[i].square() * 0.3 + 0.2)
                .collect())
        });
        (g, beta)
    }

    fn wavy_profile() -> DeformationProfile {
        DeformationProfile::custom(
            Univariate::from_jet(|t| Ok((t * 1.3).atan() * 0.5 - 0.2)),
            Univariate::from_jet(|t| Ok(t.square() * 0.3 - t * 0.7)),
            Univariate::from_jet(|t| Ok((t * 0.8).exp() * -1.0 + t * 0.1)),
        )
    }

    #[test]
    fn identity_profile_changes_nothing() {
        let (g, b) = quadratic_pair(3);
        let p = DeformationProfile::identity();
        let (x, y) = ([0.1, -0.2, 0.3], [0.4, 1.0, -0.5]);
        for stage in [Stage::Tilde, Stage::Hat, Stage::Bar] {
            let d = stage_deviation(stage, &g, &b, &p, &x, &y).unwrap();
            assert!(d.max() < 1e-12, "{stage:?}: {d:?}");
        }
        let bar = deform_with(&g, &b, &p);
        assert!((bar.metric.at(&x).unwrap() - g.at(&x).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn stage_formulas_match_direct_computation() {
        let (g, b) = quadratic_pair(3);
        let p = wavy_profile();
        let dom = ChartDomain::ball(3, 0.5);
        for stage in [Stage::Tilde, Stage::Hat, Stage::Bar] {
            let r = verify_stage(stage, &g, &b, &p, &dom, 25, 1e-6, 3).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn rescale_keeps_metric() {
        let (g, b) = quadratic_pair(3);
        let p = wavy_profile();
        let d = verify_rescale_stage(&g, &b, &p, &[0.2, 0.1, 0.0], &[1.0, 0.3, 0.2]).unwrap();
        assert!(d.spray < 1e-10, "{d:?}");
    }

    #[test]
    fn zero_k_profile() {
        let p = profile_from_k(KTriple::new(0.0, 0.0, 0.0)).unwrap();
        for t in [0.0, 0.3, 2.0] {
            assert_eq!(p.kappa.value(t).unwrap(), 0.0);
            assert_eq!(p.rho.value(t).unwrap(), 0.0);
            assert_eq!(p.nu.value(t).unwrap(), -1.0);
            assert_eq!(p.eta.value(t).unwrap(), 1.0);
        }
        assert!(p.t_max.is_infinite());
    }

    #[test]
    fn k_profile_relations() {
        for k in [
            KTriple::new(0.5, -0.3, 0.2),
            KTriple::new(-1.0, 0.7, -0.4),
            KTriple::new(0.3, 0.0, 0.9),
        ] {
            let p = profile_from_k(k).unwrap();
            let hi = p.t_max.min(1.5);
            for i in 0..=10 {
                let t = hi * i as f64 / 10.0;
                let [a, b, c] = profile_defects(&p, t).unwrap();
                assert!(a < 1e-9 && b < 1e-8 && c < 1e-14, "{k:?} t={t}: {a} {b} {c}");
            }
        }
    }

    #[test]
    fn range_edge() {
        let k = KTriple::new(0.0, -1.0, 0.0);
        assert!((admissible_t_max(k) - 0.99).abs() < 1e-15);
        let p = profile_from_k(k).unwrap();
        assert!(p.rho.value(0.995).is_err());
        let k = KTriple::new(0.0, 0.0, 1.0);
        assert!((q_of(k, admissible_t_max(k)) - RANGE_MARGIN).abs() < 1e-14);
    }

    #[test]
    fn norm_is_preserved_and_inverse_round_trips() {
        let (g, b) = quadratic_pair(3);
        for k in [KTriple::new(0.4, -0.5, 0.3), KTriple::new(-0.6, 0.2, -0.1)] {
            for x in [[0.1, 0.2, -0.1], [0.3, -0.2, 0.25]] {
                let (dt, gap) = reversibility_defect(&g, &b, k, &x).unwrap();
                assert!(dt < 1e-12 && gap < 1e-12, "{dt} {gap}");
                let fwd = forward_deform(&g, &b, k).unwrap();
                let xs = constants(&x);
                let t0 = norm_sq_jet(&g, &b, &xs).unwrap().value();
                let t1 = norm_sq_jet(&fwd.metric, &fwd.form, &xs).unwrap().value();
                assert!((t0 - t1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_k_flips_beta() {
        let (g, b) = quadratic_pair(3);
        let (a, beta) = inverse_deform(&g, &b, KTriple::new(0.0, 0.0, 0.0)).unwrap();
        let x = [0.2, -0.1, 0.3];
        assert!((a.at(&x).unwrap() - g.at(&x).unwrap()).amax() < 1e-15);
        assert!((beta.at(&x).unwrap() + b.at(&x).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn degenerate_shear_is_an_error() {
        let (g, b) = quadratic_pair(3);
        let pair = tilde_deform(&g, &b, &Univariate::constant(50.0));
        assert!(pair.metric.at(&[0.3, 0.3, 0.3]).is_err());
    }
}
