//! Finsler-level quantities: fundamental tensor, spray, the dual-flatness
//! residual, and least-squares fits of the structural conditions satisfied by
//! dually flat Riemannian metrics and their dually related 1-forms.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Tag};
use crate::jets::{eval_field, eval_value, Jet2, Partials};
use crate::linalg::{inverse, lstsq, min_eigenvalue};
use crate::phi::KTriple;
use crate::riemann::{
    christoffel, covariant_derivative, rng_for, ChartDomain, CovariantData, MetricField,
    OneFormField,
};
use crate::univariate::Univariate;

type PhaseFn = dyn Fn(&[Jet2], &[Jet2]) -> Result<Jet2> + Send + Sync;

/// A Finsler function `F(x, y)`, positively 1-homogeneous in `y`.
#[derive(Clone)]
pub struct FinslerFunction {
    n: usize,
    f: Arc<PhaseFn>,
}

impl fmt::Debug for FinslerFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinslerFunction(n = {})", self.n)
    }
}

impl FinslerFunction {
    pub fn new(
        n: usize,
        f: impl Fn(&[Jet2], &[Jet2]) -> Result<Jet2> + Send + Sync + 'static,
    ) -> Self {
        FinslerFunction { n, f: Arc::new(f) }
    }

    /// `F = α`.
    pub fn riemannian(g: MetricField) -> Self {
        FinslerFunction::new(g.n(), move |x, y| g.alpha(x, y).tag("alpha"))
    }

    /// `F = α φ(β/α)`.
    pub fn alpha_beta(g: MetricField, beta: OneFormField, phi: Univariate) -> Self {
        FinslerFunction::new(g.n(), move |x, y| {
            let alpha = g.alpha(x, y).tag("alpha")?;
            let s = beta.beta(x, y)? / &alpha;
            Ok(alpha * phi.apply(&s).tag("phi(beta/alpha)")?)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[Jet2], y: &[Jet2]) -> Result<Jet2> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.len().max(y.len()),
            });
        }
        (self.f)(x, y)
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        eval_value(&|x: &[Jet2], y: &[Jet2]| self.eval(x, y), x, y)
    }

    /// `F²` as a phase field.
    pub fn squared(&self) -> impl Fn(&[Jet2], &[Jet2]) -> Result<Jet2> + '_ {
        move |x, y| Ok(self.eval(x, y)?.square())
    }

    /// All partials of `F²` at `(x, y)`.
    pub fn sq_partials(&self, x: &[f64], y: &[f64]) -> Result<Partials> {
        eval_field(&self.squared(), x, y)
    }
}

/// `|F(x, 2y) − 2F(x, y)| / F(x, y)`.
pub fn homogeneity_defect(f: &FinslerFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    let v = f.value(x, y)?;
    let y2: Vec<f64> = y.iter().map(|c| 2.0 * c).collect();
    Ok((f.value(x, &y2)? - 2.0 * v).abs() / v.abs())
}

/// `g_ij = ½[F²]_{yⁱyʲ}`.
pub fn fundamental_tensor(f: &FinslerFunction, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    Ok(f.sq_partials(x, y)?.fyy * 0.5)
}

fn spray_from(p: &Partials, y: &[f64]) -> Result<DVector<f64>> {
    let g = &p.fyy * 0.5;
    let ginv = inverse(&g)?;
    let y = DVector::from_column_slice(y);
    let rhs = p.fxy.transpose() * y - &p.fx;
    Ok(ginv * rhs * 0.25)
}

/// `Gⁱ = ¼ gⁱˡ ([F²]_{xᵏyˡ} yᵏ − [F²]_{xˡ})`.
pub fn spray_finsler(f: &FinslerFunction, x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    spray_from(&f.sq_partials(x, y)?, y)
}

/// Normalized dual-flatness residual at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFlatResidual {
    /// `D_l / scale`.
    pub components: DVector<f64>,
    pub scale: f64,
}

impl DualFlatResidual {
    pub fn max_abs(&self) -> f64 {
        self.components.amax()
    }
}

/// `D_l = [F²]_{xᵏyˡ} yᵏ − 2[F²]_{xˡ}`, divided by
/// `max(Σ_l |[F²]_{xᵏyˡ} yᵏ|, Σ_l |2[F²]_{xˡ}|, F²)`.
pub fn dual_flat_residual(f: &FinslerFunction, x: &[f64], y: &[f64]) -> Result<DualFlatResidual> {
    let p = f.sq_partials(x, y)?;
    let yv = DVector::from_column_slice(y);
    let a = p.fxy.transpose() * yv;
    let b = &p.fx * 2.0;
    let scale = a.lp_norm(1).max(b.lp_norm(1)).max(p.value.abs());
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(DualFlatResidual {
        components: (a - b) / scale,
        scale,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFlatReport {
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Mean of the per-point normalization scales.
    pub mean_scale: f64,
    pub tol: f64,
    pub pass: bool,
    pub seed: u64,
}

/// Random stream reserved for dual-flatness sampling.
pub const DUAL_FLAT_STREAM: u64 = 1;

pub fn verify_dually_flat(
    f: &FinslerFunction,
    domain: &ChartDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<DualFlatReport> {
    let mut rng = rng_for(seed, DUAL_FLAT_STREAM);
    let pairs = domain.sample_pairs(&mut rng, samples)?;
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut scale_sum = 0.0;
    for (x, y) in &pairs {
        let r = dual_flat_residual(f, x, y)?;
        let v = r.max_abs();
        max = max.max(v);
        sum += v;
        scale_sum += r.scale;
    }
    let count = pairs.len().max(1) as f64;
    Ok(DualFlatReport {
        samples: pairs.len(),
        max_residual: max,
        mean_residual: sum / count,
        mean_scale: scale_sum / count,
        tol,
        pass: max < tol,
        seed,
    })
}

/// Unit vectors `eᵢ` and `eᵢ ± eⱼ`: a general-position probe set of size `n²`.
pub fn probe_vectors(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e[j] = sign;
                out.push(e);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SprayFit {
    /// `θ_i`
    pub theta: DVector<f64>,
    /// `θⁱ = aⁱʲ θ_j`
    pub theta_up: DVector<f64>,
    /// Largest deviation of the fitted spray, relative to `max(‖G‖∞, α²)`.
    pub residual: f64,
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Fits `Gⁱ ≈ 2θ yⁱ + α² θⁱ` in the least-squares sense over `ys`.
pub fn fit_spray_form(g: &MetricField, x: &[f64], ys: &[Vec<f64>]) -> Result<SprayFit> {
    let n = g.n();
    if ys.len() * n < n {
        return Err(Error::RankDeficient { rank: 0, cols: n });
    }
    let gamma = christoffel(g, x)?;
    let (a, a_inv) = (&gamma.a, &gamma.a_inv);
    let mut rows = DMatrix::zeros(ys.len() * n, n);
    let mut rhs = DVector::zeros(ys.len() * n);
    let mut sprays = Vec::with_capacity(ys.len());
    for (s, y) in ys.iter().enumerate() {
        let yv = DVector::from_column_slice(y);
        let alpha2 = yv.dot(&(a * &yv));
        let spray = gamma.spray(y);
        for i in 0..n {
            let r = s * n + i;
            for j in 0..n {
                rows[(r, j)] = 2.0 * y[j] * y[i] + alpha2 * a_inv[(i, j)];
            }
            rhs[r] = spray[i];
        }
        sprays.push((yv, alpha2, spray));
    }
    let theta = lstsq(&rows, &rhs)?;
    let theta_up = a_inv * &theta;
    let mut residual: f64 = 0.0;
    for (yv, alpha2, spray) in &sprays {
        let fitted = yv * (2.0 * theta.dot(yv)) + &theta_up * *alpha2;
        let scale = sup_norm(spray).max(*alpha2);
        residual = residual.max(sup_norm(&(fitted - spray)) / scale);
    }
    Ok(SprayFit {
        theta,
        theta_up,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualRelationFit {
    pub theta: DVector<f64>,
    pub c: f64,
    /// `max |b_{i|j} − 2θ_i b_j − c a_ij|` relative to the largest term.
    pub residual: f64,
    /// Residual of the underlying spray-form fit.
    pub spray_residual: f64,
}

impl DualRelationFit {
    /// `c + 2 b_k θᵏ`: zero exactly in the trivial case.
    pub fn nontrivial_part(&self, b_up: &DVector<f64>) -> f64 {
        self.c + 2.0 * b_up.dot(&self.theta)
    }
}

/// Fits `c(x)` in `b_{i|j} = 2θ_i b_j + c a_ij` using θ from
/// [`fit_spray_form`] with the default probe set.
pub fn fit_dually_related(
    g: &MetricField,
    beta: &OneFormField,
    x: &[f64],
) -> Result<DualRelationFit> {
    let n = g.n();
    let spray = fit_spray_form(g, x, &probe_vectors(n))?;
    let cov = covariant_derivative(g, beta, x, &vec![0.0; n])?;
    fit_relation_with(&cov, &spray.theta, spray.residual)
}

/// The same fit with θ supplied.
pub fn fit_relation_with(
    cov: &CovariantData,
    theta: &DVector<f64>,
    spray_residual: f64,
) -> Result<DualRelationFit> {
    let lhs = &cov.bij - theta * cov.b.transpose() * 2.0;
    let a = &cov.a;
    let denom = a.dot(a);
    let c = lhs.dot(a) / denom;
    let dev = (&lhs - a * c).amax();
    let scale = cov
        .bij
        .amax()
        .max((theta * cov.b.transpose() * 2.0).amax())
        .max((a * c).amax());
    Ok(DualRelationFit {
        theta: theta.clone(),
        c,
        residual: if scale > 0.0 { dev / scale } else { 0.0 },
        spray_residual,
    })
}

/// Normalized residuals of the spray, `r₀₀` and `s_i0` conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResiduals {
    pub spray: f64,
    pub r00: f64,
    pub si0: f64,
}

impl ConditionResiduals {
    pub fn max(&self) -> f64 {
        self.spray.max(self.r00).max(self.si0)
    }
}

/// Scale floor relative to `α²` so that exactly vanishing quantities do not
/// amplify rounding.
const REL_FLOOR: f64 = 1e-6;

fn rel_dev(lhs: &DVector<f64>, rhs: &DVector<f64>, floor: f64) -> f64 {
    let scale = sup_norm(lhs).max(sup_norm(rhs)).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        sup_norm(&(lhs - rhs)) / scale
    }
}

/// Right-hand sides of the three conditions for given `(θ, τ)`.
fn condition_rhs(
    d: &CovariantData,
    theta: &DVector<f64>,
    tau: f64,
    k: KTriple,
) -> (DVector<f64>, f64, DVector<f64>) {
    let th_up = &d.a_inv * theta;
    let th0 = theta.dot(&d.y);
    let bth = d.b_up.dot(theta);
    let spray = &d.y * (2.0 * th0 + (3.0 * k.k1 - 2.0) * tau * d.beta)
        + (&th_up - &d.b_up * tau) * d.alpha2
        + &d.b_up * (1.5 * k.k3 * tau * d.beta * d.beta);
    let r00 = 2.0 * th0 * d.beta
        + (3.0 * tau + 2.0 * tau * d.b2 - 2.0 * bth) * d.alpha2
        + (3.0 * k.k2 - 2.0 - 3.0 * k.k3 * d.b2) * tau * d.beta * d.beta;
    let si0 = theta * d.beta - &d.b * th0;
    (spray, r00, si0)
}

/// Evaluates the three structural conditions at `(x, y)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_flatness_conditions(
    g: &MetricField,
    beta: &OneFormField,
    theta: &DVector<f64>,
    tau: f64,
    k: KTriple,
    x: &[f64],
    y: &[f64],
) -> Result<ConditionResiduals> {
    let d = covariant_derivative(g, beta, x, y)?;
    let spray = christoffel(g, x)?.spray(y);
    Ok(condition_residuals(&d, &spray, theta, tau, k))
}

fn condition_residuals(
    d: &CovariantData,
    spray: &DVector<f64>,
    theta: &DVector<f64>,
    tau: f64,
    k: KTriple,
) -> ConditionResiduals {
    let (g_rhs, r00_rhs, s_rhs) = condition_rhs(d, theta, tau, k);
    let floor = REL_FLOOR * d.alpha2;
    let r00 = {
        let scale = d.r00.abs().max(r00_rhs.abs()).max(floor);
        if scale == 0.0 {
            0.0
        } else {
            (d.r00 - r00_rhs).abs() / scale
        }
    };
    ConditionResiduals {
        spray: rel_dev(spray, &g_rhs, floor),
        r00,
        si0: rel_dev(&d.si0, &s_rhs, floor),
    }
}

/// Jointly fitted `(θ, τ)` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTauFit {
    pub theta: DVector<f64>,
    pub tau: f64,
    /// Largest condition residual over the fitting samples.
    pub residual: f64,
    /// `τ` was pinned to zero because the data cannot determine it.
    pub tau_pinned: bool,
}

/// Least squares for `(θ_1..θ_n, τ)` over the three conditions, which are
/// linear in these unknowns, using `ys` (at least `3n` vectors recommended).
pub fn fit_theta_tau(
    g: &MetricField,
    beta: &OneFormField,
    k: KTriple,
    x: &[f64],
    ys: &[Vec<f64>],
) -> Result<ThetaTauFit> {
    let n = g.n();
    let gamma = christoffel(g, x)?;
    let data: Vec<(CovariantData, DVector<f64>)> = ys
        .iter()
        .map(|y| Ok((covariant_derivative(g, beta, x, y)?, gamma.spray(y))))
        .collect::<Result<_>>()?;
    let per = 2 * n + 1;
    let mut rows = DMatrix::zeros(data.len() * per, n + 1);
    let mut rhs = DVector::zeros(data.len() * per);
    // Each column is the response of the conditions to a unit unknown.
    let zero = DVector::zeros(n);
    let base = |d: &CovariantData, theta: &DVector<f64>, tau: f64| condition_rhs(d, theta, tau, k);
    for (s, (d, spray)) in data.iter().enumerate() {
        let w = 1.0 / d.alpha2;
        let (g0, r0, s0) = base(d, &zero, 0.0);
        for c in 0..=n {
            let (theta, tau) = if c < n {
                let mut e = DVector::zeros(n);
                e[c] = 1.0;
                (e, 0.0)
            } else {
                (zero.clone(), 1.0)
            };
            let (gc, rc, sc) = base(d, &theta, tau);
            for i in 0..n {
                rows[(s * per + i, c)] = (gc[i] - g0[i]) * w;
                rows[(s * per + n + i, c)] = (sc[i] - s0[i]) * w;
            }
            rows[(s * per + 2 * n, c)] = (rc - r0) * w;
        }
        for i in 0..n {
            rhs[s * per + i] = (spray[i] - g0[i]) * w;
            rhs[s * per + n + i] = (d.si0[i] - s0[i]) * w;
        }
        rhs[s * per + 2 * n] = (d.r00 - r0) * w;
    }
    let (theta, tau, tau_pinned) = match lstsq(&rows, &rhs) {
        Ok(sol) => (sol.rows(0, n).into_owned(), sol[n], false),
        Err(Error::RankDeficient { .. }) => {
            let sub = rows.columns(0, n).into_owned();
            (lstsq(&sub, &rhs)?, 0.0, true)
        }
        Err(e) => return Err(e),
    };
    let residual = data
        .iter()
        .map(|(d, spray)| condition_residuals(d, spray, &theta, tau, k).max())
        .fold(0.0, f64::max);
    Ok(ThetaTauFit {
        theta,
        tau,
        residual,
        tau_pinned,
    })
}

/// Smallest eigenvalue of `g_ij` over sampled points. Evaluation failures are
/// reported as `NaN` rather than aborting the probe.
pub fn strong_convexity_probe(
    f: &FinslerFunction,
    domain: &ChartDomain,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = rng_for(seed, DUAL_FLAT_STREAM + 1);
    let pairs = domain.sample_pairs(&mut rng, samples)?;
    let mut min = f64::INFINITY;
    for (x, y) in &pairs {
        match fundamental_tensor(f, x, y) {
            Ok(g) => min = min.min(min_eigenvalue(&g)),
            Err(_) => return Ok(f64::NAN),
        }
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::spray_riemann;

    fn euclidean_norm(n: usize) -> FinslerFunction {
        FinslerFunction::riemannian(MetricField::euclidean(n))
    }

    #[test]
    fn euclidean_tensor_and_spray() {
        let f = euclidean_norm(3);
        let g = fundamental_tensor(&f, &[0.1, 0.2, 0.3], &[1.0, -2.0, 0.5]).unwrap();
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-14);
        let s = spray_finsler(&f, &[0.1, 0.2, 0.3], &[1.0, -2.0, 0.5]).unwrap();
        assert!(s.amax() < 1e-14);
        let r = dual_flat_residual(&f, &[0.1, 0.2, 0.3], &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn riemannian_spray_paths_agree() {
        let g = MetricField::conformal(3, |x| Ok(&x[0] * 0.3 + &x[1] * &x[2]));
        let f = FinslerFunction::riemannian(g.clone());
        let (x, y) = ([0.2, -0.1, 0.4], [0.7, 1.1, -0.3]);
        let a = spray_finsler(&f, &x, &y).unwrap();
        let b = spray_riemann(&g, &x, &y).unwrap();
        assert!((&a - &b).amax() / b.amax() < 1e-10);
        let tensor = fundamental_tensor(&f, &x, &y).unwrap();
        assert!((tensor - g.at(&x).unwrap()).amax() < 1e-12);
    }

    #[test]
    fn spray_is_two_homogeneous() {
        let f = FinslerFunction::new(3, |x, y| {
            let a = crate::jets::dot(y, y).sqrt()?;
            Ok(a * (&x[0] * 0.2 + 1.0) + &y[1] * 0.1)
        });
        let (x, y) = ([0.3, 0.1, -0.2], [1.0, 0.4, 0.2]);
        let s1 = spray_finsler(&f, &x, &y).unwrap();
        let s2 = spray_finsler(&f, &x, &[2.0, 0.8, 0.4]).unwrap();
        assert!((s2 - s1 * 4.0).amax() < 1e-12);
    }

    #[test]
    fn probe_set_size() {
        assert_eq!(probe_vectors(3).len(), 9);
        assert_eq!(probe_vectors(4).len(), 16);
    }

    #[test]
    fn spray_fit_on_euclidean_is_zero() {
        let fit = fit_spray_form(&MetricField::euclidean(3), &[0.1, 0.0, 0.2], &probe_vectors(3))
            .unwrap();
        assert_eq!(fit.theta.amax(), 0.0);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn zero_form_is_trivially_related() {
        let fit =
            fit_dually_related(&MetricField::euclidean(3), &OneFormField::zero(3), &[0.1, 0.2, 0.3])
                .unwrap();
        assert_eq!(fit.c, 0.0);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn conditions_vanish_for_euclidean_and_zero_form() {
        let k = KTriple {
            k1: 0.3,
            k2: -0.2,
            k3: 0.1,
        };
        let r = verify_flatness_conditions(
            &MetricField::euclidean(3),
            &OneFormField::zero(3),
            &DVector::zeros(3),
            0.0,
            k,
            &[0.1, 0.2, 0.3],
            &[1.0, 0.0, -1.0],
        )
        .unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn convexity_of_euclidean_norm() {
        let dom = ChartDomain::ball(3, 0.5);
        let m = strong_convexity_probe(&euclidean_norm(3), &dom, 20, 7).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }
}
