//! The profile equation
//!
//! ```text
//! s(k₂ − k₃s²)(φφ′ − sφ′² − sφφ″) − (φ′² + φφ″) + k₁φ(φ − sφ′) = 0,
//! φ(0) = 1, φ′(0) = ε,
//! ```
//!
//! its two-parameter symmetry group, invariants, quadrature solutions, the
//! elementary closed forms and an independent IVP oracle.

mod elementary;
mod kernel;
mod ode;
mod solve;

pub use elementary::{
    classify_elementary, elementary_phi, elementary_solution, ElementaryCase, MAX_SERIES_N,
};
pub use kernel::{f_factor, f_factor_jet, f_factor_printed_double_root, KernelCase};
pub use ode::{ode_oracle, ODE_TOL};
pub use solve::{
    natural_domain, quadrature_phi, solve_phi, solve_phi_at, solve_phi_reference, PhiIntegrand,
    S_CAP,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet2;
use crate::univariate::Univariate;

/// Zero tests on the invariants use this absolute tolerance.
pub const ZERO_TOL: f64 = 1e-12;

/// Relative bound on `φ″` below which a grid node counts as flat.
pub const FLAT_TOL: f64 = 1e-9;

/// `(k₁, k₂, k₃)` without initial data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KTriple {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl KTriple {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Self {
        KTriple { k1, k2, k3 }
    }

    pub fn invariants(&self) -> InvariantTriple {
        invariants(*self)
    }
}

/// Equation constants together with the initial slope `ε = φ′(0) ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub eps: f64,
}

impl KParams {
    pub fn new(k1: f64, k2: f64, k3: f64, eps: f64) -> Result<Self> {
        if ![k1, k2, k3, eps].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite constant".into()));
        }
        if eps == 0.0 {
            return Err(Error::InvalidParameter("initial slope must be nonzero".into()));
        }
        let k = KParams { k1, k2, k3, eps };
        k.invariants();
        Ok(k)
    }

    pub fn triple(&self) -> KTriple {
        KTriple::new(self.k1, self.k2, self.k3)
    }

    pub fn invariants(&self) -> InvariantTriple {
        invariants(self.triple())
    }
}

/// `(Δ₁, Δ₂, Δ₃) = (k₂² + 4k₃, k₂ − 2k₁, k₁² − k₁k₂ − k₃)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantTriple {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl InvariantTriple {
    /// `Δ₂² − 4Δ₃ − Δ₁`, zero up to rounding.
    pub fn identity_defect(&self) -> f64 {
        self.d2 * self.d2 - 4.0 * self.d3 - self.d1
    }

    pub fn signs(&self) -> [i8; 3] {
        [sign(self.d1), sign(self.d2), sign(self.d3)]
    }
}

pub fn sign(v: f64) -> i8 {
    if v.abs() <= ZERO_TOL {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

pub fn invariants(k: KTriple) -> InvariantTriple {
    let t = InvariantTriple {
        d1: k.k2 * k.k2 + 4.0 * k.k3,
        d2: k.k2 - 2.0 * k.k1,
        d3: k.k1 * k.k1 - k.k1 * k.k2 - k.k3,
    };
    let scale = 1.0_f64
        .max(t.d2 * t.d2)
        .max(t.d3.abs() * 4.0)
        .max(t.d1.abs())
        .max(k.k1 * k.k1);
    assert!(
        t.identity_defect().abs() <= 1e-12 * scale,
        "invariant identity violated: {t:?}"
    );
    t
}

/// Normalized equation residual at `s` given `(φ, φ′, φ″)`.
pub fn ode_residual_from(k: KTriple, s: f64, [p, dp, ddp]: [f64; 3]) -> f64 {
    let a = s * (k.k2 - k.k3 * s * s);
    let lhs = a * (p * dp - s * dp * dp - s * p * ddp) - (dp * dp + p * ddp)
        + k.k1 * p * (p - s * dp);
    lhs / (p * p + dp * dp + ddp * ddp + 1.0)
}

/// Normalized equation residual of `φ` at `s`.
pub fn ode_residual(phi: &PhiFunction, k: KTriple, s: f64) -> Result<f64> {
    Ok(ode_residual_from(k, s, phi.eval(s)?))
}

/// A positive profile on `(lo, hi)` with its first two derivatives.
#[derive(Clone)]
pub struct PhiFunction {
    lo: f64,
    hi: f64,
    eps: f64,
    f: Univariate,
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFunction")
            .field("domain", &(self.lo, self.hi))
            .field("eps", &self.eps)
            .finish()
    }
}

impl PhiFunction {
    pub fn new(f: Univariate, lo: f64, hi: f64, eps: f64) -> Self {
        PhiFunction { lo, hi, eps, f }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Declared `φ′(0)`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn contains(&self, s: f64) -> bool {
        self.lo <= s && s <= self.hi
    }

    pub fn eval(&self, s: f64) -> Result<[f64; 3]> {
        if !self.contains(s) {
            return Err(Error::OutOfRange {
                what: "phi argument".into(),
                arg: s,
                lo: self.lo,
                hi: self.hi,
            });
        }
        self.f.eval(s)
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?[0])
    }

    pub fn apply(&self, s: &Jet2) -> Result<Jet2> {
        let [f0, f1, f2] = self.eval(s.value())?;
        Ok(s.chain(f0, f1, f2))
    }

    /// Domain-checked univariate view, for use inside Finsler functions.
    pub fn univariate(&self) -> Univariate {
        let phi = self.clone();
        Univariate::new(move |s| phi.eval(s))
    }

    /// The underlying evaluator without the domain check.
    pub fn raw(&self) -> &Univariate {
        &self.f
    }

    pub fn restrict(&self, lo: f64, hi: f64) -> Result<PhiFunction> {
        if lo < self.lo || hi > self.hi || lo > hi {
            return Err(Error::OutOfRange {
                what: format!("requested interval [{lo}, {hi}] exceeds achievable interval"),
                arg: if lo < self.lo { lo } else { hi },
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(PhiFunction {
            lo,
            hi,
            ..self.clone()
        })
    }

    /// `points` equally spaced nodes across the domain, infinite ends
    /// truncated to `±S_CAP`.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let lo = self.lo.max(-S_CAP);
        let hi = self.hi.min(S_CAP);
        if points <= 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..points)
            .map(|i| match i {
                _ if i + 1 == points => hi,
                _ => lo + (hi - lo) * i as f64 / (points - 1) as f64,
            })
            .collect()
    }

    /// Largest normalized residual on a grid.
    pub fn max_residual(&self, k: KTriple, grid: &[f64]) -> Result<f64> {
        grid.iter()
            .map(|&s| ode_residual(self, k, s).map(f64::abs))
            .try_fold(0.0_f64, |acc, r| Ok(acc.max(r?)))
    }
}

/// Warns when `φ″` vanishes on the whole grid, the only Riemannian-type
/// indicator the sample data supports.
pub fn riemannian_type_warning(phi: &PhiFunction, grid: &[f64]) -> Result<Option<String>> {
    for &s in grid {
        let [p, dp, ddp] = phi.eval(s)?;
        if ddp.abs() > FLAT_TOL * p.abs().max(dp.abs()).max(1.0) {
            return Ok(None);
        }
    }
    Ok(Some(
        "second derivative of phi vanishes on the sample grid; the metric may be of Riemannian type"
            .into(),
    ))
}

/// `g_u(φ)(s) = √(1 + us²) φ(s/√(1 + us²))`.
pub fn apply_gu(phi: &PhiFunction, u: f64) -> Result<PhiFunction> {
    if u == 0.0 {
        return Ok(phi.clone());
    }
    let inner = phi.clone();
    let f = Univariate::from_jet(move |t| {
        let p = t.square() * u + 1.0;
        let root = p.sqrt()?;
        let w = t / &root;
        Ok(root * inner.apply(&w)?)
    });
    // s ↦ s/√(1+us²) is increasing; invert each endpoint.
    let back = |w: f64| {
        let d = 1.0 - u * w * w;
        if w.is_infinite() {
            if u < 0.0 {
                w.signum() / (-u).sqrt()
            } else {
                w
            }
        } else if d > 0.0 {
            w / d.sqrt()
        } else {
            w.signum() * f64::INFINITY
        }
    };
    let (lo, hi) = phi.domain();
    Ok(PhiFunction::new(f, back(lo), back(hi), phi.eps()))
}

/// `h_v(φ)(s) = φ(vs)`.
pub fn apply_hv(phi: &PhiFunction, v: f64) -> Result<PhiFunction> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter("h_v needs finite v ≠ 0".into()));
    }
    let inner = phi.clone();
    let f = Univariate::from_jet(move |t| inner.apply(&(t * v)));
    let (lo, hi) = phi.domain();
    let (a, b) = (lo / v, hi / v);
    Ok(PhiFunction::new(f, a.min(b), a.max(b), phi.eps() * v))
}

/// `(k₁ + u, k₂ + 2u, k₃ − k₂u − u²)`, slope unchanged.
pub fn transform_k_gu(k: KParams, u: f64) -> KParams {
    KParams {
        k1: k.k1 + u,
        k2: k.k2 + 2.0 * u,
        k3: k.k3 - k.k2 * u - u * u,
        eps: k.eps,
    }
}

/// `(v²k₁, v²k₂, v⁴k₃)` with slope `vε`.
pub fn transform_k_hv(k: KParams, v: f64) -> Result<KParams> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::InvalidParameter("h_v needs finite v ≠ 0".into()));
    }
    let v2 = v * v;
    Ok(KParams {
        k1: v2 * k.k1,
        k2: v2 * k.k2,
        k3: v2 * v2 * k.k3,
        eps: v * k.eps,
    })
}

/// The group element `g_u ∘ h_v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformElement {
    pub u: f64,
    pub v: f64,
}

impl TransformElement {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if v == 0.0 || !v.is_finite() || !u.is_finite() {
            return Err(Error::InvalidParameter("group element needs finite u, v ≠ 0".into()));
        }
        Ok(TransformElement { u, v })
    }

    pub fn identity() -> Self {
        TransformElement { u: 0.0, v: 1.0 }
    }

    /// `(u₁, v₁)·(u₂, v₂) = (u₁ + v₁²u₂, v₁v₂)`.
    pub fn compose(&self, other: &TransformElement) -> TransformElement {
        TransformElement {
            u: self.u + self.v * self.v * other.u,
            v: self.v * other.v,
        }
    }

    pub fn inverse(&self) -> TransformElement {
        TransformElement {
            u: -self.u / (self.v * self.v),
            v: 1.0 / self.v,
        }
    }

    pub fn apply(&self, phi: &PhiFunction) -> Result<PhiFunction> {
        apply_gu(&apply_hv(phi, self.v)?, self.u)
    }

    pub fn apply_k(&self, k: KParams) -> Result<KParams> {
        Ok(transform_k_gu(transform_k_hv(k, self.v)?, self.u))
    }
}
