//! Quadrature solutions `φ(s) = √((1 + k₁s²)(1 + 2ε∫₀ˢ h))` and natural
//! domain detection.

use std::sync::Arc;

use super::kernel::f_factor_jet;
use super::{KParams, PhiFunction};
use crate::error::{Error, Result, Tag};
use crate::jets::Jet2;
use crate::quad::{adaptive_simpson, smooth_integral, SIMPSON_TOL};
use crate::univariate::Univariate;

/// Domain searches stop at `|s| = S_CAP`.
pub const S_CAP: f64 = 2.0;

const SCAN_STEPS: usize = 200;
const BISECTIONS: usize = 50;
const DOMAIN_SHRINK: f64 = 0.95;

pub type PhiIntegrand = Arc<dyn Fn(&Jet2) -> Result<Jet2> + Send + Sync>;

/// `√((1 + k₁s²)(1 + 2ε∫₀ˢ h(σ)dσ))`. The integral value uses the fixed-node
/// rule; its derivatives come from `h` at the endpoint.
pub fn quadrature_phi(k1: f64, eps: f64, h: PhiIntegrand) -> Univariate {
    Univariate::new(move |s| {
        let hf = |sigma: f64| Ok(h(&Jet2::constant(sigma))?.value());
        let i = smooth_integral(hf, 0.0, s)?;
        let hs = h(&Jet2::variable(s, 0, 1))?;
        let w = Jet2::from_parts(
            1.0 + 2.0 * eps * i,
            vec![2.0 * eps * hs.value()],
            vec![2.0 * eps * hs.d(0)],
        );
        let t = Jet2::variable(s, 0, 1);
        let phi = ((t.square() * k1 + 1.0) * w).sqrt().tag("phi radicand")?;
        Ok([phi.value(), phi.d(0), phi.dd(0, 0)])
    })
}

/// `h(σ) = (1 + k₁σ²)^{−3/2} f(σ/√(1 + k₁σ²))`.
fn general_integrand(k: KParams) -> PhiIntegrand {
    let d = k.invariants();
    let k1 = k.k1;
    Arc::new(move |sigma: &Jet2| {
        let p = sigma.square() * k1 + 1.0;
        let w = sigma * p.powf(-0.5).tag("1 + k₁s²")?;
        Ok(p.powf(-1.5)? * f_factor_jet(&d, &w)?)
    })
}

/// Scans outward from 0 for the first failure or nonpositive value, bisects
/// the crossing and keeps 95% of it. Returns `(lo, hi)`.
pub fn natural_domain(f: &Univariate, cap: f64) -> (f64, f64) {
    let ok = |s: f64| matches!(f.eval(s), Ok(v) if v.iter().all(|x| x.is_finite()) && v[0] > 0.0);
    let edge = |dir: f64| {
        let h = cap / SCAN_STEPS as f64;
        let mut good = 0.0;
        for i in 1..=SCAN_STEPS {
            let s = dir * h * i as f64;
            if !ok(s) {
                let mut bad = s;
                for _ in 0..BISECTIONS {
                    let mid = 0.5 * (good + bad);
                    if ok(mid) {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                return DOMAIN_SHRINK * good;
            }
            good = s;
        }
        dir * cap
    };
    (edge(-1.0), edge(1.0))
}

/// The quadrature solution with initial data `φ(0) = 1, φ′(0) = ε`, on its
/// natural domain.
pub fn solve_phi(k: KParams) -> Result<PhiFunction> {
    let f = quadrature_phi(k.k1, k.eps, general_integrand(k));
    let (lo, hi) = natural_domain(&f, S_CAP);
    if lo >= 0.0 || hi <= 0.0 {
        return Err(Error::OutOfRange {
            what: "empty natural domain".into(),
            arg: 0.0,
            lo,
            hi,
        });
    }
    Ok(PhiFunction::new(f, lo, hi, k.eps))
}

/// `φ(s)` by the fixed-node rule.
pub fn solve_phi_at(k: KParams, s: f64) -> Result<f64> {
    quadrature_phi(k.k1, k.eps, general_integrand(k)).value(s)
}

/// `φ(s)` by adaptive Simpson, as an independent reference value.
pub fn solve_phi_reference(k: KParams, s: f64) -> Result<f64> {
    let h = general_integrand(k);
    let i = adaptive_simpson(|t| Ok(h(&Jet2::constant(t))?.value()), 0.0, s, SIMPSON_TOL)?;
    let rad = (1.0 + k.k1 * s * s) * (1.0 + 2.0 * k.eps * i);
    if rad <= 0.0 {
        return Err(Error::Domain {
            op: "sqrt",
            arg: rad,
            tag: Some("phi radicand".into()),
        });
    }
    Ok(rad.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::ode_residual;

    #[test]
    fn flat_case_hand_value() {
        let k = KParams::new(0.0, 0.0, 0.0, 0.5).unwrap();
        assert!((solve_phi_at(k, 0.21).unwrap() - 1.1).abs() < 1e-14);
        let phi = solve_phi(k).unwrap();
        let (lo, hi) = phi.domain();
        assert!((lo + 0.95).abs() < 1e-9, "{lo}");
        assert_eq!(hi, S_CAP);
    }

    #[test]
    fn shear_case_matches_closed_form() {
        let kappa = 0.7;
        let k = KParams::new(kappa, -kappa, 0.0, 0.4).unwrap();
        let phi = solve_phi(k).unwrap();
        for s in phi.grid(21) {
            let exact = (1.0 + 0.8 * s + kappa * s * s).sqrt();
            assert!((phi.value(s).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn both_quadratures_agree() {
        let k = KParams::new(0.3, -0.4, 0.25, 0.8).unwrap();
        for s in [-0.3, 0.1, 0.45] {
            let a = solve_phi_at(k, s).unwrap();
            let b = solve_phi_reference(k, s).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_vanishes_on_natural_domain() {
        let k = KParams::new(-0.6, 0.3, 0.4, 0.7).unwrap();
        let phi = solve_phi(k).unwrap();
        for s in phi.grid(30) {
            assert!(ode_residual(&phi, k.triple(), s).unwrap().abs() < 1e-9, "s={s}");
        }
        let z = phi.eval(0.0).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 0.7).abs() < 1e-12);
    }
}
