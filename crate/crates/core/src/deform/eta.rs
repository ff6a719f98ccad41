//! Closed forms of `η(t) = exp{¼∫₀ᵗ (k₁ − k₂ + k₃τ)/(1 + k₂τ − k₃τ²) dτ}`.

use serde::{Deserialize, Serialize};

use super::{admissible_t_max, q_of};
use crate::error::{Error, Result};
use crate::phi::{KTriple, ZERO_TOL};
use crate::quad::{adaptive_simpson, SIMPSON_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EtaCase {
    /// `k₂ = k₃ = 0`
    Exponential,
    /// `k₃ = 0, k₂ ≠ 0`
    Power,
    /// `k₃ ≠ 0, Δ₁ > 0`
    RealRoots,
    /// `k₃ ≠ 0, Δ₁ = 0`
    DoubleRoot,
    /// `k₃ ≠ 0, Δ₁ < 0`
    ComplexRoots,
}

impl EtaCase {
    pub const ALL: [EtaCase; 5] = [
        EtaCase::Exponential,
        EtaCase::Power,
        EtaCase::RealRoots,
        EtaCase::DoubleRoot,
        EtaCase::ComplexRoots,
    ];

    pub fn classify(k: KTriple) -> EtaCase {
        let d1 = k.k2 * k.k2 + 4.0 * k.k3;
        if k.k3.abs() <= ZERO_TOL {
            if k.k2.abs() <= ZERO_TOL {
                EtaCase::Exponential
            } else {
                EtaCase::Power
            }
        } else if d1.abs() <= ZERO_TOL {
            EtaCase::DoubleRoot
        } else if d1 > 0.0 {
            EtaCase::RealRoots
        } else {
            EtaCase::ComplexRoots
        }
    }
}

fn domain_err(arg: f64, tag: &str) -> Error {
    Error::Domain {
        op: "eta",
        arg,
        tag: Some(tag.into()),
    }
}

fn finite(v: f64, tag: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain_err(v, tag))
    }
}

/// The case formulas as usually stated.
pub fn eta_closed_form(k: KTriple, t: f64) -> Result<f64> {
    closed_form(k, t, false)
}

/// The same formulas with the real-roots exponent corrected.
pub fn eta_corrected(k: KTriple, t: f64) -> Result<f64> {
    closed_form(k, t, true)
}

fn closed_form(k: KTriple, t: f64, corrected: bool) -> Result<f64> {
    let (k1, k2, k3) = (k.k1, k.k2, k.k3);
    let q = q_of(k, t);
    if q <= 0.0 {
        return Err(domain_err(q, "1 + k₂t − k₃t²"));
    }
    let v = match EtaCase::classify(k) {
        EtaCase::Exponential => (k1 * t / 4.0).exp(),
        EtaCase::Power => (1.0 + k2 * t).powf((k1 - k2) / (4.0 * k2)),
        EtaCase::RealRoots => {
            let r = (k2 * k2 + 4.0 * k3).sqrt();
            let e = (2.0 * k1 - k2) / (8.0 * r);
            let base = if corrected {
                (2.0 + (k2 + r) * t) / (2.0 + (k2 - r) * t)
            } else {
                ((r + k2) / (r - k2)).sqrt()
                    * ((r - k2 + 2.0 * k3 * t) / (r + k2 - 2.0 * k3 * t)).sqrt()
            };
            base.powf(e) / q.powf(0.125)
        }
        EtaCase::DoubleRoot => {
            let w = 2.0 + k2 * t;
            2.0_f64.powf(0.25) * ((k2 - 2.0 * k1) / (2.0 * k2) * (1.0 / w - 0.5)).exp()
                / w.powf(0.25)
        }
        EtaCase::ComplexRoots => {
            let r = (-(k2 * k2 + 4.0 * k3)).sqrt();
            let angle = ((k2 - 2.0 * k3 * t) / r).atan() - (k2 / r).atan();
            ((2.0 * k1 - k2) / (4.0 * r) * angle).exp() / q.powf(0.125)
        }
    };
    finite(v, "closed form")
}

/// `η(t)` by adaptive Simpson on the defining integral.
pub fn eta_reference(k: KTriple, t: f64) -> Result<f64> {
    let g = |s: f64| {
        let q = q_of(k, s);
        if q <= 0.0 {
            Err(domain_err(q, "1 + k₂t − k₃t²"))
        } else {
            Ok((k.k1 - k.k2 + k.k3 * s) / q)
        }
    };
    Ok((0.25 * adaptive_simpson(g, 0.0, t, SIMPSON_TOL)?).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaCaseReport {
    pub case: EtaCase,
    pub k: [f64; 3],
    pub t_hi: f64,
    pub points: usize,
    /// `∞` when the stated formula fails to evaluate somewhere on the grid.
    pub max_deviation: f64,
    pub max_corrected_deviation: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub tol: f64,
    pub rows: Vec<EtaCaseReport>,
    /// Cases with at least one flagged row.
    pub flagged_cases: Vec<EtaCase>,
    /// No row deviates after correction.
    pub corrected_pass: bool,
}

/// Parameter sweep covering every case, with the real-roots and
/// complex-roots cases sampled over small grids.
pub fn default_eta_sweep() -> Vec<KTriple> {
    let mut out = vec![
        KTriple::new(0.0, 0.0, 0.0),
        KTriple::new(1.0, 0.0, 0.0),
        KTriple::new(-1.0, 0.0, 0.0),
        KTriple::new(2.0, 1.0, 0.0),
        KTriple::new(0.0, -1.0, 0.0),
        KTriple::new(-0.7, 0.4, 0.0),
        KTriple::new(0.5, -0.6, -0.09),
        KTriple::new(-0.3, 1.0, -0.25),
    ];
    for k1 in [-0.8, 0.6] {
        for (k2, k3) in [(0.5, 0.3), (-0.4, 0.5), (1.2, -0.2), (0.0, 1.0)] {
            out.push(KTriple::new(k1, k2, k3));
        }
        for (k2, k3) in [(0.3, -0.5), (-0.6, -0.4), (0.0, -1.0)] {
            out.push(KTriple::new(k1, k2, k3));
        }
    }
    out
}

/// Compares both closed forms with the reference integral on `points`
/// values of `t ∈ [0, t_hi]`, `t_hi = min(1, 0.9·t_max)`.
pub fn report_eta(sweep: &[KTriple], points: usize, tol: f64) -> Result<EtaReport> {
    let mut rows = Vec::with_capacity(sweep.len());
    for &k in sweep {
        let t_hi = (0.9 * admissible_t_max(k)).min(1.0);
        let (mut dev, mut cdev) = (0.0_f64, 0.0_f64);
        for i in 0..points {
            let t = t_hi * i as f64 / (points.max(2) - 1) as f64;
            let reference = eta_reference(k, t)?;
            let gap = |v: Result<f64>| match v {
                Ok(v) => (v - reference).abs() / reference.abs().max(1.0),
                Err(_) => f64::INFINITY,
            };
            dev = dev.max(gap(eta_closed_form(k, t)));
            cdev = cdev.max(gap(eta_corrected(k, t)));
        }
        rows.push(EtaCaseReport {
            case: EtaCase::classify(k),
            k: [k.k1, k.k2, k.k3],
            t_hi,
            points,
            max_deviation: dev,
            max_corrected_deviation: cdev,
            flagged: dev.is_nan() || dev > tol,
        });
    }
    let mut flagged_cases: Vec<EtaCase> = Vec::new();
    for r in rows.iter().filter(|r| r.flagged) {
        if !flagged_cases.contains(&r.case) {
            flagged_cases.push(r.case);
        }
    }
    let corrected_pass = rows.iter().all(|r| r.max_corrected_deviation <= tol);
    Ok(EtaReport {
        tol,
        rows,
        flagged_cases,
        corrected_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::profile_from_k;

    #[test]
    fn hand_values() {
        assert_eq!(eta_closed_form(KTriple::new(1.0, 1.0, 0.0), 1.0).unwrap(), 1.0);
        let v = eta_closed_form(KTriple::new(2.0, 0.0, 0.0), 0.5).unwrap();
        assert!((v - 0.25_f64.exp()).abs() < 1e-15);
        for k in default_eta_sweep() {
            assert!((eta_corrected(k, 0.0).unwrap() - 1.0).abs() < 1e-15, "{k:?}");
        }
    }

    #[test]
    fn corrected_forms_match_reference_and_profile() {
        for k in default_eta_sweep() {
            let p = profile_from_k(k).unwrap();
            let hi = (0.9 * p.t_max).min(1.0);
            for i in 0..=8 {
                let t = hi * i as f64 / 8.0;
                let r = eta_reference(k, t).unwrap();
                let c = eta_corrected(k, t).unwrap();
                let g = p.eta.value(t).unwrap();
                assert!((c - r).abs() < 1e-9, "{k:?} t={t}: {c} vs {r}");
                assert!((g - r).abs() < 1e-9, "{k:?} t={t}: {g} vs {r}");
            }
        }
    }

    #[test]
    fn report_flags_only_the_real_roots_case() {
        let r = report_eta(&default_eta_sweep(), 21, 1e-6).unwrap();
        assert_eq!(r.flagged_cases, vec![EtaCase::RealRoots]);
        assert!(r.corrected_pass);
        for row in &r.rows {
            if row.case == EtaCase::Power && row.k == [2.0, 1.0, 0.0] {
                assert!(row.max_deviation < 1e-8);
            }
        }
    }
}
