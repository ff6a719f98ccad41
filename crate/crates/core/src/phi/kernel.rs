//! The kernels `f(s)` with `u′ = 2εf`, where `u = ψ²` solves the reduced
//! equation `(1 + Δ₂s² + Δ₃s⁴)u″ = s(Δ₂ + Δ₃s²)u′`.

use serde::{Deserialize, Serialize};

use super::{InvariantTriple, ZERO_TOL};
use crate::error::{Result, Tag};
use crate::jets::Jet2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelCase {
    /// `Δ₃ = 0, Δ₁ = 0`
    Constant,
    /// `Δ₃ = 0, Δ₁ ≠ 0`
    Root,
    /// `Δ₃ ≠ 0, Δ₁ > 0`
    RealRoots,
    /// `Δ₃ ≠ 0, Δ₁ = 0`
    DoubleRoot,
    /// `Δ₃ ≠ 0, Δ₁ < 0`
    ComplexRoots,
}

impl KernelCase {
    pub const ALL: [KernelCase; 5] = [
        KernelCase::Constant,
        KernelCase::Root,
        KernelCase::RealRoots,
        KernelCase::DoubleRoot,
        KernelCase::ComplexRoots,
    ];

    /// Branch selection. The flag reports parameters inside the zero band
    /// that are not exactly zero.
    pub fn classify(d: &InvariantTriple) -> (KernelCase, bool) {
        let z3 = d.d3.abs() <= ZERO_TOL;
        let z1 = d.d1.abs() <= ZERO_TOL;
        let near = (z3 && d.d3 != 0.0) || (z1 && d.d1 != 0.0);
        let case = match (z3, z1) {
            (true, true) => KernelCase::Constant,
            (true, false) => KernelCase::Root,
            (false, true) => KernelCase::DoubleRoot,
            (false, false) if d.d1 > 0.0 => KernelCase::RealRoots,
            (false, false) => KernelCase::ComplexRoots,
        };
        (case, near)
    }
}

/// `f` evaluated on a jet.
pub fn f_factor_jet(d: &InvariantTriple, s: &Jet2) -> Result<Jet2> {
    let (d1, d2, d3) = (d.d1, d.d2, d.d3);
    let t = s.square();
    match KernelCase::classify(d).0 {
        KernelCase::Constant => Ok(Jet2::constant(1.0)),
        KernelCase::Root => (&t * d2 + 1.0).sqrt().tag("1 + Δ₂s²"),
        KernelCase::RealRoots => {
            // (1 + c₊s²)^{¼+e}(1 + c₋s²)^{¼−e}, c± = (Δ₂ ± √Δ₁)/2, e = Δ₂/(4√Δ₁).
            let r = d1.sqrt();
            let e = d2 / (4.0 * r);
            let plus = root_factor(&(&t * (0.5 * (d2 + r)) + 1.0), 0.25 + e)?;
            let minus = root_factor(&(&t * (0.5 * (d2 - r)) + 1.0), 0.25 - e)?;
            Ok(plus * minus)
        }
        KernelCase::DoubleRoot => {
            let w = &t * d2 + 2.0;
            let e = (0.5 - w.recip().tag("2 + Δ₂s²")?).exp();
            Ok((&t * (0.5 * d2) + 1.0).sqrt().tag("1 + Δ₂s²/2")? * e)
        }
        KernelCase::ComplexRoots => {
            let q = &t * d2 + t.square() * d3 + 1.0;
            let r = (-d1).sqrt();
            let angle = ((&t * (2.0 * d3) + d2) / r).atan() - (d2 / r).atan();
            Ok(q.powf(0.25).tag("1 + Δ₂s² + Δ₃s⁴")? * (angle * (d2 / (2.0 * r))).exp())
        }
    }
}

/// `base^p`, continued through `base = 0` when `p` is a nonnegative integer.
fn root_factor(base: &Jet2, p: f64) -> Result<Jet2> {
    let m = p.round();
    if m >= 0.0 && (p - m).abs() <= 1e-12 {
        base.powi(m as i32)
    } else {
        base.powf(p).tag("1 + Δ₂s² + Δ₃s⁴")
    }
}

/// `f(s)`, normalized so that `f(0) = 1`.
pub fn f_factor(d: &InvariantTriple, s: f64) -> Result<f64> {
    Ok(f_factor_jet(d, &Jet2::constant(s))?.value())
}

/// The double-root kernel with the exponent sign as commonly printed,
/// `√(1 + Δ₂s²/2)·exp{1/(2 + Δ₂s²) − ½}`; kept for comparison only.
pub fn f_factor_printed_double_root(d: &InvariantTriple, s: f64) -> f64 {
    let t = s * s;
    (1.0 + 0.5 * d.d2 * t).sqrt() * (1.0 / (2.0 + d.d2 * t) - 0.5).exp()
}
