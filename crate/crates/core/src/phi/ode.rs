//! Independent oracle: Dormand–Prince integration of the reduced equation
//! `(1 + Δ₂w² + Δ₃w⁴)u″ = w(Δ₂ + Δ₃w²)u′`, `u(0) = 1`, `u′(0) = 2ε`, then
//! `φ(s) = √(1 + k₁s²)·√u(s/√(1 + k₁s²))`.

use super::KParams;
use crate::error::{Error, Result};

/// Local error tolerance per step (absolute plus relative).
pub const ODE_TOL: f64 = 1e-10;

const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 200_000;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Reduced {
    d2: f64,
    d3: f64,
}

impl Reduced {
    fn rhs(&self, w: f64, y: [f64; 2]) -> Option<[f64; 2]> {
        let w2 = w * w;
        let lead = 1.0 + self.d2 * w2 + self.d3 * w2 * w2;
        if lead <= 0.0 || !lead.is_finite() {
            return None;
        }
        Some([y[1], w * (self.d2 + self.d3 * w2) * y[1] / lead])
    }
}

/// Integrates from `w0` to `w1` starting at `y`.
fn integrate(sys: &Reduced, w0: f64, w1: f64, mut y: [f64; 2], h0: &mut f64) -> Result<[f64; 2]> {
    let singular = || Error::OdeSingular { lo: w0.min(w1), hi: w0.max(w1) };
    let dir = (w1 - w0).signum();
    let mut w = w0;
    let mut steps = 0;
    while (w1 - w) * dir > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(singular());
        }
        let clipped = (w1 - w).abs() <= *h0;
        let h = if clipped { w1 - w } else { *h0 * dir };
        let mut k = [[0.0; 2]; 7];
        for i in 0..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i) {
                yi[0] += h * A[i][j] * kj[0];
                yi[1] += h * A[i][j] * kj[1];
            }
            k[i] = sys.rhs(w + C[i] * h, yi).ok_or_else(singular)?;
        }
        let mut y5 = y;
        let mut err = 0.0_f64;
        for c in 0..2 {
            let (mut s5, mut s4) = (0.0, 0.0);
            for i in 0..7 {
                s5 += B5[i] * k[i][c];
                s4 += B4[i] * k[i][c];
            }
            y5[c] += h * s5;
            let scale = ODE_TOL * (1.0 + y[c].abs().max(y5[c].abs()));
            err = err.max((h * (s5 - s4)).abs() / scale);
        }
        if !err.is_finite() {
            return Err(singular());
        }
        if err <= 1.0 {
            w = if clipped { w1 } else { w + h };
            y = y5;
            if clipped {
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        *h0 = (h.abs() * factor).min(0.1);
        if *h0 < MIN_STEP {
            return Err(singular());
        }
    }
    Ok(y)
}

/// `φ` on `grid`, integrating outward from 0 in each direction.
pub fn ode_oracle(k: KParams, grid: &[f64]) -> Result<Vec<f64>> {
    let d = k.invariants();
    let sys = Reduced { d2: d.d2, d3: d.d3 };
    let mut out = vec![f64::NAN; grid.len()];
    for dir in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..grid.len())
            .filter(|&i| if dir > 0.0 { grid[i] >= 0.0 } else { grid[i] < 0.0 })
            .collect();
        idx.sort_by(|&a, &b| grid[a].abs().total_cmp(&grid[b].abs()));
        let (mut w, mut y, mut h) = (0.0, [1.0, 2.0 * k.eps], 1e-3);
        for i in idx {
            let s = grid[i];
            let p = 1.0 + k.k1 * s * s;
            if p <= 0.0 {
                return Err(Error::OdeSingular { lo: s.min(0.0), hi: s.max(0.0) });
            }
            let target = s / p.sqrt();
            y = integrate(&sys, w, target, y, &mut h)?;
            w = target;
            if y[0] <= 0.0 {
                return Err(Error::OdeSingular { lo: s.min(0.0), hi: s.max(0.0) });
            }
            out[i] = (p * y[0]).sqrt();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::solve_phi_at;

    #[test]
    fn flat_case_is_exact() {
        let k = KParams::new(0.0, 0.0, 0.0, 0.5).unwrap();
        let v = ode_oracle(k, &[0.21, -0.3, 0.0]).unwrap();
        assert!((v[0] - 1.1).abs() < 1e-12);
        assert!((v[1] - 0.7_f64.sqrt()).abs() < 1e-12);
        assert_eq!(v[2], 1.0);
    }

    #[test]
    fn agrees_with_quadrature() {
        for (a, b, c) in [(0.3, -0.4, 0.25), (-0.6, 0.3, 0.4), (0.5, 0.4, -0.3), (0.4, -0.6, -0.09)] {
            let k = KParams::new(a, b, c, 0.7).unwrap();
            let grid = [-0.4, -0.1, 0.2, 0.5];
            let v = ode_oracle(k, &grid).unwrap();
            for (s, x) in grid.iter().zip(v) {
                let y = solve_phi_at(k, *s).unwrap();
                assert!((x - y).abs() < 1e-8, "{k:?} s={s}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn singular_coefficient_is_reported() {
        // Δ₂ = −4 makes the leading coefficient vanish at w = ½.
        let k = KParams::new(0.0, -4.0, 0.0, 0.5).unwrap();
        assert!(matches!(ode_oracle(k, &[0.8]), Err(Error::OdeSingular { .. })));
    }
}
