//! Smooth functions of one real variable carried as `(f, f', f'')`.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::jets::Jet2;

type Eval3 = dyn Fn(f64) -> Result<[f64; 3]> + Send + Sync;

/// A univariate function that reports its value and first two derivatives.
/// Composing it with a [`Jet2`] applies the chain rule.
#[derive(Clone)]
pub struct Univariate {
    f: Arc<Eval3>,
}

impl fmt::Debug for Univariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Univariate")
    }
}

impl Univariate {
    pub fn new(f: impl Fn(f64) -> Result<[f64; 3]> + Send + Sync + 'static) -> Self {
        Univariate { f: Arc::new(f) }
    }

    /// Builds from a jet expression; derivatives come from seeding `t` alone.
    pub fn from_jet(g: impl Fn(&Jet2) -> Result<Jet2> + Send + Sync + 'static) -> Self {
        Univariate::new(move |t| {
            let j = g(&Jet2::variable(t, 0, 1))?;
            Ok([j.value(), j.d(0), j.dd(0, 0)])
        })
    }

    pub fn constant(c: f64) -> Self {
        Univariate::new(move |_| Ok([c, 0.0, 0.0]))
    }

    /// `Σ c_k t^k`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Univariate::new(move |t| {
            let (mut f0, mut f1, mut f2) = (0.0, 0.0, 0.0);
            for &c in coeffs.iter().rev() {
                f2 = f2 * t + 2.0 * f1;
                f1 = f1 * t + f0;
                f0 = f0 * t + c;
            }
            Ok([f0, f1, f2])
        })
    }

    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        (self.f)(t)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?[0])
    }

    pub fn apply(&self, t: &Jet2) -> Result<Jet2> {
        let [f0, f1, f2] = self.eval(t.value())?;
        Ok(t.chain(f0, f1, f2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        // 1 + 2t + 3t²
        let p = Univariate::polynomial(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0).unwrap(), [17.0, 14.0, 6.0]);
    }

    #[test]
    fn from_jet_matches_polynomial() {
        let a = Univariate::from_jet(|t| Ok(1.0 + t * 2.0 + t.square() * 3.0));
        assert_eq!(a.eval(-0.5).unwrap(), [0.75, -1.0, 6.0]);
    }
}
