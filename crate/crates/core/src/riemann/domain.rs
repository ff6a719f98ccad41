//! Seeded sampling of points and tangent vectors on a chart.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Points whose margin predicate falls below this are rejected.
pub const MIN_MARGIN: f64 = 1e-3;

/// Largest tolerated rejection rate before the domain is deemed misconfigured.
const MAX_REJECTION: f64 = 0.2;

pub type SamplePair = (Vec<f64>, Vec<f64>);

type Margin = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Deterministic generator for check `stream` under a run `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A ball in the chart, optionally cut down by a margin predicate that must
/// stay at or above [`MIN_MARGIN`] (e.g. `1 + k₂b² − k₃b⁴` away from zero).
#[derive(Clone)]
pub struct ChartDomain {
    pub center: Vec<f64>,
    pub radius: f64,
    margin: Option<Margin>,
}

impl fmt::Debug for ChartDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartDomain")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("has_margin", &self.margin.is_some())
            .finish()
    }
}

impl ChartDomain {
    pub fn ball(n: usize, radius: f64) -> Self {
        ChartDomain {
            center: vec![0.0; n],
            radius,
            margin: None,
        }
    }

    pub fn with_margin(mut self, margin: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.margin = Some(Arc::new(margin));
        self
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }

    pub fn accepts(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        d2 <= self.radius * self.radius
            && self.margin.as_ref().is_none_or(|m| m(x) >= MIN_MARGIN)
    }

    /// Uniform point in the ball (before the margin predicate).
    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n();
        let dir = unit_vector(rng, n);
        let r = self.radius * rng.gen::<f64>().powf(1.0 / n as f64);
        dir.iter().zip(&self.center).map(|(d, c)| c + r * d).collect()
    }

    pub fn sample_points<R: Rng>(&self, rng: &mut R, count: usize) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        let cap = count.saturating_mul(10).max(100);
        while out.len() < count && attempts < cap {
            attempts += 1;
            let x = self.draw(rng);
            if self.accepts(&x) {
                out.push(x);
            }
        }
        let rejected = attempts - out.len();
        if out.len() < count || (rejected as f64) > MAX_REJECTION * attempts as f64 {
            return Err(Error::DomainRejection { rejected, attempts });
        }
        Ok(out)
    }

    /// `(x, y)` pairs with `y` uniform on the unit sphere scaled by a factor in
    /// `[0.5, 2]`.
    pub fn sample_pairs<R: Rng>(&self, rng: &mut R, count: usize) -> Result<Vec<SamplePair>> {
        let points = self.sample_points(rng, count)?;
        let n = self.n();
        Ok(points
            .into_iter()
            .map(|x| (x, tangent_vector(rng, n)))
            .collect())
    }
}

fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm <= 1.0 && norm > 1e-3 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Random tangent vector, never shorter than 0.5.
pub fn tangent_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let scale = rng.gen_range(0.5..=2.0);
    unit_vector(rng, n).into_iter().map(|a| a * scale).collect()
}
