//! Versioned report records shared by every subcommand.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One verified property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Plain statement of the property being checked.
    pub claim: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Aggregates residuals; passes when the largest is below `tol`.
    pub fn from_residuals(
        name: &str,
        claim: &str,
        tol: f64,
        residuals: impl IntoIterator<Item = f64>,
    ) -> Self {
        let (mut max, mut sum, mut count) = (0.0_f64, 0.0, 0usize);
        let mut finite = true;
        for r in residuals {
            finite &= r.is_finite();
            max = max.max(r);
            sum += r;
            count += 1;
        }
        CheckRecord {
            name: name.into(),
            claim: claim.into(),
            max_residual: max,
            mean_residual: if count == 0 { 0.0 } else { sum / count as f64 },
            samples: count,
            tol,
            pass: finite && count > 0 && max < tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(config: RunConfig, checks: Vec<CheckRecord>, notes: Vec<String>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            config,
            checks,
            notes,
            pass,
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// One row per check.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.checks {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregation() {
        let r = CheckRecord::from_residuals("a", "b", 1e-3, [1e-4, 3e-4]);
        assert_eq!(r.samples, 2);
        assert!((r.mean_residual - 2e-4).abs() < 1e-18);
        assert!(r.pass);
        let nan = CheckRecord::from_residuals("a", "b", 1e-3, [1e-4, f64::NAN]);
        assert!(!nan.pass);
        assert!(!CheckRecord::from_residuals("a", "b", 1.0, []).pass);
    }
}
