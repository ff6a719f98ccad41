//! `solve-phi` tables and the η report.

use std::io::Write;

use serde::{Deserialize, Serialize};

use dflat_core::deform::{default_eta_sweep, report_eta, EtaReport};
use dflat_core::phi::{ode_residual, riemannian_type_warning, solve_phi, KParams};

use crate::report::SCHEMA_VERSION;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiRow {
    pub s: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable {
    pub k: KParams,
    pub domain: (f64, f64),
    pub rows: Vec<PhiRow>,
    pub warning: Option<String>,
}

impl PhiTable {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.residual.is_finite() && r.residual < tol)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn phi_table(k: KParams, points: usize) -> Result<PhiTable, CliError> {
    if points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }
    let phi = solve_phi(k)?;
    let grid = phi.grid(points);
    let rows = grid
        .iter()
        .map(|&s| {
            let [p, dp, ddp] = phi.eval(s)?;
            Ok(PhiRow {
                s,
                phi: p,
                dphi: dp,
                ddphi: ddp,
                residual: ode_residual(&phi, k.triple(), s)?.abs(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(PhiTable {
        k,
        domain: phi.domain(),
        warning: riemannian_type_warning(&phi, &grid)?,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaDocument {
    pub schema_version: u32,
    pub artifact_version: String,
    pub points: usize,
    #[serde(flatten)]
    pub report: EtaReport,
}

pub fn eta_document(points: usize, tol: f64) -> Result<EtaDocument, CliError> {
    if points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
    }
    Ok(EtaDocument {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        points,
        report: report_eta(&default_eta_sweep(), points, tol)?,
    })
}

impl EtaDocument {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["case", "k1", "k2", "k3", "t_hi", "max_deviation", "max_corrected_deviation", "flagged"])?;
        for r in &self.report.rows {
            w.write_record([
                serde_json::to_value(r.case)?.as_str().unwrap_or_default().to_string(),
                r.k[0].to_string(),
                r.k[1].to_string(),
                r.k[2].to_string(),
                r.t_hi.to_string(),
                r.max_deviation.to_string(),
                r.max_corrected_deviation.to_string(),
                r.flagged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
