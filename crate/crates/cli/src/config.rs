use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use dflat_core::catalog::{ExampleId, DEFAULT_LAMBDA, DEFAULT_MU};
use dflat_core::phi::KParams;

use crate::CliError;

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CaseId {
    Funk,
    FlatFamily,
    RelatedFamily,
    RandersFamily,
    SqrtMetric,
    Quadratic,
    Arcsin,
    Arcsinh,
    Quartic,
    Gaussian,
    DeformationLemmas,
    Reversibility,
    NegativeControl,
    Custom,
}

impl CaseId {
    pub fn describe(&self) -> &'static str {
        match self {
            CaseId::Funk => "Funk metric on the unit ball is dually flat",
            CaseId::FlatFamily => "projectively flat family has spray 2θy + α²θ^i (θ = 0 at μ = 0)",
            CaseId::RelatedFamily => "family 1-forms are dually related to the flat family",
            CaseId::RandersFamily => "Randers metrics built from the family are dually flat",
            CaseId::SqrtMetric => "F = √(α(α+β)) from the deformation is dually flat",
            CaseId::Quadratic => "F = √(α² + 2εαβ + κβ²) from the deformation (--kappa, --eps)",
            CaseId::Arcsin => "arcsin-type φ from the deformation is dually flat",
            CaseId::Arcsinh => "arcsinh-type φ from the deformation is dually flat",
            CaseId::Quartic => "quartic-root φ, k₃ = ±1 (--sign)",
            CaseId::Gaussian => "Gaussian-type φ, k₁ = ±1 (--sign)",
            CaseId::DeformationLemmas => "shear, conformal and rescale stage formulas against direct computation",
            CaseId::Reversibility => "forward deformation inverts the inverse deformation, b̄² = b²",
            CaseId::NegativeControl => "non-flat metrics and an unrelated form (expected to fail)",
            CaseId::Custom => "F from solve_phi and the inverse deformation for --k1 --k2 --k3 --eps",
        }
    }

    pub fn default_tol(&self) -> f64 {
        match self {
            CaseId::FlatFamily => 1e-8,
            CaseId::Reversibility => 1e-10,
            CaseId::SqrtMetric
            | CaseId::Quadratic
            | CaseId::Arcsin
            | CaseId::Arcsinh
            | CaseId::Quartic
            | CaseId::Gaussian
            | CaseId::Custom => 1e-5,
            _ => 1e-6,
        }
    }

    pub fn default_samples(&self) -> usize {
        match self {
            CaseId::Funk => 1000,
            CaseId::SqrtMetric
            | CaseId::Quadratic
            | CaseId::Arcsin
            | CaseId::Arcsinh
            | CaseId::Quartic
            | CaseId::Gaussian
            | CaseId::Custom => 500,
            CaseId::FlatFamily | CaseId::RelatedFamily => 100,
            _ => 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub case: CaseId,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Defaults depend on the case.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Defaults depend on the case.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    pub sign: i8,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub k1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub k2: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub k3: f64,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// The resolved configuration, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub case: CaseId,
    pub dim: usize,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub mu: f64,
    pub lambda: f64,
    /// `(k₁, k₂, k₃, ε)` when the case uses them.
    pub k: Option<[f64; 4]>,
    pub example: Option<ExampleId>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(a: &VerifyArgs) -> Result<Self, CliError> {
        let samples = a.samples.unwrap_or(a.case.default_samples());
        let tol = a.tol.unwrap_or(a.case.default_tol());
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
        }
        if samples == 0 {
            return Err(CliError::Config("--samples must be at least 1".into()));
        }
        if !(MIN_DIM..=MAX_DIM).contains(&a.dim) {
            return Err(CliError::Config(format!(
                "--dim must lie in {MIN_DIM}..={MAX_DIM}, got {}",
                a.dim
            )));
        }
        if a.sign != 1 && a.sign != -1 {
            return Err(CliError::Config(format!("--sign must be 1 or -1, got {}", a.sign)));
        }
        let example = match a.case {
            CaseId::SqrtMetric => Some(ExampleId::SqrtMetric),
            CaseId::Quadratic => Some(ExampleId::Quadratic {
                kappa: a.kappa,
                eps: a.eps.unwrap_or(1.0),
            }),
            CaseId::Arcsin => Some(ExampleId::Arcsin),
            CaseId::Arcsinh => Some(ExampleId::Arcsinh),
            CaseId::Quartic => Some(ExampleId::Quartic { sign: a.sign }),
            CaseId::Gaussian => Some(ExampleId::Gaussian { sign: a.sign }),
            _ => None,
        };
        let k = match (a.case, example) {
            (CaseId::Custom, _) => {
                let eps = a.eps.unwrap_or(1.0);
                KParams::new(a.k1, a.k2, a.k3, eps)?;
                Some([a.k1, a.k2, a.k3, eps])
            }
            (_, Some(id)) => {
                let k = id.params()?;
                Some([k.k1, k.k2, k.k3, k.eps])
            }
            _ => None,
        };
        Ok(RunConfig {
            command: "verify".into(),
            case: a.case,
            dim: a.dim,
            samples,
            tol,
            seed: a.seed,
            mu: a.mu.unwrap_or(DEFAULT_MU),
            lambda: a.lambda.unwrap_or(DEFAULT_LAMBDA),
            k,
            example,
            format: a.format,
        })
    }

    pub fn k_params(&self) -> Option<KParams> {
        self.k.map(|[k1, k2, k3, eps]| KParams { k1, k2, k3, eps })
    }
}
