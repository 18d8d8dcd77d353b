//! JSON configuration schemas for every subcommand.

use std::path::PathBuf;

use minimaxdl::bounds::{
    CcrbParams, GaussianSparseParams, GeneralCovParams, LowerBoundFamily, MseUpperParams,
    SparseSnrParams,
};
use minimaxdl::io::LawDescriptor;
use minimaxdl::model::{CoefficientModel, DictionaryMatrix, NonzeroLaw};
use minimaxdl::rng::rng_from_seed;
use minimaxdl::{Dictionary64, Error, Result};
use serde::{Deserialize, Serialize};

/// `bounds eval` configuration: the bound id plus that bound's parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "bound_id", rename_all = "snake_case")]
pub enum BoundEvalConfig {
    Thm1(GeneralCovParams<f64>),
    Cor1(SparseSnrParams<f64>),
    Thm2(GaussianSparseParams<f64>),
    Thm3Upper(MseUpperParams<f64>),
    Ccrb(CcrbParams<f64>),
}

/// `bounds sample-size` configuration: target MSE plus the sample-size-free
/// parameters of one of the invertible lower bounds.
#[derive(Debug, Clone, Deserialize)]
pub struct SampleSizeConfig {
    pub target_eps: f64,
    #[serde(flatten)]
    pub bound: SampleSizeBound,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "bound_id", rename_all = "snake_case")]
pub enum SampleSizeBound {
    Thm1 {
        m: usize,
        p: usize,
        sigma2: f64,
        cov_spectral_norm: f64,
        r: f64,
    },
    Cor1 {
        m: usize,
        p: usize,
        snr: f64,
        r: f64,
        rip_ok: bool,
    },
    Thm2 {
        m: usize,
        p: usize,
        s: usize,
        snr: f64,
        r: f64,
    },
}

impl SampleSizeBound {
    pub fn family(&self) -> LowerBoundFamily<f64> {
        match *self {
            SampleSizeBound::Thm1 {
                m,
                p,
                sigma2,
                cov_spectral_norm,
                r,
            } => LowerBoundFamily::GeneralCov(GeneralCovParams {
                m,
                p,
                n: 1,
                sigma2,
                cov_spectral_norm,
                r,
            }),
            SampleSizeBound::Cor1 { m, p, snr, r, rip_ok } => {
                LowerBoundFamily::SparseSnr(SparseSnrParams {
                    m,
                    p,
                    n: 1,
                    snr,
                    r,
                    rip_ok,
                })
            }
            SampleSizeBound::Thm2 { m, p, s, snr, r } => {
                LowerBoundFamily::GaussianSparse(GaussianSparseParams {
                    m,
                    p,
                    s,
                    n: 1,
                    snr,
                    r,
                })
            }
        }
    }
}

fn default_max_attempts() -> usize {
    minimaxdl::packing::DEFAULT_MAX_ATTEMPTS
}

/// `packing build` configuration.
#[derive(Debug, Clone, Deserialize)]
pub struct PackingConfig {
    /// Vector dimension `d`.
    pub d: usize,
    /// Number of code vectors `P`.
    pub size: usize,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    #[serde(default)]
    pub master_seed: u64,
}

/// Where a dictionary matrix comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatrixSource {
    /// Square identity of order `m`.
    Identity { m: usize },
    /// Columns `e_{j mod m}`, any `p >= 1`.
    RepeatedIdentity { m: usize, p: usize },
    /// Seeded random unit columns.
    RandomUnit { m: usize, p: usize, seed: u64 },
    /// Headerless CSV matrix with unit columns.
    Csv { path: PathBuf },
}

impl MatrixSource {
    pub fn load(&self) -> Result<Dictionary64> {
        match self {
            MatrixSource::Identity { m } => Ok(DictionaryMatrix::identity(*m)),
            MatrixSource::RepeatedIdentity { m, p } => {
                if p < m {
                    return Err(Error::InvalidParameter(format!(
                        "repeated identity needs p >= m, got m={m}, p={p}"
                    )));
                }
                Ok(DictionaryMatrix::repeated_identity(*m, *p))
            }
            MatrixSource::RandomUnit { m, p, seed } => {
                let mut rng = rng_from_seed(*seed);
                Ok(DictionaryMatrix::random_unit_columns(*m, *p, &mut rng))
            }
            MatrixSource::Csv { path } => {
                let raw = minimaxdl::io::read_matrix_csv::<f64>(path)?;
                DictionaryMatrix::new(raw)
            }
        }
    }
}

/// `ensemble build` configuration.
#[derive(Debug, Clone, Deserialize)]
pub struct EnsembleBuildConfig {
    pub reference: MatrixSource,
    pub epsilon: f64,
    /// Requested ensemble size `L'`.
    pub members: usize,
    /// Neighborhood radius; enforces `epsilon <= r^2/320` when present.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RipMethodChoice {
    #[default]
    Exact,
    MonteCarlo,
}

fn default_rip_trials() -> usize {
    10_000
}

/// `rip estimate` configuration.
#[derive(Debug, Clone, Deserialize)]
pub struct RipConfig {
    pub matrix: MatrixSource,
    pub s: usize,
    #[serde(default)]
    pub method: RipMethodChoice,
    #[serde(default = "default_rip_trials")]
    pub trials: usize,
    /// Enumeration cap for the exact method.
    #[serde(default)]
    pub cap: Option<u128>,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerChoice {
    Threshold,
    OracleLs,
}

impl LearnerChoice {
    pub fn label(&self) -> &'static str {
        match self {
            LearnerChoice::Threshold => "threshold",
            LearnerChoice::OracleLs => "oracle_ls",
        }
    }
}

/// Coefficient model piece shared by the simulation configs.
#[derive(Debug, Clone, Deserialize)]
pub struct SparseModelConfig {
    pub m: usize,
    pub p: usize,
    pub s: usize,
    pub nonzero_law: LawDescriptor,
    pub sigma2: f64,
}

impl SparseModelConfig {
    pub fn coefficient_model(&self) -> Result<CoefficientModel<f64>> {
        let law = match &self.nonzero_law {
            LawDescriptor::Rademacher => NonzeroLaw::Rademacher,
            LawDescriptor::Gaussian { sigma_a2 } => NonzeroLaw::Gaussian {
                variance: *sigma_a2,
            },
        };
        CoefficientModel::sparse_uniform(self.p, self.s, law)
    }

    pub fn sigma_a2(&self) -> f64 {
        match &self.nonzero_law {
            LawDescriptor::Rademacher => 1.0,
            LawDescriptor::Gaussian { sigma_a2 } => *sigma_a2,
        }
    }

    /// Exact SNR for any unit-column dictionary:
    /// `s sigma_a^2 / (m sigma^2)`.
    pub fn snr(&self) -> f64 {
        self.s as f64 * self.sigma_a2() / (self.m as f64 * self.sigma2)
    }
}

/// `simulate mse` configuration.
#[derive(Debug, Clone, Deserialize)]
pub struct MseConfig {
    #[serde(flatten)]
    pub model: SparseModelConfig,
    /// Neighborhood radius used when evaluating the bounds columns.
    pub r: f64,
    /// True dictionary the batches are generated from.
    pub dictionary: MatrixSource,
    pub learners: Vec<LearnerChoice>,
    pub n_list: Vec<usize>,
    /// Optional SNR sweep axis; each value rescales the noise variance to
    /// `s sigma_a^2 / (m snr)` while keeping the coefficient law fixed.
    #[serde(default)]
    pub snr_list: Option<Vec<f64>>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    ConstantD0,
    OracleTrue,
    OracleLs,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SideInfoChoice {
    #[default]
    Coefficients,
    Supports,
}

/// `simulate fano` configuration.
#[derive(Debug, Clone, Deserialize)]
pub struct FanoConfig {
    #[serde(flatten)]
    pub model: SparseModelConfig,
    pub reference: MatrixSource,
    pub epsilon: f64,
    pub members: usize,
    #[serde(default)]
    pub radius: Option<f64>,
    /// Samples per batch.
    pub n: usize,
    /// Detection trials.
    pub trials: usize,
    pub estimator: EstimatorChoice,
    #[serde(default)]
    pub side_info: SideInfoChoice,
    /// Monte Carlo support-averaging trials; exact enumeration when absent.
    #[serde(default)]
    pub support_trials: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
}
