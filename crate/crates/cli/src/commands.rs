//! Subcommand implementations and the config-vs-runtime error split that
//! drives the exit code (2 for rejected configurations, 1 for runtime
//! failures).

use std::path::{Path, PathBuf};

use minimaxdl::bounds::{
    ccrb_report, gaussian_sparse_lower, general_cov_lower, required_sample_size,
    sparse_snr_lower, threshold_dl_mse_upper,
};
use minimaxdl::geometry::{
    rip_constant_exact_with_cap, rip_constant_monte_carlo, NeighborhoodSpec,
    DEFAULT_ENUMERATION_CAP,
};
use minimaxdl::infotheory::{
    empirical_error_probability, fano_floor_from_nats, mi_upper_given_support, mi_upper_given_x,
    SupportAverage,
};
use minimaxdl::io::{fmt_g17, read_ensemble_dir, write_atomic, write_ensemble_dir};
use minimaxdl::learners::{
    ConstantLearner, DictionaryLearner, OracleLsLearner, ThresholdLearner, TrueDictionaryLearner,
};
use minimaxdl::model::{coefficient_covariance, NoiseModel};
use minimaxdl::packing::{build_ensemble, build_packing, packing_failure_bound, verify_ensemble};
use minimaxdl::rng::{derive_seed, rng_from_seed};
use minimaxdl::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{
    BoundEvalConfig, EnsembleBuildConfig, EstimatorChoice, FanoConfig, MseConfig, PackingConfig,
    RipConfig, RipMethodChoice, SampleSizeConfig, SideInfoChoice,
};

/// A failed invocation, split by whether the configuration was rejected
/// (exit 2) or the computation itself failed (exit 1).
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(msg) | Failure::Runtime(msg) => msg,
        }
    }
}

/// Parameter-level errors reject the configuration; the rest are runtime.
pub fn classify(err: Error) -> Failure {
    match err {
        Error::DimensionMismatch(_)
        | Error::InvalidParameter(_)
        | Error::Precondition { .. }
        | Error::UnsupportedModel(_)
        | Error::UndefinedSnr
        | Error::EnumerationCap { .. }
        | Error::InfeasibleTarget(_) => Failure::Config(err.to_string()),
        other => Failure::Runtime(other.to_string()),
    }
}

pub fn load_config<T: DeserializeOwned>(path: Option<&PathBuf>) -> Result<T, Failure> {
    let path = path
        .ok_or_else(|| Failure::Config("missing --config PATH".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))
}

fn config_json(path: Option<&PathBuf>) -> Result<serde_json::Value, Failure> {
    let path = path.ok_or_else(|| Failure::Config("missing --config PATH".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))
}

/// Writes to `--out` when given (atomically), else to stdout.
fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, content.as_bytes())
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))
}

pub fn bounds_eval(
    config: Option<&PathBuf>,
    out: Option<&PathBuf>,
    csv: bool,
) -> Result<(), Failure> {
    let cfg: BoundEvalConfig = load_config(config)?;
    let (report, matrix) = match &cfg {
        BoundEvalConfig::Thm1(p) => (general_cov_lower(p).map_err(classify)?, None),
        BoundEvalConfig::Cor1(p) => (sparse_snr_lower(p).map_err(classify)?, None),
        BoundEvalConfig::Thm2(p) => (gaussian_sparse_lower(p).map_err(classify)?, None),
        BoundEvalConfig::Thm3Upper(p) => (threshold_dl_mse_upper(p).map_err(classify)?, None),
        BoundEvalConfig::Ccrb(p) => {
            let (report, matrix) = ccrb_report(p).map_err(classify)?;
            (report, Some(matrix))
        }
    };

    if csv {
        let line = format!(
            "bound_id,value,active_branch\n{},{},{}\n",
            report.bound_id,
            fmt_g17(report.value),
            report.active_branch
        );
        return emit(out, line.trim_end());
    }

    let mut value = serde_json::to_value(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    if let Some(matrix) = matrix {
        let rows: Vec<Vec<f64>> = matrix
            .rows()
            .into_iter()
            .map(|r| r.iter().cloned().collect())
            .collect();
        value["matrix"] = serde_json::to_value(rows).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    emit(out, &serde_json::to_string_pretty(&value).map_err(|e| Failure::Runtime(e.to_string()))?)
}

pub fn bounds_sample_size(config: Option<&PathBuf>, out: Option<&PathBuf>) -> Result<(), Failure> {
    let cfg: SampleSizeConfig = load_config(config)?;
    let family = cfg.bound.family();
    let result = required_sample_size(&family, cfg.target_eps).map_err(classify)?;
    let payload = serde_json::json!({
        "target_eps": cfg.target_eps,
        "n": result.n,
        "degenerate": result.degenerate,
        "value_at_n": result.value_at_n,
    });
    emit(out, &to_pretty(&payload)?)
}

pub fn packing_build(
    config: Option<&PathBuf>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg: PackingConfig = load_config(config)?;
    let master_seed = seed.unwrap_or(cfg.master_seed);
    let mut rng = rng_from_seed(master_seed);
    let code = build_packing(cfg.d, cfg.size, cfg.max_attempts, &mut rng).map_err(classify)?;
    let payload = serde_json::json!({
        "seed": master_seed,
        "failure_bound_per_attempt": packing_failure_bound(cfg.d, cfg.size),
        "code": code,
    });
    emit(out, &to_pretty(&payload)?)
}

pub fn ensemble_build(
    config: Option<&PathBuf>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg: EnsembleBuildConfig = load_config(config)?;
    let out = out.ok_or_else(|| Failure::Config("missing --out DIR for the ensemble".into()))?;
    let master_seed = seed.unwrap_or(cfg.master_seed);
    let reference = cfg.reference.load().map_err(classify)?;
    let mut rng = rng_from_seed(master_seed);
    let ens = build_ensemble(&reference, cfg.epsilon, cfg.members, cfg.radius, &mut rng)
        .map_err(classify)?;
    write_ensemble_dir(out, &ens, master_seed)
        .map_err(|e| Failure::Runtime(format!("cannot write ensemble: {e}")))?;
    if !ens.certificate.pass {
        return Err(Failure::Runtime(format!(
            "built ensemble failed its own certificate: {:?}",
            ens.certificate
        )));
    }
    println!("{}", to_pretty(&ens.certificate)?);
    Ok(())
}

pub fn ensemble_verify(
    dir: &Path,
    radius: Option<f64>,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let (ens, meta) = read_ensemble_dir::<f64>(dir)
        .map_err(|e| Failure::Config(format!("cannot load ensemble {}: {e}", dir.display())))?;
    let certificate = match radius.or(meta.radius) {
        Some(r) => {
            let spec = NeighborhoodSpec::new(ens.reference.clone(), r).map_err(classify)?;
            verify_ensemble(&ens, &spec)
        }
        None => ens.certificate.clone(),
    };
    emit(out, &to_pretty(&certificate)?)?;
    if certificate.pass {
        Ok(())
    } else {
        Err(Failure::Runtime("ensemble certificate failed".into()))
    }
}

pub fn rip_estimate(
    config: Option<&PathBuf>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg: RipConfig = load_config(config)?;
    let matrix = cfg.matrix.load().map_err(classify)?;
    let estimate = match cfg.method {
        RipMethodChoice::Exact => {
            let cap = cfg.cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
            rip_constant_exact_with_cap(&matrix, cfg.s, cap).map_err(classify)?
        }
        RipMethodChoice::MonteCarlo => {
            let master_seed = seed.unwrap_or(cfg.master_seed);
            let mut rng = rng_from_seed(master_seed);
            rip_constant_monte_carlo(&matrix, cfg.s, cfg.trials, &mut rng).map_err(classify)?
        }
    };
    emit(out, &to_pretty(&estimate)?)
}

pub fn simulate_mse(
    config: Option<&PathBuf>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
    gnuplot: bool,
) -> Result<(), Failure> {
    let cfg: MseConfig = load_config(config)?;
    let master_seed = seed.unwrap_or(cfg.master_seed);
    let csv = crate::sweep::run_mse_sweep(&cfg, master_seed)?;
    match out {
        Some(path) => {
            write_atomic(path, csv.as_bytes())
                .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
            if gnuplot {
                let script = crate::sweep::gnuplot_script(path, &cfg);
                let script_path = path.with_extension("gp");
                write_atomic(&script_path, script.as_bytes()).map_err(|e| {
                    Failure::Runtime(format!("cannot write {}: {e}", script_path.display()))
                })?;
            }
            Ok(())
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn simulate_fano(
    config: Option<&PathBuf>,
    seed: Option<u64>,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg: FanoConfig = load_config(config)?;
    let params_echo = config_json(config)?;
    let master_seed = seed.unwrap_or(cfg.master_seed);

    let model = cfg.model.coefficient_model().map_err(classify)?;
    let noise = NoiseModel::new(cfg.model.sigma2).map_err(classify)?;
    let reference = cfg.reference.load().map_err(classify)?;
    if reference.rows() != cfg.model.m || reference.cols() != cfg.model.p {
        return Err(Failure::Config(format!(
            "reference is {}x{}, config says {}x{}",
            reference.rows(),
            reference.cols(),
            cfg.model.m,
            cfg.model.p
        )));
    }
    if cfg.estimator == EstimatorChoice::Threshold && cfg.model.m != cfg.model.p {
        return Err(Failure::Config(
            "the threshold estimator needs the square case m = p".into(),
        ));
    }

    let mut rng = rng_from_seed(master_seed);
    let ens = build_ensemble(&reference, cfg.epsilon, cfg.members, cfg.radius, &mut rng)
        .map_err(classify)?;

    let budget = match cfg.side_info {
        SideInfoChoice::Coefficients => {
            let sigma_x = coefficient_covariance(&model);
            mi_upper_given_x(&ens, &sigma_x.view(), cfg.n, cfg.model.sigma2).map_err(classify)?
        }
        SideInfoChoice::Supports => {
            let mc = |trials| SupportAverage::MonteCarlo {
                trials,
                seed: derive_seed(master_seed, 0xA11),
            };
            let mi = |average| {
                mi_upper_given_support(
                    &ens,
                    cfg.model.s,
                    cfg.model.sigma_a2(),
                    cfg.model.sigma2,
                    cfg.n,
                    average,
                )
            };
            match cfg.support_trials {
                Some(trials) => mi(mc(trials)).map_err(classify)?,
                // exact enumeration when affordable, sampling otherwise
                None => match mi(SupportAverage::exact()) {
                    Err(Error::EnumerationCap { .. }) => {
                        eprintln!(
                            "note: support enumeration above cap; averaging over \
                             10000 sampled supports"
                        );
                        mi(mc(10_000)).map_err(classify)?
                    }
                    other => other.map_err(classify)?,
                },
            }
        }
    };
    let fano_floor = fano_floor_from_nats(budget.computed_mi_upper, ens.len()).map_err(classify)?;

    let constant;
    let oracle_true;
    let threshold;
    let estimator: &dyn DictionaryLearner<f64> = match cfg.estimator {
        EstimatorChoice::ConstantD0 => {
            constant = ConstantLearner::new(ens.reference.as_array().clone());
            &constant
        }
        EstimatorChoice::OracleTrue => {
            oracle_true = TrueDictionaryLearner::new(&ens);
            &oracle_true
        }
        EstimatorChoice::OracleLs => &OracleLsLearner,
        EstimatorChoice::Threshold => {
            threshold = ThresholdLearner {
                sparsity: cfg.model.s,
            };
            &threshold
        }
    };

    let result = empirical_error_probability(
        &ens,
        estimator,
        &model,
        &noise,
        cfg.n,
        cfg.trials,
        derive_seed(master_seed, 0xE2207),
    )
    .map_err(|e| Failure::Runtime(e.to_string()))?;

    let payload = serde_json::json!({
        "L": ens.len(),
        "eta": budget.eta,
        "mi_upper": budget.computed_mi_upper,
        "fano_floor": fano_floor,
        "p_e_hat": result.p_e_hat,
        "stderr": result.stderr,
        "params": params_echo,
    });
    emit(out, &to_pretty(&payload)?)
}
