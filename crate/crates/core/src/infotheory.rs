//! Mutual-information budgets for the detection argument, the Fano floor on
//! detection error, the minimum-distance detector, and a Monte Carlo harness
//! that replays the whole pipeline: draw a member, generate data, estimate,
//! detect.
//!
//! Units: every mutual-information value is computed and stored in nats
//! (natural-log KL divergences). The Fano floor works in bits; use
//! [`fano_floor_from_nats`] to cross over, or [`nats_to_bits`] explicitly.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, random_subset, SubsetsColex};
use crate::error::{Error, Result};
use crate::learners::DictionaryLearner;
use crate::linalg::{frob_dist_sq, spd_inverse, spectral_norm_sym};
use crate::model::{generate_batch, CoefficientModel, DictionaryMatrix, NoiseModel};
use crate::packing::DictionaryEnsemble;
use crate::real::{real, Real};
use crate::rng::{derive_seed, rng_from_seed};

/// Exhaustive support averaging is refused above this many subsets by
/// default.
pub const DEFAULT_SUPPORT_ENUMERATION_CAP: u128 = 10_000;

/// Which function of the coefficients conditions the mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideInfo {
    /// The coefficient matrix itself.
    Coefficients,
    /// The supports of the coefficient columns.
    Supports,
}

/// A computed upper bound on the conditional mutual information between the
/// observations and the ensemble index, together with the analytic budget
/// `eta` it is certified against. All values in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MiBudget<T: Real> {
    pub side_info: SideInfo,
    /// Analytic budget: `320 N |Sigma_x|_2 eps / sigma^2` (coefficients) or
    /// `12960 N SNR^2 m^2 eps / p` (supports).
    pub eta: T,
    /// The exact pairwise-KL expression evaluated on the concrete ensemble.
    pub computed_mi_upper: T,
    /// Sharper budget available on the coefficients side
    /// (`160 N |Sigma_x|_2 eps / sigma^2`); the analytic `eta` keeps a
    /// factor-two slack over it.
    pub eta_tight: Option<T>,
    /// Standard error of the support average under Monte Carlo averaging.
    pub support_avg_stderr: Option<T>,
}

/// Conditional-MI upper bound given the coefficients as side information:
///
/// `N/(2 sigma^2 L^2) sum_{l,l'} tr{ (D_l - D_l')^T (D_l - D_l') Sigma_x }`
///
/// (the expectation over the coefficients is taken in closed form).
pub fn mi_upper_given_x<T: Real>(
    ens: &DictionaryEnsemble<T>,
    sigma_x: &ArrayView2<'_, T>,
    num_samples: usize,
    sigma2: T,
) -> Result<MiBudget<T>> {
    let p = ens.coeff_dim();
    if sigma_x.nrows() != p || sigma_x.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, ensemble coefficient dimension is {p}",
            sigma_x.nrows(),
            sigma_x.ncols()
        )));
    }
    if !(sigma2 > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    let l_count = ens.len();
    if l_count == 0 {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }

    let mut pair_sum = T::zero();
    for i in 0..l_count.saturating_sub(1) {
        for j in i + 1..l_count {
            let diff = ens.members[i].as_array() - ens.members[j].as_array();
            let gram = diff.t().dot(&diff);
            // tr(G Sigma) with both symmetric
            let tr: T = gram
                .iter()
                .zip(sigma_x.iter())
                .map(|(&g, &s)| g * s)
                .sum();
            pair_sum += tr + tr; // both orderings of (i, j)
        }
    }

    let n = real::<T>(num_samples as f64);
    let l_sq = real::<T>((l_count * l_count) as f64);
    let computed = (n / (real::<T>(2.0) * sigma2) * pair_sum / l_sq).max(T::zero());

    let cov_norm = spectral_norm_sym(sigma_x);
    let eta = real::<T>(320.0) * n * cov_norm * ens.epsilon / sigma2;
    Ok(MiBudget {
        side_info: SideInfo::Coefficients,
        eta,
        computed_mi_upper: computed,
        eta_tight: Some(eta / real::<T>(2.0)),
        support_avg_stderr: None,
    })
}

/// Covariance of one observation conditioned on the support `S`:
/// `sigma_a^2 D_S D_S^T + sigma^2 I`. Its smallest eigenvalue is at least
/// `sigma^2`.
pub fn conditional_cov<T: Real>(
    d: &DictionaryMatrix<T>,
    support: &[usize],
    sigma_a2: T,
    sigma2: T,
) -> Result<Array2<T>> {
    let p = d.cols();
    if support.is_empty() || support.len() > p {
        return Err(Error::InvalidParameter(format!(
            "support size {} outside 1..={p}",
            support.len()
        )));
    }
    let mut seen = vec![false; p];
    for &j in support {
        if j >= p || seen[j] {
            return Err(Error::InvalidParameter(format!(
                "support entry {j} out of range or repeated"
            )));
        }
        seen[j] = true;
    }
    let m = d.rows();
    let arr = d.as_array();
    let mut cov = Array2::<T>::zeros((m, m));
    for &j in support {
        for a in 0..m {
            for b in a..m {
                let add = sigma_a2 * arr[[a, j]] * arr[[b, j]];
                cov[[a, b]] += add;
                if a != b {
                    cov[[b, a]] += add;
                }
            }
        }
    }
    for a in 0..m {
        cov[[a, a]] += sigma2;
    }
    Ok(cov)
}

/// How the expectation over supports is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportAverage {
    /// Enumerate all `C(p, s)` supports (refused above `cap`).
    Exact { cap: u128 },
    /// Average over uniformly sampled supports; the budget then carries a
    /// standard error.
    MonteCarlo { trials: usize, seed: u64 },
}

impl SupportAverage {
    pub fn exact() -> Self {
        SupportAverage::Exact {
            cap: DEFAULT_SUPPORT_ENUMERATION_CAP,
        }
    }
}

// (1/L^2) sum_{l,l'} tr{ [inv_l - inv_l'] [cov_l' - cov_l] } for one support.
fn support_pair_term<T: Real>(
    ens: &DictionaryEnsemble<T>,
    support: &[usize],
    sigma_a2: T,
    sigma2: T,
) -> Result<T> {
    let l_count = ens.len();
    let mut covs = Vec::with_capacity(l_count);
    let mut invs = Vec::with_capacity(l_count);
    for member in &ens.members {
        let cov = conditional_cov(member, support, sigma_a2, sigma2)?;
        let inv = spd_inverse(&cov.view())?;
        covs.push(cov);
        invs.push(inv);
    }
    let mut pair_sum = T::zero();
    for i in 0..l_count.saturating_sub(1) {
        for j in i + 1..l_count {
            let mut tr = T::zero();
            // tr(A B) = sum_{a,b} A_{a,b} B_{b,a}; symmetric operands
            let m = covs[i].nrows();
            for a in 0..m {
                for b in 0..m {
                    let da = invs[i][[a, b]] - invs[j][[a, b]];
                    let db = covs[j][[b, a]] - covs[i][[b, a]];
                    tr += da * db;
                }
            }
            pair_sum += tr + tr; // symmetric in the pair order
        }
    }
    Ok(pair_sum / real::<T>((l_count * l_count) as f64))
}

/// Conditional-MI upper bound given the supports as side information:
///
/// `N E_S{ (1/L^2) sum_{l,l'} tr{ [Sigma_{S,l}^-1 - Sigma_{S,l'}^-1]
/// [Sigma_{S,l'} - Sigma_{S,l}] } }`
///
/// with the expectation over supports taken exactly or by Monte Carlo. The
/// budget `eta` uses the exact unit-column SNR `s sigma_a^2 / (m sigma^2)`.
pub fn mi_upper_given_support<T: Real>(
    ens: &DictionaryEnsemble<T>,
    sparsity: usize,
    sigma_a2: T,
    sigma2: T,
    num_samples: usize,
    average: SupportAverage,
) -> Result<MiBudget<T>> {
    let p = ens.coeff_dim();
    let m = ens.signal_dim();
    if sparsity == 0 || sparsity > p {
        return Err(Error::InvalidParameter(format!(
            "sparsity {sparsity} outside 1..={p}"
        )));
    }
    if !(sigma2 > T::zero()) || !(sigma_a2 > T::zero()) {
        return Err(Error::InvalidParameter(
            "variances must be positive".into(),
        ));
    }
    if ens.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }

    let n = real::<T>(num_samples as f64);
    let (mean_term, stderr) = match average {
        SupportAverage::Exact { cap } => {
            let count = binomial(p, sparsity).unwrap_or(u128::MAX);
            if count > cap {
                return Err(Error::EnumerationCap {
                    detail: format!("C({p},{sparsity}) = {count} exceeds cap {cap}"),
                });
            }
            let mut acc = T::zero();
            for support in SubsetsColex::new(p, sparsity) {
                acc += support_pair_term(ens, &support, sigma_a2, sigma2)?;
            }
            (acc / real::<T>(count as f64), None)
        }
        SupportAverage::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be >= 1".into()));
            }
            let mut rng = rng_from_seed(seed);
            let mut values = Vec::with_capacity(trials);
            for _ in 0..trials {
                let support = random_subset(p, sparsity, &mut rng);
                values.push(support_pair_term(ens, &support, sigma_a2, sigma2)?);
            }
            let t = real::<T>(trials as f64);
            let mean = values.iter().cloned().sum::<T>() / t;
            let var = values
                .iter()
                .map(|&v| (v - mean) * (v - mean))
                .sum::<T>()
                / (t - T::one()).max(T::one());
            (mean, Some(n * (var / t).sqrt()))
        }
    };

    let snr = real::<T>(sparsity as f64) * sigma_a2 / (real::<T>(m as f64) * sigma2);
    let eta = real::<T>(12960.0) * n * snr * snr * real::<T>((m * m) as f64) * ens.epsilon
        / real::<T>(p as f64);
    Ok(MiBudget {
        side_info: SideInfo::Supports,
        eta,
        computed_mi_upper: (n * mean_term).max(T::zero()),
        eta_tight: None,
        support_avg_stderr: stderr,
    })
}

/// Intermediate quantities of the spectral-norm chain behind the support
/// budget, exposed for diagnostics: the bound on
/// `|Sigma_{S,l} - Sigma_{S,l'}|_2` and the chain's MI bound
/// `6480 N s^2 (sigma_a/sigma)^4 eps / p` that sits between the exact value
/// and `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SupportChainDiagnostics<T: Real> {
    pub spectral_diff_bound: T,
    pub chain_mi_bound: T,
}

pub fn support_chain_diagnostics<T: Real>(
    ens: &DictionaryEnsemble<T>,
    sparsity: usize,
    sigma_a2: T,
    sigma2: T,
    num_samples: usize,
) -> SupportChainDiagnostics<T> {
    let p = real::<T>(ens.coeff_dim() as f64);
    let s = real::<T>(sparsity as f64);
    let n = real::<T>(num_samples as f64);
    let four = real::<T>(4.0);
    let spectral_diff_bound =
        real::<T>(4.5) * sigma_a2 * (ens.epsilon_prime * s / (four * p)).sqrt();
    let ratio = sigma_a2 / sigma2;
    let chain_mi_bound = real::<T>(6480.0) * n * s * s * ratio * ratio * ens.epsilon / p;
    SupportChainDiagnostics {
        spectral_diff_bound,
        chain_mi_bound,
    }
}

/// Nats-to-bits conversion for mutual information values.
pub fn nats_to_bits<T: Real>(nats: T) -> T {
    nats / real::<T>(std::f64::consts::LN_2)
}

/// Fano floor on the detection error probability of ANY detector over `L`
/// equiprobable hypotheses: `max(0, 1 - (I + 1)/log2(L))`, with the mutual
/// information `I` supplied IN BITS.
pub fn fano_error_lower_bound<T: Real>(mi_upper_bits: T, l_count: usize) -> Result<T> {
    if l_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fano floor needs L >= 2, got {l_count}"
        )));
    }
    if !(mi_upper_bits >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "mutual information must be nonnegative, got {mi_upper_bits}"
        )));
    }
    let log2_l = real::<T>((l_count as f64).log2());
    Ok((T::one() - (mi_upper_bits + T::one()) / log2_l).max(T::zero()))
}

/// Fano floor fed with a mutual-information value in nats (the unit the MI
/// budgets are computed in); converts to bits before applying the floor.
pub fn fano_floor_from_nats<T: Real>(mi_upper_nats: T, l_count: usize) -> Result<T> {
    fano_error_lower_bound(nats_to_bits(mi_upper_nats), l_count)
}

/// Index of the ensemble member closest to `d_hat` in Frobenius norm; exact
/// ties are broken uniformly at random.
pub fn min_distance_detect<T: Real, R: Rng + ?Sized>(
    d_hat: &ArrayView2<'_, T>,
    ens: &DictionaryEnsemble<T>,
    rng: &mut R,
) -> Result<usize> {
    if ens.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let shape = ens.members[0].as_array().dim();
    if d_hat.dim() != shape {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {:?}, members are {:?}",
            d_hat.dim(),
            shape
        )));
    }
    let mut best = T::infinity();
    let mut ties: Vec<usize> = Vec::new();
    for (idx, member) in ens.members.iter().enumerate() {
        let dist = frob_dist_sq(d_hat, &member.view());
        if dist < best {
            best = dist;
            ties.clear();
            ties.push(idx);
        } else if dist == best {
            ties.push(idx);
        }
    }
    if ties.len() == 1 {
        Ok(ties[0])
    } else {
        Ok(ties[rng.gen_range(0..ties.len())])
    }
}

/// Outcome of the empirical detection experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ErrorProbability<T: Real> {
    /// Fraction of trials where the detected index differed from the truth.
    pub p_e_hat: T,
    /// Binomial standard error `sqrt(p(1-p)/trials)`.
    pub stderr: T,
    pub errors: usize,
    pub trials: usize,
}

/// Plays the communication scheme end to end: per trial, draw a member
/// uniformly, generate a batch from it, run the estimator, detect by
/// minimum distance, and count errors. Trials run in parallel on seeds
/// derived from `master_seed`, so the result is independent of scheduling.
pub fn empirical_error_probability<T: Real>(
    ens: &DictionaryEnsemble<T>,
    estimator: &dyn DictionaryLearner<T>,
    coefficients: &CoefficientModel<T>,
    noise: &NoiseModel<T>,
    num_samples: usize,
    trials: usize,
    master_seed: u64,
) -> Result<ErrorProbability<T>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if ens.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let l_count = ens.len();
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<bool> {
            let mut rng = rng_from_seed(derive_seed(master_seed, trial as u64));
            let truth = rng.gen_range(0..l_count);
            let batch_seed: u64 = rng.gen();
            let batch = generate_batch(
                &ens.members[truth],
                coefficients,
                noise,
                num_samples,
                batch_seed,
            )?
            .with_dict_index(truth);
            let learned = estimator.learn(&batch)?;
            let detected = min_distance_detect(&learned.dictionary.view(), ens, &mut rng)?;
            Ok(detected != truth)
        })
        .collect::<Result<Vec<bool>>>()?;

    let errors = outcomes.iter().filter(|&&e| e).count();
    let t = real::<T>(trials as f64);
    let p_e_hat = real::<T>(errors as f64) / t;
    let stderr = (p_e_hat * (T::one() - p_e_hat) / t).sqrt();
    Ok(ErrorProbability {
        p_e_hat,
        stderr,
        errors,
        trials,
    })
}
