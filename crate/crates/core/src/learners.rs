//! Dictionary learning schemes and the Monte Carlo MSE harness.
//!
//! The thresholding scheme ([`threshold_dl`]) is the constructive method the
//! MSE upper bound certifies: decode coefficients entrywise at threshold
//! 1/2, average the observations against the decoded signs, project each
//! column onto the closed unit ball. [`oracle_ls`] is a coefficient-oracle
//! least-squares baseline used for calibration.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::project_unit_ball;
use crate::linalg::{chol_solve, cholesky, frob_dist_sq, vec_norm};
use crate::model::{generate_batch, CoefficientModel, DictionaryMatrix, NoiseModel, ObservationBatch};
use crate::real::{real, Real};
use crate::rng::derive_seed;

/// Counters populated while learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LearnerDiagnostics {
    /// Decoded-coefficient entries that differ from the supplied ground
    /// truth; only populated when the truth was passed in for analysis.
    pub coeff_mismatch_count: Option<usize>,
    /// Columns whose norm exceeded 1 before the unit-ball projection.
    pub clipped_columns: usize,
}

/// A learned dictionary: columns have norm at most 1 (the thresholding
/// scheme's output need not have exactly unit columns).
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedDictionary<T: Real> {
    pub dictionary: Array2<T>,
    pub diagnostics: LearnerDiagnostics,
}

/// Entrywise coefficient decoder at threshold 1/2 (square case):
/// `1` when `y > 0.5`, `0` when `|y| <= 0.5`, `-1` when `y < -0.5`.
pub fn threshold_decode<T: Real>(y: &ArrayView2<'_, T>) -> Array2<T> {
    let half = real::<T>(0.5);
    y.mapv(|v| {
        if v > half {
            T::one()
        } else if v < -half {
            -T::one()
        } else {
            T::zero()
        }
    })
}

fn project_columns<T: Real>(mut d: Array2<T>) -> (Array2<T>, usize) {
    let mut clipped = 0usize;
    for mut col in d.columns_mut() {
        if vec_norm(&col.view()) > T::one() {
            clipped += 1;
            let projected = project_unit_ball(&col.view());
            col.assign(&projected);
        }
    }
    (d, clipped)
}

/// The thresholding scheme (square case `m = p`):
/// decode coefficients entrywise, set `d_j = p/(N s) sum_k xhat_{k,j} y_k`,
/// and project each column onto the closed unit ball.
pub fn threshold_dl<T: Real>(y: &ArrayView2<'_, T>, sparsity: usize) -> Result<LearnedDictionary<T>> {
    threshold_dl_with_truth(y, sparsity, None)
}

/// [`threshold_dl`] with optional ground-truth coefficients; the truth only
/// feeds the mismatch diagnostic, never the estimate.
pub fn threshold_dl_with_truth<T: Real>(
    y: &ArrayView2<'_, T>,
    sparsity: usize,
    truth: Option<&ArrayView2<'_, T>>,
) -> Result<LearnedDictionary<T>> {
    let (m, n) = y.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if sparsity == 0 {
        return Err(Error::InvalidParameter("sparsity must be >= 1".into()));
    }
    let decoded = threshold_decode(y);
    let coeff_mismatch_count = match truth {
        Some(x) => {
            if x.dim() != decoded.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "truth is {:?}, decoded is {:?}",
                    x.dim(),
                    decoded.dim()
                )));
            }
            Some(
                decoded
                    .iter()
                    .zip(x.iter())
                    .filter(|(a, b)| a != b)
                    .count(),
            )
        }
        None => None,
    };

    let scale = real::<T>(m as f64) / (real::<T>(n as f64) * real::<T>(sparsity as f64));
    let raw = y.dot(&decoded.t()) * scale;
    let (dictionary, clipped_columns) = project_columns(raw);
    Ok(LearnedDictionary {
        dictionary,
        diagnostics: LearnerDiagnostics {
            coeff_mismatch_count,
            clipped_columns,
        },
    })
}

/// Coefficient-oracle least squares `D = Y X^T (X X^T)^-1`, columns clipped
/// to the unit ball. Requires `N >= p` and an invertible `X X^T`.
pub fn oracle_ls<T: Real>(
    y: &ArrayView2<'_, T>,
    x: &ArrayView2<'_, T>,
) -> Result<LearnedDictionary<T>> {
    let (m, n) = y.dim();
    let (p, n_x) = x.dim();
    if n != n_x {
        return Err(Error::DimensionMismatch(format!(
            "Y has {n} samples, X has {n_x}"
        )));
    }
    if n < p {
        return Err(Error::RankDeficient(format!(
            "need N >= p for the oracle solve, got N={n}, p={p}"
        )));
    }
    let gram = x.dot(&x.t());
    let factor = cholesky(&gram.view()).map_err(|_| {
        Error::RankDeficient("X X^T is singular or not positive definite".into())
    })?;
    let cross = y.dot(&x.t()); // m x p
    let mut d = Array2::<T>::zeros((m, p));
    for i in 0..m {
        let rhs = cross.row(i).to_owned();
        let sol = chol_solve(&factor.view(), &rhs.view());
        d.row_mut(i).assign(&sol);
    }
    let (dictionary, clipped_columns) = project_columns(d);
    Ok(LearnedDictionary {
        dictionary,
        diagnostics: LearnerDiagnostics {
            coeff_mismatch_count: None,
            clipped_columns,
        },
    })
}

/// A dictionary learning scheme: a pure map from an observation batch to a
/// learned dictionary.
pub trait DictionaryLearner<T: Real>: Sync {
    /// Stable identifier used in result tables.
    fn name(&self) -> &str;
    fn learn(&self, batch: &ObservationBatch<T>) -> Result<LearnedDictionary<T>>;
}

/// The thresholding scheme as a learner.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdLearner {
    pub sparsity: usize,
}

impl<T: Real> DictionaryLearner<T> for ThresholdLearner {
    fn name(&self) -> &str {
        "threshold"
    }

    fn learn(&self, batch: &ObservationBatch<T>) -> Result<LearnedDictionary<T>> {
        threshold_dl(&batch.observations.view(), self.sparsity)
    }
}

/// Least squares against the recorded ground-truth coefficients.
#[derive(Debug, Clone, Copy)]
pub struct OracleLsLearner;

impl<T: Real> DictionaryLearner<T> for OracleLsLearner {
    fn name(&self) -> &str {
        "oracle_ls"
    }

    fn learn(&self, batch: &ObservationBatch<T>) -> Result<LearnedDictionary<T>> {
        let x = batch.coefficients.as_ref().ok_or_else(|| {
            Error::InvalidParameter("oracle_ls needs the batch to carry coefficients".into())
        })?;
        oracle_ls(&batch.observations.view(), &x.view())
    }
}

/// Ignores the data and returns a fixed matrix.
#[derive(Debug, Clone)]
pub struct ConstantLearner<T: Real> {
    dictionary: Array2<T>,
}

impl<T: Real> ConstantLearner<T> {
    pub fn new(dictionary: Array2<T>) -> Self {
        ConstantLearner { dictionary }
    }
}

impl<T: Real> DictionaryLearner<T> for ConstantLearner<T> {
    fn name(&self) -> &str {
        "constant_d0"
    }

    fn learn(&self, _batch: &ObservationBatch<T>) -> Result<LearnedDictionary<T>> {
        Ok(LearnedDictionary {
            dictionary: self.dictionary.clone(),
            diagnostics: LearnerDiagnostics::default(),
        })
    }
}

/// Side-information oracle that reads the generating member index off the
/// batch and returns that member.
#[derive(Debug, Clone)]
pub struct TrueDictionaryLearner<T: Real> {
    members: Vec<Array2<T>>,
}

impl<T: Real> TrueDictionaryLearner<T> {
    pub fn new(ensemble: &crate::packing::DictionaryEnsemble<T>) -> Self {
        TrueDictionaryLearner {
            members: ensemble
                .members
                .iter()
                .map(|m| m.as_array().clone())
                .collect(),
        }
    }
}

impl<T: Real> DictionaryLearner<T> for TrueDictionaryLearner<T> {
    fn name(&self) -> &str {
        "oracle_true"
    }

    fn learn(&self, batch: &ObservationBatch<T>) -> Result<LearnedDictionary<T>> {
        let idx = batch.dict_index.ok_or_else(|| {
            Error::InvalidParameter("batch carries no generating index".into())
        })?;
        let dictionary = self
            .members
            .get(idx)
            .ok_or_else(|| Error::InvalidParameter(format!("member index {idx} out of range")))?
            .clone();
        Ok(LearnedDictionary {
            dictionary,
            diagnostics: LearnerDiagnostics::default(),
        })
    }
}

/// Monte Carlo estimate of a learner's MSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MseEstimate<T: Real> {
    pub mean: T,
    pub stderr: T,
    pub trials: usize,
}

/// Average squared Frobenius error of `learner` against `d_true` over
/// independently generated batches. Trials run in parallel on seeds derived
/// from `master_seed`; the accumulation is performed in trial order, so the
/// result does not depend on scheduling.
pub fn monte_carlo_mse<T: Real>(
    learner: &dyn DictionaryLearner<T>,
    d_true: &DictionaryMatrix<T>,
    coefficients: &CoefficientModel<T>,
    noise: &NoiseModel<T>,
    num_samples: usize,
    trials: usize,
    master_seed: u64,
) -> Result<MseEstimate<T>> {
    if trials < 2 {
        return Err(Error::InvalidParameter(
            "need at least two trials for a standard error".into(),
        ));
    }
    let losses: Vec<T> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<T> {
            let seed = derive_seed(master_seed, trial as u64);
            let batch = generate_batch(d_true, coefficients, noise, num_samples, seed)?;
            let learned = learner.learn(&batch)?;
            Ok(frob_dist_sq(&learned.dictionary.view(), &d_true.view()))
        })
        .collect::<Result<Vec<T>>>()?;

    let t = real::<T>(trials as f64);
    let mean = losses.iter().cloned().sum::<T>() / t;
    let var = losses
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>()
        / (t - T::one());
    Ok(MseEstimate {
        mean,
        stderr: (var / t).sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NonzeroLaw;
    use crate::rng::rng_from_seed;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn decode_hand_values() {
        let y = array![[0.7], [-0.2], [-0.9]];
        let x = threshold_decode(&y.view());
        assert_eq!(x, array![[1.0], [0.0], [-1.0]]);

        let zeros = Array2::<f64>::zeros((3, 4));
        assert_eq!(threshold_decode(&zeros.view()), zeros);

        // boundary: |y| = 0.5 decodes to zero on both sides
        let edge = array![[0.5], [-0.5]];
        assert_eq!(threshold_decode(&edge.view()), array![[0.0], [0.0]]);
    }

    #[test]
    fn decode_recovers_noiseless_sign_coefficients() {
        let d = DictionaryMatrix::<f64>::identity(6);
        let model = CoefficientModel::sparse_uniform(6, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.0).unwrap();
        let batch = generate_batch(&d, &model, &noise, 500, 3).unwrap();
        let decoded = threshold_decode(&batch.observations.view());
        assert_eq!(&decoded, batch.coefficients.as_ref().unwrap());
    }

    #[test]
    fn threshold_dl_hand_trace() {
        // p=2, s=1, N=2, noiseless identity dictionary, x1=(1,0), x2=(0,-1)
        let y = array![[1.0, 0.0], [0.0, -1.0]];
        let learned = threshold_dl(&y.view(), 1).unwrap();
        assert_eq!(learned.dictionary, Array2::<f64>::eye(2));
        assert_eq!(learned.diagnostics.clipped_columns, 0);
    }

    #[test]
    fn threshold_dl_zero_data() {
        let y = Array2::<f64>::zeros((4, 8));
        let learned = threshold_dl(&y.view(), 2).unwrap();
        assert_eq!(learned.dictionary, Array2::<f64>::zeros((4, 4)));
    }

    #[test]
    fn threshold_dl_counts_mismatches() {
        let y = array![[1.0, 0.0], [0.0, -1.0]];
        let truth = array![[1.0, 0.0], [1.0, -1.0]]; // one deliberate difference
        let learned = threshold_dl_with_truth(&y.view(), 1, Some(&truth.view())).unwrap();
        assert_eq!(learned.diagnostics.coeff_mismatch_count, Some(1));
    }

    #[test]
    fn threshold_dl_sample_permutation_invariance() {
        let d = DictionaryMatrix::<f64>::identity(8);
        let model = CoefficientModel::sparse_uniform(8, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.01).unwrap();
        let batch = generate_batch(&d, &model, &noise, 64, 5).unwrap();
        let learned = threshold_dl(&batch.observations.view(), 2).unwrap();

        let mut rng = rng_from_seed(6);
        let mut order: Vec<usize> = (0..64).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut shuffled = Array2::<f64>::zeros((8, 64));
        for (dst, &src) in order.iter().enumerate() {
            shuffled
                .column_mut(dst)
                .assign(&batch.observations.column(src));
        }
        let relearned = threshold_dl(&shuffled.view(), 2).unwrap();
        for (a, b) in learned
            .dictionary
            .iter()
            .zip(relearned.dictionary.iter())
        {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn learned_columns_never_exceed_unit_norm() {
        let mut rng = rng_from_seed(7);
        let y = Array2::from_shape_fn((6, 40), |_| 3.0 * f64::standard_normal(&mut rng));
        let learned = threshold_dl(&y.view(), 1).unwrap();
        for col in learned.dictionary.columns() {
            assert!(vec_norm(&col) <= 1.0 + 1e-12);
        }
        assert!(learned.diagnostics.clipped_columns > 0);
    }

    #[test]
    fn oracle_ls_recovers_noiseless_dictionary() {
        let mut rng = rng_from_seed(8);
        let d = DictionaryMatrix::<f64>::random_unit_columns(5, 5, &mut rng);
        let model = CoefficientModel::sparse_uniform(5, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.0).unwrap();
        let batch = generate_batch(&d, &model, &noise, 60, 9).unwrap();
        let learned = oracle_ls(
            &batch.observations.view(),
            &batch.coefficients.as_ref().unwrap().view(),
        )
        .unwrap();
        let err = frob_dist_sq(&learned.dictionary.view(), &d.view());
        assert!(err < 1e-20, "error {err}");
    }

    #[test]
    fn oracle_ls_rank_errors() {
        let y = Array2::<f64>::zeros((3, 2));
        let x = Array2::<f64>::zeros((4, 2));
        assert!(matches!(
            oracle_ls(&y.view(), &x.view()),
            Err(Error::RankDeficient(_))
        ));
        // N >= p but X X^T singular (repeated sample)
        let y = array![[1.0, 1.0], [0.0, 0.0]];
        let x = array![[1.0, 1.0], [0.0, 0.0]];
        assert!(matches!(
            oracle_ls(&y.view(), &x.view()),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn monte_carlo_mse_zero_for_noiseless_oracle() {
        let mut rng = rng_from_seed(10);
        let d = DictionaryMatrix::<f64>::random_unit_columns(4, 4, &mut rng);
        let model = CoefficientModel::sparse_uniform(4, 1, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.0).unwrap();
        let est = monte_carlo_mse(&OracleLsLearner, &d, &model, &noise, 30, 10, 11).unwrap();
        assert!(est.mean < 1e-20);
    }

    #[test]
    fn monte_carlo_mse_matches_serial_accumulation() {
        let d = DictionaryMatrix::<f64>::identity(6);
        let model = CoefficientModel::sparse_uniform(6, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.04).unwrap();
        let learner = ThresholdLearner { sparsity: 2 };
        let est = monte_carlo_mse(&learner, &d, &model, &noise, 50, 16, 12).unwrap();

        let mut losses = Vec::new();
        for trial in 0..16u64 {
            let batch =
                generate_batch(&d, &model, &noise, 50, derive_seed(12, trial)).unwrap();
            let learned = threshold_dl(&batch.observations.view(), 2).unwrap();
            losses.push(frob_dist_sq(&learned.dictionary.view(), &d.view()));
        }
        let mean: f64 = losses.iter().sum::<f64>() / 16.0;
        assert_eq!(est.mean, mean);
    }

    #[test]
    fn oracle_ls_mse_decays_like_one_over_n() {
        // log-log slope over N in {100, 200, 400, 800} within -1 +/- 0.15
        let mut rng = rng_from_seed(13);
        let d = DictionaryMatrix::<f64>::random_unit_columns(5, 5, &mut rng);
        let model = CoefficientModel::sparse_uniform(5, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.04).unwrap();
        let ns = [100usize, 200, 400, 800];
        let mut logs = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            let est =
                monte_carlo_mse(&OracleLsLearner, &d, &model, &noise, n, 300, 100 + i as u64)
                    .unwrap();
            logs.push(((n as f64).ln(), est.mean.ln()));
        }
        let k = logs.len() as f64;
        let sx: f64 = logs.iter().map(|(x, _)| x).sum();
        let sy: f64 = logs.iter().map(|(_, y)| y).sum();
        let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
        let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        assert!((slope + 1.0).abs() <= 0.15, "slope {slope}");
    }

    #[test]
    fn coefficient_recovery_under_clamped_noise() {
        // with r sqrt(s) <= 1/10 and every |n| < 0.4 the decoder is exact
        let mut rng = rng_from_seed(14);
        let p = 20usize;
        let s = 2usize;
        let r = 0.05f64; // r sqrt(s) ~ 0.0707
        let d0 = DictionaryMatrix::<f64>::identity(p);
        let ens = crate::packing::build_ensemble(&d0, r * r / 320.0, 2, Some(r), &mut rng)
            .unwrap();
        let d = &ens.members[0];

        let model = CoefficientModel::sparse_uniform(p, s, NonzeroLaw::Rademacher).unwrap();
        let n_samples = 500usize;
        let mut x = Array2::<f64>::zeros((p, n_samples));
        for k in 0..n_samples {
            let xk = crate::model::sample_coefficients(&model, &mut rng);
            x.column_mut(k).assign(&xk);
        }
        let clamp = 0.4 - 1e-9;
        let noise = Array2::from_shape_fn((p, n_samples), |_| {
            (0.2 * f64::standard_normal(&mut rng)).clamp(-clamp, clamp)
        });
        let y = d.as_array().dot(&x) + &noise;
        let decoded = threshold_decode(&y.view());
        let mismatches = decoded.iter().zip(x.iter()).filter(|(a, b)| a != b).count();
        assert_eq!(mismatches, 0);
    }
}
