//! Generative observation model: dictionaries with unit-norm columns,
//! coefficient distributions (general covariance or uniform-support sparse),
//! white Gaussian noise, and batch sampling `y = D x + n`.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use crate::combinatorics::random_subset;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, sym_sqrt, vec_norm};
use crate::real::{real, Real};
use crate::rng::rng_from_seed;

/// Default tolerance for unit-column membership checks (`f64`).
pub const MANIFOLD_TOL: f64 = 1e-10;

/// Membership tolerance for the working scalar type: the documented 1e-10
/// in double precision, scaled up with machine epsilon for `f32`.
pub fn manifold_tol<T: Real>() -> T {
    real::<T>(MANIFOLD_TOL).max(T::epsilon() * real::<T>(100.0))
}

/// An `m x p` real matrix whose columns all have Euclidean norm 1 (to within
/// a construction tolerance). The estimand of every bound in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryMatrix<T: Real> {
    data: Array2<T>,
}

impl<T: Real> DictionaryMatrix<T> {
    /// Validates unit columns to within [`manifold_tol`].
    pub fn new(data: Array2<T>) -> Result<Self> {
        Self::with_tolerance(data, manifold_tol::<T>())
    }

    /// Validates unit columns to within `tol`.
    pub fn with_tolerance(data: Array2<T>, tol: T) -> Result<Self> {
        for (j, col) in data.columns().into_iter().enumerate() {
            let norm = vec_norm(&col);
            if (norm - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "column {j} has norm {norm}, not unit within {tol}"
                )));
            }
        }
        Ok(DictionaryMatrix { data })
    }

    /// Square identity dictionary of order `m`.
    pub fn identity(m: usize) -> Self {
        DictionaryMatrix {
            data: Array2::eye(m),
        }
    }

    /// Unit-column dictionary with columns `e_{j mod m}`; valid for any
    /// `p >= m` and handy as an overcomplete reference.
    pub fn repeated_identity(m: usize, p: usize) -> Self {
        let mut data = Array2::zeros((m, p));
        for j in 0..p {
            data[[j % m, j]] = T::one();
        }
        DictionaryMatrix { data }
    }

    /// Random dictionary: i.i.d. standard normal columns, normalized.
    pub fn random_unit_columns<R: Rng + ?Sized>(m: usize, p: usize, rng: &mut R) -> Self {
        let mut data = Array2::zeros((m, p));
        for j in 0..p {
            let mut norm_sq = T::zero();
            for i in 0..m {
                let z = T::standard_normal(rng);
                data[[i, j]] = z;
                norm_sq += z * z;
            }
            let norm = norm_sq.sqrt();
            for i in 0..m {
                data[[i, j]] = data[[i, j]] / norm;
            }
        }
        DictionaryMatrix { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_array(&self) -> &Array2<T> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<T> {
        self.data
    }
}

/// Law of the nonzero entries of a sparse coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonzeroLaw<T: Real> {
    /// `+1` or `-1` with equal probability; magnitude exactly one.
    Rademacher,
    /// Zero-mean Gaussian with the given variance.
    Gaussian { variance: T },
}

impl<T: Real> NonzeroLaw<T> {
    /// Variance of one nonzero entry (1 for Rademacher).
    pub fn variance(&self) -> T {
        match self {
            NonzeroLaw::Rademacher => T::one(),
            NonzeroLaw::Gaussian { variance } => *variance,
        }
    }
}

/// Distribution family of the coefficient vector `x` of dimension `p`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientModel<T: Real> {
    /// Zero-mean with the given `p x p` covariance; samples are drawn
    /// Gaussian through a symmetric square-root factor of the covariance
    /// (the covariance is the only constraint, Gaussian is the canonical
    /// representative and is documented as a choice).
    GeneralCovariance { covariance: Array2<T> },
    /// Support uniform over all size-`sparsity` subsets of `{0,..,dim-1}`,
    /// nonzeros i.i.d. per `law`. Implied covariance `(s/p) sigma_a^2 I`.
    SparseUniform {
        dim: usize,
        sparsity: usize,
        law: NonzeroLaw<T>,
    },
}

impl<T: Real> CoefficientModel<T> {
    /// General-covariance model; requires a symmetric matrix with all
    /// eigenvalues above `-1e-10`.
    pub fn general(covariance: Array2<T>) -> Result<Self> {
        let p = covariance.nrows();
        if covariance.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be square, got {}x{}",
                p,
                covariance.ncols()
            )));
        }
        let tol = manifold_tol::<T>();
        for i in 0..p {
            for j in i + 1..p {
                if (covariance[[i, j]] - covariance[[j, i]]).abs() > tol {
                    return Err(Error::InvalidParameter(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let min_eig = sym_eigenvalues(&covariance.view())
            .iter()
            .cloned()
            .fold(T::infinity(), T::min);
        if min_eig < -tol {
            return Err(Error::InvalidParameter(format!(
                "covariance has eigenvalue {min_eig}, below -1e-10"
            )));
        }
        Ok(CoefficientModel::GeneralCovariance { covariance })
    }

    /// Sparse model with uniformly random supports.
    pub fn sparse_uniform(dim: usize, sparsity: usize, law: NonzeroLaw<T>) -> Result<Self> {
        if sparsity == 0 || sparsity > dim {
            return Err(Error::InvalidParameter(format!(
                "sparsity must satisfy 1 <= s <= p, got s={sparsity}, p={dim}"
            )));
        }
        if let NonzeroLaw::Gaussian { variance } = law {
            if !(variance > T::zero()) {
                return Err(Error::InvalidParameter(
                    "nonzero variance must be positive".into(),
                ));
            }
        }
        Ok(CoefficientModel::SparseUniform { dim, sparsity, law })
    }

    /// Coefficient dimension `p`.
    pub fn dim(&self) -> usize {
        match self {
            CoefficientModel::GeneralCovariance { covariance } => covariance.nrows(),
            CoefficientModel::SparseUniform { dim, .. } => *dim,
        }
    }

    /// Sparsity `s` for the sparse variant.
    pub fn sparsity(&self) -> Option<usize> {
        match self {
            CoefficientModel::SparseUniform { sparsity, .. } => Some(*sparsity),
            CoefficientModel::GeneralCovariance { .. } => None,
        }
    }
}

/// White Gaussian noise with per-entry variance `sigma^2`.
///
/// `sigma^2 = 0` is accepted as a degenerate noiseless model (useful as a
/// test fixture); [`snr`] rejects it because the ratio is undefined there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T: Real> {
    variance: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(variance: T) -> Result<Self> {
        if !(variance >= T::zero()) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be finite and nonnegative, got {variance}"
            )));
        }
        Ok(NoiseModel { variance })
    }

    pub fn variance(&self) -> T {
        self.variance
    }
}

/// `N` observations stacked column-wise, with optional ground truth retained
/// for analysis. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch<T: Real> {
    /// `m x N` data matrix.
    pub observations: Array2<T>,
    /// Ground-truth `p x N` coefficients, when retained.
    pub coefficients: Option<Array2<T>>,
    /// Ground-truth supports per sample (sparse model only), 0-based sorted.
    pub supports: Option<Vec<Vec<usize>>>,
    /// Index of the ensemble member that generated the batch, when relevant.
    pub dict_index: Option<usize>,
    /// Seed that produced the batch.
    pub seed: u64,
}

impl<T: Real> ObservationBatch<T> {
    pub fn num_samples(&self) -> usize {
        self.observations.ncols()
    }

    pub fn signal_dim(&self) -> usize {
        self.observations.nrows()
    }

    /// Tags the batch with the generating ensemble index.
    pub fn with_dict_index(mut self, index: usize) -> Self {
        self.dict_index = Some(index);
        self
    }
}

/// One uniformly random size-`s` support (sparse model only).
pub fn sample_support<T: Real, R: Rng + ?Sized>(
    model: &CoefficientModel<T>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    match model {
        CoefficientModel::SparseUniform { dim, sparsity, .. } => {
            Ok(random_subset(*dim, *sparsity, rng))
        }
        CoefficientModel::GeneralCovariance { .. } => Err(Error::UnsupportedModel(
            "support sampling requires the sparse-uniform model".into(),
        )),
    }
}

// Sampling state reused across the draws of one batch (the square-root
// factor of a general covariance is computed once).
enum CoefficientSampler<T: Real> {
    Sparse {
        dim: usize,
        sparsity: usize,
        law: NonzeroLaw<T>,
    },
    General {
        factor: Array2<T>,
    },
}

impl<T: Real> CoefficientSampler<T> {
    fn new(model: &CoefficientModel<T>) -> Self {
        match model {
            CoefficientModel::SparseUniform { dim, sparsity, law } => CoefficientSampler::Sparse {
                dim: *dim,
                sparsity: *sparsity,
                law: *law,
            },
            CoefficientModel::GeneralCovariance { covariance } => CoefficientSampler::General {
                factor: sym_sqrt(&covariance.view()),
            },
        }
    }

    /// Draws one coefficient vector; returns its support for the sparse
    /// variant.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Array1<T>, Option<Vec<usize>>) {
        match self {
            CoefficientSampler::Sparse { dim, sparsity, law } => {
                let support = random_subset(*dim, *sparsity, rng);
                let mut x = Array1::zeros(*dim);
                for &idx in &support {
                    x[idx] = match law {
                        NonzeroLaw::Rademacher => {
                            if rng.gen_bool(0.5) {
                                T::one()
                            } else {
                                -T::one()
                            }
                        }
                        NonzeroLaw::Gaussian { variance } => {
                            variance.sqrt() * T::standard_normal(rng)
                        }
                    };
                }
                (x, Some(support))
            }
            CoefficientSampler::General { factor } => {
                let p = factor.nrows();
                let z = Array1::from_iter((0..p).map(|_| T::standard_normal(rng)));
                (factor.dot(&z), None)
            }
        }
    }
}

/// One coefficient vector drawn from the model.
pub fn sample_coefficients<T: Real, R: Rng + ?Sized>(
    model: &CoefficientModel<T>,
    rng: &mut R,
) -> Array1<T> {
    CoefficientSampler::new(model).draw(rng).0
}

/// Generates `y_k = D x_k + n_k` for `k = 1..N` from the given seed and
/// records the ground truth. Identical seeds produce bit-identical batches.
pub fn generate_batch<T: Real>(
    dictionary: &DictionaryMatrix<T>,
    coefficients: &CoefficientModel<T>,
    noise: &NoiseModel<T>,
    num_samples: usize,
    seed: u64,
) -> Result<ObservationBatch<T>> {
    let p = coefficients.dim();
    if p != dictionary.cols() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient dimension {p} != dictionary columns {}",
            dictionary.cols()
        )));
    }
    let m = dictionary.rows();
    let mut rng = rng_from_seed(seed);
    let sampler = CoefficientSampler::new(coefficients);
    let sigma = noise.variance().sqrt();
    let noiseless = noise.variance() == T::zero();
    let is_sparse = matches!(coefficients, CoefficientModel::SparseUniform { .. });

    let mut x = Array2::<T>::zeros((p, num_samples));
    let mut y = Array2::<T>::zeros((m, num_samples));
    let mut supports = is_sparse.then(|| Vec::with_capacity(num_samples));

    for k in 0..num_samples {
        let (xk, support) = sampler.draw(&mut rng);
        let mut yk = dictionary.as_array().dot(&xk);
        if !noiseless {
            for v in yk.iter_mut() {
                *v += sigma * T::standard_normal(&mut rng);
            }
        }
        x.column_mut(k).assign(&xk);
        y.column_mut(k).assign(&yk);
        if let (Some(list), Some(s)) = (supports.as_mut(), support) {
            list.push(s);
        }
    }

    Ok(ObservationBatch {
        observations: y,
        coefficients: Some(x),
        supports,
        dict_index: None,
        seed,
    })
}

/// Covariance of the coefficient vector implied by the model: the stored
/// matrix, or `(s/p) sigma_a^2 I` for the sparse-uniform model.
pub fn coefficient_covariance<T: Real>(model: &CoefficientModel<T>) -> Array2<T> {
    match model {
        CoefficientModel::GeneralCovariance { covariance } => covariance.clone(),
        CoefficientModel::SparseUniform { dim, sparsity, law } => {
            let scale = real::<T>(*sparsity as f64) / real::<T>(*dim as f64) * law.variance();
            Array2::eye(*dim) * scale
        }
    }
}

/// Exact signal-to-noise ratio `E||Dx||^2 / E||n||^2
/// = tr(D Sigma_x D^T) / (m sigma^2)`.
pub fn snr<T: Real>(
    dictionary: &DictionaryMatrix<T>,
    coefficients: &CoefficientModel<T>,
    noise: &NoiseModel<T>,
) -> Result<T> {
    if coefficients.dim() != dictionary.cols() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient dimension {} != dictionary columns {}",
            coefficients.dim(),
            dictionary.cols()
        )));
    }
    if noise.variance() == T::zero() {
        return Err(Error::UndefinedSnr);
    }
    let sigma_x = coefficient_covariance(coefficients);
    let d = dictionary.as_array();
    // tr(D Sigma D^T) = sum_ij (D Sigma)_ij D_ij
    let ds = d.dot(&sigma_x);
    let signal_power: T = ds.iter().zip(d.iter()).map(|(&a, &b)| a * b).sum();
    let m = real::<T>(dictionary.rows() as f64);
    Ok(signal_power / (m * noise.variance()))
}

/// SNR bracket `((1 - delta_s) s sigma_a^2 / (m sigma^2),
/// (1 + delta_s) s sigma_a^2 / (m sigma^2))` implied by a restricted
/// isometry constant `delta_s` of the dictionary.
pub fn snr_sandwich<T: Real>(
    delta_s: T,
    sparsity: usize,
    sigma_a2: T,
    sigma2: T,
    m: usize,
) -> Result<(T, T)> {
    if !(delta_s >= T::zero()) || delta_s >= T::one() {
        return Err(Error::InvalidParameter(format!(
            "RIP constant must lie in [0, 1), got {delta_s}"
        )));
    }
    if sigma2 <= T::zero() || sigma_a2 <= T::zero() || m == 0 || sparsity == 0 {
        return Err(Error::InvalidParameter(
            "sandwich needs positive variances and dimensions".into(),
        ));
    }
    let center = real::<T>(sparsity as f64) * sigma_a2 / (real::<T>(m as f64) * sigma2);
    Ok(((T::one() - delta_s) * center, (T::one() + delta_s) * center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{binomial, SubsetsColex};
    use ndarray::array;
    use std::collections::HashMap;

    #[test]
    fn dictionary_rejects_non_unit_columns() {
        let bad = array![[1.0, 0.0], [0.0, 0.5]];
        assert!(DictionaryMatrix::new(bad).is_err());
        let good = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(DictionaryMatrix::new(good).is_ok());
    }

    #[test]
    fn support_single_subset_when_s_equals_p() {
        let model = CoefficientModel::<f64>::sparse_uniform(4, 4, NonzeroLaw::Rademacher).unwrap();
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            assert_eq!(sample_support(&model, &mut rng).unwrap(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn support_sampling_rejects_general_model() {
        let model = CoefficientModel::general(Array2::<f64>::eye(3)).unwrap();
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            sample_support(&model, &mut rng),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn support_frequencies_p4_s2() {
        // 60000 draws over the 6 subsets: each count within 3 binomial
        // standard errors of 10000.
        let model = CoefficientModel::<f64>::sparse_uniform(4, 2, NonzeroLaw::Rademacher).unwrap();
        let mut rng = rng_from_seed(2024);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *counts.entry(sample_support(&model, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let se = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (_, &c) in &counts {
            assert!((c as f64 - expected).abs() <= 3.0 * se, "count {c}");
        }
    }

    #[test]
    fn support_uniformity_chi_square() {
        // p=6, s=3: chi-square goodness of fit over the 20 cells at
        // significance 0.01 (critical value 36.19086912927004, 19 dof).
        let p = 6;
        let s = 3;
        let cells = binomial(p, s).unwrap() as usize;
        let index: HashMap<Vec<usize>, usize> = SubsetsColex::new(p, s)
            .enumerate()
            .map(|(i, sub)| (sub, i))
            .collect();
        let model = CoefficientModel::<f64>::sparse_uniform(p, s, NonzeroLaw::Rademacher).unwrap();
        let mut rng = rng_from_seed(7);
        let draws = 100_000usize;
        let mut counts = vec![0usize; cells];
        for _ in 0..draws {
            counts[index[&sample_support(&model, &mut rng).unwrap()]] += 1;
        }
        let expected = draws as f64 / cells as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 36.19086912927004, "chi2 = {chi2}");
    }

    #[test]
    fn rademacher_full_support_is_sign_vector() {
        let model = CoefficientModel::<f64>::sparse_uniform(5, 5, NonzeroLaw::Rademacher).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let x = sample_coefficients(&model, &mut rng);
            assert!(x.iter().all(|&v| v == 1.0 || v == -1.0));
        }
    }

    #[test]
    fn rademacher_sparse_has_exact_magnitudes() {
        let model = CoefficientModel::<f64>::sparse_uniform(5, 2, NonzeroLaw::Rademacher).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let x = sample_coefficients(&model, &mut rng);
            let nonzero: Vec<f64> = x.iter().cloned().filter(|&v| v != 0.0).collect();
            assert_eq!(nonzero.len(), 2);
            assert!(nonzero.iter().all(|&v| v.abs() == 1.0));
        }
    }

    #[test]
    fn gaussian_sparse_per_entry_variance() {
        // Per-entry variance of x_i is (s/p) sigma_a^2; check within three
        // standard errors over 1e5 draws.
        let p = 5;
        let s = 2;
        let sigma_a2 = 2.5;
        let model =
            CoefficientModel::<f64>::sparse_uniform(p, s, NonzeroLaw::Gaussian { variance: sigma_a2 })
                .unwrap();
        let mut rng = rng_from_seed(5);
        let draws = 100_000usize;
        let mut sum_sq = vec![0.0f64; p];
        let mut sum_q = vec![0.0f64; p];
        for _ in 0..draws {
            let x = sample_coefficients(&model, &mut rng);
            for i in 0..p {
                sum_sq[i] += x[i] * x[i];
                sum_q[i] += x[i].powi(4);
            }
        }
        let expected = s as f64 / p as f64 * sigma_a2;
        for i in 0..p {
            let mean = sum_sq[i] / draws as f64;
            let var_of_sq = sum_q[i] / draws as f64 - mean * mean;
            let se = (var_of_sq / draws as f64).sqrt();
            assert!(
                (mean - expected).abs() <= 3.0 * se,
                "entry {i}: {mean} vs {expected} (se {se})"
            );
        }
    }

    #[test]
    fn noiseless_batch_is_exact_product() {
        let d = DictionaryMatrix::<f64>::identity(4);
        let model = CoefficientModel::sparse_uniform(4, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.0).unwrap();
        let batch = generate_batch(&d, &model, &noise, 32, 9).unwrap();
        let x = batch.coefficients.as_ref().unwrap();
        let expect = d.as_array().dot(x);
        assert_eq!(batch.observations, expect);
        assert_eq!(batch.supports.as_ref().unwrap().len(), 32);
    }

    #[test]
    fn empty_batch_keeps_shapes() {
        let d = DictionaryMatrix::<f64>::identity(3);
        let model = CoefficientModel::sparse_uniform(3, 1, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(1.0).unwrap();
        let batch = generate_batch(&d, &model, &noise, 0, 1).unwrap();
        assert_eq!(batch.observations.dim(), (3, 0));
        assert_eq!(batch.coefficients.as_ref().unwrap().dim(), (3, 0));
        assert!(batch.supports.as_ref().unwrap().is_empty());
    }

    #[test]
    fn batch_dimension_mismatch() {
        let d = DictionaryMatrix::<f64>::identity(3);
        let model = CoefficientModel::sparse_uniform(4, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(1.0).unwrap();
        assert!(matches!(
            generate_batch(&d, &model, &noise, 5, 1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn batch_covariance_matches_closed_form() {
        // Sample covariance of y approaches D Sigma_x D^T + sigma^2 I;
        // entrywise within five empirical standard errors over 1e5 draws.
        let m = 3;
        let p = 4;
        let d = DictionaryMatrix::<f64>::repeated_identity(m, p);
        let model = CoefficientModel::sparse_uniform(p, 2, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.25).unwrap();
        let batch = generate_batch(&d, &model, &noise, 100_000, 77).unwrap();
        let sigma_x = coefficient_covariance(&model);
        let mut expect = d.as_array().dot(&sigma_x).dot(&d.as_array().t());
        for i in 0..m {
            expect[[i, i]] += 0.25;
        }
        let n = batch.num_samples() as f64;
        for i in 0..m {
            for j in 0..m {
                let mut mean = 0.0;
                let mut mean_sq = 0.0;
                for k in 0..batch.num_samples() {
                    let prod = batch.observations[[i, k]] * batch.observations[[j, k]];
                    mean += prod;
                    mean_sq += prod * prod;
                }
                mean /= n;
                mean_sq /= n;
                let se = ((mean_sq - mean * mean) / n).sqrt();
                assert!(
                    (mean - expect[[i, j]]).abs() <= 5.0 * se,
                    "entry ({i},{j}): {mean} vs {}",
                    expect[[i, j]]
                );
            }
        }
    }

    #[test]
    fn covariance_closed_forms() {
        let model =
            CoefficientModel::<f64>::sparse_uniform(10, 2, NonzeroLaw::Gaussian { variance: 4.0 })
                .unwrap();
        let cov = coefficient_covariance(&model);
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 0.8 } else { 0.0 };
                assert_eq!(cov[[i, j]], expect);
            }
        }
        // full support: sigma_a^2 I
        let full =
            CoefficientModel::<f64>::sparse_uniform(6, 6, NonzeroLaw::Gaussian { variance: 3.0 })
                .unwrap();
        let cov = coefficient_covariance(&full);
        for i in 0..6 {
            assert_eq!(cov[[i, i]], 3.0);
        }
    }

    #[test]
    fn coefficient_covariance_matches_samples() {
        let p = 4;
        let model = CoefficientModel::<f64>::sparse_uniform(p, 2, NonzeroLaw::Rademacher).unwrap();
        let expect = coefficient_covariance(&model);
        let mut rng = rng_from_seed(14);
        let draws = 100_000usize;
        let mut mean = Array2::<f64>::zeros((p, p));
        let mut mean_sq = Array2::<f64>::zeros((p, p));
        for _ in 0..draws {
            let x = sample_coefficients(&model, &mut rng);
            for i in 0..p {
                for j in 0..p {
                    let prod = x[i] * x[j];
                    mean[[i, j]] += prod;
                    mean_sq[[i, j]] += prod * prod;
                }
            }
        }
        mean /= draws as f64;
        mean_sq /= draws as f64;
        for i in 0..p {
            for j in 0..p {
                let se = ((mean_sq[[i, j]] - mean[[i, j]].powi(2)) / draws as f64)
                    .sqrt()
                    .max(1e-12);
                assert!(
                    (mean[[i, j]] - expect[[i, j]]).abs() <= 5.0 * se,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn snr_exact_for_sparse_model() {
        let mut rng = rng_from_seed(21);
        let d = DictionaryMatrix::<f64>::random_unit_columns(6, 9, &mut rng);
        let model =
            CoefficientModel::sparse_uniform(9, 3, NonzeroLaw::Gaussian { variance: 1.7 }).unwrap();
        let noise = NoiseModel::new(0.3).unwrap();
        let value = snr(&d, &model, &noise).unwrap();
        let expect = 3.0 * 1.7 / (6.0 * 0.3);
        assert!((value - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn snr_identity_case() {
        let d = DictionaryMatrix::<f64>::identity(5);
        let model = CoefficientModel::general(Array2::eye(5)).unwrap();
        let noise = NoiseModel::new(1.0).unwrap();
        assert!((snr(&d, &model, &noise).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn snr_rejects_zero_noise() {
        let d = DictionaryMatrix::<f64>::identity(3);
        let model = CoefficientModel::sparse_uniform(3, 1, NonzeroLaw::Rademacher).unwrap();
        let noise = NoiseModel::new(0.0).unwrap();
        assert!(matches!(snr(&d, &model, &noise), Err(Error::UndefinedSnr)));
    }

    #[test]
    fn sandwich_hand_values() {
        let (lo, hi) = snr_sandwich(0.5f64, 2, 1.0, 0.1, 20).unwrap();
        assert!((lo - 0.5).abs() < 1e-14);
        assert!((hi - 1.5).abs() < 1e-14);
        let (lo, hi) = snr_sandwich(0.0, 2, 1.0, 0.1, 20).unwrap();
        assert_eq!(lo, hi);
        assert!(snr_sandwich(1.0, 2, 1.0, 0.1, 20).is_err());
    }

    #[test]
    fn batches_reproduce_from_seed() {
        let d = DictionaryMatrix::<f64>::identity(4);
        let model =
            CoefficientModel::sparse_uniform(4, 2, NonzeroLaw::Gaussian { variance: 1.0 }).unwrap();
        let noise = NoiseModel::new(0.5).unwrap();
        let a = generate_batch(&d, &model, &noise, 64, 123).unwrap();
        let b = generate_batch(&d, &model, &noise, 64, 123).unwrap();
        assert_eq!(a, b);
        let c = generate_batch(&d, &model, &noise, 64, 124).unwrap();
        assert_ne!(a.observations, c.observations);
    }
}
