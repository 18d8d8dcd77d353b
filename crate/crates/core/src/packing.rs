//! Proof objects made executable: random binary packing codes with verified
//! minimum Hamming distance, and the well-separated dictionary ensembles
//! built from them. Every analytic claim about these objects is re-checked
//! numerically and reported in a certificate rather than asserted.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NeighborhoodSpec;
use crate::linalg::{frob_dist_sq, orthogonal_from_first_column, vec_norm};
use crate::model::DictionaryMatrix;
use crate::real::{real, Real};

/// Default retry budget for the whole-set packing redraw.
pub const DEFAULT_MAX_ATTEMPTS: usize = 100;

/// A set of `P` distinct vectors in `{-1, 1}^d` whose pairwise Hamming
/// distances are all at least `d/10`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingCode {
    /// Vector dimension `d`.
    pub dim: usize,
    /// The code vectors, entries `+1` / `-1`.
    pub vectors: Vec<Vec<i8>>,
    /// Verified minimum pairwise Hamming distance; `None` when the code has
    /// fewer than two vectors (vacuously separated).
    pub min_hamming: Option<usize>,
    /// Whole-set redraws consumed during construction.
    pub attempts: usize,
}

impl PackingCode {
    pub fn size(&self) -> usize {
        self.vectors.len()
    }

    /// Separation requirement `min_hamming >= d/10`, vacuously true for
    /// fewer than two vectors.
    pub fn satisfies_separation(&self) -> bool {
        match self.min_hamming {
            None => true,
            Some(h) => h * 10 >= self.dim,
        }
    }
}

/// Size admissibility `log(P)/d < (1 - 2/10)^2 / 4`; random construction is
/// guaranteed to succeed with positive probability exactly in this regime.
pub fn packing_admissible(dim: usize, size: usize) -> bool {
    let threshold = (1.0 - 2.0 / 10.0f64).powi(2) / 4.0;
    (size as f64).ln() / (dim as f64) < threshold
}

/// Upper bound on the probability that one whole-set draw violates the
/// separation requirement: `exp(-d (1 - 2/10)^2 / 2 + 2 log P)`.
pub fn packing_failure_bound(dim: usize, size: usize) -> f64 {
    (-(dim as f64) * (1.0 - 2.0 / 10.0f64).powi(2) / 2.0 + 2.0 * (size as f64).ln()).exp()
}

fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b.iter()).filter(|(x, y)| x != y).count()
}

/// Exact brute-force minimum pairwise Hamming distance over all `C(P, 2)`
/// pairs; `None` when there are fewer than two vectors.
pub fn verify_packing(code: &PackingCode) -> Option<usize> {
    let n = code.vectors.len();
    if n < 2 {
        return None;
    }
    let mut min = usize::MAX;
    for i in 0..n - 1 {
        for j in i + 1..n {
            min = min.min(hamming(&code.vectors[i], &code.vectors[j]));
        }
    }
    Some(min)
}

/// Draws `size` i.i.d. sign vectors and verifies the `d/10` separation;
/// redraws the whole set on failure, up to `max_attempts` times.
pub fn build_packing<R: Rng + ?Sized>(
    dim: usize,
    size: usize,
    max_attempts: usize,
    rng: &mut R,
) -> Result<PackingCode> {
    if dim == 0 || size == 0 {
        return Err(Error::InvalidParameter(
            "packing needs dim >= 1 and size >= 1".into(),
        ));
    }
    if max_attempts == 0 {
        return Err(Error::InvalidParameter("max_attempts must be >= 1".into()));
    }
    if !packing_admissible(dim, size) {
        return Err(Error::InvalidParameter(format!(
            "inadmissible packing size: log({size})/{dim} = {:.4} >= 0.16",
            (size as f64).ln() / dim as f64
        )));
    }

    for attempt in 1..=max_attempts {
        let vectors: Vec<Vec<i8>> = (0..size)
            .map(|_| {
                (0..dim)
                    .map(|_| if rng.gen_bool(0.5) { 1i8 } else { -1i8 })
                    .collect()
            })
            .collect();
        let mut code = PackingCode {
            dim,
            vectors,
            min_hamming: None,
            attempts: attempt,
        };
        code.min_hamming = verify_packing(&code);
        if code.satisfies_separation() {
            return Ok(code);
        }
    }
    Err(Error::PackingConstruction {
        attempts: max_attempts,
        failure_bound: packing_failure_bound(dim, size),
    })
}

/// Numerical certificate of the ensemble guarantees; all fields are measured
/// on the concrete matrices, never assumed from the construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnsembleCertificate<T: Real> {
    /// Smallest squared pairwise Frobenius distance (`None` if < 2 members).
    pub min_pairwise_sq: Option<T>,
    /// Largest squared pairwise Frobenius distance (`None` if < 2 members).
    pub max_pairwise_sq: Option<T>,
    /// Largest deviation of a member column norm from 1.
    pub max_col_norm_err: T,
    /// Largest Frobenius distance of a member from the reference.
    pub max_radius: T,
    /// Largest `|(D0^T D_{2,l})_{jj}|` over members and columns.
    pub orthogonality_err: T,
    /// Separation parameter the thresholds refer to.
    pub epsilon: T,
    /// Neighborhood radius used for the `max_radius` check, when supplied.
    pub radius: Option<T>,
    /// All checks passed: pairwise squared distances within
    /// `[8 eps (1 - 1e-9), 320 eps (1 + 1e-9)]`, column norms within 1e-10,
    /// inside the radius (when given), orthogonality within 1e-10.
    pub pass: bool,
}

/// The finite set `{D_l}` of well-separated dictionaries used by the
/// detection argument, together with its construction pieces.
#[derive(Debug, Clone)]
pub struct DictionaryEnsemble<T: Real> {
    /// Reference dictionary `D0`.
    pub reference: DictionaryMatrix<T>,
    /// Separation parameter `epsilon`.
    pub epsilon: T,
    /// Scaled separation `epsilon' = 320 epsilon`.
    pub epsilon_prime: T,
    /// The ensemble members, all unit-column and within the neighborhood.
    pub members: Vec<DictionaryMatrix<T>>,
    /// Per-member perturbation matrices `D_{2,l}` (columns orthogonal to the
    /// matching reference column, norms `1/sqrt(4p)`).
    pub perturbations: Vec<Array2<T>>,
    /// Certificate computed at build time.
    pub certificate: EnsembleCertificate<T>,
    /// The packing code behind the perturbations (absent when the ensemble
    /// was reloaded from disk).
    pub code: Option<PackingCode>,
}

impl<T: Real> DictionaryEnsemble<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn signal_dim(&self) -> usize {
        self.reference.rows()
    }

    pub fn coeff_dim(&self) -> usize {
        self.reference.cols()
    }

    /// Reconstructs an ensemble from its serialized pieces, recovering the
    /// perturbations from `D_{2,l} = (D_l - sqrt(1 - eps'/(4p)) D0) / sqrt(eps')`.
    pub fn from_members(
        reference: DictionaryMatrix<T>,
        epsilon: T,
        members: Vec<DictionaryMatrix<T>>,
        radius: Option<T>,
    ) -> Self {
        let epsilon_prime = real::<T>(320.0) * epsilon;
        let p = real::<T>(reference.cols() as f64);
        let blend = (T::one() - epsilon_prime / (real::<T>(4.0) * p)).sqrt();
        let scale = epsilon_prime.sqrt();
        let perturbations = members
            .iter()
            .map(|m| {
                let mut d2 = m.as_array() - &(reference.as_array() * blend);
                d2.mapv_inplace(|x| x / scale);
                d2
            })
            .collect();
        let mut ens = DictionaryEnsemble {
            reference,
            epsilon,
            epsilon_prime,
            members,
            perturbations,
            certificate: EnsembleCertificate {
                min_pairwise_sq: None,
                max_pairwise_sq: None,
                max_col_norm_err: T::zero(),
                max_radius: T::zero(),
                orthogonality_err: T::zero(),
                epsilon,
                radius,
                pass: false,
            },
            code: None,
        };
        ens.certificate = compute_certificate(&ens, radius);
        ens
    }
}

fn compute_certificate<T: Real>(
    ens: &DictionaryEnsemble<T>,
    radius: Option<T>,
) -> EnsembleCertificate<T> {
    let l = ens.members.len();
    let mut min_pairwise_sq = None;
    let mut max_pairwise_sq = None;
    for i in 0..l.saturating_sub(1) {
        for j in i + 1..l {
            let d = frob_dist_sq(&ens.members[i].view(), &ens.members[j].view());
            min_pairwise_sq = Some(min_pairwise_sq.map_or(d, |m: T| m.min(d)));
            max_pairwise_sq = Some(max_pairwise_sq.map_or(d, |m: T| m.max(d)));
        }
    }

    let mut max_col_norm_err = T::zero();
    let mut max_radius = T::zero();
    for member in &ens.members {
        for col in member.as_array().columns() {
            max_col_norm_err = max_col_norm_err.max((vec_norm(&col) - T::one()).abs());
        }
        max_radius = max_radius.max(frob_dist_sq(&member.view(), &ens.reference.view()).sqrt());
    }

    let mut orthogonality_err = T::zero();
    let d0 = ens.reference.as_array();
    for d2 in &ens.perturbations {
        for j in 0..ens.reference.cols() {
            let mut dot = T::zero();
            for i in 0..ens.reference.rows() {
                dot += d0[[i, j]] * d2[[i, j]];
            }
            orthogonality_err = orthogonality_err.max(dot.abs());
        }
    }

    let slack = real::<T>(1e-9);
    let lower = real::<T>(8.0) * ens.epsilon * (T::one() - slack);
    let upper = real::<T>(320.0) * ens.epsilon * (T::one() + slack);
    let norm_tol = real::<T>(1e-10);
    let pairwise_ok = match (min_pairwise_sq, max_pairwise_sq) {
        (Some(min), Some(max)) => min >= lower && max <= upper,
        _ => true,
    };
    let radius_ok = radius.map_or(true, |r| max_radius < r);
    let pass = pairwise_ok
        && max_col_norm_err <= norm_tol
        && radius_ok
        && orthogonality_err <= norm_tol;

    EnsembleCertificate {
        min_pairwise_sq,
        max_pairwise_sq,
        max_col_norm_err,
        max_radius,
        orthogonality_err,
        epsilon: ens.epsilon,
        radius,
        pass,
    }
}

/// Brute-force re-verification of an ensemble against the neighborhood it
/// claims to live in. Failures are reported in the certificate, not thrown.
pub fn verify_ensemble<T: Real>(
    ens: &DictionaryEnsemble<T>,
    spec: &NeighborhoodSpec<T>,
) -> EnsembleCertificate<T> {
    compute_certificate(ens, Some(spec.radius()))
}

/// Builds the `L'`-member ensemble around `reference`:
///
/// 1. packing code of dimension `d = (m-1) p` and size `L'`, entries scaled
///    to `1/sqrt(4 d)` and column-stacked into `(m-1) x p` matrices;
/// 2. per column `j` an orthogonal `U_j` with `U_j e_1 = d_{0,j}`;
/// 3. perturbation columns `d_{2,l,j} = U_j (0, d_{1,l,j})^T`;
/// 4. members `D_l = sqrt(1 - eps'/(4p)) D0 + sqrt(eps') D_{2,l}` with
///    `eps' = 320 eps`.
///
/// Pairwise squared distances then land in `[8 eps, 320 eps]` and each
/// member stays within Frobenius distance `sqrt(eps'/2)` of the reference;
/// both claims are measured into the certificate.
pub fn build_ensemble<T: Real, R: Rng + ?Sized>(
    reference: &DictionaryMatrix<T>,
    epsilon: T,
    l_requested: usize,
    radius: Option<T>,
    rng: &mut R,
) -> Result<DictionaryEnsemble<T>> {
    let m = reference.rows();
    let p = reference.cols();
    let d = m.saturating_sub(1) * p;
    if d < 50 {
        return Err(Error::Precondition {
            name: "dimension_product",
            detail: format!("p(m-1) = {d} < 50"),
        });
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if let Some(r) = radius {
        let cap = r * r / real::<T>(320.0);
        if epsilon > cap {
            return Err(Error::Precondition {
                name: "epsilon_radius",
                detail: format!("epsilon = {epsilon} exceeds r^2/320 = {cap}"),
            });
        }
    }
    if l_requested == 0 {
        return Err(Error::InvalidParameter("need at least one member".into()));
    }
    let log2_cap = d as f64 / 5.0;
    if (l_requested as f64).log2() > log2_cap {
        return Err(Error::Precondition {
            name: "ensemble_size",
            detail: format!("L = {l_requested} exceeds 2^((m-1)p/5) = 2^{log2_cap}"),
        });
    }

    let code = build_packing(d, l_requested, DEFAULT_MAX_ATTEMPTS, rng)?;
    let scale = (real::<T>(4.0) * real::<T>(d as f64)).sqrt().recip();

    // Column rotations taking e_1 to each reference column.
    let rotations: Vec<Array2<T>> = (0..p)
        .map(|j| orthogonal_from_first_column(&reference.as_array().column(j)))
        .collect();

    let epsilon_prime = real::<T>(320.0) * epsilon;
    let blend = (T::one() - epsilon_prime / (real::<T>(4.0) * real::<T>(p as f64))).sqrt();
    let step = epsilon_prime.sqrt();

    let mut members = Vec::with_capacity(l_requested);
    let mut perturbations = Vec::with_capacity(l_requested);
    for vector in &code.vectors {
        let mut d2 = Array2::<T>::zeros((m, p));
        for j in 0..p {
            // lifted column (0, d_{1,l,j})
            let mut lifted = Array1::<T>::zeros(m);
            for i in 0..m - 1 {
                lifted[i + 1] = scale * real::<T>(vector[j * (m - 1) + i] as f64);
            }
            let rotated = rotations[j].dot(&lifted);
            d2.column_mut(j).assign(&rotated);
        }
        let member = reference.as_array() * blend + &(&d2 * step);
        members.push(DictionaryMatrix::new(member)?);
        perturbations.push(d2);
    }

    let mut ens = DictionaryEnsemble {
        reference: reference.clone(),
        epsilon,
        epsilon_prime,
        members,
        perturbations,
        certificate: EnsembleCertificate {
            min_pairwise_sq: None,
            max_pairwise_sq: None,
            max_col_norm_err: T::zero(),
            max_radius: T::zero(),
            orthogonality_err: T::zero(),
            epsilon,
            radius,
            pass: false,
        },
        code: Some(code),
    };
    ens.certificate = compute_certificate(&ens, radius);
    Ok(ens)
}

/// Tail bound `exp(-t^2 / (2 k a^2))` for a sum of `k` i.i.d. zero-mean
/// variables bounded by `a`.
pub fn hoeffding_tail<T: Real>(k: usize, a: T, t: T) -> Result<T> {
    if k == 0 || !(a > T::zero()) || !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "hoeffding_tail needs k >= 1, a > 0, t >= 0; got k={k}, a={a}, t={t}"
        )));
    }
    Ok((-(t * t) / (real::<T>(2.0) * real::<T>(k as f64) * a * a)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::is_on_oblique_manifold;
    use crate::rng::rng_from_seed;

    #[test]
    fn admissibility_boundaries() {
        assert!(packing_admissible(50, 1000)); // ln(1000)/50 ~ 0.138
        assert!(!packing_admissible(50, 1_000_000_000)); // ~0.414
        assert!(packing_admissible(50, 1));
    }

    #[test]
    fn single_vector_code_is_vacuous() {
        let mut rng = rng_from_seed(1);
        let code = build_packing(50, 1, 10, &mut rng).unwrap();
        assert_eq!(code.size(), 1);
        assert_eq!(code.min_hamming, None);
        assert!(code.satisfies_separation());
    }

    #[test]
    fn packing_d50_p1000() {
        let mut rng = rng_from_seed(2);
        let code = build_packing(50, 1000, DEFAULT_MAX_ATTEMPTS, &mut rng).unwrap();
        assert_eq!(code.size(), 1000);
        let min = verify_packing(&code).unwrap();
        assert_eq!(Some(min), code.min_hamming);
        assert!(min >= 5, "min Hamming {min}");
        assert!(code.vectors.iter().all(|v| v.iter().all(|&e| e == 1 || e == -1)));
    }

    #[test]
    fn packing_rejects_inadmissible_size() {
        let mut rng = rng_from_seed(3);
        let err = build_packing(50, 1_000_000_000, 10, &mut rng);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn verify_packing_extremes() {
        let same = PackingCode {
            dim: 4,
            vectors: vec![vec![1, 1, -1, 1], vec![1, 1, -1, 1]],
            min_hamming: None,
            attempts: 1,
        };
        assert_eq!(verify_packing(&same), Some(0));
        let mut flagged = same.clone();
        flagged.min_hamming = verify_packing(&flagged);
        assert!(!flagged.satisfies_separation());

        let antipodal = PackingCode {
            dim: 4,
            vectors: vec![vec![1, 1, 1, 1], vec![-1, -1, -1, -1]],
            min_hamming: None,
            attempts: 1,
        };
        assert_eq!(verify_packing(&antipodal), Some(4));
    }

    #[test]
    fn hoeffding_values() {
        assert_eq!(hoeffding_tail(5, 1.0, 0.0).unwrap(), 1.0);
        let b = hoeffding_tail(50, 1.0, 40.0).unwrap();
        let expect = (-16.0f64).exp();
        assert!((b - expect).abs() <= 1e-12 * expect);
        assert!(hoeffding_tail(0, 1.0, 1.0).is_err());
        assert!(hoeffding_tail(5, 0.0, 1.0).is_err());
    }

    #[test]
    fn hoeffding_dominates_rademacher_tail() {
        // P{ sum of 50 signs >= 20 } = P{ at least 35 of 50 bits set }
        let mut rng = rng_from_seed(4);
        let draws = 1_000_000usize;
        let mut hits = 0usize;
        for _ in 0..draws {
            let mut ones = 0u32;
            for _ in 0..50 {
                if rng.gen_bool(0.5) {
                    ones += 1;
                }
            }
            if 2 * ones as i64 - 50 >= 20 {
                hits += 1;
            }
        }
        let empirical = hits as f64 / draws as f64;
        let bound = hoeffding_tail(50usize, 1.0f64, 20.0).unwrap();
        assert!(
            empirical <= bound,
            "empirical {empirical} vs bound {bound}"
        );
    }

    fn reference_6x10() -> DictionaryMatrix<f64> {
        let mut rng = rng_from_seed(55);
        DictionaryMatrix::random_unit_columns(6, 10, &mut rng)
    }

    #[test]
    fn ensemble_satisfies_all_construction_claims() {
        let d0 = reference_6x10();
        let epsilon = 1.0 / 320.0;
        let mut rng = rng_from_seed(5);
        let radius = (320.0f64 * epsilon).sqrt(); // epsilon = r^2/320 exactly
        let ens = build_ensemble(&d0, epsilon, 64, Some(radius), &mut rng).unwrap();
        assert_eq!(ens.len(), 64);
        assert!((ens.epsilon_prime - 1.0).abs() < 1e-15);

        // members live on the manifold
        for member in &ens.members {
            assert!(is_on_oblique_manifold(&member.view(), 1e-10));
        }
        // perturbation columns have norm 1/sqrt(4p) (p = 10)
        let expect_norm = 1.0 / 40f64.sqrt();
        for d2 in &ens.perturbations {
            for col in d2.columns() {
                assert!((vec_norm(&col) - expect_norm).abs() < 1e-12);
            }
        }
        // member-to-reference distance within eps'/2
        for member in &ens.members {
            let dist_sq = frob_dist_sq(&member.view(), &d0.view());
            assert!(dist_sq <= ens.epsilon_prime / 2.0 + 1e-12);
        }

        let cert = &ens.certificate;
        assert!(cert.pass, "certificate: {cert:?}");
        assert!(cert.min_pairwise_sq.unwrap() >= 8.0 * epsilon * (1.0 - 1e-9));
        assert!(cert.max_pairwise_sq.unwrap() <= 320.0 * epsilon * (1.0 + 1e-9));
        assert!(cert.orthogonality_err <= 1e-10);
        assert!(cert.max_radius < radius);
    }

    #[test]
    fn ensemble_distances_transport_hamming_distances() {
        // ||D_l - D_l'||^2 = eps' * H(l, l') / d exactly, through the
        // orthogonal per-column rotations; also at least eps'/40.
        let d0 = reference_6x10();
        let epsilon = 2e-3;
        let mut rng = rng_from_seed(6);
        let ens = build_ensemble(&d0, epsilon, 16, None, &mut rng).unwrap();
        let code = ens.code.as_ref().unwrap();
        let d = code.dim as f64;
        for i in 0..ens.len() - 1 {
            for j in i + 1..ens.len() {
                let h = code.vectors[i]
                    .iter()
                    .zip(code.vectors[j].iter())
                    .filter(|(a, b)| a != b)
                    .count() as f64;
                let got = frob_dist_sq(&ens.members[i].view(), &ens.members[j].view());
                let expect = ens.epsilon_prime * h / d;
                assert!((got - expect).abs() < 1e-12, "pair ({i},{j})");
                // rotations preserve the pre-rotation distance h/d exactly
                let d2_dist =
                    frob_dist_sq(&ens.perturbations[i].view(), &ens.perturbations[j].view());
                assert!((d2_dist - h / d).abs() < 1e-13);
                assert!(d2_dist >= 1.0 / 40.0 - 1e-12);
                assert!(got >= ens.epsilon_prime / 40.0 - 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_rejects_epsilon_beyond_radius() {
        let d0 = reference_6x10();
        let mut rng = rng_from_seed(7);
        let r = 0.5f64;
        let too_big = r * r / 320.0 * 1.01;
        assert!(matches!(
            build_ensemble(&d0, too_big, 8, Some(r), &mut rng),
            Err(Error::Precondition {
                name: "epsilon_radius",
                ..
            })
        ));
    }

    #[test]
    fn ensemble_rejects_small_problem() {
        let d0 = DictionaryMatrix::<f64>::identity(5); // p(m-1) = 20 < 50
        let mut rng = rng_from_seed(8);
        assert!(matches!(
            build_ensemble(&d0, 1e-3, 4, None, &mut rng),
            Err(Error::Precondition {
                name: "dimension_product",
                ..
            })
        ));
    }

    #[test]
    fn ensemble_rejects_oversized_request() {
        let d0 = reference_6x10(); // d = 50, cap 2^10 = 1024
        let mut rng = rng_from_seed(9);
        assert!(matches!(
            build_ensemble(&d0, 1e-3, 1025, None, &mut rng),
            Err(Error::Precondition {
                name: "ensemble_size",
                ..
            })
        ));
        assert!(build_ensemble(&d0, 1e-3, 1024, None, &mut rng).is_ok());
    }

    #[test]
    fn single_member_certificate_is_vacuous() {
        let d0 = reference_6x10();
        let mut rng = rng_from_seed(10);
        let ens = build_ensemble(&d0, 1e-3, 1, Some(1.0), &mut rng).unwrap();
        let cert = &ens.certificate;
        assert!(cert.min_pairwise_sq.is_none());
        assert!(cert.max_pairwise_sq.is_none());
        assert!(cert.pass);
        assert!(cert.max_col_norm_err <= 1e-10);
    }

    #[test]
    fn corrupted_member_fails_verification() {
        let d0 = reference_6x10();
        let mut rng = rng_from_seed(11);
        let mut ens = build_ensemble(&d0, 1.0 / 320.0, 8, None, &mut rng).unwrap();
        // rescale one column by 1.01 behind the type's back
        let mut raw = ens.members[3].as_array().clone();
        raw.column_mut(2).mapv_inplace(|x| x * 1.01);
        ens.members[3] = DictionaryMatrix::with_tolerance(raw, 0.1).unwrap();
        let spec = NeighborhoodSpec::new(d0, 1.0).unwrap();
        let cert = verify_ensemble(&ens, &spec);
        assert!(!cert.pass);
        assert!((cert.max_col_norm_err - 0.01).abs() < 1e-3);
    }

    #[test]
    fn ensembles_reproduce_from_seed() {
        let d0 = reference_6x10();
        let a = build_ensemble(&d0, 1e-3, 8, None, &mut rng_from_seed(12)).unwrap();
        let b = build_ensemble(&d0, 1e-3, 8, None, &mut rng_from_seed(12)).unwrap();
        for (x, y) in a.members.iter().zip(b.members.iter()) {
            assert_eq!(x.as_array(), y.as_array());
        }
    }
}
