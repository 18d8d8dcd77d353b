//! Geometry of the estimation problem: unit-column (oblique manifold)
//! membership, Frobenius neighborhoods of a reference dictionary, restricted
//! isometry constants, and the unit-ball projection.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, random_subset, SubsetsColex};
use crate::error::{Error, Result};
use crate::linalg::{frob_dist_sq, sym_eigenvalues, vec_norm};
use crate::model::DictionaryMatrix;
use crate::real::{real, Real};

/// Default cap on exhaustive support enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Neighborhood `{D on the manifold : ||D - D0||_F < r}` of a reference
/// dictionary. The radius is capped at `2 sqrt(p)`, beyond which the
/// neighborhood is the whole manifold.
#[derive(Debug, Clone)]
pub struct NeighborhoodSpec<T: Real> {
    reference: DictionaryMatrix<T>,
    radius: T,
}

impl<T: Real> NeighborhoodSpec<T> {
    pub fn new(reference: DictionaryMatrix<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "neighborhood radius must be positive, got {radius}"
            )));
        }
        let max = real::<T>(2.0) * real::<T>(reference.cols() as f64).sqrt();
        if radius > max {
            return Err(Error::InvalidParameter(format!(
                "radius {radius} exceeds 2 sqrt(p) = {max}"
            )));
        }
        Ok(NeighborhoodSpec { reference, radius })
    }

    pub fn reference(&self) -> &DictionaryMatrix<T> {
        &self.reference
    }

    pub fn radius(&self) -> T {
        self.radius
    }
}

/// How a restricted isometry constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    /// All `C(p, s)` supports enumerated; the constant is exact.
    Exact,
    /// Supports sampled uniformly; the constant is a lower estimate.
    MonteCarlo,
}

/// Restricted isometry constant of a given order, with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RipEstimate<T: Real> {
    /// Sparsity order `s`.
    pub order: usize,
    /// The constant `delta_s` (>= 0; a lower estimate under `MonteCarlo`).
    pub delta: T,
    pub method: RipMethod,
    /// Number of supports inspected (`C(p, s)` when exact).
    pub supports_checked: u64,
}

/// True iff every column of `a` has Euclidean norm within `tol` of 1.
pub fn is_on_oblique_manifold<T: Real>(a: &ArrayView2<'_, T>, tol: T) -> bool {
    a.columns()
        .into_iter()
        .all(|col| (vec_norm(&col) - T::one()).abs() <= tol)
}

/// True iff `||D - D0||_F < r` (strict).
pub fn in_neighborhood<T: Real>(
    d: &DictionaryMatrix<T>,
    spec: &NeighborhoodSpec<T>,
) -> Result<bool> {
    let d0 = spec.reference();
    if d.rows() != d0.rows() || d.cols() != d0.cols() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary is {}x{}, reference is {}x{}",
            d.rows(),
            d.cols(),
            d0.rows(),
            d0.cols()
        )));
    }
    let dist = frob_dist_sq(&d.view(), &d0.view()).sqrt();
    Ok(dist < spec.radius())
}

// Largest deviation of the support Gram spectrum from 1:
// max(lambda_max - 1, 1 - lambda_min) of D_S^T D_S.
fn gram_deviation<T: Real>(d: &ArrayView2<'_, T>, support: &[usize]) -> T {
    let s = support.len();
    let mut gram = Array2::<T>::zeros((s, s));
    for (a, &ca) in support.iter().enumerate() {
        for (b, &cb) in support.iter().enumerate().skip(a) {
            let mut dot = T::zero();
            for i in 0..d.nrows() {
                dot += d[[i, ca]] * d[[i, cb]];
            }
            gram[[a, b]] = dot;
            gram[[b, a]] = dot;
        }
    }
    let eig = sym_eigenvalues(&gram.view());
    let lo = eig[0];
    let hi = eig[s - 1];
    (hi - T::one()).max(T::one() - lo)
}

/// Exact restricted isometry constant of order `s`, by enumerating all
/// `C(p, s)` supports in colexicographic order. Uses the default enumeration
/// cap of [`DEFAULT_ENUMERATION_CAP`].
pub fn rip_constant_exact<T: Real>(d: &DictionaryMatrix<T>, s: usize) -> Result<RipEstimate<T>> {
    rip_constant_exact_with_cap(d, s, DEFAULT_ENUMERATION_CAP)
}

/// As [`rip_constant_exact`] with a configurable enumeration cap.
pub fn rip_constant_exact_with_cap<T: Real>(
    d: &DictionaryMatrix<T>,
    s: usize,
    cap: u128,
) -> Result<RipEstimate<T>> {
    let p = d.cols();
    if s == 0 || s > p {
        return Err(Error::InvalidParameter(format!(
            "RIP order must satisfy 1 <= s <= p, got s={s}, p={p}"
        )));
    }
    let count = binomial(p, s).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::EnumerationCap {
            detail: format!("C({p},{s}) = {count} exceeds cap {cap}"),
        });
    }
    let view = d.view();
    let mut delta = T::zero();
    let mut checked = 0u64;
    for support in SubsetsColex::new(p, s) {
        delta = delta.max(gram_deviation(&view, &support));
        checked += 1;
    }
    Ok(RipEstimate {
        order: s,
        delta,
        method: RipMethod::Exact,
        supports_checked: checked,
    })
}

/// Lower estimate of the order-`s` restricted isometry constant from
/// uniformly sampled supports; never exceeds the exact constant, and taking
/// more trials on the same stream only increases the estimate.
pub fn rip_constant_monte_carlo<T: Real, R: Rng + ?Sized>(
    d: &DictionaryMatrix<T>,
    s: usize,
    trials: usize,
    rng: &mut R,
) -> Result<RipEstimate<T>> {
    let p = d.cols();
    if s == 0 || s > p {
        return Err(Error::InvalidParameter(format!(
            "RIP order must satisfy 1 <= s <= p, got s={s}, p={p}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let view = d.view();
    let mut delta = T::zero();
    for _ in 0..trials {
        let support = random_subset(p, s, rng);
        delta = delta.max(gram_deviation(&view, &support));
    }
    Ok(RipEstimate {
        order: s,
        delta,
        method: RipMethod::MonteCarlo,
        supports_checked: trials as u64,
    })
}

/// Projection onto the origin-centered closed unit ball: `v` unchanged when
/// `||v|| <= 1`, else `v / ||v||`.
pub fn project_unit_ball<T: Real>(v: &ArrayView1<'_, T>) -> Array1<T> {
    let norm = vec_norm(v);
    if norm <= T::one() {
        v.to_owned()
    } else {
        v.mapv(|x| x / norm)
    }
}
