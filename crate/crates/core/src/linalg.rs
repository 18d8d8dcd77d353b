//! Dense linear-algebra kernels for the small symmetric matrices this crate
//! works with (Gram matrices of order `s`, conditional covariances of order
//! `m`). Hand-rolled so the whole stack stays generic over the scalar type
//! and dependency-free; all routines are deterministic.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::real::{real, Real};

/// Squared Frobenius norm.
pub fn frob_norm_sq<T: Real>(a: &ArrayView2<'_, T>) -> T {
    a.iter().map(|&x| x * x).sum()
}

/// Squared Frobenius distance between equally shaped matrices.
pub fn frob_dist_sq<T: Real>(a: &ArrayView2<'_, T>, b: &ArrayView2<'_, T>) -> T {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

/// Euclidean norm of a vector.
pub fn vec_norm<T: Real>(v: &ArrayView1<'_, T>) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns `(values, vectors)` with eigenvalues ascending and `vectors`
/// holding the matching orthonormal eigenvectors in its columns, so that
/// `a = V diag(values) V^T`. Converges quadratically; intended for the
/// small orders used here (n up to a few hundred).
pub fn sym_eigen<T: Real>(a: &ArrayView2<'_, T>) -> (Array1<T>, Array2<T>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols(), "sym_eigen needs a square matrix");
    let mut m = a.to_owned();
    let mut v = Array2::<T>::eye(n);
    if n <= 1 {
        return (m.diag().to_owned(), v);
    }

    let scale = m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let stop = scale * T::epsilon() * real::<T>(n as f64);
    let max_sweeps = 64;

    for _ in 0..max_sweeps {
        let mut off_max = T::zero();
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_max = off_max.max(m[[p, q]].abs());
            }
        }
        if off_max <= stop || scale == T::zero() {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= stop {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (real::<T>(2.0) * apq);
                // tan of the rotation angle, smaller root for stability
                let t = if theta.abs() > real::<T>(1e18) {
                    (real::<T>(2.0) * theta).recip()
                } else {
                    let sign = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[[i, i]]
            .partial_cmp(&m[[j, j]])
            .expect("eigenvalues are finite")
    });
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<T>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, dst]] = v[[k, src]];
        }
    }
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues<T: Real>(a: &ArrayView2<'_, T>) -> Array1<T> {
    sym_eigen(a).0
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm_sym<T: Real>(a: &ArrayView2<'_, T>) -> T {
    let values = sym_eigenvalues(a);
    values
        .iter()
        .fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<T: Real>(a: &ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d <= T::zero() {
            return Err(Error::RankDeficient(format!(
                "non-positive pivot {d:?} at column {j}"
            )));
        }
        let ljj = d.sqrt();
        l[[j, j]] = ljj;
        for i in j + 1..n {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = sum / ljj;
        }
    }
    Ok(l)
}

/// Solves `A x = b` given the lower Cholesky factor `l` of `A`.
pub fn chol_solve<T: Real>(l: &ArrayView2<'_, T>, b: &ArrayView1<'_, T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = Array1::<T>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::<T>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix via its Cholesky factor,
/// symmetrized against rounding.
pub fn spd_inverse<T: Real>(a: &ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    let l = cholesky(a)?;
    let mut inv = Array2::<T>::zeros((n, n));
    let mut e = Array1::<T>::zeros(n);
    for j in 0..n {
        e.fill(T::zero());
        e[j] = T::one();
        let col = chol_solve(&l.view(), &e.view());
        inv.column_mut(j).assign(&col);
    }
    let half = real::<T>(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let s = (inv[[i, j]] + inv[[j, i]]) * half;
            inv[[i, j]] = s;
            inv[[j, i]] = s;
        }
    }
    Ok(inv)
}

/// Symmetric square root of a positive-semidefinite matrix via its
/// eigendecomposition; eigenvalues slightly negative from rounding are
/// clamped to zero.
pub fn sym_sqrt<T: Real>(a: &ArrayView2<'_, T>) -> Array2<T> {
    let (values, vectors) = sym_eigen(a);
    let n = a.nrows();
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let root = lam.max(T::zero()).sqrt();
        for i in 0..n {
            scaled[[i, j]] = vectors[[i, j]] * root;
        }
    }
    scaled.dot(&vectors.t())
}

/// Orthogonal matrix `U` with `U e_1 = u` for a unit vector `u`, realized as
/// the Householder reflection through `e_1 - u` (the identity when `u` is
/// `e_1` to within 1e-14 per coordinate; the antipodal case reduces to
/// `diag(-1, 1, .., 1)`).
pub fn orthogonal_from_first_column<T: Real>(u: &ArrayView1<'_, T>) -> Array2<T> {
    let m = u.len();
    let mut v = Array1::<T>::zeros(m);
    v[0] = T::one() - u[0];
    for i in 1..m {
        v[i] = -u[i];
    }
    let tol = real::<T>(1e-14);
    if v.iter().all(|x| x.abs() <= tol) {
        return Array2::<T>::eye(m);
    }
    let norm_sq: T = v.iter().map(|&x| x * x).sum();
    let coef = real::<T>(2.0) / norm_sq;
    let mut h = Array2::<T>::eye(m);
    for i in 0..m {
        for j in 0..m {
            h[[i, j]] -= coef * v[i] * v[j];
        }
    }
    h
}
