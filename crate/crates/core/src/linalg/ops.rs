use num_traits::{One, Zero};

use super::eigen::{hermitian_eigen, singular_value_range};
use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Default bound on `‖m t‖` above which [`mat_exp`] refuses to run.
pub const DEFAULT_EXP_GUARD: f64 = 700.0;

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    if !m.is_finite() {
        return Err(Error::invalid(
            "spectral_norm: matrix has NaN or infinite entries",
        ));
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(T::zero());
    }
    // Work on the smaller Gram matrix.
    let (_, hi) = if m.rows() < m.cols() {
        singular_value_range(&m.adjoint())?
    } else {
        singular_value_range(m)?
    };
    Ok(hi)
}

/// `e^{m t}` with the default overflow guard.
pub fn mat_exp<T: Real>(m: &ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>> {
    mat_exp_with_guard(m, t, T::lit(DEFAULT_EXP_GUARD))
}

/// `e^{m t}` by scaling and squaring of a truncated Taylor series.
pub fn mat_exp_with_guard<T: Real>(
    m: &ComplexMatrix<T>,
    t: T,
    guard: T,
) -> Result<ComplexMatrix<T>> {
    if !m.is_square() {
        return Err(Error::invalid("mat_exp: matrix must be square"));
    }
    let a = m.scale_real(t);
    if !a.is_finite() {
        return Err(Error::invalid("mat_exp: non-finite entries"));
    }
    let n = a.rows();
    let norm = spectral_norm(&a)?;
    if norm > guard {
        return Err(Error::Range(format!(
            "‖m t‖ = {norm} exceeds the exponential guard {guard}"
        )));
    }

    let one_norm = a.one_norm();
    let half = T::lit(0.5);
    let mut squarings = 0u32;
    let mut scaled_norm = one_norm;
    while scaled_norm > half {
        scaled_norm *= half;
        squarings += 1;
    }
    let b = a.scale_real(T::lit(0.5f64.powi(squarings as i32)));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for j in 1..=40usize {
        term = (&term * &b).scale_real(T::one() / T::from_usize_lossy(j));
        result = &result + &term;
        if term.max_abs() <= T::epsilon() * T::lit(1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C::zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list, left to right. Empty input gives the 1x1 identity.
pub fn kron_all<T: Real>(factors: &[ComplexMatrix<T>]) -> ComplexMatrix<T> {
    factors
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Extends a unit vector to a unitary whose first column is that vector.
///
/// The remaining columns come from Gram-Schmidt over `e_1, e_2, …` in order,
/// skipping candidates whose residual norm falls below `1e-8`.
pub fn unitary_complete<T: Real>(first_column: &ComplexVector<T>) -> Result<ComplexMatrix<T>> {
    let n = first_column.dim();
    if n == 0 {
        return Err(Error::invalid("unitary_complete: empty column"));
    }
    if !first_column.is_finite() {
        return Err(Error::invalid("unitary_complete: non-finite entries"));
    }
    let norm = first_column.norm();
    if (norm - T::one()).abs() > T::tol(1e-10) {
        return Err(Error::invalid(format!(
            "unitary_complete: first column has norm {norm}, expected 1"
        )));
    }
    let mut basis = vec![first_column.scale_real(T::one() / norm)];
    let skip = T::lit(1e-8);
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = ComplexVector::basis(n, i);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &basis {
                let proj = u.dot(&v);
                v = &v - &u.scale(proj);
            }
        }
        let vn = v.norm();
        if vn < skip {
            continue;
        }
        basis.push(v.scale_real(T::one() / vn));
    }
    debug_assert_eq!(basis.len(), n);
    ComplexMatrix::from_columns(&basis)
}

/// Unique positive-semidefinite square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero.
pub fn hermitian_sqrt<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !m.is_square() {
        return Err(Error::invalid("hermitian_sqrt: matrix must be square"));
    }
    let tol = T::tol(1e-10) * m.max_abs().max(T::one());
    if !m.is_hermitian(tol) {
        return Err(Error::invalid("hermitian_sqrt: matrix is not Hermitian"));
    }
    let eig = hermitian_eigen(m)?;
    if let Some(&min) = eig.values.first() {
        if min < -T::tol(1e-10) {
            return Err(Error::NotPsd {
                min_eigenvalue: min.as_f64(),
            });
        }
    }
    Ok(eig.map(|x| x.max(T::zero()).sqrt()))
}

/// Pauli X.
pub fn sigma_x<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_vec(2, 2, vec![C::zero(), C::one(), C::one(), C::zero()]).unwrap()
}

/// Pauli Y.
pub fn sigma_y<T: Real>() -> ComplexMatrix<T> {
    let i = C::i();
    ComplexMatrix::from_vec(2, 2, vec![C::zero(), -i, i, C::zero()]).unwrap()
}

/// Pauli Z.
pub fn sigma_z<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_vec(2, 2, vec![C::one(), C::zero(), C::zero(), -C::<T>::one()]).unwrap()
}

/// `R_y(β) = exp(-i β σ_y / 2)`.
pub fn rotation_y<T: Real>(beta: T) -> ComplexMatrix<T> {
    let half = beta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).unwrap()
}
