//! Eigen-solvers: cyclic Jacobi for Hermitian matrices and a shifted-QR
//! complex Schur decomposition for general square matrices.

use num_traits::{One, Zero};

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_QR_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Eigen-decomposition `m = V diag(values) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Rebuilds `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            if fl == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
///
/// Only the upper triangle's Hermitian part is trusted; the input is
/// symmetrized first.
pub fn hermitian_eigen<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !m.is_square() {
        return Err(Error::invalid("hermitian_eigen needs a square matrix"));
    }
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.rows();
    let half = T::lit(0.5);
    let mut a = (&m.clone() + &m.adjoint()).scale_real(half);
    let mut v = ComplexMatrix::identity(n);

    let total: T = a.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let threshold = total * T::epsilon() * T::epsilon();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] makes a_pq real then zeroes it.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (r + r);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                let jpp = re(cs);
                let jpq = re(sn);
                let jqp = phase.conj() * (-sn);
                let jqq = phase.conj() * cs;

                // a <- a J (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // a <- J† a (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Complex Schur form `m = Z R Z†` with `R` upper triangular and `Z` unitary.
#[derive(Debug, Clone)]
pub struct Schur<T: Real> {
    pub z: ComplexMatrix<T>,
    pub r: ComplexMatrix<T>,
}

impl<T: Real> Schur<T> {
    pub fn eigenvalues(&self) -> Vec<C<T>> {
        (0..self.r.rows()).map(|i| self.r[(i, i)]).collect()
    }

    /// Unit-norm eigenvectors obtained by back-substitution on `R`.
    ///
    /// For a defective matrix the returned columns are (numerically) linearly
    /// dependent; callers detect that through the condition number.
    pub fn eigenvectors(&self) -> ComplexMatrix<T> {
        let n = self.r.rows();
        let scale = self.r.max_abs().max(T::min_positive_value());
        let small = scale * T::epsilon();
        // Off-diagonal round-off of a normal matrix would otherwise be
        // amplified by near-equal eigenvalues.
        let mut r = self.r.clone();
        let flush = small * T::from_usize_lossy(10 * n.max(1));
        for i in 0..n {
            for j in (i + 1)..n {
                if r[(i, j)].norm() <= flush {
                    r[(i, j)] = C::zero();
                }
            }
        }
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let lam = r[(i, i)];
            let mut y = vec![C::<T>::zero(); n];
            y[i] = C::one();
            for j in (0..i).rev() {
                let mut acc = C::<T>::zero();
                for l in (j + 1)..=i {
                    acc = acc + r[(j, l)] * y[l];
                }
                let mut denom = r[(j, j)] - lam;
                if denom.norm() < small {
                    denom = re(small);
                }
                y[j] = -acc / denom;
            }
            let x = self.z.mat_vec(&ComplexVector::new(y));
            cols.push(x.normalized().unwrap_or(x));
        }
        ComplexMatrix::from_columns(&cols).expect("square eigenvector matrix")
    }
}

/// Complex Schur decomposition via Householder reduction to Hessenberg form
/// followed by Wilkinson-shifted QR sweeps with deflation.
pub fn schur<T: Real>(m: &ComplexMatrix<T>) -> Result<Schur<T>> {
    if !m.is_square() {
        return Err(Error::invalid("schur needs a square matrix"));
    }
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.rows();
    let mut h = m.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut h, &mut z);
    if n <= 1 {
        return Ok(Schur { z, r: h });
    }

    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let diag = if diag == T::zero() { h.max_abs() } else { diag };
            if sub <= eps * diag {
                h[(lo, lo - 1)] = C::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_QR_ITERATIONS_PER_EIGENVALUE * 2 {
            return Err(Error::Unsupported(
                "Schur iteration did not converge".into(),
            ));
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + re(h[(hi, hi - 1)].norm() * T::lit(0.75))
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(&mut h, &mut z, lo, hi, mu);
    }
    // Clean strictly-lower part.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = C::zero();
        }
    }
    Ok(Schur { z, r: h })
}

fn wilkinson_shift<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::lit(0.5);
    let tr = (a + d) * half;
    let disc = ((a - d) * half) * ((a - d) * half) + b * c;
    let root = disc.sqrt();
    let l1 = tr + root;
    let l2 = tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_sweep<T: Real>(
    h: &mut ComplexMatrix<T>,
    z: &mut ComplexMatrix<T>,
    lo: usize,
    hi: usize,
    mu: C<T>,
) {
    let n = h.rows();
    for i in lo..=hi {
        h[(i, i)] = h[(i, i)] - mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if r == T::zero() {
            rotations.push((C::one(), C::zero()));
            continue;
        }
        let (ca, cb) = (a / r, b / r);
        // G = [[conj(ca), conj(cb)], [-cb, ca]]
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = ca.conj() * x + cb.conj() * y;
            h[(k + 1, j)] = -cb * x + ca * y;
        }
        rotations.push((ca, cb));
    }
    for (offset, &(ca, cb)) in rotations.iter().enumerate() {
        let k = lo + offset;
        // right-multiply by G† on columns k, k+1
        let top = (k + 2).min(hi + 1);
        for i in 0..top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * ca + y * cb;
            h[(i, k + 1)] = -x * cb.conj() + y * ca.conj();
        }
        for i in 0..n {
            let x = z[(i, k)];
            let y = z[(i, k + 1)];
            z[(i, k)] = x * ca + y * cb;
            z[(i, k + 1)] = -x * cb.conj() + y * ca.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] = h[(i, i)] + mu;
    }
}

fn hessenberg<T: Real>(h: &mut ComplexMatrix<T>, z: &mut ComplexMatrix<T>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm_x: T = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if norm_x == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() {
            C::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C<T>> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm: T = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for vi in v.iter_mut() {
            *vi = *vi / vnorm;
        }
        let two = T::lit(2.0);
        // h <- (I - 2vv†) h
        for j in 0..n {
            let mut dot = C::zero();
            for (idx, vi) in v.iter().enumerate() {
                dot = dot + vi.conj() * h[(k + 1 + idx, j)];
            }
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] = h[(k + 1 + idx, j)] - *vi * dot * two;
            }
        }
        // h <- h (I - 2vv†), z <- z (I - 2vv†)
        for target in [&mut *h, &mut *z] {
            for i in 0..n {
                let mut dot = C::<T>::zero();
                for (idx, vi) in v.iter().enumerate() {
                    dot = dot + target[(i, k + 1 + idx)] * *vi;
                }
                for (idx, vi) in v.iter().enumerate() {
                    target[(i, k + 1 + idx)] = target[(i, k + 1 + idx)] - dot * vi.conj() * re(two);
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = C::zero();
        }
    }
}

/// Extreme singular values `(σ_min, σ_max)` from the eigenvalues of `m†m`.
pub fn singular_value_range<T: Real>(m: &ComplexMatrix<T>) -> Result<(T, T)> {
    let gram = &m.adjoint() * m;
    let eig = hermitian_eigen(&gram)?;
    let clamp = |x: T| x.max(T::zero()).sqrt();
    let lo = eig.values.first().copied().map_or(T::zero(), clamp);
    let hi = eig.values.last().copied().map_or(T::zero(), clamp);
    Ok((lo, hi))
}
