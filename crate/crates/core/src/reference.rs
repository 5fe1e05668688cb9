//! Classical ground truth for `dx/dt = M x + b`: the exact solution, the
//! order-`k` Taylor truncation every circuit must reproduce, and a priori
//! bounds on the truncation error.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat_exp, schur, spectral_norm, ComplexMatrix, ComplexVector};
use crate::scalar::{factorial, Real, C};

/// Default upper limit for the truncation-order search.
pub const DEFAULT_ORDER_CAP: usize = 200;

/// Largest eigenvector-matrix condition number accepted by [`jordan_bound`].
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;

/// A linear differential equation `dx/dt = M x + b` with initial value `x(0)`,
/// evaluated at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdeProblem<T: Real> {
    m: ComplexMatrix<T>,
    x0: ComplexVector<T>,
    b: ComplexVector<T>,
    t: T,
}

impl<T: Real> LdeProblem<T> {
    pub fn new(
        m: ComplexMatrix<T>,
        x0: ComplexVector<T>,
        b: ComplexVector<T>,
        t: T,
    ) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected square",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        if n == 0 {
            return Err(Error::invalid("matrix is empty"));
        }
        if x0.dim() != n {
            return Err(Error::invalid(format!(
                "x0 has length {}, expected {n}",
                x0.dim()
            )));
        }
        if b.dim() != n {
            return Err(Error::invalid(format!(
                "b has length {}, expected {n}",
                b.dim()
            )));
        }
        if !(m.is_finite() && x0.is_finite() && b.is_finite()) {
            return Err(Error::invalid("problem has non-finite entries"));
        }
        if !t.is_finite() || t < T::zero() {
            return Err(Error::invalid(format!(
                "t = {t} must be finite and non-negative"
            )));
        }
        Ok(Self { m, x0, b, t })
    }

    pub fn m(&self) -> &ComplexMatrix<T> {
        &self.m
    }

    pub fn x0(&self) -> &ComplexVector<T> {
        &self.x0
    }

    pub fn b(&self) -> &ComplexVector<T> {
        &self.b
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn with_t(&self, t: T) -> Result<Self> {
        Self::new(self.m.clone(), self.x0.clone(), self.b.clone(), t)
    }
}

/// Error bounds for a truncation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBounds {
    pub tail_bound: f64,
    pub jordan_bound: Option<f64>,
    pub c0: Option<f64>,
    pub k_from_c0: Option<i64>,
}

/// `x(t) = e^{Mt} x(0) + Φ(t) b` with `Φ(t) = Σ_{n≥1} M^{n-1} tⁿ / n!`.
///
/// Evaluated as one exponential of the augmented matrix `[[M, b], [0, 0]]`,
/// so singular `M` needs no special handling.
pub fn classical_solution<T: Real>(p: &LdeProblem<T>) -> Result<ComplexVector<T>> {
    let n = p.dim();
    let mut aug = ComplexMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = p.m[(i, j)];
        }
        aug[(i, n)] = p.b[i];
    }
    let e = mat_exp(&aug, p.t)?;
    let mut lifted = p.x0.clone().into_inner();
    lifted.push(C::one());
    let out = e.mat_vec(&ComplexVector::new(lifted));
    Ok(ComplexVector::new(out.into_inner()[..n].to_vec()))
}

/// Order-`k` truncation
/// `Σ_{m=0}^{k} (Mt)^m x(0)/m! + Σ_{n=1}^{k} M^{n-1} tⁿ b / n!`, by Horner's rule.
pub fn truncated_solution<T: Real>(p: &LdeProblem<T>, k: usize) -> ComplexVector<T> {
    let t = p.t;
    let mut x_part = p.x0.clone();
    for m in (1..=k).rev() {
        let step = p.m.mat_vec(&x_part).scale_real(t / T::from_usize_lossy(m));
        x_part = &p.x0 + &step;
    }
    if k == 0 {
        return x_part;
    }
    let mut b_part = p.b.clone();
    for n in (2..=k).rev() {
        let step = p.m.mat_vec(&b_part).scale_real(t / T::from_usize_lossy(n));
        b_part = &p.b + &step;
    }
    &x_part + &b_part.scale_real(t)
}

/// `Σ_{m>k} aᵐ/m!` summed directly (no cancellation against `eᵃ`).
pub fn exp_series_tail<T: Real>(a: T, k: usize) -> T {
    if a == T::zero() {
        return T::zero();
    }
    let mut term = T::one();
    for m in 1..=k + 1 {
        term = term * a / T::from_usize_lossy(m);
    }
    let mut sum = T::zero();
    let mut m = k + 1;
    loop {
        sum += term;
        m += 1;
        term = term * a / T::from_usize_lossy(m);
        if T::from_usize_lossy(m) > a && term <= sum * T::epsilon() * T::lit(0.01) {
            break;
        }
        if m > k + 10_000 {
            break;
        }
    }
    sum
}

/// Remainder bound `‖x0‖·Σ_{m>k} aᵐ/m! + ‖b‖·Σ_{n>k} ‖M‖^{n-1}tⁿ/n!` with `a = ‖M‖t`.
pub fn tail_bound<T: Real>(p: &LdeProblem<T>, k: usize) -> Result<T> {
    let norm_m = spectral_norm(&p.m)?;
    Ok(tail_bound_with_norm(p, k, norm_m))
}

fn tail_bound_with_norm<T: Real>(p: &LdeProblem<T>, k: usize, norm_m: T) -> T {
    let a = norm_m * p.t;
    let x_tail = p.x0.norm() * exp_series_tail(a, k);
    let b_tail = if norm_m > T::zero() {
        p.b.norm() / norm_m * exp_series_tail(a, k)
    } else if k == 0 {
        p.b.norm() * p.t
    } else {
        T::zero()
    };
    x_tail + b_tail
}

/// Constant `C = (‖x0‖ + ‖b‖/‖M‖)·κ(V)·max_i max(1, e^{t Re λ_i})` for a
/// diagonalizable `M = V Λ V⁻¹`.
pub fn jordan_constant<T: Real>(p: &LdeProblem<T>) -> Result<T> {
    let norm_m = spectral_norm(&p.m)?;
    if norm_m == T::zero() {
        return Err(Error::Unsupported(
            "jordan constant undefined for M = 0".into(),
        ));
    }
    let s = schur(&p.m)?;
    let v = s.eigenvectors();
    let (lo, hi) = crate::linalg::eigen::singular_value_range(&v)?;
    if lo <= T::zero() || hi / lo > T::lit(MAX_EIGENVECTOR_CONDITION) {
        return Err(Error::Unsupported(
            "M is defective or its eigenvector matrix is ill-conditioned".into(),
        ));
    }
    let cond = hi / lo;
    let growth = s
        .eigenvalues()
        .iter()
        .map(|lam| (p.t * lam.re).exp().max(T::one()))
        .fold(T::one(), T::max);
    Ok((p.x0.norm() + p.b.norm() / norm_m) * cond * growth)
}

/// `‖Mt‖^{k+1}/(k+1)! · C` for diagonalizable `M`.
pub fn jordan_bound<T: Real>(p: &LdeProblem<T>, k: usize) -> Result<T> {
    let norm_m = spectral_norm(&p.m)?;
    if norm_m == T::zero() {
        return Ok(tail_bound_with_norm(p, k, norm_m));
    }
    let constant = jordan_constant(p)?;
    let a = norm_m * p.t;
    Ok(a.powi((k + 1) as i32) / factorial::<T>(k + 1) * constant)
}

/// Both bounds for a fixed order; the Jordan bound is `None` when unsupported.
pub fn error_bounds<T: Real>(p: &LdeProblem<T>, k: usize) -> Result<ErrorBounds> {
    let tail = tail_bound(p, k)?;
    let jordan = match jordan_bound(p, k) {
        Ok(v) => Some(v.as_f64()),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ErrorBounds {
        tail_bound: tail.as_f64(),
        jordan_bound: jordan,
        c0: None,
        k_from_c0: None,
    })
}

/// Smallest `k ≤ 200` whose tail bound is at most `epsilon`.
pub fn select_order<T: Real>(p: &LdeProblem<T>, epsilon: T) -> Result<(usize, ErrorBounds)> {
    select_order_with_cap(p, epsilon, DEFAULT_ORDER_CAP)
}

pub fn select_order_with_cap<T: Real>(
    p: &LdeProblem<T>,
    epsilon: T,
    cap: usize,
) -> Result<(usize, ErrorBounds)> {
    if !(epsilon > T::zero()) {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let norm_m = spectral_norm(&p.m)?;
    let k = (0..=cap)
        .find(|&k| tail_bound_with_norm(p, k, norm_m) <= epsilon)
        .ok_or(Error::OrderOverflow {
            cap,
            epsilon: epsilon.as_f64(),
        })?;
    let mut bounds = error_bounds(p, k)?;
    if norm_m > T::zero() {
        if let Ok(constant) = jordan_constant(p) {
            let e = T::E();
            let a = norm_m * p.t;
            let c0 = (e * a - T::one()).exp() * constant / (T::lit(2.0) * T::PI()).sqrt();
            bounds.c0 = Some(c0.as_f64());
            bounds.k_from_c0 = Some(((c0 / epsilon).ln().ceil().as_f64() as i64).max(0));
        }
    }
    Ok((k, bounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, sigma_x};
    use crate::scalar::re;

    fn experiment_problem(x: [f64; 4], b: [f64; 4]) -> LdeProblem<f64> {
        let i2 = ComplexMatrix::identity(2);
        let m = &kron(&i2, &i2) + &kron(&i2, &sigma_x()).scale_real(2.0);
        LdeProblem::new(
            m,
            ComplexVector::from_real(&x),
            ComplexVector::from_real(&b),
            0.4,
        )
        .unwrap()
    }

    fn uniform() -> LdeProblem<f64> {
        experiment_problem([0.5; 4], [0.5; 4])
    }

    /// Experiment inputs: x0 = Ry(β)⊗Ry(β)|00⟩, b = (σx⊗σx) x0.
    fn table_problem(beta: f64) -> LdeProblem<f64> {
        let (s, c) = (beta / 2.0).sin_cos();
        let x = [c * c, c * s, s * c, s * s];
        experiment_problem(x, [x[3], x[2], x[1], x[0]])
    }

    #[test]
    fn validation() {
        let m = ComplexMatrix::<f64>::identity(2);
        let v = ComplexVector::zeros(2);
        assert!(LdeProblem::new(m.clone(), v.clone(), v.clone(), -1.0).is_err());
        assert!(LdeProblem::new(m.clone(), ComplexVector::zeros(3), v.clone(), 1.0).is_err());
        assert!(LdeProblem::new(ComplexMatrix::zeros(2, 3), v.clone(), v.clone(), 1.0).is_err());
        assert!(LdeProblem::new(m, v.clone(), v, f64::NAN).is_err());
    }

    #[test]
    fn classical_solution_examples() {
        let x0 = ComplexVector::from_real(&[1.0, -2.0]);
        let b = ComplexVector::from_real(&[0.5, 3.0]);
        let p = LdeProblem::new(ComplexMatrix::zeros(2, 2), x0.clone(), b.clone(), 0.7).unwrap();
        let expected = &x0 + &b.scale_real(0.7);
        assert!(classical_solution(&p).unwrap().max_abs_diff(&expected) < 1e-14);

        let m = ComplexMatrix::diag(&[re(1.0), re(2.0)]);
        let p = LdeProblem::new(m, x0, ComplexVector::zeros(2), 1.0).unwrap();
        let out = classical_solution(&p).unwrap();
        assert!((out[0].re - 1f64.exp()).abs() < 1e-13);
        assert!((out[1].re + 2.0 * 2f64.exp()).abs() < 1e-13);

        // eigenvalue 3 along the uniform vector: e^{1.2}/2 + (e^{1.2} - 1)/6
        let expected = 1.2f64.exp() / 2.0 + (1.2f64.exp() - 1.0) / 6.0;
        let out = classical_solution(&uniform()).unwrap();
        for z in out.iter() {
            assert!((z.re - expected).abs() < 1e-12);
        }
        assert!((expected - 2.04674).abs() < 5e-6);
    }

    #[test]
    fn truncated_solution_examples() {
        let p = uniform();
        assert_eq!(truncated_solution(&p, 0), *p.x0());

        let out = truncated_solution(&uniform(), 4);
        for z in out.iter() {
            assert!((z.re - 2.030).abs() < 5e-4);
        }
        let out = truncated_solution(&table_problem(0.1 * std::f64::consts::PI), 4);
        for (z, want) in out.iter().zip([2.184, 1.676, 0.635, 0.819]) {
            assert!((z.re - want).abs() < 5e-4, "{z} vs {want}");
        }
    }

    #[test]
    fn truncated_matches_explicit_powers() {
        let p = table_problem(0.3);
        let k = 6;
        let mut expected = ComplexVector::zeros(4);
        for m in 0..=k {
            let term = p
                .m()
                .pow(m as u32)
                .mat_vec(p.x0())
                .scale_real(0.4f64.powi(m as i32) / factorial::<f64>(m));
            expected = &expected + &term;
        }
        for n in 1..=k {
            let term = p
                .m()
                .pow(n as u32 - 1)
                .mat_vec(p.b())
                .scale_real(0.4f64.powi(n as i32) / factorial::<f64>(n));
            expected = &expected + &term;
        }
        assert!(truncated_solution(&p, k).max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn tail_bound_examples() {
        let zero = LdeProblem::new(
            ComplexMatrix::<f64>::zeros(2, 2),
            ComplexVector::from_real(&[1.0, 1.0]),
            ComplexVector::from_real(&[1.0, 0.0]),
            2.0,
        )
        .unwrap();
        assert_eq!(tail_bound(&zero, 3).unwrap(), 0.0);

        let p = uniform();
        let bound = tail_bound(&p, 4).unwrap();
        let e = 1.2f64.exp();
        let direct = (e - 3.2944) + ((e - 1.0) / 3.0 - 0.7648);
        assert!((bound - direct).abs() < 1e-12);
        assert!((bound - 0.03429).abs() < 5e-6);

        let actual = (&truncated_solution(&p, 4) - &classical_solution(&p).unwrap()).norm();
        assert!((actual - 0.03428).abs() < 5e-5);
        assert!(actual <= bound);
    }

    #[test]
    fn jordan_bound_examples() {
        let p = uniform();
        let bound = jordan_bound(&p, 4).unwrap();
        let expected = 1.2f64.powi(5) / 120.0 * (4.0 / 3.0) * 1.2f64.exp();
        assert!((bound - expected).abs() < 1e-9);
        assert!((bound - 0.09176).abs() < 5e-4);
        let actual = (&truncated_solution(&p, 4) - &classical_solution(&p).unwrap()).norm();
        assert!(bound >= actual);

        // scalar case
        let t: f64 = 0.9;
        let p = LdeProblem::new(
            ComplexMatrix::identity(1),
            ComplexVector::from_real(&[2.0]),
            ComplexVector::from_real(&[0.5]),
            t,
        )
        .unwrap();
        for k in 0..6 {
            let want = t.powi(k as i32 + 1) * t.exp() * 2.5 / factorial::<f64>(k + 1);
            assert!((jordan_bound(&p, k).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_bound_rejects_defective() {
        let jordan_block =
            ComplexMatrix::<f64>::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let p = LdeProblem::new(
            jordan_block,
            ComplexVector::from_real(&[1.0, 0.0]),
            ComplexVector::zeros(2),
            1.0,
        )
        .unwrap();
        assert!(matches!(jordan_bound(&p, 3), Err(Error::Unsupported(_))));
        let bounds = error_bounds(&p, 3).unwrap();
        assert!(bounds.jordan_bound.is_none());
        assert!(bounds.tail_bound > 0.0);
    }

    #[test]
    fn select_order_examples() {
        let p = uniform();
        let (k, bounds) = select_order(&p, 0.05).unwrap();
        assert_eq!(k, 4);
        assert!((tail_bound(&p, 3).unwrap() - 0.1495).abs() < 5e-5);
        assert!(bounds.c0.is_some() && bounds.k_from_c0.is_some());
        assert_eq!(select_order(&p, 0.0343).unwrap().0, 4);
        assert_eq!(select_order(&p, 0.034).unwrap().0, 5);

        let (k, _) = select_order(&p, 1e-6).unwrap();
        assert!(tail_bound(&p, k).unwrap() <= 1e-6);
        assert!(tail_bound(&p, k - 1).unwrap() > 1e-6);
        assert_eq!(k, 10);

        let zero = LdeProblem::new(
            ComplexMatrix::<f64>::zeros(2, 2),
            ComplexVector::from_real(&[1.0, 0.0]),
            ComplexVector::zeros(2),
            1.0,
        )
        .unwrap();
        assert_eq!(select_order(&zero, 1e-9).unwrap().0, 0);
    }

    #[test]
    fn select_order_overflow_and_bad_epsilon() {
        let big = LdeProblem::new(
            ComplexMatrix::<f64>::identity(1).scale_real(100.0),
            ComplexVector::from_real(&[1.0]),
            ComplexVector::zeros(1),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            select_order_with_cap(&big, 1e-6, 20),
            Err(Error::OrderOverflow { cap: 20, .. })
        ));
        assert!(select_order(&uniform(), 0.0).is_err());
    }

    #[test]
    fn t_zero_truncation_is_initial_value() {
        let p = table_problem(0.7).with_t(0.0).unwrap();
        for k in 0..8 {
            assert_eq!(truncated_solution(&p, k), *p.x0());
        }
    }

    #[test]
    fn singular_m_series_limit() {
        // M = |0⟩⟨0| ⊕ 0 is singular; the closed form with M⁻¹ does not apply.
        let m = ComplexMatrix::diag(&[re(1.5), re(0.0), re(0.0)]);
        let p = LdeProblem::new(
            m,
            ComplexVector::from_real(&[1.0, -1.0, 0.5]),
            ComplexVector::from_real(&[0.3, 2.0, -1.0]),
            1.3,
        )
        .unwrap();
        let exact = classical_solution(&p).unwrap();
        let series = truncated_solution(&p, 60);
        assert!(exact.max_abs_diff(&series) < 1e-9);
        // zero-eigenvalue components grow linearly: x + t b
        assert!((exact[1].re - (-1.0 + 1.3 * 2.0f64)).abs() < 1e-12);
    }
}
