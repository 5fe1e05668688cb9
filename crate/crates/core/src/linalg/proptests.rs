use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

use super::*;
use crate::scalar::c;

fn matrix_from(values: &[(f64, f64)], rows: usize, cols: usize) -> ComplexMatrix<f64> {
    ComplexMatrix::from_vec(rows, cols, values.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
}

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

#[test]
fn unitary_complete_on_random_unit_columns() {
    let mut rng = StdRng::seed_from_u64(2024);
    for case in 0..1000 {
        let n = 2 + case % 15;
        let v = ComplexVector::new(
            (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .normalized()
        .unwrap();
        let u = unitary_complete(&v).unwrap();
        assert!(u.unitarity_residual() <= 1e-10, "case {case}, n = {n}");
        assert!(u.column(0).max_abs_diff(&v) <= 1e-12);
    }
}

proptest! {
    #[test]
    fn mat_exp_semigroup(entries in complex_entries(16), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let raw = matrix_from(&entries, 4, 4);
        let norm = spectral_norm(&raw).unwrap();
        let m = if norm > 2.0 { raw.scale_real(2.0 / norm) } else { raw };
        let whole = mat_exp(&m, t1 + t2).unwrap();
        let split = &mat_exp(&m, t1).unwrap() * &mat_exp(&m, t2).unwrap();
        prop_assert!(whole.max_abs_diff(&split) <= 1e-9);
    }

    #[test]
    fn spectral_norm_submultiplicative(a in complex_entries(9), b in complex_entries(9)) {
        let a = matrix_from(&a, 3, 3);
        let b = matrix_from(&b, 3, 3);
        let lhs = spectral_norm(&(&a * &b)).unwrap();
        let rhs = spectral_norm(&a).unwrap() * spectral_norm(&b).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn kron_mixed_product(a in complex_entries(4), b in complex_entries(4),
                          cc in complex_entries(4), d in complex_entries(4)) {
        let (a, b, cc, d) = (
            matrix_from(&a, 2, 2),
            matrix_from(&b, 2, 2),
            matrix_from(&cc, 2, 2),
            matrix_from(&d, 2, 2),
        );
        let lhs = &kron(&a, &b) * &kron(&cc, &d);
        let rhs = kron(&(&a * &cc), &(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn hermitian_sqrt_squares_back(entries in complex_entries(25)) {
        let g = matrix_from(&entries, 5, 5);
        let psd = &g.adjoint() * &g;
        let r = hermitian_sqrt(&psd).unwrap();
        prop_assert!((&r * &r).max_abs_diff(&psd) <= 1e-10);
        prop_assert!(r.is_hermitian(1e-12));
    }
}
