use std::f64::consts::PI;

use qlde::circuits::{build_case2, experiment_problem, state_preparation};
use qlde::io::{parse_problem, problem_to_json, report_from_json, report_to_json};
use qlde::lcu::{pauli_decompose, schedule_case2};
use qlde::linalg::spectral_norm;
use qlde::reference::{classical_solution, select_order, truncated_solution};
use qlde::solver::{solve, DecompositionChoice, Method};
use qlde::{CVector, Problem32};

#[test]
fn every_method_agrees_on_the_experiment() {
    let p = experiment_problem(0.3 * PI, 0.2 * PI, 0.4).unwrap();
    let oracle = truncated_solution(&p, 4);
    for method in Method::ALL {
        let r = solve(&p, 4, method, DecompositionChoice::Pauli).unwrap();
        if method == Method::ClassicalExact {
            assert!(r.solution.max_abs_diff(&oracle) <= r.bounds.tail_bound);
        } else {
            assert!(r.deviation_from_oracle < 1e-12, "{method}");
        }
        let back = report_from_json(&report_to_json(&r)).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn file_round_trip_then_solve() {
    let p = experiment_problem(0.5 * PI, 0.5 * PI, 0.4).unwrap();
    let text = serde_json::to_string(&problem_to_json(&p, Some(4))).unwrap();
    let file = parse_problem(&text).unwrap();
    assert_eq!(file.problem, p);
    let r = solve(
        &file.problem,
        file.k.unwrap(),
        Method::CircuitCase2,
        DecompositionChoice::FourUnitary,
    )
    .unwrap();
    assert!(r.deviation_from_oracle < 1e-12);
    let (k, _) = select_order(&file.problem, 0.05).unwrap();
    assert_eq!(k, 4);
}

#[test]
fn order_selection_meets_epsilon_against_exact() {
    let p = experiment_problem(0.1 * PI, 0.4 * PI, 0.4).unwrap();
    let exact = classical_solution(&p).unwrap();
    for eps in [1e-2, 1e-4, 1e-8] {
        let (k, _) = select_order(&p, eps).unwrap();
        let err: CVector = CVector::new(
            truncated_solution(&p, k)
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| a - b)
                .collect(),
        );
        assert!(err.norm() <= eps);
    }
}

#[test]
fn single_precision_case2_pipeline() {
    let p64 = experiment_problem(0.2 * PI, 0.3 * PI, 0.4).unwrap();
    let p = Problem32::new(p64.m().cast(), p64.x0().cast(), p64.b().cast(), 0.4).unwrap();
    let dec = pauli_decompose(&p.m().scale_real(1.0 / spectral_norm(p.m()).unwrap())).unwrap();
    let k = 3;
    let sched = schedule_case2(
        p.x0().norm(),
        p.b().norm(),
        spectral_norm(p.m()).unwrap(),
        p.t(),
        k,
        &dec,
    )
    .unwrap();
    let c = build_case2(
        &sched,
        &dec,
        k,
        &state_preparation(p.x0()).unwrap(),
        &state_preparation(p.b()).unwrap(),
    )
    .unwrap();
    let out = c.execute().unwrap();
    let want = truncated_solution(&p64, k);
    let got = out.solution.cast::<f64>();
    assert!(got.max_abs_diff(&want) < 1e-4);
}
