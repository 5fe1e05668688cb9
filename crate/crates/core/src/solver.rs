//! Top-level solve: method dispatch, rescaling, success probabilities,
//! repetition estimates and comparison metrics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuits::{
    build_case1_with_cap, build_case2_with_cap, build_experiment_with_order, case2_levels,
    case2_qubits, experiment_matrix, experiment_state, state_preparation, Circuit,
};
use crate::error::{Error, Result};
use crate::lcu::{
    aggregate_powers, four_unitary_decompose, pauli_coefficients, pauli_decompose, schedule_case1,
    schedule_case2, CoefficientSchedule, LcuDecomposition, LcuTerm, DEFAULT_MAX_AGGREGATED,
};
use crate::linalg::{kron, sigma_x, spectral_norm, ComplexMatrix, ComplexVector};
use crate::reference::{
    classical_solution, error_bounds, truncated_solution, ErrorBounds, LdeProblem,
};
use crate::scalar::C;
use crate::simulator::{check_capacity, DEFAULT_MAX_DIM};

/// How a problem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClassicalExact,
    TaylorTruncated,
    CircuitCase1,
    CircuitCase2,
    CircuitExperiment,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ClassicalExact,
        Method::TaylorTruncated,
        Method::CircuitCase1,
        Method::CircuitCase2,
        Method::CircuitExperiment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClassicalExact => "classical-exact",
            Method::TaylorTruncated => "taylor-truncated",
            Method::CircuitCase1 => "circuit-case1",
            Method::CircuitCase2 => "circuit-case2",
            Method::CircuitExperiment => "circuit-experiment",
        }
    }

    pub fn is_circuit(self) -> bool {
        matches!(
            self,
            Method::CircuitCase1 | Method::CircuitCase2 | Method::CircuitExperiment
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

/// Decomposition of `A = M/‖M‖` used by the LCU circuits.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DecompositionChoice {
    #[default]
    Pauli,
    FourUnitary,
    /// Caller-supplied terms; must reconstruct `M/‖M‖`.
    Provided(LcuDecomposition<f64>),
}

impl FromStr for DecompositionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pauli" => Ok(Self::Pauli),
            "four-unitary" => Ok(Self::FourUnitary),
            _ => Err(Error::invalid(format!(
                "unknown decomposition '{s}' (expected pauli or four-unitary)"
            ))),
        }
    }
}

/// Everything a solve produces. Solutions are unnormalized (rescaled).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: ComplexVector<f64>,
    pub method: Method,
    pub k: usize,
    /// `ℕ²` (Case I) or `S` (Case II); 1 for classical methods.
    pub rescale_factor: f64,
    pub success_prob_exact: f64,
    /// `1/rescale²`.
    pub success_prob_estimate: f64,
    /// `exact / estimate`, which equals `‖x_trunc‖²`.
    pub success_ratio: f64,
    /// `s = ⌈rescale⌉`.
    pub repetitions_estimate: u64,
    /// `⌈√rescale⌉`, the alternative reading of `s`.
    pub repetitions_estimate_sqrt: u64,
    /// `s·k`.
    pub queries: u64,
    pub bounds: ErrorBounds,
    /// `‖solution − truncated_solution(k)‖∞`.
    pub deviation_from_oracle: f64,
    /// Register size in qubits (0 for classical methods).
    pub qubits: usize,
    pub gate_count: usize,
}

/// Repetition accounting from a rescale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Repetitions {
    pub s: u64,
    pub s_sqrt: u64,
    pub queries: u64,
}

/// `s = ⌈ℕ²⌉` (or `⌈S⌉`), `queries = s·k`.
pub fn repetitions_estimate(sched: &CoefficientSchedule<f64>, k: usize) -> Repetitions {
    repetitions_from_rescale(sched.rescale_factor(), k)
}

fn repetitions_from_rescale(rescale: f64, k: usize) -> Repetitions {
    let ceil = |x: f64| (x * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let s = ceil(rescale);
    Repetitions {
        s,
        s_sqrt: ceil(rescale.sqrt()),
        queries: s * k as u64,
    }
}

/// `(exact, estimate)`: the postselection probability of `circuit` and `1/rescale²`.
pub fn success_probability(circuit: &Circuit<f64>) -> Result<(f64, f64)> {
    let out = circuit.execute()?;
    Ok((
        out.success_prob,
        1.0 / (circuit.rescale() * circuit.rescale()),
    ))
}

/// Options beyond the method itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub decomposition: DecompositionChoice,
    /// Amplitude cap for circuit registers.
    pub max_dim: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            decomposition: DecompositionChoice::Pauli,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// [`solve_with`] with the default amplitude cap.
pub fn solve(
    p: &LdeProblem<f64>,
    k: usize,
    method: Method,
    decomposition: DecompositionChoice,
) -> Result<SolveReport> {
    solve_with(
        p,
        k,
        method,
        &SolveOptions {
            decomposition,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_with(
    p: &LdeProblem<f64>,
    k: usize,
    method: Method,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let oracle = truncated_solution(p, k);
    let bounds = error_bounds(p, k)?;
    let (solution, rescale, prob, qubits, gates) = match method {
        Method::ClassicalExact => (classical_solution(p)?, 1.0, 1.0, 0, 0),
        Method::TaylorTruncated => (oracle.clone(), 1.0, 1.0, 0, 0),
        Method::CircuitCase1 | Method::CircuitCase2 | Method::CircuitExperiment => {
            let (circuit, n) = match method {
                Method::CircuitCase1 => case1_circuit(p, k, opts)?,
                Method::CircuitCase2 => case2_circuit(p, k, opts)?,
                _ => (experiment_circuit(p, k)?, p.dim()),
            };
            let out = circuit.execute()?;
            let sol = truncate(&out.solution, n)?;
            (
                sol,
                circuit.rescale(),
                out.success_prob,
                circuit.layout().qubit_count(),
                circuit.gate_count(),
            )
        }
    };
    let estimate = 1.0 / (rescale * rescale);
    let reps = repetitions_from_rescale(rescale, k);
    Ok(SolveReport {
        deviation_from_oracle: solution.max_abs_diff(&oracle),
        solution,
        method,
        k,
        rescale_factor: rescale,
        success_prob_exact: prob,
        success_prob_estimate: estimate,
        success_ratio: prob / estimate,
        repetitions_estimate: reps.s,
        repetitions_estimate_sqrt: reps.s_sqrt,
        queries: reps.queries,
        bounds,
        qubits,
        gate_count: gates,
    })
}

/// Drops padding entries, which must be zero.
fn truncate(v: &ComplexVector<f64>, n: usize) -> Result<ComplexVector<f64>> {
    let tail = v.as_slice()[n..]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if tail > 1e-9 * v.inf_norm().max(1.0) {
        return Err(Error::Build(format!(
            "padding amplitudes leaked into the solution ({tail:e})"
        )));
    }
    Ok(ComplexVector::new(v.as_slice()[..n].to_vec()))
}

fn padded_dim(n: usize) -> usize {
    n.max(2).next_power_of_two()
}

fn pad_vector(v: &ComplexVector<f64>, dim: usize) -> ComplexVector<f64> {
    let mut out = v.as_slice().to_vec();
    out.resize(dim, C::new(0.0, 0.0));
    ComplexVector::new(out)
}

/// `a ⊕ fill·I` on the padded dimension.
fn pad_matrix(a: &ComplexMatrix<f64>, dim: usize, fill: f64) -> ComplexMatrix<f64> {
    let n = a.rows();
    let mut out = ComplexMatrix::identity(dim).scale_real(fill);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(i, j)];
        }
    }
    out
}

/// `(A, ‖M‖)`; `A = I` when `M = 0`.
fn normalized_generator(p: &LdeProblem<f64>) -> Result<(ComplexMatrix<f64>, f64)> {
    let norm = spectral_norm(p.m())?;
    if norm == 0.0 {
        Ok((ComplexMatrix::identity(p.dim()), 0.0))
    } else {
        Ok((p.m().scale_real(1.0 / norm), norm))
    }
}

fn padded_decomposition(
    a: &ComplexMatrix<f64>,
    dim: usize,
    choice: &DecompositionChoice,
) -> Result<LcuDecomposition<f64>> {
    match choice {
        DecompositionChoice::Pauli => pauli_decompose(&pad_matrix(a, dim, 0.0)),
        DecompositionChoice::FourUnitary => four_unitary_decompose(&pad_matrix(a, dim, 0.0)),
        DecompositionChoice::Provided(dec) => {
            let residual = dec.residual(a);
            if !(residual <= 1e-9) {
                return Err(Error::invalid(format!(
                    "provided decomposition does not reconstruct M/‖M‖ (residual {residual:e})"
                )));
            }
            let terms = dec
                .terms()
                .iter()
                .map(|t| LcuTerm {
                    alpha: t.alpha,
                    unitary: pad_matrix(&t.unitary, dim, 1.0),
                    label: t.label.clone(),
                })
                .collect();
            LcuDecomposition::new(terms)
        }
    }
}

fn term_count(a: &ComplexMatrix<f64>, dim: usize, choice: &DecompositionChoice) -> Result<usize> {
    Ok(match choice {
        DecompositionChoice::Pauli => pauli_coefficients(&pad_matrix(a, dim, 0.0))?.len(),
        DecompositionChoice::FourUnitary => 4,
        DecompositionChoice::Provided(dec) => dec.len(),
    })
}

/// Case I: `U_m = A^m` when `A` is unitary, otherwise the aggregated powers
/// of the chosen decomposition.
fn case1_circuit(
    p: &LdeProblem<f64>,
    k: usize,
    opts: &SolveOptions,
) -> Result<(Circuit<f64>, usize)> {
    let n = p.dim();
    let dim = padded_dim(n);
    let (a, norm_m) = normalized_generator(p)?;
    let sched = schedule_case1(p.x0().norm(), p.b().norm(), norm_m, p.t(), k)?;
    let (sched, unitaries) = if a.is_unitary(1e-10) {
        let a = pad_matrix(&a, dim, 1.0);
        let powers = (0..=k).map(|m| a.pow(m as u32)).collect();
        (sched, powers)
    } else {
        let dec = padded_decomposition(&a, dim, &opts.decomposition)?;
        let agg = aggregate_powers(&dec, &sched, DEFAULT_MAX_AGGREGATED)?;
        (agg.schedule()?, agg.unitaries)
    };
    let u_x = state_preparation(&pad_vector(p.x0(), dim))?;
    let u_b = state_preparation(&pad_vector(p.b(), dim))?;
    Ok((
        build_case1_with_cap(&sched, &unitaries, &u_x, &u_b, opts.max_dim)?,
        n,
    ))
}

fn case2_circuit(
    p: &LdeProblem<f64>,
    k: usize,
    opts: &SolveOptions,
) -> Result<(Circuit<f64>, usize)> {
    let n = p.dim();
    let dim = padded_dim(n);
    let (a, norm_m) = normalized_generator(p)?;
    let terms = term_count(&a, dim, &opts.decomposition)?;
    if let Err(Error::Capacity {
        required_dim, cap, ..
    }) = check_capacity(&case2_levels(k, terms, dim), opts.max_dim)
    {
        return Err(Error::Capacity {
            required_qubits: case2_qubits(k, terms, dim),
            required_dim,
            cap,
        });
    }
    let dec = padded_decomposition(&a, dim, &opts.decomposition)?;
    let sched = schedule_case2(p.x0().norm(), p.b().norm(), norm_m, p.t(), k, &dec)?;
    let u_x = state_preparation(&pad_vector(p.x0(), dim))?;
    let u_b = state_preparation(&pad_vector(p.b(), dim))?;
    Ok((
        build_case2_with_cap(&sched, &dec, k, &u_x, &u_b, opts.max_dim)?,
        n,
    ))
}

/// Recovers `(β₁, β₂)` when `p` is the experiment instance: `M = I⊗I + 2·I⊗σx`,
/// `x(0) = R_y(β₁)|0⟩ ⊗ R_y(β₂)|0⟩`, `b = (σx⊗σx) x(0)`.
pub fn detect_experiment(p: &LdeProblem<f64>) -> Option<(f64, f64)> {
    const TOL: f64 = 1e-9;
    if p.dim() != 4 || p.m().max_abs_diff(&experiment_matrix()) > TOL {
        return None;
    }
    let x = p.x0();
    if x.iter().any(|z| z.im.abs() > TOL) {
        return None;
    }
    let v: Vec<f64> = x.iter().map(|z| z.re).collect();
    let (r0, r1) = (v[0].hypot(v[1]), v[2].hypot(v[3]));
    let (b0, b1) = if r0 >= r1 {
        (v[0] / r0, v[1] / r0)
    } else {
        (v[2] / r1, v[3] / r1)
    };
    let (a0, a1) = if b0.abs() >= b1.abs() {
        (v[0] / b0, v[2] / b0)
    } else {
        (v[1] / b1, v[3] / b1)
    };
    let beta1 = 2.0 * a1.atan2(a0);
    let beta2 = 2.0 * b1.atan2(b0);
    let phi = experiment_state(beta1, beta2);
    let b = kron(&sigma_x(), &sigma_x()).mat_vec(&phi);
    (phi.max_abs_diff(x) <= TOL && b.max_abs_diff(p.b()) <= TOL).then_some((beta1, beta2))
}

fn experiment_circuit(p: &LdeProblem<f64>, k: usize) -> Result<Circuit<f64>> {
    let (beta1, beta2) = detect_experiment(p).ok_or_else(|| {
        Error::Unsupported(
            "circuit-experiment needs M = I⊗I + 2·I⊗σx, x0 = Ry(β1)|0⟩⊗Ry(β2)|0⟩ and b = (σx⊗σx)x0"
                .into(),
        )
    })?;
    if k == 0 {
        return Err(Error::invalid("circuit-experiment needs k ≥ 1"));
    }
    build_experiment_with_order(beta1, beta2, p.t(), k)
}

/// `Tr(ρ_a ρ_b) / √(Tr ρ_a² · Tr ρ_b²)`.
pub fn fidelity(rho_a: &ComplexMatrix<f64>, rho_b: &ComplexMatrix<f64>) -> Result<f64> {
    for (name, rho) in [("rho_a", rho_a), ("rho_b", rho_b)] {
        if !rho.is_square() {
            return Err(Error::InvalidDensity(format!("{name} is not square")));
        }
        if !rho.is_hermitian(1e-8) {
            return Err(Error::InvalidDensity(format!("{name} is not Hermitian")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidDensity(format!(
                "{name} has trace {} + {}i, expected 1",
                tr.re, tr.im
            )));
        }
    }
    if rho_a.rows() != rho_b.rows() {
        return Err(Error::InvalidDensity("dimension mismatch".into()));
    }
    let overlap = (rho_a * rho_b).trace().re;
    let purity_a = (rho_a * rho_a).trace().re;
    let purity_b = (rho_b * rho_b).trace().re;
    Ok(overlap / (purity_a * purity_b).sqrt())
}

/// `ρ = vv†/‖v‖²`.
pub fn pure_density(v: &ComplexVector<f64>) -> Result<ComplexMatrix<f64>> {
    let u = v
        .normalized()
        .ok_or_else(|| Error::InvalidDensity("zero vector".into()))?;
    let col = ComplexMatrix::from_columns(&[u])?;
    Ok(&col * &col.adjoint())
}

/// `|⟨a|b⟩| / (‖a‖‖b‖)`.
pub fn similarity(a: &ComplexVector<f64>, b: &ComplexVector<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "similarity: dimensions {} and {} differ",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::invalid("similarity: zero vector"));
    }
    Ok(a.dot(b).norm() / (na * nb))
}

/// One row of an experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub report: SolveReport,
    pub similarity: Option<f64>,
}

/// One circuit-experiment solve per `β` (`β₁ = β₂ = β`), in input order.
/// `experimental[i]` (if given) is compared with row `i`.
pub fn run_sweep(
    t: f64,
    k: usize,
    betas: &[f64],
    experimental: Option<&[Vec<f64>]>,
) -> Result<Vec<SweepRow>> {
    if betas.is_empty() {
        return Err(Error::invalid("sweep needs at least one beta"));
    }
    if let Some(exp) = experimental {
        if exp.len() != betas.len() {
            return Err(Error::invalid(format!(
                "{} experimental vectors for {} betas",
                exp.len(),
                betas.len()
            )));
        }
    }
    let rows: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = betas
            .iter()
            .enumerate()
            .map(|(i, &beta)| {
                scope.spawn(move || {
                    let p = crate::circuits::experiment_problem(beta, beta, t)?;
                    let report =
                        solve(&p, k, Method::CircuitExperiment, DecompositionChoice::Pauli)?;
                    let similarity = match experimental {
                        Some(exp) => Some(similarity(
                            &ComplexVector::from_real(&exp[i]),
                            &report.solution,
                        )?),
                        None => None,
                    };
                    Ok(SweepRow {
                        beta,
                        report,
                        similarity,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::experiment_problem;
    use crate::linalg::{sigma_z, unitary_complete};
    use crate::reference::LdeProblem;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::f64::consts::PI;

    fn v(values: &[f64]) -> ComplexVector<f64> {
        ComplexVector::from_real(values)
    }

    #[test]
    fn experiment_solve_beta_02() {
        let p = experiment_problem(0.2 * PI, 0.2 * PI, 0.4).unwrap();
        let r = solve(&p, 4, Method::CircuitExperiment, DecompositionChoice::Pauli).unwrap();
        for (got, want) in r.solution.iter().zip([2.295, 1.951, 1.066, 1.134]) {
            assert!((got.re - want).abs() <= 1e-3);
        }
        assert!(r.deviation_from_oracle <= 1e-9);
        assert!((r.rescale_factor - 4.0592).abs() < 1e-12);
        assert_eq!(r.repetitions_estimate, 5);
        assert_eq!(r.queries, 20);
        assert_eq!(r.repetitions_estimate_sqrt, 3);
        assert!((r.success_prob_estimate - 0.06069).abs() < 1e-5);
        assert_eq!(r.qubits, 4);
    }

    #[test]
    fn success_probability_examples() {
        let p = experiment_problem(0.1 * PI, 0.1 * PI, 0.4).unwrap();
        let r = solve(&p, 4, Method::CircuitExperiment, DecompositionChoice::Pauli).unwrap();
        let xt = truncated_solution(&p, 4);
        assert!((r.success_prob_exact - xt.norm_sqr() / 4.0592f64.powi(2)).abs() < 1e-9);
        assert!((r.success_prob_exact - 0.52504).abs() < 1e-4);
        assert!((r.success_ratio - xt.norm_sqr()).abs() < 1e-9);

        let p = experiment_problem(0.5 * PI, 0.5 * PI, 0.4).unwrap();
        let r = solve(&p, 4, Method::CircuitExperiment, DecompositionChoice::Pauli).unwrap();
        assert!((r.success_prob_exact - 1.0).abs() < 1e-6);

        let p = LdeProblem::new(sigma_x(), v(&[1.0, 0.0]), v(&[0.0, 0.0]), 0.5).unwrap();
        let r = solve(&p, 0, Method::CircuitCase1, DecompositionChoice::Pauli).unwrap();
        assert!((r.success_prob_exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_zero_matrix() {
        let p = LdeProblem::new(
            ComplexMatrix::zeros(3, 3),
            v(&[1.0, 2.0, 3.0]),
            v(&[0.5, -1.0, 0.0]),
            2.0,
        )
        .unwrap();
        let r = solve(&p, 7, Method::ClassicalExact, DecompositionChoice::Pauli).unwrap();
        assert!(r.solution.max_abs_diff(&v(&[2.0, 0.0, 3.0])) < 1e-14);
        assert_eq!(r.success_prob_exact, 1.0);
        for m in [Method::CircuitCase1, Method::CircuitCase2] {
            let r = solve(&p, 2, m, DecompositionChoice::Pauli).unwrap();
            assert!(r.solution.max_abs_diff(&v(&[2.0, 0.0, 3.0])) < 1e-12, "{m}");
        }
    }

    #[test]
    fn repetitions_examples() {
        let sched = schedule_case1(1.0, 1.0, 3.0, 0.4, 4).unwrap();
        assert_eq!(
            repetitions_estimate(&sched, 4),
            Repetitions {
                s: 5,
                s_sqrt: 3,
                queries: 20
            }
        );
        let unit = CoefficientSchedule::from_weights(vec![1.0], vec![]).unwrap();
        assert_eq!(repetitions_estimate(&unit, 0).s, 1);
        let dec = LcuDecomposition::single(ComplexMatrix::identity(2)).unwrap();
        let s4 = schedule_case2(2.0, 0.0, 1.0, 0.0, 3, &dec).unwrap();
        assert_eq!(s4.rescale_factor(), 2.0);
        let four = CoefficientSchedule::from_weights(vec![3.0], vec![1.0]).unwrap();
        assert_eq!(
            repetitions_estimate(&four, 3),
            Repetitions {
                s: 4,
                s_sqrt: 2,
                queries: 12
            }
        );
    }

    #[test]
    fn fidelity_examples() {
        let zero = pure_density(&v(&[1.0, 0.0])).unwrap();
        let one = pure_density(&v(&[0.0, 1.0])).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-15);
        let mixed = ComplexMatrix::identity(2).scale_real(0.5);
        assert!((fidelity(&mixed, &zero).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(matches!(
            fidelity(&sigma_z(), &zero),
            Err(Error::InvalidDensity(_))
        ));
        let mut skew = zero.clone();
        skew[(0, 1)] = C::new(0.1, 0.0);
        assert!(fidelity(&skew, &zero).is_err());
    }

    #[test]
    fn similarity_table_rows() {
        let rows = [
            (0.1, [2.136, 1.570, 0.389, 0.693], 0.9963),
            (0.2, [2.398, 1.962, 0.804, 1.069], 0.9964),
            (0.3, [2.276, 2.186, 1.209, 1.482], 0.9975),
            (0.4, [2.110, 2.252, 1.525, 1.899], 0.9964),
            (0.5, [1.916, 2.176, 1.821, 2.181], 0.9969),
        ];
        let betas: Vec<f64> = rows.iter().map(|r| r.0 * PI).collect();
        let exp: Vec<Vec<f64>> = rows.iter().map(|r| r.1.to_vec()).collect();
        let sweep = run_sweep(0.4, 4, &betas, Some(&exp)).unwrap();
        for (row, (_, _, want)) in sweep.iter().zip(rows) {
            assert!((row.similarity.unwrap() - want).abs() <= 5e-4);
        }
        let theory = v(&[2.184, 1.676, 0.635, 0.819]);
        assert!((similarity(&v(&rows[0].1), &theory).unwrap() - 0.9963).abs() <= 3e-4);
        assert!(similarity(&theory, &v(&[0.0; 4])).is_err());
    }

    #[test]
    fn sweep_zero_beta() {
        let rows = run_sweep(0.4, 4, &[0.0], None).unwrap();
        let p = experiment_problem(0.0, 0.0, 0.4).unwrap();
        assert!(
            rows[0]
                .report
                .solution
                .max_abs_diff(&truncated_solution(&p, 4))
                < 1e-12
        );
        assert!(rows[0].similarity.is_none());
        assert!(run_sweep(0.4, 4, &[], None).is_err());
    }

    #[test]
    fn experiment_detection() {
        let p = experiment_problem(0.37, -1.1, 0.4).unwrap();
        let (b1, b2) = detect_experiment(&p).unwrap();
        assert!(experiment_state(b1, b2).max_abs_diff(p.x0()) < 1e-12);
        let other =
            LdeProblem::new(experiment_matrix(), p.x0().clone(), p.x0().clone(), 0.4).unwrap();
        assert!(detect_experiment(&other).is_none());
        assert!(matches!(
            solve(
                &other,
                4,
                Method::CircuitExperiment,
                DecompositionChoice::Pauli
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn case1_unitary_and_aggregated_paths() {
        let mut rng = StdRng::seed_from_u64(41);
        let col = ComplexVector::new((0..3).map(|_| C::new(rng.gen(), rng.gen())).collect());
        let u = unitary_complete(&col.normalized().unwrap()).unwrap();
        // non power-of-two dimension, unitary A
        let p = LdeProblem::new(
            u.scale_real(0.8),
            v(&[1.0, 0.0, 1.0]),
            v(&[0.0, 1.0, 0.5]),
            0.9,
        )
        .unwrap();
        let r = solve(&p, 3, Method::CircuitCase1, DecompositionChoice::Pauli).unwrap();
        assert!(r.deviation_from_oracle < 1e-9);
        // non-unitary A goes through aggregation
        let p = experiment_problem(0.3, 0.2, 0.4).unwrap();
        let r = solve(&p, 4, Method::CircuitCase1, DecompositionChoice::Pauli).unwrap();
        assert!(r.deviation_from_oracle < 1e-9);
        assert!((r.rescale_factor - 4.0592).abs() < 1e-12);
    }

    #[test]
    fn case2_decomposition_choices() {
        let p = experiment_problem(0.3, 0.2, 0.25).unwrap();
        for choice in [DecompositionChoice::Pauli, DecompositionChoice::FourUnitary] {
            let r = solve(&p, 2, Method::CircuitCase2, choice).unwrap();
            assert!(r.deviation_from_oracle < 1e-9);
        }
        let dec = pauli_decompose(&experiment_matrix().scale_real(1.0 / 3.0)).unwrap();
        let r = solve(
            &p,
            2,
            Method::CircuitCase2,
            DecompositionChoice::Provided(dec),
        )
        .unwrap();
        assert!(r.deviation_from_oracle < 1e-9);
        let wrong = LcuDecomposition::single(ComplexMatrix::identity(4)).unwrap();
        assert!(solve(
            &p,
            2,
            Method::CircuitCase2,
            DecompositionChoice::Provided(wrong)
        )
        .is_err());
    }

    #[test]
    fn capacity_error_carries_qubits() {
        let mut rng = StdRng::seed_from_u64(3);
        let n = 64;
        let data = (0..n * n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let m = ComplexMatrix::from_vec(n, n, data).unwrap();
        let x0 = v(&vec![1.0; n]);
        let p = LdeProblem::new(m, x0.clone(), x0, 0.1).unwrap();
        match solve(&p, 3, Method::CircuitCase2, DecompositionChoice::Pauli) {
            Err(Error::Capacity {
                required_qubits, ..
            }) => {
                assert_eq!(required_qubits, 1 + 3 + 3 * 12 + 6)
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        let opts = SolveOptions {
            decomposition: DecompositionChoice::FourUnitary,
            max_dim: 1 << 12,
        };
        assert!(matches!(
            solve_with(&p, 3, Method::CircuitCase2, &opts),
            Err(Error::Capacity {
                required_qubits: 16,
                ..
            })
        ));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("quantum".parse::<Method>().is_err());
    }

    proptest! {
        #[test]
        fn fidelity_symmetric(a in prop::collection::vec(-1.0f64..1.0, 6), b in prop::collection::vec(-1.0f64..1.0, 6)) {
            let va = ComplexVector::new(a.chunks(2).map(|p| C::new(p[0], p[1])).collect());
            let vb = ComplexVector::new(b.chunks(2).map(|p| C::new(p[0], p[1])).collect());
            prop_assume!(va.norm() > 1e-3 && vb.norm() > 1e-3);
            let (ra, rb) = (pure_density(&va).unwrap(), pure_density(&vb).unwrap());
            prop_assert!((fidelity(&ra, &rb).unwrap() - fidelity(&rb, &ra).unwrap()).abs() <= 1e-12);
            prop_assert!((fidelity(&ra, &ra).unwrap() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn similarity_scale_invariant(a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 4), s in 0.01f64..100.0) {
            let (va, vb) = (v(&a), v(&b));
            prop_assume!(va.norm() > 1e-3 && vb.norm() > 1e-3);
            let base = similarity(&va, &vb).unwrap();
            prop_assert!((similarity(&va.scale_real(s), &vb).unwrap() - base).abs() <= 1e-12);
        }

        #[test]
        fn circuit_reports_are_consistent(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let beta1 = rng.gen_range(0.0..PI);
            let beta2 = rng.gen_range(0.0..PI);
            let t = rng.gen_range(0.0..0.6);
            let p = experiment_problem(beta1, beta2, t).unwrap();
            for m in [Method::CircuitExperiment, Method::CircuitCase1, Method::CircuitCase2] {
                let k = if m == Method::CircuitCase2 { 2 } else { 4 };
                let r = solve(&p, k, m, DecompositionChoice::Pauli).unwrap();
                prop_assert!(r.deviation_from_oracle <= 1e-9);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&r.success_prob_exact));
                let lhs = r.success_prob_exact * r.rescale_factor * r.rescale_factor;
                prop_assert!((lhs - r.solution.norm_sqr()).abs() <= 1e-9 * r.solution.norm_sqr().max(1.0));
            }
        }
    }
}
