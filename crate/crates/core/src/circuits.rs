//! Circuit builders for the unitary case (Case I), the general LCU case
//! (Case II) and the 4-qubit experiment, plus checkpointed execution.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lcu::{
    aggregate_powers, build_prep_unitaries, pauli_decompose, qudit_levels, schedule_case1,
    CoefficientSchedule, LcuDecomposition, DEFAULT_MAX_AGGREGATED,
};
use crate::linalg::{
    kron, rotation_y, sigma_x, spectral_norm, unitary_complete, ComplexMatrix, ComplexVector,
};
use crate::reference::LdeProblem;
use crate::scalar::Real;
use crate::simulator::{
    check_capacity, postselect, qubits_for, GateOp, QuantumState, RegisterLayout, DEFAULT_MAX_DIM,
};

/// Checkpoint labels, in execution order.
pub const CHECKPOINTS: [&str; 3] = ["psi1", "psi2", "psi3"];

const FIRST_ANCILLA: &str = "anc";

/// An immutable gate sequence on a fixed layout.
#[derive(Debug, Clone)]
pub struct Circuit<T: Real> {
    layout: RegisterLayout,
    gates: Vec<GateOp<T>>,
    checkpoints: BTreeMap<String, usize>,
    ancillas: Vec<String>,
    work: Vec<String>,
    rescale: T,
}

/// Postselected, rescaled circuit output.
#[derive(Debug, Clone)]
pub struct CircuitOutput<T: Real> {
    pub solution: ComplexVector<T>,
    pub success_prob: T,
}

impl<T: Real> Circuit<T> {
    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[GateOp<T>] {
        &self.gates
    }

    /// Label → number of gates applied before the snapshot.
    pub fn checkpoints(&self) -> &BTreeMap<String, usize> {
        &self.checkpoints
    }

    /// Subsystems postselected on level 0.
    pub fn ancillas(&self) -> &[String] {
        &self.ancillas
    }

    pub fn work(&self) -> &[String] {
        &self.work
    }

    /// `ℕ²` (Case I) or `S` (Case II).
    pub fn rescale(&self) -> T {
        self.rescale
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Wire-weighted size: each gate counts the qubits it touches, targets
    /// plus controls, with a qudit counted as its embedding qubits.
    pub fn gate_cost(&self) -> usize {
        let wires = |name: &str| qubits_for(self.layout.levels(name).unwrap_or(2));
        self.gates
            .iter()
            .map(|g| {
                g.targets.iter().map(|t| wires(t)).sum::<usize>()
                    + g.controls.iter().map(|(c, _)| wires(c)).sum::<usize>()
            })
            .sum()
    }

    /// Runs from `|0…0⟩`.
    pub fn run(&self) -> Result<QuantumState<T>> {
        let mut state = QuantumState::basis_state(self.layout.clone());
        for g in &self.gates {
            state.apply(g)?;
        }
        Ok(state)
    }

    /// Postselects the ancillas on zero and rescales.
    pub fn output(&self, state: &QuantumState<T>) -> Result<CircuitOutput<T>> {
        let names: Vec<&str> = self.ancillas.iter().map(String::as_str).collect();
        let (sub, prob) = postselect(state, &names, &vec![0; names.len()])?;
        Ok(CircuitOutput {
            solution: sub.scale_real(self.rescale),
            success_prob: prob,
        })
    }

    /// `run` followed by `output`.
    pub fn execute(&self) -> Result<CircuitOutput<T>> {
        self.output(&self.run()?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("circuit serializes")
    }
}

#[derive(Serialize)]
#[serde(bound = "")]
struct GateRecord<'a, T: Real> {
    name: &'a str,
    targets: &'a [String],
    controls: &'a [(String, usize)],
    matrix: &'a ComplexMatrix<T>,
}

impl<T: Real> Serialize for Circuit<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(bound = "")]
        struct Record<'a, T: Real> {
            layout: &'a [(String, usize)],
            ancillas: &'a [String],
            work: &'a [String],
            rescale: f64,
            checkpoints: &'a BTreeMap<String, usize>,
            gates: Vec<GateRecord<'a, T>>,
        }
        Record {
            layout: self.layout.subsystems(),
            ancillas: &self.ancillas,
            work: &self.work,
            rescale: self.rescale.as_f64(),
            checkpoints: &self.checkpoints,
            gates: self
                .gates
                .iter()
                .map(|g| GateRecord {
                    name: &g.name,
                    targets: &g.targets,
                    controls: &g.controls,
                    matrix: &g.u,
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// Checkpoint name to state.
pub type Snapshots<T> = BTreeMap<String, QuantumState<T>>;

/// Executes `c`, snapshotting the state at every checkpoint.
pub fn run_with_checkpoints<T: Real>(c: &Circuit<T>) -> Result<(QuantumState<T>, Snapshots<T>)> {
    let mut state = QuantumState::basis_state(c.layout.clone());
    let mut snaps = BTreeMap::new();
    let mut marks: Vec<(&String, &usize)> = c.checkpoints.iter().collect();
    marks.sort_by_key(|&(_, &i)| i);
    let mut next = 0;
    for (i, g) in c.gates.iter().enumerate() {
        while next < marks.len() && *marks[next].1 == i {
            snaps.insert(marks[next].0.clone(), state.clone());
            next += 1;
        }
        state.apply(g)?;
    }
    for (label, _) in &marks[next..] {
        snaps.insert((*label).clone(), state.clone());
    }
    Ok((state, snaps))
}

struct Builder<T: Real> {
    gates: Vec<GateOp<T>>,
    checkpoints: BTreeMap<String, usize>,
}

impl<T: Real> Builder<T> {
    fn new() -> Self {
        Self {
            gates: Vec::new(),
            checkpoints: BTreeMap::new(),
        }
    }

    /// Adds a gate unless its matrix is the identity.
    fn push(
        &mut self,
        name: &str,
        targets: &[&str],
        u: &ComplexMatrix<T>,
        controls: &[(&str, usize)],
    ) -> Result<()> {
        if targets.is_empty() || u.is_identity(T::lit(1e-15)) {
            return Ok(());
        }
        self.gates
            .push(GateOp::new(name, targets, u.clone())?.with_controls(controls));
        Ok(())
    }

    fn mark(&mut self, label: &str) {
        self.checkpoints.insert(label.to_string(), self.gates.len());
    }

    fn finish(
        self,
        layout: RegisterLayout,
        ancillas: Vec<String>,
        work: Vec<String>,
        rescale: T,
    ) -> Circuit<T> {
        Circuit {
            layout,
            gates: self.gates,
            checkpoints: self.checkpoints,
            ancillas,
            work,
            rescale,
        }
    }
}

/// Unitary mapping `|0⟩` to `v/‖v‖`; identity for the zero vector.
pub fn state_preparation<T: Real>(v: &ComplexVector<T>) -> Result<ComplexMatrix<T>> {
    match v.normalized() {
        Some(unit) => unitary_complete(&unit),
        None => Ok(ComplexMatrix::identity(v.dim())),
    }
}

fn work_names(dim: usize) -> Result<Vec<String>> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Build(format!(
            "work dimension {dim} is not a power of two ≥ 2"
        )));
    }
    Ok((0..dim.trailing_zeros()).map(|i| format!("w{i}")).collect())
}

fn check_work_unitary<T: Real>(name: &str, u: &ComplexMatrix<T>, dim: usize) -> Result<()> {
    if u.rows() != dim || u.cols() != dim {
        return Err(Error::Build(format!(
            "{name} is {}x{}, work dimension is {dim}",
            u.rows(),
            u.cols()
        )));
    }
    if !u.is_unitary(T::tol(1e-10)) {
        return Err(Error::Build(format!("{name} is not unitary")));
    }
    Ok(())
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn ceil_log2(n: usize) -> usize {
    n.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Case I with the default amplitude cap.
pub fn build_case1<T: Real>(
    sched: &CoefficientSchedule<T>,
    unitaries: &[ComplexMatrix<T>],
    u_x: &ComplexMatrix<T>,
    u_b: &ComplexMatrix<T>,
) -> Result<Circuit<T>> {
    build_case1_with_cap(sched, unitaries, u_x, u_b, DEFAULT_MAX_DIM)
}

/// Case I: one ancilla qubit, `⌈log₂(#unitaries)⌉` selection qubits, work.
///
/// `unitaries[τ]` is weighted by `sched.c[τ]` on the `x(0)` branch and by
/// `sched.d[τ]` on the `b` branch.
pub fn build_case1_with_cap<T: Real>(
    sched: &CoefficientSchedule<T>,
    unitaries: &[ComplexMatrix<T>],
    u_x: &ComplexMatrix<T>,
    u_b: &ComplexMatrix<T>,
    max_dim: usize,
) -> Result<Circuit<T>> {
    if sched.is_case2() {
        return Err(Error::Build(
            "Case-II schedule passed to the Case-I builder".into(),
        ));
    }
    let slots = sched.c.len().max(sched.d.len());
    if unitaries.len() != slots {
        return Err(Error::Build(format!(
            "schedule has {slots} slots but {} unitaries were given",
            unitaries.len()
        )));
    }
    let dim = u_x.rows();
    let work = work_names(dim)?;
    check_work_unitary("u_x", u_x, dim)?;
    check_work_unitary("u_b", u_b, dim)?;
    for (i, u) in unitaries.iter().enumerate() {
        check_work_unitary(&format!("unitary {i}"), u, dim)?;
    }
    let reg: Vec<String> = (0..ceil_log2(slots)).map(|i| format!("r{i}")).collect();
    let mut subsystems = vec![(FIRST_ANCILLA.to_string(), 2)];
    subsystems.extend(reg.iter().chain(&work).map(|n| (n.clone(), 2)));
    let levels: Vec<usize> = subsystems.iter().map(|s| s.1).collect();
    check_capacity(&levels, max_dim)?;
    let layout = RegisterLayout::with_cap(subsystems, max_dim)?;
    let prep = build_prep_unitaries(sched, None)?;

    let (reg_s, work_s) = (strs(&reg), strs(&work));
    let (x_on, b_on) = (sched.cal_c > T::zero(), sched.cal_d > T::zero());
    let mut b = Builder::new();
    b.push("V", &[FIRST_ANCILLA], &prep.v, &[])?;
    if x_on {
        b.push("V_S1", &reg_s, &prep.v_s1, &[(FIRST_ANCILLA, 0)])?;
        b.push("U_x", &work_s, u_x, &[(FIRST_ANCILLA, 0)])?;
    }
    if b_on {
        b.push("V_S2", &reg_s, &prep.v_s2, &[(FIRST_ANCILLA, 1)])?;
        b.push("U_b", &work_s, u_b, &[(FIRST_ANCILLA, 1)])?;
    }
    b.mark("psi1");
    for (tau, u) in unitaries.iter().enumerate() {
        let controls: Vec<(&str, usize)> = reg_s
            .iter()
            .enumerate()
            .map(|(i, r)| (*r, (tau >> (reg_s.len() - 1 - i)) & 1))
            .collect();
        b.push(&format!("U_{tau}"), &work_s, u, &controls)?;
    }
    b.mark("psi2");
    if x_on {
        b.push("W_S1", &reg_s, &prep.w_s1, &[(FIRST_ANCILLA, 0)])?;
    }
    if b_on {
        b.push("W_S2", &reg_s, &prep.w_s2, &[(FIRST_ANCILLA, 1)])?;
    }
    b.push("W", &[FIRST_ANCILLA], &prep.w, &[])?;
    b.mark("psi3");

    let mut ancillas = vec![FIRST_ANCILLA.to_string()];
    ancillas.extend(reg);
    Ok(b.finish(layout, ancillas, work, sched.rescale_factor()))
}

/// Qubits a Case-II register needs: `1 + k + k⌈log₂L'⌉ + log₂N`.
pub fn case2_qubits(k: usize, num_terms: usize, work_dim: usize) -> usize {
    1 + k + k * qubits_for(qudit_levels(num_terms)) + ceil_log2(work_dim)
}

/// Subsystem levels of a Case-II register, in layout order.
pub fn case2_levels(k: usize, num_terms: usize, work_dim: usize) -> Vec<usize> {
    let mut levels = vec![2; 1 + k];
    levels.extend(std::iter::repeat_n(qudit_levels(num_terms), k));
    levels.extend(std::iter::repeat_n(2, ceil_log2(work_dim)));
    levels
}

/// Case II with the default amplitude cap.
pub fn build_case2<T: Real>(
    sched: &CoefficientSchedule<T>,
    dec: &LcuDecomposition<T>,
    k: usize,
    u_x: &ComplexMatrix<T>,
    u_b: &ComplexMatrix<T>,
) -> Result<Circuit<T>> {
    build_case2_with_cap(sched, dec, k, u_x, u_b, DEFAULT_MAX_DIM)
}

/// Case II: one ancilla qubit, `k` order qubits in one-hot-prefix encoding,
/// `k` term-selection qudits, work.
pub fn build_case2_with_cap<T: Real>(
    sched: &CoefficientSchedule<T>,
    dec: &LcuDecomposition<T>,
    k: usize,
    u_x: &ComplexMatrix<T>,
    u_b: &ComplexMatrix<T>,
    max_dim: usize,
) -> Result<Circuit<T>> {
    if !sched.is_case2() {
        return Err(Error::Build(
            "Case-I schedule passed to the Case-II builder".into(),
        ));
    }
    if sched.order() != k {
        return Err(Error::Build(format!(
            "schedule order {} differs from k = {k}",
            sched.order()
        )));
    }
    let dim = u_x.rows();
    let work = work_names(dim)?;
    if dec.dim() != Some(dim) {
        return Err(Error::Build(format!(
            "decomposition dimension {:?} differs from work dimension {dim}",
            dec.dim()
        )));
    }
    check_work_unitary("u_x", u_x, dim)?;
    check_work_unitary("u_b", u_b, dim)?;
    let levels = qudit_levels(dec.len());
    let order: Vec<String> = (1..=k).map(|p| format!("s{p}")).collect();
    let qudits: Vec<String> = (1..=k).map(|p| format!("t{p}")).collect();
    let mut subsystems = vec![(FIRST_ANCILLA.to_string(), 2)];
    subsystems.extend(order.iter().map(|n| (n.clone(), 2)));
    subsystems.extend(qudits.iter().map(|n| (n.clone(), levels)));
    subsystems.extend(work.iter().map(|n| (n.clone(), 2)));
    debug_assert_eq!(
        subsystems.iter().map(|s| s.1).collect::<Vec<_>>(),
        case2_levels(k, dec.len(), dim)
    );
    check_capacity(&case2_levels(k, dec.len(), dim), max_dim)?;
    let layout = RegisterLayout::with_cap(subsystems, max_dim)?;
    let prep = build_prep_unitaries(sched, Some(dec))?;
    let v_t = prep.v_t.as_ref().expect("Case-II prep has V_T");
    let w_t = prep.w_t.as_ref().expect("Case-II prep has W_T");

    let (order_s, work_s) = (strs(&order), strs(&work));
    let (x_on, b_on) = (sched.cal_c > T::zero(), sched.cal_d > T::zero());
    let mut b = Builder::new();
    b.push("V", &[FIRST_ANCILLA], &prep.v, &[])?;
    if x_on {
        b.push("V_S1", &order_s, &prep.v_s1, &[(FIRST_ANCILLA, 0)])?;
        b.push("U_x", &work_s, u_x, &[(FIRST_ANCILLA, 0)])?;
    }
    if b_on {
        b.push("V_S2", &order_s, &prep.v_s2, &[(FIRST_ANCILLA, 1)])?;
        b.push("U_b", &work_s, u_b, &[(FIRST_ANCILLA, 1)])?;
    }
    for q in &qudits {
        b.push("V_T", &[q], v_t, &[])?;
    }
    b.mark("psi1");
    for (s, q) in order.iter().zip(&qudits) {
        for (l, term) in dec.terms().iter().enumerate() {
            b.push(&format!("A_{l}"), &work_s, &term.unitary, &[(s, 1), (q, l)])?;
        }
    }
    b.mark("psi2");
    for q in &qudits {
        b.push("W_T", &[q], w_t, &[])?;
    }
    if x_on {
        b.push("W_S1", &order_s, &prep.w_s1, &[(FIRST_ANCILLA, 0)])?;
    }
    if b_on {
        b.push("W_S2", &order_s, &prep.w_s2, &[(FIRST_ANCILLA, 1)])?;
    }
    b.push("W", &[FIRST_ANCILLA], &prep.w, &[])?;
    b.mark("psi3");

    let mut ancillas = vec![FIRST_ANCILLA.to_string()];
    ancillas.extend(order);
    ancillas.extend(qudits);
    Ok(b.finish(layout, ancillas, work, sched.rescale_factor()))
}

/// `I⊗I + 2·I⊗σx`.
pub fn experiment_matrix<T: Real>() -> ComplexMatrix<T> {
    let id = ComplexMatrix::identity(2);
    &kron(&id, &id) + &kron(&id, &sigma_x()).scale_real(T::lit(2.0))
}

/// `|φ⟩ = R_y(β₁)|0⟩ ⊗ R_y(β₂)|0⟩`.
pub fn experiment_state<T: Real>(beta1: T, beta2: T) -> ComplexVector<T> {
    kron(&rotation_y(beta1), &rotation_y(beta2)).column(0)
}

/// The 4-dimensional instance: `M` as above, `x(0) = φ`, `b = (σx⊗σx)φ`.
pub fn experiment_problem<T: Real>(beta1: T, beta2: T, t: T) -> Result<LdeProblem<T>> {
    let phi = experiment_state(beta1, beta2);
    let xx = kron(&sigma_x(), &sigma_x());
    let b = xx.mat_vec(&phi);
    LdeProblem::new(experiment_matrix(), phi, b, t)
}

/// Experiment circuit at order 4.
pub fn build_experiment<T: Real>(beta1: T, beta2: T, t: T) -> Result<Circuit<T>> {
    build_experiment_with_order(beta1, beta2, t, 4)
}

/// Four qubits `q1, q2, A, B`: the Taylor powers of `M/3 = (I⊗I + 2·I⊗σx)/3`
/// collapse onto `{I⊗I, I⊗σx}`, so one selection qubit suffices and the
/// selected unitary is a CNOT from `q2` onto `B`.
pub fn build_experiment_with_order<T: Real>(
    beta1: T,
    beta2: T,
    t: T,
    k: usize,
) -> Result<Circuit<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "t = {t} must be finite and non-negative"
        )));
    }
    if !beta1.is_finite() || !beta2.is_finite() {
        return Err(Error::invalid("rotation angles must be finite"));
    }
    if k == 0 {
        return Err(Error::Build("experiment circuit needs k ≥ 1".into()));
    }
    let m = experiment_matrix::<T>();
    let norm_m = spectral_norm(&m)?;
    let dec = pauli_decompose(&m.scale_real(T::one() / norm_m))?;
    let sched = schedule_case1(T::one(), T::one(), norm_m, t, k)?;
    let agg = aggregate_powers(&dec, &sched, DEFAULT_MAX_AGGREGATED)?;
    let id = ComplexMatrix::<T>::identity(2);
    let basis = [kron(&id, &id), kron(&id, &sigma_x())];
    let mut xw = vec![T::zero(); 2];
    let mut bw = vec![T::zero(); 2];
    for ((u, &wx), &wb) in agg.unitaries.iter().zip(&agg.x_weights).zip(&agg.b_weights) {
        let slot = basis
            .iter()
            .position(|v| v.max_abs_diff(u) <= T::tol(1e-10))
            .ok_or_else(|| Error::Build("experiment powers left the {I, I⊗σx} span".into()))?;
        xw[slot] += wx;
        bw[slot] += wb;
    }
    let sched = CoefficientSchedule::from_weights(xw, bw)?;
    let prep = build_prep_unitaries(&sched, None)?;
    let layout = RegisterLayout::qubits(&["q1", "q2", "A", "B"])?;

    let mut b = Builder::new();
    b.push("Ry(beta1)", &["A"], &rotation_y(beta1), &[])?;
    b.push("Ry(beta2)", &["B"], &rotation_y(beta2), &[])?;
    b.push("V", &["q1"], &prep.v, &[])?;
    b.push("V_S1", &["q2"], &prep.v_s1, &[("q1", 0)])?;
    if sched.cal_d > T::zero() {
        b.push("V_S2", &["q2"], &prep.v_s2, &[("q1", 1)])?;
        b.push(
            "U_b",
            &["A", "B"],
            &kron(&sigma_x(), &sigma_x()),
            &[("q1", 1)],
        )?;
    }
    b.mark("psi1");
    b.push("CNOT", &["B"], &sigma_x(), &[("q2", 1)])?;
    b.mark("psi2");
    b.push("W_S1", &["q2"], &prep.w_s1, &[("q1", 0)])?;
    if sched.cal_d > T::zero() {
        b.push("W_S2", &["q2"], &prep.w_s2, &[("q1", 1)])?;
    }
    b.push("W", &["q1"], &prep.w, &[])?;
    b.mark("psi3");
    Ok(b.finish(
        layout,
        vec!["q1".into(), "q2".into()],
        vec!["A".into(), "B".into()],
        sched.n_sq,
    ))
}
