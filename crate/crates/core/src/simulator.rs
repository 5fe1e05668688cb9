//! Exact mixed-radix state-vector simulation.
//!
//! Basis indices are mixed-radix with the first-listed subsystem most
//! significant. Gates act in place.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lcu::LcuDecomposition;
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::scalar::{Real, C};

/// Default amplitude cap (20 qubits).
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

/// Tolerance for the unitarity check on gate matrices.
pub const GATE_UNITARY_TOL: f64 = 1e-10;

/// Qubits needed to embed a subsystem with `levels` levels.
pub fn qubits_for(levels: usize) -> usize {
    levels.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Ordered named subsystems, each with at least two levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    subsystems: Vec<(String, usize)>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl RegisterLayout {
    /// Layout with the default cap of `2^20` amplitudes.
    pub fn new(subsystems: Vec<(String, usize)>) -> Result<Self> {
        Self::with_cap(subsystems, DEFAULT_MAX_DIM)
    }

    /// Convenience: all-qubit layout.
    pub fn qubits(names: &[&str]) -> Result<Self> {
        Self::new(names.iter().map(|n| (n.to_string(), 2)).collect())
    }

    pub fn with_cap(subsystems: Vec<(String, usize)>, cap: usize) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::invalid("layout needs at least one subsystem"));
        }
        for (i, (name, levels)) in subsystems.iter().enumerate() {
            if *levels < 2 {
                return Err(Error::invalid(format!(
                    "subsystem '{name}' has {levels} levels; at least 2 required"
                )));
            }
            if subsystems[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::invalid(format!("duplicate subsystem name '{name}'")));
            }
        }
        let levels: Vec<usize> = subsystems.iter().map(|s| s.1).collect();
        check_capacity(&levels, cap)?;
        let mut strides = vec![1usize; subsystems.len()];
        for i in (0..subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * subsystems[i + 1].1;
        }
        let total_dim = strides[0] * subsystems[0].1;
        Ok(Self {
            subsystems,
            strides,
            total_dim,
        })
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.subsystems.iter().position(|(n, _)| n == name)
    }

    pub fn levels(&self, name: &str) -> Option<usize> {
        self.position(name).map(|i| self.subsystems[i].1)
    }

    /// Qubit count with every qudit rounded up to whole qubits.
    pub fn qubit_count(&self) -> usize {
        self.subsystems.iter().map(|&(_, l)| qubits_for(l)).sum()
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::InvalidGate(format!("unknown subsystem '{name}'")))
    }

    fn digit(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.subsystems[pos].1
    }
}

/// Capacity check for a prospective register, before anything is allocated.
pub fn check_capacity(levels: &[usize], cap: usize) -> Result<()> {
    let required_qubits = levels.iter().map(|&l| qubits_for(l)).sum();
    let mut dim: Option<usize> = Some(1);
    for &l in levels {
        dim = dim.and_then(|d| d.checked_mul(l));
    }
    match dim {
        Some(d) if d <= cap => Ok(()),
        _ => Err(Error::Capacity {
            required_qubits,
            required_dim: levels.iter().map(|&l| l as f64).product(),
            cap,
        }),
    }
}

/// A named gate: `u` on `targets`, active where every control holds its level.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp<T: Real> {
    pub name: String,
    pub targets: Vec<String>,
    pub controls: Vec<(String, usize)>,
    pub u: ComplexMatrix<T>,
}

impl<T: Real> GateOp<T> {
    pub fn new(name: impl Into<String>, targets: &[&str], u: ComplexMatrix<T>) -> Result<Self> {
        let name = name.into();
        if targets.is_empty() {
            return Err(Error::InvalidGate(format!("gate '{name}' has no targets")));
        }
        if !u.is_square() {
            return Err(Error::InvalidGate(format!(
                "gate '{name}': matrix not square"
            )));
        }
        let residual = u.unitarity_residual();
        if !(residual <= T::tol(GATE_UNITARY_TOL)) {
            return Err(Error::InvalidGate(format!(
                "gate '{name}': matrix not unitary (residual {:e})",
                residual.as_f64()
            )));
        }
        Ok(Self {
            name,
            targets: targets.iter().map(|s| s.to_string()).collect(),
            controls: Vec::new(),
            u,
        })
    }

    /// Adds a control requiring `subsystem` to be at `level`.
    pub fn control(mut self, subsystem: &str, level: usize) -> Self {
        self.controls.push((subsystem.to_string(), level));
        self
    }

    pub fn with_controls(mut self, controls: &[(&str, usize)]) -> Self {
        self.controls
            .extend(controls.iter().map(|&(n, l)| (n.to_string(), l)));
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            name: format!("{}†", self.name),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            u: self.u.adjoint(),
        }
    }

    /// Dense operator on the whole layout, `Σ_τ |τ⟩⟨τ| ⊗ U_τ` style; for testing.
    pub fn dense(&self, layout: &RegisterLayout) -> Result<ComplexMatrix<T>> {
        let plan = GatePlan::new(layout, self)?;
        let n = layout.total_dim();
        let cols: Vec<_> = (0..n)
            .map(|j| {
                let mut v = ComplexVector::basis(n, j);
                plan.run(layout, &self.u, v.as_mut_slice());
                v
            })
            .collect();
        ComplexMatrix::from_columns(&cols)
    }
}

/// Precomputed index arithmetic for one gate on one layout.
struct GatePlan {
    offsets: Vec<usize>,
    control_base: usize,
    free: Vec<usize>,
}

impl GatePlan {
    fn new<T: Real>(layout: &RegisterLayout, gate: &GateOp<T>) -> Result<Self> {
        let mut target_pos = Vec::with_capacity(gate.targets.len());
        for t in &gate.targets {
            let pos = layout.require(t)?;
            if target_pos.contains(&pos) {
                return Err(Error::InvalidGate(format!(
                    "gate '{}': target '{t}' repeated",
                    gate.name
                )));
            }
            target_pos.push(pos);
        }
        let dim: usize = target_pos.iter().map(|&p| layout.subsystems[p].1).product();
        if gate.u.rows() != dim {
            return Err(Error::InvalidGate(format!(
                "gate '{}': matrix is {}x{} but targets span {dim} levels",
                gate.name,
                gate.u.rows(),
                gate.u.cols()
            )));
        }
        let mut control_base = 0;
        let mut control_pos = Vec::with_capacity(gate.controls.len());
        for (c, level) in &gate.controls {
            let pos = layout.require(c)?;
            if target_pos.contains(&pos) {
                return Err(Error::InvalidGate(format!(
                    "gate '{}': '{c}' is both control and target",
                    gate.name
                )));
            }
            if control_pos.contains(&pos) {
                return Err(Error::InvalidGate(format!(
                    "gate '{}': control '{c}' repeated",
                    gate.name
                )));
            }
            if *level >= layout.subsystems[pos].1 {
                return Err(Error::InvalidGate(format!(
                    "gate '{}': control level {level} out of range for '{c}'",
                    gate.name
                )));
            }
            control_pos.push(pos);
            control_base += level * layout.strides[pos];
        }
        let mut offsets = vec![0usize; dim];
        for (j, off) in offsets.iter_mut().enumerate() {
            let mut rest = j;
            for &p in target_pos.iter().rev() {
                let l = layout.subsystems[p].1;
                *off += (rest % l) * layout.strides[p];
                rest /= l;
            }
        }
        let free = (0..layout.len())
            .filter(|p| !target_pos.contains(p) && !control_pos.contains(p))
            .collect();
        Ok(Self {
            offsets,
            control_base,
            free,
        })
    }

    /// Calls `f(base)` for every base index with target digits zero and controls satisfied.
    fn for_each_base(&self, layout: &RegisterLayout, mut f: impl FnMut(usize)) {
        let mut digits = vec![0usize; self.free.len()];
        let mut base = self.control_base;
        loop {
            f(base);
            let mut i = self.free.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                let p = self.free[i];
                digits[i] += 1;
                base += layout.strides[p];
                if digits[i] < layout.subsystems[p].1 {
                    break;
                }
                base -= digits[i] * layout.strides[p];
                digits[i] = 0;
            }
        }
    }

    fn run<T: Real>(&self, layout: &RegisterLayout, u: &ComplexMatrix<T>, amps: &mut [C<T>]) {
        let mut buf = vec![C::<T>::zero(); self.offsets.len()];
        self.for_each_base(layout, |base| {
            for (slot, &off) in buf.iter_mut().zip(&self.offsets) {
                *slot = amps[base + off];
            }
            for (r, &off) in self.offsets.iter().enumerate() {
                let row = u.row(r);
                let mut acc = C::<T>::zero();
                for (a, b) in row.iter().zip(&buf) {
                    acc = acc + *a * *b;
                }
                amps[base + off] = acc;
            }
        });
    }
}

/// Normalized state on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T: Real> {
    layout: RegisterLayout,
    amplitudes: ComplexVector<T>,
}

impl<T: Real> QuantumState<T> {
    /// `|0…0⟩`.
    pub fn basis_state(layout: RegisterLayout) -> Self {
        let amplitudes = ComplexVector::basis(layout.total_dim(), 0);
        Self { layout, amplitudes }
    }

    /// State with given amplitudes; must be unit-norm within `1e-9`.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: ComplexVector<T>) -> Result<Self> {
        if amplitudes.dim() != layout.total_dim() {
            return Err(Error::invalid(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.dim(),
                layout.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if !((norm - T::one()).abs() <= T::lit(1e-9)) {
            return Err(Error::invalid(format!(
                "state norm {} differs from 1",
                norm.as_f64()
            )));
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &ComplexVector<T> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVector<T> {
        self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp<T>) -> Result<()> {
        let plan = GatePlan::new(&self.layout, gate)?;
        plan.run(&self.layout, &gate.u, self.amplitudes.as_mut_slice());
        Ok(())
    }

    /// Probability of each level of one subsystem.
    pub fn level_probabilities(&self, name: &str) -> Result<Vec<T>> {
        let pos = self.layout.require(name)?;
        let mut probs = vec![T::zero(); self.layout.subsystems[pos].1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[self.layout.digit(i, pos)] += a.norm_sqr();
        }
        Ok(probs)
    }
}

/// Applies `gate` to `state` in place.
pub fn apply<T: Real>(state: &mut QuantumState<T>, gate: &GateOp<T>) -> Result<()> {
    state.apply(gate)
}

/// Applies `Π_{p=1..j} A_{ℓ_p}` to `work`, where `j` is the number of leading
/// ones in `order_qubits` and `ℓ_p` the level of `qudits[p]` (level 0 when
/// `qudits` is empty, which requires a single-term decomposition).
///
/// Operates directly on work slices rather than through controlled gates.
pub fn joint_controlled_power<T: Real>(
    state: &mut QuantumState<T>,
    order_qubits: &[&str],
    qudits: &[&str],
    dec: &LcuDecomposition<T>,
    work: &[&str],
) -> Result<()> {
    let layout = state.layout.clone();
    let s_pos = order_qubits
        .iter()
        .map(|n| layout.require(n))
        .collect::<Result<Vec<_>>>()?;
    let q_pos = qudits
        .iter()
        .map(|n| layout.require(n))
        .collect::<Result<Vec<_>>>()?;
    if !q_pos.is_empty() && q_pos.len() != s_pos.len() {
        return Err(Error::InvalidGate(
            "one qudit per order qubit required".into(),
        ));
    }
    if q_pos.is_empty() && dec.len() != 1 {
        return Err(Error::InvalidGate(
            "multi-term decomposition needs qudit registers".into(),
        ));
    }
    let work_dim: usize = work
        .iter()
        .map(|n| {
            layout
                .levels(n)
                .ok_or_else(|| Error::InvalidGate(format!("unknown subsystem '{n}'")))
        })
        .product::<Result<usize>>()?;
    if dec.dim() != Some(work_dim) {
        return Err(Error::InvalidGate(format!(
            "decomposition dimension {:?} does not match work dimension {work_dim}",
            dec.dim()
        )));
    }
    // Identity matrix only to reuse the gate index arithmetic over `work`.
    let probe = GateOp {
        name: "joint-power".into(),
        targets: work.iter().map(|s| s.to_string()).collect(),
        controls: Vec::new(),
        u: ComplexMatrix::identity(work_dim),
    };
    let plan = GatePlan::new(&layout, &probe)?;
    if s_pos.iter().chain(&q_pos).any(|p| !plan.free.contains(p)) {
        return Err(Error::InvalidGate(
            "work overlaps the control registers".into(),
        ));
    }
    let amps = state.amplitudes.as_mut_slice();
    let mut slice = ComplexVector::zeros(work_dim);
    plan.for_each_base(&layout, |base| {
        let mut ops = Vec::new();
        for (p, &sp) in s_pos.iter().enumerate() {
            if layout.digit(base, sp) == 1 {
                let level = q_pos.get(p).map_or(0, |&qp| layout.digit(base, qp));
                if let Some(term) = dec.terms().get(level) {
                    ops.push(&term.unitary);
                } else {
                    // padding levels never carry amplitude after V_T
                    ops.push(&probe.u);
                }
            }
        }
        if ops.is_empty() {
            return;
        }
        for (slot, &off) in slice.as_mut_slice().iter_mut().zip(&plan.offsets) {
            *slot = amps[base + off];
        }
        for u in ops {
            slice = u.mat_vec(&slice);
        }
        for (v, &off) in slice.iter().zip(&plan.offsets) {
            amps[base + off] = *v;
        }
    });
    Ok(())
}

/// Amplitudes where each named subsystem sits at its given level, in layout
/// order of the remaining subsystems, not renormalized; plus their total probability.
pub fn postselect<T: Real>(
    state: &QuantumState<T>,
    subsystems: &[&str],
    levels: &[usize],
) -> Result<(ComplexVector<T>, T)> {
    if subsystems.len() != levels.len() {
        return Err(Error::invalid(
            "postselect: names and levels differ in length",
        ));
    }
    let layout = &state.layout;
    let mut fixed = Vec::with_capacity(subsystems.len());
    for (name, &level) in subsystems.iter().zip(levels) {
        let pos = layout.require(name)?;
        if level >= layout.subsystems[pos].1 {
            return Err(Error::invalid(format!(
                "postselect: level {level} out of range for '{name}'"
            )));
        }
        fixed.push((pos, level));
    }
    let mut out = Vec::new();
    let mut prob = T::zero();
    for (i, a) in state.amplitudes.iter().enumerate() {
        if fixed.iter().all(|&(p, l)| layout.digit(i, p) == l) {
            out.push(*a);
            prob += a.norm_sqr();
        }
    }
    Ok((ComplexVector::new(out), prob))
}
