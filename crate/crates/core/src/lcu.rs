//! Linear combinations of unitaries: decompositions of a matrix into weighted
//! unitaries, the coefficient schedules that weight each Taylor branch, and
//! the state-preparation unitaries the circuits consume.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_sqrt, spectral_norm, unitary_complete, ComplexMatrix, ComplexVector,
};
use crate::scalar::{factorial, re, Real, C};

/// Unitarity tolerance for decomposition terms.
pub const UNITARY_TOL: f64 = 1e-10;

/// Pauli coefficients with modulus below this are dropped.
pub const PAULI_DROP_TOL: f64 = 1e-12;

/// Default limit on distinct unitaries produced by [`aggregate_powers`].
pub const DEFAULT_MAX_AGGREGATED: usize = 64;

/// One weighted unitary `alpha · unitary`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuTerm<T: Real> {
    pub alpha: T,
    pub unitary: ComplexMatrix<T>,
    /// Human-readable name, e.g. a Pauli string.
    pub label: Option<String>,
}

/// `A = Σ αᵢ Aᵢ` with every `αᵢ > 0` and every `Aᵢ` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuDecomposition<T: Real> {
    terms: Vec<LcuTerm<T>>,
}

impl<T: Real> LcuDecomposition<T> {
    pub fn new(terms: Vec<LcuTerm<T>>) -> Result<Self> {
        let dim = terms.first().map(|t| t.unitary.rows());
        for (i, term) in terms.iter().enumerate() {
            if !(term.alpha > T::zero()) || !term.alpha.is_finite() {
                return Err(Error::invalid(format!(
                    "term {i}: weight {} must be positive",
                    term.alpha
                )));
            }
            if Some(term.unitary.rows()) != dim {
                return Err(Error::invalid(format!("term {i}: dimension mismatch")));
            }
            let residual = term.unitary.unitarity_residual();
            if residual > T::tol(UNITARY_TOL) {
                return Err(Error::invalid(format!(
                    "term {i}: not unitary (residual {:e})",
                    residual.as_f64()
                )));
            }
        }
        Ok(Self { terms })
    }

    /// Single-term decomposition `A = 1 · U`.
    pub fn single(u: ComplexMatrix<T>) -> Result<Self> {
        Self::new(vec![LcuTerm {
            alpha: T::one(),
            unitary: u,
            label: None,
        }])
    }

    pub fn terms(&self) -> &[LcuTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|t| t.unitary.rows())
    }

    pub fn alpha_sum(&self) -> T {
        self.terms.iter().map(|t| t.alpha).sum()
    }

    /// `Σ αᵢ Aᵢ`.
    pub fn reconstruct(&self) -> Option<ComplexMatrix<T>> {
        let n = self.dim()?;
        Some(
            self.terms
                .iter()
                .fold(ComplexMatrix::zeros(n, n), |acc, t| {
                    &acc + &t.unitary.scale_real(t.alpha)
                }),
        )
    }

    /// `max-abs(Σ αᵢ Aᵢ − a)`.
    pub fn residual(&self, a: &ComplexMatrix<T>) -> T {
        match self.reconstruct() {
            Some(r) if r.rows() == a.rows() && r.cols() == a.cols() => r.max_abs_diff(a),
            Some(_) => T::infinity(),
            None => a.max_abs(),
        }
    }
}

const PAULI_LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Dense Pauli string from per-qubit letter indices (0=I, 1=X, 2=Y, 3=Z),
/// first qubit most significant.
pub fn pauli_string<T: Real>(letters: &[u8]) -> ComplexMatrix<T> {
    let q = letters.len();
    let dim = 1usize << q;
    let (x_mask, z_mask, n_y) = pauli_masks(letters);
    let phase = i_power::<T>(n_y);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let sign = if (col & z_mask).count_ones() % 2 == 1 {
            -T::one()
        } else {
            T::one()
        };
        m[(col ^ x_mask, col)] = phase * sign;
    }
    m
}

fn pauli_masks(letters: &[u8]) -> (usize, usize, u32) {
    let q = letters.len();
    let mut x_mask = 0usize;
    let mut z_mask = 0usize;
    let mut n_y = 0u32;
    for (pos, &l) in letters.iter().enumerate() {
        let bit = 1usize << (q - 1 - pos);
        match l {
            1 => x_mask |= bit,
            2 => {
                x_mask |= bit;
                z_mask |= bit;
                n_y += 1;
            }
            3 => z_mask |= bit,
            _ => {}
        }
    }
    (x_mask, z_mask, n_y)
}

fn i_power<T: Real>(n: u32) -> C<T> {
    match n % 4 {
        0 => C::one(),
        1 => C::i(),
        2 => -C::<T>::one(),
        _ => -C::<T>::i(),
    }
}

/// Non-negligible Pauli coefficients `Tr(P a)/2^q` of `a` (dimension `2^q`),
/// as (per-qubit letters, coefficient), ordered lexicographically (`I < X < Y < Z`).
///
/// Cheap: no matrices are built. Coefficients below `1e-12` in modulus are dropped.
pub fn pauli_coefficients<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<(Vec<u8>, C<T>)>> {
    if !a.is_square() {
        return Err(Error::invalid("pauli_decompose: matrix must be square"));
    }
    let dim = a.rows();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Unsupported(format!(
            "pauli_decompose needs a power-of-two dimension, got {dim}"
        )));
    }
    let q = dim.trailing_zeros() as usize;
    let norm = T::one() / T::from_usize_lossy(dim);
    let mut out = Vec::new();
    for index in 0..(1usize << (2 * q)) {
        let letters: Vec<u8> = (0..q)
            .map(|pos| ((index >> (2 * (q - 1 - pos))) & 3) as u8)
            .collect();
        let (x_mask, z_mask, n_y) = pauli_masks(&letters);
        let mut acc = C::<T>::zero();
        for r in 0..dim {
            let v = a[(r, r ^ x_mask)];
            if (r & z_mask).count_ones() % 2 == 1 {
                acc = acc - v;
            } else {
                acc = acc + v;
            }
        }
        let coef = i_power::<T>(n_y) * acc * norm;
        if coef.norm() >= T::lit(PAULI_DROP_TOL) {
            out.push((letters, coef));
        }
    }
    Ok(out)
}

/// Expands `a` (dimension `2^q`) over the `4^q` Pauli strings.
///
/// The phase of each complex coefficient is folded into its unitary so all
/// weights are positive; see [`pauli_coefficients`] for ordering and dropping.
pub fn pauli_decompose<T: Real>(a: &ComplexMatrix<T>) -> Result<LcuDecomposition<T>> {
    let terms = pauli_coefficients(a)?
        .into_iter()
        .map(|(letters, coef)| {
            let modulus = coef.norm();
            LcuTerm {
                alpha: modulus,
                unitary: pauli_string::<T>(&letters).scale(coef / modulus),
                label: Some(letters.iter().map(|&l| PAULI_LETTERS[l as usize]).collect()),
            }
        })
        .collect();
    LcuDecomposition::new(terms)
}

/// `A = ½(F₁ + F₂ + F₃ + F₄)` for `‖A‖ ≤ 1`, with
/// `B = (A+A†)/2`, `C = (A−A†)/2i`, `F₁,₂ = B ± i√(I−B²)`, `F₃,₄ = iC ∓ √(I−C²)`.
pub fn four_unitary_decompose<T: Real>(a: &ComplexMatrix<T>) -> Result<LcuDecomposition<T>> {
    if !a.is_square() {
        return Err(Error::invalid(
            "four_unitary_decompose: matrix must be square",
        ));
    }
    let norm = spectral_norm(a)?;
    if norm > T::one() + T::tol(1e-10) {
        return Err(Error::NotNormalized {
            norm: norm.as_f64(),
        });
    }
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let half = T::lit(0.5);
    let adj = a.adjoint();
    let b = (a + &adj).scale_real(half);
    let c = (a - &adj).scale(C::new(T::zero(), -half));
    let sqrt_b = hermitian_sqrt(&(&id - &(&b * &b)))?;
    let sqrt_c = hermitian_sqrt(&(&id - &(&c * &c)))?;
    let i = C::<T>::i();
    let ic = c.scale(i);
    let i_sqrt_b = sqrt_b.scale(i);
    let fs = [&b + &i_sqrt_b, &b - &i_sqrt_b, &ic - &sqrt_c, &ic + &sqrt_c];
    let terms = fs
        .into_iter()
        .enumerate()
        .map(|(idx, f)| LcuTerm {
            alpha: half,
            unitary: f,
            label: Some(format!("F{}", idx + 1)),
        })
        .collect();
    LcuDecomposition::new(terms)
}

/// Which circuit family a schedule feeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleVariant<T: Real> {
    CaseI,
    /// `g1 = Σc`, `g2 = Σd`, `s = g1 + g2`.
    CaseII {
        g1: T,
        g2: T,
        s: T,
    },
}

/// Non-negative branch weights and their normalizers.
///
/// Case I: `c[m]` weights the unitary in slot `m` acting on `|x(0)⟩`, `d[i]`
/// the unitary in slot `i` acting on `|b⟩`. Case II: `c[j]` / `d[j-1]` weight
/// the order-`j` / order-`(j-1)` products.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSchedule<T: Real> {
    pub c: Vec<T>,
    pub d: Vec<T>,
    pub cal_c: T,
    pub cal_d: T,
    pub n_sq: T,
    pub variant: ScheduleVariant<T>,
}

impl<T: Real> CoefficientSchedule<T> {
    /// Case-I schedule from explicit weights.
    pub fn from_weights(c: Vec<T>, d: Vec<T>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::invalid("schedule needs at least one x-branch slot"));
        }
        if c.iter()
            .chain(&d)
            .any(|&w| !(w >= T::zero()) || !w.is_finite())
        {
            return Err(Error::invalid(
                "schedule weights must be finite and non-negative",
            ));
        }
        let sc: T = c.iter().copied().sum();
        let sd: T = d.iter().copied().sum();
        Ok(Self {
            c,
            d,
            cal_c: sc.sqrt(),
            cal_d: sd.sqrt(),
            n_sq: sc + sd,
            variant: ScheduleVariant::CaseI,
        })
    }

    /// `ℕ²` for Case I, `S` for Case II; the factor applied to postselected amplitudes.
    pub fn rescale_factor(&self) -> T {
        match self.variant {
            ScheduleVariant::CaseI => self.n_sq,
            ScheduleVariant::CaseII { s, .. } => s,
        }
    }

    pub fn is_case2(&self) -> bool {
        matches!(self.variant, ScheduleVariant::CaseII { .. })
    }

    /// Truncation order implied by the x-branch length.
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }
}

fn taylor_weights<T: Real>(
    norm_x0: T,
    norm_b: T,
    norm_m: T,
    t: T,
    k: usize,
    growth: T,
) -> (Vec<T>, Vec<T>) {
    let a = norm_m * t * growth;
    let c = (0..=k)
        .map(|m| norm_x0 * a.powi(m as i32) / factorial::<T>(m))
        .collect();
    let d = (1..=k)
        .map(|n| norm_b * a.powi(n as i32 - 1) * t / factorial::<T>(n))
        .collect();
    (c, d)
}

fn check_schedule_inputs<T: Real>(norm_x0: T, norm_b: T, norm_m: T, t: T) -> Result<()> {
    for (name, v) in [
        ("norm_x0", norm_x0),
        ("norm_b", norm_b),
        ("norm_m", norm_m),
        ("t", t),
    ] {
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(Error::invalid(format!(
                "{name} = {v} must be finite and non-negative"
            )));
        }
    }
    Ok(())
}

/// `C_m = ‖x0‖(‖M‖t)^m/m!` for `m = 0..k`, `D_n = ‖b‖(‖M‖t)^{n-1} t/n!` for `n = 1..k`.
pub fn schedule_case1<T: Real>(
    norm_x0: T,
    norm_b: T,
    norm_m: T,
    t: T,
    k: usize,
) -> Result<CoefficientSchedule<T>> {
    check_schedule_inputs(norm_x0, norm_b, norm_m, t)?;
    let (c, d) = taylor_weights(norm_x0, norm_b, norm_m, t, k, T::one());
    CoefficientSchedule::from_weights(c, d)
}

/// Case-I weights scaled by `(Σαᵢ)^m` (x-branch) and `(Σαᵢ)^{n-1}` (b-branch).
pub fn schedule_case2<T: Real>(
    norm_x0: T,
    norm_b: T,
    norm_m: T,
    t: T,
    k: usize,
    dec: &LcuDecomposition<T>,
) -> Result<CoefficientSchedule<T>> {
    check_schedule_inputs(norm_x0, norm_b, norm_m, t)?;
    if dec.is_empty() {
        return Err(Error::invalid(
            "schedule_case2 needs a non-empty decomposition",
        ));
    }
    let (c, d) = taylor_weights(norm_x0, norm_b, norm_m, t, k, dec.alpha_sum());
    let mut sched = CoefficientSchedule::from_weights(c, d)?;
    let g1: T = sched.c.iter().copied().sum();
    let g2: T = sched.d.iter().copied().sum();
    sched.variant = ScheduleVariant::CaseII { g1, g2, s: g1 + g2 };
    Ok(sched)
}

/// Basis index of the order-`j` state of a `k`-qubit one-hot-prefix register:
/// `j` leading ones, i.e. `2^k − 2^{k−j}`.
pub fn order_index(k: usize, j: usize) -> usize {
    assert!(j <= k, "order {j} exceeds register size {k}");
    (1usize << k) - (1usize << (k - j))
}

/// Inverse of [`order_index`]; `None` for states that are not a prefix of ones.
pub fn order_of_index(k: usize, index: usize) -> Option<usize> {
    (0..=k).find(|&j| order_index(k, j) == index)
}

/// Levels used for an `L`-term qudit: the next power of two, at least 2.
pub fn qudit_levels(num_terms: usize) -> usize {
    num_terms.max(2).next_power_of_two()
}

/// All preparation unitaries of a circuit and their adjoints.
#[derive(Debug, Clone)]
pub struct PrepUnitaries<T: Real> {
    pub v: ComplexMatrix<T>,
    pub v_s1: ComplexMatrix<T>,
    pub v_s2: ComplexMatrix<T>,
    pub v_t: Option<ComplexMatrix<T>>,
    pub w: ComplexMatrix<T>,
    pub w_s1: ComplexMatrix<T>,
    pub w_s2: ComplexMatrix<T>,
    pub w_t: Option<ComplexMatrix<T>>,
}

impl<T: Real> PrepUnitaries<T> {
    /// Dimension of the second (order) register.
    pub fn register_dim(&self) -> usize {
        self.v_s1.rows()
    }
}

fn completion_or_identity<T: Real>(column: Vec<T>, norm: T) -> Result<ComplexMatrix<T>> {
    let dim = column.len();
    if norm == T::zero() {
        return Ok(ComplexMatrix::identity(dim));
    }
    let v = ComplexVector::new(column.into_iter().map(|x| re(x.sqrt() / norm)).collect());
    unitary_complete(&v)
}

/// `V = [[𝒞, 𝒟], [𝒟, −𝒞]]/ℕ`, order-register preparations `V_S1`, `V_S2`, and
/// for Case II the qudit preparation `V_T` with first column `√(αᵢ/Σα)`.
///
/// A branch with zero weight gets an identity preparation and `V` collapses to
/// `I` (no b-branch) or `σx` (no x-branch).
pub fn build_prep_unitaries<T: Real>(
    sched: &CoefficientSchedule<T>,
    dec: Option<&LcuDecomposition<T>>,
) -> Result<PrepUnitaries<T>> {
    let zero = T::zero();
    let (cal_c, cal_d) = (sched.cal_c, sched.cal_d);
    if cal_c == zero && cal_d == zero {
        return Err(Error::Degenerate("both branches have zero weight".into()));
    }
    let n = (cal_c * cal_c + cal_d * cal_d).sqrt();
    let v = if cal_d == zero {
        ComplexMatrix::identity(2)
    } else if cal_c == zero {
        crate::linalg::sigma_x()
    } else {
        ComplexMatrix::from_real_rows(&[&[cal_c / n, cal_d / n], &[cal_d / n, -cal_c / n]])?
    };

    let (col1, col2, v_t) = match sched.variant {
        ScheduleVariant::CaseI => {
            if dec.is_some() {
                return Err(Error::invalid("Case-I schedule takes no decomposition"));
            }
            let slots = sched.c.len().max(sched.d.len());
            let dim = slots.next_power_of_two();
            let mut col1 = vec![zero; dim];
            let mut col2 = vec![zero; dim];
            col1[..sched.c.len()].copy_from_slice(&sched.c);
            col2[..sched.d.len()].copy_from_slice(&sched.d);
            (col1, col2, None)
        }
        ScheduleVariant::CaseII { .. } => {
            let dec =
                dec.ok_or_else(|| Error::invalid("Case-II schedule needs a decomposition"))?;
            if dec.is_empty() {
                return Err(Error::invalid("empty decomposition"));
            }
            let k = sched.order();
            if sched.d.len() != k {
                return Err(Error::invalid("Case-II schedule needs k b-branch weights"));
            }
            let dim = 1usize << k;
            let mut col1 = vec![zero; dim];
            let mut col2 = vec![zero; dim];
            for (j, &w) in sched.c.iter().enumerate() {
                col1[order_index(k, j)] = w;
            }
            for (j, &w) in sched.d.iter().enumerate() {
                col2[order_index(k, j)] = w;
            }
            let levels = qudit_levels(dec.len());
            let total = dec.alpha_sum();
            let mut alphas = vec![zero; levels];
            for (slot, term) in alphas.iter_mut().zip(dec.terms()) {
                *slot = term.alpha / total;
            }
            (col1, col2, Some(completion_or_identity(alphas, T::one())?))
        }
    };
    let v_s1 = completion_or_identity(col1, cal_c)?;
    let v_s2 = completion_or_identity(col2, cal_d)?;
    Ok(PrepUnitaries {
        w: v.adjoint(),
        w_s1: v_s1.adjoint(),
        w_s2: v_s2.adjoint(),
        w_t: v_t.as_ref().map(ComplexMatrix::adjoint),
        v,
        v_s1,
        v_s2,
        v_t,
    })
}

/// Merged unitary list shared by both branches, with non-negative weights.
#[derive(Debug, Clone)]
pub struct AggregatedPowers<T: Real> {
    pub unitaries: Vec<ComplexMatrix<T>>,
    pub x_weights: Vec<T>,
    pub b_weights: Vec<T>,
}

impl<T: Real> AggregatedPowers<T> {
    /// Case-I schedule over the merged list (slot `τ` ↔ `unitaries[τ]`).
    pub fn schedule(&self) -> Result<CoefficientSchedule<T>> {
        CoefficientSchedule::from_weights(self.x_weights.clone(), self.b_weights.clone())
    }

    /// `Σ wₓ Uτ |x̂⟩ + Σ w_b Uτ |b̂⟩`, i.e. the truncated solution this list encodes.
    pub fn apply(&self, x_hat: &ComplexVector<T>, b_hat: &ComplexVector<T>) -> ComplexVector<T> {
        let mut out = ComplexVector::zeros(x_hat.dim());
        for ((u, &wx), &wb) in self
            .unitaries
            .iter()
            .zip(&self.x_weights)
            .zip(&self.b_weights)
        {
            out = &out + &u.mat_vec(x_hat).scale_real(wx);
            out = &out + &u.mat_vec(b_hat).scale_real(wb);
        }
        out
    }
}

/// Splits `u = phase · canonical` so that the first non-negligible entry of
/// `canonical` is real and positive.
fn canonicalize<T: Real>(u: &ComplexMatrix<T>) -> (ComplexMatrix<T>, C<T>) {
    let pivot = u
        .as_slice()
        .iter()
        .find(|z| z.norm() > T::lit(1e-6))
        .copied()
        .unwrap_or(C::one());
    let phase = pivot / pivot.norm();
    (u.scale(phase.conj()), phase)
}

struct WeightedSet<T: Real> {
    items: Vec<(ComplexMatrix<T>, C<T>)>,
}

impl<T: Real> WeightedSet<T> {
    fn new() -> Self {
        Self { items: Vec::new() }
    }

    fn add(&mut self, canonical: ComplexMatrix<T>, weight: C<T>) {
        let tol = T::tol(UNITARY_TOL);
        if let Some(slot) = self
            .items
            .iter_mut()
            .find(|(u, _)| u.max_abs_diff(&canonical) <= tol)
        {
            slot.1 = slot.1 + weight;
        } else {
            self.items.push((canonical, weight));
        }
    }

    fn prune(&mut self) {
        let total: T = self.items.iter().map(|(_, w)| w.norm()).sum();
        let floor = total * T::epsilon() * T::lit(16.0);
        self.items.retain(|(_, w)| w.norm() > floor);
    }
}

/// Expands `Σ_m C_m (Σαᵢ Aᵢ)^m` and `Σ_n D_n (Σαᵢ Aᵢ)^{n-1}` and merges equal
/// unitaries (up to a global phase, which moves into the weight).
///
/// `sched` must be the Case-I schedule built with `‖M‖` as the norm, and `dec`
/// a decomposition of `A = M/‖M‖`.
pub fn aggregate_powers<T: Real>(
    dec: &LcuDecomposition<T>,
    sched: &CoefficientSchedule<T>,
    max_unitaries: usize,
) -> Result<AggregatedPowers<T>> {
    let n = dec
        .dim()
        .ok_or_else(|| Error::invalid("aggregate_powers needs a non-empty decomposition"))?;
    let k = sched.order();
    if sched.d.len() > k {
        return Err(Error::invalid("b-branch longer than the x-branch order"));
    }
    let overflow = || Error::AggregationOverflow { max: max_unitaries };

    let mut levels: Vec<WeightedSet<T>> = Vec::with_capacity(k + 1);
    let mut first = WeightedSet::new();
    first.add(ComplexMatrix::identity(n), C::one());
    levels.push(first);
    for _ in 1..=k {
        let prev = levels.last().expect("level 0 exists");
        let mut next = WeightedSet::new();
        for (u, w) in &prev.items {
            for term in dec.terms() {
                let (canon, phase) = canonicalize(&(&term.unitary * u));
                next.add(canon, *w * phase * term.alpha);
                if next.items.len() > max_unitaries {
                    return Err(overflow());
                }
            }
        }
        next.prune();
        levels.push(next);
    }

    let mut x_branch = WeightedSet::new();
    for (m, &cm) in sched.c.iter().enumerate() {
        for (u, w) in &levels[m].items {
            x_branch.add(u.clone(), *w * cm);
        }
    }
    let mut b_branch = WeightedSet::new();
    for (idx, &dn) in sched.d.iter().enumerate() {
        for (u, w) in &levels[idx].items {
            b_branch.add(u.clone(), *w * dn);
        }
    }
    x_branch.prune();
    b_branch.prune();

    let mut out = AggregatedPowers {
        unitaries: Vec::new(),
        x_weights: Vec::new(),
        b_weights: Vec::new(),
    };
    for (branch, is_x) in [(&x_branch, true), (&b_branch, false)] {
        for (canon, w) in &branch.items {
            let modulus = w.norm();
            if modulus == T::zero() {
                continue;
            }
            let u = canon.scale(*w / modulus);
            let slot = match out
                .unitaries
                .iter()
                .position(|v| v.max_abs_diff(&u) <= T::tol(UNITARY_TOL))
            {
                Some(s) => s,
                None => {
                    out.unitaries.push(u);
                    out.x_weights.push(T::zero());
                    out.b_weights.push(T::zero());
                    out.unitaries.len() - 1
                }
            };
            if is_x {
                out.x_weights[slot] += modulus;
            } else {
                out.b_weights[slot] += modulus;
            }
        }
    }
    if out.unitaries.len() > max_unitaries {
        return Err(overflow());
    }
    if out.unitaries.is_empty() {
        out.unitaries.push(ComplexMatrix::identity(n));
        out.x_weights.push(T::zero());
        out.b_weights.push(T::zero());
    }
    Ok(out)
}
