//! Truncated-Taylor-series evolution with oblivious amplitude amplification.
//!
//! The evolution `exp(-iHt)` is cut into `r` segments of length `τ = t/r`.
//! Each segment applies the order-`K` series
//!
//! ```text
//! Ũ = Σ_{k=0}^{K} (-iτH)^k / k!
//! ```
//!
//! followed by the amplification closed form `(3/s) Ũ - (4/s³) Ũ Ũ† Ũ`.
//!
//! When `Λt/ln2` is not an integer the LCU norm is padded with a cancelling
//! identity pair `(+δ/2) I + (-δ/2) I` so that every segment has `Λ'τ = ln2`
//! exactly. `H` itself is unchanged; only `s` and the circuit registers see
//! the padding.

mod circuit;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::jordan_wigner::LcuHamiltonian;
use crate::pauli::PauliString;
use crate::state::StateVector;

pub use circuit::{
    amplification_g, ancilla_zero_probability, circuit_w_adjoint, circuit_w_operator,
    embed_system_state, oaa_segment_circuit, prepare_beta_circuit, project_ancilla_zero,
    projected_walk, reflect_about_zero, unary_angles, CircuitLayout, Gate,
};

/// Largest truncation order the planner will return.
pub const MAX_ORDER: usize = 170;

/// Largest segment count the planner will return.
pub const MAX_SEGMENTS: f64 = 1e9;

/// Per-segment LCU norm `Λ'τ` after padding.
pub const SEGMENT_NORM: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub t: f64,
    pub epsilon: f64,
    pub lambda_norm: f64,
    pub r: usize,
    pub k: usize,
    pub s: f64,
    /// Total weight `δ` of the cancelling identity pair; `Λ + δ = r ln2 / t`.
    pub padding: f64,
}

impl SegmentPlan {
    pub fn tau(&self) -> f64 {
        self.t / self.r as f64
    }

    /// Padded norm `Λ' = Λ + δ`.
    pub fn padded_lambda(&self) -> f64 {
        self.lambda_norm + self.padding
    }
}

/// Minimal `K ≥ 1` with `(ln2)^{K+1}/(K+1)! ≤ bound`.
pub fn minimal_order(bound: f64) -> Result<usize> {
    if !(bound > 0.0) {
        return Err(Error::Plan(format!("series bound {bound:e} must be positive")));
    }
    let x = SEGMENT_NORM;
    let mut tail = x * x / 2.0;
    let mut k = 1usize;
    while tail > bound {
        k += 1;
        if k > MAX_ORDER {
            return Err(Error::Plan(format!(
                "epsilon/r = {bound:e} needs truncation order above {MAX_ORDER}"
            )));
        }
        tail *= x / (k + 1) as f64;
    }
    Ok(k)
}

/// `Σ_{k=0}^{K} (ln2)^k / k!`.
pub fn series_normalization(k: usize) -> f64 {
    let mut term = 1.0;
    let mut s = 1.0;
    for q in 1..=k {
        term *= SEGMENT_NORM / q as f64;
        s += term;
    }
    s
}

/// `r = ceil(Λt/ln2)` (at least 1), `K` from the truncation bound, `s` from `K`.
pub fn plan_segments(lambda_norm: f64, t: f64, epsilon: f64) -> Result<SegmentPlan> {
    if !(lambda_norm >= 0.0) || !lambda_norm.is_finite() {
        return Err(Error::Plan(format!("invalid LCU norm {lambda_norm}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Plan(format!("evolution time must be positive, got {t}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Plan(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let x = lambda_norm * t / SEGMENT_NORM;
    if x > MAX_SEGMENTS {
        return Err(Error::Plan(format!("{x:e} segments exceeds the planner limit")));
    }
    // Absorbs rounding when Λt is an exact multiple of ln2.
    let r = ((x * (1.0 - 1e-12)).ceil() as usize).max(1);
    let bound = epsilon / r as f64;
    if bound < f64::MIN_POSITIVE {
        return Err(Error::Plan("epsilon/r underflows".into()));
    }
    let k = minimal_order(bound)?;
    let padding = (r as f64 * SEGMENT_NORM / t - lambda_norm).max(0.0);
    Ok(SegmentPlan {
        t,
        epsilon,
        lambda_norm,
        r,
        k,
        s: series_normalization(k),
        padding,
    })
}

fn check_state(ham: &LcuHamiltonian, psi: &StateVector) -> Result<()> {
    check_dim(ham.n_qubits(), psi.n_qubits())
}

/// Horner evaluation of `Σ_{k=0}^{K} (c τ H)^k / k!` with `c = -i` (or `+i`
/// with `H†` when `adjoint`).
fn taylor_polynomial(
    ham: &LcuHamiltonian,
    tau: f64,
    order: usize,
    psi: &[Complex64],
    adjoint: bool,
) -> Result<Vec<Complex64>> {
    let unit = if adjoint {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(0.0, -1.0)
    };
    let mut v = psi.to_vec();
    for k in (1..=order).rev() {
        let hv = ham.apply_sum(&v, adjoint)?;
        let c = unit * (tau / k as f64);
        for ((out, h), p) in v.iter_mut().zip(&hv).zip(psi) {
            *out = p + c * h;
        }
    }
    Ok(v)
}

/// `Ũ ψ` for one segment.
pub fn apply_u_tilde(
    ham: &LcuHamiltonian,
    plan: &SegmentPlan,
    psi: &StateVector,
) -> Result<StateVector> {
    check_state(ham, psi)?;
    StateVector::from_amplitudes(taylor_polynomial(
        ham,
        plan.tau(),
        plan.k,
        psi.amplitudes(),
        false,
    )?)
}

/// `Ũ† ψ`: conjugated weights, reversed product order.
pub fn apply_u_tilde_adjoint(
    ham: &LcuHamiltonian,
    plan: &SegmentPlan,
    psi: &StateVector,
) -> Result<StateVector> {
    check_state(ham, psi)?;
    StateVector::from_amplitudes(taylor_polynomial(
        ham,
        plan.tau(),
        plan.k,
        psi.amplitudes(),
        true,
    )?)
}

/// `(3/s) A ψ - (4/s³) A A† A ψ` for arbitrary `A` and its adjoint.
pub fn oaa_combination<F, G>(s: f64, psi: &StateVector, forward: F, adjoint: G) -> Result<StateVector>
where
    F: Fn(&StateVector) -> Result<StateVector>,
    G: Fn(&StateVector) -> Result<StateVector>,
{
    let a = forward(psi)?;
    let b = adjoint(&a)?;
    let c = forward(&b)?;
    let (ca, cc) = (3.0 / s, 4.0 / (s * s * s));
    let amps = a
        .amplitudes()
        .iter()
        .zip(c.amplitudes())
        .map(|(x, y)| x * ca - y * cc)
        .collect();
    StateVector::from_amplitudes(amps)
}

/// One amplified segment in operator mode.
pub fn oaa_segment(ham: &LcuHamiltonian, plan: &SegmentPlan, psi: &StateVector) -> Result<StateVector> {
    check_state(ham, psi)?;
    oaa_combination(
        plan.s,
        psi,
        |v| apply_u_tilde(ham, plan, v),
        |v| apply_u_tilde_adjoint(ham, plan, v),
    )
}

/// One Taylor-series term `β_j V_j` of the expanded segment operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTerm {
    pub k: usize,
    /// 1-based term indices; `gammas[0]` acts first.
    pub gammas: Vec<usize>,
    pub beta: Complex64,
    /// `(-i)^k H_{γk} ⋯ H_{γ1}` with its phase.
    pub v: PauliString,
}

/// Enumerates all `Σ_k Γ^k` Taylor terms; guarded to `max_terms`.
pub fn taylor_terms(
    ham: &LcuHamiltonian,
    plan: &SegmentPlan,
    max_terms: usize,
) -> Result<Vec<TaylorTerm>> {
    let gamma = ham.len();
    let mut total = 0usize;
    let mut count = 1usize;
    for _ in 0..=plan.k {
        total = total.saturating_add(count);
        count = count.saturating_mul(gamma);
    }
    if total > max_terms {
        return Err(Error::SizeGuard(format!(
            "{total} Taylor terms exceed the enumeration limit {max_terms}"
        )));
    }
    let tau = plan.tau();
    let mut out = vec![TaylorTerm {
        k: 0,
        gammas: vec![],
        beta: Complex64::new(1.0, 0.0),
        v: PauliString::identity(ham.n_qubits())?,
    }];
    let mut frontier = out.clone();
    let minus_i = PauliString::identity(ham.n_qubits())?.with_phase(crate::pauli::Phase::MINUS_I);
    for k in 1..=plan.k {
        let mut next = Vec::with_capacity(frontier.len() * gamma);
        for term in &frontier {
            for g in 1..=gamma {
                let t = ham.term(g)?;
                let v = minus_i.multiply(&t.pauli.multiply(&term.v)?)?;
                let mut gammas = term.gammas.clone();
                gammas.push(g);
                next.push(TaylorTerm {
                    k,
                    gammas,
                    beta: term.beta * t.weight * (tau / k as f64),
                    v,
                });
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Operator,
    Circuit,
}

/// Gate-count model attached to a [`CostReport`].
///
/// Per walk operator `𝒲` (three per segment):
/// - database: `2K·Γ` rotations for the `K` coefficient loaders (forward and
///   transpose), `2K` unary-chain rotations, and `K·N` single-qubit gates
///   for the controlled Pauli strings.
/// - on-the-fly: `2K` unary-chain rotations and `K·5N` gates, one `N` for
///   the controlled Pauli string and `4N` for the four orbital evaluations
///   feeding the sign oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    Database,
    Onthefly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub segments: usize,
    pub order: usize,
    pub s: f64,
    pub lambda_norm: f64,
    pub term_count: usize,
    pub select_h_queries: u64,
    pub prepare_queries: u64,
    pub model_gate_count: u64,
    pub ancilla_estimate_j: u64,
    /// `| ‖out‖ - ‖ψ‖ |`; no renormalization is ever applied.
    pub norm_drift: f64,
    pub cost_model: CostModel,
}

impl CostReport {
    fn new(
        plan: Option<&SegmentPlan>,
        ham: &LcuHamiltonian,
        model: CostModel,
        norm_drift: f64,
    ) -> Self {
        let gamma = ham.len() as u64;
        let n = ham.n_qubits() as u64;
        let (r, k) = plan.map_or((0, 0), |p| (p.r as u64, p.k as u64));
        let per_w = match model {
            CostModel::Database => 2 * k * gamma + 2 * k + k * n,
            CostModel::Onthefly => 2 * k + 5 * k * n,
        };
        let log_gamma = if gamma <= 1 {
            0
        } else {
            64 - (gamma - 1).leading_zeros() as u64
        };
        Self {
            segments: r as usize,
            order: k as usize,
            s: plan.map_or(0.0, |p| p.s),
            lambda_norm: ham.lambda_norm(),
            term_count: ham.len(),
            select_h_queries: 3 * r * k,
            prepare_queries: 6 * r,
            model_gate_count: 3 * r * per_w,
            ancilla_estimate_j: k * log_gamma,
            norm_drift,
            cost_model: model,
        }
    }
}

/// Plan and cost of evolving for `t` without touching a state.
pub fn estimate_cost(ham: &LcuHamiltonian, t: f64, epsilon: f64, model: CostModel) -> Result<CostReport> {
    if t == 0.0 {
        return Ok(CostReport::new(None, ham, model, 0.0));
    }
    let plan = plan_segments(ham.lambda_norm(), t, epsilon)?;
    Ok(CostReport::new(Some(&plan), ham, model, 0.0))
}

/// `(PG)^r ψ` with the database gate model.
pub fn evolve(
    ham: &LcuHamiltonian,
    t: f64,
    epsilon: f64,
    psi: &StateVector,
    mode: Mode,
) -> Result<(StateVector, CostReport)> {
    evolve_with(ham, t, epsilon, psi, mode, CostModel::Database)
}

pub fn evolve_with(
    ham: &LcuHamiltonian,
    t: f64,
    epsilon: f64,
    psi: &StateVector,
    mode: Mode,
    model: CostModel,
) -> Result<(StateVector, CostReport)> {
    check_state(ham, psi)?;
    if t == 0.0 {
        return Ok((psi.clone(), CostReport::new(None, ham, model, 0.0)));
    }
    let plan = plan_segments(ham.lambda_norm(), t, epsilon)?;
    let layout = match mode {
        Mode::Circuit => Some(CircuitLayout::new(&plan, ham)?),
        Mode::Operator => None,
    };
    let mut state = psi.clone();
    for _ in 0..plan.r {
        state = match &layout {
            None => oaa_segment(ham, &plan, &state)?,
            Some(l) => oaa_segment_circuit(l, ham, &state)?,
        };
    }
    let drift = (state.norm() - psi.norm()).abs();
    Ok((state, CostReport::new(Some(&plan), ham, model, drift)))
}
