//! Explicit ancilla-register emulation of one amplified segment.
//!
//! Joint index layout: `ancilla << n_system | system`. Ancilla bit `c - 1`
//! is unary qubit `c` (`c = 1..=K`); register `c` occupies the `b` bits
//! starting at `K + (c - 1) b`.
//!
//! `PREPARE(β)` rotates the unary chain and then, controlled on unary qubit
//! `c`, loads `Σ_γ √(W_γ/Λ') |γ>` into register `c`. Registers whose unary
//! qubit is clear stay in `|0>`, so the transpose trick reproduces
//! `Π W_γ` exactly for complex weights.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{SegmentPlan, SEGMENT_NORM};
use crate::error::{check_dim, Error, Result};
use crate::jordan_wigner::LcuHamiltonian;
use crate::state::StateVector;

/// Ancilla budget: `K` unary qubits plus `K` index registers.
pub const MAX_ANCILLA: usize = 12;
pub const MAX_JOINT_QUBITS: usize = 20;
pub const MAX_CIRCUIT_TERMS: usize = 4;
pub const MAX_CIRCUIT_ORDER: usize = 4;

/// Unitary on consecutive ancilla bits, optionally controlled by one ancilla bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    /// Ancilla bit positions; local bit `i` of `matrix` is `targets[i]`.
    pub targets: Vec<usize>,
    pub control: Option<usize>,
    pub matrix: DMatrix<Complex64>,
}

impl Gate {
    fn map(&self, f: impl Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>) -> Gate {
        Gate {
            targets: self.targets.clone(),
            control: self.control,
            matrix: f(&self.matrix),
        }
    }

    pub fn transpose(&self) -> Gate {
        self.map(|m| m.transpose())
    }

    pub fn adjoint(&self) -> Gate {
        self.map(|m| m.adjoint())
    }

    pub fn conjugate(&self) -> Gate {
        self.map(|m| m.map(|z| z.conj()))
    }

    fn apply(&self, amps: &mut [Complex64], offset: usize) {
        let target_mask: usize = self.targets.iter().map(|&t| 1 << (offset + t)).sum();
        let local = 1usize << self.targets.len();
        let spread: Vec<usize> = (0..local)
            .map(|l| {
                self.targets
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| l >> i & 1 == 1)
                    .map(|(_, &t)| 1 << (offset + t))
                    .sum()
            })
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); local];
        for base in 0..amps.len() {
            if base & target_mask != 0 {
                continue;
            }
            if let Some(c) = self.control {
                if base >> (offset + c) & 1 == 0 {
                    continue;
                }
            }
            for (l, b) in buf.iter_mut().enumerate() {
                *b = amps[base | spread[l]];
            }
            for (row, &s) in spread.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, b) in buf.iter().enumerate() {
                    acc += self.matrix[(row, col)] * b;
                }
                amps[base | s] = acc;
            }
        }
    }
}

/// `R_y(θ) = exp(-iθY/2)`.
fn ry(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

/// A unitary whose first column is the unit vector `v` (Householder completion).
fn unitary_with_first_column(v: &DVector<Complex64>) -> DMatrix<Complex64> {
    let dim = v.len();
    let alpha = if v[0].norm() > 0.0 {
        v[0] / v[0].norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut u = -v.clone();
    u[0] += alpha;
    let uu = u.norm_squared();
    let mut reflect = DMatrix::<Complex64>::identity(dim, dim);
    if uu > 1e-30 {
        reflect -= (&u * u.adjoint()) * Complex64::new(2.0 / uu, 0.0);
    }
    let mut phase = DMatrix::<Complex64>::identity(dim, dim);
    phase[(0, 0)] = alpha;
    reflect * phase
}

/// Unary-chain angles with `sin²(θ_k/2) = 1 - a_{k-1}/S_{k-1}`,
/// `a_q = x^q/q!`, `S_m = Σ_{q=m}^{K} a_q`.
pub fn unary_angles(order: usize, x: f64) -> Vec<f64> {
    let mut a = vec![1.0f64];
    for q in 1..=order {
        a.push(a[q - 1] * x / q as f64);
    }
    let tail = |m: usize| a[m..].iter().sum::<f64>();
    (1..=order)
        .map(|k| {
            let ratio = (1.0 - a[k - 1] / tail(k - 1)).clamp(0.0, 1.0);
            2.0 * ratio.sqrt().asin()
        })
        .collect()
}

/// Register sizes and coefficient loaders for one planned segment.
#[derive(Debug, Clone)]
pub struct CircuitLayout {
    pub plan: SegmentPlan,
    pub n_system: usize,
    pub reg_bits: usize,
    /// Weights loaded into each register, padding pair last.
    pub weights: Vec<Complex64>,
    /// Term index (1-based) per loaded weight; `None` is the identity.
    pub terms: Vec<Option<usize>>,
    pub lambda_padded: f64,
    pub prepare: Vec<Gate>,
}

impl CircuitLayout {
    pub fn new(plan: &SegmentPlan, ham: &LcuHamiltonian) -> Result<Self> {
        if ham.len() > MAX_CIRCUIT_TERMS || plan.k > MAX_CIRCUIT_ORDER {
            return Err(Error::SizeGuard(format!(
                "circuit mode needs Γ <= {MAX_CIRCUIT_TERMS} and K <= {MAX_CIRCUIT_ORDER}, got Γ = {}, K = {}",
                ham.len(),
                plan.k
            )));
        }
        if (plan.lambda_norm - ham.lambda_norm()).abs() > 1e-12 * ham.lambda_norm().max(1.0) {
            return Err(Error::Validation("plan was made for a different LCU norm".into()));
        }
        let mut weights: Vec<Complex64> = ham.terms().iter().map(|t| t.weight).collect();
        let mut terms: Vec<Option<usize>> = (1..=ham.len()).map(Some).collect();
        // Covers both planner padding and any norm the LCU declares beyond Σ|W|.
        let excess = plan.padded_lambda() - ham.recompute_lambda();
        if excess > 1e-12 * plan.padded_lambda() {
            let half = Complex64::new(excess / 2.0, 0.0);
            weights.extend([half, -half]);
            terms.extend([None, None]);
        }
        let lambda_padded: f64 = weights.iter().map(|w| w.norm()).sum();
        if lambda_padded == 0.0 {
            return Err(Error::Validation("circuit mode needs a nonzero LCU".into()));
        }
        // One bit minimum so a lone complex weight keeps its phase.
        let reg_bits = (weights.len().next_power_of_two().trailing_zeros() as usize).max(1);
        let n_anc = plan.k + plan.k * reg_bits;
        if n_anc > MAX_ANCILLA || n_anc + ham.n_qubits() > MAX_JOINT_QUBITS {
            return Err(Error::SizeGuard(format!(
                "circuit mode needs {n_anc} ancillas plus {} system qubits",
                ham.n_qubits()
            )));
        }

        let mut prepare = Vec::new();
        for (k, theta) in unary_angles(plan.k, SEGMENT_NORM).into_iter().enumerate() {
            prepare.push(Gate {
                targets: vec![k],
                control: k.checked_sub(1),
                matrix: ry(theta),
            });
        }
        {
            let mut column = DVector::<Complex64>::zeros(1 << reg_bits);
            for (g, w) in weights.iter().enumerate() {
                column[g] = (w / lambda_padded).sqrt();
            }
            let loader = unitary_with_first_column(&column);
            for c in 0..plan.k {
                let first = plan.k + c * reg_bits;
                prepare.push(Gate {
                    targets: (first..first + reg_bits).collect(),
                    control: Some(c),
                    matrix: loader.clone(),
                });
            }
        }
        Ok(Self {
            plan: *plan,
            n_system: ham.n_qubits(),
            reg_bits,
            weights,
            terms,
            lambda_padded,
            prepare,
        })
    }

    pub fn n_ancilla(&self) -> usize {
        self.plan.k + self.plan.k * self.reg_bits
    }

    pub fn n_joint(&self) -> usize {
        self.n_system + self.n_ancilla()
    }

    fn register(&self, ancilla: usize, c: usize) -> usize {
        let first = self.plan.k + c * self.reg_bits;
        (ancilla >> first) & ((1 << self.reg_bits) - 1)
    }

    fn check_joint(&self, joint: &StateVector) -> Result<()> {
        check_dim(self.n_joint(), joint.n_qubits())
    }
}

fn run_gates<'a>(gates: impl Iterator<Item = Gate> + 'a, amps: &mut [Complex64], offset: usize) {
    for g in gates {
        g.apply(amps, offset);
    }
}

/// `PREPARE(β)|0>` on the ancilla register alone.
pub fn prepare_beta_circuit(layout: &CircuitLayout) -> Result<StateVector> {
    let mut s = StateVector::basis(layout.n_ancilla(), 0)?;
    run_gates(layout.prepare.iter().cloned(), s.amplitudes_mut(), 0);
    Ok(s)
}

/// Controlled cascade `Π_c (-i H_{γ_c})^{u_c}`, or its adjoint.
fn select_v(
    layout: &CircuitLayout,
    ham: &LcuHamiltonian,
    amps: &mut [Complex64],
    adjoint: bool,
) -> Result<()> {
    let sys_dim = 1usize << layout.n_system;
    let mut tmp = vec![Complex64::new(0.0, 0.0); sys_dim];
    let phase = if adjoint {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(0.0, -1.0)
    };
    let order: Vec<usize> = if adjoint {
        (0..layout.plan.k).rev().collect()
    } else {
        (0..layout.plan.k).collect()
    };
    for (anc, block) in amps.chunks_mut(sys_dim).enumerate() {
        for &c in &order {
            if anc >> c & 1 == 0 {
                continue;
            }
            let g = layout.register(anc, c);
            match layout.terms.get(g) {
                Some(Some(gamma)) => {
                    ham.term(*gamma)?.pauli.apply_into(block, &mut tmp)?;
                    for (b, t) in block.iter_mut().zip(&tmp) {
                        *b = phase * t;
                    }
                }
                Some(None) => block.iter_mut().for_each(|b| *b *= phase),
                None => {}
            }
        }
    }
    Ok(())
}

/// `𝒲 = PREPARE(β)ᵀ · SELECT(V) · PREPARE(β)` on the joint state.
pub fn circuit_w_operator(
    layout: &CircuitLayout,
    ham: &LcuHamiltonian,
    joint: &StateVector,
) -> Result<StateVector> {
    layout.check_joint(joint)?;
    let mut out = joint.clone();
    let amps = out.amplitudes_mut();
    let off = layout.n_system;
    run_gates(layout.prepare.iter().cloned(), amps, off);
    select_v(layout, ham, amps, false)?;
    run_gates(layout.prepare.iter().rev().map(Gate::transpose), amps, off);
    Ok(out)
}

/// `𝒲† = PREPARE(β)† · SELECT(V)† · PREPARE(β)*`.
pub fn circuit_w_adjoint(
    layout: &CircuitLayout,
    ham: &LcuHamiltonian,
    joint: &StateVector,
) -> Result<StateVector> {
    layout.check_joint(joint)?;
    let mut out = joint.clone();
    let amps = out.amplitudes_mut();
    let off = layout.n_system;
    run_gates(layout.prepare.iter().map(Gate::conjugate), amps, off);
    select_v(layout, ham, amps, true)?;
    run_gates(layout.prepare.iter().rev().map(Gate::adjoint), amps, off);
    Ok(out)
}

/// `R = I - 2P` with `P` the projector onto ancilla `|0…0>`.
pub fn reflect_about_zero(layout: &CircuitLayout, joint: &StateVector) -> Result<StateVector> {
    layout.check_joint(joint)?;
    let mut out = joint.clone();
    let sys_dim = 1usize << layout.n_system;
    out.amplitudes_mut()[..sys_dim].iter_mut().for_each(|a| *a = -*a);
    Ok(out)
}

/// `G = -𝒲 R 𝒲† R 𝒲`.
pub fn amplification_g(
    layout: &CircuitLayout,
    ham: &LcuHamiltonian,
    joint: &StateVector,
) -> Result<StateVector> {
    let a = circuit_w_operator(layout, ham, joint)?;
    let b = reflect_about_zero(layout, &a)?;
    let c = circuit_w_adjoint(layout, ham, &b)?;
    let d = reflect_about_zero(layout, &c)?;
    let mut e = circuit_w_operator(layout, ham, &d)?;
    e.amplitudes_mut().iter_mut().for_each(|z| *z = -*z);
    Ok(e)
}

/// `|0…0>_anc ⊗ |ψ>`.
pub fn embed_system_state(layout: &CircuitLayout, psi: &StateVector) -> Result<StateVector> {
    check_dim(layout.n_system, psi.n_qubits())?;
    let mut joint = StateVector::zeros(layout.n_joint())?;
    joint.amplitudes_mut()[..psi.dim()].copy_from_slice(psi.amplitudes());
    Ok(joint)
}

/// System part of `P |joint>` (unnormalized).
pub fn project_ancilla_zero(layout: &CircuitLayout, joint: &StateVector) -> Result<StateVector> {
    layout.check_joint(joint)?;
    StateVector::from_amplitudes(joint.amplitudes()[..1 << layout.n_system].to_vec())
}

/// `‖P |joint>‖²`.
pub fn ancilla_zero_probability(layout: &CircuitLayout, joint: &StateVector) -> Result<f64> {
    Ok(project_ancilla_zero(layout, joint)?.norm().powi(2))
}

/// One amplified segment through the explicit registers: `P G |0>|ψ>`.
pub fn oaa_segment_circuit(
    layout: &CircuitLayout,
    ham: &LcuHamiltonian,
    psi: &StateVector,
) -> Result<StateVector> {
    let joint = embed_system_state(layout, psi)?;
    project_ancilla_zero(layout, &amplification_g(layout, ham, &joint)?)
}

/// Operator-mode equivalent of the projected walk, `P𝒲P = Ũ/s`, via registers.
pub fn projected_walk(
    layout: &CircuitLayout,
    ham: &LcuHamiltonian,
    psi: &StateVector,
) -> Result<StateVector> {
    let joint = embed_system_state(layout, psi)?;
    project_ancilla_zero(layout, &circuit_w_operator(layout, ham, &joint)?)
}
