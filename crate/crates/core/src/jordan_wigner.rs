//! Unitarized Jordan-Wigner ladder operators and the weighted Pauli-sum form
//! of a second-quantized Hamiltonian.
//!
//! With `a_j = (a_{j,0} + a_{j,1}) / 2` each ladder operator splits into two
//! unitaries, so
//!
//! ```text
//! H = Σ h_ij/4  a†_{i,q1} a_{j,q2}  +  Σ h_ijkl/32  a†_{i,q1} a†_{j,q2} a_{k,q3} a_{l,q4}
//! ```
//!
//! is a linear combination of `Γ = 4N² + 16N⁴` Pauli strings.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli, PauliString, Phase, DENSE_QUBIT_LIMIT};
use crate::state::StateVector;
use crate::tables::IntegralTable;

/// Dense diagonal-per-flip storage is used while `groups * 2^n` stays below this.
const SPARSE_ENTRY_LIMIT: usize = 1 << 24;
const PAR_CHUNK: usize = 1 << 12;

/// Position of a term in the canonical Pauli-sum expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermIndex {
    OneBody { orbitals: [usize; 2], q: [u8; 2] },
    TwoBody { orbitals: [usize; 4], q: [u8; 4] },
}

impl TermIndex {
    /// `Γ` for `n` spin-orbitals.
    pub fn term_count(n: usize) -> usize {
        4 * n * n + 16 * n.pow(4)
    }

    /// Flat 1-based index. One-body terms come first, then two-body, each in
    /// lexicographic order of (orbitals, flags).
    pub fn encode(&self, n: usize) -> Result<usize> {
        self.validate(n)?;
        Ok(match *self {
            TermIndex::OneBody { orbitals: [i, j], q } => {
                let pair = (i - 1) * n + (j - 1);
                1 + pair * 4 + (q[0] as usize) * 2 + q[1] as usize
            }
            TermIndex::TwoBody {
                orbitals: [i, j, k, l],
                q,
            } => {
                let quad = (((i - 1) * n + (j - 1)) * n + (k - 1)) * n + (l - 1);
                let flags = q.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
                1 + 4 * n * n + quad * 16 + flags
            }
        })
    }

    pub fn decode(gamma: usize, n: usize) -> Result<Self> {
        let total = Self::term_count(n);
        if gamma == 0 || gamma > total {
            return Err(Error::IndexOutOfRange {
                what: "term",
                index: gamma,
                max: total,
            });
        }
        let g = gamma - 1;
        if g < 4 * n * n {
            let (pair, flags) = (g / 4, g % 4);
            Ok(TermIndex::OneBody {
                orbitals: [pair / n + 1, pair % n + 1],
                q: [(flags >> 1) as u8, (flags & 1) as u8],
            })
        } else {
            let g = g - 4 * n * n;
            let (mut quad, flags) = (g / 16, g % 16);
            let mut orbitals = [0usize; 4];
            for slot in orbitals.iter_mut().rev() {
                *slot = quad % n + 1;
                quad /= n;
            }
            let mut q = [0u8; 4];
            for (b, slot) in q.iter_mut().enumerate() {
                *slot = ((flags >> (3 - b)) & 1) as u8;
            }
            Ok(TermIndex::TwoBody { orbitals, q })
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        let (orbs, flags): (&[usize], &[u8]) = match self {
            TermIndex::OneBody { orbitals, q } => (orbitals, q),
            TermIndex::TwoBody { orbitals, q } => (orbitals, q),
        };
        for &o in orbs {
            if o == 0 || o > n {
                return Err(Error::IndexOutOfRange {
                    what: "orbital",
                    index: o,
                    max: n,
                });
            }
        }
        if flags.iter().any(|&b| b > 1) {
            return Err(Error::Validation("ladder flag must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Ladder factors left to right as `(orbital, flag, dagger)`.
    pub fn factors(&self) -> Vec<(usize, u8, bool)> {
        match *self {
            TermIndex::OneBody { orbitals: [i, j], q } => {
                vec![(i, q[0], true), (j, q[1], false)]
            }
            TermIndex::TwoBody {
                orbitals: [i, j, k, l],
                q,
            } => vec![(i, q[0], true), (j, q[1], true), (k, q[2], false), (l, q[3], false)],
        }
    }
}

/// Unitary half of a JW ladder operator on orbital `j` (1-based).
///
/// `a†_{j,0} = a_{j,0} = X_j Z_{j-1}…Z_1`, `a†_{j,1} = -i Y_j Z…`, `a_{j,1} = +i Y_j Z…`.
pub fn ladder_unitary(j: usize, q: u8, dagger: bool, n: usize) -> Result<PauliString> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange {
            what: "orbital",
            index: j,
            max: n,
        });
    }
    if q > 1 {
        return Err(Error::Validation("ladder flag must be 0 or 1".into()));
    }
    let mut axes = vec![Pauli::I; n];
    for a in axes.iter_mut().take(j - 1) {
        *a = Pauli::Z;
    }
    let (axis, phase) = match (q, dagger) {
        (0, _) => (Pauli::X, Phase::ONE),
        (_, true) => (Pauli::Y, Phase::MINUS_I),
        (_, false) => (Pauli::Y, Phase::I),
    };
    axes[j - 1] = axis;
    PauliString::from_axes(&axes, phase)
}

/// One weighted unitary `W_γ H_γ`; `pauli` always carries phase +1.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuTerm {
    pub weight: Complex64,
    pub pauli: PauliString,
    pub index: Option<TermIndex>,
}

/// Pauli strings sharing an X mask, collapsed to one diagonal.
#[derive(Debug)]
enum SparseForm {
    /// `out[c] += diag[c ^ flip] * psi[c ^ flip]` per group.
    Diagonals(Vec<(usize, Vec<Complex64>)>),
    /// Fallback: merged terms applied one at a time.
    Terms(Vec<(Complex64, PauliString)>),
}

/// `H = Σ_γ W_γ H_γ` with `Λ = Σ |W_γ|`.
#[derive(Debug)]
pub struct LcuHamiltonian {
    n_qubits: usize,
    terms: Vec<LcuTerm>,
    lambda_norm: f64,
    queries: AtomicU64,
    sparse: OnceLock<SparseForm>,
}

impl Clone for LcuHamiltonian {
    fn clone(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.clone(),
            lambda_norm: self.lambda_norm,
            queries: AtomicU64::new(self.queries.load(Ordering::Relaxed)),
            sparse: OnceLock::new(),
        }
    }
}

impl LcuHamiltonian {
    /// Canonicalizes each string's phase into its weight.
    pub fn new(n_qubits: usize, raw: Vec<(Complex64, PauliString)>) -> Result<Self> {
        let terms = raw
            .into_iter()
            .map(|(w, p)| LcuTerm {
                weight: w * p.phase().to_complex(),
                pauli: p.with_phase(Phase::ONE),
                index: None,
            })
            .collect();
        Self::from_terms(n_qubits, terms)
    }

    pub fn from_terms(n_qubits: usize, mut terms: Vec<LcuTerm>) -> Result<Self> {
        PauliString::identity(n_qubits)?;
        for t in terms.iter_mut() {
            check_dim(n_qubits, t.pauli.n_qubits())?;
            if !(t.weight.re.is_finite() && t.weight.im.is_finite()) {
                return Err(Error::Validation("non-finite LCU weight".into()));
            }
            if t.pauli.phase() != Phase::ONE {
                t.weight *= t.pauli.phase().to_complex();
                t.pauli = t.pauli.clone().with_phase(Phase::ONE);
            }
        }
        let lambda_norm = Self::sum_abs(&terms);
        Ok(Self {
            n_qubits,
            terms,
            lambda_norm,
            queries: AtomicU64::new(0),
            sparse: OnceLock::new(),
        })
    }

    fn sum_abs(terms: &[LcuTerm]) -> f64 {
        crate::reduce::pairwise_sum(&terms.iter().map(|t| t.weight.norm()).collect::<Vec<_>>())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[LcuTerm] {
        &self.terms
    }

    /// `Γ`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Stored `Λ`.
    pub fn lambda_norm(&self) -> f64 {
        self.lambda_norm
    }

    /// Declares a normalization `λ >= Σ|W|`, as when each weight stands for a
    /// sum of equal-magnitude unitaries that partially cancel.
    pub fn with_lambda_norm(mut self, lambda: f64) -> Result<Self> {
        let floor = self.recompute_lambda();
        if !(lambda.is_finite() && lambda >= floor * (1.0 - 1e-12)) {
            return Err(Error::Validation(format!(
                "declared norm {lambda:e} is below Σ|W| = {floor:e}"
            )));
        }
        self.lambda_norm = lambda.max(floor);
        Ok(self)
    }

    /// `Λ` recomputed from the weights.
    pub fn recompute_lambda(&self) -> f64 {
        Self::sum_abs(&self.terms)
    }

    /// Applies the bare unitary `H_γ` (1-based) and counts one query.
    pub fn select_h(&self, gamma: usize, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.n_qubits, psi.n_qubits())?;
        let term = self.term(gamma)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        term.pauli.apply(psi)
    }

    pub fn term(&self, gamma: usize) -> Result<&LcuTerm> {
        if gamma == 0 || gamma > self.terms.len() {
            return Err(Error::IndexOutOfRange {
                what: "term",
                index: gamma,
                max: self.terms.len(),
            });
        }
        Ok(&self.terms[gamma - 1])
    }

    /// SELECT(H) queries issued so far through [`Self::select_h`].
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_query_count(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    /// Merges identical Pauli strings; order of first appearance is kept.
    pub fn compacted(&self) -> LcuHamiltonian {
        let merged = merge_terms(&self.terms);
        let terms = merged
            .into_iter()
            .map(|(weight, pauli)| LcuTerm {
                weight,
                pauli,
                index: None,
            })
            .collect();
        LcuHamiltonian::from_terms(self.n_qubits, terms).expect("compaction preserves validity")
    }

    fn sparse(&self) -> &SparseForm {
        self.sparse.get_or_init(|| {
            let merged = merge_terms(&self.terms);
            let mut flips: Vec<usize> = merged.iter().map(|(_, p)| p.x_mask() as usize).collect();
            flips.sort_unstable();
            flips.dedup();
            let dim = 1usize << self.n_qubits;
            if flips.len().saturating_mul(dim) > SPARSE_ENTRY_LIMIT {
                return SparseForm::Terms(merged);
            }
            let slot: HashMap<usize, usize> =
                flips.iter().enumerate().map(|(s, &f)| (f, s)).collect();
            let mut groups: Vec<(usize, Vec<Complex64>)> = flips
                .iter()
                .map(|&f| (f, vec![Complex64::new(0.0, 0.0); dim]))
                .collect();
            for (w, p) in &merged {
                let n_y = (p.x_mask() & p.z_mask()).count_ones() as u8;
                let base = w * Phase::from_power(n_y).to_complex();
                let z = p.z_mask() as usize;
                let diag = &mut groups[slot[&(p.x_mask() as usize)]].1;
                for (src, d) in diag.iter_mut().enumerate() {
                    if (src & z).count_ones() & 1 == 1 {
                        *d -= base;
                    } else {
                        *d += base;
                    }
                }
            }
            SparseForm::Diagonals(groups)
        })
    }

    /// `H ψ`, or `H† ψ` (conjugated weights) when `adjoint` is set.
    pub fn apply_sum(&self, psi: &[Complex64], adjoint: bool) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        check_dim(dim, psi.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        match self.sparse() {
            SparseForm::Diagonals(groups) => {
                let kernel = |offset: usize, chunk: &mut [Complex64]| {
                    for (flip, diag) in groups {
                        for (k, o) in chunk.iter_mut().enumerate() {
                            let c = offset + k;
                            let src = c ^ flip;
                            *o += if adjoint {
                                diag[c].conj() * psi[src]
                            } else {
                                diag[src] * psi[src]
                            };
                        }
                    }
                };
                if dim > PAR_CHUNK {
                    use rayon::prelude::*;
                    out.par_chunks_mut(PAR_CHUNK)
                        .enumerate()
                        .for_each(|(i, ch)| kernel(i * PAR_CHUNK, ch));
                } else {
                    kernel(0, &mut out);
                }
            }
            SparseForm::Terms(terms) => {
                for (w, p) in terms {
                    let w = if adjoint { w.conj() } else { *w };
                    p.apply_add(w, psi, &mut out)?;
                }
            }
        }
        Ok(out)
    }

    /// Dense `Σ W_γ H_γ`; guarded like [`PauliString::to_dense`].
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::SizeGuard(format!(
                "dense Hamiltonians support at most {DENSE_QUBIT_LIMIT} qubits"
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (w, p) in merge_terms(&self.terms) {
            let n_y = (p.x_mask() & p.z_mask()).count_ones() as u8;
            let base = w * Phase::from_power(n_y).to_complex();
            for col in 0..dim {
                let sign = if (col as u64 & p.z_mask()).count_ones() & 1 == 1 {
                    -1.0
                } else {
                    1.0
                };
                m[(col ^ p.x_mask() as usize, col)] += base * sign;
            }
        }
        Ok(m)
    }
}

fn merge_terms(terms: &[LcuTerm]) -> Vec<(Complex64, PauliString)> {
    let mut slot: HashMap<(u64, u64), usize> = HashMap::new();
    let mut out: Vec<(Complex64, PauliString)> = Vec::new();
    for t in terms {
        let key = (t.pauli.x_mask(), t.pauli.z_mask());
        match slot.get(&key) {
            Some(&s) => out[s].0 += t.weight,
            None => {
                slot.insert(key, out.len());
                out.push((t.weight, t.pauli.clone()));
            }
        }
    }
    out
}

/// Expands an integral table into the full `Γ`-term Pauli sum.
///
/// `drop_tol = 0` keeps every term, including exact zeros; a positive value
/// omits terms with `|W_γ| <= drop_tol`.
pub fn build_lcu(table: &IntegralTable, drop_tol: f64) -> Result<LcuHamiltonian> {
    table.validate()?;
    if !(drop_tol >= 0.0) {
        return Err(Error::Validation("drop_tol must be non-negative".into()));
    }
    let n = table.n_orbitals();
    let mut ladders: HashMap<(usize, u8, bool), PauliString> = HashMap::new();
    for j in 1..=n {
        for q in 0..2u8 {
            for dagger in [false, true] {
                ladders.insert((j, q, dagger), ladder_unitary(j, q, dagger, n)?);
            }
        }
    }
    let total = TermIndex::term_count(n);
    let mut terms = Vec::with_capacity(total);
    for gamma in 1..=total {
        let index = TermIndex::decode(gamma, n)?;
        let coefficient = match index {
            TermIndex::OneBody { orbitals: [i, j], .. } => table.h1(i, j) / 4.0,
            TermIndex::TwoBody {
                orbitals: [i, j, k, l],
                ..
            } => table.h2(i, j, k, l) / 32.0,
        };
        let mut product = PauliString::identity(n)?;
        for key in index.factors() {
            product = product.multiply(&ladders[&key])?;
        }
        let (phase, pauli) = product.canonical();
        let weight = Complex64::new(coefficient, 0.0) * phase.to_complex();
        if drop_tol > 0.0 && weight.norm() <= drop_tol {
            continue;
        }
        terms.push(LcuTerm {
            weight,
            pauli,
            index: Some(index),
        });
    }
    LcuHamiltonian::from_terms(n, terms)
}
