//! Phased Pauli strings and their action on dense statevectors.
//!
//! Qubit `q` (0-based) is bit `q` of a basis-state index. Spin-orbital `j`
//! (1-based) lives on qubit `j - 1`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::state::StateVector;

/// Largest register a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 63;

/// Largest register [`PauliString::to_dense`] will materialize.
pub const DENSE_QUBIT_LIMIT: usize = 12;

const PAR_THRESHOLD: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Single-qubit product `self * rhs` as (power of i, result).
    fn mul(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Element of {+1, +i, -1, -i}, stored as a power of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: u8) -> Self {
        Phase(power % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-qubit Paulis with a phase in {±1, ±i}.
///
/// Stored in symplectic form: bit `q` of `x` / `z` marks an X / Z component
/// on qubit `q`, with Y represented as both bits set.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        })
    }

    /// Builds a string from per-qubit labels; `axes[q]` acts on qubit `q`.
    pub fn from_axes(axes: &[Pauli], phase: Phase) -> Result<Self> {
        Self::check_width(axes.len())?;
        let (mut x, mut z) = (0u64, 0u64);
        for (q, p) in axes.iter().enumerate() {
            let (xb, zb) = p.bits();
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(Self {
            n_qubits: axes.len(),
            x,
            z,
            phase,
        })
    }

    /// A single non-identity factor on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        let mut s = Self::identity(n_qubits)?;
        if qubit >= n_qubits {
            return Err(Error::IndexOutOfRange {
                what: "qubit",
                index: qubit,
                max: n_qubits.saturating_sub(1),
            });
        }
        s.set(qubit, pauli);
        Ok(s)
    }

    fn check_width(n_qubits: usize) -> Result<()> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::SizeGuard(format!(
                "Pauli strings support 1..={MAX_QUBITS} qubits, got {n_qubits}"
            )));
        }
        Ok(())
    }

    pub(crate) fn set(&mut self, qubit: usize, pauli: Pauli) {
        let (xb, zb) = pauli.bits();
        let mask = 1u64 << qubit;
        self.x = (self.x & !mask) | ((xb as u64) << qubit);
        self.z = (self.z & !mask) | ((zb as u64) << qubit);
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn axis(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn axes(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.axis(q)).collect()
    }

    /// Number of qubits with a non-identity factor.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Same axes with phase +1; the dropped phase is returned alongside.
    pub fn canonical(&self) -> (Phase, PauliString) {
        (self.phase, self.clone().with_phase(Phase::ONE))
    }

    /// Hermitian conjugate: the axes are Hermitian, only the phase conjugates.
    pub fn adjoint(&self) -> PauliString {
        self.clone().with_phase(self.phase.conj())
    }

    /// Operator product `self * rhs`.
    pub fn multiply(&self, rhs: &PauliString) -> Result<PauliString> {
        check_dim(self.n_qubits, rhs.n_qubits)?;
        let mut power = self.phase.power() + rhs.phase.power();
        let mut out = PauliString::identity(self.n_qubits)?;
        let support = self.x | self.z | rhs.x | rhs.z;
        for q in 0..self.n_qubits {
            if support >> q & 1 == 0 {
                continue;
            }
            let (p, r) = self.axis(q).mul(rhs.axis(q));
            power += p;
            out.set(q, r);
        }
        out.phase = Phase::from_power(power);
        Ok(out)
    }

    /// Scalar picked up by basis state `index`: `P|b> = coeff(b) |b ^ x>`.
    #[inline]
    fn coefficient(&self, base: Complex64, index: usize) -> Complex64 {
        if (index as u64 & self.z).count_ones() & 1 == 1 {
            -base
        } else {
            base
        }
    }

    /// Phase times i^{#Y}; the scalar common to every basis state.
    fn base_factor(&self) -> Complex64 {
        let n_y = (self.x & self.z).count_ones() as u8;
        (self.phase * Phase::from_power(n_y)).to_complex()
    }

    /// Applies the string to `psi` by bit manipulation.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let mut out = StateVector::zeros(psi.n_qubits())?;
        self.apply_into(psi.amplitudes(), out.amplitudes_mut())?;
        Ok(out)
    }

    /// Writes `P * input` into `output`; both slices have length `2^n`.
    pub fn apply_into(&self, input: &[Complex64], output: &mut [Complex64]) -> Result<()> {
        let dim = 1usize << self.n_qubits;
        check_dim(dim, input.len())?;
        check_dim(dim, output.len())?;
        let base = self.base_factor();
        let flip = self.x as usize;
        let kernel = |offset: usize, chunk: &mut [Complex64]| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let src = (offset + k) ^ flip;
                *out = self.coefficient(base, src) * input[src];
            }
        };
        if dim >= PAR_THRESHOLD {
            use rayon::prelude::*;
            output
                .par_chunks_mut(PAR_THRESHOLD)
                .enumerate()
                .for_each(|(c, chunk)| kernel(c * PAR_THRESHOLD, chunk));
        } else {
            kernel(0, output);
        }
        Ok(())
    }

    /// Accumulates `weight * P * input` into `output`.
    pub fn apply_add(
        &self,
        weight: Complex64,
        input: &[Complex64],
        output: &mut [Complex64],
    ) -> Result<()> {
        let dim = 1usize << self.n_qubits;
        check_dim(dim, input.len())?;
        check_dim(dim, output.len())?;
        let base = self.base_factor() * weight;
        let flip = self.x as usize;
        for (c, out) in output.iter_mut().enumerate() {
            let src = c ^ flip;
            *out += self.coefficient(base, src) * input[src];
        }
        Ok(())
    }

    /// Dense `2^n x 2^n` matrix; guarded to `n <= 12`.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::SizeGuard(format!(
                "to_dense supports at most {DENSE_QUBIT_LIMIT} qubits, got {}",
                self.n_qubits
            )));
        }
        let dim = 1usize << self.n_qubits;
        let base = self.base_factor();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            m[(col ^ self.x as usize, col)] = self.coefficient(base, col);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    /// Highest qubit first, e.g. `+i Y2 Z1 Z0` prints as `+i·YZZ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase.power() as usize];
        let labels: String = (0..self.n_qubits)
            .rev()
            .map(|q| self.axis(q).label())
            .collect();
        write!(f, "{sign}·{labels}")
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}
