//! Dense ground truth: second-quantized Hamiltonians assembled directly on the
//! occupation basis, exact propagators, and a first-order Trotter baseline.
//!
//! Nothing here goes through [`crate::pauli`] or [`crate::jordan_wigner`]
//! except [`trotter_first_order`], which must consume an LCU by definition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::jordan_wigner::LcuHamiltonian;
use crate::state::StateVector;
use crate::tables::IntegralTable;

/// Largest register the dense oracle will build.
pub const ORACLE_QUBIT_LIMIT: usize = 12;

pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        check_dim(matrix.nrows(), matrix.ncols())?;
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// `max |A - A†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < HERMITIAN_TOL
    }

    fn require_hermitian(&self) -> Result<()> {
        let d = self.hermiticity_defect();
        if d >= HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "operator is not Hermitian (max defect {d:e})"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        StateVector::from_column(&(&self.matrix * psi.to_column()))
    }

    /// Ascending eigenvalues and matching orthonormal eigenvector columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        self.require_hermitian()?;
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }
}

/// Sign and target of `a_j |f>`; `None` if orbital `j` (1-based) is empty.
fn annihilate(j: usize, state: usize) -> Option<(f64, usize)> {
    let bit = 1usize << (j - 1);
    if state & bit == 0 {
        return None;
    }
    let parity = (state & (bit - 1)).count_ones();
    Some((if parity % 2 == 0 { 1.0 } else { -1.0 }, state ^ bit))
}

/// Sign and target of `a†_j |f>`; `None` if orbital `j` is occupied.
fn create(j: usize, state: usize) -> Option<(f64, usize)> {
    let bit = 1usize << (j - 1);
    if state & bit != 0 {
        return None;
    }
    let parity = (state & (bit - 1)).count_ones();
    Some((if parity % 2 == 0 { 1.0 } else { -1.0 }, state | bit))
}

/// Applies `ops` right to left; each entry is `(orbital, dagger)`.
fn apply_string(ops: &[(usize, bool)], state: usize) -> Option<(f64, usize)> {
    let mut sign = 1.0;
    let mut s = state;
    for &(j, dagger) in ops.iter().rev() {
        let (f, next) = if dagger { create(j, s)? } else { annihilate(j, s)? };
        sign *= f;
        s = next;
    }
    Some((sign, s))
}

/// Dense `a†_j` (1-based) on the `2^n` occupation basis.
pub fn creation_operator(j: usize, n: usize) -> Result<DenseOperator> {
    if n > ORACLE_QUBIT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "dense oracle supports at most {ORACLE_QUBIT_LIMIT} orbitals"
        )));
    }
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { what: "orbital", index: j, max: n });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        if let Some((sign, row)) = create(j, col) {
            m[(row, col)] = Complex64::new(sign, 0.0);
        }
    }
    Ok(DenseOperator { matrix: m })
}

/// `Σ h_ij a†_i a_j + ½ Σ h_ijkl a†_i a†_j a_k a_l` on the `2^N` occupation basis.
pub fn dense_from_second_quantized(table: &IntegralTable) -> Result<DenseOperator> {
    table.validate()?;
    let n = table.n_orbitals();
    if n > ORACLE_QUBIT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "dense oracle supports at most {ORACLE_QUBIT_LIMIT} orbitals"
        )));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        for i in 1..=n {
            for j in 1..=n {
                let h = table.h1(i, j);
                if h == 0.0 {
                    continue;
                }
                if let Some((sign, row)) = apply_string(&[(i, true), (j, false)], col) {
                    m[(row, col)] += Complex64::new(h * sign, 0.0);
                }
            }
        }
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    for l in 1..=n {
                        let h = table.h2(i, j, k, l);
                        if h == 0.0 {
                            continue;
                        }
                        let ops = [(i, true), (j, true), (k, false), (l, false)];
                        if let Some((sign, row)) = apply_string(&ops, col) {
                            m[(row, col)] += Complex64::new(0.5 * h * sign, 0.0);
                        }
                    }
                }
            }
        }
    }
    DenseOperator::new(m)
}

/// `exp(-iHt)` through the eigendecomposition of Hermitian `H`.
pub fn exact_propagator(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let (values, v) = h.eigen()?;
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
    );
    let mut scaled = v.clone();
    for (c, p) in phases.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= p;
        }
    }
    DenseOperator::new(scaled * v.adjoint())
}

/// `(Π_γ exp(-i W_γ H_γ t/steps))^steps` over the merged Pauli sum.
pub fn trotter_first_order(ham: &LcuHamiltonian, t: f64, steps: usize) -> Result<DenseOperator> {
    if steps == 0 {
        return Err(Error::Validation("Trotter step count must be at least 1".into()));
    }
    if ham.n_qubits() > ORACLE_QUBIT_LIMIT {
        return Err(Error::SizeGuard(format!(
            "Trotter baseline supports at most {ORACLE_QUBIT_LIMIT} qubits"
        )));
    }
    let dim = 1usize << ham.n_qubits();
    let tau = t / steps as f64;
    let compact = ham.compacted();
    let mut step = DMatrix::<Complex64>::identity(dim, dim);
    for term in compact.terms() {
        // P² = I, so exp(aP) = cosh(a) I + sinh(a) P for any complex a.
        let a = Complex64::new(0.0, -tau) * term.weight;
        let p = term.pauli.to_dense()?;
        let factor = DMatrix::<Complex64>::identity(dim, dim) * a.cosh() + p * a.sinh();
        step = factor * step;
    }
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..steps {
        u = &step * u;
    }
    DenseOperator::new(u)
}

/// Largest `|eigenvalue|` of Hermitian `H`.
pub fn spectral_norm(h: &DenseOperator) -> Result<f64> {
    let (values, _) = h.eigen()?;
    Ok(values.iter().fold(0.0, |m, e| m.max(e.abs())))
}

/// Operator 2-norm of `A - B` for unitary comparison, via `spectral_norm` of
/// the Hermitian `(A-B)†(A-B)`.
pub fn operator_distance(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let d = a.matrix() - b.matrix();
    let gram = DenseOperator::new(d.adjoint() * &d)?;
    Ok(spectral_norm(&gram)?.max(0.0).sqrt())
}
