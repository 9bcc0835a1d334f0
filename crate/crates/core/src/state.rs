use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::MAX_QUBITS;

/// Dense `2^n` amplitude vector. Never renormalized implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1 << n_qubits],
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zeros(n_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::IndexOutOfRange {
                what: "basis state",
                index,
                max: s.amplitudes.len() - 1,
            });
        }
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Validation(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Returns a unit-norm copy; errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        let mut out = self.clone();
        out.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(out)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        crate::error::check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        crate::error::check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn to_column(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub fn from_column(v: &DVector<Complex64>) -> Result<Self> {
        Self::from_amplitudes(v.as_slice().to_vec())
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    // Dense vectors past 30 qubits are out of desk scale.
    if n_qubits == 0 || n_qubits > MAX_QUBITS.min(30) {
        return Err(Error::SizeGuard(format!(
            "statevectors support 1..=30 qubits, got {n_qubits}"
        )));
    }
    Ok(())
}
