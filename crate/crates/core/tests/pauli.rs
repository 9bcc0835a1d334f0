use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use lcusim::pauli::DENSE_QUBIT_LIMIT;
use lcusim::{Error, Pauli, PauliString, Phase, StateVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single(p: Pauli) -> DMatrix<Complex64> {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// Kronecker product with qubit 0 as the least significant factor.
fn kron_oracle(axes: &[Pauli], phase: Phase) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, phase.to_complex());
    for &a in axes.iter().rev() {
        m = m.kronecker(&single(a));
    }
    m
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(axes, power)| {
        let axes: Vec<Pauli> = axes
            .into_iter()
            .map(|a| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][a as usize])
            .collect();
        PauliString::from_axes(&axes, Phase::from_power(power)).unwrap()
    })
}

fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero state", |v| {
        let amps: Vec<Complex64> = v.into_iter().map(|(re, im)| c(re, im)).collect();
        StateVector::from_amplitudes(amps).ok()?.normalized().ok()
    })
}

#[test]
fn dense_examples() {
    let x = PauliString::single(1, 0, Pauli::X).unwrap();
    assert_eq!(x.to_dense().unwrap(), single(Pauli::X));

    let minus_i = PauliString::identity(1).unwrap().with_phase(Phase::MINUS_I);
    let want = DMatrix::from_diagonal_element(2, 2, c(0.0, -1.0));
    assert_eq!(minus_i.to_dense().unwrap(), want);

    let zx = PauliString::from_axes(&[Pauli::X, Pauli::Z], Phase::ONE).unwrap();
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    #[rustfmt::skip]
    let hand = DMatrix::from_row_slice(4, 4, &[
        o, l, o, o,
        l, o, o, o,
        o, o, o, -l,
        o, o, -l, o,
    ]);
    assert_eq!(zx.to_dense().unwrap(), hand);
}

#[test]
fn dense_guard() {
    let p = PauliString::identity(DENSE_QUBIT_LIMIT + 1).unwrap();
    assert!(matches!(p.to_dense(), Err(Error::SizeGuard(_))));
}

#[test]
fn bit_convention_single_x() {
    // X on qubit 2 flips bit 2 of the amplitude index.
    let p = PauliString::single(3, 2, Pauli::X).unwrap();
    let out = p.apply(&StateVector::basis(3, 0b001).unwrap()).unwrap();
    assert_eq!(out, StateVector::basis(3, 0b101).unwrap());
}

proptest! {
    #[test]
    fn dense_matches_kronecker(p in (1usize..=5).prop_flat_map(pauli_strategy)) {
        let want = kron_oracle(&p.axes(), p.phase());
        prop_assert!(max_diff(&p.to_dense().unwrap(), &want) == 0.0);
    }

    #[test]
    fn square_is_phase_squared(
        (p, psi) in (1usize..=6).prop_flat_map(|n| (pauli_strategy(n), state_strategy(n)))
    ) {
        let twice = p.apply(&p.apply(&psi).unwrap()).unwrap();
        let ph = p.phase().to_complex();
        let want: Vec<Complex64> = psi.amplitudes().iter().map(|a| a * ph * ph).collect();
        for (a, b) in twice.amplitudes().iter().zip(&want) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn multiply_is_associative(
        (a, b, cc) in (1usize..=5).prop_flat_map(|n| (pauli_strategy(n), pauli_strategy(n), pauli_strategy(n)))
    ) {
        let left = a.multiply(&b).unwrap().multiply(&cc).unwrap();
        let right = a.multiply(&b.multiply(&cc).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        let dense = a.to_dense().unwrap() * b.to_dense().unwrap() * cc.to_dense().unwrap();
        prop_assert!(max_diff(&left.to_dense().unwrap(), &dense) < 1e-14);
    }

    #[test]
    fn apply_matches_dense(
        (p, psi) in (1usize..=6).prop_flat_map(|n| (pauli_strategy(n), state_strategy(n)))
    ) {
        let out = p.apply(&psi).unwrap();
        let want = p.to_dense().unwrap() * psi.to_column();
        for (a, b) in out.amplitudes().iter().zip(want.iter()) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_preserves_norm(
        (p, psi) in (1usize..=8).prop_flat_map(|n| (pauli_strategy(n), state_strategy(n)))
    ) {
        prop_assert!((p.apply(&psi).unwrap().norm() - psi.norm()).abs() < 1e-14);
    }

    #[test]
    fn adjoint_is_dense_adjoint(p in (1usize..=4).prop_flat_map(pauli_strategy)) {
        let d = p.to_dense().unwrap();
        prop_assert!(max_diff(&p.adjoint().to_dense().unwrap(), &d.adjoint()) == 0.0);
    }
}
