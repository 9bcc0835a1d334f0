//! `verify`: randomized cross-checks of every layer against the dense oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use lcusim::integrals::{decompose_sign, SignDecomposition};
use lcusim::oracle::{creation_operator, dense_from_second_quantized, exact_propagator, DenseOperator};
use lcusim::taylor::{
    ancilla_zero_probability, circuit_w_operator, embed_system_state, evolve, minimal_order,
    oaa_combination, plan_segments, CircuitLayout, Mode, SEGMENT_NORM,
};
use lcusim::{
    build_lcu, ladder_unitary, IntegralTable, LcuHamiltonian, Pauli, PauliString, Phase, Result,
    StateVector,
};

use crate::args::VerifyArgs;
use crate::report::{Report, Validation};

type Matrix = DMatrix<Complex64>;

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Result<StateVector> {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::from_amplitudes(amps)?.normalized()
}

fn random_pauli(rng: &mut ChaCha8Rng, n: usize, phase: Phase) -> Result<PauliString> {
    let axes: Vec<Pauli> = (0..n)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])
        .collect();
    PauliString::from_axes(&axes, phase)
}

/// Hermitian LCU with real weights scaled to `Λ = lambda`.
fn random_lcu(rng: &mut ChaCha8Rng, n: usize, terms: usize, lambda: f64) -> Result<LcuHamiltonian> {
    let mut raw = Vec::with_capacity(terms);
    for _ in 0..terms {
        let w = rng.gen_range(-1.0..1.0);
        raw.push((Complex64::new(w, 0.0), random_pauli(rng, n, Phase::ONE)?));
    }
    let total: f64 = raw.iter().map(|(w, _)| w.norm()).sum();
    let raw = raw.into_iter().map(|(w, p)| (w * (lambda / total), p)).collect();
    LcuHamiltonian::new(n, raw)
}

/// Real tables with `h_ij = h_ji` and `h_ijkl = h_lkji`.
fn random_table(rng: &mut ChaCha8Rng, n: usize) -> Result<IntegralTable> {
    let mut t = IntegralTable::zeros(n)?;
    for i in 1..=n {
        for j in i..=n {
            let v = rng.gen_range(-1.0..1.0);
            t.set_h1(i, j, v)?;
            t.set_h1(j, i, v)?;
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                for l in 1..=n {
                    if (l, k, j, i) < (i, j, k, l) {
                        t.set_h2(i, j, k, l, t.h2(l, k, j, i))?;
                    } else {
                        t.set_h2(i, j, k, l, rng.gen_range(-0.5..0.5))?;
                    }
                }
            }
        }
    }
    Ok(t)
}

fn dense(ham: &LcuHamiltonian) -> Result<DenseOperator> {
    DenseOperator::new(ham.to_dense()?)
}

pub fn run(args: &VerifyArgs) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let cases = args.cases.max(1);
    let validations = vec![
        pauli_apply(&mut rng, cases)?,
        anticommutation()?,
        table_equivalence(&mut rng, cases)?,
        evolution(&mut rng, cases)?,
        oaa_identity(&mut rng)?,
        truncation_order()?,
        circuit_modes(&mut rng)?,
        ancilla_probability(&mut rng)?,
        sign_reconstruction(&mut rng)?,
    ];
    let config = json!({ "seed": args.seed, "cases": cases });
    Ok(Report::new("verify", config, json!({}), validations))
}

fn pauli_apply(rng: &mut ChaCha8Rng, cases: usize) -> Result<Validation> {
    let mut worst = 0.0f64;
    for c in 0..cases {
        let n = 1 + c % 6;
        let phase = Phase::from_power(rng.gen_range(0..4));
        let p = random_pauli(rng, n, phase)?;
        let psi = random_state(rng, n)?;
        let want = p.to_dense()? * psi.to_column();
        let got = p.apply(&psi)?;
        for (a, b) in got.amplitudes().iter().zip(want.iter()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(Validation::at_most("pauli_apply_vs_dense", worst, 1e-14))
}

/// Ladder halves against occupation-basis `a†_j`, and the canonical
/// anticommutators at N = 4.
fn anticommutation() -> Result<Validation> {
    let n = 4;
    let dim = 1 << n;
    let half = Complex64::new(0.5, 0.0);
    let mut create = Vec::new();
    let mut worst = 0.0f64;
    for j in 1..=n {
        let c = (ladder_unitary(j, 0, true, n)?.to_dense()? + ladder_unitary(j, 1, true, n)?.to_dense()?) * half;
        worst = worst.max(max_diff(&c, creation_operator(j, n)?.matrix()));
        create.push(c);
    }
    let id = Matrix::identity(dim, dim);
    let zero = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let (ci, cj) = (&create[i], &create[j]);
            let aj = cj.adjoint();
            let mixed = ci * &aj + &aj * ci;
            worst = worst.max(max_diff(&mixed, if i == j { &id } else { &zero }));
            let pure = ci * cj + cj * ci;
            worst = worst.max(max_diff(&pure, &zero));
        }
    }
    Ok(Validation::at_most("jw_anticommutation", worst, 1e-12))
}

fn table_equivalence(rng: &mut ChaCha8Rng, cases: usize) -> Result<Validation> {
    let mut worst = 0.0f64;
    for c in 0..cases {
        let table = random_table(rng, 1 + c % 4)?;
        let lcu = build_lcu(&table, 0.0)?.to_dense()?;
        worst = worst.max(max_diff(&lcu, dense_from_second_quantized(&table)?.matrix()));
    }
    Ok(Validation::at_most("jw_vs_occupation_basis", worst, 1e-12))
}

/// Worst `‖out - e^{-iHt}ψ‖ / (10 ε)` over random LCUs with `Λt ≤ 3`.
fn evolution(rng: &mut ChaCha8Rng, cases: usize) -> Result<Validation> {
    let mut worst = 0.0f64;
    for c in 0..cases {
        let n = 1 + c % 3;
        let terms = rng.gen_range(1..=8);
        let lambda = rng.gen_range(0.1..3.0);
        let ham = random_lcu(rng, n, terms, lambda)?;
        let psi = random_state(rng, n)?;
        let exact = exact_propagator(&dense(&ham)?, 1.0)?.apply(&psi)?;
        for eps in [1e-3, 1e-6, 1e-9] {
            let (out, _) = evolve(&ham, 1.0, eps, &psi, Mode::Operator)?;
            worst = worst.max(out.distance(&exact)? / (10.0 * eps));
        }
    }
    Ok(Validation::at_most("evolution_error_over_10eps", worst, 1.0))
}

/// With a unitary in place of the series and `s = 2` the amplification
/// step reduces to the identity map on its input.
fn oaa_identity(rng: &mut ChaCha8Rng) -> Result<Validation> {
    let ham = random_lcu(rng, 3, 5, 1.5)?;
    let u = exact_propagator(&dense(&ham)?, 0.4)?;
    let ud = DenseOperator::new(u.matrix().adjoint())?;
    let psi = random_state(rng, 3)?;
    let out = oaa_combination(2.0, &psi, |v| u.apply(v), |v| ud.apply(v))?;
    Ok(Validation::at_most("oaa_identity", out.distance(&u.apply(&psi)?)?, 1e-12))
}

/// Planner order against a direct evaluation of the truncation bound.
fn truncation_order() -> Result<Validation> {
    let brute = |bound: f64| {
        (1usize..)
            .find(|&k| {
                let fact: f64 = (1..=k + 1).map(|q| q as f64).product();
                SEGMENT_NORM.powi(k as i32 + 1) / fact <= bound
            })
            .unwrap()
    };
    let mut mismatches = Vec::new();
    for e in 2..=12 {
        let eps = 10f64.powi(-e);
        let plan = plan_segments(3.0, 1.0, eps)?;
        let k = minimal_order(eps / plan.r as f64)?;
        if k != plan.k || k != brute(eps / plan.r as f64) {
            mismatches.push(eps);
        }
    }
    Ok(Validation::new(
        "truncation_order",
        mismatches.is_empty(),
        format!("mismatched epsilons: {mismatches:?}"),
    ))
}

fn circuit_modes(rng: &mut ChaCha8Rng) -> Result<Validation> {
    let mut worst = 0.0f64;
    for terms in 1..=4 {
        let lambda = rng.gen_range(0.2..0.6);
        let ham = random_lcu(rng, 2, terms, lambda)?;
        let psi = random_state(rng, 2)?;
        let (a, _) = evolve(&ham, 1.0, 0.05, &psi, Mode::Operator)?;
        let (b, _) = evolve(&ham, 1.0, 0.05, &psi, Mode::Circuit)?;
        worst = worst.max(a.distance(&b)?);
    }
    Ok(Validation::at_most("circuit_vs_operator", worst, 1e-10))
}

fn ancilla_probability(rng: &mut ChaCha8Rng) -> Result<Validation> {
    let mut worst = 0.0f64;
    // K = 4 keeps the truncation well below the tolerance and within the
    // ancilla budget for up to two terms.
    for terms in [1, 2, 1, 2] {
        let lambda = rng.gen_range(0.2..0.6);
        let ham = random_lcu(rng, 2, terms, lambda)?;
        let plan = plan_segments(ham.lambda_norm(), 1.0, 2e-3)?;
        let layout = CircuitLayout::new(&plan, &ham)?;
        let psi = random_state(rng, 2)?;
        let joint = circuit_w_operator(&layout, &ham, &embed_system_state(&layout, &psi)?)?;
        let p = ancilla_zero_probability(&layout, &joint)?;
        worst = worst.max((p - 1.0 / (plan.s * plan.s)).abs());
    }
    Ok(Validation::at_most("ancilla_success_probability", worst, 1e-3))
}

/// Worst `|w - ζ Σ s_m| / ζ`, including `w = 0` with even and odd `M`.
fn sign_reconstruction(rng: &mut ChaCha8Rng) -> Result<Validation> {
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let m = 1 + (i % 16) as u64;
        let dec = SignDecomposition::new(rng.gen_range(0.01..1.0), m)?;
        let limit = dec.m as f64 * dec.zeta;
        let w = if i % 100 == 0 { 0.0 } else { rng.gen_range(-limit..=limit) };
        let mut sum = 0i64;
        for k in 1..=dec.m {
            sum += decompose_sign(w, &dec, k)? as i64;
        }
        worst = worst.max((w - dec.zeta * sum as f64).abs() / dec.zeta);
    }
    Ok(Validation::at_most("sign_reconstruction_over_zeta", worst, 1.0))
}
