//! Shared fixtures and independent reference computations for integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use lcusim::{IntegralTable, LcuHamiltonian, PauliString, StateVector};

pub const BOND: f64 = 1.4011;

pub const STO3G_H: [(f64, f64); 3] = [
    (3.425_250_91, 0.154_328_97),
    (0.623_913_73, 0.535_328_14),
    (0.168_855_40, 0.444_634_54),
];

pub fn h2_geometry(bond: f64) -> String {
    let mut s = format!("# H2, STO-3G\natom 1 0 0 0\natom 1 0 0 {bond}\n");
    for atom in 1..=2 {
        s.push_str(&format!("orbital {atom} 0 0 0 3\n"));
        for (a, c) in STO3G_H {
            s.push_str(&format!("{a} {c}\n"));
        }
    }
    s
}

/// `F0(t) = ∫_0^1 exp(-t u²) du` by composite Simpson.
pub fn boys0(t: f64) -> f64 {
    let n = 4000;
    let h = 1.0 / n as f64;
    let f = |u: f64| (-t * u * u).exp();
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|d| (a[d] - b[d]).powi(2)).sum()
}

fn product_center(a: f64, pa: [f64; 3], b: f64, pb: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|d| (a * pa[d] + b * pb[d]) / (a + b))
}

/// Contracted s functions as (center, [(exponent, coefficient · norm)]).
type SFunction = ([f64; 3], Vec<(f64, f64)>);

fn s_function(center: [f64; 3], prims: &[(f64, f64)]) -> SFunction {
    (
        center,
        prims
            .iter()
            .map(|&(a, c)| (a, c * (2.0 * a / PI).powf(0.75)))
            .collect(),
    )
}

/// Closed-form Gaussian integrals for s functions, Löwdin-orthonormalized:
/// returns `(h[p][q], (pq|rs))` in the orthonormal spatial basis.
pub fn analytic_s_integrals(
    funcs: &[([f64; 3], Vec<(f64, f64)>)],
    nuclei: &[(f64, [f64; 3])],
) -> (DMatrix<f64>, Vec<f64>) {
    let basis: Vec<SFunction> = funcs.iter().map(|(c, p)| s_function(*c, p)).collect();
    let m = basis.len();
    let mut s: DMatrix<f64> = DMatrix::zeros(m, m);
    let mut h: DMatrix<f64> = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let (ca, pa) = &basis[i];
            let (cb, pb) = &basis[j];
            for &(a, na) in pa {
                for &(b, nb) in pb {
                    let p = a + b;
                    let mu = a * b / p;
                    let r2 = dist2(*ca, *cb);
                    let ov = (PI / p).powf(1.5) * (-mu * r2).exp();
                    s[(i, j)] += na * nb * ov;
                    h[(i, j)] += na * nb * mu * (3.0 - 2.0 * mu * r2) * ov;
                    let pc = product_center(a, *ca, b, *cb);
                    for &(z, rc) in nuclei {
                        h[(i, j)] -= na * nb * z * 2.0 * PI / p
                            * (-mu * r2).exp()
                            * boys0(p * dist2(pc, rc));
                    }
                }
            }
        }
    }
    let mut eri = vec![0.0; m.pow(4)];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut v = 0.0;
                    for &(a, na) in &basis[i].1 {
                        for &(b, nb) in &basis[j].1 {
                            for &(c, nc) in &basis[k].1 {
                                for &(d, nd) in &basis[l].1 {
                                    let (p, q) = (a + b, c + d);
                                    let pc = product_center(a, basis[i].0, b, basis[j].0);
                                    let qc = product_center(c, basis[k].0, d, basis[l].0);
                                    let kab = (-a * b / p * dist2(basis[i].0, basis[j].0)).exp();
                                    let kcd = (-c * d / q * dist2(basis[k].0, basis[l].0)).exp();
                                    let t = p * q / (p + q) * dist2(pc, qc);
                                    v += na * nb * nc * nd * 2.0 * PI.powf(2.5)
                                        / (p * q * (p + q).sqrt())
                                        * kab
                                        * kcd
                                        * boys0(t);
                                }
                            }
                        }
                    }
                    eri[((i * m + j) * m + k) * m + l] = v;
                }
            }
        }
    }
    let eig = SymmetricEigen::new(s);
    let x: DMatrix<f64> = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v: f64| 1.0 / v.sqrt()))
        * eig.eigenvectors.transpose();
    let h_mo = x.transpose() * h * &x;
    let mut eri_mo = vec![0.0; m.pow(4)];
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for t in 0..m {
                    let mut v = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            for k in 0..m {
                                for l in 0..m {
                                    v += x[(i, p)] * x[(j, q)] * x[(k, r)] * x[(l, t)]
                                        * eri[((i * m + j) * m + k) * m + l];
                                }
                            }
                        }
                    }
                    eri_mo[((p * m + q) * m + r) * m + t] = v;
                }
            }
        }
    }
    (h_mo, eri_mo)
}

/// Spin-orbital table from spatial `h` and chemist `(pq|rs)`.
pub fn spin_table(h: &DMatrix<f64>, eri: &[f64]) -> IntegralTable {
    let m = h.nrows();
    let mut t = IntegralTable::zeros(2 * m).unwrap();
    let sp = |j: usize| ((j - 1) / 2, (j - 1) % 2);
    for i in 1..=2 * m {
        for j in 1..=2 * m {
            let ((pi, si), (pj, sj)) = (sp(i), sp(j));
            if si == sj {
                t.set_h1(i, j, h[(pi, pj)]).unwrap();
            }
            for k in 1..=2 * m {
                for l in 1..=2 * m {
                    let ((pk, sk), (pl, sl)) = (sp(k), sp(l));
                    if si == sl && sj == sk {
                        t.set_h2(i, j, k, l, eri[((pi * m + pl) * m + pj) * m + pk]).unwrap();
                    }
                }
            }
        }
    }
    t
}

/// Analytic H₂/STO-3G spin-orbital table at `bond`.
pub fn h2_analytic_table(bond: f64) -> IntegralTable {
    let prims: Vec<(f64, f64)> = STO3G_H.to_vec();
    let funcs = vec![([0.0, 0.0, 0.0], prims.clone()), ([0.0, 0.0, bond], prims)];
    let nuclei = [(1.0, [0.0, 0.0, 0.0]), (1.0, [0.0, 0.0, bond])];
    let (h, eri) = analytic_s_integrals(&funcs, &nuclei);
    spin_table(&h, &eri)
}

/// Lowest eigenvalue of a real-symmetric dense matrix restricted to basis
/// states with `electrons` set bits.
pub fn sector_ground_energy(h: &DMatrix<Complex64>, electrons: u32) -> f64 {
    let idx: Vec<usize> = (0..h.nrows()).filter(|&i: &usize| i.count_ones() == electrons).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])].re);
    SymmetricEigen::new(sub).eigenvalues.min()
}

pub fn random_state(rng: &mut ChaCha8Rng, n_qubits: usize) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n_qubits)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::from_amplitudes(amps).unwrap().normalized().unwrap()
}

pub fn random_pauli(rng: &mut ChaCha8Rng, n_qubits: usize) -> PauliString {
    use lcusim::Pauli;
    let axes: Vec<Pauli> = (0..n_qubits)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])
        .collect();
    PauliString::from_axes(&axes, lcusim::Phase::ONE).unwrap()
}

/// Hermitian LCU: real weights on Pauli strings, `Λ` scaled to `lambda`.
pub fn random_lcu(rng: &mut ChaCha8Rng, n_qubits: usize, terms: usize, lambda: f64) -> LcuHamiltonian {
    let raw: Vec<(Complex64, PauliString)> = (0..terms)
        .map(|_| (Complex64::new(rng.gen_range(-1.0..1.0), 0.0), random_pauli(rng, n_qubits)))
        .collect();
    let total: f64 = raw.iter().map(|(w, _)| w.norm()).sum();
    let raw = raw.into_iter().map(|(w, p)| (w * (lambda / total), p)).collect();
    LcuHamiltonian::new(n_qubits, raw).unwrap()
}

/// Random real table with the symmetries of a physical Hamiltonian.
pub fn random_table(rng: &mut ChaCha8Rng, n: usize) -> IntegralTable {
    let mut t = IntegralTable::zeros(n).unwrap();
    for i in 1..=n {
        for j in i..=n {
            let v = rng.gen_range(-1.0..1.0);
            t.set_h1(i, j, v).unwrap();
            t.set_h1(j, i, v).unwrap();
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                for l in 1..=n {
                    let v: f64 = rng.gen_range(-0.5..0.5);
                    let cur = t.h2(i, j, k, l);
                    // h_ijkl = h_lkji keeps the two-body part Hermitian.
                    if (l, k, j, i) < (i, j, k, l) {
                        t.set_h2(i, j, k, l, t.h2(l, k, j, i)).unwrap();
                    } else if cur == 0.0 {
                        t.set_h2(i, j, k, l, v).unwrap();
                    }
                }
            }
        }
    }
    t
}
