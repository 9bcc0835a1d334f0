//! `±ζ` decomposition of sampled integrands and the discretized Hamiltonian
//! it induces.
//!
//! Each sample `w` is written as `ζ Σ_{m=1}^{M} s_m` with
//! `s_m = +1` iff `w > (2m - M - 1) ζ`, which keeps the reconstruction
//! within `ζ`. The signs are monotone in `m`, so their sum has a closed form
//! and the `Γ·M·μ`-term expansion never has to be materialized.

use serde::Serialize;

use super::grid::{direction, Coordinates, GridSpec};
use super::quadrature::{
    canonical_representatives, cube_point, nuclear_at, one_body_w, two_body_w, Evaluator,
    SpatialIntegrals,
};
use super::system::MolecularSystem;
use crate::error::{Error, Result};
use crate::jordan_wigner::{build_lcu, LcuHamiltonian, TermIndex};

/// Largest `M`; keeps `(2m - M - 1)` exact in `f64`.
pub const MAX_SIGN_TERMS: u64 = 1 << 52;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignDecomposition {
    pub zeta: f64,
    pub m: u64,
}

impl SignDecomposition {
    pub fn new(zeta: f64, m: u64) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::Config(format!("zeta must be positive, got {zeta}")));
        }
        if m == 0 || m > MAX_SIGN_TERMS {
            return Err(Error::Config(format!(
                "sign term count must lie in 1..={MAX_SIGN_TERMS}, got {m}"
            )));
        }
        Ok(Self { zeta, m })
    }

    /// Smallest even `M >= max_abs / ζ`. Even `M` maps `w = 0` to a zero sum.
    pub fn covering(zeta: f64, max_abs: f64) -> Result<Self> {
        if !(max_abs >= 0.0 && max_abs.is_finite()) {
            return Err(Error::Config(format!("invalid sample bound {max_abs}")));
        }
        let raw = (max_abs / zeta).ceil();
        if !(raw < MAX_SIGN_TERMS as f64) {
            return Err(Error::Config(format!(
                "zeta = {zeta:e} needs more than {MAX_SIGN_TERMS} sign terms"
            )));
        }
        let m = (raw as u64).max(1).div_ceil(2) * 2;
        Self::new(zeta, m)
    }

    fn check_range(&self, w: f64) -> Result<()> {
        let limit = self.m as f64 * self.zeta;
        if !(w.abs() <= limit) {
            return Err(Error::Range { value: w, limit });
        }
        Ok(())
    }

    #[inline]
    fn positive(&self, w: f64, m: u64) -> bool {
        w > (2.0 * m as f64 - self.m as f64 - 1.0) * self.zeta
    }

    /// `Σ_m s_m`, equal to summing [`decompose_sign`] over `m = 1..=M`.
    pub fn sign_sum(&self, w: f64) -> Result<i64> {
        self.check_range(w)?;
        Ok(self.sign_sum_unchecked(w))
    }

    #[inline]
    fn sign_sum_unchecked(&self, w: f64) -> i64 {
        let big_m = self.m as f64;
        // Number of positive signs; the estimate is corrected against the
        // exact predicate so ties resolve as in `decompose_sign`.
        let estimate = ((w / self.zeta + big_m + 1.0) / 2.0).ceil() - 1.0;
        let mut c = estimate.clamp(0.0, big_m) as u64;
        while c > 0 && !self.positive(w, c) {
            c -= 1;
        }
        while c < self.m && self.positive(w, c + 1) {
            c += 1;
        }
        2 * c as i64 - self.m as i64
    }
}

/// `s_m(w)` for `1 <= m <= M`.
pub fn decompose_sign(w: f64, dec: &SignDecomposition, m: u64) -> Result<i8> {
    dec.check_range(w)?;
    if m == 0 || m > dec.m {
        return Err(Error::IndexOutOfRange {
            what: "sign term",
            index: m as usize,
            max: dec.m as usize,
        });
    }
    Ok(if dec.positive(w, m) { 1 } else { -1 })
}

/// `ζ = c · ε / (Γ 𝒱 t)`.
pub fn zeta_for(constant: f64, epsilon: f64, t: f64, n_spin_orbitals: usize, grid: &GridSpec) -> f64 {
    constant * epsilon / (TermIndex::term_count(n_spin_orbitals) as f64 * grid.volume() * t)
}

/// Per-representative fold of every sample on a polar grid.
///
/// `fold(acc, w, count)` receives each sample value with its multiplicity.
fn sample_pass<A, F, M>(
    sys: &MolecularSystem,
    grid: &GridSpec,
    init: A,
    fold: F,
    merge: M,
) -> Result<(Vec<A>, Vec<A>)>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, f64, u64) + Sync,
    M: Fn(&mut A, &A) + Sync,
{
    if grid.coordinates != Coordinates::Polar {
        return Err(Error::Config("the discretized Hamiltonian uses a polar grid".into()));
    }
    let m = sys.n_spatial();
    let (one, two) = canonical_representatives(m);
    let ev = Evaluator::new(sys);
    let table = grid.phi_table();
    let n = grid.n_x;
    let n3 = n * n * n;
    let n_s = grid.n_displacements() as usize;
    let (nb, nc) = (grid.n_xi, grid.n_theta);
    let prims = sys.flat_primitives();

    let blocks = |len: usize, block: usize, width: usize, f: &(dyn Fn(usize, &mut Vec<A>) + Sync)| {
        let parts: Vec<Vec<A>> = {
            use rayon::prelude::*;
            (0..len.div_ceil(block))
                .into_par_iter()
                .map(|b| {
                    let mut acc = vec![init.clone(); width];
                    for i in b * block..((b + 1) * block).min(len) {
                        f(i, &mut acc);
                    }
                    acc
                })
                .collect()
        };
        let mut total = vec![init.clone(); width];
        for p in &parts {
            for (t, v) in total.iter_mut().zip(p) {
                merge(t, v);
            }
        }
        total
    };

    // Two-body representatives, grouped by cube anchor.
    let mut two_acc = vec![init.clone(); two.len()];
    let mut groups: Vec<([f64; 3], Vec<usize>)> = Vec::new();
    for (i, r) in two.iter().enumerate() {
        let anchor = sys.anchor(r[0]);
        match groups.iter_mut().find(|(p, _)| *p == anchor) {
            Some((_, v)) => v.push(i),
            None => groups.push((anchor, vec![i])),
        }
    }
    for (anchor, idx) in &groups {
        let xs: [Vec<f64>; 3] = [0, 1, 2].map(|d| (0..n).map(|i| anchor[d] + grid.cube_offset(i)).collect());
        let mut vx = vec![0.0; n3 * m];
        let mut buf = vec![0.0; m];
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    let x = cube_point(grid, *anchor, [i0, i1, i2]);
                    ev.values(x, &mut buf);
                    vx[((i0 * n + i1) * n + i2) * m..][..m].copy_from_slice(&buf);
                }
            }
        }
        let reps: Vec<[usize; 4]> = idx.iter().map(|&i| two[i]).collect();
        let zero_points = (n3 as u64) * ((nc * grid.n_phi) + (nb - 1) * grid.n_phi) as u64;
        let items = (nb - 1) * (nc - 1);
        let body = |it: usize, acc: &mut Vec<A>| {
            let (b, c) = (it / (nc - 1) + 1, it % (nc - 1) + 1);
            let xi = b as f64 * grid.h_xi();
            let mut g = vec![vec![0.0; n]; 3 * prims.len()];
            let mut vy = vec![0.0; m];
            for d in 0..grid.n_phi {
                let (dir, st) = direction(grid, &table, c, d);
                for (u, pr) in prims.iter().enumerate() {
                    for k in 0..3 {
                        let row = &mut g[u * 3 + k];
                        for (i, x) in xs[k].iter().enumerate() {
                            let y = x - xi * dir[k];
                            let t = y - pr.center[k];
                            let e = (-pr.exponent * t * t).exp();
                            row[i] = if pr.powers[k] == 0 { e } else { t * e };
                        }
                    }
                }
                let jac = xi * st;
                for i0 in 0..n {
                    for i1 in 0..n {
                        for i2 in 0..n {
                            vy.fill(0.0);
                            for (u, pr) in prims.iter().enumerate() {
                                let f = g[u * 3][i0] * g[u * 3 + 1][i1] * g[u * 3 + 2][i2];
                                for (o, k) in vy.iter_mut().zip(&pr.k) {
                                    *o += k * f;
                                }
                            }
                            let px = &vx[((i0 * n + i1) * n + i2) * m..][..m];
                            for (slot, r) in acc.iter_mut().zip(&reps) {
                                fold(slot, two_body_w(px[r[0]] * px[r[1]], vy[r[2]] * vy[r[3]], jac), 1);
                            }
                        }
                    }
                }
            }
        };
        let mut sums = blocks(items, 1, reps.len(), &body);
        for s in sums.iter_mut() {
            fold(s, 0.0, zero_points);
        }
        for (&i, s) in idx.iter().zip(sums) {
            two_acc[i] = s;
        }
    }

    // One-body representatives: kinetic over x, nuclear over s.
    let mut one_acc = vec![init.clone(); one.len()];
    for (r, &[a, b]) in one.iter().enumerate() {
        let anchor = sys.anchor(a);
        let (mut va, mut la) = (vec![0.0; m], vec![0.0; m]);
        let mut kin = Vec::with_capacity(n3);
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    ev.values_and_laplacians(cube_point(grid, anchor, [i0, i1, i2]), &mut va, &mut la);
                    kin.push(-0.5 * va[a] * la[b]);
                }
            }
        }
        let mut nuc = Vec::with_capacity(n_s);
        for ib in 0..nb {
            let xi = ib as f64 * grid.h_xi();
            for ic in 0..nc {
                for id in 0..grid.n_phi {
                    let (dir, st) = direction(grid, &table, ic, id);
                    nuc.push(nuclear_at(sys, &ev, xi, dir, st, [a, b], &mut va));
                }
            }
        }
        let body = |ix: usize, acc: &mut Vec<A>| {
            for &v in &nuc {
                fold(&mut acc[0], one_body_w(kin[ix], v, grid), 1);
            }
        };
        one_acc[r] = blocks(n3, 64, 1, &body).pop().unwrap();
    }
    Ok((one_acc, two_acc))
}

/// Largest `|w_γ(z_ρ)|` over every term and grid point.
pub fn max_abs_sample(sys: &MolecularSystem, grid: &GridSpec) -> Result<f64> {
    let (one, two) = sample_pass(
        sys,
        grid,
        0.0f64,
        |acc, w, _| *acc = acc.max(w.abs()),
        |acc, other| *acc = acc.max(*other),
    )?;
    Ok(one.into_iter().chain(two).fold(0.0, f64::max))
}

/// Exact integer sums `Σ_ρ Σ_m s_m(w(z_ρ))` per representative.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSums {
    pub one: Vec<i128>,
    pub two: Vec<i128>,
    /// Sum for an identically zero integrand (spin-forbidden terms).
    pub zero: i128,
    pub max_abs: f64,
}

pub fn sign_sums(sys: &MolecularSystem, grid: &GridSpec, dec: &SignDecomposition) -> Result<SignSums> {
    let (one, two) = sample_pass(
        sys,
        grid,
        (0i128, 0.0f64),
        |acc, w, count| {
            acc.0 += dec.sign_sum_unchecked(w) as i128 * count as i128;
            acc.1 = acc.1.max(w.abs());
        },
        |acc, other| {
            acc.0 += other.0;
            acc.1 = acc.1.max(other.1);
        },
    )?;
    let max_abs = one.iter().chain(&two).map(|a| a.1).fold(0.0, f64::max);
    dec.check_range(max_abs)?;
    Ok(SignSums {
        one: one.iter().map(|a| a.0).collect(),
        two: two.iter().map(|a| a.0).collect(),
        zero: dec.sign_sum_unchecked(0.0) as i128 * grid.mu() as i128,
        max_abs,
    })
}

/// `H = (ζ𝒱/μ) Σ_γ Σ_m Σ_ρ s_m(w_γ(z_ρ)) H_γ`, stored as one weight per `γ`
/// with `λ = Γ M ζ 𝒱`.
pub fn build_discretized_lcu(
    sys: &MolecularSystem,
    grid: &GridSpec,
    dec: &SignDecomposition,
) -> Result<LcuHamiltonian> {
    let sums = sign_sums(sys, grid, dec)?;
    let m = sys.n_spatial();
    let (one, two) = canonical_representatives(m);
    let unit = grid.cell_volume() * dec.zeta;
    // Integrals are the weights divided by their prefactors.
    let one_vals: Vec<f64> = sums.one.iter().map(|&s| 4.0 * unit * s as f64).collect();
    let two_vals: Vec<f64> = sums.two.iter().map(|&s| 32.0 * unit * s as f64).collect();
    let spatial = SpatialIntegrals::from_representatives(m, &one, &one_vals, &two, &two_vals);
    let mut table = spatial.to_table()?;
    if sums.zero != 0 {
        let n = table.n_orbitals();
        let spin = |j: usize| (j - 1) % 2;
        let z = unit * sums.zero as f64;
        for i in 1..=n {
            for j in 1..=n {
                if spin(i) != spin(j) {
                    table.set_h1(i, j, 4.0 * z)?;
                }
                for k in 1..=n {
                    for l in 1..=n {
                        if spin(i) != spin(l) || spin(j) != spin(k) {
                            table.set_h2(i, j, k, l, 32.0 * z)?;
                        }
                    }
                }
            }
        }
    }
    let gamma = TermIndex::term_count(table.n_orbitals()) as f64;
    build_lcu(&table, 0.0)?.with_lambda_norm(gamma * dec.m as f64 * dec.zeta * grid.volume())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sample_splits_symmetrically() {
        let dec = SignDecomposition::new(1.0, 2).unwrap();
        assert_eq!(decompose_sign(0.0, &dec, 1).unwrap(), 1);
        assert_eq!(decompose_sign(0.0, &dec, 2).unwrap(), -1);
        assert_eq!(dec.sign_sum(0.0).unwrap(), 0);
    }

    #[test]
    fn saturation_and_range() {
        let dec = SignDecomposition::new(0.5, 6).unwrap();
        assert_eq!(dec.sign_sum(3.0).unwrap(), 6);
        assert_eq!(dec.sign_sum(-3.0).unwrap(), -6);
        assert!(matches!(dec.sign_sum(3.01), Err(Error::Range { .. })));
        assert!(decompose_sign(0.0, &dec, 7).is_err());
    }

    #[test]
    fn closed_form_matches_enumeration_at_ties() {
        for big_m in 1..=9u64 {
            let dec = SignDecomposition::new(0.25, big_m).unwrap();
            for j in -(4 * big_m as i64)..=(4 * big_m as i64) {
                let w = j as f64 * 0.0625;
                if w.abs() > big_m as f64 * 0.25 {
                    continue;
                }
                let direct: i64 = (1..=big_m)
                    .map(|m| decompose_sign(w, &dec, m).unwrap() as i64)
                    .sum();
                assert_eq!(dec.sign_sum(w).unwrap(), direct, "M={big_m} w={w}");
            }
        }
    }

    #[test]
    fn covering_rounds_up_to_even() {
        assert_eq!(SignDecomposition::covering(1.0, 2.5).unwrap().m, 4);
        assert_eq!(SignDecomposition::covering(1.0, 0.0).unwrap().m, 2);
    }
}
