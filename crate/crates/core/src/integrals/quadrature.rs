//! Riemann sums of the one- and two-electron integrands.
//!
//! Every integral is evaluated on its canonical spatial representative, so
//! the 8-fold symmetry of `(ab|cd)` and Hermiticity of the one-body table
//! hold exactly at any resolution. The two-body kernel is separable: with
//! `ρ_ab = Σ D_ab[P] G_P` over primitive products `G_P`, the `x` sum of
//! `G_P(x) G_Q(x - s)` factorizes into three one-dimensional sums, one
//! matrix product per axis.

use std::collections::BTreeMap;

use serde::Serialize;

use super::basis::factor_1d;
use super::grid::{direction, Coordinates, GridSpec};
use super::system::{FlatPrimitive, MolecularSystem};
use crate::error::{Error, Result};
use crate::jordan_wigner::TermIndex;
use crate::reduce::parallel_block_sum;
use crate::tables::IntegralTable;

/// `(ξ, θ)` items per parallel block.
const ITEM_BLOCK: usize = 4;

/// Canonical spatial representative of an integral (0-based orbitals).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Representative {
    /// `⟨a| -½∇² - Σ Z/r |b⟩` with `a <= b`.
    One([usize; 2]),
    /// Chemist `(ab|cd)` with `a <= b`, `c <= d`, `(a, b) <= (c, d)`.
    Two([usize; 4]),
}

impl Representative {
    /// `1/4` or `1/32`, the factor between an integral and its LCU weight.
    pub fn prefactor(&self) -> f64 {
        match self {
            Representative::One(_) => 0.25,
            Representative::Two(_) => 1.0 / 32.0,
        }
    }
}

/// Maps a term to its representative; `None` when spin forbids it.
pub fn representative(sys: &MolecularSystem, gamma: &TermIndex) -> Result<Option<Representative>> {
    gamma.validate(sys.n_spin_orbitals())?;
    Ok(match *gamma {
        TermIndex::OneBody { orbitals: [i, j], .. } => {
            let (pi, si) = sys.spin_orbital(i)?;
            let (pj, sj) = sys.spin_orbital(j)?;
            (si == sj).then(|| Representative::One([pi.min(pj), pi.max(pj)]))
        }
        TermIndex::TwoBody {
            orbitals: [i, j, k, l],
            ..
        } => {
            let [(pi, si), (pj, sj), (pk, sk), (pl, sl)] =
                [i, j, k, l].map(|o| sys.spin_orbital(o).expect("validated"));
            if si != sl || sj != sk {
                None
            } else {
                let x = (pi.min(pl), pi.max(pl));
                let y = (pj.min(pk), pj.max(pk));
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                Some(Representative::Two([lo.0, lo.1, hi.0, hi.1]))
            }
        }
    })
}

/// All canonical representatives for `m` spatial orbitals.
pub fn canonical_representatives(m: usize) -> (Vec<[usize; 2]>, Vec<[usize; 4]>) {
    let pairs: Vec<[usize; 2]> = (0..m)
        .flat_map(|a| (a..m).map(move |b| [a, b]))
        .collect();
    let mut two = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        for q in &pairs[i..] {
            two.push([p[0], p[1], q[0], q[1]]);
        }
    }
    (pairs, two)
}

/// Integration options shared by the on-the-fly and database paths.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuadratureConfig {
    /// Two-body integrals whose displacement cube stays at least this far
    /// from the origin use Cartesian displacements; `None` means `x_max`.
    pub regime_boundary: Option<f64>,
}

#[inline]
fn prim_factor(a: u32, alpha: f64, u: f64) -> f64 {
    let e = (-alpha * u * u).exp();
    if a == 0 {
        e
    } else {
        u * e
    }
}

/// Pointwise orbital evaluation. Tabulated paths reproduce these values
/// bitwise by using the same factor order.
pub(crate) struct Evaluator<'a> {
    prims: &'a [FlatPrimitive],
    m: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(sys: &'a MolecularSystem) -> Self {
        Self {
            prims: sys.flat_primitives(),
            m: sys.n_spatial(),
        }
    }

    pub fn values(&self, z: [f64; 3], out: &mut [f64]) {
        out[..self.m].fill(0.0);
        for u in self.prims {
            let f = prim_factor(u.powers[0], u.exponent, z[0] - u.center[0])
                * prim_factor(u.powers[1], u.exponent, z[1] - u.center[1])
                * prim_factor(u.powers[2], u.exponent, z[2] - u.center[2]);
            for (o, k) in out.iter_mut().zip(&u.k) {
                *o += k * f;
            }
        }
    }

    pub fn values_and_laplacians(&self, z: [f64; 3], vals: &mut [f64], laps: &mut [f64]) {
        vals[..self.m].fill(0.0);
        laps[..self.m].fill(0.0);
        for u in self.prims {
            let f = [0, 1, 2].map(|d| factor_1d(u.powers[d], u.exponent, z[d] - u.center[d]));
            let v = f[0].0 * f[1].0 * f[2].0;
            let l = f[0].2 * f[1].0 * f[2].0 + f[0].0 * f[1].2 * f[2].0 + f[0].0 * f[1].0 * f[2].2;
            for p in 0..self.m {
                vals[p] += u.k[p] * v;
                laps[p] += u.k[p] * l;
            }
        }
    }
}

#[inline]
pub(crate) fn two_body_w(rho_x: f64, rho_y: f64, jacobian: f64) -> f64 {
    rho_x * rho_y * jacobian / 32.0
}

/// `¼ [K/V_s + N/V_x]`: each part is padded by the volume of the coordinate
/// it does not depend on.
#[inline]
pub(crate) fn one_body_w(kinetic: f64, nuclear: f64, grid: &GridSpec) -> f64 {
    0.25 * (kinetic / grid.displacement_volume() + nuclear / grid.box_volume())
}

#[inline]
pub(crate) fn nuclear_term(charge: f64, jacobian: f64, va: f64, vb: f64) -> f64 {
    -charge * jacobian * va * vb
}

pub(crate) fn cube_point(grid: &GridSpec, anchor: [f64; 3], idx: [usize; 3]) -> [f64; 3] {
    [0, 1, 2].map(|d| anchor[d] + grid.cube_offset(idx[d]))
}

fn cartesian_center(sys: &MolecularSystem, a: usize, c: usize) -> [f64; 3] {
    let (p, q) = (sys.anchor(a), sys.anchor(c));
    [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
}

/// Smallest `|ξ|` over the Cartesian displacement cube of `(a, c)`.
fn cartesian_min_distance(sys: &MolecularSystem, grid: &GridSpec, a: usize, c: usize) -> f64 {
    cartesian_center(sys, a, c)
        .iter()
        .map(|v| (v.abs() - grid.x_max).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Nuclear-attraction sum `Σ_q N_q` at polar displacement `(ξ, θ, φ)`.
pub(crate) fn nuclear_at(
    sys: &MolecularSystem,
    ev: &Evaluator,
    xi: f64,
    dir: [f64; 3],
    st: f64,
    pair: [usize; 2],
    buf: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for nuc in sys.nuclei() {
        let p = [0, 1, 2].map(|d| nuc.position[d] + xi * dir[d]);
        ev.values(p, buf);
        total += nuclear_term(nuc.charge as f64, xi * st, buf[pair[0]], buf[pair[1]]);
    }
    total
}

/// `w_γ(z_ρ)`, including the `1/4` or `1/32` prefactor.
pub fn sample_w(sys: &MolecularSystem, gamma: &TermIndex, rho: u64, grid: &GridSpec) -> Result<f64> {
    let rep = representative(sys, gamma)?;
    let pt = grid.decode(rho)?;
    let Some(rep) = rep else {
        return Ok(0.0);
    };
    let ev = Evaluator::new(sys);
    let m = sys.n_spatial();
    let (mut vx, mut vy) = (vec![0.0; m], vec![0.0; m]);
    match rep {
        Representative::Two([a, b, c, d]) => {
            let x = cube_point(grid, sys.anchor(a), pt.x);
            ev.values(x, &mut vx);
            let rho_x = vx[a] * vx[b];
            match grid.coordinates {
                Coordinates::Polar => {
                    let xi = pt.s[0] as f64 * grid.h_xi();
                    let (dir, st) = direction(grid, &grid.phi_table(), pt.s[1], pt.s[2]);
                    let y = [0, 1, 2].map(|k| x[k] - xi * dir[k]);
                    ev.values(y, &mut vy);
                    Ok(two_body_w(rho_x, vy[c] * vy[d], xi * st))
                }
                Coordinates::Cartesian => {
                    let xi = cube_point(grid, cartesian_center(sys, a, c), pt.s);
                    let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                    if r == 0.0 {
                        return Err(Error::Validation(
                            "Cartesian displacement grid contains ξ = 0".into(),
                        ));
                    }
                    let y = [0, 1, 2].map(|k| x[k] - xi[k]);
                    ev.values(y, &mut vy);
                    Ok(two_body_w(rho_x, vy[c] * vy[d], 1.0 / r))
                }
            }
        }
        Representative::One([a, b]) => {
            if grid.coordinates != Coordinates::Polar {
                return Err(Error::Validation(
                    "one-body integrands need a polar grid".into(),
                ));
            }
            let x = cube_point(grid, sys.anchor(a), pt.x);
            ev.values_and_laplacians(x, &mut vx, &mut vy);
            let kinetic = -0.5 * vx[a] * vy[b];
            let xi = pt.s[0] as f64 * grid.h_xi();
            let (dir, st) = direction(grid, &grid.phi_table(), pt.s[1], pt.s[2]);
            let nuclear = nuclear_at(sys, &ev, xi, dir, st, [a, b], &mut vx);
            Ok(one_body_w(kinetic, nuclear, grid))
        }
    }
}

/// One axis of a primitive product `G(y) = poly(y) · E · exp(-p (y - P)²)`.
#[derive(Debug, Clone, Copy)]
struct PairAxis {
    p: f64,
    center: f64,
    scale: f64,
    powers: [u32; 2],
    centers: [f64; 2],
}

impl PairAxis {
    fn new(u: &FlatPrimitive, v: &FlatPrimitive, d: usize) -> Self {
        let (a, b) = (u.exponent, v.exponent);
        let p = a + b;
        let (cu, cv) = (u.center[d], v.center[d]);
        Self {
            p,
            center: (a * cu + b * cv) / p,
            scale: (-a * b / p * (cu - cv) * (cu - cv)).exp(),
            powers: [u.powers[d], v.powers[d]],
            centers: [cu, cv],
        }
    }

    /// `out[i] = G(x0 + i h - s)`. The Gaussian is walked outward from its
    /// peak by ratio recurrences, so underflow only ever hits the tails.
    fn fill(&self, out: &mut [f64], x0: f64, h: f64, s: f64) {
        let n = out.len();
        let p = self.p;
        let u0 = x0 - s - self.center;
        let peak = (-u0 / h).round().clamp(0.0, (n - 1) as f64) as usize;
        let c = (-2.0 * p * h * h).exp();
        let us = u0 + peak as f64 * h;
        let fs = (-p * us * us).exp();
        out[peak] = fs;
        let (mut f, mut r) = (fs, (-p * (2.0 * us * h + h * h)).exp());
        for o in out[peak + 1..].iter_mut() {
            f *= r;
            r *= c;
            *o = f;
        }
        let (mut f, mut r) = (fs, (-p * (-2.0 * us * h + h * h)).exp());
        for o in out[..peak].iter_mut().rev() {
            f *= r;
            r *= c;
            *o = f;
        }
        let polynomial = self.powers != [0, 0];
        for (i, o) in out.iter_mut().enumerate() {
            let mut v = *o * self.scale;
            if polynomial {
                let y = x0 + i as f64 * h - s;
                for t in 0..2 {
                    if self.powers[t] == 1 {
                        v *= y - self.centers[t];
                    }
                }
            }
            *o = v;
        }
    }
}

struct PairSet {
    axes: Vec<[PairAxis; 3]>,
    uv: Vec<(usize, usize)>,
}

impl PairSet {
    fn new(prims: &[FlatPrimitive]) -> Self {
        let mut axes = Vec::new();
        let mut uv = Vec::new();
        for u in 0..prims.len() {
            for v in u..prims.len() {
                axes.push([0, 1, 2].map(|d| PairAxis::new(&prims[u], &prims[v], d)));
                uv.push((u, v));
            }
        }
        Self { axes, uv }
    }

    fn len(&self) -> usize {
        self.uv.len()
    }

    /// `D_ab` with `ρ_ab = Σ_P D_ab[P] G_P`.
    fn density(&self, prims: &[FlatPrimitive], a: usize, b: usize) -> Vec<f64> {
        self.uv
            .iter()
            .map(|&(u, v)| {
                let (ku, kv) = (&prims[u].k, &prims[v].k);
                if u == v {
                    ku[a] * ku[b]
                } else {
                    ku[a] * kv[b] + kv[a] * ku[b]
                }
            })
            .collect()
    }

    /// Rows `P` of `G_P` on one axis of the cube at `x0`, shifted by `s`.
    fn table(&self, d: usize, x0: f64, h: f64, n: usize, s: f64, out: &mut [f64]) {
        for (q, ax) in self.axes.iter().enumerate() {
            ax[d].fill(&mut out[q * n..(q + 1) * n], x0, h, s);
        }
    }
}

/// `c (rows × cols) = a (rows × k) · bᵀ` with `b` stored as `cols` rows of length `k`.
fn gemm_abt(rows: usize, k: usize, cols: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    assert!(a.len() >= rows * k && b.len() >= cols * k && c.len() >= rows * cols);
    // SAFETY: the assertion bounds every access made by dgemm for these strides.
    unsafe {
        matrixmultiply::dgemm(
            rows,
            k,
            cols,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            cols as isize,
            1,
        );
    }
}

/// `Σ_P Σ_Q D_ab[P] S[P][Q] D_cd[Q]`.
fn contract(dab: &[f64], s: &[f64], dcd: &[f64]) -> f64 {
    let np = dab.len();
    let mut v = 0.0;
    for p in 0..np {
        if dab[p] == 0.0 {
            continue;
        }
        let row = &s[p * np..(p + 1) * np];
        v += dab[p] * row.iter().zip(dcd).map(|(a, b)| a * b).sum::<f64>();
    }
    v
}

/// Raw two-body sums `Σ ρ_ab(x) ρ_cd(x - ξ n̂) ξ sinθ` times the cell volume,
/// for reps sharing the cube anchor.
fn polar_two_body(
    sys: &MolecularSystem,
    grid: &GridSpec,
    anchor: [f64; 3],
    reps: &[[usize; 4]],
) -> Vec<f64> {
    let prims = sys.flat_primitives();
    let pairs = PairSet::new(prims);
    let np = pairs.len();
    let (n, h) = (grid.n_x, grid.h_x());
    let x0 = [0, 1, 2].map(|d| anchor[d] - grid.x_max);
    let a_tab = [0, 1, 2].map(|d| {
        let mut t = vec![0.0; np * n];
        pairs.table(d, x0[d], h, n, 0.0, &mut t);
        t
    });
    let coeffs: Vec<(Vec<f64>, Vec<f64>)> = reps
        .iter()
        .map(|r| (pairs.density(prims, r[0], r[1]), pairs.density(prims, r[2], r[3])))
        .collect();
    // Identical x and y tables when the geometry is symmetric under x <-> y.
    let xy_symmetric = anchor[0] == anchor[1]
        && prims
            .iter()
            .all(|u| u.center[0] == u.center[1] && u.powers[0] == u.powers[1]);
    let table = grid.phi_table();
    let shifts = table.cos.len();
    let nc = grid.n_theta - 1;
    let items = (grid.n_xi - 1) * nc;
    let sums = parallel_block_sum(items, ITEM_BLOCK, reps.len(), |range| {
        let mut out = vec![0.0; reps.len()];
        let mut bmat = vec![0.0; shifts * np * n];
        let mut fxy = [vec![0.0; np * shifts * np], vec![0.0; if xy_symmetric { 0 } else { np * shifts * np }]];
        let mut fz = vec![0.0; np * np];
        let mut acc = vec![0.0; np * np];
        for it in range {
            let (b, c) = (it / nc + 1, it % nc + 1);
            let xi = b as f64 * grid.h_xi();
            let (st, ct) = (c as f64 * grid.h_theta()).sin_cos();
            for dim in 0..if xy_symmetric { 1 } else { 2 } {
                for (k, &cs) in table.cos.iter().enumerate() {
                    pairs.table(dim, x0[dim], h, n, xi * (st * cs), &mut bmat[k * np * n..(k + 1) * np * n]);
                }
                gemm_abt(np, n, shifts * np, &a_tab[dim], &bmat, &mut fxy[dim]);
            }
            pairs.table(2, x0[2], h, n, xi * ct, &mut bmat[..np * n]);
            gemm_abt(np, n, np, &a_tab[2], &bmat, &mut fz);
            acc.fill(0.0);
            let (fx, fy) = if xy_symmetric { (&fxy[0], &fxy[0]) } else { (&fxy[0], &fxy[1]) };
            for d in 0..grid.n_phi {
                let (kx, ky) = (table.cos_index(d), table.sin_index(d));
                for p in 0..np {
                    let rx = &fx[(p * shifts + kx) * np..][..np];
                    let ry = &fy[(p * shifts + ky) * np..][..np];
                    for ((a, x), y) in acc[p * np..(p + 1) * np].iter_mut().zip(rx).zip(ry) {
                        *a += x * y;
                    }
                }
            }
            for (a, z) in acc.iter_mut().zip(&fz) {
                *a *= z;
            }
            let jacobian = xi * st;
            for (o, (dab, dcd)) in out.iter_mut().zip(&coeffs) {
                *o += jacobian * contract(dab, &acc, dcd);
            }
        }
        out
    });
    let cell = grid.cell_volume();
    sums.into_iter().map(|v| v * cell).collect()
}

/// Cartesian-regime sums `Σ ρ_ab(x) ρ_cd(x - ξ) / |ξ|` for reps sharing
/// both anchors.
fn cartesian_two_body(
    sys: &MolecularSystem,
    grid: &GridSpec,
    a: usize,
    c: usize,
    reps: &[[usize; 4]],
) -> Vec<f64> {
    let prims = sys.flat_primitives();
    let pairs = PairSet::new(prims);
    let np = pairs.len();
    let (n, h) = (grid.n_x, grid.h_x());
    let anchor = sys.anchor(a);
    let x0 = [0, 1, 2].map(|d| anchor[d] - grid.x_max);
    let center = cartesian_center(sys, a, c);
    let coeffs: Vec<(Vec<f64>, Vec<f64>)> = reps
        .iter()
        .map(|r| (pairs.density(prims, r[0], r[1]), pairs.density(prims, r[2], r[3])))
        .collect();
    let mut f = Vec::new();
    let mut bmat = vec![0.0; n * np * n];
    let mut a_tab = vec![0.0; np * n];
    for d in 0..3 {
        pairs.table(d, x0[d], h, n, 0.0, &mut a_tab);
        for j in 0..n {
            let s = center[d] + grid.cube_offset(j);
            pairs.table(d, x0[d], h, n, s, &mut bmat[j * np * n..(j + 1) * np * n]);
        }
        let mut fd = vec![0.0; np * n * np];
        gemm_abt(np, n, n * np, &a_tab, &bmat, &mut fd);
        f.push(fd);
    }
    let sums = parallel_block_sum(n, 1, reps.len(), |range| {
        let mut out = vec![0.0; reps.len()];
        let mut acc = vec![0.0; np * np];
        for j0 in range {
            for j1 in 0..n {
                for j2 in 0..n {
                    let xi = cube_point(grid, center, [j0, j1, j2]);
                    let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                    for p in 0..np {
                        let rx = &f[0][(p * n + j0) * np..][..np];
                        let ry = &f[1][(p * n + j1) * np..][..np];
                        let rz = &f[2][(p * n + j2) * np..][..np];
                        for q in 0..np {
                            acc[p * np + q] = rx[q] * ry[q] * rz[q];
                        }
                    }
                    for (o, (dab, dcd)) in out.iter_mut().zip(&coeffs) {
                        *o += contract(dab, &acc, dcd) / r;
                    }
                }
            }
        }
        out
    });
    let cell = grid.cell_volume();
    sums.into_iter().map(|v| v * cell).collect()
}

/// `-½ Σ_x φ_a ∇²φ_b h³`, separable per primitive pair.
fn kinetic(sys: &MolecularSystem, grid: &GridSpec, anchor: [f64; 3], reps: &[[usize; 2]]) -> Vec<f64> {
    let prims = sys.flat_primitives();
    let (n, np) = (grid.n_x, prims.len());
    // g[d][u][i], g2[d][u][i]
    let mut g = vec![vec![vec![0.0; n]; np]; 3];
    let mut g2 = g.clone();
    for d in 0..3 {
        for (u, pr) in prims.iter().enumerate() {
            for i in 0..n {
                let x = anchor[d] + grid.cube_offset(i);
                let (v, _, dd) = factor_1d(pr.powers[d], pr.exponent, x - pr.center[d]);
                g[d][u][i] = v;
                g2[d][u][i] = dd;
            }
        }
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut kin = vec![0.0; np * np];
    for u in 0..np {
        for v in 0..np {
            let s = [0, 1, 2].map(|d| dot(&g[d][u], &g[d][v]));
            let t = [0, 1, 2].map(|d| dot(&g[d][u], &g2[d][v]));
            kin[u * np + v] = t[0] * s[1] * s[2] + s[0] * t[1] * s[2] + s[0] * s[1] * t[2];
        }
    }
    let h3 = grid.h_x().powi(3);
    reps.iter()
        .map(|&[a, b]| {
            let mut total = 0.0;
            for u in 0..np {
                for v in 0..np {
                    total += prims[u].k[a] * prims[v].k[b] * kin[u * np + v];
                }
            }
            -0.5 * total * h3
        })
        .collect()
}

/// `Σ_q Σ_s N_q(s)` times the displacement cell, all pairs at once.
fn nuclear(sys: &MolecularSystem, grid: &GridSpec, reps: &[[usize; 2]]) -> Vec<f64> {
    let ev = Evaluator::new(sys);
    let table = grid.phi_table();
    let nc = grid.n_theta - 1;
    let items = (grid.n_xi - 1) * nc;
    let m = sys.n_spatial();
    let sums = parallel_block_sum(items, ITEM_BLOCK, reps.len(), |range| {
        let mut out = vec![0.0; reps.len()];
        let mut buf = vec![0.0; m];
        for it in range {
            let (b, c) = (it / nc + 1, it % nc + 1);
            let xi = b as f64 * grid.h_xi();
            for d in 0..grid.n_phi {
                let (dir, st) = direction(grid, &table, c, d);
                for nuc in sys.nuclei() {
                    let p = [0, 1, 2].map(|k| nuc.position[k] + xi * dir[k]);
                    ev.values(p, &mut buf);
                    for (o, &[a, bb]) in out.iter_mut().zip(reps) {
                        *o += nuclear_term(nuc.charge as f64, xi * st, buf[a], buf[bb]);
                    }
                }
            }
        }
        out
    });
    let cell = grid.displacement_cell();
    sums.into_iter().map(|v| v * cell).collect()
}

fn anchor_key(p: [f64; 3]) -> [u64; 3] {
    p.map(f64::to_bits)
}

/// Raw integrals (no LCU prefactor) for the given representatives.
pub(crate) fn compute_representatives(
    sys: &MolecularSystem,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
    one: &[[usize; 2]],
    two: &[[usize; 4]],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut one_vals = vec![0.0; one.len()];
    let mut two_vals = vec![0.0; two.len()];
    let cartesian_only = grid.coordinates == Coordinates::Cartesian;
    if cartesian_only && !one.is_empty() {
        return Err(Error::Validation("one-body integrands need a polar grid".into()));
    }
    let boundary = cfg.regime_boundary.unwrap_or(grid.x_max);
    let mut polar: BTreeMap<[u64; 3], Vec<usize>> = BTreeMap::new();
    let mut cart: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, r) in two.iter().enumerate() {
        let dmin = cartesian_min_distance(sys, grid, r[0], r[2]);
        if cartesian_only && dmin == 0.0 {
            return Err(Error::Validation(format!(
                "Cartesian displacement cube of ({}{}|{}{}) contains the origin",
                r[0] + 1,
                r[1] + 1,
                r[2] + 1,
                r[3] + 1
            )));
        }
        if cartesian_only || dmin >= boundary {
            cart.entry((r[0], r[2])).or_default().push(i);
        } else {
            polar.entry(anchor_key(sys.anchor(r[0]))).or_default().push(i);
        }
    }
    let polar_grid = GridSpec {
        coordinates: Coordinates::Polar,
        ..*grid
    };
    for idx in polar.values() {
        let reps: Vec<[usize; 4]> = idx.iter().map(|&i| two[i]).collect();
        let vals = polar_two_body(sys, &polar_grid, sys.anchor(reps[0][0]), &reps);
        for (&i, v) in idx.iter().zip(vals) {
            two_vals[i] = v;
        }
    }
    let cart_grid = grid.to_cartesian();
    for (&(a, c), idx) in &cart {
        let reps: Vec<[usize; 4]> = idx.iter().map(|&i| two[i]).collect();
        let vals = cartesian_two_body(sys, &cart_grid, a, c, &reps);
        for (&i, v) in idx.iter().zip(vals) {
            two_vals[i] = v;
        }
    }
    if !one.is_empty() {
        let mut by_anchor: BTreeMap<[u64; 3], Vec<usize>> = BTreeMap::new();
        for (i, r) in one.iter().enumerate() {
            by_anchor.entry(anchor_key(sys.anchor(r[0]))).or_default().push(i);
        }
        for idx in by_anchor.values() {
            let reps: Vec<[usize; 2]> = idx.iter().map(|&i| one[i]).collect();
            for (&i, v) in idx.iter().zip(kinetic(sys, grid, sys.anchor(reps[0][0]), &reps)) {
                one_vals[i] = v;
            }
        }
        for (o, v) in one_vals.iter_mut().zip(nuclear(sys, grid, one)) {
            *o += v;
        }
    }
    Ok((one_vals, two_vals))
}

/// Spatial one- and two-electron integrals with full index symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialIntegrals {
    m: usize,
    one: Vec<f64>,
    two: Vec<f64>,
}

impl SpatialIntegrals {
    /// Expands canonical representatives over the 8-fold symmetry orbit.
    pub fn from_representatives(
        m: usize,
        one: &[[usize; 2]],
        one_vals: &[f64],
        two: &[[usize; 4]],
        two_vals: &[f64],
    ) -> Self {
        let mut out = Self {
            m,
            one: vec![0.0; m * m],
            two: vec![0.0; m.pow(4)],
        };
        for (&[a, b], &v) in one.iter().zip(one_vals) {
            out.one[a * m + b] = v;
            out.one[b * m + a] = v;
        }
        for (&[a, b, c, d], &v) in two.iter().zip(two_vals) {
            for (p, q, r, s) in [
                (a, b, c, d),
                (b, a, c, d),
                (a, b, d, c),
                (b, a, d, c),
                (c, d, a, b),
                (d, c, a, b),
                (c, d, b, a),
                (d, c, b, a),
            ] {
                let i = ((p * m + q) * m + r) * m + s;
                out.two[i] = v;
            }
        }
        out
    }

    pub fn n_spatial(&self) -> usize {
        self.m
    }

    /// `⟨a|h|b⟩`, 0-based.
    pub fn one_body(&self, a: usize, b: usize) -> f64 {
        self.one[a * self.m + b]
    }

    /// Chemist `(ab|cd)`, 0-based.
    pub fn two_body(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.two[((a * self.m + b) * self.m + c) * self.m + d]
    }

    pub fn value(&self, rep: Representative) -> f64 {
        match rep {
            Representative::One([a, b]) => self.one_body(a, b),
            Representative::Two([a, b, c, d]) => self.two_body(a, b, c, d),
        }
    }

    pub(crate) fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            m: self.m,
            one: self.one.iter().zip(&other.one).map(|(a, b)| f(*a, *b)).collect(),
            two: self.two.iter().zip(&other.two).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.one
            .iter()
            .zip(&other.one)
            .chain(self.two.iter().zip(&other.two))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Spin-orbital table: spin-orbital `j` is spatial `(j-1)/2` with spin `(j-1)%2`.
    pub fn to_table(&self) -> Result<IntegralTable> {
        let n = 2 * self.m;
        let mut t = IntegralTable::zeros(n)?;
        let split = |j: usize| ((j - 1) / 2, (j - 1) % 2);
        for i in 1..=n {
            for j in 1..=n {
                let ((pi, si), (pj, sj)) = (split(i), split(j));
                if si == sj {
                    t.set_h1(i, j, self.one_body(pi, pj))?;
                }
                for k in 1..=n {
                    for l in 1..=n {
                        let ((pk, sk), (pl, sl)) = (split(k), split(l));
                        if si == sl && sj == sk {
                            t.set_h2(i, j, k, l, self.two_body(pi, pl, pj, pk))?;
                        }
                    }
                }
            }
        }
        Ok(t)
    }
}

/// Riemann sums for every integral on `grid`.
pub fn riemann_integrals(sys: &MolecularSystem, grid: &GridSpec) -> Result<SpatialIntegrals> {
    riemann_integrals_with(sys, grid, &QuadratureConfig::default())
}

pub fn riemann_integrals_with(
    sys: &MolecularSystem,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<SpatialIntegrals> {
    if grid.coordinates != Coordinates::Polar {
        return Err(Error::Validation(
            "full integral sets need a polar grid; the Cartesian regime is chosen per integral".into(),
        ));
    }
    let (one, two) = canonical_representatives(sys.n_spatial());
    let (ov, tv) = compute_representatives(sys, grid, cfg, &one, &two)?;
    Ok(SpatialIntegrals::from_representatives(sys.n_spatial(), &one, &ov, &two, &tv))
}

/// `W_γ ≈ (𝒱/μ) Σ_ρ w_γ(z_ρ)`, computed by the separable kernels.
pub fn integrate_onthefly(sys: &MolecularSystem, grid: &GridSpec, gamma: &TermIndex) -> Result<f64> {
    integrate_onthefly_with(sys, grid, gamma, &QuadratureConfig::default())
}

pub fn integrate_onthefly_with(
    sys: &MolecularSystem,
    grid: &GridSpec,
    gamma: &TermIndex,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let Some(rep) = representative(sys, gamma)? else {
        return Ok(0.0);
    };
    let raw = match rep {
        Representative::One(r) => compute_representatives(sys, grid, cfg, &[r], &[])?.0[0],
        Representative::Two(r) => compute_representatives(sys, grid, cfg, &[], &[r])?.1[0],
    };
    Ok(rep.prefactor() * raw)
}
