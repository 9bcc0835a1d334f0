//! Nuclei plus an orthonormalized spatial basis; spin-orbitals come in pairs.
//!
//! Geometry text format (bohr, `#` starts a comment):
//!
//! ```text
//! atom 1 0.0 0.0 0.0
//! atom 1 0.0 0.0 1.4011
//! orbital 1 0 0 0 3
//! 3.42525091 0.15432897
//! 0.62391373 0.53532814
//! 0.16885540 0.44463454
//! ```
//! `orbital <atom> <l> <m> <n> <count>` is followed by `count` lines of
//! `<exponent> <coefficient>`; atoms are numbered from 1.

use std::path::Path;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::basis::{primitive_norm, ContractedGaussian, Primitive};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nucleus {
    pub charge: u32,
    pub position: [f64; 3],
}

/// How contracted Gaussians become orthonormal spatial orbitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orthogonalization {
    /// `C = S^{-1/2}`; orbital `p` stays closest to basis function `p`.
    #[default]
    Lowdin,
    /// Basis functions used as-is.
    None,
}

/// Sampled magnitudes entering the discretization error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitalBounds {
    pub phi_max: f64,
    pub grad_max: f64,
}

/// Half-width and spacing of the local sampling grid for [`OrbitalBounds`].
const BOUND_HALF_WIDTH: f64 = 4.0;
const BOUND_SPACING: f64 = 0.1;

/// Overlap eigenvalues at or below this mark a linearly dependent basis.
const SMALLEST_OVERLAP_EIGENVALUE: f64 = 1e-10;

/// One unit-normalized primitive with its weight in every spatial orbital.
#[derive(Debug, Clone)]
pub(crate) struct FlatPrimitive {
    pub center: [f64; 3],
    pub powers: [u32; 3],
    pub exponent: f64,
    /// `k[p]`: coefficient of this primitive in spatial orbital `p`.
    pub k: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MolecularSystem {
    nuclei: Vec<Nucleus>,
    basis: Vec<ContractedGaussian>,
    orthogonalization: Orthogonalization,
    /// Column `p` holds spatial orbital `p` in the basis.
    coefficients: DMatrix<f64>,
    primitives: Vec<FlatPrimitive>,
    bounds: OnceLock<OrbitalBounds>,
}

impl MolecularSystem {
    pub fn new(
        nuclei: Vec<Nucleus>,
        basis: Vec<ContractedGaussian>,
        orthogonalization: Orthogonalization,
    ) -> Result<Self> {
        if nuclei.is_empty() {
            return Err(Error::Validation("molecule has no atoms".into()));
        }
        if basis.is_empty() {
            return Err(Error::Validation("molecule has no orbitals".into()));
        }
        if basis.len() > 15 {
            return Err(Error::SizeGuard(format!(
                "{} spatial orbitals exceed the 15-orbital limit",
                basis.len()
            )));
        }
        for n in &nuclei {
            if n.charge == 0 || n.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(
                    "nuclei need a positive charge and finite position".into(),
                ));
            }
        }
        let m = basis.len();
        let coefficients = match orthogonalization {
            Orthogonalization::None => DMatrix::identity(m, m),
            Orthogonalization::Lowdin => {
                let s = DMatrix::from_fn(m, m, |i, j| basis[i].overlap(&basis[j]));
                let eig = SymmetricEigen::new(s);
                let smallest = eig.eigenvalues.min();
                if !(smallest > SMALLEST_OVERLAP_EIGENVALUE) {
                    return Err(Error::Validation(format!(
                        "basis is linearly dependent (overlap eigenvalue {smallest:e})"
                    )));
                }
                let inv_sqrt = eig.eigenvalues.map(|v| 1.0 / v.sqrt());
                let v = &eig.eigenvectors;
                v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose()
            }
        };
        let mut primitives = Vec::new();
        for (mu, g) in basis.iter().enumerate() {
            for p in g.primitives() {
                let scale = p.coefficient * primitive_norm(p.exponent, g.powers());
                primitives.push(FlatPrimitive {
                    center: g.center(),
                    powers: g.powers(),
                    exponent: p.exponent,
                    k: (0..m).map(|o| coefficients[(mu, o)] * scale).collect(),
                });
            }
        }
        Ok(Self {
            nuclei,
            basis,
            orthogonalization,
            coefficients,
            primitives,
            bounds: OnceLock::new(),
        })
    }

    pub fn parse(text: &str, orthogonalization: Orthogonalization) -> Result<Self> {
        let mut nuclei: Vec<Nucleus> = Vec::new();
        let mut basis = Vec::new();
        // (line, atom, powers, remaining, primitives)
        let mut open: Option<(usize, usize, [u32; 3], usize, Vec<Primitive>)> = None;
        let mut last_line = 0;
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr(format!("invalid number `{s}`")))
            };
            let int = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| perr(format!("invalid integer `{s}`")))
            };
            if let Some((_, _, _, remaining, prims)) = open.as_mut() {
                if fields.len() != 2 {
                    return Err(perr(format!(
                        "expected `<exponent> <coefficient>`, {remaining} primitive line(s) still due"
                    )));
                }
                prims.push(Primitive {
                    exponent: num(fields[0])?,
                    coefficient: num(fields[1])?,
                });
                *remaining -= 1;
                if *remaining == 0 {
                    let (oline, atom, powers, _, prims) = open.take().unwrap();
                    let center = nuclei[atom - 1].position;
                    let g = ContractedGaussian::new(center, powers, prims).map_err(|e| {
                        Error::Parse {
                            line: oline,
                            message: e.to_string(),
                        }
                    })?;
                    basis.push(g);
                }
                continue;
            }
            match fields[0] {
                "atom" => {
                    if fields.len() != 5 {
                        return Err(perr("expected `atom <Z> <x> <y> <z>`".into()));
                    }
                    let charge = int(fields[1])?;
                    if charge == 0 || charge > 118 {
                        return Err(perr(format!("invalid nuclear charge {charge}")));
                    }
                    nuclei.push(Nucleus {
                        charge: charge as u32,
                        position: [num(fields[2])?, num(fields[3])?, num(fields[4])?],
                    });
                }
                "orbital" => {
                    if fields.len() != 6 {
                        return Err(perr(
                            "expected `orbital <atom> <l> <m> <n> <n_prim>`".into(),
                        ));
                    }
                    let atom = int(fields[1])?;
                    if atom == 0 || atom > nuclei.len() {
                        return Err(perr(format!(
                            "orbital refers to atom {atom}, but {} atom(s) are defined",
                            nuclei.len()
                        )));
                    }
                    let mut powers = [0u32; 3];
                    for d in 0..3 {
                        powers[d] = int(fields[2 + d])? as u32;
                    }
                    if powers.iter().sum::<u32>() > 1 {
                        return Err(perr(format!(
                            "only s and p shells are supported, got {powers:?}"
                        )));
                    }
                    let count = int(fields[5])?;
                    if count == 0 {
                        return Err(perr("orbital needs at least one primitive".into()));
                    }
                    open = Some((line, atom, powers, count, Vec::new()));
                }
                other => return Err(perr(format!("unknown record `{other}`"))),
            }
        }
        if let Some((_, _, _, remaining, _)) = open {
            return Err(Error::Parse {
                line: last_line,
                message: format!("input ended with {remaining} primitive line(s) missing"),
            });
        }
        if nuclei.is_empty() || basis.is_empty() {
            return Err(Error::Parse {
                line: last_line,
                message: "molecule needs at least one atom and one orbital".into(),
            });
        }
        Self::new(nuclei, basis, orthogonalization)
    }

    pub fn read(path: &Path, orthogonalization: Orthogonalization) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, orthogonalization)
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn basis(&self) -> &[ContractedGaussian] {
        &self.basis
    }

    pub fn orthogonalization(&self) -> Orthogonalization {
        self.orthogonalization
    }

    pub fn n_spatial(&self) -> usize {
        self.basis.len()
    }

    /// `N`, always even.
    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.basis.len()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub(crate) fn flat_primitives(&self) -> &[FlatPrimitive] {
        &self.primitives
    }

    /// Grid anchor of spatial orbital `p` (0-based): its basis function's center.
    pub fn anchor(&self, p: usize) -> [f64; 3] {
        self.basis[p].center()
    }

    pub fn spatial_value(&self, p: usize, z: [f64; 3]) -> f64 {
        self.combine(p, |g| g.value(z))
    }

    pub fn spatial_laplacian(&self, p: usize, z: [f64; 3]) -> f64 {
        self.combine(p, |g| g.laplacian(z))
    }

    pub fn spatial_gradient(&self, p: usize, z: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (mu, g) in self.basis.iter().enumerate() {
            let c = self.coefficients[(mu, p)];
            if c != 0.0 {
                let v = g.gradient(z);
                for d in 0..3 {
                    out[d] += c * v[d];
                }
            }
        }
        out
    }

    fn combine(&self, p: usize, f: impl Fn(&ContractedGaussian) -> f64) -> f64 {
        self.basis
            .iter()
            .enumerate()
            .filter(|(mu, _)| self.coefficients[(*mu, p)] != 0.0)
            .map(|(mu, g)| self.coefficients[(mu, p)] * f(g))
            .sum()
    }

    /// `Σ_{p<q} Z_p Z_q / |R_p - R_q|`.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.nuclei.iter().enumerate() {
            for b in &self.nuclei[i + 1..] {
                let r = (0..3)
                    .map(|d| (a.position[d] - b.position[d]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                e += (a.charge * b.charge) as f64 / r;
            }
        }
        e
    }

    /// Rigid translation; orthogonalization is recomputed and unchanged.
    pub fn translated(&self, shift: [f64; 3]) -> Result<Self> {
        let nuclei = self
            .nuclei
            .iter()
            .map(|n| Nucleus {
                charge: n.charge,
                position: [0, 1, 2].map(|d| n.position[d] + shift[d]),
            })
            .collect();
        let basis = self.basis.iter().map(|g| g.translated(shift)).collect();
        Self::new(nuclei, basis, self.orthogonalization)
    }

    /// `φ_max` and `φ'_max` sampled on a local grid around every anchor.
    pub fn orbital_bounds(&self) -> OrbitalBounds {
        *self.bounds.get_or_init(|| {
            let steps = (BOUND_HALF_WIDTH / BOUND_SPACING).round() as i64;
            let mut phi_max = 0.0f64;
            let mut grad_max = 0.0f64;
            for p in 0..self.n_spatial() {
                let c = self.anchor(p);
                for i in -steps..=steps {
                    for j in -steps..=steps {
                        for k in -steps..=steps {
                            let z = [
                                c[0] + i as f64 * BOUND_SPACING,
                                c[1] + j as f64 * BOUND_SPACING,
                                c[2] + k as f64 * BOUND_SPACING,
                            ];
                            phi_max = phi_max.max(self.spatial_value(p, z).abs());
                            let g = self.spatial_gradient(p, z);
                            grad_max = grad_max
                                .max((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
                        }
                    }
                }
            }
            OrbitalBounds { phi_max, grad_max }
        })
    }

    /// 0-based spatial orbital and spin of spin-orbital `j` (1-based).
    pub fn spin_orbital(&self, j: usize) -> Result<(usize, usize)> {
        let n = self.n_spin_orbitals();
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange {
                what: "spin-orbital",
                index: j,
                max: n,
            });
        }
        Ok(((j - 1) / 2, (j - 1) % 2))
    }
}

/// `φ_j(z)` for spin-orbital `j` in `1..=N`.
pub fn eval_orbital(sys: &MolecularSystem, j: usize, z: [f64; 3]) -> Result<f64> {
    let (p, _) = sys.spin_orbital(j)?;
    Ok(sys.spatial_value(p, z))
}

/// `∇²φ_j(z)`.
pub fn eval_laplacian(sys: &MolecularSystem, j: usize, z: [f64; 3]) -> Result<f64> {
    let (p, _) = sys.spin_orbital(j)?;
    Ok(sys.spatial_laplacian(p, z))
}

/// `∇φ_j(z)`.
pub fn eval_gradient(sys: &MolecularSystem, j: usize, z: [f64; 3]) -> Result<[f64; 3]> {
    let (p, _) = sys.spin_orbital(j)?;
    Ok(sys.spatial_gradient(p, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H2: &str = "\
# H2, STO-3G
atom 1 0 0 0
atom 1 0 0 1.4011
orbital 1 0 0 0 3
3.42525091 0.15432897
0.62391373 0.53532814
0.16885540 0.44463454
orbital 2 0 0 0 3
3.42525091 0.15432897
0.62391373 0.53532814
0.16885540 0.44463454
";

    #[test]
    fn parses_h2_and_orthonormalizes() {
        let sys = MolecularSystem::parse(H2, Orthogonalization::Lowdin).unwrap();
        assert_eq!(sys.n_spin_orbitals(), 4);
        assert!((sys.nuclear_repulsion() - 1.0 / 1.4011).abs() < 1e-15);
        let c = sys.coefficients();
        let s = DMatrix::from_fn(2, 2, |i, j| sys.basis()[i].overlap(&sys.basis()[j]));
        let ortho = c.transpose() * s * c;
        assert!((ortho - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert_eq!(sys.spin_orbital(3).unwrap(), (1, 0));
        assert!(eval_orbital(&sys, 5, [0.0; 3]).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = MolecularSystem::parse("atom 1 0 0 0\norbital 2 0 0 0 1\n1 1\n", Orthogonalization::None)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = MolecularSystem::parse("atom 1 0 0\n", Orthogonalization::None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = MolecularSystem::parse("atom 1 0 0 0\norbital 1 0 0 0 2\n1 1\n", Orthogonalization::None)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(MolecularSystem::parse("# nothing\n", Orthogonalization::None).is_err());
    }

    #[test]
    fn bounds_are_positive_and_cached() {
        let sys = MolecularSystem::parse(H2, Orthogonalization::Lowdin).unwrap();
        let b = sys.orbital_bounds();
        assert!(b.phi_max > 0.3 && b.phi_max < 1.0, "{b:?}");
        assert!(b.grad_max > 0.0);
        assert_eq!(sys.orbital_bounds(), b);
    }
}
