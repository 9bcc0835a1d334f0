//! Orbital-relative Riemann grids.
//!
//! A point is `z = (x, s)`: `x` is a lower-corner point of a cube of half-width
//! `x_max` around an orbital anchor, and `s` is either a polar displacement
//! `(ξ, θ, φ)` with `ξ ∈ [0, x_max)` or, in the Cartesian regime, a
//! lower-corner point of a displacement cube.

use std::f64::consts::PI;

use serde::Serialize;

use super::system::{MolecularSystem, OrbitalBounds};
use crate::error::{Error, Result};

/// Largest per-axis count a grid may request.
pub const MAX_AXIS_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinates {
    Polar,
    Cartesian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub delta_x: f64,
    pub n_x: usize,
    pub n_xi: usize,
    pub n_theta: usize,
    /// Always a multiple of 4 so that `sin φ` reuses the `cos φ` table.
    pub n_phi: usize,
    pub coordinates: Coordinates,
}

/// Decoded grid index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub x: [usize; 3],
    /// `(ξ, θ, φ)` indices, or displacement-cube indices when Cartesian.
    pub s: [usize; 3],
}

impl GridSpec {
    pub fn polar(x_max: f64, delta_x: f64) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite() && delta_x > 0.0 && delta_x.is_finite()) {
            return Err(Error::Config(format!(
                "grid needs x_max > 0 and delta_x > 0, got {x_max} and {delta_x}"
            )));
        }
        let ratio = x_max / delta_x;
        let n_x = ((2.0 * ratio).round() as usize).max(1);
        let n_xi = (ratio.round() as usize).max(1);
        let n_theta = ((PI * ratio).ceil() as usize).max(1);
        let n_phi = ((2.0 * PI * ratio).ceil() as usize).max(4).div_ceil(4) * 4;
        let g = Self {
            x_max,
            delta_x,
            n_x,
            n_xi,
            n_theta,
            n_phi,
            coordinates: Coordinates::Polar,
        };
        g.check_size()?;
        Ok(g)
    }

    pub fn cartesian(x_max: f64, delta_x: f64) -> Result<Self> {
        Ok(Self::polar(x_max, delta_x)?.to_cartesian())
    }

    fn check_size(&self) -> Result<()> {
        if [self.n_x, self.n_xi, self.n_theta, self.n_phi]
            .iter()
            .any(|&n| n > MAX_AXIS_POINTS)
        {
            return Err(Error::SizeGuard(format!(
                "grid x_max/delta_x = {} needs more than {MAX_AXIS_POINTS} points per axis",
                self.x_max / self.delta_x
            )));
        }
        Ok(())
    }

    /// Same spacings, Cartesian displacement cube.
    pub fn to_cartesian(&self) -> Self {
        Self {
            coordinates: Coordinates::Cartesian,
            ..*self
        }
    }

    /// Halves `delta_x` and doubles every count.
    pub fn refined(&self) -> Result<Self> {
        let g = Self {
            delta_x: self.delta_x / 2.0,
            n_x: 2 * self.n_x,
            n_xi: 2 * self.n_xi,
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
            ..*self
        };
        g.check_size()?;
        Ok(g)
    }

    pub fn h_x(&self) -> f64 {
        2.0 * self.x_max / self.n_x as f64
    }

    pub fn h_xi(&self) -> f64 {
        self.x_max / self.n_xi as f64
    }

    pub fn h_theta(&self) -> f64 {
        PI / self.n_theta as f64
    }

    pub fn h_phi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Points in the displacement coordinates.
    pub fn n_displacements(&self) -> u64 {
        match self.coordinates {
            Coordinates::Polar => (self.n_xi * self.n_theta * self.n_phi) as u64,
            Coordinates::Cartesian => (self.n_x as u64).pow(3),
        }
    }

    /// `μ`.
    pub fn mu(&self) -> u64 {
        (self.n_x as u64).pow(3) * self.n_displacements()
    }

    /// Volume of the `x` cube.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.x_max).powi(3)
    }

    /// Coordinate volume of the displacement domain, `x_max · π · 2π` when polar.
    pub fn displacement_volume(&self) -> f64 {
        match self.coordinates {
            Coordinates::Polar => self.x_max * PI * 2.0 * PI,
            Coordinates::Cartesian => self.box_volume(),
        }
    }

    /// `𝒱`.
    pub fn volume(&self) -> f64 {
        self.box_volume() * self.displacement_volume()
    }

    /// `𝒱/μ`, formed from the step sizes.
    pub fn cell_volume(&self) -> f64 {
        self.h_x().powi(3) * self.displacement_cell()
    }

    pub(crate) fn displacement_cell(&self) -> f64 {
        match self.coordinates {
            Coordinates::Polar => self.h_xi() * self.h_theta() * self.h_phi(),
            Coordinates::Cartesian => self.h_x().powi(3),
        }
    }

    /// Splits `ρ` as `((x0·n + x1)·n + x2)·n_s + s`, `s` row-major.
    pub fn decode(&self, rho: u64) -> Result<GridPoint> {
        let mu = self.mu();
        if rho >= mu {
            return Err(Error::IndexOutOfRange {
                what: "grid point",
                index: rho as usize,
                max: mu.saturating_sub(1) as usize,
            });
        }
        let ns = self.n_displacements();
        let (mut xi, mut si) = (rho / ns, rho % ns);
        let dims = match self.coordinates {
            Coordinates::Polar => [self.n_xi, self.n_theta, self.n_phi],
            Coordinates::Cartesian => [self.n_x; 3],
        };
        let mut s = [0usize; 3];
        for d in (0..3).rev() {
            s[d] = (si % dims[d] as u64) as usize;
            si /= dims[d] as u64;
        }
        let mut x = [0usize; 3];
        for d in (0..3).rev() {
            x[d] = (xi % self.n_x as u64) as usize;
            xi /= self.n_x as u64;
        }
        Ok(GridPoint { x, s })
    }

    /// Lower-corner offset of cube index `a` from the cube center.
    pub fn cube_offset(&self, a: usize) -> f64 {
        -self.x_max + a as f64 * self.h_x()
    }

    pub(crate) fn phi_table(&self) -> PhiTable {
        PhiTable::new(self.n_phi)
    }
}

/// `cos(2πk/n)` for `k <= n/2`, shared by every `cos φ` and `sin φ` lookup so
/// that pointwise and tabulated evaluations agree bitwise.
#[derive(Debug, Clone)]
pub(crate) struct PhiTable {
    n: usize,
    pub cos: Vec<f64>,
}

impl PhiTable {
    pub fn new(n: usize) -> Self {
        debug_assert!(n % 4 == 0);
        let cos = (0..=n / 2)
            .map(|k| (2.0 * PI * k as f64 / n as f64).cos())
            .collect();
        Self { n, cos }
    }

    #[inline]
    pub fn cos_index(&self, d: usize) -> usize {
        d.min(self.n - d)
    }

    /// `sin φ_d = cos(φ_d - π/2)`.
    #[inline]
    pub fn sin_index(&self, d: usize) -> usize {
        self.cos_index((d + 3 * self.n / 4) % self.n)
    }
}

/// Polar direction `(sinθ cosφ, sinθ sinφ, cosθ)` and `sinθ` at indices `(c, d)`.
pub(crate) fn direction(grid: &GridSpec, table: &PhiTable, c: usize, d: usize) -> ([f64; 3], f64) {
    let theta = c as f64 * grid.h_theta();
    let (st, ct) = theta.sin_cos();
    (
        [
            st * table.cos[table.cos_index(d)],
            st * table.cos[table.sin_index(d)],
            ct,
        ],
        st,
    )
}

/// Constants of the grid-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRule {
    /// `x_max = c1 · ln(N t / ε)`.
    pub c1: f64,
    /// Multiplies the error-bound spacing.
    pub c2: f64,
    /// Spacings below this are refused.
    pub min_delta_x: f64,
}

impl Default for GridRule {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            min_delta_x: 1e-2,
        }
    }
}

/// `(φ'_max + φ_max/x_max) · φ_max³ · x_max⁵ · δx`, the per-integral
/// discretization error scale.
pub fn predicted_error(bounds: OrbitalBounds, x_max: f64, delta_x: f64) -> f64 {
    (bounds.grad_max + bounds.phi_max / x_max) * bounds.phi_max.powi(3) * x_max.powi(5) * delta_x
}

/// Grid whose per-integral error is `O(ε/(N⁴ t))`.
pub fn choose_grid(sys: &MolecularSystem, t: f64, epsilon: f64, n: usize) -> Result<GridSpec> {
    choose_grid_with(sys, t, epsilon, n, &GridRule::default())
}

pub fn choose_grid_with(
    sys: &MolecularSystem,
    t: f64,
    epsilon: f64,
    n: usize,
    rule: &GridRule,
) -> Result<GridSpec> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("time must be positive, got {t}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::Config("orbital count must be positive".into()));
    }
    let nf = n as f64;
    let x_max = rule.c1 * (nf * t / epsilon).ln();
    if !(x_max > 0.0) {
        return Err(Error::Config(format!(
            "N t / ε = {} gives a non-positive box half-width",
            nf * t / epsilon
        )));
    }
    let delta_x = rule.c2 * epsilon / (nf.powi(4) * t) / predicted_error(sys.orbital_bounds(), x_max, 1.0);
    if !(delta_x >= rule.min_delta_x) {
        return Err(Error::Config(format!(
            "required spacing {delta_x:e} bohr is below the {} bohr floor; use a larger epsilon \
             or an explicit --delta-x",
            rule.min_delta_x
        )));
    }
    GridSpec::polar(x_max, delta_x)
}
