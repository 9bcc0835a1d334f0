//! High-resolution integral tables by successive halving plus Richardson
//! extrapolation on the same Riemann machinery as the on-the-fly path.

use serde::Serialize;

use super::grid::GridSpec;
use super::quadrature::{
    canonical_representatives, riemann_integrals_with, QuadratureConfig, Representative,
    SpatialIntegrals,
};
use super::system::MolecularSystem;
use crate::error::{Error, Result};
use crate::tables::IntegralTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatabaseConfig {
    /// Target accuracy; refinement stops once successive extrapolations
    /// differ by less than `tolerance / 10` in every integral.
    pub tolerance: f64,
    /// Halvings allowed after the base grid.
    pub max_refinements: usize,
    /// Leading error order in `δx`.
    pub order: f64,
    /// Spacing between successive error orders.
    pub step: f64,
    /// Error orders removed, `order, order + step, ...`.
    pub depth: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for DatabaseConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_refinements: 3,
            order: 2.0,
            step: 2.0,
            depth: 2,
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Database {
    pub integrals: SpatialIntegrals,
    /// Grids evaluated, coarsest first.
    pub levels: Vec<GridSpec>,
    /// Largest change between the last two extrapolations.
    pub last_change: f64,
}

impl Database {
    pub fn table(&self) -> Result<IntegralTable> {
        self.integrals.to_table()
    }
}

/// Generalized Romberg estimate from raw levels, coarsest first.
pub fn richardson(
    levels: &[SpatialIntegrals],
    order: f64,
    step: f64,
    depth: usize,
) -> SpatialIntegrals {
    assert!(!levels.is_empty());
    let mut row: Vec<SpatialIntegrals> = levels.to_vec();
    for j in 0..depth.min(levels.len() - 1) {
        let factor = 2f64.powf(order + step * j as f64) - 1.0;
        row = row
            .windows(2)
            .map(|w| w[1].zip_with(&w[0], |fine, coarse| fine + (fine - coarse) / factor))
            .collect();
    }
    row.pop().unwrap()
}

/// Tables from `base` refined until stable.
pub fn integrate_database(sys: &MolecularSystem, base: &GridSpec) -> Result<Database> {
    integrate_database_with(sys, base, &DatabaseConfig::default())
}

pub fn integrate_database_with(
    sys: &MolecularSystem,
    base: &GridSpec,
    cfg: &DatabaseConfig,
) -> Result<Database> {
    if !(cfg.tolerance > 0.0) {
        return Err(Error::Config("database tolerance must be positive".into()));
    }
    let mut grids = vec![*base];
    let mut raw = vec![riemann_integrals_with(sys, base, &cfg.quadrature)?];
    let mut estimate = raw[0].clone();
    let (one, two) = canonical_representatives(sys.n_spatial());
    let reps: Vec<Representative> = one
        .into_iter()
        .map(Representative::One)
        .chain(two.into_iter().map(Representative::Two))
        .collect();
    let mut last = (0.0, 0.0, f64::INFINITY);
    for _ in 0..cfg.max_refinements {
        let grid = grids.last().unwrap().refined()?;
        raw.push(riemann_integrals_with(sys, &grid, &cfg.quadrature)?);
        grids.push(grid);
        let next = richardson(&raw, cfg.order, cfg.step, cfg.depth);
        let (worst, change) = reps
            .iter()
            .map(|&r| (r, (next.value(r) - estimate.value(r)).abs()))
            .fold((reps[0], -1.0), |a, b| if b.1 > a.1 { b } else { a });
        last = (next.value(worst), estimate.value(worst), change);
        estimate = next;
        if change < cfg.tolerance / 10.0 {
            return Ok(Database {
                integrals: estimate,
                levels: grids,
                last_change: change,
            });
        }
    }
    Err(Error::Convergence {
        refinements: cfg.max_refinements,
        last: last.0,
        previous: last.1,
    })
}
