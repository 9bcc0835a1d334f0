//! Molecular integrals from orbital-relative Riemann sums.
//!
//! - [`system`]: geometry input, orthonormal spatial orbitals, evaluation.
//! - [`grid`]: grid layout, error bound and grid selection.
//! - [`quadrature`]: pointwise samples and fast separable sums.
//! - [`database`]: refine-until-stable extrapolated tables.
//! - [`sign`]: `±ζ` decomposition and the discretized Hamiltonian.

pub mod basis;
pub mod database;
pub mod grid;
pub mod quadrature;
pub mod sign;
pub mod system;

pub use basis::{ContractedGaussian, Primitive};
pub use database::{integrate_database, integrate_database_with, Database, DatabaseConfig};
pub use grid::{choose_grid, choose_grid_with, predicted_error, Coordinates, GridPoint, GridRule, GridSpec};
pub use quadrature::{
    canonical_representatives, integrate_onthefly, integrate_onthefly_with, representative,
    riemann_integrals, riemann_integrals_with, sample_w, QuadratureConfig, Representative,
    SpatialIntegrals,
};
pub use sign::{
    build_discretized_lcu, decompose_sign, max_abs_sample, sign_sums, zeta_for, SignDecomposition,
    SignSums,
};
pub use system::{
    eval_gradient, eval_laplacian, eval_orbital, MolecularSystem, Nucleus, OrbitalBounds,
    Orthogonalization,
};
