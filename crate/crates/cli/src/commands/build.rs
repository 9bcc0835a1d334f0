//! `build`: geometry in, spin-orbital integral table out.

use serde_json::json;

use lcusim::integrals::MolecularSystem;
use lcusim::Result;

use super::{database, database_defaults, database_summary, read_file, resolve_database, write_file};
use crate::args::BuildArgs;
use crate::report::{value, Report, Validation};
use lcusim::tables::HERMITIAN_TOL;

pub fn run(args: &BuildArgs) -> Result<Report> {
    let sys = MolecularSystem::parse(&read_file(&args.geometry)?, args.orthogonalization.into())?;
    let cfg = resolve_database(&args.db, database_defaults());
    let (base, db) = database(&sys, &args.grid, &cfg)?;
    let table = db.table()?;
    write_file(&args.output, &table.to_text())?;

    let (db_config, db_results) = database_summary(&base, &cfg, &db);
    let config = json!({
        "geometry": args.geometry.display().to_string(),
        "output": args.output.display().to_string(),
        "orthogonalization": value(&args.orthogonalization),
        "database": db_config,
    });
    let results = json!({
        "n_spin_orbitals": table.n_orbitals(),
        "nuclear_repulsion": sys.nuclear_repulsion(),
        "database": db_results,
    });
    let validations = vec![Validation::at_most("h1_hermitian", table.hermiticity_defect(), HERMITIAN_TOL)];
    Ok(Report::new("build", config, results, validations))
}
