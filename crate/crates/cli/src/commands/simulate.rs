//! `simulate`: one evolution of a seeded random state.

use serde_json::{json, Value};

use lcusim::oracle::{dense_from_second_quantized, ORACLE_QUBIT_LIMIT};
use lcusim::taylor::{estimate_cost, evolve_with, plan_segments};
use lcusim::{Error, Result};

use super::{compare_exact, oracle_operator, prepare, random_state, read_table, Prepared};
use crate::args::{RunArgs, SimulateArgs};
use crate::report::{value, Report, Validation};

/// Acceptance factor on ε for the final-state error and norm drift.
pub const ERROR_FACTOR: f64 = 10.0;

pub fn run(args: &SimulateArgs) -> Result<Report> {
    let run = &args.run;
    let prepared = prepare(run, run.epsilon)?;
    let (results, validations) = evolve_and_check(run, &prepared, args)?;
    let config = json!({
        "time": run.time,
        "epsilon": run.epsilon,
        "algorithm": value(&run.algorithm),
        "mode": value(&run.mode),
        "seed": run.seed,
        "max_segments": run.max_segments,
        "plan_only": args.plan_only,
        "reference_table": args.reference_table.as_ref().map(|p| p.display().to_string()),
        "hamiltonian": prepared.config,
    });
    Ok(Report::new("simulate", config, results, validations))
}

/// Refuses plans beyond the segment budget before any work is done.
pub fn check_segments(run: &RunArgs, prepared: &Prepared, epsilon: f64) -> Result<()> {
    if run.time == 0.0 {
        return Ok(());
    }
    let plan = plan_segments(prepared.ham.lambda_norm(), run.time, epsilon)?;
    if plan.r > run.max_segments {
        return Err(Error::SizeGuard(format!(
            "{} segments exceed --max-segments {} (λ = {:.6e})",
            plan.r,
            run.max_segments,
            prepared.ham.lambda_norm()
        )));
    }
    Ok(())
}

fn evolve_and_check(run: &RunArgs, prepared: &Prepared, args: &SimulateArgs) -> Result<(Value, Vec<Validation>)> {
    let ham = &prepared.ham;
    let plan = if run.time == 0.0 {
        None
    } else {
        Some(plan_segments(ham.lambda_norm(), run.time, run.epsilon)?)
    };
    let mut results = json!({
        "hamiltonian": {
            "n_qubits": ham.n_qubits(),
            "terms": ham.len(),
            "lambda_norm": ham.lambda_norm(),
        },
        "nuclear_repulsion": prepared.nuclear_repulsion,
        "build": prepared.results,
        "plan": value(&plan),
    });
    let tolerance = ERROR_FACTOR * run.epsilon;
    let mut validations = Vec::new();

    if args.plan_only {
        results["cost"] = value(&estimate_cost(ham, run.time, run.epsilon, prepared.model)?);
        return Ok((results, validations));
    }
    check_segments(run, prepared, run.epsilon)?;
    let psi = random_state(run.seed, ham.n_qubits())?;
    let (out, cost) = evolve_with(ham, run.time, run.epsilon, &psi, run.mode.into(), prepared.model)?;
    validations.push(Validation::at_most("norm_drift", cost.norm_drift, tolerance));
    results["cost"] = value(&cost);

    match oracle_operator(prepared)? {
        Some(h) => {
            let (error, fidelity) = compare_exact(&h, run.time, &psi, &out)?;
            results["oracle"] = json!({ "error": error, "fidelity": fidelity, "tolerance": tolerance });
            validations.push(Validation::at_most("oracle_error", error, tolerance));
        }
        None => {
            results["oracle"] = Value::Null;
            validations.push(Validation::new(
                "oracle_error",
                true,
                format!("skipped: {} qubits exceed the {ORACLE_QUBIT_LIMIT}-qubit oracle", ham.n_qubits()),
            ));
        }
    }
    if let Some(path) = &args.reference_table {
        let reference = read_table(path)?;
        if reference.n_orbitals() != ham.n_qubits() {
            return Err(Error::Dimension {
                expected: ham.n_qubits(),
                found: reference.n_orbitals(),
            });
        }
        let h = dense_from_second_quantized(&reference)?;
        let (error, fidelity) = compare_exact(&h, run.time, &psi, &out)?;
        results["reference"] = json!({ "error": error, "fidelity": fidelity });
    }
    Ok((results, validations))
}
