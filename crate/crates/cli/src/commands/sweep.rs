//! `sweep`: cost and error rows over ε, or integral error rows over δx.

use std::fmt::Write as _;

use serde_json::{json, Value};

use lcusim::integrals::{
    canonical_representatives, riemann_integrals, DatabaseConfig, GridSpec, Representative,
};
use lcusim::taylor::evolve_with;
use lcusim::{Error, Result};

use super::{
    compare_exact, database, database_summary, oracle_operator, prepare, random_state, read_system,
    resolve_database, write_file, Prepared,
};
use crate::args::{Algorithm, GridArgs, SweepArgs};
use crate::commands::simulate::{check_segments, ERROR_FACTOR};
use crate::report::{value, Report, Validation};

/// Box half-width of a δx sweep when none is given.
pub const SWEEP_X_MAX: f64 = 1.0;

/// Accepted range of the fitted log-log slope of integral error against δx.
pub const SLOPE_RANGE: (f64, f64) = (0.8, 1.3);

/// Reference settings for δx sweeps. A small box truncates the orbitals, so
/// every order of `δx` is present in the error.
pub fn sweep_database_defaults() -> DatabaseConfig {
    DatabaseConfig {
        max_refinements: 3,
        order: 1.0,
        step: 1.0,
        depth: 3,
        ..DatabaseConfig::default()
    }
}

pub fn run(args: &SweepArgs) -> Result<Report> {
    if args.epsilons.is_empty() {
        delta_x_sweep(args)
    } else {
        epsilon_sweep(args)
    }
}

fn epsilon_sweep(args: &SweepArgs) -> Result<Report> {
    let run = &args.run;
    let once = match run.algorithm {
        Algorithm::Database => Some(prepare(run, run.epsilon)?),
        Algorithm::Onthefly => None,
    };
    let mut rows = Vec::new();
    let mut builds = Vec::new();
    let mut hamiltonian_config = once.as_ref().map(|p| p.config.clone());
    for &eps in &args.epsilons {
        let fresh;
        let prepared: &Prepared = match &once {
            Some(p) => p,
            None => {
                fresh = prepare(run, eps)?;
                builds.push(json!({ "epsilon": eps, "build": fresh.results }));
                hamiltonian_config.get_or_insert_with(|| fresh.config.clone());
                &fresh
            }
        };
        check_segments(run, prepared, eps)?;
        let psi = random_state(run.seed, prepared.ham.n_qubits())?;
        let (out, cost) = evolve_with(&prepared.ham, run.time, eps, &psi, run.mode.into(), prepared.model)?;
        let error = match oracle_operator(prepared)? {
            Some(h) => Some(compare_exact(&h, run.time, &psi, &out)?.0),
            None => None,
        };
        rows.push(json!({
            "epsilon": eps,
            "segments": cost.segments,
            "order": cost.order,
            "select_h_queries": cost.select_h_queries,
            "lambda_norm": cost.lambda_norm,
            "error": error,
        }));
    }

    let mut validations = vec![Validation::new(
        "row_count",
        rows.len() == args.epsilons.len(),
        format!("{} rows for {} values", rows.len(), args.epsilons.len()),
    )];
    let mut by_eps: Vec<(f64, u64)> = rows
        .iter()
        .map(|r| (r["epsilon"].as_f64().unwrap(), r["order"].as_u64().unwrap()))
        .collect();
    by_eps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = by_eps.windows(2).all(|w| w[1].1 >= w[0].1);
    validations.push(Validation::new(
        "order_nondecreasing",
        monotone,
        format!("K by decreasing ε: {:?}", by_eps.iter().map(|r| r.1).collect::<Vec<_>>()),
    ));
    let worst = rows
        .iter()
        .filter_map(|r| Some(r["error"].as_f64()? / (ERROR_FACTOR * r["epsilon"].as_f64()?)))
        .fold(0.0, f64::max);
    validations.push(Validation::at_most("error_over_bound", worst, 1.0));

    if let Some(path) = &args.output {
        let mut text = String::from("# epsilon segments order select_h_queries error\n");
        for r in &rows {
            let err = r["error"].as_f64().map_or("nan".into(), |e| format!("{e:.6e}"));
            writeln!(
                text,
                "{:.6e} {} {} {} {err}",
                r["epsilon"].as_f64().unwrap(),
                r["segments"],
                r["order"],
                r["select_h_queries"]
            )
            .unwrap();
        }
        write_file(path, &text)?;
    }

    let config = json!({
        "kind": "epsilon",
        "epsilons": args.epsilons,
        "time": run.time,
        "algorithm": value(&run.algorithm),
        "mode": value(&run.mode),
        "seed": run.seed,
        "max_segments": run.max_segments,
        "hamiltonian": hamiltonian_config,
        "output": args.output.as_ref().map(|p| p.display().to_string()),
    });
    let results = json!({
        "rows": rows,
        "build": once.as_ref().map_or(Value::Array(builds), |p| p.results.clone()),
    });
    Ok(Report::new("sweep", config, results, validations))
}

pub fn label(rep: Representative) -> String {
    match rep {
        Representative::One([a, b]) => format!("h({},{})", a + 1, b + 1),
        Representative::Two([a, b, c, d]) => format!("({}{}|{}{})", a + 1, b + 1, c + 1, d + 1),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn delta_x_sweep(args: &SweepArgs) -> Result<Report> {
    let run = &args.run;
    let Some(path) = &run.input.geometry else {
        return Err(Error::Config("a spacing sweep needs a geometry input".into()));
    };
    let sys = read_system(path, &run.input)?;
    let x_max = run.grid.x_max.unwrap_or(SWEEP_X_MAX);
    let coarsest = args.delta_xs.iter().cloned().fold(f64::NAN, f64::max);
    let base = GridArgs {
        x_max: Some(x_max),
        delta_x: Some(run.grid.delta_x.unwrap_or(coarsest / 2.0)),
        ..run.grid.clone()
    };
    let cfg = resolve_database(&run.db, sweep_database_defaults());
    let (base_grid, db) = database(&sys, &base, &cfg)?;
    let (one, two) = canonical_representatives(sys.n_spatial());
    let reps: Vec<Representative> = one
        .into_iter()
        .map(Representative::One)
        .chain(two.into_iter().map(Representative::Two))
        .collect();

    let mut rows = Vec::new();
    let mut errors: Vec<Vec<f64>> = vec![Vec::new(); reps.len()];
    for &dx in &args.delta_xs {
        let approx = riemann_integrals(&sys, &GridSpec::polar(x_max, dx)?)?;
        let errs: Vec<f64> = reps
            .iter()
            .map(|&r| (approx.value(r) - db.integrals.value(r)).abs())
            .collect();
        for (col, e) in errors.iter_mut().zip(&errs) {
            col.push(*e);
        }
        rows.push(json!({
            "delta_x": dx,
            "max_error": errs.iter().cloned().fold(0.0, f64::max),
            "errors": errs,
        }));
    }

    let labels: Vec<String> = reps.iter().map(|&r| label(r)).collect();
    let mut slopes = Vec::new();
    let mut validations = vec![Validation::new(
        "row_count",
        rows.len() == args.delta_xs.len(),
        format!("{} rows for {} values", rows.len(), args.delta_xs.len()),
    )];
    if args.delta_xs.len() >= 2 {
        for (name, errs) in labels.iter().zip(&errors) {
            let slope = log_log_slope(&args.delta_xs, errs);
            slopes.push(slope);
            let (lo, hi) = SLOPE_RANGE;
            validations.push(Validation::new(
                &format!("slope {name}"),
                (lo..=hi).contains(&slope),
                format!("{slope:.4} in [{lo}, {hi}]"),
            ));
        }
    }

    if let Some(out) = &args.output {
        let mut text = format!("# delta_x max_error {}\n", labels.join(" "));
        for (i, &dx) in args.delta_xs.iter().enumerate() {
            write!(text, "{dx:.6e} {:.6e}", rows[i]["max_error"].as_f64().unwrap()).unwrap();
            for col in &errors {
                write!(text, " {:.6e}", col[i]).unwrap();
            }
            text.push('\n');
        }
        write_file(out, &text)?;
    }

    let (db_config, db_results) = database_summary(&base_grid, &cfg, &db);
    let config = json!({
        "kind": "delta_x",
        "delta_xs": args.delta_xs,
        "x_max": x_max,
        "geometry": path.display().to_string(),
        "orthogonalization": value(&run.input.orthogonalization),
        "reference": db_config,
        "output": args.output.as_ref().map(|p| p.display().to_string()),
    });
    let results = json!({
        "labels": labels,
        "rows": rows,
        "slopes": slopes,
        "reference": db_results,
    });
    Ok(Report::new("sweep", config, results, validations))
}
