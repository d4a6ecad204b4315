use bergman_core::ode::{neumann_solve, taylor_ode_oracle, write_coefficients_csv, NeumannSettings, OdeProblem};
use bergman_core::{LabError, Result};
use serde_json::{json, Value};

use crate::args::OdeCommand;
use crate::report::{captured, read_text, value, Outcome};

fn problem_value(problem: &OdeProblem) -> Result<Value> {
    serde_json::from_str(&problem.to_json()).map_err(|e| LabError::Io(e.to_string()))
}

pub fn run(c: &OdeCommand) -> Result<Outcome> {
    match c {
        OdeCommand::Solve { problem, p, tol, max_iter } => {
            let problem = OdeProblem::from_json(&read_text(problem)?)?;
            let settings = NeumannSettings {
                p: *p,
                tol: *tol,
                max_iter: *max_iter,
                ..NeumannSettings::default()
            };
            let sol = neumann_solve(&problem, &settings)?;
            let mut outcome = Outcome::new(
                "ode solve",
                json!({"problem": problem_value(&problem)?}),
                value(&settings)?,
                json!({
                    "certificate": sol.certificate,
                    "degree": sol.solution.as_ref().map(|f| f.degree()),
                }),
            );
            match &sol.solution {
                Some(f) => {
                    outcome = outcome.table("coefficients.csv", captured(|buf| write_coefficients_csv(f, buf))?);
                }
                None => {
                    outcome.status = Some(LabError::Divergence(format!(
                        "no convergence after {} iterations",
                        sol.certificate.iterations
                    )));
                }
            }
            Ok(outcome)
        }
        OdeCommand::Oracle { problem, degree } => {
            let problem = OdeProblem::from_json(&read_text(problem)?)?;
            let f = taylor_ode_oracle(&problem, *degree)?;
            let coeffs: Vec<[f64; 2]> = f.coeffs().iter().map(|c| [c.re, c.im]).collect();
            Ok(Outcome::new(
                "ode oracle",
                json!({"problem": problem_value(&problem)?, "degree": degree}),
                json!({}),
                json!({"coefficients": coeffs}),
            )
            .table("coefficients.csv", captured(|buf| write_coefficients_csv(&f, buf))?))
        }
    }
}
