mod carleson;
mod kernels;
mod norm;
mod ode;
mod operators;

use std::fs::File;
use std::path::PathBuf;

use bergman_core::carleson::DiscreteMeasure;
use bergman_core::geometry::read_lattice_csv;
use bergman_core::operators::{CompositionSumSpec, OperatorSpec, VolterraSpec};
use bergman_core::{AnalyticFunction, FunctionSpec, LabError, Result, C64};
use serde_json::{json, Value};

use crate::args::{Command, MeasureArgs};
use crate::report::{io_error, read_text, Outcome};

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Norm(a) => norm::norm(a),
        Command::Lattice(a) => norm::lattice(a),
        Command::Carleson(c) => carleson::run(c),
        Command::Volterra(c) => operators::volterra(c),
        Command::Compsum(c) => operators::compsum(c),
        Command::Ode(c) => ode::run(c),
        Command::Kernelcheck(c) => kernels::run(c),
    }
}

fn load_function(path: &PathBuf) -> Result<AnalyticFunction> {
    AnalyticFunction::from_json(&read_text(path)?)
}

fn load_symbols(path: &PathBuf) -> Result<Vec<AnalyticFunction>> {
    let specs: Vec<FunctionSpec> =
        serde_json::from_str(&read_text(path)?).map_err(|e| LabError::Input(e.to_string()))?;
    specs.iter().map(AnalyticFunction::try_from).collect()
}

fn load_operator(path: &PathBuf) -> Result<OperatorSpec> {
    OperatorSpec::from_json(&read_text(path)?)
}

fn load_volterra(path: &PathBuf) -> Result<VolterraSpec> {
    match load_operator(path)? {
        OperatorSpec::Volterra(s) => Ok(s),
        OperatorSpec::CompositionSum(_) => Err(LabError::Input("expected a Volterra operator file".into())),
    }
}

fn load_compsum(path: &PathBuf) -> Result<CompositionSumSpec> {
    match load_operator(path)? {
        OperatorSpec::CompositionSum(s) => Ok(s),
        OperatorSpec::Volterra(_) => Err(LabError::Input("expected a composition-sum operator file".into())),
    }
}

fn load_points(path: &PathBuf) -> Result<Vec<C64>> {
    read_lattice_csv(File::open(path).map_err(|e| io_error(path, e))?)
}

/// The measure together with its description for the report.
fn load_measure(m: &MeasureArgs) -> Result<(DiscreteMeasure, Value)> {
    match (&m.measure, m.density_t) {
        (Some(path), _) => {
            let mu = DiscreteMeasure::read_csv(File::open(path).map_err(|e| io_error(path, e))?)?;
            let desc = json!({"kind": "atoms", "atoms": mu.atoms().len(), "total_mass": mu.total_mass()});
            Ok((mu, desc))
        }
        (None, Some(t)) => Ok((DiscreteMeasure::radial_power(t)?, json!({"kind": "density", "t": t}))),
        (None, None) => Err(LabError::Input("a measure file or a density exponent is required".into())),
    }
}

fn spec_of(f: &AnalyticFunction) -> FunctionSpec {
    FunctionSpec::from(f)
}

fn specs_of(fs: &[AnalyticFunction]) -> Vec<FunctionSpec> {
    fs.iter().map(FunctionSpec::from).collect()
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}
