use bergman_core::geometry::build_lattice;
use bergman_core::ode::write_coefficients_csv;
use bergman_core::operators::{
    apply_comp_sum, apply_volterra, classical_volterra_criterion, composition_sum_rigidity, empirical_operator_norm,
    hilbert_schmidt_check, volterra_bloch_criterion, volterra_integral_criterion, EmpiricalReport, EmpiricalSettings,
    HsSettings, Operator, OperatorVerdict, RigiditySettings, StableIntegralSettings,
};
use bergman_core::{AnalyticFunction, LabError, Result, RingGrid, SeriesConfig};
use serde_json::{json, Value};

use super::{load_compsum, load_function, load_points, load_volterra, pair, spec_of, specs_of};
use crate::args::{CompsumCommand, VolterraCommand};
use crate::report::{captured, csv_table, profile_csv, value, Outcome};

fn witness_csv(e: &EmpiricalReport) -> Result<String> {
    csv_table(
        &["m", "w_re", "w_im", "ratio"],
        e.witnesses
            .iter()
            .map(|w| vec![w.m.to_string(), w.w.re.to_string(), w.w.im.to_string(), w.ratio.to_string()]),
    )
}

pub fn volterra(c: &VolterraCommand) -> Result<Outcome> {
    match c {
        VolterraCommand::Apply { op, function, degree } => {
            let spec = load_volterra(op)?;
            let f = load_function(function)?;
            let cfg = SeriesConfig {
                degree: *degree,
                ..SeriesConfig::default()
            };
            let out = apply_volterra(&spec, &f, &cfg)?;
            let AnalyticFunction::Taylor(poly) = &out else {
                unreachable!("series application returns a polynomial")
            };
            let table = captured(|buf| write_coefficients_csv(poly, buf))?;
            Ok(Outcome::new(
                "volterra apply",
                json!({"n": spec.n(), "symbols": specs_of(spec.symbols()), "function": spec_of(&f)}),
                value(&cfg)?,
                json!({"degree": poly.degree(), "result": spec_of(&out)}),
            )
            .table("coefficients.csv", table))
        }
        VolterraCommand::Criteria { op, p, q, seed, tail } => {
            let spec = load_volterra(op)?;
            let rule = tail.rule();
            let grid = RingGrid::default();
            let integral = StableIntegralSettings::default();
            let criterion = if p <= q {
                volterra_bloch_criterion(&spec, *p, *q, &grid, &rule)?
            } else {
                volterra_integral_criterion(&spec, *p, *q, &integral)?
            };
            let classical: Value = match spec.derivative_form_parts() {
                Some((g, a)) if a.len() == 1 && a[0] == bergman_core::C64::new(1.0, 0.0) && p <= q => {
                    match classical_volterra_criterion(g, *p, *q, &grid, &rule) {
                        Ok(r) => value(&r)?,
                        Err(LabError::OutOfScope(m)) => json!({"out_of_scope": m}),
                        Err(e) => return Err(e),
                    }
                }
                _ => Value::Null,
            };
            let empirical_settings = EmpiricalSettings {
                seed: *seed,
                rule,
                ..EmpiricalSettings::default()
            };
            let empirical = empirical_operator_norm(Operator::Volterra(&spec), *p, *q, &empirical_settings)?;
            let consistent = (criterion.verdict == OperatorVerdict::Fail) == empirical.grows;
            let witnesses = witness_csv(&empirical)?;
            Ok(Outcome::new(
                "volterra criteria",
                json!({"n": spec.n(), "symbols": specs_of(spec.symbols()), "p": p, "q": q}),
                json!({"tail_rule": rule, "integral": integral, "empirical": empirical_settings}),
                json!({
                    "criterion": criterion,
                    "classical": classical,
                    "empirical": empirical,
                    "consistent": consistent,
                }),
            )
            .table("witnesses.csv", witnesses))
        }
    }
}

pub fn compsum(c: &CompsumCommand) -> Result<Outcome> {
    match c {
        CompsumCommand::Apply { op, function, points } => {
            let spec = load_compsum(op)?;
            let f = load_function(function)?;
            let pts = load_points(points)?;
            let values = apply_comp_sum(&spec, &f, &pts)?;
            let table = csv_table(
                &["z_re", "z_im", "re", "im"],
                pts.iter()
                    .zip(&values)
                    .map(|(z, v)| vec![z.re.to_string(), z.im.to_string(), v.re.to_string(), v.im.to_string()]),
            )?;
            Ok(Outcome::new(
                "compsum apply",
                json!({
                    "n": spec.n(),
                    "symbols": specs_of(spec.symbols()),
                    "phi": spec_of(spec.phi().function()),
                    "function": spec_of(&f),
                    "points": pts.len(),
                }),
                json!({}),
                json!({"values": values.iter().map(|v| pair(*v)).collect::<Vec<_>>()}),
            )
            .table("values.csv", table))
        }
        CompsumCommand::Rigidity { op, p, q, r, r_max, seed, tail } => {
            let spec = load_compsum(op)?;
            let lattice = build_lattice(*r, *r_max)?;
            let rule = tail.rule();
            let settings = RigiditySettings {
                rule,
                empirical: EmpiricalSettings {
                    seed: *seed,
                    rule,
                    ..EmpiricalSettings::default()
                },
                ..RigiditySettings::default()
            };
            let rep = composition_sum_rigidity(&spec, *p, *q, &lattice, &settings)?;
            let mut outcome = Outcome::new(
                "compsum rigidity",
                json!({
                    "n": spec.n(),
                    "symbols": specs_of(spec.symbols()),
                    "phi": spec_of(spec.phi().function()),
                    "p": p,
                    "q": q,
                    "r": r,
                    "r_max": r_max,
                }),
                value(&settings)?,
                value(&rep)?,
            )
            .table("witnesses.csv", witness_csv(&rep.empirical)?);
            for (k, comp) in rep.components.iter().enumerate() {
                outcome = outcome.table(format!("component-{k}-profile.csv"), profile_csv(&comp.profile)?);
            }
            Ok(outcome)
        }
        CompsumCommand::Hs { op, basis_size, samples, seed } => {
            let spec = load_compsum(op)?;
            let settings = HsSettings {
                basis_size: *basis_size,
                adjoint_samples: *samples,
                seed: *seed,
                ..HsSettings::default()
            };
            let rep = hilbert_schmidt_check(&spec, &settings)?;
            let table = csv_table(
                &["k", "term"],
                rep.basis_terms.iter().enumerate().map(|(k, t)| vec![k.to_string(), t.to_string()]),
            )?;
            Ok(Outcome::new(
                "compsum hs",
                json!({"n": spec.n(), "symbols": specs_of(spec.symbols()), "phi": spec_of(spec.phi().function())}),
                value(&settings)?,
                value(&rep)?,
            )
            .table("basis.csv", table))
        }
    }
}
