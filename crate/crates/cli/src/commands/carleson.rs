use bergman_core::carleson::{
    carleson_integral_statistic, carleson_statistic, sobolev_rigidity_check, IntegralSettings, SobolevSettings,
};
use bergman_core::geometry::build_lattice;
use bergman_core::Result;
use serde_json::json;

use super::{load_measure, load_symbols, specs_of};
use crate::args::CarlesonCommand;
use crate::report::{profile_csv, value, Outcome};

pub fn run(c: &CarlesonCommand) -> Result<Outcome> {
    match c {
        CarlesonCommand::Geometric { measure, k, p, q, r, r_max, tail } => {
            let (mu, desc) = load_measure(measure)?;
            let lattice = build_lattice(*r, *r_max)?;
            let rule = tail.rule();
            let rep = carleson_statistic(&mu, *k, *p, *q, &lattice, &rule)?;
            let profile = profile_csv(&rep.profile)?;
            Ok(Outcome::new(
                "carleson geometric",
                json!({"measure": desc, "k": k, "p": p, "q": q, "r": r, "r_max": r_max, "lattice_points": lattice.len()}),
                value(&rule)?,
                value(&rep)?,
            )
            .table("profile.csv", profile))
        }
        CarlesonCommand::Integral { measure, k, p, q, r, cut_inner, cut_outer, tolerance } => {
            let (mu, desc) = load_measure(measure)?;
            let settings = IntegralSettings {
                cuts: (*cut_inner, *cut_outer),
                tolerance: *tolerance,
                ..IntegralSettings::default()
            };
            let rep = carleson_integral_statistic(&mu, *k, *p, *q, *r, &settings)?;
            Ok(Outcome::new(
                "carleson integral",
                json!({"measure": desc, "k": k, "p": p, "q": q, "r": r}),
                value(&settings)?,
                value(&rep)?,
            ))
        }
        CarlesonCommand::Sobolev {
            measure,
            symbols,
            p,
            q,
            r,
            r_max,
            seed,
            random_count,
            random_degree,
            tail,
        } => {
            let (mu, desc) = load_measure(measure)?;
            let u = load_symbols(symbols)?;
            let lattice = build_lattice(*r, *r_max)?;
            let settings = SobolevSettings {
                random_count: *random_count,
                random_degree: *random_degree,
                seed: *seed,
                rule: tail.rule(),
                ..SobolevSettings::default()
            };
            let rep = sobolev_rigidity_check(&mu, &u, *p, *q, &lattice, &settings)?;
            let profile = profile_csv(&rep.combined_profile)?;
            Ok(Outcome::new(
                "carleson sobolev",
                json!({"measure": desc, "symbols": specs_of(&u), "p": p, "q": q, "r": r, "r_max": r_max}),
                value(&settings)?,
                value(&rep)?,
            )
            .table("combined-profile.csv", profile))
        }
    }
}
