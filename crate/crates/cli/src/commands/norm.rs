use bergman_core::geometry::build_lattice;
use bergman_core::norms::{ap_integral, bloch_norm, littlewood_paley_norm};
use bergman_core::quadrature::{extrapolate_to_boundary, BOUNDARY_CUTS};
use bergman_core::{build_graded_rule, Result, RingGrid};
use serde_json::json;

use super::{load_function, spec_of};
use crate::args::{LatticeArgs, NormArgs, NormKind};
use crate::report::{captured, csv_table, value, Outcome};

pub fn norm(a: &NormArgs) -> Result<Outcome> {
    let f = load_function(&a.function)?;
    let spec = a.quad.spec();
    match a.kind {
        NormKind::Ap => {
            let (ca, cb) = BOUNDARY_CUTS;
            let at_cut = ap_integral(&f, a.p, &build_graded_rule(&spec)?)?.powf(1.0 / a.p);
            let va = ap_integral(&f, a.p, &build_graded_rule(&spec.with_r_cut(ca))?)?;
            let vb = ap_integral(&f, a.p, &build_graded_rule(&spec.with_r_cut(cb))?)?;
            let norm = extrapolate_to_boundary(ca, va, cb, vb).max(0.0).powf(1.0 / a.p);
            let rows = [(spec.r_cut, at_cut), (ca, va.powf(1.0 / a.p)), (cb, vb.powf(1.0 / a.p))];
            let table = csv_table(&["r_cut", "norm"], rows.iter().map(|(c, v)| vec![c.to_string(), v.to_string()]))?;
            Ok(Outcome::new(
                "norm",
                json!({"kind": "ap", "p": a.p, "function": spec_of(&f), "quadrature": spec}),
                json!({"extrapolation_cuts": [ca, cb]}),
                json!({"norm": norm, "norm_at_r_cut": at_cut}),
            )
            .table("cuts.csv", table))
        }
        NormKind::LittlewoodPaley => {
            let rule = build_graded_rule(&spec)?;
            let norm = littlewood_paley_norm(&f, a.p, a.n, &rule)?;
            Ok(Outcome::new(
                "norm",
                json!({"kind": "littlewood_paley", "p": a.p, "n": a.n, "function": spec_of(&f), "quadrature": spec}),
                json!({}),
                json!({"norm": norm}),
            ))
        }
        NormKind::Bloch => {
            let rule = a.tail.rule();
            let rep = bloch_norm(&f, a.m, a.alpha, &RingGrid::default(), &rule)?;
            let table = csv_table(
                &["index", "value"],
                rep.profile.iter().enumerate().map(|(i, v)| vec![i.to_string(), v.to_string()]),
            )?;
            Ok(Outcome::new(
                "norm",
                json!({"kind": "bloch", "m": a.m, "alpha": a.alpha, "function": spec_of(&f)}),
                value(&rule)?,
                value(&rep)?,
            )
            .table("profile.csv", table))
        }
    }
}

pub fn lattice(a: &LatticeArgs) -> Result<Outcome> {
    let lat = build_lattice(a.r, a.r_max)?;
    let points = captured(|buf| lat.write_csv(buf))?;
    Ok(Outcome::new(
        "lattice",
        json!({"r": a.r, "r_max": a.r_max}),
        json!({}),
        json!({
            "points": lat.len(),
            "multiplicity_bound": lat.multiplicity_bound(),
            "certificate": value(lat.certificate())?,
        }),
    )
    .table("points.csv", points))
}
