use bergman_core::kernels::{
    bj_table, combination_sweep, default_gamma, kernel_norm_ratio, reproducing_norm_ratio, write_sweep_csv,
    BoundaryQuadrature,
};
use bergman_core::{build_graded_rule, Result, C64};
use serde_json::json;

use crate::args::KernelCommand;
use crate::report::{captured, csv_table, value, Outcome};

pub fn run(c: &KernelCommand) -> Result<Outcome> {
    match c {
        KernelCommand::KernelNorm { p, i_max, radii, gamma, precise } => {
            let gamma = gamma.unwrap_or_else(|| default_gamma(*p));
            let quad = if *precise {
                BoundaryQuadrature::precise()
            } else {
                BoundaryQuadrature::survey()
            };
            let mut rows = Vec::new();
            let mut windows = Vec::new();
            for i in 0..=*i_max {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for &r in radii {
                    let v = kernel_norm_ratio(C64::new(r, 0.0), i, gamma, *p, &quad)?;
                    lo = lo.min(v);
                    hi = hi.max(v);
                    rows.push((i, r, v));
                }
                windows.push(json!({"i": i, "min": lo, "max": hi, "spread": hi / lo}));
            }
            let reproducing = if *p == 2.0 {
                radii
                    .iter()
                    .map(|&r| Ok(json!({"radius": r, "ratio": reproducing_norm_ratio(C64::new(r, 0.0), 0, &quad)?})))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            let table = csv_table(
                &["i", "radius", "ratio"],
                rows.iter().map(|(i, r, v)| vec![i.to_string(), r.to_string(), v.to_string()]),
            )?;
            Ok(Outcome::new(
                "kernelcheck kernel-norm",
                json!({"p": p, "gamma": gamma, "i_max": i_max, "radii": radii}),
                value(&quad)?,
                json!({
                    "windows": windows,
                    "reproducing": reproducing,
                    "ratios": rows.iter().map(|(i, r, v)| json!({"i": i, "radius": r, "ratio": v})).collect::<Vec<_>>(),
                }),
            )
            .table("ratios.csv", table))
        }
        KernelCommand::Combination { p, gamma, n_max, draws, radii, seed, quad } => {
            let spec = quad.spec();
            let rule = build_graded_rule(&spec)?;
            let grid: Vec<C64> = radii.iter().map(|&r| C64::new(r, 0.0)).collect();
            let rows = combination_sweep(&grid, *n_max, *draws, *gamma, *p, &rule, *seed)?;
            let min_ratio = rows.iter().filter(|r| r.n >= 1).map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            let table = captured(|buf| write_sweep_csv(&rows, buf))?;
            Ok(Outcome::new(
                "kernelcheck combination",
                json!({"p": p, "gamma": gamma, "n_max": n_max, "draws": draws, "radii": radii, "seed": seed}),
                json!({"quadrature": spec}),
                json!({"min_ratio": if min_ratio.is_finite() { Some(min_ratio) } else { None }, "rows": rows}),
            )
            .table("sweep.csv", table))
        }
        KernelCommand::Bj { n, beta } => {
            let rows = bj_table(beta, *n);
            let worst = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
            let table = csv_table(
                &["beta", "n", "j", "residual", "relative"],
                rows.iter().map(|r| {
                    vec![
                        r.beta.to_string(),
                        r.n.to_string(),
                        r.j.to_string(),
                        r.residual.to_string(),
                        r.relative.to_string(),
                    ]
                }),
            )?;
            Ok(Outcome::new(
                "kernelcheck bj",
                json!({"n": n, "beta": beta}),
                json!({}),
                json!({"max_relative": worst, "rows": rows}),
            )
            .table("bj.csv", table))
        }
    }
}
