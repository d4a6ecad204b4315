//! Linear equations `f^(n) + g_{n-1} f^(n-1) + ... + g_0 f = F` solved by
//! the Neumann series of `f + I_g^(n) f = F_0`, with a coefficient-recurrence
//! oracle.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{falling, AnalyticFunction, FunctionSpec, SeriesConfig, TaylorPoly, C64};
use crate::error::{LabError, Result};
use crate::norms::bloch_norm;
use crate::operators::{volterra_series, VolterraSpec};
use crate::profile::TailRule;
use crate::quadrature::{build_graded_rule, GradedSpec, QuadratureRule, RingGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct OdeProblem {
    g: Vec<AnalyticFunction>,
    rhs: AnalyticFunction,
    initial: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeFile {
    pub g: Vec<FunctionSpec>,
    pub rhs: FunctionSpec,
    /// `f(0), f'(0), ..., f^(n-1)(0)`.
    pub initial: Vec<[f64; 2]>,
}

impl OdeProblem {
    pub fn new(g: Vec<AnalyticFunction>, rhs: AnalyticFunction, initial: Vec<C64>) -> Result<Self> {
        if g.is_empty() {
            return Err(LabError::Contract("equation order n must be at least 1".into()));
        }
        if g.len() != initial.len() {
            return Err(LabError::Contract(format!(
                "{} coefficients but {} initial values",
                g.len(),
                initial.len()
            )));
        }
        Ok(Self { g, rhs, initial })
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn coefficients(&self) -> &[AnalyticFunction] {
        &self.g
    }

    pub fn rhs(&self) -> &AnalyticFunction {
        &self.rhs
    }

    pub fn initial(&self) -> &[C64] {
        &self.initial
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: OdeFile = serde_json::from_str(text).map_err(|e| LabError::Input(e.to_string()))?;
        Self::new(
            file.g.iter().map(AnalyticFunction::try_from).collect::<Result<_>>()?,
            AnalyticFunction::try_from(&file.rhs)?,
            file.initial.iter().map(|v| C64::new(v[0], v[1])).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let file = OdeFile {
            g: self.g.iter().map(FunctionSpec::from).collect(),
            rhs: FunctionSpec::from(&self.rhs),
            initial: self.initial.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string(&file).expect("problem serializes")
    }

    fn volterra(&self) -> VolterraSpec {
        VolterraSpec::new(self.g.clone()).expect("order checked at construction")
    }
}

/// `F_0 = I^n F + sum_{i<n} f^(i)(0) z^i / i!`.
pub fn construct_f0(problem: &OdeProblem, cfg: &SeriesConfig) -> Result<TaylorPoly> {
    let n = problem.n();
    let mut f0 = crate::analytic::integrate_n(&problem.rhs, n, cfg)?;
    let mut fact = 1.0;
    for (i, &c) in problem.initial.iter().enumerate() {
        if i > 0 {
            fact *= i as f64;
        }
        f0 = f0.add(&TaylorPoly::monomial(i, c / fact));
    }
    Ok(f0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannSettings {
    pub p: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub series: SeriesConfig,
    /// Rule for A^p distances between iterates.
    pub distance: GradedSpec,
    /// Residuals are checked at the rule nodes with `|z|` at most this.
    pub residual_radius: f64,
    /// Cuts at which the solution norm is reported.
    pub norm_cuts: (f64, f64),
    /// Consecutive ratios `>= 1` that count as sustained non-contraction.
    pub stall_window: usize,
}

impl Default for NeumannSettings {
    fn default() -> Self {
        Self {
            p: 2.0,
            max_iter: 200,
            tol: 1e-12,
            series: SeriesConfig::default(),
            distance: GradedSpec {
                angular_cap: 2048,
                r_cut: 0.999,
                ..GradedSpec::default()
            },
            residual_radius: 0.9,
            norm_cuts: (0.99, 0.999),
            stall_window: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub iterations: usize,
    /// A^p distance between successive iterates.
    pub distances: Vec<f64>,
    /// `distances[m+1] / distances[m]`.
    pub ratios: Vec<f64>,
    /// `||g_k||_{0, n-k}`, the sampled Bloch-type norms of the coefficients.
    pub bloch_norms: Vec<f64>,
    pub sustained_non_contraction: bool,
    pub converged: bool,
    /// Sup of `|f^(n) + sum g_k f^(k) - F|` over the residual nodes.
    pub residual: Option<f64>,
    pub solution_norm_by_cut: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// `None` unless the iteration converged.
    pub solution: Option<TaylorPoly>,
    pub certificate: Certificate,
}

fn ap_distance(a: &TaylorPoly, b: &TaylorPoly, p: f64, rule: &QuadratureRule) -> f64 {
    let d = a.sub(b);
    if d.is_zero() {
        return 0.0;
    }
    rule.integrate_fn(|z| d.eval_deriv(z, 0).norm().powf(p)).powf(1.0 / p)
}

/// `f_{m+1} = F_0 - I_g^(n) f_m` from `f_0 = F_0` until successive iterates
/// are within `tol` in A^p.
pub fn neumann_solve(problem: &OdeProblem, settings: &NeumannSettings) -> Result<OdeSolution> {
    let cfg = &settings.series;
    let spec = problem.volterra();
    let rule = build_graded_rule(&settings.distance)?;
    let f0 = construct_f0(problem, cfg)?;
    let n = problem.n();
    let grid = RingGrid::default();
    let tail = TailRule::default();
    let bloch_norms = problem
        .g
        .iter()
        .enumerate()
        .map(|(k, g)| Ok(bloch_norm(g, 0, (n - k) as f64, &grid, &tail)?.norm))
        .collect::<Result<Vec<_>>>()?;

    let mut current = f0.clone();
    let mut distances = Vec::new();
    let mut converged = false;
    let mut stalled = false;
    for _ in 0..settings.max_iter {
        let next = f0.sub(&volterra_series(&spec, &current, cfg)?);
        let d = ap_distance(&next, &current, settings.p, &rule);
        distances.push(d);
        current = next;
        if d < settings.tol {
            converged = true;
            break;
        }
        if !d.is_finite() {
            break;
        }
        let w = settings.stall_window;
        if distances.len() > w && distances[distances.len() - w - 1..].windows(2).all(|r| r[1] >= r[0]) {
            stalled = true;
            break;
        }
    }
    let ratios = distances
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let residual = converged.then(|| equation_residual(problem, &current, &rule, settings.residual_radius));
    let solution_norm_by_cut = if converged {
        [settings.norm_cuts.0, settings.norm_cuts.1]
            .iter()
            .map(|&c| {
                let r = build_graded_rule(&settings.distance.with_r_cut(c))?;
                Ok(ap_distance(&current, &TaylorPoly::zero(), settings.p, &r))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(OdeSolution {
        solution: converged.then_some(current),
        certificate: Certificate {
            iterations: distances.len(),
            distances,
            ratios,
            bloch_norms,
            sustained_non_contraction: stalled,
            converged,
            residual,
            solution_norm_by_cut,
        },
    })
}

/// Sup over rule nodes with `|z| <= radius` of the equation residual.
pub fn equation_residual(problem: &OdeProblem, f: &TaylorPoly, rule: &QuadratureRule, radius: f64) -> f64 {
    let n = problem.n();
    rule.nodes()
        .par_iter()
        .filter(|z| z.norm() <= radius)
        .map(|&z| {
            let mut v = f.eval_deriv(z, n) - problem.rhs.eval_unchecked(z, 0);
            for (k, g) in problem.g.iter().enumerate() {
                v += g.eval_unchecked(z, 0) * f.eval_deriv(z, k);
            }
            v.norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// Taylor coefficients through `degree` from the recurrence obtained by
/// matching `z^m` in `f^(n) = F - sum_k g_k f^(k)`.
pub fn taylor_ode_oracle(problem: &OdeProblem, degree: usize) -> Result<TaylorPoly> {
    let n = problem.n();
    let big = degree + 8;
    let g: Vec<TaylorPoly> = problem.g.iter().map(|f| f.to_taylor(big).0).collect();
    let rhs = problem.rhs.to_taylor(big).0;
    let mut c = vec![C64::new(0.0, 0.0); degree.max(n - 1) + 1];
    let mut fact = 1.0;
    for (i, &v) in problem.initial.iter().enumerate() {
        if i > 0 {
            fact *= i as f64;
        }
        c[i] = v / fact;
    }
    for m in 0..=degree.saturating_sub(n) {
        let mut acc = rhs.coeff(m);
        for (k, gk) in g.iter().enumerate() {
            for i in 0..=m {
                let j = m - i + k;
                acc -= gk.coeff(i) * c[j] * falling(j, k);
            }
        }
        c[m + n] = acc / falling(m + n, n);
    }
    c.truncate(degree + 1);
    TaylorPoly::new(c)
}

/// `k,re,im` rows.
pub fn write_coefficients_csv<W: Write>(f: &TaylorPoly, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| LabError::Io(e.to_string());
    wtr.write_record(["k", "re", "im"]).map_err(io)?;
    for (k, c) in f.coeffs().iter().enumerate() {
        wtr.write_record([k.to_string(), c.re.to_string(), c.im.to_string()])
            .map_err(io)?;
    }
    wtr.flush().map_err(|e| LabError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(c: &[f64]) -> AnalyticFunction {
        AnalyticFunction::polynomial(c)
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn f0_examples() {
        let cfg = SeriesConfig::default();
        let p = OdeProblem::new(vec![AnalyticFunction::zero()], AnalyticFunction::zero(), vec![one()]).unwrap();
        let f0 = construct_f0(&p, &cfg).unwrap();
        assert_eq!(f0.coeff(0), one());
        assert!(f0.coeffs()[1..].iter().all(|c| c.norm() == 0.0));
        let zero = C64::new(0.0, 0.0);
        let p = OdeProblem::new(vec![AnalyticFunction::zero(); 2], poly(&[2.0]), vec![zero, zero]).unwrap();
        let f0 = construct_f0(&p, &cfg).unwrap();
        assert_relative_eq!(f0.coeff(2).re, 1.0);
        assert_eq!(f0.coeff(0), zero);
        let p = OdeProblem::new(vec![AnalyticFunction::zero(); 2], AnalyticFunction::zero(), vec![one(), one() * 2.0]).unwrap();
        assert_eq!(construct_f0(&p, &cfg).unwrap().coeffs()[..2], [one(), one() * 2.0]);
    }

    #[test]
    fn zero_symbol_converges_in_one_step() {
        let zero = C64::new(0.0, 0.0);
        let p = OdeProblem::new(vec![AnalyticFunction::zero(); 2], poly(&[2.0]), vec![zero, zero]).unwrap();
        let sol = neumann_solve(&p, &NeumannSettings::default()).unwrap();
        assert_eq!(sol.certificate.iterations, 1);
        let f = sol.solution.unwrap();
        assert_relative_eq!(f.coeff(2).re, 1.0);
        assert!(sol.certificate.residual.unwrap() < 1e-14);
    }

    #[test]
    fn oracle_examples() {
        let zero = C64::new(0.0, 0.0);
        let p = OdeProblem::new(vec![AnalyticFunction::zero()], poly(&[0.0, 1.0]), vec![zero]).unwrap();
        let f = taylor_ode_oracle(&p, 10).unwrap();
        assert_relative_eq!(f.coeff(2).re, 0.5);
        assert!(f.coeffs().iter().enumerate().all(|(k, c)| k == 2 || c.norm() == 0.0));
        let p = OdeProblem::new(vec![poly(&[1.0, 1.0])], AnalyticFunction::zero(), vec![zero]).unwrap();
        assert!(taylor_ode_oracle(&p, 20).unwrap().is_zero());
    }

    #[test]
    fn mismatched_initial_data_is_contract_error() {
        assert!(matches!(
            OdeProblem::new(vec![poly(&[1.0])], poly(&[1.0]), vec![]),
            Err(LabError::Contract(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = OdeProblem::new(vec![poly(&[0.1])], AnalyticFunction::zero(), vec![one()]).unwrap();
        assert_eq!(OdeProblem::from_json(&p.to_json()).unwrap(), p);
        assert!(matches!(OdeProblem::from_json("{\"g\": 3}"), Err(LabError::Input(_))));
    }

    #[test]
    fn coefficient_csv() {
        let mut buf = Vec::new();
        write_coefficients_csv(&TaylorPoly::from_real(&[1.0, -0.5]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,re,im\n0,1,0\n1,-0.5,0\n");
    }
}
