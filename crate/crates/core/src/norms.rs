//! Bergman norms, the Littlewood–Paley equivalent norm and Bloch-type norms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticFunction, TaylorPoly, C64};
use crate::error::{LabError, Result};
use crate::profile::{BoundaryProfile, TailReading, TailRule, Trend};
use crate::quadrature::{build_graded_rule, extrapolate_to_boundary, GradedSpec, QuadratureRule, RingGrid};

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(LabError::Contract(format!("exponent p must be positive, got {p}")));
    }
    Ok(())
}

/// `int |f|^p dA` over the rule's region.
pub fn ap_integral(f: &AnalyticFunction, p: f64, rule: &QuadratureRule) -> Result<f64> {
    check_p(p)?;
    Ok(rule.integrate_fn(|z| f.eval_unchecked(z, 0).norm().powf(p)))
}

/// `(int |f|^p dA)^(1/p)` over the rule's region.
pub fn ap_norm(f: &AnalyticFunction, p: f64, rule: &QuadratureRule) -> Result<f64> {
    Ok(ap_integral(f, p, rule)?.powf(1.0 / p))
}

/// A^p norm with the truncation deficit removed by extrapolating two cuts.
pub fn ap_norm_extrapolated(
    f: &AnalyticFunction,
    p: f64,
    spec: &GradedSpec,
    cuts: (f64, f64),
) -> Result<f64> {
    let va = ap_integral(f, p, &build_graded_rule(&spec.with_r_cut(cuts.0))?)?;
    let vb = ap_integral(f, p, &build_graded_rule(&spec.with_r_cut(cuts.1))?)?;
    Ok(extrapolate_to_boundary(cuts.0, va, cuts.1, vb).max(0.0).powf(1.0 / p))
}

/// Exact A^2 norm of a polynomial: `(sum |c_k|^2 / (k + 1))^(1/2)`.
pub fn a2_norm_coefficients(f: &TaylorPoly) -> f64 {
    f.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() / (k as f64 + 1.0))
        .sum::<f64>()
        .sqrt()
}

/// `sum_{i<n} |f^(i)(0)| + (int ((1 - |z|^2)^n |f^(n)(z)|)^p dA)^(1/p)`.
pub fn littlewood_paley_norm(
    f: &AnalyticFunction,
    p: f64,
    n: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_p(p)?;
    if n == 0 {
        return Err(LabError::Contract("derivative order n must be at least 1".into()));
    }
    let origin = C64::new(0.0, 0.0);
    let head: f64 = (0..n).map(|i| f.eval_unchecked(origin, i).norm()).sum();
    let body = rule.integrate_fn(|z| {
        ((1.0 - z.norm_sqr()).powi(n as i32) * f.eval_unchecked(z, n).norm()).powf(p)
    });
    Ok(head + body.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlochVerdict {
    Little,
    BigOnly,
    Unbounded,
}

impl From<Trend> for BlochVerdict {
    fn from(t: Trend) -> Self {
        match t {
            Trend::Decaying => BlochVerdict::Little,
            Trend::Plateau => BlochVerdict::BigOnly,
            Trend::Growing => BlochVerdict::Unbounded,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlochReport {
    pub m: usize,
    pub alpha: f64,
    /// Sampled sup of `|f^(m)(z)| (1 - |z|^2)^alpha`.
    pub norm: f64,
    pub profile: Vec<f64>,
    pub tail: TailReading,
    pub rule: TailRule,
    pub verdict: BlochVerdict,
}

/// Sampled `sup |f^(m)(z)| (1 - |z|^2)^alpha` with its boundary profile.
pub fn bloch_norm(
    f: &AnalyticFunction,
    m: usize,
    alpha: f64,
    grid: &RingGrid,
    rule: &TailRule,
) -> Result<BlochReport> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(LabError::Contract(format!("weight exponent must be nonnegative, got {alpha}")));
    }
    let samples: Vec<(f64, f64)> = grid
        .points()
        .par_iter()
        .map(|&z| {
            let r = z.norm();
            (r, f.eval_unchecked(z, m).norm() * (1.0 - r * r).powf(alpha))
        })
        .collect();
    if samples.iter().any(|(_, v)| !v.is_finite()) {
        return Err(LabError::Domain("non-finite value on the sampling grid".into()));
    }
    let profile = BoundaryProfile::from_samples(samples);
    let tail = rule.read(&profile);
    Ok(BlochReport {
        m,
        alpha,
        norm: profile.sup(),
        profile: profile.values(),
        tail,
        rule: *rule,
        verdict: tail.trend.into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: String,
    pub p: f64,
    pub n: Option<usize>,
    pub r_cut: f64,
    pub norm: f64,
}
