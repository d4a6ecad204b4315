//! Kernel families `K_w^[i](z) = z^i / (1 - conj(w) z)^(gamma + i)`, the
//! Bergman reproducing kernels and their derivative versions, shifted
//! rising products and the associated alternating identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticFunction, TaylorPoly, C64};
use crate::error::{LabError, Result};
use crate::quadrature::{integrate_to_boundary, GradedSpec, QuadratureRule};
use crate::summation::{pairwise_sum, sorted_compensated_sum};

/// Default exponent: `4` for `p >= 2`, `3 + 2/p` below.
pub fn default_gamma(p: f64) -> f64 {
    if p >= 2.0 {
        4.0
    } else {
        3.0 + 2.0 / p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFamilySpec {
    pub gamma: f64,
    pub p: f64,
    pub i_max: usize,
    pub w_grid: Vec<C64>,
}

impl KernelFamilySpec {
    pub fn new(gamma: f64, p: f64, i_max: usize, w_grid: Vec<C64>) -> Result<Self> {
        check_gamma(gamma, p)?;
        for w in &w_grid {
            crate::analytic::check_in_disk(*w)?;
        }
        Ok(Self {
            gamma,
            p,
            i_max,
            w_grid,
        })
    }
}

fn check_gamma(gamma: f64, p: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(LabError::Contract(format!("exponent p must be positive, got {p}")));
    }
    if !(gamma > 1.0 + 2.0 / p) {
        return Err(LabError::Contract(format!(
            "gamma must exceed 1 + 2/p = {}, got {gamma}",
            1.0 + 2.0 / p
        )));
    }
    Ok(())
}

/// `K_w^[i]`.
pub fn kernel(w: C64, i: usize, gamma: f64) -> Result<AnalyticFunction> {
    if w.norm() >= 1.0 {
        return Err(LabError::Domain(format!("kernel parameter {w} outside the disk")));
    }
    AnalyticFunction::kernel(w, i, gamma + i as f64)
}

/// `(1 - |w|^2)^(gamma + i - 2/p) K_w^[i]`.
pub fn normalized_kernel(w: C64, i: usize, gamma: f64, p: f64) -> Result<AnalyticFunction> {
    let scale = (1.0 - w.norm_sqr()).powf(gamma + i as f64 - 2.0 / p);
    Ok(kernel(w, i, gamma)?.scaled(C64::new(scale, 0.0)))
}

/// `(i + 1)! z^i / (1 - conj(a) z)^(2 + i)`: reproduces `f^(i)(a)` in A^2.
pub fn reproducing_kernel(a: C64, i: usize) -> Result<AnalyticFunction> {
    if a.norm() >= 1.0 {
        return Err(LabError::Domain(format!("kernel parameter {a} outside the disk")));
    }
    let factorial: f64 = (1..=i + 1).map(|k| k as f64).product();
    Ok(AnalyticFunction::kernel(a, i, 2.0 + i as f64)?.scaled(C64::new(factorial, 0.0)))
}

/// Coefficient inner product `sum c_k conj(d_k) / (k + 1)`.
pub fn a2_inner(f: &TaylorPoly, g: &TaylorPoly) -> C64 {
    f.coeffs()
        .iter()
        .zip(g.coeffs())
        .enumerate()
        .map(|(k, (c, d))| c * d.conj() / (k as f64 + 1.0))
        .sum()
}

/// Whole-disk `int |f|^p dA` evaluated by cut extrapolation.
pub fn ap_integral_to_boundary(f: &AnalyticFunction, p: f64, quad: &BoundaryQuadrature) -> Result<f64> {
    quad.integrate(|z| f.eval_unchecked(z, 0).norm().powf(p))
}

/// Graded rule plus the cuts it is extrapolated over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryQuadrature {
    pub spec: GradedSpec,
    pub cuts: Vec<f64>,
}

impl BoundaryQuadrature {
    /// Four-cut extrapolation on a fine rule; relative accuracy near 1e-10
    /// for kernels with `|w| <= 0.99`.
    pub fn precise() -> Self {
        Self {
            spec: GradedSpec {
                radial_n: 16,
                angular_n: 64,
                angular_cap: 16384,
                r_cut: 0.9999,
                origin_levels: 4,
            },
            cuts: vec![0.999, 0.9999, 0.99999, 0.999999],
        }
    }

    /// Two-cut extrapolation with a coarser angular cap; enough for
    /// ratio windows, about a tenth of the cost.
    pub fn survey() -> Self {
        Self {
            spec: GradedSpec {
                radial_n: 12,
                angular_n: 32,
                angular_cap: 2048,
                r_cut: 0.9999,
                origin_levels: 4,
            },
            cuts: vec![0.9999, 0.99999],
        }
    }

    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(C64) -> f64 + Sync,
    {
        integrate_to_boundary(&self.spec, &self.cuts, f)
    }
}

/// `||K_w^[i]||_p (1 - |w|^2)^(gamma + i - 2/p)`.
pub fn kernel_norm_ratio(w: C64, i: usize, gamma: f64, p: f64, quad: &BoundaryQuadrature) -> Result<f64> {
    check_gamma(gamma, p)?;
    let f = normalized_kernel(w, i, gamma, p)?;
    Ok(ap_integral_to_boundary(&f, p, quad)?.max(0.0).powf(1.0 / p))
}

/// `||K_z^[i]||_2 (1 - |z|^2)^(1 + i)` for the reproducing kernels.
pub fn reproducing_norm_ratio(z: C64, i: usize, quad: &BoundaryQuadrature) -> Result<f64> {
    let f = reproducing_kernel(z, i)?;
    let norm = ap_integral_to_boundary(&f, 2.0, quad)?.sqrt();
    Ok(norm * (1.0 - z.norm_sqr()).powi(1 + i as i32))
}

/// `prod_{j=n}^{m} (beta + j)`.
pub fn gamma_product(beta: f64, n: usize, m: usize) -> Result<f64> {
    if m < n {
        return Err(LabError::Contract(format!("product range needs m >= n, got n={n}, m={m}")));
    }
    Ok((n..=m).map(|j| beta + j as f64).product())
}

fn gp(beta: f64, n: usize, m: usize) -> f64 {
    (n..=m).map(|j| beta + j as f64).product()
}

/// The individual terms whose sum is `b_j`.
pub fn bj_terms(beta: f64, n: usize, j: usize) -> Result<Vec<f64>> {
    if n == 0 || j >= n {
        return Err(LabError::Contract(format!("need n >= 1 and j < n, got n={n}, j={j}")));
    }
    let mut terms = vec![gp(beta, n, 2 * n - j)];
    for i in 1..=n - j {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(
            sign * crate::analytic::binomial(n + 1 - j, i) * gp(beta, n - i + 1, n) * gp(beta, n, 2 * n - i - j),
        );
    }
    let sign = if (n - j + 1) % 2 == 0 { 1.0 } else { -1.0 };
    terms.push(sign * gp(beta, j, n));
    Ok(terms)
}

/// `b_j` summed in increasing magnitude with compensation.
pub fn bj_residual(beta: f64, n: usize, j: usize) -> Result<f64> {
    Ok(sorted_compensated_sum(&bj_terms(beta, n, j)?))
}

/// `|b_j| / prod_{k=n}^{2n-j} (beta + k)`.
pub fn bj_relative(beta: f64, n: usize, j: usize) -> Result<f64> {
    Ok(bj_residual(beta, n, j)?.abs() / gp(beta, n, 2 * n - j))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BjRow {
    pub beta: f64,
    pub n: usize,
    pub j: usize,
    pub residual: f64,
    pub relative: f64,
}

pub fn bj_table(betas: &[f64], n_max: usize) -> Vec<BjRow> {
    let mut rows = Vec::new();
    for &beta in betas {
        for n in 1..=n_max {
            for j in 0..n {
                let residual = bj_residual(beta, n, j).expect("indices in range");
                rows.push(BjRow {
                    beta,
                    n,
                    j,
                    residual,
                    relative: residual.abs() / gp(beta, n, 2 * n - j),
                });
            }
        }
    }
    rows
}

/// Kernel values `K_w^[i](z_k)`, `i = 0..=n`, at every node of a rule.
struct KernelTable {
    values: Vec<Vec<C64>>,
    norms: Vec<f64>,
}

impl KernelTable {
    fn new(w: C64, n: usize, gamma: f64, p: f64, rule: &QuadratureRule) -> Result<Self> {
        let fams: Vec<AnalyticFunction> = (0..=n).map(|i| kernel(w, i, gamma)).collect::<Result<_>>()?;
        let values: Vec<Vec<C64>> = fams
            .iter()
            .map(|f| rule.nodes().par_iter().map(|&z| f.eval_unchecked(z, 0)).collect())
            .collect();
        let norms = values.iter().map(|v| lp_of(v, p, rule)).collect();
        Ok(Self { values, norms })
    }

    fn ratio(&self, alphas: &[C64], p: f64, rule: &QuadratureRule) -> f64 {
        let combo: Vec<C64> = (0..rule.len())
            .map(|k| alphas.iter().zip(&self.values).map(|(a, v)| a * v[k]).sum())
            .collect();
        let den: f64 = alphas.iter().zip(&self.norms).map(|(a, n)| a.norm() * n).sum();
        lp_of(&combo, p, rule) / den
    }
}

fn lp_of(values: &[C64], p: f64, rule: &QuadratureRule) -> f64 {
    let prod: Vec<f64> = values
        .iter()
        .zip(rule.weights())
        .map(|(v, w)| v.norm().powf(p) * w)
        .collect();
    pairwise_sum(&prod).powf(1.0 / p)
}

/// `||sum alpha_i K_w^[i]||_p / sum |alpha_i| ||K_w^[i]||_p`.
pub fn combination_lower_ratio(
    w: C64,
    alphas: &[C64],
    gamma: f64,
    p: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if alphas.is_empty() || alphas.iter().any(|a| a.norm() == 0.0) {
        return Err(LabError::Contract("coefficients must be nonzero".into()));
    }
    check_gamma(gamma, p)?;
    let table = KernelTable::new(w, alphas.len() - 1, gamma, p, rule)?;
    Ok(table.ratio(alphas, p, rule))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub w: C64,
    pub n: usize,
    /// Smallest ratio over the random coefficient draws.
    pub ratio: f64,
}

/// Minimum of [`combination_lower_ratio`] over `draws` seeded random unit
/// coefficient vectors for each `w` and each `n in 0..=n_max`.
pub fn combination_sweep(
    w_grid: &[C64],
    n_max: usize,
    draws: usize,
    gamma: f64,
    p: f64,
    rule: &QuadratureRule,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    check_gamma(gamma, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &w in w_grid {
        let table = KernelTable::new(w, n_max, gamma, p, rule)?;
        for n in 0..=n_max {
            let mut worst = f64::INFINITY;
            for _ in 0..draws {
                let alphas: Vec<C64> = (0..=n)
                    .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                    .collect();
                worst = worst.min(table.ratio(&alphas, p, rule));
            }
            rows.push(SweepRow { w, n, ratio: worst });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| LabError::Io(e.to_string());
    wtr.write_record(["w_re", "w_im", "n", "ratio"]).map_err(io)?;
    for r in rows {
        wtr.write_record([r.w.re.to_string(), r.w.im.to_string(), r.n.to_string(), r.ratio.to_string()])
            .map_err(io)?;
    }
    wtr.flush().map_err(|e| LabError::Io(e.to_string()))
}
