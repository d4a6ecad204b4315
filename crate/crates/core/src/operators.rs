//! Generalized Volterra operators, sums of weighted differentiation
//! composition operators, their symbol tests, empirical norms and the
//! Hilbert–Schmidt machinery.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{falling, AnalyticFunction, FunctionSpec, SelfMap, SeriesConfig, TaylorPoly, C64};
use crate::carleson::{
    carleson_verdict, check_exponents, random_unit_polynomials, CarlesonReport, CarlesonVerdict,
    DiscreteMeasure, IntegralSettings,
};
use crate::error::{LabError, Result};
use crate::geometry::BergmanLattice;
use crate::kernels::{a2_inner, default_gamma, normalized_kernel, reproducing_kernel};
use crate::norms::{bloch_norm, BlochReport, BlochVerdict};
use crate::profile::{BoundaryProfile, TailReading, TailRule};
use crate::quadrature::{
    build_graded_rule, build_point_graded_rule, extrapolate_cuts, gauss_legendre, GradedSpec,
    QuadratureRule, RingGrid, BOUNDARY_CUTS,
};

const SERIES_TOL: f64 = 1e-14;
const ZERO_GAP: f64 = 1e-12;
/// Relative step a witness ratio must exceed to count as an increase.
const INCREASE_MARGIN: f64 = 1e-9;

/// Symbols `g_0, ..., g_{n-1}` of `f -> I^n(f g_0 + f' g_1 + ... + f^(n-1) g_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSpec {
    symbols: Vec<AnalyticFunction>,
    derivative_form: Option<(AnalyticFunction, Vec<C64>)>,
}

impl VolterraSpec {
    pub fn new(symbols: Vec<AnalyticFunction>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(LabError::Contract("a Volterra operator needs n >= 1 symbols".into()));
        }
        Ok(Self {
            symbols,
            derivative_form: None,
        })
    }

    /// Symbols `g_j = a_j g^(n - j)` built from a single `g`, `n = a.len()`.
    pub fn derivative_form(g: AnalyticFunction, a: Vec<C64>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(LabError::Contract("derivative form needs at least one coefficient".into()));
        }
        let symbols = a
            .iter()
            .enumerate()
            .map(|(j, &aj)| g.clone().differentiated(n - j).scaled(aj))
            .collect();
        Ok(Self {
            symbols,
            derivative_form: Some((g, a)),
        })
    }

    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[AnalyticFunction] {
        &self.symbols
    }

    pub fn derivative_form_parts(&self) -> Option<(&AnalyticFunction, &[C64])> {
        self.derivative_form.as_ref().map(|(g, a)| (g, a.as_slice()))
    }
}

/// Symbols `u_0, ..., u_n` and self-map `phi` of `f -> sum_k u_k f^(k)(phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionSumSpec {
    u: Vec<AnalyticFunction>,
    phi: SelfMap,
}

impl CompositionSumSpec {
    pub fn new(u: Vec<AnalyticFunction>, phi: SelfMap) -> Result<Self> {
        if u.is_empty() {
            return Err(LabError::Contract("at least the symbol u_0 is required".into()));
        }
        Ok(Self { u, phi })
    }

    pub fn n(&self) -> usize {
        self.u.len() - 1
    }

    pub fn symbols(&self) -> &[AnalyticFunction] {
        &self.u
    }

    pub fn phi(&self) -> &SelfMap {
        &self.phi
    }
}

/// Taylor truncation with dropped tail below `SERIES_TOL` (relative),
/// doubling the degree up to the cap.
fn truncate_adaptive(f: &AnalyticFunction, cfg: &SeriesConfig) -> Result<TaylorPoly> {
    if let AnalyticFunction::Taylor(p) = f {
        if p.degree() > cfg.max_degree {
            return Err(LabError::Config(format!(
                "polynomial of degree {} exceeds the cap {}",
                p.degree(),
                cfg.max_degree
            )));
        }
        return Ok(p.clone());
    }
    let mut degree = cfg.degree.max(1).min(cfg.max_degree);
    loop {
        let (p, tail) = f.to_taylor(degree);
        let scale = p.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        if tail <= SERIES_TOL * scale {
            return Ok(p);
        }
        if degree >= cfg.max_degree {
            return Err(LabError::Config(format!(
                "series tail {tail:.3e} still above tolerance at the degree cap {}",
                cfg.max_degree
            )));
        }
        degree = (2 * degree).min(cfg.max_degree);
    }
}

/// `I_g^(n) f` on Taylor data.
pub fn volterra_series(spec: &VolterraSpec, f: &TaylorPoly, cfg: &SeriesConfig) -> Result<TaylorPoly> {
    let mut h = TaylorPoly::zero();
    let mut fk = f.clone();
    for (k, g) in spec.symbols.iter().enumerate() {
        if k > 0 {
            fk = fk.derivative();
        }
        if g.is_identically_zero() || fk.is_zero() {
            continue;
        }
        let gp = truncate_adaptive(g, cfg)?;
        h = h.add(&gp.mul_truncated(&fk, cfg.degree));
    }
    for _ in 0..spec.n() {
        h = h.integrate_once(cfg)?;
    }
    Ok(h)
}

/// `I_g^(n) f` by series product and `n`-fold integration.
pub fn apply_volterra(spec: &VolterraSpec, f: &AnalyticFunction, cfg: &SeriesConfig) -> Result<AnalyticFunction> {
    let fp = truncate_adaptive(f, cfg)?;
    Ok(AnalyticFunction::Taylor(volterra_series(spec, &fp, cfg)?))
}

const SEGMENT_NODES: usize = 16;

fn segment_gauss() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(SEGMENT_NODES))
}

/// `(I_g^(n) f)(z) = z^n int_0^1 (1-t)^(n-1)/(n-1)! h(tz) dt`, `h = sum g_k f^(k)`,
/// with panels graded dyadically toward `t = 1` down to a fraction of `1 - |z|`.
pub fn volterra_at(spec: &VolterraSpec, f: &AnalyticFunction, z: C64) -> C64 {
    let n = spec.n();
    if z.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let floor = (1.0 - z.norm()).max(1e-15) / 8.0;
    let mut edges = vec![0.0, 0.5];
    let mut gap = 0.5;
    while gap > floor {
        gap *= 0.5;
        edges.push(1.0 - gap);
    }
    edges.push(1.0);
    let gl = segment_gauss();
    let mut derivs = vec![C64::new(0.0, 0.0); n];
    let mut acc = C64::new(0.0, 0.0);
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        for &(x, w) in gl {
            let t = mid + half * x;
            let zeta = z * t;
            f.derivatives_into(zeta, &mut derivs);
            let h: C64 = spec
                .symbols
                .iter()
                .zip(&derivs)
                .filter(|(g, _)| !g.is_identically_zero())
                .map(|(g, d)| g.eval_unchecked(zeta, 0) * d)
                .sum();
            acc += h * (half * w * (1.0 - t).powi(n as i32 - 1));
        }
    }
    let fact: f64 = (1..n).map(|k| k as f64).product();
    acc * z.powu(n as u32) / fact
}

/// `sum_k u_k(z) f^(k)(phi(z))`.
pub fn comp_sum_at(spec: &CompositionSumSpec, f: &AnalyticFunction, z: C64) -> Result<C64> {
    let w = spec.phi.image(z)?;
    let mut derivs = vec![C64::new(0.0, 0.0); spec.u.len()];
    f.derivatives_into(w, &mut derivs);
    Ok(spec
        .u
        .iter()
        .zip(&derivs)
        .filter(|(u, _)| !u.is_identically_zero())
        .map(|(u, d)| u.eval_unchecked(z, 0) * d)
        .sum())
}

/// `L f` at each of `points`.
pub fn apply_comp_sum(spec: &CompositionSumSpec, f: &AnalyticFunction, points: &[C64]) -> Result<Vec<C64>> {
    points.par_iter().map(|&z| comp_sum_at(spec, f, z)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SymbolVerdict {
    Bounded,
    Compact,
    /// Symbol below the order threshold, and it is indeed zero.
    MustBeZero,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OperatorVerdict {
    Compact,
    Bounded,
    Fail,
}

/// Integral evaluated at two truncation radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StableIntegral {
    pub exponent: f64,
    pub by_cut: Vec<f64>,
    pub value: f64,
    pub relative_change: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableIntegralSettings {
    pub spec: GradedSpec,
    pub cuts: (f64, f64),
    pub tolerance: f64,
}

impl Default for StableIntegralSettings {
    fn default() -> Self {
        Self {
            spec: GradedSpec {
                radial_n: 12,
                angular_n: 32,
                angular_cap: 16384,
                r_cut: 0.999,
                origin_levels: 4,
            },
            cuts: (0.99, 0.999),
            tolerance: 0.05,
        }
    }
}

fn stable_integral<F>(exponent: f64, settings: &StableIntegralSettings, f: F) -> Result<StableIntegral>
where
    F: Fn(C64) -> f64 + Sync,
{
    let va = build_graded_rule(&settings.spec.with_r_cut(settings.cuts.0))?.integrate_fn(&f);
    let vb = build_graded_rule(&settings.spec.with_r_cut(settings.cuts.1))?.integrate_fn(&f);
    let relative_change = if vb == 0.0 && va == 0.0 {
        0.0
    } else {
        (vb - va).abs() / vb.abs().max(f64::MIN_POSITIVE)
    };
    Ok(StableIntegral {
        exponent,
        by_cut: vec![va, vb],
        value: vb,
        relative_change,
        stable: vb.is_finite() && relative_change <= settings.tolerance,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolReport {
    pub k: usize,
    /// `n - k - (2/p - 2/q)`, the weight exponent of the test.
    pub order_gap: f64,
    pub bloch: Option<BlochReport>,
    pub integral: Option<StableIntegral>,
    pub verdict: SymbolVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub test: String,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub symbols: Vec<SymbolReport>,
    /// `int |g|^(pq/(p-q)) dA` when the operator was given in derivative form.
    pub derivative_form_integral: Option<StableIntegral>,
    pub bounded: bool,
    pub compact: bool,
    pub verdict: OperatorVerdict,
}

fn summarize(symbols: &[SymbolReport]) -> (bool, bool) {
    let bounded = symbols.iter().all(|s| s.verdict != SymbolVerdict::Fail);
    let compact = symbols
        .iter()
        .all(|s| matches!(s.verdict, SymbolVerdict::Compact | SymbolVerdict::MustBeZero));
    (bounded, compact)
}

fn verdict_of(bounded: bool, compact: bool) -> OperatorVerdict {
    match (bounded, compact) {
        (false, _) => OperatorVerdict::Fail,
        (true, true) => OperatorVerdict::Compact,
        (true, false) => OperatorVerdict::Bounded,
    }
}

/// Bloch-type symbol test for `p <= q`: `g_k` must vanish when
/// `n - k < 2/p - 2/q`, otherwise lie in the Bloch-type space with weight
/// `n - k - 2/p + 2/q`; compactness needs the little space and `g_k = 0`
/// at equality.
pub fn volterra_bloch_criterion(
    spec: &VolterraSpec,
    p: f64,
    q: f64,
    grid: &RingGrid,
    rule: &TailRule,
) -> Result<CriterionReport> {
    check_exponents(p, q)?;
    if p > q {
        return Err(LabError::Regime(format!("Bloch-type test needs p <= q, got p={p}, q={q}")));
    }
    let tau = 2.0 / p - 2.0 / q;
    let n = spec.n();
    let mut symbols = Vec::with_capacity(n);
    for (k, g) in spec.symbols.iter().enumerate() {
        let gap = (n - k) as f64 - tau;
        let zero = g.is_identically_zero();
        let (bloch, verdict) = if gap < -ZERO_GAP {
            (None, if zero { SymbolVerdict::MustBeZero } else { SymbolVerdict::Fail })
        } else if zero {
            (None, SymbolVerdict::Compact)
        } else {
            let rep = bloch_norm(g, 0, gap.max(0.0), grid, rule)?;
            let v = match rep.verdict {
                BlochVerdict::Little if gap > ZERO_GAP => SymbolVerdict::Compact,
                BlochVerdict::Little | BlochVerdict::BigOnly => SymbolVerdict::Bounded,
                BlochVerdict::Unbounded => SymbolVerdict::Fail,
            };
            (Some(rep), v)
        };
        symbols.push(SymbolReport {
            k,
            order_gap: gap,
            bloch,
            integral: None,
            verdict,
        });
    }
    let (bounded, compact) = summarize(&symbols);
    Ok(CriterionReport {
        test: "bloch".into(),
        p,
        q,
        n,
        symbols,
        derivative_form_integral: None,
        bounded,
        compact,
        verdict: verdict_of(bounded, compact),
    })
}

/// Integral symbol test for `q < p`:
/// `int |g_k (1 - |z|^2)^(n-k)|^(pq/(p-q)) dA < infinity` for every `k`,
/// read as stability under refinement of the truncation radius. Boundedness
/// and compactness coincide here.
pub fn volterra_integral_criterion(
    spec: &VolterraSpec,
    p: f64,
    q: f64,
    settings: &StableIntegralSettings,
) -> Result<CriterionReport> {
    check_exponents(p, q)?;
    if q >= p {
        return Err(LabError::Regime(format!("integral test needs q < p, got p={p}, q={q}")));
    }
    let s = p * q / (p - q);
    let n = spec.n();
    let mut symbols = Vec::with_capacity(n);
    for (k, g) in spec.symbols.iter().enumerate() {
        let (integral, verdict) = if g.is_identically_zero() {
            (None, SymbolVerdict::Compact)
        } else {
            let w = (n - k) as i32;
            let int = stable_integral(s, settings, |z| {
                (g.eval_unchecked(z, 0).norm() * (1.0 - z.norm_sqr()).powi(w)).powf(s)
            })?;
            let v = if int.stable { SymbolVerdict::Compact } else { SymbolVerdict::Fail };
            (Some(int), v)
        };
        symbols.push(SymbolReport {
            k,
            order_gap: (n - k) as f64,
            bloch: None,
            integral,
            verdict,
        });
    }
    let derivative_form_integral = match &spec.derivative_form {
        Some((g, _)) => Some(stable_integral(s, settings, |z| g.eval_unchecked(z, 0).norm().powf(s))?),
        None => None,
    };
    let (bounded, compact) = summarize(&symbols);
    Ok(CriterionReport {
        test: "integral".into(),
        p,
        q,
        n,
        symbols,
        derivative_form_integral,
        bounded,
        compact,
        verdict: if bounded { OperatorVerdict::Bounded } else { OperatorVerdict::Fail },
    })
}

/// Test for `f -> int_0^z f g'` with `p <= q`, `2/p - 2/q < 1`: `g'` in the
/// Bloch-type space of weight `1 - 2/p + 2/q`.
pub fn classical_volterra_criterion(
    g: &AnalyticFunction,
    p: f64,
    q: f64,
    grid: &RingGrid,
    rule: &TailRule,
) -> Result<CriterionReport> {
    check_exponents(p, q)?;
    if p > q {
        return Err(LabError::Regime(format!("classical test needs p <= q, got p={p}, q={q}")));
    }
    let tau = 2.0 / p - 2.0 / q;
    if tau >= 1.0 {
        return Err(LabError::OutOfScope(format!(
            "classical test needs 2/p - 2/q < 1, got {tau}"
        )));
    }
    let rep = bloch_norm(g, 1, 1.0 - tau, grid, rule)?;
    let verdict = match rep.verdict {
        BlochVerdict::Little => SymbolVerdict::Compact,
        BlochVerdict::BigOnly => SymbolVerdict::Bounded,
        BlochVerdict::Unbounded => SymbolVerdict::Fail,
    };
    let symbols = vec![SymbolReport {
        k: 0,
        order_gap: 1.0 - tau,
        bloch: Some(rep),
        integral: None,
        verdict,
    }];
    let (bounded, compact) = summarize(&symbols);
    Ok(CriterionReport {
        test: "classical".into(),
        p,
        q,
        n: 1,
        symbols,
        derivative_form_integral: None,
        bounded,
        compact,
        verdict: verdict_of(bounded, compact),
    })
}

/// Either operator family, for routines that only need pointwise action.
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    Volterra(&'a VolterraSpec),
    CompositionSum(&'a CompositionSumSpec),
}

impl Operator<'_> {
    pub fn apply_at(&self, f: &AnalyticFunction, z: C64) -> Result<C64> {
        match self {
            Operator::Volterra(s) => Ok(volterra_at(s, f, z)),
            Operator::CompositionSum(s) => comp_sum_at(s, f, z),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Operator::Volterra(s) => s.symbols.iter().all(|g| g.is_identically_zero()),
            Operator::CompositionSum(s) => s.u.iter().all(|u| u.is_identically_zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSettings {
    /// Witnesses `w_m = (1 - 2^-m) zeta` for `m = 1..=levels`.
    pub levels: usize,
    pub boundary_point: C64,
    pub radial_n: usize,
    pub angular_n: usize,
    pub rule_levels: usize,
    pub random_count: usize,
    pub random_degree: usize,
    pub seed: u64,
    pub gamma: Option<f64>,
    pub rule: TailRule,
}

impl Default for EmpiricalSettings {
    fn default() -> Self {
        Self {
            levels: 8,
            boundary_point: C64::new(1.0, 0.0),
            radial_n: 8,
            angular_n: 32,
            rule_levels: 30,
            random_count: 8,
            random_degree: 10,
            seed: 11,
            gamma: None,
            rule: TailRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub m: usize,
    pub w: C64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub p: f64,
    pub q: f64,
    pub family: String,
    pub witnesses: Vec<WitnessRow>,
    pub random_max: f64,
    /// Max of `||T f||_q / ||f||_p` over the family; a lower bound for the norm.
    pub estimate: f64,
    pub strictly_increasing: bool,
    pub tail: TailReading,
    pub rule: TailRule,
    /// Witness ratios strictly increase along `w -> zeta`; saturating
    /// families level off or decrease, so this separates the cases.
    pub grows: bool,
}

fn lp_norm_values(values: &[C64], p: f64, rule: &QuadratureRule) -> Result<f64> {
    let powered: Vec<f64> = values.iter().map(|v| v.norm().powf(p)).collect();
    Ok(rule.integrate_real(&powered)?.powf(1.0 / p))
}

fn ratio_on(op: Operator<'_>, f: &AnalyticFunction, p: f64, q: f64, rule: &QuadratureRule) -> Result<f64> {
    let fv = f.values_on(rule, 0);
    let denom = lp_norm_values(&fv, p, rule)?;
    if op.is_zero() {
        return Ok(0.0);
    }
    let tv: Vec<C64> = rule
        .nodes()
        .par_iter()
        .map(|&z| op.apply_at(f, z))
        .collect::<Result<_>>()?;
    Ok(lp_norm_values(&tv, q, rule)? / denom)
}

/// Lower estimate of the operator norm `A^p -> A^q` over boundary witnesses
/// and seeded random unit polynomials. Witnesses are normalized kernels for
/// `p <= q` and boundary powers `(1 - conj(w) z)^(-2/p)` for `q < p`.
pub fn empirical_operator_norm(
    op: Operator<'_>,
    p: f64,
    q: f64,
    settings: &EmpiricalSettings,
) -> Result<EmpiricalReport> {
    check_exponents(p, q)?;
    let zeta = settings.boundary_point;
    let rule = build_point_graded_rule(zeta, settings.radial_n, settings.angular_n, settings.rule_levels)?;
    let gamma = settings.gamma.unwrap_or_else(|| default_gamma(p));
    let family = if p <= q { "normalized_kernel" } else { "boundary_power" };
    let mut witnesses = Vec::with_capacity(settings.levels);
    for m in 1..=settings.levels {
        let w = zeta * (1.0 - 0.5f64.powi(m as i32));
        let f = if p <= q {
            normalized_kernel(w, 0, gamma, p)?
        } else {
            AnalyticFunction::kernel(w, 0, 2.0 / p)?
        };
        witnesses.push(WitnessRow {
            m,
            w,
            ratio: ratio_on(op, &f, p, q, &rule)?,
        });
    }
    let mut random_max = 0.0f64;
    for f in random_unit_polynomials(settings.random_count, settings.random_degree, p, &rule, settings.seed)? {
        random_max = random_max.max(ratio_on(op, &f, p, q, &rule)?);
    }
    let strictly_increasing = witnesses
        .windows(2)
        .all(|w| w[1].ratio > w[0].ratio * (1.0 + INCREASE_MARGIN));
    let profile = BoundaryProfile::from_samples(witnesses.iter().map(|r| (r.w.norm(), r.ratio)));
    let tail = settings.rule.read(&profile);
    let estimate = witnesses.iter().map(|r| r.ratio).fold(random_max, f64::max);
    Ok(EmpiricalReport {
        p,
        q,
        family: family.into(),
        witnesses,
        random_max,
        estimate,
        strictly_increasing,
        tail,
        rule: settings.rule,
        grows: strictly_increasing,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HsSettings {
    pub basis_size: usize,
    pub spec: GradedSpec,
    /// Truncation radii extrapolated to the boundary; the relative change
    /// between the last two doubles as the stability check.
    pub cuts: Vec<f64>,
    pub tolerance: f64,
    /// The basis sum counts as convergent when the tail ratio is below this.
    pub max_tail_ratio: f64,
    pub adjoint_samples: usize,
    pub adjoint_radius: f64,
    pub adjoint_degree: usize,
    pub seed: u64,
}

impl Default for HsSettings {
    fn default() -> Self {
        Self {
            basis_size: 64,
            spec: GradedSpec {
                angular_cap: 2048,
                ..GradedSpec::default()
            },
            cuts: vec![BOUNDARY_CUTS.0, BOUNDARY_CUTS.1],
            tolerance: 0.05,
            max_tail_ratio: 0.999,
            adjoint_samples: 50,
            adjoint_radius: 0.7,
            adjoint_degree: 256,
            seed: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HsIntegral {
    pub j: usize,
    pub by_cut: Vec<f64>,
    pub value: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HsReport {
    pub basis_size: usize,
    /// `||L e_k||_2^2` for the orthonormal basis `e_k = sqrt(k+1) z^k`.
    pub basis_terms: Vec<f64>,
    pub basis_sum: f64,
    /// Geometric-mean ratio of consecutive terms over the last eight.
    pub tail_ratio: f64,
    pub basis_converges: bool,
    pub integrals: Vec<HsIntegral>,
    pub integrals_stable: bool,
    pub hilbert_schmidt: bool,
    pub agree: bool,
    pub adjoint_samples: usize,
    pub adjoint_max_residual: f64,
}

/// Per-node accumulation of several integrands at every cut.
fn integrate_many<F>(settings: &HsSettings, count: usize, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(C64, &mut [f64]) + Sync,
{
    let mut by_cut = Vec::with_capacity(settings.cuts.len());
    for &cut in &settings.cuts {
        let rule = build_graded_rule(&settings.spec.with_r_cut(cut))?;
        let sums = rule
            .nodes()
            .par_iter()
            .zip(rule.weights().par_iter())
            .fold(
                || (vec![0.0; count], vec![0.0; count]),
                |(mut acc, mut buf), (&z, &w)| {
                    f(z, &mut buf);
                    for (a, b) in acc.iter_mut().zip(&buf) {
                        *a += w * b;
                    }
                    (acc, buf)
                },
            )
            .map(|(acc, _)| acc)
            .reduce(
                || vec![0.0; count],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        by_cut.push(sums);
    }
    // transpose to per-integrand rows
    Ok((0..count).map(|i| by_cut.iter().map(|v| v[i]).collect()).collect())
}

fn relative_change(values: &[f64]) -> f64 {
    match values {
        [.., a, b] if *a != 0.0 || *b != 0.0 => (b - a).abs() / b.abs().max(f64::MIN_POSITIVE),
        _ => 0.0,
    }
}

/// Basis sum, integral statistics and adjoint check for `p = q = 2`.
pub fn hilbert_schmidt_check(spec: &CompositionSumSpec, settings: &HsSettings) -> Result<HsReport> {
    let n = spec.n();
    let kmax = settings.basis_size;
    let u = &spec.u;
    let phi = spec.phi.function();

    let basis_rows = integrate_many(settings, kmax, |z, out| {
        let w = phi.eval_unchecked(z, 0);
        let uz: Vec<C64> = u.iter().map(|f| f.eval_unchecked(z, 0)).collect();
        // powers w^m for m < kmax
        let mut pw = Vec::with_capacity(kmax);
        let mut acc = C64::new(1.0, 0.0);
        for _ in 0..kmax {
            pw.push(acc);
            acc *= w;
        }
        for (k, slot) in out.iter_mut().enumerate() {
            let mut v = C64::new(0.0, 0.0);
            for (j, uj) in uz.iter().enumerate().take(n.min(k) + 1) {
                v += uj * pw[k - j] * falling(k, j);
            }
            *slot = v.norm_sqr() * (k as f64 + 1.0);
        }
    })?;
    let basis_terms: Vec<f64> = basis_rows
        .iter()
        .map(|row| extrapolate_cuts(&settings.cuts, row).max(0.0))
        .collect();
    let basis_sum: f64 = basis_terms.iter().sum();
    let tail_ratio = if kmax >= 9 && basis_terms[kmax - 9] > 0.0 {
        (basis_terms[kmax - 1] / basis_terms[kmax - 9]).powf(1.0 / 8.0)
    } else {
        0.0
    };
    let basis_converges = tail_ratio < settings.max_tail_ratio;

    let int_rows = integrate_many(settings, n + 1, |z, out| {
        let w = phi.eval_unchecked(z, 0);
        let base = 1.0 - w.norm_sqr();
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = u[j].eval_unchecked(z, 0).norm_sqr() / base.powi(2 + 2 * j as i32);
        }
    })?;
    let integrals: Vec<HsIntegral> = int_rows
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let value = extrapolate_cuts(&settings.cuts, &row);
            let stable = value.is_finite() && relative_change(&row) <= settings.tolerance;
            HsIntegral {
                j,
                by_cut: row,
                value,
                stable,
            }
        })
        .collect();
    let integrals_stable = integrals.iter().all(|i| i.stable);

    let adjoint_max_residual = adjoint_residuals(spec, settings)?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(HsReport {
        basis_size: kmax,
        basis_terms,
        basis_sum,
        tail_ratio,
        basis_converges,
        integrals,
        integrals_stable,
        hilbert_schmidt: basis_converges && integrals_stable,
        agree: basis_converges == integrals_stable,
        adjoint_samples: settings.adjoint_samples,
        adjoint_max_residual,
    })
}

/// Relative residuals of `<L f, K_z> = <f, sum_j conj(u_j(z)) K^[j]_phi(z)>`
/// at seeded random polynomial `f` and points `z`, computed on coefficients.
pub fn adjoint_residuals(spec: &CompositionSumSpec, settings: &HsSettings) -> Result<Vec<f64>> {
    let d = settings.adjoint_degree;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let phi_t = spec.phi.function().to_taylor(d).0;
    let u_t: Vec<TaylorPoly> = spec.u.iter().map(|f| f.to_taylor(d).0).collect();
    let mut out = Vec::with_capacity(settings.adjoint_samples);
    for _ in 0..settings.adjoint_samples {
        let coeffs: Vec<C64> = (0..=8)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let f = TaylorPoly::new(coeffs)?;
        let radius = settings.adjoint_radius * rng.random::<f64>().sqrt();
        let z = C64::from_polar(radius, rng.random::<f64>() * std::f64::consts::TAU);

        // L f as a series
        let mut lf = TaylorPoly::zero();
        let mut fj = f.clone();
        for (j, uj) in u_t.iter().enumerate() {
            if j > 0 {
                fj = fj.derivative();
            }
            let mut comp = TaylorPoly::zero();
            for c in fj.coeffs().iter().rev() {
                comp = comp.mul_truncated(&phi_t, d).add(&TaylorPoly::monomial(0, *c));
            }
            lf = lf.add(&uj.mul_truncated(&comp, d));
        }
        let kz = reproducing_kernel(z, 0)?.to_taylor(d).0;
        let lhs = a2_inner(&lf, &kz);

        let w = spec.phi.image(z)?;
        let mut adj = TaylorPoly::zero();
        for (j, uj) in spec.u.iter().enumerate() {
            let kj = reproducing_kernel(w, j)?.to_taylor(d).0;
            adj = adj.add(&kj.scale(uj.eval_unchecked(z, 0).conj()));
        }
        let rhs = a2_inner(&f, &adj);
        let scale = lhs.norm().max(rhs.norm());
        out.push(if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigiditySettings {
    /// Rule whose nodes are pushed forward by `phi`.
    pub pullback: GradedSpec,
    pub rule: TailRule,
    pub integral: IntegralSettings,
    pub empirical: EmpiricalSettings,
}

impl Default for RigiditySettings {
    fn default() -> Self {
        Self {
            pullback: GradedSpec {
                radial_n: 24,
                angular_n: 64,
                angular_cap: 4096,
                r_cut: 0.9999,
                origin_levels: 4,
            },
            rule: TailRule::default(),
            integral: IntegralSettings::default(),
            empirical: EmpiricalSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityReport {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub components: Vec<CarlesonReport>,
    pub carleson_verdict: CarlesonVerdict,
    pub empirical: EmpiricalReport,
    /// Diverging Carleson verdict exactly when the empirical norms grow.
    pub agree: bool,
}

/// Push-forward of `|u|^q dA` under `phi`, discretized on `rule`.
pub fn pullback_measure(
    u: &AnalyticFunction,
    phi: &SelfMap,
    q: f64,
    rule: &QuadratureRule,
) -> Result<DiscreteMeasure> {
    let atoms: Vec<(C64, f64)> = rule
        .nodes()
        .par_iter()
        .zip(rule.weights().par_iter())
        .map(|(&z, &w)| Ok((phi.image(z)?, w * u.eval_unchecked(z, 0).norm().powf(q))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|a| a.1 > 0.0)
        .collect();
    DiscreteMeasure::from_atoms(atoms)
}

/// Per-symbol Carleson verdicts of the pull-back measures against the
/// empirical norm behavior of the whole sum.
pub fn composition_sum_rigidity(
    spec: &CompositionSumSpec,
    p: f64,
    q: f64,
    lattice: &BergmanLattice,
    settings: &RigiditySettings,
) -> Result<RigidityReport> {
    check_exponents(p, q)?;
    let rule = build_graded_rule(&settings.pullback)?;
    let mut components = Vec::with_capacity(spec.u.len());
    for (k, uk) in spec.u.iter().enumerate() {
        let mu = pullback_measure(uk, &spec.phi, q, &rule)?;
        components.push(carleson_verdict(&mu, k, p, q, lattice, &settings.rule, &settings.integral)?);
    }
    let carleson = components
        .iter()
        .map(|c| c.verdict)
        .max()
        .unwrap_or(CarlesonVerdict::Vanishing);
    let empirical = empirical_operator_norm(Operator::CompositionSum(spec), p, q, &settings.empirical)?;
    Ok(RigidityReport {
        p,
        q,
        n: spec.n(),
        agree: (carleson == CarlesonVerdict::Diverging) == empirical.grows,
        components,
        carleson_verdict: carleson,
        empirical,
    })
}

/// JSON form of an operator; `n` is optional and checked when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorFile {
    Volterra {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        symbols: Vec<FunctionSpec>,
    },
    #[serde(alias = "chalmoukis")]
    DerivativeForm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        g: FunctionSpec,
        a: Vec<[f64; 2]>,
    },
    #[serde(rename = "compsum")]
    CompositionSum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        symbols: Vec<FunctionSpec>,
        phi: FunctionSpec,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Volterra(VolterraSpec),
    CompositionSum(CompositionSumSpec),
}

fn check_order(declared: Option<usize>, actual: usize) -> Result<()> {
    match declared {
        Some(n) if n != actual => Err(LabError::Input(format!("declared n = {n} but the symbols give n = {actual}"))),
        _ => Ok(()),
    }
}

impl OperatorSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: OperatorFile = serde_json::from_str(text).map_err(|e| LabError::Input(e.to_string()))?;
        let conv = |specs: &[FunctionSpec]| -> Result<Vec<AnalyticFunction>> {
            specs.iter().map(AnalyticFunction::try_from).collect()
        };
        let spec = match &file {
            OperatorFile::Volterra { n, symbols } => {
                let s = VolterraSpec::new(conv(symbols)?)?;
                check_order(*n, s.n())?;
                OperatorSpec::Volterra(s)
            }
            OperatorFile::DerivativeForm { n, g, a } => {
                let s = VolterraSpec::derivative_form(
                    AnalyticFunction::try_from(g)?,
                    a.iter().map(|v| C64::new(v[0], v[1])).collect(),
                )?;
                check_order(*n, s.n())?;
                OperatorSpec::Volterra(s)
            }
            OperatorFile::CompositionSum { n, symbols, phi } => {
                let s = CompositionSumSpec::new(conv(symbols)?, SelfMap::checked(AnalyticFunction::try_from(phi)?)?)?;
                check_order(*n, s.n())?;
                OperatorSpec::CompositionSum(s)
            }
        };
        Ok(spec)
    }

    pub fn as_operator(&self) -> Operator<'_> {
        match self {
            OperatorSpec::Volterra(s) => Operator::Volterra(s),
            OperatorSpec::CompositionSum(s) => Operator::CompositionSum(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(c: &[f64]) -> AnalyticFunction {
        AnalyticFunction::polynomial(c)
    }

    fn z(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pullback_keeps_mass_and_support() {
        let rule = build_graded_rule(&RigiditySettings::default().pullback).unwrap();
        let phi = SelfMap::checked(poly(&[0.0, 0.5])).unwrap();
        // int |1 + z|^2 dA = 1 + 1/2
        let mu = pullback_measure(&poly(&[1.0, 1.0]), &phi, 2.0, &rule).unwrap();
        assert_relative_eq!(mu.total_mass(), 1.5, max_relative = 1e-3);
        assert!(mu.atoms().iter().all(|(w, _)| w.norm() <= 0.5));
        let empty = pullback_measure(&AnalyticFunction::zero(), &phi, 2.0, &rule).unwrap();
        assert!(empty.atoms().is_empty());
    }

    #[test]
    fn volterra_series_examples() {
        let cfg = SeriesConfig::default();
        let one = poly(&[1.0]);
        let s = VolterraSpec::new(vec![poly(&[0.0, 2.0])]).unwrap();
        let out = apply_volterra(&s, &one, &cfg).unwrap();
        assert_relative_eq!(out.eval_unchecked(z(0.3, 0.4), 0).re, -0.07, max_relative = 1e-14);
        assert_relative_eq!(out.eval_unchecked(z(0.3, 0.4), 0).im, 0.24, max_relative = 1e-14);

        let zero = VolterraSpec::new(vec![AnalyticFunction::zero(), AnalyticFunction::zero()]).unwrap();
        assert!(apply_volterra(&zero, &poly(&[1.0, 2.0, 3.0]), &cfg).unwrap().is_identically_zero());

        let two = VolterraSpec::new(vec![poly(&[1.0]), AnalyticFunction::zero()]).unwrap();
        let AnalyticFunction::Taylor(p) = apply_volterra(&two, &one, &cfg).unwrap() else {
            panic!("series result")
        };
        assert_eq!(p.degree(), 2);
        assert_relative_eq!(p.coeff(2).re, 0.5);
    }

    #[test]
    fn series_and_segment_routes_agree() {
        let cfg = SeriesConfig::default();
        let s = VolterraSpec::new(vec![poly(&[0.5, -1.0, 0.25]), poly(&[0.0, 0.3])]).unwrap();
        let f = AnalyticFunction::kernel(z(0.4, 0.2), 1, 3.0).unwrap();
        let series = apply_volterra(&s, &f, &cfg).unwrap();
        for &pt in &[z(0.5, 0.1), z(-0.3, 0.6), z(0.0, -0.8)] {
            let a = series.eval_unchecked(pt, 0);
            let b = volterra_at(&s, &f, pt);
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn volterra_output_vanishes_to_order_n_and_recovers_integrand() {
        let cfg = SeriesConfig::default();
        let g = vec![poly(&[1.0, 2.0]), poly(&[0.0, 0.0, -1.0]), poly(&[3.0])];
        let s = VolterraSpec::new(g.clone()).unwrap();
        let f = poly(&[0.2, -0.5, 1.0, 0.1]);
        let out = apply_volterra(&s, &f, &cfg).unwrap();
        for j in 0..3 {
            assert!(out.eval_unchecked(z(0.0, 0.0), j).norm() < 1e-15);
        }
        let pt = z(0.3, -0.2);
        let want: C64 = (0..3).map(|k| g[k].eval_unchecked(pt, 0) * f.eval_unchecked(pt, k)).sum();
        assert!((out.eval_unchecked(pt, 3) - want).norm() < 1e-13);
    }

    #[test]
    fn derivative_form_matches_expanded_symbols() {
        let cfg = SeriesConfig::default();
        let g = poly(&[0.1, 0.4, -0.3, 0.2, 0.05]);
        let a = vec![z(1.0, 0.5), z(-2.0, 0.0)];
        let form = VolterraSpec::derivative_form(g.clone(), a.clone()).unwrap();
        let expanded = VolterraSpec::new(vec![
            g.clone().differentiated(2).scaled(a[0]),
            g.clone().differentiated(1).scaled(a[1]),
        ])
        .unwrap();
        let f = poly(&[1.0, -1.0, 0.5]);
        let x = apply_volterra(&form, &f, &cfg).unwrap();
        let y = apply_volterra(&expanded, &f, &cfg).unwrap();
        let pt = z(0.6, 0.3);
        assert!((x.eval_unchecked(pt, 0) - y.eval_unchecked(pt, 0)).norm() < 1e-15);
    }

    #[test]
    fn volterra_is_linear() {
        let cfg = SeriesConfig::default();
        let s = VolterraSpec::new(vec![poly(&[0.0, 1.0]), poly(&[2.0])]).unwrap();
        let f = poly(&[1.0, 2.0, -1.0]);
        let g = poly(&[0.0, -3.0, 0.0, 1.0]);
        let (a, b) = (z(0.7, -0.2), z(-1.1, 0.4));
        let combo = AnalyticFunction::Combination(vec![
            crate::analytic::Term { coeff: a, deriv: 0, func: f.clone() },
            crate::analytic::Term { coeff: b, deriv: 0, func: g.clone() },
        ]);
        let pt = z(0.2, 0.7);
        let lhs = apply_volterra(&s, &combo, &cfg).unwrap().eval_unchecked(pt, 0);
        let rhs = a * apply_volterra(&s, &f, &cfg).unwrap().eval_unchecked(pt, 0)
            + b * apply_volterra(&s, &g, &cfg).unwrap().eval_unchecked(pt, 0);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn truncation_cap_is_config_error() {
        let cfg = SeriesConfig {
            degree: 16,
            max_degree: 32,
        };
        let s = VolterraSpec::new(vec![AnalyticFunction::boundary_power(1.0).unwrap()]).unwrap();
        assert!(matches!(apply_volterra(&s, &poly(&[1.0]), &cfg), Err(LabError::Config(_))));
    }

    #[test]
    fn composition_sum_examples() {
        let pts = [z(0.3, 0.1), z(-0.5, 0.5), z(0.0, 0.0)];
        let id = CompositionSumSpec::new(vec![poly(&[1.0])], SelfMap::identity()).unwrap();
        let f = poly(&[0.5, 1.0, -2.0]);
        for (v, &p) in apply_comp_sum(&id, &f, &pts).unwrap().iter().zip(&pts) {
            assert!((v - f.eval_unchecked(p, 0)).norm() < 1e-15);
        }
        let half = SelfMap::checked(poly(&[0.0, 0.5])).unwrap();
        let s = CompositionSumSpec::new(vec![AnalyticFunction::zero(), poly(&[1.0])], half).unwrap();
        for (v, &p) in apply_comp_sum(&s, &poly(&[0.0, 0.0, 1.0]), &pts).unwrap().iter().zip(&pts) {
            assert!((v - p).norm() < 1e-15);
        }
        for v in apply_comp_sum(&s, &AnalyticFunction::zero(), &pts).unwrap() {
            assert_eq!(v, z(0.0, 0.0));
        }
    }

    #[test]
    fn regime_and_scope_errors() {
        let s = VolterraSpec::new(vec![poly(&[1.0])]).unwrap();
        let grid = RingGrid::default();
        let rule = TailRule::default();
        assert!(matches!(volterra_bloch_criterion(&s, 3.0, 2.0, &grid, &rule), Err(LabError::Regime(_))));
        assert!(matches!(
            volterra_integral_criterion(&s, 2.0, 2.0, &StableIntegralSettings::default()),
            Err(LabError::Regime(_))
        ));
        assert!(matches!(
            classical_volterra_criterion(&poly(&[0.0, 1.0]), 1.0, 4.0, &grid, &rule),
            Err(LabError::OutOfScope(_))
        ));
    }

    #[test]
    fn threshold_symbols_must_vanish() {
        // p = 1, q = 4: 2/p - 2/q = 1.5, so with n = 1 the symbol g_0 must be 0
        let grid = RingGrid::default();
        let rule = TailRule::default();
        let zero = VolterraSpec::new(vec![AnalyticFunction::zero()]).unwrap();
        let rep = volterra_bloch_criterion(&zero, 1.0, 4.0, &grid, &rule).unwrap();
        assert_eq!(rep.symbols[0].verdict, SymbolVerdict::MustBeZero);
        assert_eq!(rep.verdict, OperatorVerdict::Compact);
        let one = VolterraSpec::new(vec![poly(&[1.0])]).unwrap();
        let rep = volterra_bloch_criterion(&one, 1.0, 4.0, &grid, &rule).unwrap();
        assert_eq!(rep.verdict, OperatorVerdict::Fail);
    }

    #[test]
    fn integral_test_on_constant_symbol() {
        let s = VolterraSpec::new(vec![poly(&[1.0])]).unwrap();
        let rep = volterra_integral_criterion(&s, 2.0, 1.0, &StableIntegralSettings::default()).unwrap();
        let int = rep.symbols[0].integral.as_ref().unwrap();
        assert_relative_eq!(int.value, 1.0 / 3.0, max_relative = 1e-8);
        assert_eq!(rep.verdict, OperatorVerdict::Bounded);
        assert!(rep.compact);
    }

    #[test]
    fn identity_empirical_norm_is_one() {
        let id = CompositionSumSpec::new(vec![poly(&[1.0])], SelfMap::identity()).unwrap();
        let settings = EmpiricalSettings {
            levels: 4,
            random_count: 2,
            ..EmpiricalSettings::default()
        };
        let rep = empirical_operator_norm(Operator::CompositionSum(&id), 2.0, 2.0, &settings).unwrap();
        assert_relative_eq!(rep.estimate, 1.0, max_relative = 1e-12);
        assert!(!rep.grows);
        let zero = VolterraSpec::new(vec![AnalyticFunction::zero()]).unwrap();
        let rep = empirical_operator_norm(Operator::Volterra(&zero), 2.0, 2.0, &settings).unwrap();
        assert_eq!(rep.estimate, 0.0);
        assert!(!rep.strictly_increasing);
    }

    #[test]
    fn hilbert_schmidt_geometric_case() {
        let c = 0.5;
        let s = CompositionSumSpec::new(vec![poly(&[1.0])], SelfMap::checked(poly(&[0.0, c])).unwrap()).unwrap();
        let settings = HsSettings {
            adjoint_samples: 5,
            ..HsSettings::default()
        };
        let rep = hilbert_schmidt_check(&s, &settings).unwrap();
        assert_relative_eq!(rep.basis_sum, 4.0 / 3.0, max_relative = 1e-6);
        assert_relative_eq!(rep.integrals[0].value, 4.0 / 3.0, max_relative = 1e-6);
        assert!(rep.hilbert_schmidt && rep.agree);
        assert!(rep.adjoint_max_residual < 1e-10);

        let zero = CompositionSumSpec::new(vec![AnalyticFunction::zero()], SelfMap::identity()).unwrap();
        let rep = hilbert_schmidt_check(&zero, &settings).unwrap();
        assert_eq!(rep.basis_sum, 0.0);
    }

    #[test]
    fn identity_is_not_hilbert_schmidt() {
        let s = CompositionSumSpec::new(vec![poly(&[1.0])], SelfMap::identity()).unwrap();
        let settings = HsSettings {
            adjoint_samples: 0,
            ..HsSettings::default()
        };
        let rep = hilbert_schmidt_check(&s, &settings).unwrap();
        assert!(!rep.basis_converges);
        assert!(!rep.integrals_stable);
        assert!(!rep.hilbert_schmidt && rep.agree);
    }

    #[test]
    fn operator_json() {
        let v = OperatorSpec::from_json(
            r#"{"type":"derivative_form","g":{"kind":"taylor","coeffs":[[0,0],[0,0],[1,0]]},"a":[[1,0]]}"#,
        )
        .unwrap();
        let OperatorSpec::Volterra(s) = &v else { panic!("volterra") };
        assert_eq!(s.n(), 1);
        assert!(s.derivative_form_parts().is_some());
        let c = OperatorSpec::from_json(
            r#"{"type":"compsum","n":0,"symbols":[{"kind":"taylor","coeffs":[[1,0]]}],"phi":{"kind":"taylor","coeffs":[[0,0],[0.5,0]]}}"#,
        )
        .unwrap();
        assert!(matches!(c, OperatorSpec::CompositionSum(_)));
        let wrong_n = r#"{"type":"volterra","n":2,"symbols":[{"kind":"taylor","coeffs":[[1,0]]}]}"#;
        assert!(matches!(OperatorSpec::from_json(wrong_n), Err(LabError::Input(_))));
        assert!(matches!(OperatorSpec::from_json(r#"{"type":"nope"}"#), Err(LabError::Input(_))));
    }
}
