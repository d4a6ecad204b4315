//! Analytic functions on the unit disk.
//!
//! A function is either a truncated Taylor polynomial or one of a few closed
//! forms whose derivatives are known exactly:
//!
//! * power kernels `z^i / (1 - conj(w) z)^s`,
//! * logarithmic kernels `-log(1 - conj(w) z)`,
//! * finite combinations `sum_m a_m f_m^(d_m)` of the above.
//!
//! Closed forms are differentiated symbolically and never through a
//! truncation, so boundary behaviour of kernel-type symbols survives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quadrature::QuadratureRule;

pub type C64 = Complex64;

/// Working degree and hard cap for every series operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub degree: usize,
    pub max_degree: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            degree: 256,
            max_degree: 4096,
        }
    }
}

/// Truncated Taylor series `c_0 + c_1 z + ... + c_N z^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPoly {
    coeffs: Vec<C64>,
}

impl TaylorPoly {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(LabError::Input("non-finite Taylor coefficient".into()));
        }
        let coeffs = if coeffs.is_empty() {
            vec![C64::new(0.0, 0.0)]
        } else {
            coeffs
        };
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| C64::new(c, 0.0)).collect(),
        }
    }

    pub fn zero() -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0)],
        }
    }

    pub fn monomial(k: usize, c: C64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Index of the last stored coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Value of the `d`-th derivative at `z` (no domain check).
    pub fn eval_deriv(&self, z: C64, d: usize) -> C64 {
        if d > self.degree() {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for k in (d..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[k] * falling(k, d);
        }
        acc
    }

    pub fn derivative(&self) -> TaylorPoly {
        if self.coeffs.len() == 1 {
            return TaylorPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        TaylorPoly { coeffs }
    }

    /// Antiderivative vanishing at the origin.
    pub fn integrate_once(&self, cfg: &SeriesConfig) -> Result<TaylorPoly> {
        if self.degree() + 1 > cfg.max_degree {
            return Err(LabError::Config(format!(
                "integration raises degree to {} beyond cap {}",
                self.degree() + 1,
                cfg.max_degree
            )));
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Ok(TaylorPoly { coeffs })
    }

    pub fn add(&self, other: &TaylorPoly) -> TaylorPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        TaylorPoly { coeffs }
    }

    pub fn sub(&self, other: &TaylorPoly) -> TaylorPoly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: C64) -> TaylorPoly {
        TaylorPoly {
            coeffs: self.coeffs.iter().map(|&c| c * a).collect(),
        }
    }

    /// Product truncated to `degree`.
    pub fn mul_truncated(&self, other: &TaylorPoly, degree: usize) -> TaylorPoly {
        let n = (self.degree() + other.degree()).min(degree);
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        TaylorPoly { coeffs }
    }

    pub fn truncate(&self, degree: usize) -> TaylorPoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(degree + 1);
        TaylorPoly { coeffs }
    }

    /// Largest coefficient magnitude above `degree`.
    pub fn tail_above(&self, degree: usize) -> f64 {
        self.coeffs
            .iter()
            .skip(degree + 1)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// `z^power / (1 - conj(w) z)^exponent`.
///
/// `|w| < 1` gives the kernel family; `|w| = 1` is accepted as a
/// boundary-singular symbol such as `(1 - z)^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerKernel {
    w: C64,
    power: usize,
    exponent: f64,
}

impl PowerKernel {
    pub fn new(w: C64, power: usize, exponent: f64) -> Result<Self> {
        if !(w.re.is_finite() && w.im.is_finite()) || w.norm() > 1.0 + 1e-15 {
            return Err(LabError::Domain(format!(
                "kernel parameter |w| = {} outside the closed disk",
                w.norm()
            )));
        }
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(LabError::Input(format!(
                "kernel exponent must be positive, got {exponent}"
            )));
        }
        Ok(Self { w, power, exponent })
    }

    pub fn w(&self) -> C64 {
        self.w
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Fills `out[d]` with the `d`-th derivative at `z` for `d < out.len()`.
    pub fn derivatives_into(&self, z: C64, out: &mut [C64]) {
        let b = self.w.conj();
        let one_minus = C64::new(1.0, 0.0) - b * z;
        let inv = one_minus.inv();
        let s = self.exponent;
        // h_m = (s)_m b^m (1 - bz)^{-s-m}
        let mut h = Vec::with_capacity(out.len());
        let mut hm = (-s * one_minus.ln()).exp();
        for m in 0..out.len() {
            h.push(hm);
            hm = hm * (s + m as f64) * b * inv;
        }
        let i = self.power;
        for (d, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..=d.min(i) {
                let zpow = z.powu((i - l) as u32);
                acc += h[d - l] * zpow * (binomial(d, l) * falling(i, l));
            }
            *slot = acc;
        }
    }

    pub fn eval_deriv(&self, z: C64, d: usize) -> C64 {
        let mut out = vec![C64::new(0.0, 0.0); d + 1];
        self.derivatives_into(z, &mut out);
        out[d]
    }

    /// Taylor coefficient of `z^k`.
    fn coefficient_iter(&self) -> impl Iterator<Item = C64> + '_ {
        let b = self.w.conj();
        let s = self.exponent;
        let lead = std::iter::repeat_n(C64::new(0.0, 0.0), self.power);
        let body = (0usize..).scan(C64::new(1.0, 0.0), move |a, m| {
            let current = *a;
            *a = *a * b * ((s + m as f64) / (m as f64 + 1.0));
            Some(current)
        });
        lead.chain(body)
    }

    /// Smallest degree whose geometric tail bound on `|z| <= r_max` is below `tol`.
    pub fn degree_for_tolerance(&self, r_max: f64, tol: f64, cap: usize) -> Result<usize> {
        let q = self.w.norm() * r_max;
        if q >= 1.0 {
            return Err(LabError::Config(format!(
                "no finite truncation reaches tol {tol} with |w| r_max = {q}"
            )));
        }
        let s = self.exponent;
        let mut a = 1.0f64;
        let mut m = 0usize;
        loop {
            let ratio = (s + m as f64) / (m as f64 + 1.0) * q;
            if ratio < 1.0 && a * r_max.powi(self.power as i32) / (1.0 - ratio) <= tol {
                return Ok(self.power + m.saturating_sub(1));
            }
            a *= ratio;
            m += 1;
            if self.power + m > cap {
                return Err(LabError::Config(format!(
                    "kernel truncation needs more than {cap} coefficients"
                )));
            }
        }
    }
}

/// `-log(1 - conj(w) z)`; `|w| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogKernel {
    w: C64,
}

impl LogKernel {
    pub fn new(w: C64) -> Result<Self> {
        if !(w.re.is_finite() && w.im.is_finite()) || w.norm() > 1.0 + 1e-15 {
            return Err(LabError::Domain(format!(
                "log kernel parameter |w| = {} outside the closed disk",
                w.norm()
            )));
        }
        Ok(Self { w })
    }

    pub fn w(&self) -> C64 {
        self.w
    }

    pub fn eval_deriv(&self, z: C64, d: usize) -> C64 {
        let b = self.w.conj();
        let one_minus = C64::new(1.0, 0.0) - b * z;
        if d == 0 {
            return -one_minus.ln();
        }
        let fact: f64 = (1..d).map(|k| k as f64).product();
        b.powu(d as u32) * one_minus.inv().powu(d as u32) * fact
    }
}

/// One summand `coeff * func^(deriv)` of a combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub deriv: usize,
    pub func: AnalyticFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticFunction {
    Taylor(TaylorPoly),
    Kernel(PowerKernel),
    Log(LogKernel),
    Combination(Vec<Term>),
}

impl From<TaylorPoly> for AnalyticFunction {
    fn from(p: TaylorPoly) -> Self {
        AnalyticFunction::Taylor(p)
    }
}

impl From<PowerKernel> for AnalyticFunction {
    fn from(k: PowerKernel) -> Self {
        AnalyticFunction::Kernel(k)
    }
}

impl AnalyticFunction {
    pub fn zero() -> Self {
        TaylorPoly::zero().into()
    }

    pub fn constant(c: C64) -> Self {
        TaylorPoly::monomial(0, c).into()
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        TaylorPoly::from_real(coeffs).into()
    }

    pub fn kernel(w: C64, power: usize, exponent: f64) -> Result<Self> {
        Ok(PowerKernel::new(w, power, exponent)?.into())
    }

    /// `(1 - z)^{-s}`, the standard boundary-singular symbol.
    pub fn boundary_power(s: f64) -> Result<Self> {
        Self::kernel(C64::new(1.0, 0.0), 0, s)
    }

    pub fn log_kernel(w: C64) -> Result<Self> {
        Ok(AnalyticFunction::Log(LogKernel::new(w)?))
    }

    pub fn scaled(self, a: C64) -> Self {
        AnalyticFunction::Combination(vec![Term {
            coeff: a,
            deriv: 0,
            func: self,
        }])
    }

    /// `f^(d)` as a closed form.
    pub fn differentiated(self, d: usize) -> Self {
        if d == 0 {
            return self;
        }
        match self {
            AnalyticFunction::Taylor(p) => {
                let mut q = p;
                for _ in 0..d {
                    q = q.derivative();
                }
                q.into()
            }
            other => AnalyticFunction::Combination(vec![Term {
                coeff: C64::new(1.0, 0.0),
                deriv: d,
                func: other,
            }]),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            AnalyticFunction::Taylor(p) => p.is_zero(),
            AnalyticFunction::Kernel(_) | AnalyticFunction::Log(_) => false,
            AnalyticFunction::Combination(terms) => terms
                .iter()
                .all(|t| t.coeff.norm_sqr() == 0.0 || t.func.is_identically_zero()),
        }
    }

    /// `f^(d)(z)`, rejecting points outside the open disk.
    pub fn evaluate(&self, z: C64, d: usize) -> Result<C64> {
        check_in_disk(z)?;
        Ok(self.eval_unchecked(z, d))
    }

    /// Hot-path evaluation; the caller guarantees `|z| < 1`.
    pub fn eval_unchecked(&self, z: C64, d: usize) -> C64 {
        match self {
            AnalyticFunction::Taylor(p) => p.eval_deriv(z, d),
            AnalyticFunction::Kernel(k) => k.eval_deriv(z, d),
            AnalyticFunction::Log(l) => l.eval_deriv(z, d),
            AnalyticFunction::Combination(terms) => terms
                .iter()
                .map(|t| t.coeff * t.func.eval_unchecked(z, d + t.deriv))
                .sum(),
        }
    }

    /// Fills `out[d] = f^(d)(z)` for every `d < out.len()`.
    pub fn derivatives_into(&self, z: C64, out: &mut [C64]) {
        match self {
            AnalyticFunction::Kernel(k) => k.derivatives_into(z, out),
            AnalyticFunction::Combination(terms) => {
                out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
                let mut buf = Vec::new();
                for t in terms {
                    buf.clear();
                    buf.resize(out.len() + t.deriv, C64::new(0.0, 0.0));
                    t.func.derivatives_into(z, &mut buf);
                    for (o, v) in out.iter_mut().zip(&buf[t.deriv..]) {
                        *o += t.coeff * v;
                    }
                }
            }
            _ => {
                for (d, slot) in out.iter_mut().enumerate() {
                    *slot = self.eval_unchecked(z, d);
                }
            }
        }
    }

    /// Taylor truncation at `degree` plus the largest dropped coefficient
    /// magnitude among the next few orders (tail residual).
    pub fn to_taylor(&self, degree: usize) -> (TaylorPoly, f64) {
        const TAIL_PROBE: usize = 8;
        let long = self.series(degree + TAIL_PROBE);
        let tail = long.tail_above(degree);
        (long.truncate(degree), tail)
    }

    fn series(&self, degree: usize) -> TaylorPoly {
        match self {
            AnalyticFunction::Taylor(p) => {
                let mut coeffs: Vec<C64> = p.coeffs().iter().copied().take(degree + 1).collect();
                coeffs.resize(degree + 1, C64::new(0.0, 0.0));
                TaylorPoly { coeffs }
            }
            AnalyticFunction::Kernel(k) => TaylorPoly {
                coeffs: k.coefficient_iter().take(degree + 1).collect(),
            },
            AnalyticFunction::Log(l) => {
                let b = l.w.conj();
                let mut coeffs = vec![C64::new(0.0, 0.0); degree + 1];
                let mut bk = C64::new(1.0, 0.0);
                for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
                    bk *= b;
                    *c = bk / k as f64;
                }
                TaylorPoly { coeffs }
            }
            AnalyticFunction::Combination(terms) => {
                let mut acc = TaylorPoly {
                    coeffs: vec![C64::new(0.0, 0.0); degree + 1],
                };
                for t in terms {
                    let mut p = t.func.series(degree + t.deriv);
                    for _ in 0..t.deriv {
                        p = p.derivative();
                    }
                    acc = acc.add(&p.scale(t.coeff));
                }
                acc.truncate(degree)
            }
        }
    }

    /// Values at every node of `rule`, in node order.
    pub fn values_on(&self, rule: &QuadratureRule, d: usize) -> Vec<C64> {
        use rayon::prelude::*;
        rule.nodes()
            .par_iter()
            .map(|&z| self.eval_unchecked(z, d))
            .collect()
    }
}

/// Antiderivative with value 0 at the origin; closed forms are first
/// truncated to the configured working degree.
pub fn integrate_once(f: &AnalyticFunction, cfg: &SeriesConfig) -> Result<TaylorPoly> {
    let p = match f {
        AnalyticFunction::Taylor(p) => p.clone(),
        other => other.to_taylor(cfg.degree).0,
    };
    p.integrate_once(cfg)
}

/// `n`-fold application of [`integrate_once`].
pub fn integrate_n(f: &AnalyticFunction, n: usize, cfg: &SeriesConfig) -> Result<TaylorPoly> {
    let mut p = match f {
        AnalyticFunction::Taylor(p) => p.clone(),
        other => other.to_taylor(cfg.degree).0,
    };
    for _ in 0..n {
        p = p.integrate_once(cfg)?;
    }
    Ok(p)
}

/// An analytic self-map of the disk, validated on a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    phi: AnalyticFunction,
    sampled_sup: f64,
}

impl SelfMap {
    /// Validates `sup |phi| < 1` over `grid`.
    pub fn new(phi: AnalyticFunction, grid: &[C64]) -> Result<Self> {
        let sampled_sup = grid
            .iter()
            .map(|&z| phi.eval_unchecked(z, 0).norm())
            .fold(0.0, f64::max);
        if !(sampled_sup < 1.0) {
            return Err(LabError::Domain(format!(
                "self-map leaves the disk: sampled sup |phi| = {sampled_sup}"
            )));
        }
        Ok(Self { phi, sampled_sup })
    }

    /// Validates on the default boundary-graded ring grid.
    pub fn checked(phi: AnalyticFunction) -> Result<Self> {
        let grid = crate::quadrature::RingGrid::default();
        Self::new(phi, grid.points())
    }

    pub fn identity() -> Self {
        Self {
            phi: AnalyticFunction::polynomial(&[0.0, 1.0]),
            sampled_sup: 1.0,
        }
    }

    pub fn function(&self) -> &AnalyticFunction {
        &self.phi
    }

    pub fn sampled_sup(&self) -> f64 {
        self.sampled_sup
    }

    /// `phi(z)`, erroring when the image leaves the open disk.
    pub fn image(&self, z: C64) -> Result<C64> {
        let w = self.phi.eval_unchecked(z, 0);
        if w.norm() >= 1.0 {
            return Err(LabError::Domain(format!(
                "phi({z}) = {w} is outside the open disk"
            )));
        }
        Ok(w)
    }
}

/// `f(phi(z_j))` at every node of `grid`.
pub fn compose(f: &AnalyticFunction, phi: &SelfMap, grid: &QuadratureRule) -> Result<Vec<C64>> {
    compose_deriv(f, 0, phi, grid.nodes())
}

/// `f^(d)(phi(z_j))` at each of `points`.
pub fn compose_deriv(
    f: &AnalyticFunction,
    d: usize,
    phi: &SelfMap,
    points: &[C64],
) -> Result<Vec<C64>> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|&z| phi.image(z).map(|w| f.eval_unchecked(w, d)))
        .collect()
}

pub fn check_in_disk(z: C64) -> Result<()> {
    if !(z.norm() < 1.0) {
        return Err(LabError::Domain(format!(
            "point {z} is not inside the open unit disk"
        )));
    }
    Ok(())
}

/// `k (k-1) ... (k-d+1)`.
pub fn falling(k: usize, d: usize) -> f64 {
    (0..d).map(|j| (k - j) as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// JSON form of an analytic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Taylor {
        coeffs: Vec<[f64; 2]>,
    },
    Kernel {
        w: [f64; 2],
        i: usize,
        s: f64,
    },
    Log {
        w: [f64; 2],
    },
    Combination {
        terms: Vec<TermSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: [f64; 2],
    #[serde(default)]
    pub deriv: usize,
    #[serde(rename = "fn")]
    pub func: FunctionSpec,
}

fn c(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl TryFrom<&FunctionSpec> for AnalyticFunction {
    type Error = LabError;

    fn try_from(spec: &FunctionSpec) -> Result<Self> {
        Ok(match spec {
            FunctionSpec::Taylor { coeffs } => {
                TaylorPoly::new(coeffs.iter().copied().map(c).collect())?.into()
            }
            FunctionSpec::Kernel { w, i, s } => PowerKernel::new(c(*w), *i, *s)?.into(),
            FunctionSpec::Log { w } => AnalyticFunction::Log(LogKernel::new(c(*w))?),
            FunctionSpec::Combination { terms } => AnalyticFunction::Combination(
                terms
                    .iter()
                    .map(|t| {
                        Ok(Term {
                            coeff: c(t.coeff),
                            deriv: t.deriv,
                            func: AnalyticFunction::try_from(&t.func)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }
}

impl From<&AnalyticFunction> for FunctionSpec {
    fn from(f: &AnalyticFunction) -> Self {
        match f {
            AnalyticFunction::Taylor(p) => FunctionSpec::Taylor {
                coeffs: p.coeffs().iter().copied().map(pair).collect(),
            },
            AnalyticFunction::Kernel(k) => FunctionSpec::Kernel {
                w: pair(k.w),
                i: k.power,
                s: k.exponent,
            },
            AnalyticFunction::Log(l) => FunctionSpec::Log { w: pair(l.w) },
            AnalyticFunction::Combination(terms) => FunctionSpec::Combination {
                terms: terms
                    .iter()
                    .map(|t| TermSpec {
                        coeff: pair(t.coeff),
                        deriv: t.deriv,
                        func: FunctionSpec::from(&t.func),
                    })
                    .collect(),
            },
        }
    }
}

impl AnalyticFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FunctionSpec =
            serde_json::from_str(text).map_err(|e| LabError::Input(e.to_string()))?;
        AnalyticFunction::try_from(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FunctionSpec::from(self)).expect("function spec serializes")
    }
}
